use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dgseg::experiments::{
    default_penalty_settings, run_noise_sweep, write_sweep_csv, GraphModel, InstanceSpec, SweepConfig,
    DEFAULT_EDGE_PROB, DEFAULT_VARIANCE,
};
use dgseg::oracle::brute_force_dgs;
use dgseg::{
    adjusted_rand_index, inject_noise, load_assignment, load_features, load_graph, multi_restart, total_cost,
    CostBreakdown, DirectedGraph, FeatureMatrix, OrderedPartition, Penalties, Penalty, SolveConfig, SolverKind,
};
use serde::Serialize;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "dgseg", version, about = "Ordered segmentation of directed feature graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a graph and write the result as JSON.
    Solve(SolveArgs),
    /// Generate a synthetic tree or DAG instance with ground truth.
    Synth(SynthArgs),
    /// Print the Adjusted Rand Index between two assignments.
    Eval(EvalArgs),
    /// Run the noise sweep and write one CSV row per (p, penalty) cell.
    Sweep(SweepArgs),
    /// Exhaustive exact solve for tiny inputs.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Greedy,
    Treedp,
    Mcut,
}

impl From<Algo> for SolverKind {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Greedy => SolverKind::Greedy,
            Algo::Treedp => SolverKind::TreeDp,
            Algo::Mcut => SolverKind::Mcut,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Tree,
    Dag,
}

impl From<Model> for GraphModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Tree => GraphModel::Tree,
            Model::Dag => GraphModel::Dag,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Edge list: optional vertex-count header, then one "u v" pair per line.
    #[arg(long)]
    graph: PathBuf,
    /// Feature table: "id,x1,...,xd" per vertex.
    #[arg(long)]
    features: PathBuf,
    /// Number of groups.
    #[arg(long)]
    k: usize,
    /// Penalty per forward cross edge (a number or "inf").
    #[arg(long, default_value = "0")]
    lambda_f: Penalty,
    /// Penalty per backward cross edge (a number or "inf").
    #[arg(long, default_value = "0")]
    lambda_b: Penalty,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "greedy")]
    algo: Algo,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Never let a move empty a group.
    #[arg(long)]
    forbid_empty: bool,
    /// Worker threads for restarts (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Ground-truth assignment; adds an "ari" field to the result.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "tree")]
    model: Model,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    d: usize,
    #[arg(long, default_value_t = 5)]
    clusters: usize,
    /// Per-dimension variance of the features around their centroid.
    #[arg(long, default_value_t = DEFAULT_VARIANCE)]
    variance: f64,
    /// Probability of each extra forward pair edge (dag model only).
    #[arg(long, default_value_t = DEFAULT_EDGE_PROB)]
    edge_prob: f64,
    /// Probability of redrawing each vertex's feature around a random centroid.
    #[arg(long, default_value_t = 0.0)]
    noise_p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes <prefix>.edges, <prefix>.features.csv and <prefix>.truth.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Result JSON from `solve`, or "vertex,group" lines.
    #[arg(long)]
    pred: PathBuf,
    /// Result JSON or "vertex,group" lines.
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "tree")]
    model: Model,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    d: usize,
    #[arg(long, default_value_t = 5)]
    clusters: usize,
    #[arg(long, default_value_t = DEFAULT_VARIANCE)]
    variance: f64,
    #[arg(long, default_value_t = DEFAULT_EDGE_PROB)]
    edge_prob: f64,
    #[arg(long, value_enum, default_value = "treedp")]
    algo: Algo,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instances per cell; the row reports the mean.
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    /// Noise levels to sweep.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
    p: Vec<f64>,
    /// Penalty setting "lambda_f:lambda_b"; repeatable. Default: "0:0" and "0:1e5".
    #[arg(long = "setting")]
    settings: Vec<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct ResultJson {
    n: usize,
    m: usize,
    k: usize,
    lambda_f: Value,
    lambda_b: Value,
    algo: String,
    seed: u64,
    assignment: Vec<usize>,
    coherence: f64,
    forward_edges: u64,
    backward_edges: u64,
    total: Value,
    iterations: usize,
    converged: bool,
    seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ari: Option<f64>,
}

fn number_or_inf(x: f64) -> Value {
    if x.is_infinite() {
        Value::String("inf".into())
    } else {
        serde_json::json!(x)
    }
}

#[allow(clippy::too_many_arguments)]
fn result_json(
    graph: &DirectedGraph,
    penalties: &Penalties,
    algo: &str,
    seed: u64,
    partition: &OrderedPartition,
    breakdown: &CostBreakdown,
    iterations: usize,
    converged: bool,
    seconds: f64,
) -> ResultJson {
    ResultJson {
        n: graph.n(),
        m: graph.m(),
        k: partition.k(),
        lambda_f: number_or_inf(penalties.forward.to_f64()),
        lambda_b: number_or_inf(penalties.backward.to_f64()),
        algo: algo.to_string(),
        seed,
        assignment: partition.one_based(),
        coherence: breakdown.coherence,
        forward_edges: breakdown.forward_edges,
        backward_edges: breakdown.backward_edges,
        total: number_or_inf(breakdown.total.to_f64()),
        iterations,
        converged,
        seconds,
        ari: None,
    }
}

/// Writes through a temporary sibling file so that `path` only ever holds
/// complete output.
fn write_atomic(path: &Path, fill: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let file = File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
    let mut out = BufWriter::new(file);
    let filled = fill(&mut out).and_then(|()| out.flush().map_err(Into::into));
    if let Err(e) = filled {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    drop(out);
    fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn load_inputs(args: &InputArgs) -> Result<(DirectedGraph, FeatureMatrix, Penalties)> {
    if args.k == 0 {
        bail!("--k must be at least 1");
    }
    let graph = load_graph(open(&args.graph)?).with_context(|| format!("reading {}", args.graph.display()))?;
    let features =
        load_features(open(&args.features)?, &graph).with_context(|| format!("reading {}", args.features.display()))?;
    Ok((graph, features, Penalties::new(args.lambda_f, args.lambda_b)))
}

/// Reads either a result JSON (its "assignment" array) or "vertex,group" lines.
fn read_labels(path: &Path) -> Result<OrderedPartition> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot open {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let labels: Vec<usize> = serde_json::from_value(
            value
                .get("assignment")
                .cloned()
                .with_context(|| format!("{} has no \"assignment\" field", path.display()))?,
        )?;
        let k = labels.iter().copied().max().unwrap_or(0);
        if labels.contains(&0) {
            bail!("{}: group labels are 1-based", path.display());
        }
        return Ok(OrderedPartition::from_one_based(k, &labels)?);
    }
    load_assignment(text.as_bytes(), None).with_context(|| format!("reading {}", path.display()))
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(t) = threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    set_threads(args.threads)?;
    let (graph, features, penalties) = load_inputs(&args.input)?;
    let truth = args.truth.as_deref().map(read_labels).transpose()?;
    let config = SolveConfig {
        max_iters: args.max_iters,
        restarts: args.restarts,
        seed: args.seed,
        solver: args.algo.into(),
        forbid_empty: args.forbid_empty,
        ..SolveConfig::default()
    };
    let started = Instant::now();
    let result = multi_restart(&graph, &features, &penalties, args.input.k, &config)?;
    let mut json = result_json(
        &graph,
        &penalties,
        config.solver.name(),
        result.seed,
        &result.partition,
        &result.breakdown,
        result.iterations,
        result.converged,
        started.elapsed().as_secs_f64(),
    );
    if let Some(truth) = truth {
        json.ari = Some(adjusted_rand_index(&result.partition, &truth)?);
    }
    if result.empty_groups > 0 {
        eprintln!("warning: {} group(s) are empty", result.empty_groups);
    }
    write_atomic(&args.out, |w| Ok(serde_json::to_writer_pretty(&mut *w, &json)?))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = InstanceSpec {
        model: args.model.into(),
        n: args.n,
        d: args.d,
        k: args.clusters,
        variance: args.variance,
        edge_prob: args.edge_prob,
    };
    let mut instance = spec.generate(args.seed)?;
    if args.noise_p > 0.0 {
        instance = inject_noise(&instance, args.noise_p, args.seed)?;
    }
    write_atomic(&with_suffix(&args.out_prefix, ".edges"), |w| {
        Ok(instance.graph.write_edge_list(w)?)
    })?;
    write_atomic(&with_suffix(&args.out_prefix, ".features.csv"), |w| {
        Ok(instance.features.write_table(w)?)
    })?;
    write_atomic(&with_suffix(&args.out_prefix, ".truth"), |w| {
        Ok(instance.ground_truth.write_assignment(w)?)
    })
}

fn eval(args: EvalArgs) -> Result<()> {
    let pred = read_labels(&args.pred)?;
    let truth = read_labels(&args.truth)?;
    println!("{:?}", adjusted_rand_index(&pred, &truth)?);
    Ok(())
}

fn parse_setting(s: &str) -> Result<Penalties> {
    let Some((f, b)) = s.split_once(':') else {
        bail!("invalid setting '{s}', expected lambda_f:lambda_b");
    };
    Ok(Penalties::new(f.parse()?, b.parse()?))
}

fn sweep(args: SweepArgs) -> Result<()> {
    set_threads(args.threads)?;
    let settings = if args.settings.is_empty() {
        default_penalty_settings()
    } else {
        args.settings.iter().map(|s| parse_setting(s)).collect::<Result<_>>()?
    };
    let config = SweepConfig {
        instance: InstanceSpec {
            model: args.model.into(),
            n: args.n,
            d: args.d,
            k: args.clusters,
            variance: args.variance,
            edge_prob: args.edge_prob,
        },
        replicates: args.replicates,
        instance_seed: args.seed,
        solve: SolveConfig {
            max_iters: args.max_iters,
            restarts: args.restarts,
            seed: args.seed,
            solver: args.algo.into(),
            ..SolveConfig::default()
        },
    };
    let rows = run_noise_sweep(&config, &settings, &args.p)?;
    write_atomic(&args.out, |w| Ok(write_sweep_csv(&rows, w)?))
}

fn oracle(args: OracleArgs) -> Result<()> {
    let (graph, features, penalties) = load_inputs(&args.input)?;
    let started = Instant::now();
    let (partition, _) = brute_force_dgs(&graph, &features, &penalties, args.input.k)?;
    let breakdown = total_cost(&graph, &features, &partition, &penalties);
    let json = result_json(
        &graph,
        &penalties,
        "oracle",
        0,
        &partition,
        &breakdown,
        0,
        true,
        started.elapsed().as_secs_f64(),
    );
    write_atomic(&args.out, |w| Ok(serde_json::to_writer_pretty(&mut *w, &json)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Synth(a) => synth(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::Oracle(a) => oracle(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
