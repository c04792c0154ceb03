//! Synthetic benchmark instances, label noise, the Adjusted Rand Index and
//! the noise-sweep runner.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::driver::{multi_restart, SolveConfig};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::DirectedGraph;
use crate::partition::OrderedPartition;
use crate::penalty::{Penalties, Penalty};

/// Per-dimension feature variance used by default. See the README for why
/// this is smaller than the "0.1" one might expect.
pub const DEFAULT_VARIANCE: f64 = 0.01;
pub const DEFAULT_EDGE_PROB: f64 = 0.01;

// Independent random streams derived from one seed, so that adding pair
// edges does not perturb the tree or the features.
const STREAM_TREE: u64 = 1;
const STREAM_CENTROIDS: u64 = 2;
const STREAM_FEATURES: u64 = 3;
const STREAM_PAIRS: u64 = 4;
const STREAM_NOISE: u64 = 5;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Clone, Debug)]
pub struct SyntheticInstance {
    pub graph: DirectedGraph,
    pub features: FeatureMatrix,
    /// Contiguous id blocks of size `n / k`.
    pub ground_truth: OrderedPartition,
    /// One row per block.
    pub true_centroids: Vec<Vec<f64>>,
    pub variance: f64,
    /// Vertices whose features were redrawn by [`inject_noise`].
    pub reassigned: Vec<bool>,
}

fn normal(variance: f64) -> Result<Normal<f64>> {
    if !variance.is_finite() || variance < 0.0 {
        return Err(Error::InvalidArgument(format!("variance must be finite and non-negative, got {variance}")));
    }
    Normal::new(0.0, variance.sqrt()).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {p}")))
    }
}

fn draw_point<R: Rng>(center: &[f64], noise: &Normal<f64>, rng: &mut R, out: &mut [f64]) {
    for (x, c) in out.iter_mut().zip(center) {
        *x = c + noise.sample(rng);
    }
}

fn tree_edges(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = stream(seed, STREAM_TREE);
    (1..n).map(|v| (rng.random_range(0..v), v)).collect()
}

/// Random recursive tree rooted at vertex 0 (each later vertex gets an edge
/// from a uniformly chosen earlier one) with Gaussian blobs around `k`
/// centroids drawn uniformly from the unit cube.
pub fn gen_stree(n: usize, d: usize, k: usize, variance: f64, seed: u64) -> Result<SyntheticInstance> {
    if n == 0 || k == 0 || d == 0 {
        return Err(Error::InvalidArgument("n, d and k must be positive".into()));
    }
    if !n.is_multiple_of(k) {
        return Err(Error::InvalidArgument(format!("n = {n} is not divisible by k = {k}")));
    }
    let noise = normal(variance)?;
    let block = n / k;

    let mut rng = stream(seed, STREAM_CENTROIDS);
    let true_centroids: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();

    let mut rng = stream(seed, STREAM_FEATURES);
    let mut values = vec![0.0; n * d];
    for v in 0..n {
        draw_point(&true_centroids[v / block], &noise, &mut rng, &mut values[v * d..(v + 1) * d]);
    }

    Ok(SyntheticInstance {
        graph: DirectedGraph::from_edges(n, tree_edges(n, seed))?,
        features: FeatureMatrix::new(n, d, values)?,
        ground_truth: OrderedPartition::new(k, (0..n).map(|v| v / block).collect())?,
        true_centroids,
        variance,
        reassigned: vec![false; n],
    })
}

/// [`gen_stree`] plus an independent forward edge `i → j` for every pair
/// `i < j` with probability `edge_prob`. Pair edges may duplicate tree edges.
pub fn gen_sdag(
    n: usize,
    d: usize,
    k: usize,
    variance: f64,
    edge_prob: f64,
    seed: u64,
) -> Result<SyntheticInstance> {
    check_probability("edge_prob", edge_prob)?;
    let mut instance = gen_stree(n, d, k, variance, seed)?;
    if edge_prob == 0.0 {
        return Ok(instance);
    }
    let mut edges = instance.graph.edges().to_vec();
    let mut rng = stream(seed, STREAM_PAIRS);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(edge_prob) {
                edges.push((i, j));
            }
        }
    }
    instance.graph = DirectedGraph::from_edges(n, edges)?;
    Ok(instance)
}

/// Independently for each vertex, with probability `p`, replaces its feature
/// with a fresh draw around a uniformly chosen true centroid (possibly its
/// own). The graph and ground truth are untouched.
pub fn inject_noise(instance: &SyntheticInstance, p: f64, seed: u64) -> Result<SyntheticInstance> {
    check_probability("p", p)?;
    let noise = normal(instance.variance)?;
    let mut out = instance.clone();
    let k = out.true_centroids.len();
    let mut rng = stream(seed, STREAM_NOISE);
    for v in 0..out.features.n() {
        if rng.random_bool(p) {
            let c = rng.random_range(0..k);
            draw_point(&out.true_centroids[c], &noise, &mut rng, out.features.row_mut(v));
            out.reassigned[v] = true;
        }
    }
    Ok(out)
}

fn pairs(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

/// Adjusted Rand Index of two set partitions (group order is irrelevant).
///
/// All pair counts are integers, so the index is formed exactly and rounded
/// once by the final division.
pub fn adjusted_rand_index(p: &OrderedPartition, q: &OrderedPartition) -> Result<f64> {
    if p.n() != q.n() {
        return Err(Error::SizeMismatch {
            what: "partition length",
            expected: p.n(),
            found: q.n(),
        });
    }
    let n = p.n();
    if n < 2 {
        return Err(Error::InvalidArgument("the ARI needs at least two vertices".into()));
    }
    let (kp, kq) = (p.k(), q.k());
    let mut table = vec![0u64; kp * kq];
    for v in 0..n {
        table[p.group_of(v) * kq + q.group_of(v)] += 1;
    }
    let index: i128 = table.iter().map(|&c| pairs(c)).sum();
    let a: i128 = p.sizes().iter().map(|&x| pairs(x as u64)).sum();
    let b: i128 = q.sizes().iter().map(|&x| pairs(x as u64)).sum();
    let total = pairs(n as u64);
    // (index - a·b/total) / ((a + b)/2 - a·b/total), scaled by 2·total.
    let numerator = 2 * (index * total - a * b);
    let denominator = (a + b) * total - 2 * a * b;
    if denominator == 0 {
        // Both partitions are all singletons or both are a single group.
        return Ok(1.0);
    }
    Ok(numerator as f64 / denominator as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GraphModel {
    Tree,
    Dag,
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphModel::Tree => "tree",
            GraphModel::Dag => "dag",
        })
    }
}

impl FromStr for GraphModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(GraphModel::Tree),
            "dag" => Ok(GraphModel::Dag),
            _ => Err(Error::InvalidArgument(format!("unknown graph model '{s}'"))),
        }
    }
}

/// Parameters of one synthetic instance family.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub model: GraphModel,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub variance: f64,
    pub edge_prob: f64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec {
            model: GraphModel::Tree,
            n: 1000,
            d: 10,
            k: 5,
            variance: DEFAULT_VARIANCE,
            edge_prob: DEFAULT_EDGE_PROB,
        }
    }
}

impl InstanceSpec {
    pub fn generate(&self, seed: u64) -> Result<SyntheticInstance> {
        match self.model {
            GraphModel::Tree => gen_stree(self.n, self.d, self.k, self.variance, seed),
            GraphModel::Dag => gen_sdag(self.n, self.d, self.k, self.variance, self.edge_prob, seed),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub instance: InstanceSpec,
    /// Each cell is averaged over instances generated with seeds
    /// `instance_seed, instance_seed + 1, …`.
    pub replicates: usize,
    pub instance_seed: u64,
    pub solve: SolveConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            instance: InstanceSpec::default(),
            replicates: 1,
            instance_seed: 0,
            solve: SolveConfig::default(),
        }
    }
}

/// The two settings compared by default: no penalties, and a heavy penalty
/// on backward edges only.
pub fn default_penalty_settings() -> Vec<Penalties> {
    vec![Penalties::zero(), Penalties::finite(0.0, 1e5)]
}

/// One sweep cell, averaged over replicates.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub lambda_f: Penalty,
    pub lambda_b: Penalty,
    pub solver: String,
    /// Mean of the best loss per replicate (infinite if any was infinite).
    pub loss: f64,
    pub ari: f64,
    pub iterations: f64,
    /// Total wall time of the cell.
    pub seconds: f64,
}

/// For every `p` (outer) and penalty setting (inner): perturb each replicate
/// instance with noise level `p`, solve with restarts and score against the
/// ground truth. Rows come back in that order.
pub fn run_noise_sweep(config: &SweepConfig, penalties: &[Penalties], p_grid: &[f64]) -> Result<Vec<SweepRow>> {
    if config.replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be at least 1".into()));
    }
    for &p in p_grid {
        check_probability("p", p)?;
    }
    let bases: Vec<SyntheticInstance> = (0..config.replicates as u64)
        .map(|r| config.instance.generate(config.instance_seed.wrapping_add(r)))
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, f64, Penalties)> = p_grid
        .iter()
        .enumerate()
        .flat_map(|(pi, &p)| penalties.iter().map(move |pen| (pi, p, *pen)))
        .collect();

    cells
        .par_iter()
        .map(|&(pi, p, pen)| {
            let (mut loss, mut ari, mut iterations, mut seconds) = (0.0, 0.0, 0.0, 0.0);
            for (r, base) in bases.iter().enumerate() {
                let noise_seed = config.instance_seed.wrapping_add(r as u64) ^ ((pi as u64 + 1) << 32);
                let inst = inject_noise(base, p, noise_seed)?;
                let result = multi_restart(&inst.graph, &inst.features, &pen, config.instance.k, &config.solve)?;
                loss += result.loss().to_f64();
                ari += adjusted_rand_index(&result.partition, &inst.ground_truth)?;
                iterations += result.iterations as f64;
                seconds += result.seconds;
            }
            let reps = config.replicates as f64;
            Ok(SweepRow {
                p,
                lambda_f: pen.forward,
                lambda_b: pen.backward,
                solver: config.solve.solver.name().to_string(),
                loss: loss / reps,
                ari: ari / reps,
                iterations: iterations / reps,
                seconds,
            })
        })
        .collect()
}

pub const SWEEP_HEADER: &str = "p,lambda_f,lambda_b,solver,loss,ari,iterations,seconds";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(SWEEP_HEADER.split(','))?;
    for row in rows {
        writer.write_record([
            row.p.to_string(),
            row.lambda_f.to_string(),
            row.lambda_b.to_string(),
            row.solver.clone(),
            row.loss.to_string(),
            row.ari.to_string(),
            row.iterations.to_string(),
            format!("{:.6}", row.seconds),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
