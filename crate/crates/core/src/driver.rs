//! Alternating optimization (centroids, then partition), random
//! initialization, empty-group repair and restarts.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::DirectedGraph;
use crate::greedy::greedy_scan;
use crate::mincut::mcut_sweep;
use crate::objective::{sq_dist, total_cost, CostBreakdown};
use crate::partition::OrderedPartition;
use crate::penalty::{ExtReal, Penalties};
use crate::state::SolveState;
use crate::treedp::{check_arborescence, solve_tree_partition};

/// A step is committed only if it lowers the objective by more than this.
pub const IMPROVEMENT_EPS: f64 = 1e-9;

/// Greedy scans rebuild cached statistics from scratch this often.
const REVALIDATE_EVERY: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Greedy,
    TreeDp,
    Mcut,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Greedy => "greedy",
            SolverKind::TreeDp => "treedp",
            SolverKind::Mcut => "mcut",
        }
    }

    fn needs_defined_centroids(self) -> bool {
        matches!(self, SolverKind::TreeDp | SolverKind::Mcut)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(SolverKind::Greedy),
            "treedp" => Ok(SolverKind::TreeDp),
            "mcut" => Ok(SolverKind::Mcut),
            _ => Err(Error::InvalidArgument(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Stop once `(old - new) / max(old, 1)` falls below this.
    pub rel_tol: f64,
    pub solver: SolverKind,
    /// Never let a move empty a group.
    pub forbid_empty: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iters: 100,
            restarts: 10,
            seed: 0,
            rel_tol: 1e-9,
            solver: SolverKind::Greedy,
            forbid_empty: false,
        }
    }
}

impl SolveConfig {
    pub fn new(solver: SolverKind) -> Self {
        SolveConfig {
            solver,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::InvalidArgument(
                "max_iters and restarts must be at least 1".into(),
            ));
        }
        if self.rel_tol.is_nan() || self.rel_tol < 0.0 {
            return Err(Error::InvalidArgument("rel_tol must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub partition: OrderedPartition,
    /// Recomputed from scratch on `partition`.
    pub breakdown: CostBreakdown,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    pub seconds: f64,
    /// Groups still empty at the end (non-zero only when `n < k` or when
    /// empty groups were allowed).
    pub empty_groups: usize,
}

impl SolveResult {
    pub fn loss(&self) -> ExtReal {
        self.breakdown.total
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// A single greedy vertex move.
    Move,
    /// A committed pairwise cut redistribution.
    PairStep,
    /// A committed tree DP partition step.
    TreeStep,
    /// A vertex moved into an empty group.
    Repair,
}

/// Notified after every committed change to the partition.
pub trait Observer {
    fn committed(&mut self, kind: StepKind, state: &SolveState<'_>);
}

pub struct NoObserver;

impl Observer for NoObserver {
    fn committed(&mut self, _: StepKind, _: &SolveState<'_>) {}
}

impl<F: FnMut(StepKind, &SolveState<'_>)> Observer for F {
    fn committed(&mut self, kind: StepKind, state: &SolveState<'_>) {
        self(kind, state)
    }
}

/// Uniform random assignment, deterministic per `(n, k, seed)`.
pub fn random_init(n: usize, k: usize, seed: u64) -> Result<OrderedPartition> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("random_init needs n >= 1 and k >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    OrderedPartition::new(k, (0..n).map(|_| rng.random_range(0..k)).collect())
}

/// Fills empty groups (in index order) with the vertex farthest from its own
/// group mean, taken from a group with at least two members; ties go to the
/// lowest vertex id. Returns the number of groups left empty.
pub fn repair_empty_groups<O: Observer + ?Sized>(state: &mut SolveState<'_>, observer: &mut O) -> usize {
    let k = state.k();
    let n = state.partition().n();
    for target in 0..k {
        if state.group_size(target) > 0 {
            continue;
        }
        let means: Vec<Option<Vec<f64>>> = (0..k).map(|g| state.mean(g)).collect();
        let mut best: Option<(usize, f64)> = None;
        for v in 0..n {
            let g = state.group_of(v);
            if state.group_size(g) < 2 {
                continue;
            }
            let mu = means[g].as_ref().expect("non-empty group has a mean");
            let dist = sq_dist(state.features().row(v), mu);
            if best.is_none_or(|(_, b)| dist > b) {
                best = Some((v, dist));
            }
        }
        match best {
            Some((v, _)) => {
                state.commit_move(v, target);
                observer.committed(StepKind::Repair, state);
            }
            None => break,
        }
    }
    state.partition().empty_groups()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Stop {
    /// Stop when an iteration commits nothing.
    NoCommit,
    /// Additionally stop when the relative improvement drops below the
    /// configured `rel_tol`.
    RelTol,
}

fn relative_improvement(before: ExtReal, after: ExtReal) -> f64 {
    if after.infinite_units() < before.infinite_units() {
        return f64::INFINITY;
    }
    if after.infinite_units() > before.infinite_units() {
        return f64::NEG_INFINITY;
    }
    let (old, new) = (before.finite_part(), after.finite_part());
    (old - new) / old.abs().max(1.0)
}

fn tree_step<O: Observer + ?Sized>(state: &mut SolveState<'_>, observer: &mut O) -> Result<usize> {
    let centroids = state.centroids();
    let (partition, _) = solve_tree_partition(state.graph(), state.features(), &centroids, state.penalties())?;
    let changed = partition
        .assignment()
        .iter()
        .zip(state.partition().assignment())
        .filter(|(a, b)| a != b)
        .count();
    if changed == 0 {
        return Ok(0);
    }
    let mut trial = state.clone();
    trial.set_partition(partition);
    if trial.total() < state.total() + ExtReal::finite(-IMPROVEMENT_EPS) {
        *state = trial;
        observer.committed(StepKind::TreeStep, state);
        Ok(changed)
    } else {
        Ok(0)
    }
}

fn scan_order(n: usize, seed: u64, iteration: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration as u64 + 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

/// The shared outer loop: per iteration, optionally repair empty groups, then
/// run one partition step of the chosen kind (centroids are the current group
/// means, kept up to date by the state).
#[allow(clippy::too_many_arguments)]
pub(crate) fn iterate<O: Observer + ?Sized>(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    penalties: &Penalties,
    init: OrderedPartition,
    config: &SolveConfig,
    kind: SolverKind,
    stop: Stop,
    observer: &mut O,
) -> Result<SolveResult> {
    config.validate()?;
    let started = Instant::now();
    let k = init.k();
    match kind {
        SolverKind::Mcut if k < 2 => {
            return Err(Error::InvalidArgument("mcut needs k >= 2".into()));
        }
        SolverKind::TreeDp => {
            check_arborescence(graph)?;
        }
        _ => {}
    }
    let mut state = SolveState::new(graph, features, init, *penalties)?;
    let repair = config.forbid_empty || kind.needs_defined_centroids();

    let mut iterations = 0;
    let mut converged = false;
    // Repair can raise the loss, so progress is measured between iteration
    // ends and the best partition seen is what gets returned.
    let mut before = state.total();
    let mut best: Option<(ExtReal, OrderedPartition)> = None;
    while iterations < config.max_iters {
        iterations += 1;
        if repair {
            repair_empty_groups(&mut state, observer);
        }
        let changed = match kind {
            SolverKind::Greedy => {
                let order = scan_order(graph.n(), config.seed, iterations);
                let moves = greedy_scan(&mut state, &order, config.forbid_empty, observer);
                if iterations % REVALIDATE_EVERY == 0 {
                    state.rebuild();
                }
                moves
            }
            SolverKind::TreeDp => tree_step(&mut state, observer)?,
            SolverKind::Mcut => mcut_sweep(&mut state, observer)?,
        };
        debug_assert!(state.verify(1e-7).is_ok(), "{:?}", state.verify(1e-7));
        let after = state.total();
        if best.as_ref().is_none_or(|(b, _)| after < *b) {
            best = Some((after, state.partition().clone()));
        }
        if changed == 0 {
            converged = true;
            break;
        }
        let gain = relative_improvement(before, after);
        if gain <= 0.0 || (stop == Stop::RelTol && gain < config.rel_tol) {
            converged = true;
            break;
        }
        before = after;
    }

    let partition = match best {
        Some((_, p)) => p,
        None => state.into_partition(),
    };
    Ok(SolveResult {
        breakdown: total_cost(graph, features, &partition, penalties),
        empty_groups: partition.empty_groups(),
        partition,
        iterations,
        converged,
        seed: config.seed,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// One run of the alternating scheme from a random partition seeded with
/// `config.seed`.
pub fn run_iterative(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    penalties: &Penalties,
    k: usize,
    config: &SolveConfig,
) -> Result<SolveResult> {
    run_iterative_observed(graph, features, penalties, k, config, &mut NoObserver)
}

pub fn run_iterative_observed<O: Observer + ?Sized>(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    penalties: &Penalties,
    k: usize,
    config: &SolveConfig,
    observer: &mut O,
) -> Result<SolveResult> {
    let init = random_init(graph.n(), k, config.seed)?;
    iterate(graph, features, penalties, init, config, config.solver, Stop::RelTol, observer)
}

/// The alternating scheme for `config.solver` started from `init` instead of
/// a random partition.
pub fn run_from(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    penalties: &Penalties,
    init: OrderedPartition,
    config: &SolveConfig,
) -> Result<SolveResult> {
    iterate(graph, features, penalties, init, config, config.solver, Stop::RelTol, &mut NoObserver)
}

/// Runs `config.restarts` independent runs with seeds `seed, seed + 1, …`
/// in parallel and keeps the lowest loss (ties: lowest seed).
pub fn multi_restart(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    penalties: &Penalties,
    k: usize,
    config: &SolveConfig,
) -> Result<SolveResult> {
    config.validate()?;
    let runs: Vec<Result<SolveResult>> = (0..config.restarts as u64)
        .into_par_iter()
        .map(|r| {
            let cfg = SolveConfig {
                seed: config.seed.wrapping_add(r),
                ..config.clone()
            };
            run_iterative(graph, features, penalties, k, &cfg)
        })
        .collect();
    let mut best: Option<SolveResult> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.loss() < b.loss()) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn features_1d(xs: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(xs.len(), 1, xs.to_vec()).unwrap()
    }

    #[test]
    fn single_group_init() {
        let p = random_init(7, 1, 42).unwrap();
        assert!(p.assignment().iter().all(|&g| g == 0));
    }

    #[test]
    fn init_is_deterministic() {
        assert_eq!(random_init(100, 4, 9).unwrap(), random_init(100, 4, 9).unwrap());
        assert_ne!(random_init(100, 4, 9).unwrap(), random_init(100, 4, 10).unwrap());
    }

    #[test]
    fn init_group_sizes_are_binomial() {
        let (n, k) = (100_000usize, 5usize);
        let p = random_init(n, k, 3).unwrap();
        let expected = n as f64 / k as f64;
        let sigma = (n as f64 * (1.0 / k as f64) * (1.0 - 1.0 / k as f64)).sqrt();
        for size in p.sizes() {
            assert!((size as f64 - expected).abs() < 5.0 * sigma, "size {size}");
        }
    }

    #[test]
    fn repair_is_noop_without_empty_groups() {
        let g = DirectedGraph::from_edges(3, vec![]).unwrap();
        let f = features_1d(&[0.0, 1.0, 2.0]);
        let p = OrderedPartition::new(2, vec![0, 1, 0]).unwrap();
        let mut s = SolveState::new(&g, &f, p.clone(), Penalties::zero()).unwrap();
        assert_eq!(repair_empty_groups(&mut s, &mut NoObserver), 0);
        assert_eq!(s.partition(), &p);
    }

    #[test]
    fn repair_moves_the_outlier() {
        let g = DirectedGraph::from_edges(4, vec![]).unwrap();
        let f = features_1d(&[0.0, 0.1, 9.0, 0.2]);
        let p = OrderedPartition::new(2, vec![0, 0, 0, 0]).unwrap();
        let mut s = SolveState::new(&g, &f, p, Penalties::zero()).unwrap();
        assert_eq!(repair_empty_groups(&mut s, &mut NoObserver), 0);
        assert_eq!(s.partition().assignment(), &[0, 0, 1, 0]);
    }

    #[test]
    fn repair_cannot_fill_more_groups_than_vertices() {
        let g = DirectedGraph::from_edges(1, vec![]).unwrap();
        let f = features_1d(&[0.0]);
        let p = OrderedPartition::new(2, vec![0]).unwrap();
        let mut s = SolveState::new(&g, &f, p, Penalties::zero()).unwrap();
        assert_eq!(repair_empty_groups(&mut s, &mut NoObserver), 1);
    }

    #[test]
    fn four_vertex_path_with_tree_dp() {
        let g = DirectedGraph::from_edges(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let f = features_1d(&[0.0, 0.0, 1.0, 1.0]);
        let pen = Penalties::finite(0.0, 1e5);
        let cfg = SolveConfig {
            restarts: 4,
            ..SolveConfig::new(SolverKind::TreeDp)
        };
        let r = multi_restart(&g, &f, &pen, 2, &cfg).unwrap();
        assert_eq!(r.partition.assignment(), &[0, 0, 1, 1]);
        assert_eq!(r.breakdown.coherence, 0.0);
        assert_eq!((r.breakdown.forward_edges, r.breakdown.backward_edges), (1, 0));
        assert_eq!(r.loss(), ExtReal::ZERO);
    }

    #[test]
    fn single_group_runs_one_iteration() {
        let g = DirectedGraph::from_edges(3, vec![(0, 1)]).unwrap();
        let f = features_1d(&[0.0, 1.0, 2.0]);
        for kind in [SolverKind::Greedy, SolverKind::TreeDp] {
            let r = run_iterative(&g, &f, &Penalties::finite(1.0, 1.0), 1, &SolveConfig::new(kind)).unwrap();
            assert_eq!(r.iterations, 1);
            assert!(r.converged);
            assert_eq!(r.breakdown.total, ExtReal::finite(2.0));
        }
    }

    #[test]
    fn mcut_rejects_single_group() {
        let g = DirectedGraph::from_edges(2, vec![]).unwrap();
        let f = features_1d(&[0.0, 1.0]);
        let err = run_iterative(&g, &f, &Penalties::zero(), 1, &SolveConfig::new(SolverKind::Mcut));
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tree_dp_rejects_non_tree() {
        let g = DirectedGraph::from_edges(3, vec![(0, 2), (1, 2)]).unwrap();
        let f = features_1d(&[0.0, 1.0, 2.0]);
        let err = run_iterative(&g, &f, &Penalties::zero(), 2, &SolveConfig::new(SolverKind::TreeDp));
        assert!(matches!(err, Err(Error::InDegree { vertex: 2, .. })));
    }

    #[test]
    fn max_iters_one_stops_after_one_step() {
        let n = 60;
        let edges = (1..n).map(|v| (v / 2, v)).collect();
        let g = DirectedGraph::from_edges(n, edges).unwrap();
        let f = FeatureMatrix::new(n, 1, (0..n).map(|v| (v % 7) as f64).collect()).unwrap();
        let cfg = SolveConfig {
            max_iters: 1,
            ..SolveConfig::new(SolverKind::Greedy)
        };
        let r = run_iterative(&g, &f, &Penalties::finite(0.0, 2.0), 3, &cfg).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(!r.converged);
    }

    #[test]
    fn restarts_are_deterministic() {
        let n = 40;
        let edges = (1..n).map(|v| ((v * 7) % v, v)).collect();
        let g = DirectedGraph::from_edges(n, edges).unwrap();
        let f = FeatureMatrix::new(n, 1, (0..n).map(|v| ((v * 13) % 11) as f64).collect()).unwrap();
        let cfg = SolveConfig {
            restarts: 5,
            seed: 77,
            ..SolveConfig::new(SolverKind::Mcut)
        };
        let pen = Penalties::finite(0.1, 3.0);
        let a = multi_restart(&g, &f, &pen, 3, &cfg).unwrap();
        let b = multi_restart(&g, &f, &pen, 3, &cfg).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.seed, b.seed);
        for r in 0..5 {
            let single = run_iterative(&g, &f, &pen, 3, &SolveConfig { seed: 77 + r, ..cfg.clone() }).unwrap();
            assert!(a.loss() <= single.loss());
        }
    }
}
