//! Greedy local search: each vertex in turn moves to the group that lowers
//! the objective most, committing immediately.

use crate::driver::{iterate, NoObserver, Observer, SolveConfig, SolveResult, SolverKind, StepKind, Stop, IMPROVEMENT_EPS};
use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::graph::DirectedGraph;
use crate::partition::OrderedPartition;
use crate::penalty::{ExtReal, Penalties};
use crate::state::SolveState;

/// Reusable per-group neighbor tallies for [`MoveEvaluator::best_move`].
#[derive(Clone, Debug, Default)]
pub struct MoveEvaluator {
    out_by_group: Vec<i64>,
    in_by_group: Vec<i64>,
    forbid_empty: bool,
}

impl MoveEvaluator {
    pub fn new(k: usize, forbid_empty: bool) -> Self {
        MoveEvaluator {
            out_by_group: vec![0; k],
            in_by_group: vec![0; k],
            forbid_empty,
        }
    }

    /// Best target for `v` and its delta. Staying put (delta 0) wins ties;
    /// among moves the lowest group index wins. Runs in `O(kd + deg v)`:
    /// neighbors are binned by group once and forward/backward counts for
    /// every target come from prefix sums over the bins.
    pub fn best_move(&mut self, state: &SolveState<'_>, v: usize) -> (usize, ExtReal) {
        let k = state.k();
        let i = state.group_of(v);
        let mut best = (i, ExtReal::ZERO);
        if k < 2 || (self.forbid_empty && state.group_size(i) == 1) {
            return best;
        }
        self.out_by_group.clear();
        self.out_by_group.resize(k, 0);
        self.in_by_group.clear();
        self.in_by_group.resize(k, 0);
        let graph = state.graph();
        for &w in graph.out_neighbors(v) {
            self.out_by_group[state.group_of(w)] += 1;
        }
        for &u in graph.in_neighbors(v) {
            self.in_by_group[state.group_of(u)] += 1;
        }
        let total_out: i64 = self.out_by_group.iter().sum();
        let total_in: i64 = self.in_by_group.iter().sum();

        // (forward, backward) incident cross edges if v sat in group g
        let mut counts = Vec::with_capacity(k);
        let (mut out_below, mut in_below) = (0i64, 0i64);
        for g in 0..k {
            let (out_g, in_g) = (self.out_by_group[g], self.in_by_group[g]);
            let forward = (total_out - out_below - out_g) + in_below;
            let backward = out_below + (total_in - in_below - in_g);
            counts.push((forward, backward));
            out_below += out_g;
            in_below += in_g;
        }

        let penalties = state.penalties();
        let removal = state.removal_gain(v);
        let (f_here, b_here) = counts[i];
        for (j, &(f_there, b_there)) in counts.iter().enumerate() {
            if j == i {
                continue;
            }
            let delta = ExtReal::finite(state.insertion_cost(v, j) - removal)
                + penalties.edge_cost(f_there - f_here, b_there - b_here);
            if delta < best.1 {
                best = (j, delta);
            }
        }
        best
    }
}

/// Convenience wrapper around [`MoveEvaluator::best_move`].
pub fn best_move(state: &SolveState<'_>, v: usize) -> (usize, ExtReal) {
    MoveEvaluator::new(state.k(), false).best_move(state, v)
}

/// Visits the vertices in `order`, committing every move that lowers the
/// objective by more than [`IMPROVEMENT_EPS`]. Returns the number of moves.
pub fn greedy_scan<O: Observer + ?Sized>(
    state: &mut SolveState<'_>,
    order: &[usize],
    forbid_empty: bool,
    observer: &mut O,
) -> usize {
    let mut evaluator = MoveEvaluator::new(state.k(), forbid_empty);
    let threshold = ExtReal::finite(-IMPROVEMENT_EPS);
    let mut moves = 0;
    for &v in order {
        let (j, delta) = evaluator.best_move(state, v);
        if j != state.group_of(v) && delta < threshold {
            state.commit_move(v, j);
            observer.committed(StepKind::Move, state);
            moves += 1;
        }
    }
    moves
}

/// Greedy search from `init` until a full scan moves nothing or
/// `config.max_iters` scans ran.
pub fn run_greedy(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    penalties: &Penalties,
    init: OrderedPartition,
    config: &SolveConfig,
) -> Result<SolveResult> {
    run_greedy_observed(graph, features, penalties, init, config, &mut NoObserver)
}

pub fn run_greedy_observed<O: Observer + ?Sized>(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    penalties: &Penalties,
    init: OrderedPartition,
    config: &SolveConfig,
    observer: &mut O,
) -> Result<SolveResult> {
    iterate(graph, features, penalties, init, config, SolverKind::Greedy, Stop::NoCommit, observer)
}
