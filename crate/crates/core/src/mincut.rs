//! Cut-based partition steps: the exact two-group solver and the pairwise
//! improvement sweep for `k > 2`.
//!
//! Vertices on the source side of a cut go to the earlier group, vertices on
//! the sink side to the later one. The arc `s → v` is cut when `v` lands in
//! the later group, so it carries the cost of that placement; `v → t` carries
//! the cost of the earlier placement. For an edge `v → w` the arc `v → w`
//! (cut when `v` is earlier and `w` later) weighs `λ_f` and the arc `w → v`
//! weighs `λ_b`.

use crate::driver::{iterate, Observer, SolveConfig, SolveResult, SolverKind, StepKind, Stop, IMPROVEMENT_EPS};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::flow::{max_flow_min_cut, FlowNetwork};
use crate::graph::DirectedGraph;
use crate::objective::sq_dist;
use crate::partition::OrderedPartition;
use crate::penalty::{ExtReal, Penalties};
use crate::state::SolveState;

/// Network for the two-group fixed-centroid problem on the whole graph.
/// Vertex `v` is node `v`; the source is node `n` and the sink node `n + 1`.
pub fn build_cut_graph_k2(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    mu1: &[f64],
    mu2: &[f64],
    penalties: &Penalties,
) -> FlowNetwork {
    let n = graph.n();
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2, s, t);
    for v in 0..n {
        let a = features.row(v);
        net.add_arc(s, v, ExtReal::finite(sq_dist(a, mu2)));
        net.add_arc(v, t, ExtReal::finite(sq_dist(a, mu1)));
    }
    let (fwd, bwd) = (penalties.forward.unit(), penalties.backward.unit());
    for &(v, w) in graph.edges() {
        net.add_arc(v, w, fwd);
        net.add_arc(w, v, bwd);
    }
    net
}

/// Exact minimizer of the fixed-centroid objective for `k = 2`; the cost is
/// the minimum cut value.
pub fn solve_two_partition(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    mu1: &[f64],
    mu2: &[f64],
    penalties: &Penalties,
) -> (OrderedPartition, ExtReal) {
    let net = build_cut_graph_k2(graph, features, mu1, mu2, penalties);
    let cut = max_flow_min_cut(&net);
    let assign = (0..graph.n())
        .map(|v| if cut.source_side[v] { 0 } else { 1 })
        .collect();
    let partition = OrderedPartition::new(2, assign).expect("two groups");
    (partition, cut.value)
}

/// Cut network redistributing groups `lower < upper` of a state.
#[derive(Clone, Debug)]
pub struct PairNetwork {
    pub network: FlowNetwork,
    /// Node `x < vertices.len()` stands for graph vertex `vertices[x]`.
    pub vertices: Vec<usize>,
    pub lower: usize,
    pub upper: usize,
}

/// Builds the network whose minimum cut optimally splits `S_lower ∪ S_upper`
/// between the two groups with every other group and all centroids fixed.
/// Edges into or out of the groups strictly between them are folded into the
/// terminal arcs; edges to groups outside `lower..=upper` cost the same
/// either way and are left out.
pub fn build_cut_graph_pair(state: &SolveState<'_>, lower: usize, upper: usize) -> Result<PairNetwork> {
    assert!(lower < upper && upper < state.k(), "need lower < upper < k");
    let graph = state.graph();
    let features = state.features();
    let penalties = state.penalties();
    let vertices: Vec<usize> = (0..graph.n())
        .filter(|&v| matches!(state.group_of(v), g if g == lower || g == upper))
        .collect();
    let s = vertices.len();
    let t = s + 1;
    let mut network = FlowNetwork::new(s + 2, s, t);
    if vertices.is_empty() {
        return Ok(PairNetwork {
            network,
            vertices,
            lower,
            upper,
        });
    }
    let mu_lower = state.mean(lower).ok_or(Error::UndefinedCentroid(lower + 1))?;
    let mu_upper = state.mean(upper).ok_or(Error::UndefinedCentroid(upper + 1))?;

    let mut local = vec![usize::MAX; graph.n()];
    for (x, &v) in vertices.iter().enumerate() {
        local[v] = x;
    }
    let between = |g: usize| g > lower && g < upper;
    let (fwd, bwd) = (penalties.forward, penalties.backward);

    for (x, &v) in vertices.iter().enumerate() {
        let a = features.row(v);
        let from_between = graph.in_neighbors(v).iter().filter(|&&u| between(state.group_of(u))).count() as i64;
        let to_between = graph.out_neighbors(v).iter().filter(|&&w| between(state.group_of(w))).count() as i64;
        let as_upper = ExtReal::finite(sq_dist(a, &mu_upper)) + fwd.times(from_between) + bwd.times(to_between);
        let as_lower = ExtReal::finite(sq_dist(a, &mu_lower)) + bwd.times(from_between) + fwd.times(to_between);
        network.add_arc(s, x, as_upper);
        network.add_arc(x, t, as_lower);
    }
    for &v in &vertices {
        for &w in graph.out_neighbors(v) {
            if local[w] != usize::MAX {
                network.add_arc(local[v], local[w], fwd.unit());
                network.add_arc(local[w], local[v], bwd.unit());
            }
        }
    }
    Ok(PairNetwork {
        network,
        vertices,
        lower,
        upper,
    })
}

/// Optimal redistribution of the pair as `(vertex, new group)` for every
/// vertex of the union.
pub fn solve_pair(state: &SolveState<'_>, lower: usize, upper: usize) -> Result<Vec<(usize, usize)>> {
    let pair = build_cut_graph_pair(state, lower, upper)?;
    if pair.vertices.is_empty() {
        return Ok(Vec::new());
    }
    let cut = max_flow_min_cut(&pair.network);
    Ok(pair
        .vertices
        .iter()
        .enumerate()
        .map(|(x, &v)| (v, if cut.source_side[x] { lower } else { upper }))
        .collect())
}

/// Solves one pair and commits the result when the objective (with refreshed
/// means) drops by more than [`IMPROVEMENT_EPS`]. Returns the number of
/// vertices that changed group.
pub fn pair_step<O: Observer + ?Sized>(
    state: &mut SolveState<'_>,
    lower: usize,
    upper: usize,
    observer: &mut O,
) -> Result<usize> {
    if state.group_size(lower) == 0 || state.group_size(upper) == 0 {
        return Ok(0);
    }
    let before = state.total();
    let mut undo = Vec::new();
    for (v, g) in solve_pair(state, lower, upper)? {
        let old = state.group_of(v);
        if old != g {
            state.commit_move(v, g);
            undo.push((v, old));
        }
    }
    if undo.is_empty() {
        return Ok(0);
    }
    if state.total() < before + ExtReal::finite(-IMPROVEMENT_EPS) {
        observer.committed(StepKind::PairStep, state);
        Ok(undo.len())
    } else {
        for &(v, old) in undo.iter().rev() {
            state.commit_move(v, old);
        }
        Ok(0)
    }
}

/// One sweep over all pairs `(1,2), (1,3), …, (k-1,k)`.
pub fn mcut_sweep<O: Observer + ?Sized>(state: &mut SolveState<'_>, observer: &mut O) -> Result<usize> {
    let k = state.k();
    let mut changed = 0;
    for lower in 0..k {
        for upper in lower + 1..k {
            changed += pair_step(state, lower, upper, observer)?;
        }
    }
    Ok(changed)
}

/// Pairwise min-cut search from `init`, sweeping until a sweep commits
/// nothing or `config.max_iters` sweeps ran.
pub fn run_mcut(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    penalties: &Penalties,
    init: OrderedPartition,
    config: &SolveConfig,
) -> Result<SolveResult> {
    run_mcut_observed(graph, features, penalties, init, config, &mut crate::driver::NoObserver)
}

pub fn run_mcut_observed<O: Observer + ?Sized>(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    penalties: &Penalties,
    init: OrderedPartition,
    config: &SolveConfig,
    observer: &mut O,
) -> Result<SolveResult> {
    iterate(graph, features, penalties, init, config, SolverKind::Mcut, Stop::NoCommit, observer)
}
