//! Exact fixed-centroid partitioning of a forest of arborescences.
//!
//! For each vertex `v` and group `i`, `c[v][i]` is the cheapest way to
//! partition the subtree under `v` with `v` in group `i`:
//!
//! ```text
//! c[v][i] = ‖a(v) - μ_i‖² + Σ_{children w} min(c[w][i], λ_f + u[w][i], λ_b + ℓ[w][i])
//! ℓ[w][i] = min_{j < i} c[w][j]        u[w][i] = min_{j > i} c[w][j]
//! ```
//!
//! A child placed in a later group is reached by a forward edge, one placed
//! in an earlier group by a backward edge. Groups whose centroid is
//! undefined are never selected.

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::DirectedGraph;
use crate::objective::{sq_dist, Centroids};
use crate::partition::OrderedPartition;
use crate::penalty::{ExtReal, Penalties};

/// Verifies `graph` is a forest of arborescences (in-degree at most one, no
/// directed cycle) and returns its roots in ascending order.
pub fn check_arborescence(graph: &DirectedGraph) -> Result<Vec<usize>> {
    let n = graph.n();
    if let Some(v) = (0..n).find(|&v| graph.in_degree(v) > 1) {
        return Err(Error::InDegree {
            vertex: v,
            in_degree: graph.in_degree(v),
        });
    }
    let roots: Vec<usize> = (0..n).filter(|&v| graph.in_degree(v) == 0).collect();
    let order = preorder(graph, &roots);
    if order.len() < n {
        let mut seen = vec![false; n];
        order.iter().for_each(|&v| seen[v] = true);
        let v = seen.iter().position(|&s| !s).expect("some vertex unreached");
        return Err(Error::Cycle(v));
    }
    Ok(roots)
}

/// Parents before children, iterative.
fn preorder(graph: &DirectedGraph, roots: &[usize]) -> Vec<usize> {
    let mut order = Vec::with_capacity(graph.n());
    let mut stack: Vec<usize> = roots.iter().rev().copied().collect();
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(graph.out_neighbors(v).iter().rev());
    }
    order
}

/// Which of the three branches a child edge took.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Same,
    Forward,
    Backward,
}

/// Filled dynamic-programming tables; `None` marks an unreachable entry
/// (undefined centroid, or no group on that side).
#[derive(Clone, Debug)]
pub struct DpTables {
    k: usize,
    roots: Vec<usize>,
    order: Vec<usize>,
    cost: Vec<Option<ExtReal>>,
    below: Vec<Option<ExtReal>>,
    above: Vec<Option<ExtReal>>,
    below_arg: Vec<u32>,
    above_arg: Vec<u32>,
    /// `pick[w·k + i]`: group of `w` when its parent is in group `i`.
    pick: Vec<u32>,
    branch: Vec<Branch>,
    parent: Vec<usize>,
}

const NO_PARENT: usize = usize::MAX;

fn min_slot(a: Option<ExtReal>, b: Option<ExtReal>) -> Option<ExtReal> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// `a < b` with `None` as the top element.
fn slot_less(a: Option<ExtReal>, b: Option<ExtReal>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        (None, _) => false,
    }
}

impl DpTables {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn cost(&self, v: usize, i: usize) -> Option<ExtReal> {
        self.cost[v * self.k + i]
    }

    /// `min_{j < i} c[v][j]`.
    pub fn below(&self, v: usize, i: usize) -> Option<ExtReal> {
        self.below[v * self.k + i]
    }

    /// `min_{j > i} c[v][j]`.
    pub fn above(&self, v: usize, i: usize) -> Option<ExtReal> {
        self.above[v * self.k + i]
    }

    /// Branch taken by the edge into `w` when its parent sits in group `i`.
    pub fn branch(&self, w: usize, i: usize) -> Branch {
        self.branch[w * self.k + i]
    }

    /// Best group for a root: lowest index among the minima.
    fn best_root_group(&self, r: usize) -> Option<(usize, ExtReal)> {
        let mut best: Option<(usize, ExtReal)> = None;
        for i in 0..self.k {
            if let Some(c) = self.cost(r, i) {
                if best.is_none_or(|(_, b)| c < b) {
                    best = Some((i, c));
                }
            }
        }
        best
    }

    /// Optimal cost: sum of the root minima.
    pub fn optimum(&self) -> Option<ExtReal> {
        self.roots
            .iter()
            .map(|&r| self.best_root_group(r).map(|(_, c)| c))
            .sum()
    }

    /// Follows the recorded choices top-down.
    pub fn backtrack(&self) -> Vec<usize> {
        let mut assign = vec![0usize; self.order.len()];
        for &v in &self.order {
            assign[v] = match self.parent[v] {
                NO_PARENT => self.best_root_group(v).map_or(0, |(i, _)| i),
                p => self.pick[v * self.k + assign[p]] as usize,
            };
        }
        assign
    }
}

/// Fills the tables bottom-up over an explicit post-order.
pub fn tree_dp(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    centroids: &Centroids,
    penalties: &Penalties,
) -> Result<DpTables> {
    let roots = check_arborescence(graph)?;
    if features.n() != graph.n() {
        return Err(Error::SizeMismatch {
            what: "feature rows",
            expected: graph.n(),
            found: features.n(),
        });
    }
    if centroids.d() != features.d() && centroids.k() > 0 {
        return Err(Error::SizeMismatch {
            what: "centroid dimension",
            expected: features.d(),
            found: centroids.d(),
        });
    }
    let n = graph.n();
    let k = centroids.k();
    let order = preorder(graph, &roots);
    let forward = penalties.forward.unit();
    let backward = penalties.backward.unit();

    let mut t = DpTables {
        k,
        roots,
        order,
        cost: vec![None; n * k],
        below: vec![None; n * k],
        above: vec![None; n * k],
        below_arg: vec![0; n * k],
        above_arg: vec![0; n * k],
        pick: vec![0; n * k],
        branch: vec![Branch::Same; n * k],
        parent: vec![NO_PARENT; n],
    };

    for idx in (0..t.order.len()).rev() {
        let v = t.order[idx];
        let a = features.row(v);
        let row = v * k;
        for i in 0..k {
            t.cost[row + i] = centroids.get(i).map(|mu| ExtReal::finite(sq_dist(a, mu)));
        }
        for &w in graph.out_neighbors(v) {
            t.parent[w] = v;
            let wrow = w * k;
            for i in 0..k {
                if t.cost[row + i].is_none() {
                    continue;
                }
                // tie order: same, then forward, then backward
                let mut best = t.cost[wrow + i];
                let mut pick = i;
                let mut branch = Branch::Same;
                let fwd = t.above[wrow + i].map(|c| c + forward);
                if slot_less(fwd, best) {
                    best = fwd;
                    pick = t.above_arg[wrow + i] as usize;
                    branch = Branch::Forward;
                }
                let bwd = t.below[wrow + i].map(|c| c + backward);
                if slot_less(bwd, best) {
                    best = bwd;
                    pick = t.below_arg[wrow + i] as usize;
                    branch = Branch::Backward;
                }
                t.pick[wrow + i] = pick as u32;
                t.branch[wrow + i] = branch;
                t.cost[row + i] = match (t.cost[row + i], best) {
                    (Some(c), Some(b)) => Some(c + b),
                    _ => None,
                };
            }
        }
        // prefix minima from below, suffix minima from above; ties keep the lower index
        for i in 1..k {
            let (prev, prev_arg) = (t.below[row + i - 1], t.below_arg[row + i - 1]);
            let cand = t.cost[row + i - 1];
            if slot_less(cand, prev) {
                t.below[row + i] = cand;
                t.below_arg[row + i] = (i - 1) as u32;
            } else {
                t.below[row + i] = prev;
                t.below_arg[row + i] = prev_arg;
            }
        }
        for i in (0..k.saturating_sub(1)).rev() {
            let (next, next_arg) = (t.above[row + i + 1], t.above_arg[row + i + 1]);
            let cand = t.cost[row + i + 1];
            if slot_less(next, cand) {
                t.above[row + i] = next;
                t.above_arg[row + i] = next_arg;
            } else {
                t.above[row + i] = min_slot(cand, next);
                t.above_arg[row + i] = (i + 1) as u32;
            }
        }
    }
    Ok(t)
}

/// Exact minimizer of the fixed-centroid objective on a forest of
/// arborescences, with its cost.
pub fn solve_tree_partition(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    centroids: &Centroids,
    penalties: &Penalties,
) -> Result<(OrderedPartition, ExtReal)> {
    let tables = tree_dp(graph, features, centroids, penalties)?;
    let cost = match tables.optimum() {
        Some(c) => c,
        None if graph.n() == 0 => ExtReal::ZERO,
        None => {
            return Err(Error::InvalidArgument(
                "no group has a defined centroid".into(),
            ))
        }
    };
    let partition = OrderedPartition::new(centroids.k(), tables.backtrack())?;
    Ok((partition, cost))
}
