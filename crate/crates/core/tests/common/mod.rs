#![allow(dead_code)]

use dgseg::flow::FlowNetwork;
use dgseg::{Centroids, DirectedGraph, ExtReal, FeatureMatrix, Penalties, Penalty};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random forest of arborescences: each vertex after the first either starts a
/// new tree or hangs below an earlier vertex; ids are then shuffled so that
/// parents are not always smaller.
pub fn random_forest(n: usize, rng: &mut ChaCha8Rng) -> DirectedGraph {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut edges = Vec::new();
    for v in 1..n {
        if rng.random_bool(0.85) {
            edges.push((perm[rng.random_range(0..v)], perm[v]));
        }
    }
    DirectedGraph::from_edges(n, edges).unwrap()
}

/// Random digraph without self-loops; parallel edges allowed.
pub fn random_digraph(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DirectedGraph {
    let mut edges = Vec::with_capacity(m);
    if n >= 2 {
        while edges.len() < m {
            let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
            if u != v {
                edges.push((u, v));
            }
        }
    }
    DirectedGraph::from_edges(n, edges).unwrap()
}

pub fn random_features(n: usize, d: usize, rng: &mut ChaCha8Rng) -> FeatureMatrix {
    FeatureMatrix::new(n, d, (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

pub fn random_centroids(k: usize, d: usize, rng: &mut ChaCha8Rng) -> Centroids {
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    Centroids::from_rows(&rows).unwrap()
}

pub const PENALTY_LEVELS: [f64; 5] = [0.0, 0.1, 1.0, 10.0, f64::INFINITY];

pub fn random_penalties(rng: &mut ChaCha8Rng) -> Penalties {
    let pick = |rng: &mut ChaCha8Rng| Penalty::new(*PENALTY_LEVELS.choose(rng).unwrap()).unwrap();
    Penalties::new(pick(rng), pick(rng))
}

/// Same infinite units and finite parts within `tol` relative.
pub fn same_cost(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    a.infinite_units() == b.infinite_units() && dgseg::penalty::rel_close(a.finite_part(), b.finite_part(), tol)
}

/// Weight of the cut given by `source_side`, summed over grid capacities.
pub fn grid_cut(net: &FlowNetwork, caps: &[u128], source_side: &[bool]) -> u128 {
    net.arcs()
        .iter()
        .zip(caps)
        .filter(|(a, _)| source_side[a.from] && !source_side[a.to])
        .map(|(_, &c)| c)
        .sum()
}

/// Minimum over every bipartition with the source on one side and the sink
/// on the other.
pub fn brute_force_min_cut(net: &FlowNetwork) -> u128 {
    let caps = net.grid_capacities();
    let nodes = net.node_count();
    let free: Vec<usize> = (0..nodes).filter(|&v| v != net.source() && v != net.sink()).collect();
    let mut best = u128::MAX;
    for mask in 0u64..(1 << free.len()) {
        let mut side = vec![false; nodes];
        side[net.source()] = true;
        for (bit, &v) in free.iter().enumerate() {
            side[v] = mask >> bit & 1 == 1;
        }
        best = best.min(grid_cut(net, &caps, &side));
    }
    best
}
