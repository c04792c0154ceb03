//! Exact solvers against exhaustive search on small random instances.

mod common;

use common::*;
use dgseg::mincut::{build_cut_graph_k2, solve_two_partition};
use dgseg::oracle::{brute_force_dgs, brute_force_fixed_centroids};
use dgseg::treedp::solve_tree_partition;
use dgseg::{fixed_centroid_cost, total_cost, Centroids, DirectedGraph, ExtReal, FeatureMatrix, OrderedPartition, Penalties};
use rand::Rng;

#[test]
fn tree_dp_matches_exhaustive_search() {
    let mut rng = rng(11);
    for _ in 0..60 {
        let n = rng.random_range(1..=8);
        let k = rng.random_range(2..=3);
        let d = rng.random_range(1..=2);
        let g = random_forest(n, &mut rng);
        let f = random_features(n, d, &mut rng);
        let mu = random_centroids(k, d, &mut rng);
        let pen = random_penalties(&mut rng);
        let (p, cost) = solve_tree_partition(&g, &f, &mu, &pen).unwrap();
        let (_, best) = brute_force_fixed_centroids(&g, &f, &mu, &pen, k).unwrap();
        assert!(same_cost(cost, best, 1e-9), "dp {cost} vs oracle {best}");
        let rescored = fixed_centroid_cost(&g, &f, &p, &mu, &pen).unwrap();
        assert!(same_cost(rescored, cost, 1e-9), "backtracked partition scores {rescored}, dp says {cost}");
    }
}

#[test]
fn two_group_cut_matches_exhaustive_search() {
    let mut rng = rng(12);
    for _ in 0..60 {
        let n = rng.random_range(1..=9);
        let m = rng.random_range(0..=3 * n);
        let d = rng.random_range(1..=2);
        let g = random_digraph(n, m, &mut rng);
        let f = random_features(n, d, &mut rng);
        let mu = random_centroids(2, d, &mut rng);
        let pen = random_penalties(&mut rng);
        let (p, cost) = solve_two_partition(&g, &f, mu.get(0).unwrap(), mu.get(1).unwrap(), &pen);
        let (_, best) = brute_force_fixed_centroids(&g, &f, &mu, &pen, 2).unwrap();
        assert!(same_cost(cost, best, 1e-9), "cut {cost} vs oracle {best}");
        assert!(same_cost(fixed_centroid_cost(&g, &f, &p, &mu, &pen).unwrap(), cost, 1e-9));
    }
}

/// Every s-t cut of the two-group network weighs exactly the objective of
/// the partition it encodes.
#[test]
fn every_cut_weighs_its_objective() {
    let mut rng = rng(13);
    for _ in 0..20 {
        let n = rng.random_range(1..=7);
        let g = random_digraph(n, rng.random_range(0..=12), &mut rng);
        let f = random_features(n, 2, &mut rng);
        let mu = random_centroids(2, 2, &mut rng);
        let pen = random_penalties(&mut rng);
        let net = build_cut_graph_k2(&g, &f, mu.get(0).unwrap(), mu.get(1).unwrap(), &pen);
        for mask in 0u32..(1 << n) {
            let assign: Vec<usize> = (0..n).map(|v| (mask >> v & 1) as usize).collect();
            let mut side: Vec<bool> = assign.iter().map(|&g| g == 0).collect();
            side.extend([true, false]);
            let p = OrderedPartition::new(2, assign).unwrap();
            let objective = fixed_centroid_cost(&g, &f, &p, &mu, &pen).unwrap();
            assert!(same_cost(net.cut_value(&side), objective, 1e-9));
        }
    }
}

#[test]
fn zero_penalties_reduce_to_exhaustive_k_means() {
    let mut rng = rng(14);
    for _ in 0..15 {
        let n = rng.random_range(2..=7);
        let k = rng.random_range(2..=3);
        let g = random_digraph(n, 2 * n, &mut rng);
        let f = random_features(n, 2, &mut rng);
        let (_, cost) = brute_force_dgs(&g, &f, &Penalties::zero(), k).unwrap();
        // Independent SSE enumeration: group means recomputed from scratch.
        let mut best = f64::INFINITY;
        for code in 0..k.pow(n as u32) {
            let assign: Vec<usize> = (0..n).map(|v| code / k.pow(v as u32) % k).collect();
            let mut sse = 0.0;
            for grp in 0..k {
                let members: Vec<&[f64]> = (0..n).filter(|&v| assign[v] == grp).map(|v| f.row(v)).collect();
                if members.is_empty() {
                    continue;
                }
                for dim in 0..2 {
                    let mean = members.iter().map(|r| r[dim]).sum::<f64>() / members.len() as f64;
                    sse += members.iter().map(|r| (r[dim] - mean).powi(2)).sum::<f64>();
                }
            }
            best = best.min(sse);
        }
        assert!(cost.is_finite() && dgseg::penalty::rel_close(cost.to_f64(), best, 1e-9));
    }
}

#[test]
fn oracle_examples() {
    let g = DirectedGraph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap();
    let f = FeatureMatrix::new(3, 1, vec![0.0, 0.0, 1.0]).unwrap();
    let (p, c) = brute_force_dgs(&g, &f, &Penalties::finite(0.0, 1e5), 2).unwrap();
    assert_eq!(p.assignment(), &[0, 0, 1]);
    assert_eq!(c, ExtReal::ZERO);

    // Root r=0 with children 1 and 2; features 0, 0, 1; centroids 0 and 1.
    let tree = DirectedGraph::from_edges(3, vec![(0, 1), (0, 2)]).unwrap();
    let f = FeatureMatrix::new(3, 1, vec![0.5, 0.0, 1.0]).unwrap();
    let mu = Centroids::from_rows(&[[0.0], [1.0]]).unwrap();
    let pen = Penalties::finite(0.0, 1e5);
    let (_, oracle) = brute_force_fixed_centroids(&tree, &f, &mu, &pen, 2).unwrap();
    let (_, dp) = solve_tree_partition(&tree, &f, &mu, &pen).unwrap();
    assert_eq!(oracle, ExtReal::finite(0.25));
    assert_eq!(dp, oracle);
}

#[test]
fn oracle_is_permutation_stable() {
    let mut rng = rng(15);
    for _ in 0..10 {
        let n = rng.random_range(2..=7);
        let g = random_digraph(n, 2 * n, &mut rng);
        let f = random_features(n, 1, &mut rng);
        let pen = random_penalties(&mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let edges = g.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let g2 = DirectedGraph::from_edges(n, edges).unwrap();
        let mut values = vec![0.0; n];
        for v in 0..n {
            values[perm[v]] = f.row(v)[0];
        }
        let f2 = FeatureMatrix::new(n, 1, values).unwrap();
        let (p1, c1) = brute_force_dgs(&g, &f, &pen, 3).unwrap();
        let (p2, c2) = brute_force_dgs(&g2, &f2, &pen, 3).unwrap();
        assert!(same_cost(c1, c2, 1e-9));
        // Map the relabeled optimum back and rescore it on the original.
        let back = OrderedPartition::new(3, (0..n).map(|v| p2.group_of(perm[v])).collect()).unwrap();
        assert!(same_cost(total_cost(&g, &f, &back, &pen).total, total_cost(&g, &f, &p1, &pen).total, 1e-9));
    }
}
