mod common;

use common::same_cost;
use dgseg::objective::{coherence_l2, sq_norm};
use dgseg::{adjusted_rand_index, total_cost, DirectedGraph, FeatureMatrix, OrderedPartition, Penalties, Penalty, SolveState};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (DirectedGraph, FeatureMatrix, OrderedPartition)> {
    (1usize..12, 1usize..4, 1usize..4).prop_flat_map(|(n, d, k)| {
        let edges = prop::collection::vec((0..n, 0..n), 0..3 * n)
            .prop_map(|es| es.into_iter().filter(|(u, v)| u != v).collect::<Vec<_>>());
        let values = prop::collection::vec(-100.0f64..100.0, n * d);
        let assign = prop::collection::vec(0..k, n);
        (edges, values, assign).prop_map(move |(edges, values, assign)| {
            (
                DirectedGraph::from_edges(n, edges).unwrap(),
                FeatureMatrix::new(n, d, values).unwrap(),
                OrderedPartition::new(k, assign).unwrap(),
            )
        })
    })
}

fn penalty() -> impl Strategy<Value = Penalty> {
    prop_oneof![
        Just(Penalty::Infinite),
        (0.0f64..50.0).prop_map(|w| Penalty::new(w).unwrap()),
    ]
}

proptest! {
    /// Coherence equals the sum of squared norms minus `|S|·‖μ‖²`.
    #[test]
    fn coherence_decomposition((_, f, p) in instance()) {
        for members in p.groups() {
            if members.is_empty() {
                continue;
            }
            let c = members.len() as f64;
            let mut mean = vec![0.0; f.d()];
            for &v in &members {
                for (m, x) in mean.iter_mut().zip(f.row(v)) {
                    *m += x / c;
                }
            }
            let norms: f64 = members.iter().map(|&v| sq_norm(f.row(v))).sum();
            let direct = coherence_l2(&members, &f);
            let decomposed = norms - c * sq_norm(&mean);
            prop_assert!((direct - decomposed).abs() <= 1e-9 * norms.max(1.0));
        }
    }

    #[test]
    fn move_delta_matches_recompute(
        (g, f, p) in instance(),
        fwd in penalty(),
        bwd in penalty(),
        pick in any::<prop::sample::Index>(),
        target in any::<prop::sample::Index>(),
    ) {
        let pen = Penalties::new(fwd, bwd);
        let v = pick.index(g.n());
        let j = target.index(p.k());
        let state = SolveState::new(&g, &f, p.clone(), pen).unwrap();
        let delta = state.move_delta(v, j);
        let mut assign = p.assignment().to_vec();
        assign[v] = j;
        let moved = OrderedPartition::new(p.k(), assign).unwrap();
        let before = total_cost(&g, &f, &p, &pen).total;
        let after = total_cost(&g, &f, &moved, &pen).total;
        let scale = before.finite_part().abs().max(after.finite_part().abs()).max(1.0);
        prop_assert_eq!(delta.infinite_units(), after.infinite_units() - before.infinite_units());
        prop_assert!((delta.finite_part() - (after.finite_part() - before.finite_part())).abs() <= 1e-9 * scale);
    }

    /// Reversing every edge swaps the roles of the two penalties, and so does
    /// reversing the group order.
    #[test]
    fn edge_reversal_symmetry((g, f, p) in instance(), fwd in penalty(), bwd in penalty()) {
        let pen = Penalties::new(fwd, bwd);
        let swapped = Penalties::new(bwd, fwd);
        let base = total_cost(&g, &f, &p, &pen).total;
        prop_assert!(same_cost(base, total_cost(&g.reversed(), &f, &p, &swapped).total, 1e-12));
        let k = p.k();
        let flipped = OrderedPartition::new(k, p.assignment().iter().map(|&x| k - 1 - x).collect()).unwrap();
        prop_assert!(same_cost(base, total_cost(&g, &f, &flipped, &swapped).total, 1e-9));
    }

    #[test]
    fn ari_is_symmetric_and_bounded(
        a in prop::collection::vec(0usize..4, 2..40),
        seed in any::<u64>(),
    ) {
        let n = a.len();
        let b: Vec<usize> = (0..n).map(|i| ((seed >> (i % 60)) as usize + i) % 3).collect();
        let p = OrderedPartition::new(4, a).unwrap();
        let q = OrderedPartition::new(3, b).unwrap();
        let pq = adjusted_rand_index(&p, &q).unwrap();
        let qp = adjusted_rand_index(&q, &p).unwrap();
        prop_assert!((pq - qp).abs() < 1e-12);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&pq));
        prop_assert_eq!(adjusted_rand_index(&p, &p).unwrap(), 1.0);
        let relabeled = OrderedPartition::new(4, p.assignment().iter().map(|&x| (x + 1) % 4).collect()).unwrap();
        prop_assert!((adjusted_rand_index(&relabeled, &q).unwrap() - pq).abs() < 1e-12);
    }
}
