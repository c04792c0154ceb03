//! Exhaustive solvers for tiny instances. They rescore every assignment from
//! scratch and exist only to check the real solvers.

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::DirectedGraph;
use crate::objective::{fixed_centroid_cost, total_cost, Centroids};
use crate::partition::OrderedPartition;
use crate::penalty::{ExtReal, Penalties};

/// Largest number of assignments either search will visit.
pub const SEARCH_LIMIT: u64 = 10_000_000;

fn check_limit(n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut count: u64 = 1;
    for _ in 0..n {
        count = count.saturating_mul(k as u64);
        if count > SEARCH_LIMIT {
            return Err(Error::SearchTooLarge {
                n,
                k,
                limit: SEARCH_LIMIT,
            });
        }
    }
    Ok(())
}

/// Visits every assignment in `{0..k}^n` in lexicographic order and keeps the
/// first one reaching the minimum score. `None` scores are skipped.
fn search<F>(n: usize, k: usize, mut score: F) -> Result<Option<(Vec<usize>, ExtReal)>>
where
    F: FnMut(&[usize]) -> Result<Option<ExtReal>>,
{
    check_limit(n, k)?;
    let mut assign = vec![0usize; n];
    let mut best: Option<(Vec<usize>, ExtReal)> = None;
    loop {
        if let Some(cost) = score(&assign)? {
            if best.as_ref().is_none_or(|(_, b)| cost < *b) {
                best = Some((assign.clone(), cost));
            }
        }
        // Odometer step: the last position turns fastest.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(best);
            }
            pos -= 1;
            assign[pos] += 1;
            if assign[pos] < k {
                break;
            }
            assign[pos] = 0;
        }
    }
}

/// Global minimizer of the full objective (centroids at group means).
pub fn brute_force_dgs(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    penalties: &Penalties,
    k: usize,
) -> Result<(OrderedPartition, ExtReal)> {
    let n = graph.n();
    let best = search(n, k, |assign| {
        let p = OrderedPartition::new(k, assign.to_vec())?;
        Ok(Some(total_cost(graph, features, &p, penalties).total))
    })?;
    let (assign, cost) = best.expect("the search space is never empty");
    Ok((OrderedPartition::new(k, assign)?, cost))
}

/// Global minimizer of the fixed-centroid objective. Groups without a
/// defined centroid are never used.
pub fn brute_force_fixed_centroids(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    centroids: &Centroids,
    penalties: &Penalties,
    k: usize,
) -> Result<(OrderedPartition, ExtReal)> {
    if centroids.k() != k {
        return Err(Error::SizeMismatch {
            what: "centroid count",
            expected: k,
            found: centroids.k(),
        });
    }
    let n = graph.n();
    let best = search(n, k, |assign| {
        if assign.iter().any(|&g| !centroids.is_defined(g)) {
            return Ok(None);
        }
        let p = OrderedPartition::new(k, assign.to_vec())?;
        fixed_centroid_cost(graph, features, &p, centroids, penalties).map(Some)
    })?;
    match best {
        Some((assign, cost)) => Ok((OrderedPartition::new(k, assign)?, cost)),
        None => Err(Error::InvalidArgument("no group has a defined centroid".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn features_1d(xs: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(xs.len(), 1, xs.to_vec()).unwrap()
    }

    #[test]
    fn single_vertex() {
        let g = DirectedGraph::from_edges(1, vec![]).unwrap();
        let f = features_1d(&[4.0]);
        for k in 1..4 {
            let (p, c) = brute_force_dgs(&g, &f, &Penalties::finite(1.0, 1.0), k).unwrap();
            assert_eq!(p.assignment(), &[0]);
            assert_eq!(c, ExtReal::ZERO);
        }
    }

    #[test]
    fn three_vertex_path() {
        let g = DirectedGraph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap();
        let f = features_1d(&[0.0, 0.0, 1.0]);
        let (p, c) = brute_force_dgs(&g, &f, &Penalties::finite(0.0, 1e5), 2).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 1]);
        assert_eq!(c, ExtReal::ZERO);
    }

    #[test]
    fn equal_centroids_pick_lexicographic_minimum() {
        let g = DirectedGraph::from_edges(3, vec![(0, 1)]).unwrap();
        let f = features_1d(&[0.0, 1.0, 2.0]);
        let mu = Centroids::from_rows(&[[1.0], [1.0], [1.0]]).unwrap();
        let (p, _) = brute_force_fixed_centroids(&g, &f, &mu, &Penalties::zero(), 3).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 0]);
    }

    #[test]
    fn undefined_groups_are_skipped() {
        let g = DirectedGraph::from_edges(2, vec![]).unwrap();
        let f = features_1d(&[0.0, 5.0]);
        let mu = Centroids::new(1, vec![None, Some(vec![5.0])]).unwrap();
        let (p, c) = brute_force_fixed_centroids(&g, &f, &mu, &Penalties::zero(), 2).unwrap();
        assert_eq!(p.assignment(), &[1, 1]);
        assert_eq!(c, ExtReal::finite(25.0));
    }

    #[test]
    fn guard_rejects_large_searches() {
        let g = DirectedGraph::from_edges(24, vec![]).unwrap();
        let f = FeatureMatrix::new(24, 1, vec![0.0; 24]).unwrap();
        let err = brute_force_dgs(&g, &f, &Penalties::zero(), 2).unwrap_err();
        assert!(matches!(err, Error::SearchTooLarge { n: 24, k: 2, .. }));
        assert!(check_limit(7, 10).is_ok());
        assert!(check_limit(8, 10).is_err());
    }
}
