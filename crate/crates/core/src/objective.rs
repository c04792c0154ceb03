//! The segmentation objective: L2 coherence of each group plus
//! `λ_f` per forward cross edge and `λ_b` per backward cross edge.

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::DirectedGraph;
use crate::partition::OrderedPartition;
use crate::penalty::{ExtReal, Penalties};

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Minimum total squared distance of the members' features to a single
/// center (attained at their mean). Empty and singleton sets score 0.
pub fn coherence_l2(members: &[usize], features: &FeatureMatrix) -> f64 {
    if members.len() < 2 {
        return 0.0;
    }
    let mut mean = vec![0.0; features.d()];
    for &v in members {
        for (m, x) in mean.iter_mut().zip(features.row(v)) {
            *m += x;
        }
    }
    let inv = 1.0 / members.len() as f64;
    mean.iter_mut().for_each(|m| *m *= inv);
    members.iter().map(|&v| sq_dist(features.row(v), &mean)).sum()
}

/// One center per group; a row is undefined when its group is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Centroids {
    k: usize,
    d: usize,
    mu: Vec<f64>,
    defined: Vec<bool>,
}

impl Centroids {
    pub fn new(d: usize, rows: Vec<Option<Vec<f64>>>) -> Result<Self> {
        let k = rows.len();
        let mut mu = vec![0.0; k * d];
        let mut defined = vec![false; k];
        for (i, row) in rows.into_iter().enumerate() {
            if let Some(row) = row {
                if row.len() != d {
                    return Err(Error::SizeMismatch {
                        what: "centroid dimension",
                        expected: d,
                        found: row.len(),
                    });
                }
                mu[i * d..(i + 1) * d].copy_from_slice(&row);
                defined[i] = true;
            }
        }
        Ok(Centroids { k, d, mu, defined })
    }

    /// All rows defined.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        Self::new(d, rows.iter().map(|r| Some(r.as_ref().to_vec())).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize) -> Option<&[f64]> {
        self.defined[i].then(|| &self.mu[i * self.d..(i + 1) * self.d])
    }

    pub fn is_defined(&self, i: usize) -> bool {
        self.defined[i]
    }

    pub fn all_defined(&self) -> bool {
        self.defined.iter().all(|&d| d)
    }
}

/// Group means of `partition`. Sums accumulate in ascending vertex order.
pub fn update_centroids(partition: &OrderedPartition, features: &FeatureMatrix) -> Centroids {
    let (k, d) = (partition.k(), features.d());
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for v in 0..partition.n() {
        let g = partition.group_of(v);
        counts[g] += 1;
        for (s, x) in sums[g * d..(g + 1) * d].iter_mut().zip(features.row(v)) {
            *s += x;
        }
    }
    let rows = (0..k)
        .map(|g| {
            (counts[g] > 0).then(|| {
                let inv = 1.0 / counts[g] as f64;
                sums[g * d..(g + 1) * d].iter().map(|s| s * inv).collect()
            })
        })
        .collect();
    Centroids::new(d, rows).expect("dimensions agree by construction")
}

/// The objective split into its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostBreakdown {
    pub coherence: f64,
    pub forward_edges: u64,
    pub backward_edges: u64,
    pub total: ExtReal,
}

impl CostBreakdown {
    pub fn new(coherence: f64, forward_edges: u64, backward_edges: u64, penalties: &Penalties) -> Self {
        let total = ExtReal::finite(coherence)
            + penalties.edge_cost(forward_edges as i64, backward_edges as i64);
        CostBreakdown {
            coherence,
            forward_edges,
            backward_edges,
            total,
        }
    }
}

/// `(forward, backward)` cross-edge counts; within-group edges count as neither.
pub fn count_cross_edges(graph: &DirectedGraph, partition: &OrderedPartition) -> (u64, u64) {
    let (mut forward, mut backward) = (0u64, 0u64);
    for &(u, v) in graph.edges() {
        let (gu, gv) = (partition.group_of(u), partition.group_of(v));
        if gu < gv {
            forward += 1;
        } else if gu > gv {
            backward += 1;
        }
    }
    (forward, backward)
}

fn check_sizes(graph: &DirectedGraph, features: &FeatureMatrix, partition: &OrderedPartition) {
    assert_eq!(graph.n(), features.n(), "graph and feature sizes differ");
    assert_eq!(graph.n(), partition.n(), "graph and partition sizes differ");
}

/// `q(S | λ_f, λ_b)` with L2 coherence.
pub fn total_cost(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    partition: &OrderedPartition,
    penalties: &Penalties,
) -> CostBreakdown {
    check_sizes(graph, features, partition);
    let coherence = partition
        .groups()
        .iter()
        .map(|members| coherence_l2(members, features))
        .sum();
    let (forward, backward) = count_cross_edges(graph, partition);
    CostBreakdown::new(coherence, forward, backward, penalties)
}

/// The objective with centroids held fixed rather than set to group means.
pub fn fixed_centroid_cost(
    graph: &DirectedGraph,
    features: &FeatureMatrix,
    partition: &OrderedPartition,
    centroids: &Centroids,
    penalties: &Penalties,
) -> Result<ExtReal> {
    check_sizes(graph, features, partition);
    if centroids.k() != partition.k() {
        return Err(Error::SizeMismatch {
            what: "centroid count",
            expected: partition.k(),
            found: centroids.k(),
        });
    }
    let mut distortion = 0.0;
    for v in 0..partition.n() {
        let g = partition.group_of(v);
        let mu = centroids.get(g).ok_or(Error::UndefinedCentroid(g + 1))?;
        distortion += sq_dist(features.row(v), mu);
    }
    let (forward, backward) = count_cross_edges(graph, partition);
    Ok(ExtReal::finite(distortion) + penalties.edge_cost(forward as i64, backward as i64))
}
