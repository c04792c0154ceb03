//! Ordered segmentation of directed graphs whose vertices carry feature
//! vectors.
//!
//! A solution splits the vertices into an ordered sequence of `k` groups.
//! Its cost is the L2 coherence of every group plus `λ_f` for each edge that
//! points from an earlier group to a later one and `λ_b` for each edge that
//! points back. Three partition solvers are provided: an exact dynamic
//! program for forests of arborescences, a min-cut solver (exact for `k = 2`,
//! pairwise improvement otherwise) and greedy local search. The [`driver`]
//! alternates them with centroid updates.

pub mod driver;
pub mod error;
pub mod experiments;
pub mod features;
pub mod flow;
pub mod graph;
pub mod greedy;
pub mod mincut;
pub mod objective;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod partition;
pub mod penalty;
pub mod state;
pub mod treedp;

pub use driver::{
    multi_restart, random_init, repair_empty_groups, run_from, run_iterative, NoObserver, Observer, SolveConfig, SolveResult,
    SolverKind, StepKind,
};
pub use error::{Error, Result};
pub use experiments::{adjusted_rand_index, gen_sdag, gen_stree, inject_noise, SyntheticInstance};
pub use features::{load_features, FeatureMatrix};
pub use graph::{load_graph, DirectedGraph};
pub use objective::{fixed_centroid_cost, total_cost, update_centroids, Centroids, CostBreakdown};
pub use partition::{load_assignment, OrderedPartition};
pub use penalty::{ExtReal, Penalties, Penalty};
pub use state::SolveState;
