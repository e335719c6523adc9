//! Hierarchical clustering in sub-quadratic time via recursive
//! random-projection partitioning.
//!
//! Instead of the full pairwise distance matrix, the engines here repeatedly
//! project the point set onto random lines and split it recursively into
//! small candidate sets; distances are computed only inside those sets. This
//! preserves single- and average-linkage dendrograms with high probability
//! while doing far fewer distance computations, and the parameter-free
//! engines grow the set-size threshold automatically until a frequency-based
//! certificate vouches for every merge.
//!
//! Module map:
//!
//! * [`geometry`] / [`rng`]: points, projections, perturbation, and the
//!   deterministic stream-keyed randomness everything derives from.
//! * [`partition`]: one recursive split round and the multi-round family.
//! * [`slc`]: fixed and parameter-free single linkage on candidate sets.
//! * [`alc`]: parameter-free average linkage with constant-size cluster
//!   statistics and sparsifying sets.
//! * [`oracle`]: exact quadratic baselines (Kruskal scan, direct average
//!   linkage) used as ground truth.
//! * [`eval`]: dendrogram cutting, preservation scoring, and diagnostics.
//! * [`synthetic`]: Gaussian-blob and uniform generators.
//!
//! The `parallel` feature (default) runs the data-parallel stages on rayon;
//! without it the crate is fully sequential. Results are identical either
//! way.

pub mod alc;
pub mod dendrogram;
pub mod error;
pub mod eval;
pub mod exec;
pub mod geometry;
mod hashing;
pub mod oracle;
pub mod partition;
pub mod rng;
pub mod slc;
pub mod synthetic;
pub mod union_find;

pub use alc::{alc_distance, merge_stats, rp_alc_parameter_free, ClusterStats, SparseSetState};
pub use dendrogram::{Merge, MergeSequence};
pub use error::{Error, Result};
pub use eval::{
    cut, fowlkes_mallows, linkage_ball_sizes, preservation, projection_between_frequency,
    BallSizes, CutLabels, PreservationScore,
};
pub use geometry::{perturb, project, sample_unit_vector, Dataset, Point, RandomLine};
pub use oracle::{brute_alc, brute_slc, FullDistanceMatrix};
pub use partition::{partition_once, perturb_multi_partition, PartitionConfig, PartitionFamily};
pub use rng::RngStream;
pub use slc::{
    build_candidate_table, classify_edges, merge_certificate_holds, rp_slc, rp_slc_parameter_free,
    CandidateEdgeTable, ClusteringRun, EdgeClassification, RunStats,
};
pub use union_find::UnionFind;
