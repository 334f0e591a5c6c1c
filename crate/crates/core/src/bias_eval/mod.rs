//! Bias metrics for static embeddings.
//!
//! All metrics work on cosines, so they never depend on vector length and
//! never modify the embedding they are given.

mod cluster;
mod neighbors;
mod projection;
mod sembias;
mod weat;

pub use cluster::{cluster_accuracy, kmeans, labeling_accuracy, ClusterReport, ClusterRun, KMeansOptions};
pub use neighbors::{
    direct_bias, indirect_bias, neighbors, proximity_bias, proximity_bias_with, NeighborRow, ProximityRule,
};
pub use projection::{pca_project, ProjectedPoint, Projection};
pub use sembias::{sembias_eval, SemBiasReport};
pub use weat::{
    association_scores, binomial, permutation_p_value, weat, weat_with, PermutationMode, WeatOptions, WeatResult,
    EXACT_PARTITION_LIMIT,
};
