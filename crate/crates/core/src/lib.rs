//! Partitions of a finite point set viewed as points of an orbit space.
//!
//! A partition of `m` points into at most `l` clusters is an `l x m`
//! column-stochastic membership matrix; relabeling clusters permutes rows and
//! yields the same partition. On top of the intrinsic metric between such
//! orbits this crate provides the degree of asymmetry, asymmetry balls,
//! α-homogeneity of clustering ensembles, Fréchet functions, medoids, mean
//! partitions, and a seeded k-means ensemble pipeline for choosing the number
//! of clusters.
//!
//! ```
//! use partorbit::{delta, Partition};
//!
//! let x = Partition::from_labels(&[0, 0, 1], 2).unwrap();
//! let y = Partition::from_labels(&[1, 1, 0], 2).unwrap();
//! assert_eq!(delta(&x, &y).unwrap(), 0.0);
//! ```

pub mod assignment;
pub mod asymmetry;
pub mod data;
pub mod error;
pub mod format;
pub mod frechet;
pub mod homogeneity;
pub mod kmeans;
mod kv;
pub mod mean;
pub mod partition;
pub mod protocol;
pub mod rng;

pub use asymmetry::{
    alpha_bounds, alpha_general, alpha_hard, in_asymmetry_ball, in_asymmetry_ball_with, AsymmetryProfile,
    BallBoundary,
};
pub use data::{generate, load_csv, read_csv, CsvOptions, Dataset, GeneratorConfig, GeneratorKind, Provenance, UShape};
pub use error::{Error, Result};
pub use format::parse_partition;
pub use frechet::{frechet_value, instability, medoid, Distance, EnsembleSample, Medoid, PairwiseDistances};
pub use homogeneity::{
    alpha_homogeneity, exact_homogeneity, normalized_cluster_sizes, select_clusters, ExactHomogeneity,
    HomogeneityReport, StabilityProfile,
};
pub use kmeans::{ensemble, fit, kmeans, KMeansConfig, KMeansFit, KMeansInit};
pub use mean::{
    exact_hard_mean, exact_mean_set, mean_gap_bound, mean_partition, multi_start_mean, MeanGap, MeanInit,
    MeanOptions, MeanResult, MeanSet,
};
pub use partition::{apply_permutation, delta, frobenius_distance, optimal_alignment, Alignment, Partition, PermutationMap};
pub use protocol::{
    run_protocol, run_selection, DatasetSpec, ExperimentConfig, ExperimentReport, Profile, ReportRow, SelectionReport,
    SweepVar,
};
pub use rng::{derive_seed, stream_rng};
