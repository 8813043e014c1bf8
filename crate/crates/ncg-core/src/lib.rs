//! Nearest-category generalization toolkit: datasets, exact 1-NN search,
//! smoothness regions, a small hand-rolled MLP with regional-smoothness
//! training, PGD attacks, evaluation reports, statistical tests, and a
//! sample-complexity simulator for the cube construction.

pub mod attacks;
pub mod classifier;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod mlp;
pub mod nnindex;
pub mod regions;
pub mod rng;
pub mod stats;
pub mod theoremsim;
pub mod trainer;

pub use classifier::{Classifier, NNClassifier};
pub use dataset::{
    CorruptionKind, CorruptionSpec, FileFormat, LabeledDataset, OODSet, ThreeClusterSpec,
};
pub use error::{NcgError, Result};
pub use mlp::MLPModel;
pub use nnindex::{NNIndex, Neighbor};
pub use regions::{RegionSpec, RegionVariant};
pub use trainer::{Method, TrainConfig};
