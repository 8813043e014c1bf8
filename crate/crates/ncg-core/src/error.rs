//! Error type shared by every module in the crate.

use std::path::PathBuf;
use thiserror::Error;

/// Unified error enumeration for dataset handling, geometry, training,
/// attacks, statistics, and the theorem simulator.
#[derive(Debug, Error)]
pub enum NcgError {
    /// File could not be read or written.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file violated its declared format.
    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    /// Rows of a dataset disagree on dimension.
    #[error("inconsistent dimension: row {row} has width {got}, expected {expected}")]
    InconsistentDimension {
        row: usize,
        expected: usize,
        got: usize,
    },

    /// A label fell outside the declared class range.
    #[error("label {label} out of range for class count {class_count}")]
    LabelOutOfRange { label: i64, class_count: usize },

    /// A declared class has no examples.
    #[error("class {class} has no examples")]
    MissingClass { class: usize },

    /// Dataset or OOD set with no rows.
    #[error("empty dataset")]
    EmptyDataset,

    /// Holding out a class requires at least two classes to remain.
    #[error("need at least 3 classes to hold one out, got {0}")]
    TooFewClasses(usize),

    /// A class index outside `[0, C)` was supplied.
    #[error("class index {index} out of range for {class_count} classes")]
    ClassOutOfRange { index: usize, class_count: usize },

    /// Two identical points carry different labels, so no separating
    /// bisector exists between them.
    #[error("points {i} and {j} are identical but carry different labels")]
    ZeroMarginPair { i: usize, j: usize },

    /// An operation that needs at least two classes saw only one.
    #[error("dataset has a single class")]
    SingleClass,

    /// Query or point dimension disagrees with the dataset.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A coordinate was NaN or infinite where finite values are required.
    #[error("non-finite coordinate at position {index}")]
    NonFiniteInput { index: usize },

    /// The ellipsoid fit produced a zero singular value.
    #[error("degenerate spectrum: singular value {index} is zero")]
    DegenerateSpectrum { index: usize },

    /// A configuration value violated its documented range.
    #[error("invalid parameter {name}: {why}")]
    InvalidParameter { name: &'static str, why: String },

    /// A projection or PGD routine was handed a region that does not
    /// contain its own anchor.
    #[error("anchor point is not inside its region")]
    AnchorOutsideRegion,

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },

    /// A numeric routine produced NaN or infinity.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// No adversarial example was found at the bracket's upper bound.
    #[error("no adversarial example found within r_hi = {r_hi}")]
    RadiusBracketExceeded { r_hi: f64 },

    /// A simulator trial exceeded its draw safety cap.
    #[error("trial exceeded the {cap}-draw safety cap")]
    TrialCapExceeded { cap: u64 },

    /// Classifier and dataset disagree on the label space.
    #[error("label space mismatch: classifier has {classifier} classes, dataset has {dataset}")]
    LabelSpaceMismatch { classifier: usize, dataset: usize },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, NcgError>;

impl NcgError {
    /// Process exit code for the CLI: 2 usage, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            NcgError::InvalidParameter { .. }
            | NcgError::ClassOutOfRange { .. }
            | NcgError::TooFewClasses(_) => 2,
            NcgError::Diverged { .. }
            | NcgError::NumericalFailure(_)
            | NcgError::RadiusBracketExceeded { .. }
            | NcgError::TrialCapExceeded { .. } => 4,
            _ => 3,
        }
    }
}
