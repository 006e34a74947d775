//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("wire {wire} out of range for {n_qubits} qubits")]
    WireOutOfRange { wire: usize, n_qubits: usize },

    #[error("CNOT control and target must be distinct (both {0})")]
    DuplicateWires(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input contains a non-finite value")]
    NonFinite,

    #[error("amplitude vector is not normalized (|x|^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("cannot normalize an all-zero vector")]
    ZeroVector,

    #[error("noise rate {0} outside [0, 1]")]
    RateOutOfRange(f64),

    #[error("{context}: {n_qubits} qubits exceeds the supported limit of {limit}")]
    TooManyQubits {
        context: &'static str,
        n_qubits: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input")]
    EmptyInput,

    #[error("observable must select at least one wire")]
    EmptyObservable,

    #[error("predictions are constant; least-squares slope is undefined")]
    ConstantPredictions,

    #[error("zero variance input; correlation is undefined")]
    ZeroVariance,

    #[error("no ordered target pairs; concordance index is undefined")]
    NoOrderedPairs,

    #[error("gradient tape does not match this network")]
    StaleTape,

    #[error("amplitude-embedded inputs have no shift rule; input gradient unsupported")]
    AmplitudeInputGradient,

    #[error("training diverged at epoch {epoch}: {what}")]
    Diverged { epoch: usize, what: String },
}
