use std::io;

use thiserror::Error;

use crate::kernel::HjbSolution;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("empty vector")]
    Empty,
    #[error("entry {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },
    #[error("probability mass sums to {sum}, expected 1")]
    MassMismatch { sum: f64 },
    #[error("value vector sums to {sum}, expected 0")]
    NonZeroSum { sum: f64 },
    #[error("{what}: expected {expected} entries, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("sample {sample}, coordinate {dim}: state {state} out of range for {states} states")]
    StateOutOfRange {
        sample: usize,
        dim: usize,
        state: usize,
        states: usize,
    },
    #[error("unsupported model format version {0:?}")]
    FormatVersionMismatch(String),
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("transition probability P[{row}][{col}] is zero but the entropy weight is positive")]
    ZeroProbabilityWithEntropy { row: usize, col: usize },
    #[error("row minimization did not converge (residual {residual:e})")]
    NonconvergentRootFind { residual: f64 },
    #[error("zero entropy weight is only supported with the default linear transition cost")]
    UnsupportedCost,
    #[error("invalid transition cost: {0}")]
    InvalidCost(String),
    #[error("policy evaluation system is singular")]
    SingularSystem,
    #[error("transition matrix has no unique stationary distribution")]
    NonUniqueStationary,
    #[error("policy iteration hit {iterations} iterations (last change {last_change:e})")]
    MaxIterationsExceeded {
        iterations: usize,
        last_change: f64,
        best: Option<Box<HjbSolution>>,
    },
    #[error("stationary distribution has non-positive mass {min_mass:e}")]
    PositivityViolation { min_mass: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error)]
pub enum MixtureError {
    #[error("model and data disagree: {0}")]
    DimensionMismatch(String),
    #[error("sample {sample} has zero probability under every component")]
    AllComponentsVanish { sample: usize },
    #[error("component {0} has no responsibility mass")]
    EmptyCluster(usize),
    #[error("subsystem (k={component}, d={dim}) failed: {source}")]
    Subsystem {
        component: usize,
        dim: usize,
        #[source]
        source: KernelError,
    },
    #[error("mixture parameter {value} maps outside (0, 1) under the entropy-corrected link")]
    OutOfDomain { value: f64 },
    #[error("modified likelihood is only defined for two states")]
    NotBinary,
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("bad IDX magic {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("truncated IDX stream: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("IDX dimensions overflow addressable memory")]
    DimensionOverflow,
    #[error("labels not present in the data: {0:?}")]
    UnknownLabel(Vec<u32>),
    #[error("dataset has no labels")]
    MissingLabels,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("dataset has no labels")]
    MissingLabels,
    #[error("dimension {dims} is not {side}x{side}")]
    NotSquare { dims: usize, side: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("PGM parse error: {0}")]
    BadPgm(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}
