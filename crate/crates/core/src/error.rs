//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid resolution must be a power of two >= 2, got {0}")]
    BadResolution(usize),

    #[error("value count {got} does not match the {expected} nodes of an n={n} grid")]
    ValueCountMismatch {
        n: usize,
        got: usize,
        expected: usize,
    },

    #[error("non-finite value {value} at node (u={u}, v={v})")]
    NonFinite { u: f64, v: f64, value: f64 },

    #[error("value {value} at node (u={u}, v={v}) outside [0, 1]")]
    ValueOutOfUnitRange { u: f64, v: f64, value: f64 },

    #[error("negative value {value} at node (u={u}, v={v}); input must be nonnegative")]
    NegativeValue { u: f64, v: f64, value: f64 },

    #[error("p exponent must be >= 1 or infinity, got {0}")]
    BadExponent(f64),

    #[error("mixture weight must lie in [0, 1], got {0}")]
    BadWeight(f64),

    #[error("threshold must be positive and finite, got {0}")]
    BadThreshold(f64),

    #[error("tolerance threshold must lie in (0, 1), got {0}")]
    ToleranceOutOfRange(f64),

    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),

    #[error("unknown family '{name}'; known families: {known}")]
    UnknownFamily { name: String, known: String },

    #[error("{family}: parameter {param}={value} out of range; expected {range}")]
    ParamOutOfRange {
        family: String,
        param: String,
        value: f64,
        range: String,
    },

    #[error("{family}: unknown parameter '{param}'")]
    UnknownParam { family: String, param: String },

    #[error("{family}: missing required parameter '{param}'")]
    MissingParam { family: String, param: String },

    #[error("family '{0}' has no sweep parameter")]
    NoSweepParameter(String),

    #[error("invalid parameter range [{lo}, {hi}]: {reason}")]
    BadRange { lo: f64, hi: f64, reason: String },

    #[error("generator rejected: {0}")]
    BadGenerator(String),

    #[error("margin sample decreases at x={x}: {prev} -> {next}")]
    NonMonotoneMargin { x: f64, prev: f64, next: f64 },

    #[error("margin must span [0, 1] on the box, but F({x}) = {value}")]
    MarginNotNormalized { x: f64, value: f64 },

    #[error("margin has a plateau wider than one cell starting at x={0}")]
    MarginPlateau(f64),

    #[error("box bounds must be finite with min < max")]
    BadBox,

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("column '{0}' not found")]
    ColumnNotFound(String),

    #[error("spec contains a custom evaluator and cannot be serialized")]
    NotSerializable,

    #[error("invalid spec document: {0}")]
    SpecJson(String),
}
