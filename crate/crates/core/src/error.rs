//! Error type shared by every module. The string labels are part of the
//! public contract and appear verbatim in CLI diagnostics.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("series-domain: {0}")]
    SeriesDomain(String),
    #[error("non-invertible: {0}")]
    NonInvertible(String),
    #[error("unknown-derivation: {0}")]
    UnknownDerivation(String),
    #[error("partition-too-large: |lambda| = {size} exceeds cap {cap}")]
    PartitionTooLarge { size: u32, cap: u32 },
    #[error("curve-normalization: {0}")]
    CurveNormalization(String),
    #[error("order-too-small: {0}")]
    OrderTooSmall(String),
    #[error("empty-profile")]
    EmptyProfile,
    #[error("unsupported-n: n = {0}")]
    UnsupportedN(usize),
    #[error("unsupported-size: (g,n) = ({0},{1}) outside the desk-scale envelope")]
    UnsupportedSize(i64, usize),
    #[error("bad-curve: {0}")]
    BadCurve(String),
    #[error("unstable-target: pushforward target (g,n) = ({0},{1})")]
    UnstableTarget(i64, usize),
    #[error("p-cap: p_max = {given} insufficient, contributions exist up to p = {needed}")]
    PCap { given: usize, needed: usize },
    #[error("ustar-divergence: fixed point did not stabilize")]
    UstarDivergence,
    #[error("degenerate-Cstar")]
    DegenerateCstar,
    #[error("jpt-inconsistency: {0}")]
    JptInconsistency(String),
    #[error("table-incomplete: missing block (g={g}, n={n}, a={a:?})")]
    TableIncomplete { g: i64, n: usize, a: Vec<u32> },
    #[error("reduction-failure: {0}")]
    ReductionFailure(String),
    #[error("needs-rational-point: {0}")]
    NeedsRationalPoint(String),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
