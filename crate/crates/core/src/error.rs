use core::fmt;

/// Errors raised by the core library.
///
/// Variants that concern a single branch carry its 1-based index `k`.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    TooFewBranches { r: usize },
    NonFinite { k: usize },
    NonMonotonePartition { k: usize },
    /// `a_k` must lie in `(0, 1)`; negative ratios are not supported.
    HorizontalRatioOutOfRange { k: usize, a: f64 },
    ContractionOutOfRange { k: usize, d: f64 },
    SumNotOne { sum: f64 },
    PartitionMismatch { k: usize },
    VertexMismatch { k: usize },
    DegenerateSystem { nonzero: usize },
    DimensionMismatch { expected: usize, found: usize },
    InvalidDigit { digit: usize, r: usize },
    EmptyPeriod,
    OutOfDomain { x: f64 },
    NonConvergence { depth: usize, bound: f64 },
    NotDifferentiable { gamma: f64 },
    TailBoundUnavailable,
    DuplicateAbscissa { index: usize },
    NotIncreasing { index: usize },
    InfiniteExponent { position: usize },
    HorizonTooSmall { horizon: usize },
    PolynomialDegenerate,
    CutPoint,
    Endpoint,
    OutOfRange { alpha: f64 },
    InvalidSchedule { reason: &'static str },
    InvalidProbability,
    DegenerateWindow,
    ZeroOscillation,
    InvalidPreset { reason: &'static str },
    InvalidArgument { reason: &'static str },
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            Error::TooFewBranches { .. } => "TooFewBranches",
            Error::NonFinite { .. } => "NonFinite",
            Error::NonMonotonePartition { .. } => "NonMonotonePartition",
            Error::HorizontalRatioOutOfRange { .. } => "HorizontalRatioOutOfRange",
            Error::ContractionOutOfRange { .. } => "ContractionOutOfRange",
            Error::SumNotOne { .. } => "SumNotOne",
            Error::PartitionMismatch { .. } => "PartitionMismatch",
            Error::VertexMismatch { .. } => "VertexMismatch",
            Error::DegenerateSystem { .. } => "DegenerateSystem",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidDigit { .. } => "InvalidDigit",
            Error::EmptyPeriod => "EmptyPeriod",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::NotDifferentiable { .. } => "NotDifferentiable",
            Error::TailBoundUnavailable => "TailBoundUnavailable",
            Error::DuplicateAbscissa { .. } => "DuplicateAbscissa",
            Error::NotIncreasing { .. } => "NotIncreasing",
            Error::InfiniteExponent { .. } => "InfiniteExponent",
            Error::HorizonTooSmall { .. } => "HorizonTooSmall",
            Error::PolynomialDegenerate => "PolynomialDegenerate",
            Error::CutPoint => "CutPoint",
            Error::Endpoint => "Endpoint",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::InvalidSchedule { .. } => "InvalidSchedule",
            Error::InvalidProbability => "InvalidProbability",
            Error::DegenerateWindow => "DegenerateWindow",
            Error::ZeroOscillation => "ZeroOscillation",
            Error::InvalidPreset { .. } => "InvalidPreset",
            Error::InvalidArgument { .. } => "InvalidArgument",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TooFewBranches { r } => write!(f, "need at least 2 branches, got {r}"),
            Error::NonFinite { k } => write!(f, "branch {k} has a non-finite parameter"),
            Error::NonMonotonePartition { k } => {
                write!(f, "partition is not strictly increasing at vertex {k}")
            }
            Error::HorizontalRatioOutOfRange { k, a } => {
                write!(f, "branch {k}: horizontal ratio a={a} outside (0,1)")
            }
            Error::ContractionOutOfRange { k, d } => {
                write!(f, "branch {k}: vertical ratio |d|={} is not below 1", libm::fabs(*d))
            }
            Error::SumNotOne { sum } => write!(f, "horizontal ratios sum to {sum}, expected 1"),
            Error::PartitionMismatch { k } => {
                write!(f, "branch {k}: offset b does not continue the partition")
            }
            Error::VertexMismatch { k } => {
                write!(f, "branch {k}: vertical parameters do not join the polygon")
            }
            Error::DegenerateSystem { nonzero } => {
                write!(f, "only {nonzero} branch(es) with d != 0; need at least 2")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} entries, found {found}")
            }
            Error::InvalidDigit { digit, r } => write!(f, "digit {digit} outside 1..={r}"),
            Error::EmptyPeriod => f.write_str("period must be nonempty"),
            Error::OutOfDomain { x } => write!(f, "point {x} outside the open unit interval"),
            Error::NonConvergence { depth, bound } => {
                write!(f, "depth cap {depth} reached with error bound {bound}")
            }
            Error::NotDifferentiable { gamma } => {
                write!(f, "exponent {gamma} does not exceed 1; no derivative")
            }
            Error::TailBoundUnavailable => f.write_str("no positive decay margin certified"),
            Error::DuplicateAbscissa { index } => write!(f, "abscissa {index} repeats"),
            Error::NotIncreasing { index } => write!(f, "points not increasing at {index}"),
            Error::InfiniteExponent { position } => {
                write!(f, "digit at position {position} has d = 0; exponent is infinite")
            }
            Error::HorizonTooSmall { horizon } => write!(f, "horizon {horizon} below 16"),
            Error::PolynomialDegenerate => f.write_str("the function is a polynomial"),
            Error::CutPoint => f.write_str("point has two codings; use the cut-point rules"),
            Error::Endpoint => f.write_str("endpoints only admit one-sided exponents"),
            Error::OutOfRange { alpha } => write!(f, "exponent {alpha} outside the support"),
            Error::InvalidSchedule { reason } => write!(f, "invalid run schedule: {reason}"),
            Error::InvalidProbability => f.write_str("invalid probability vector"),
            Error::DegenerateWindow => f.write_str("window radius outside the admissible range"),
            Error::ZeroOscillation => f.write_str("function is affine on the window"),
            Error::InvalidPreset { reason } => write!(f, "invalid preset: {reason}"),
            Error::InvalidArgument { reason } => write!(f, "invalid argument: {reason}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

impl core::error::Error for Error {}
