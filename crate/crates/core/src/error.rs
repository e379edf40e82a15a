use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("malformed rational `{0}`")]
    Rational(String),
    #[error("invalid equation: {0}")]
    Equation(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("series operands differ in {0}")]
    SeriesMismatch(&'static str),

    #[error("cannot evaluate a series with negative start index at its base point")]
    EvalAtBase,

    #[error("leading coefficient a_N vanishes at the base point (fixed singularity)")]
    SingularCoefficient,

    #[error("equation is not in canonical form: {0}")]
    NotCanonical(String),

    #[error("equation degree N = {0} is outside the nonlinear class (N >= 2)")]
    DegreeTooLow(usize),

    #[error("unsupported degree N = {0} for this operation")]
    UnsupportedDegree(usize),

    #[error("resonance obstruction P_2(N+1) = {value} (scale {scale:e}) is nonzero")]
    ObstructionNonzero { value: Complex64, scale: f64 },

    #[error("expansion order {got} is below the resonance index {needed}")]
    OrderTooLow { got: usize, needed: usize },

    #[error("branch class not representable in exact arithmetic: {0}")]
    BranchNotRepresentable(String),

    #[error("chart branch is ambiguous: |y| = {0:e} is below the handoff threshold")]
    BranchAmbiguity(f64),

    #[error("chart evaluated outside its validity disk: {0}")]
    OutsideChart(String),

    #[error("W is undefined at y = 0")]
    WAtZero,

    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error("exponent fit failed: {0}")]
    FitFailed(String),

    #[error("no branch class fits the trajectory (relative residual {0:e})")]
    NoBranchFits(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("another singularity was met during the monodromy loop near {0}")]
    LoopEncounter(Complex64),

    #[error("singularity location failed: {0}")]
    LocateFailed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
