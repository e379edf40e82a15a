//! Command-line front end: equation files in, JSON reports and CSV
//! trajectories out.
//!
//! Exit codes: 0 success, 1 input error, 2 negative analysis (resonance
//! failure, nonzero obstruction), 3 numeric failure.

pub mod args;
pub mod commands;
pub mod equation_file;
pub mod report;

use std::fmt;

use num_complex::Complex64;
use psent::Error;

pub use commands::{run, Outcome};

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub obstruction: Option<(Complex64, f64)>,
}

impl CliError {
    pub fn input(message: String) -> Self {
        CliError { code: 1, kind: "input", message, obstruction: None }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Parse(_) => (1, "parse"),
            Error::EvalAtBase => (1, "eval-at-base"),
            Error::SingularCoefficient => (1, "singular-coefficient"),
            Error::NotCanonical(_) => (1, "not-canonical"),
            Error::DegreeTooLow(_) => (1, "degree-too-low"),
            Error::UnsupportedDegree(_) => (1, "unsupported-degree"),
            Error::OrderTooLow { .. } => (1, "order-too-low"),
            Error::BranchNotRepresentable(_) => (1, "branch-not-representable"),
            Error::InvalidPath(_) => (1, "invalid-path"),
            Error::InvalidSettings(_) => (1, "invalid-settings"),
            Error::Precondition(_) => (1, "precondition"),
            Error::ObstructionNonzero { .. } => (2, "obstruction-nonzero"),
            Error::NoBranchFits(_) => (2, "no-branch-fits"),
            Error::SeriesMismatch(_) => (3, "series-mismatch"),
            Error::BranchAmbiguity(_) => (3, "branch-ambiguity"),
            Error::OutsideChart(_) => (3, "outside-chart"),
            Error::WAtZero => (3, "w-at-zero"),
            Error::MaxSteps(_) => (3, "max-steps"),
            Error::FitFailed(_) => (3, "fit-failed"),
            Error::LocateFailed(_) => (3, "locate-failed"),
            Error::LoopEncounter(_) => (3, "loop-encounter"),
        };
        let obstruction = match &e {
            Error::ObstructionNonzero { value, scale } => Some((*value, *scale)),
            _ => None,
        };
        CliError { code, kind, message: e.to_string(), obstruction }
    }
}
