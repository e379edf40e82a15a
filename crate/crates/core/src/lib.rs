//! Movable algebraic singularities of `y'' = Σ a_n(z) y^n`: resonance tests,
//! Puiseux expansions, the W-function charts, and numerical continuation.

pub mod error;
pub mod scalar;
pub mod series;

pub use error::{Error, ParseError, Result};
pub use scalar::{ExactScalar, Scalar};
pub mod equation;
pub mod canonical;
pub mod resonance;
pub mod expansion;
pub mod wfunc;
pub mod continuation;
