//! Polynomials, truncated Taylor series and ramified Puiseux series over a
//! [`Scalar`](crate::scalar::Scalar) field.

mod poly;
mod puiseux;
mod taylor;

pub use poly::Poly;
pub use puiseux::PuiseuxSeries;
pub use taylor::{principal_power, TaylorSeries};

use num_complex::Complex64;

use crate::scalar::Scalar;

/// Coefficient functions `a_n(z)` as seen by the resonance and W modules:
/// either exact polynomials or Taylor series about a base point.
pub trait CoeffFn: Clone + std::fmt::Debug + Send + Sync {
    type Scalar: Scalar;

    fn zero_like(&self) -> Self;
    fn constant_like(&self, c: Self::Scalar) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: &Self::Scalar) -> Self;
    fn derivative(&self) -> Self;
    fn eval_complex(&self, z: Complex64) -> Complex64;
    /// Stored coefficients (monomial or Taylor, lowest first).
    fn coefficient_list(&self) -> Vec<Self::Scalar>;
    /// Taylor expansion about `z0`.
    fn local_taylor(&self, z0: &Self::Scalar) -> TaylorSeries<Self::Scalar>;

    fn magnitude(&self) -> f64 {
        self.coefficient_list().iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Identically zero: exactly in exact arithmetic, relative to `scale`
    /// coefficientwise in floating arithmetic.
    fn vanishes(&self, scale: f64) -> bool {
        self.coefficient_list().iter().all(|c| c.negligible(scale))
    }
}
