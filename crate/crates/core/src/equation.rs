use num_complex::Complex64;

use crate::error::{Error, ParseError, Result};
use crate::scalar::{ExactScalar, Scalar};
use crate::series::Poly;

/// `y'' = Σ_{n=0}^{N} a_n(z) y^n` with Gaussian-rational polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationSpec {
    n: usize,
    a: Vec<Poly<ExactScalar>>,
}

impl EquationSpec {
    pub fn new(n: usize, a: Vec<Poly<ExactScalar>>) -> Result<Self> {
        if a.len() != n + 1 {
            return Err(ParseError::Equation(format!(
                "expected {} coefficient polynomials for N = {n}, got {}",
                n + 1,
                a.len()
            ))
            .into());
        }
        if n < 2 {
            return Err(Error::DegreeTooLow(n));
        }
        if a[n].is_zero() {
            return Err(ParseError::Equation("leading coefficient a_N is identically zero".into()).into());
        }
        Ok(EquationSpec { n, a })
    }

    /// Convenience constructor from integer coefficient lists.
    pub fn from_int_coeffs(n: usize, a: &[&[i64]]) -> Result<Self> {
        Self::new(n, a.iter().map(|c| Poly::from_ints(c)).collect())
    }

    /// Canonical-form equation with the given `a_0..a_{N−2}`; `a_{N−1} = 0`
    /// and `a_N = 2(N+1)/(N−1)²` are filled in.
    pub fn canonical(n: usize, lower: Vec<Poly<ExactScalar>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DegreeTooLow(n));
        }
        if lower.len() != n - 1 {
            return Err(ParseError::Equation(format!("expected {} lower coefficients, got {}", n - 1, lower.len())).into());
        }
        let mut a = lower;
        a.push(Poly::zero());
        a.push(Poly::constant(canonical_lead::<ExactScalar>(n)));
        Self::new(n, a)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Poly<ExactScalar>] {
        &self.a
    }

    pub fn coeff(&self, k: usize) -> &Poly<ExactScalar> {
        &self.a[k]
    }

    /// True when `a_N = 2(N+1)/(N−1)²` and `a_{N−1} ≡ 0` exactly.
    pub fn is_canonical(&self) -> bool {
        self.a[self.n - 1].is_zero() && self.a[self.n] == Poly::constant(canonical_lead(self.n))
    }

    pub fn has_constant_coefficients(&self) -> bool {
        self.a.iter().all(|p| p.is_constant())
    }

    pub fn to_complex(&self) -> ComplexEquation {
        ComplexEquation { a: self.a.iter().map(|p| p.to_complex()).collect() }
    }
}

/// `2(N+1)/(N−1)²`.
pub fn canonical_lead<S: Scalar>(n: usize) -> S {
    let n = n as i64;
    S::from_ratio(2 * (n + 1), (n - 1) * (n - 1))
}

/// Floating copy of an [`EquationSpec`] for fast right-hand-side evaluation.
#[derive(Clone, Debug)]
pub struct ComplexEquation {
    a: Vec<Poly<Complex64>>,
}

impl ComplexEquation {
    pub fn degree(&self) -> usize {
        self.a.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &Poly<Complex64> {
        &self.a[k]
    }

    /// `Σ a_n(z) y^n`.
    pub fn rhs(&self, z: Complex64, y: Complex64) -> Complex64 {
        self.a
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, p| acc * y + p.eval_complex(z))
    }

    /// `a_n(z)` for all `n`.
    pub fn values_at(&self, z: Complex64) -> Vec<Complex64> {
        self.a.iter().map(|p| p.eval_complex(z)).collect()
    }
}

/// A second-order ODE `y'' = F(z, y, y')` that the continuation engine can drive.
pub trait SecondOrderOde: Send + Sync {
    fn accel(&self, z: Complex64, y: Complex64, yp: Complex64) -> Complex64;
}

impl SecondOrderOde for ComplexEquation {
    fn accel(&self, z: Complex64, y: Complex64, _yp: Complex64) -> Complex64 {
        self.rhs(z, y)
    }
}
