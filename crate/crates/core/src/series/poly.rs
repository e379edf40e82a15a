use std::fmt;

use num_complex::Complex64;

use super::taylor::TaylorSeries;
use super::CoeffFn;
use crate::scalar::{ExactScalar, Scalar};

/// Dense univariate polynomial, `coeffs[k]` multiplies `z^k`.
///
/// Normalized: the last stored coefficient is nonzero; the zero polynomial
/// has no coefficients.
#[derive(Clone, PartialEq)]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: S) -> Self {
        Poly::new(vec![c])
    }

    /// `c·z^k`.
    pub fn monomial(c: S, k: usize) -> Self {
        let mut v = vec![S::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// The polynomial `z`.
    pub fn identity() -> Self {
        Poly::monomial(S::one(), 1)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Horner evaluation in the scalar's own arithmetic.
    pub fn eval(&self, z: &S) -> S {
        self.coeffs.iter().rev().fold(S::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_complex())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn neg(&self) -> Self {
        Poly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * S::from_int(k as i64))
                .collect(),
        )
    }

    /// Antiderivative vanishing at `z = 0`.
    pub fn antiderivative(&self) -> Self {
        let mut out = vec![S::zero()];
        for (k, c) in self.coeffs.iter().enumerate() {
            out.push(c.clone() / S::from_int(k as i64 + 1));
        }
        Poly::new(out)
    }

    /// Taylor coefficients at `z0`: `p(z0 + ζ) = Σ t_k ζ^k` (exact shift).
    pub fn taylor_coeffs(&self, z0: &S) -> Vec<S> {
        // Repeated synthetic division by (z - z0).
        let mut work = self.coeffs.clone();
        let mut out = Vec::with_capacity(work.len());
        while !work.is_empty() {
            let mut rem = S::zero();
            let mut quotient = vec![S::zero(); work.len().saturating_sub(1)];
            for k in (0..work.len()).rev() {
                let v = work[k].clone() + rem.clone() * z0.clone();
                if k > 0 {
                    quotient[k - 1] = v.clone();
                }
                rem = v;
            }
            out.push(rem);
            work = quotient;
        }
        out
    }

    pub fn to_complex(&self) -> Poly<Complex64> {
        Poly::new(self.coeffs.iter().map(|c| c.to_complex()).collect())
    }
}

impl Poly<ExactScalar> {
    /// Shorthand for tests and demos: real integer coefficients.
    pub fn from_ints(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&n| ExactScalar::from_int(n)).collect())
    }
}

impl<S: Scalar> fmt::Debug for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({:?})", c)?,
                1 => write!(f, "({:?})z", c)?,
                _ => write!(f, "({:?})z^{}", c, k)?,
            }
        }
        Ok(())
    }
}

impl<S: Scalar> CoeffFn for Poly<S> {
    type Scalar = S;

    fn zero_like(&self) -> Self {
        Poly::zero()
    }
    fn constant_like(&self, c: S) -> Self {
        Poly::constant(c)
    }
    fn add(&self, o: &Self) -> Self {
        Poly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Poly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Poly::mul(self, o)
    }
    fn scale(&self, c: &S) -> Self {
        Poly::scale(self, c)
    }
    fn derivative(&self) -> Self {
        Poly::derivative(self)
    }
    fn eval_complex(&self, z: Complex64) -> Complex64 {
        Poly::eval_complex(self, z)
    }
    fn coefficient_list(&self) -> Vec<S> {
        self.coeffs.clone()
    }
    fn local_taylor(&self, z0: &S) -> TaylorSeries<S> {
        TaylorSeries::exact(z0.clone(), self.taylor_coeffs(z0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(n: i64) -> ExactScalar {
        ExactScalar::from_int(n)
    }

    #[test]
    fn eval_examples() {
        let p = Poly::from_ints(&[0, 0, 1]);
        assert_eq!(p.eval(&ex(3)), ex(9));
        let zero = Poly::<ExactScalar>::zero();
        assert_eq!(zero.eval(&ExactScalar::from_parts(7, 1, 2, 1)), ex(0));
        let q = Poly::from_ints(&[0, 4, 0, -1]);
        assert_eq!(q.eval(&ex(2)), ex(0));
    }

    #[test]
    fn normalization_drops_trailing_zeros() {
        let p = Poly::from_ints(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert!(Poly::from_ints(&[0, 0]).is_zero());
        assert_eq!(Poly::from_ints(&[1, 1]).sub(&Poly::from_ints(&[1, 1])).degree(), None);
    }

    #[test]
    fn taylor_shift_binomial() {
        // z^2 about 1: 1 + 2ζ + ζ^2
        let p = Poly::from_ints(&[0, 0, 1]);
        assert_eq!(p.taylor_coeffs(&ex(1)), vec![ex(1), ex(2), ex(1)]);
        let p = Poly::from_ints(&[3, -1, 0, 2]);
        let z0 = ExactScalar::from_parts(1, 2, -1, 3);
        let t = p.taylor_coeffs(&z0);
        let zeta = ExactScalar::from_parts(2, 7, 1, 5);
        let shifted = t.iter().rev().fold(ex(0), |acc, c| acc * zeta.clone() + c.clone());
        assert_eq!(shifted, p.eval(&(z0 + zeta)));
    }

    #[test]
    fn calculus_roundtrip() {
        let p = Poly::from_ints(&[5, -3, 7, 2]);
        assert_eq!(p.antiderivative().derivative(), p);
        assert_eq!(p.derivative(), Poly::from_ints(&[-3, 14, 6]));
    }
}
