use num_complex::Complex64;

use super::CoeffFn;
use crate::scalar::{principal_root, Scalar};

/// Power series `Σ c_k (z − base)^k`.
///
/// `order` is the largest index known to be correct; `None` marks an exact
/// (finite) series whose omitted coefficients are all zero. Arithmetic never
/// reports coefficients beyond the common truncation order of its operands.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSeries<S> {
    base: S,
    coeffs: Vec<S>,
    order: Option<usize>,
}

fn min_order(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl<S: Scalar> TaylorSeries<S> {
    /// Truncated series known through index `coeffs.len() − 1`.
    pub fn truncated(base: S, coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least one coefficient");
        let order = Some(coeffs.len() - 1);
        TaylorSeries { base, coeffs, order }
    }

    pub fn exact(base: S, mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        TaylorSeries { base, coeffs, order: None }
    }

    pub fn with_order(base: S, coeffs: Vec<S>, order: Option<usize>) -> Self {
        match order {
            None => Self::exact(base, coeffs),
            Some(m) => {
                let mut c = coeffs;
                c.resize(m + 1, S::zero());
                TaylorSeries { base, coeffs: c, order }
            }
        }
    }

    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn order(&self) -> Option<usize> {
        self.order
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> S {
        if let Some(m) = self.order {
            assert!(k <= m, "coefficient {k} requested beyond truncation order {m}");
        }
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_exact(&self) -> bool {
        self.order.is_none()
    }

    /// Length of the coefficient window to compute for a result of `order`.
    fn span(order: Option<usize>, natural: usize) -> usize {
        match order {
            None => natural,
            Some(m) => m + 1,
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = min_order(self.order, Some(order)).unwrap();
        let mut c: Vec<S> = self.coeffs.iter().take(order + 1).cloned().collect();
        c.resize(order + 1, S::zero());
        TaylorSeries { base: self.base.clone(), coeffs: c, order: Some(order) }
    }

    fn combine(&self, o: &Self, f: impl Fn(S, S) -> S) -> Self {
        debug_assert_eq!(self.base, o.base, "series bases differ");
        let order = min_order(self.order, o.order);
        let n = Self::span(order, self.coeffs.len().max(o.coeffs.len()));
        let c = (0..n)
            .map(|k| {
                f(
                    self.coeffs.get(k).cloned().unwrap_or_else(S::zero),
                    o.coeffs.get(k).cloned().unwrap_or_else(S::zero),
                )
            })
            .collect();
        Self::with_order(self.base.clone(), c, order)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a - b)
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::with_order(
            self.base.clone(),
            self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
            self.order,
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.base, o.base, "series bases differ");
        let order = min_order(self.order, o.order);
        let natural = (self.coeffs.len() + o.coeffs.len()).saturating_sub(1);
        let n = Self::span(order, natural);
        let mut out = vec![S::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(n - i) {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::with_order(self.base.clone(), out, order)
    }

    pub fn derivative(&self) -> Self {
        let order = self.order.map(|m| {
            assert!(m >= 1, "derivative of an order-0 series has no known coefficients");
            m - 1
        });
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.clone() * S::from_int(k as i64))
            .collect();
        Self::with_order(self.base.clone(), c, order)
    }

    /// Termwise antiderivative vanishing at the base point.
    pub fn antiderivative(&self) -> Self {
        let mut c = vec![S::zero()];
        for (k, a) in self.coeffs.iter().enumerate() {
            c.push(a.clone() / S::from_int(k as i64 + 1));
        }
        Self::with_order(self.base.clone(), c, self.order.map(|m| m + 1))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let zeta = z - self.base.to_complex();
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * zeta + c.to_complex())
    }

    /// Value of the series at displacement `zeta` from its base, in exact arithmetic.
    pub fn eval_offset(&self, zeta: &S) -> S {
        self.coeffs.iter().rev().fold(S::zero(), |acc, c| acc * zeta.clone() + c.clone())
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn reciprocal(&self) -> Self {
        let c0 = self.coeff(0);
        assert!(!c0.is_zero(), "reciprocal of a series with zero constant term");
        let n = match self.order {
            Some(m) => m + 1,
            None => panic!("reciprocal of an exact series needs an explicit truncation"),
        };
        let inv0 = S::one() / c0;
        let mut out = vec![S::zero(); n];
        out[0] = inv0.clone();
        for k in 1..n {
            let mut acc = S::zero();
            for j in 1..=k {
                let a = self.coeffs.get(j).cloned().unwrap_or_else(S::zero);
                if !a.is_zero() {
                    acc = acc + a * out[k - j].clone();
                }
            }
            out[k] = -(acc * inv0.clone());
        }
        TaylorSeries { base: self.base.clone(), coeffs: out, order: self.order }
    }

    /// `self(inner(w))`, where `inner` has zero constant term. The result is
    /// a series in `inner`'s variable.
    pub fn compose(&self, inner: &Self) -> Self {
        assert!(inner.coeff(0).is_zero(), "inner series must vanish at its base");
        let order = min_order(self.order, inner.order);
        let order = match order {
            Some(m) => m,
            None => panic!("composition of exact series needs an explicit truncation"),
        };
        let inner_t = inner.truncate(order);
        let mut acc = TaylorSeries::with_order(inner.base.clone(), vec![S::zero()], Some(order));
        let top = self.coeffs.len().min(order + 1);
        for k in (0..top).rev() {
            acc = acc.mul(&inner_t);
            let mut c = acc.coeffs.clone();
            c[0] = c[0].clone() + self.coeffs[k].clone();
            acc = TaylorSeries { base: inner.base.clone(), coeffs: c, order: Some(order) };
        }
        acc
    }

    /// Compositional inverse by Lagrange inversion: for `w = Σ_{k≥1} a_k ζ^k`
    /// with `a_1 ≠ 0`, returns `ζ(w) = Σ_{n≥1} b_n w^n` with
    /// `b_n = (1/n) [ζ^{n−1}] (ζ/w(ζ))^n`, as a series in `w` about 0.
    pub fn reversion(&self) -> Self {
        let order = self.order.expect("reversion needs a truncated series");
        assert!(self.coeff(0).is_zero(), "reversion needs zero constant term");
        assert!(!self.coeff(1).is_zero(), "reversion needs a nonzero linear term");
        // φ = ζ / w(ζ) = 1 / (a_1 + a_2 ζ + ...), known to order − 1.
        let shifted: Vec<S> = (1..=order).map(|k| self.coeff(k)).collect();
        let phi = TaylorSeries::truncated(self.base.clone(), shifted).reciprocal();
        let mut out = vec![S::zero(); order + 1];
        let mut phi_pow = TaylorSeries::with_order(self.base.clone(), vec![S::one()], Some(order - 1));
        for (n, slot) in out.iter_mut().enumerate().skip(1) {
            phi_pow = phi_pow.mul(&phi);
            *slot = phi_pow.coeff(n - 1) / S::from_int(n as i64);
        }
        TaylorSeries { base: S::zero(), coeffs: out, order: Some(order) }
    }

    /// Re-expands about `new_base` (binomial recentering, same order).
    pub fn recenter(&self, new_base: &S) -> Self {
        let shift = new_base.clone() - self.base.clone();
        let n = self.coeffs.len();
        let mut out = vec![S::zero(); n];
        // Horner in series form: p(shift + ζ)
        for k in (0..n).rev() {
            for j in (1..n).rev() {
                out[j] = out[j].clone() * shift.clone() + out[j - 1].clone();
            }
            out[0] = out[0].clone() * shift.clone() + self.coeffs[k].clone();
        }
        Self::with_order(new_base.clone(), out, self.order)
    }

    pub fn to_complex(&self) -> TaylorSeries<Complex64> {
        TaylorSeries::with_order(
            self.base.to_complex(),
            self.coeffs.iter().map(|c| c.to_complex()).collect(),
            self.order,
        )
    }
}

impl TaylorSeries<Complex64> {
    /// `self^alpha` with the principal determination at the base point.
    pub fn powf(&self, alpha: f64) -> Self {
        let order = self.order.expect("fractional power needs a truncated series");
        let c0 = self.coeff(0);
        assert!(c0.norm() > 0.0, "fractional power of a series vanishing at its base");
        let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
        out[0] = principal_power(c0, alpha);
        // n g_n c_0 = Σ_{k=1}^{n} ((α + 1) k − n) c_k g_{n−k}
        for n in 1..=order {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 1..=n {
                let ck = self.coeffs.get(k).copied().unwrap_or_default();
                acc += ck * out[n - k] * ((alpha + 1.0) * k as f64 - n as f64);
            }
            out[n] = acc / (c0 * n as f64);
        }
        TaylorSeries { base: self.base, coeffs: out, order: self.order }
    }

    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Principal power `exp(α Log x)`; exact `n`-th roots go through
/// [`principal_root`] so that e.g. `1^{1/5}` is exactly 1.
pub fn principal_power(x: Complex64, alpha: f64) -> Complex64 {
    let inv = 1.0 / alpha;
    if inv.fract() == 0.0 && inv > 0.0 {
        return principal_root(x, inv as u32);
    }
    if x.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let arg = crate::scalar::principal_arg(x);
    Complex64::from_polar(x.norm().powf(alpha), alpha * arg)
}

impl<S: Scalar> CoeffFn for TaylorSeries<S> {
    type Scalar = S;

    fn zero_like(&self) -> Self {
        TaylorSeries::with_order(self.base.clone(), vec![], self.order)
    }
    fn constant_like(&self, c: S) -> Self {
        TaylorSeries::with_order(self.base.clone(), vec![c], self.order)
    }
    fn add(&self, o: &Self) -> Self {
        TaylorSeries::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        TaylorSeries::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        TaylorSeries::mul(self, o)
    }
    fn scale(&self, c: &S) -> Self {
        TaylorSeries::scale(self, c)
    }
    fn derivative(&self) -> Self {
        TaylorSeries::derivative(self)
    }
    fn eval_complex(&self, z: Complex64) -> Complex64 {
        TaylorSeries::eval_complex(self, z)
    }
    fn coefficient_list(&self) -> Vec<S> {
        self.coeffs.clone()
    }
    fn local_taylor(&self, z0: &S) -> TaylorSeries<S> {
        if *z0 == self.base {
            self.clone()
        } else {
            self.recenter(z0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactScalar;

    fn ex(n: i64) -> ExactScalar {
        ExactScalar::from_int(n)
    }

    #[test]
    fn truncation_is_min_of_operands() {
        let a = TaylorSeries::truncated(ex(0), vec![ex(1), ex(1), ex(1)]);
        let b = TaylorSeries::truncated(ex(0), vec![ex(1), ex(2)]);
        let p = a.mul(&b);
        assert_eq!(p.order(), Some(1));
        assert_eq!(p.coeffs(), &[ex(1), ex(3)]);
        let e = TaylorSeries::exact(ex(0), vec![ex(1), ex(1)]);
        let q = e.mul(&e);
        assert_eq!(q.order(), None);
        assert_eq!(q.coeffs(), &[ex(1), ex(2), ex(1)]);
    }

    #[test]
    fn reciprocal_of_geometric() {
        let a = TaylorSeries::truncated(ex(0), vec![ex(1), ex(-1), ex(0), ex(0)]);
        let r = a.reciprocal();
        assert_eq!(r.coeffs(), &[ex(1), ex(1), ex(1), ex(1)]);
    }

    #[test]
    fn reversion_inverts_composition() {
        // w = ζ + ζ^2/2 − ζ^3/3 + 2ζ^5
        let w = TaylorSeries::truncated(
            ex(0),
            vec![ex(0), ex(1), ExactScalar::from_ratio(1, 2), ExactScalar::from_ratio(-1, 3), ex(0), ex(2), ex(0), ex(0)],
        );
        let inv = w.reversion();
        let id = w.compose(&inv);
        let mut expect = vec![ex(0); 8];
        expect[1] = ex(1);
        assert_eq!(id.coeffs(), expect.as_slice());
        let id2 = inv.compose(&w);
        assert_eq!(id2.coeffs(), expect.as_slice());
    }

    #[test]
    fn reversion_of_exp_minus_one_is_log() {
        // e^ζ − 1 → log(1 + w) = w − w²/2 + w³/3 − …
        let mut c = vec![Complex64::new(0.0, 0.0)];
        let mut f = 1.0;
        for k in 1..10 {
            f *= k as f64;
            c.push(Complex64::new(1.0 / f, 0.0));
        }
        let inv = TaylorSeries::truncated(Complex64::new(0.0, 0.0), c).reversion();
        for k in 1..10 {
            let expect = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            assert!((inv.coeff(k).re - expect).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn powf_matches_binomial() {
        let base = Complex64::new(0.0, 0.0);
        let a = TaylorSeries::truncated(base, vec![Complex64::new(4.0, 0.0), Complex64::new(4.0, 0.0), Complex64::new(0.0, 0.0)]);
        // (4 + 4ζ)^{1/2} = 2 (1 + ζ)^{1/2} = 2 + ζ − ζ²/4
        let r = a.powf(0.5);
        assert!((r.coeff(0).re - 2.0).abs() < 1e-15);
        assert!((r.coeff(1).re - 1.0).abs() < 1e-15);
        assert!((r.coeff(2).re + 0.25).abs() < 1e-15);
    }

    #[test]
    fn recenter_preserves_values() {
        let p = TaylorSeries::exact(ex(0), vec![ex(1), ex(-2), ex(3), ex(1)]);
        let q = p.recenter(&ex(2));
        let z = ExactScalar::from_ratio(7, 3);
        let lhs = p.eval_offset(&z);
        let rhs = q.eval_offset(&(z - ex(2)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn antiderivative_then_derivative() {
        let a = TaylorSeries::truncated(ex(0), vec![ex(3), ex(5), ex(-1)]);
        let back = a.antiderivative().derivative();
        assert_eq!(back, a);
    }
}
