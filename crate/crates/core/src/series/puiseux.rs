use num_complex::Complex64;
use num_integer::Integer;

use super::Poly;
use crate::error::{Error, Result};
use crate::scalar::{principal_arg, Scalar};

/// Truncated Puiseux series `Σ_{j ≥ start} c_j t^j` with `t = (z − base)^{1/m}`.
///
/// `order` is the largest index known to be correct (`None`: exact, all
/// omitted terms vanish). A nonzero series has `coeffs[0] ≠ 0`; a zero
/// series has no coefficients and `start = order + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxSeries<S> {
    base: S,
    ram: u32,
    start: i64,
    coeffs: Vec<S>,
    order: Option<i64>,
}

fn min_order(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl<S: Scalar> PuiseuxSeries<S> {
    pub fn new(base: S, ram: u32, start: i64, coeffs: Vec<S>, order: Option<i64>) -> Self {
        assert!(ram >= 1, "ramification must be positive");
        let mut s = PuiseuxSeries { base, ram, start, coeffs, order };
        s.normalize();
        s
    }

    /// The monomial `c·t^j`, exact.
    pub fn monomial(base: S, ram: u32, c: S, j: i64) -> Self {
        Self::new(base, ram, j, vec![c], None)
    }

    pub fn zero(base: S, ram: u32, order: Option<i64>) -> Self {
        Self::new(base, ram, 0, vec![], order)
    }

    pub fn one(base: S, ram: u32) -> Self {
        Self::monomial(base, ram, S::one(), 0)
    }

    fn normalize(&mut self) {
        if let Some(m) = self.order {
            let keep = (m - self.start + 1).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => {
                self.coeffs.clear();
                self.start = match self.order {
                    Some(m) => m + 1,
                    None => 0,
                };
            }
            Some(p) => {
                self.coeffs.drain(..p);
                self.start += p as i64;
                while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                    self.coeffs.pop();
                }
            }
        }
    }

    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn ramification(&self) -> u32 {
        self.ram
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn order(&self) -> Option<i64> {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Index of the first nonzero coefficient; `None` for the zero series.
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.start)
    }

    /// Coefficients `c_start, c_{start+1}, …` as stored.
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Coefficient of `t^j`. Requesting an index above the truncation order
    /// is an error in the caller and panics.
    pub fn coeff(&self, j: i64) -> S {
        if let Some(m) = self.order {
            assert!(j <= m, "coefficient t^{j} requested beyond truncation order {m}");
        }
        if j < self.start {
            return S::zero();
        }
        self.coeffs.get((j - self.start) as usize).cloned().unwrap_or_else(S::zero)
    }

    /// Re-expands `p` about `z0` in `t = (z − z0)^{1/m}`, truncated at `t^max`.
    pub fn lift_poly(p: &Poly<S>, z0: &S, m: u32, max: i64) -> Self {
        assert!(m >= 1 && max >= 0);
        let taylor = p.taylor_coeffs(z0);
        let mut coeffs = vec![S::zero(); max as usize + 1];
        for (k, c) in taylor.into_iter().enumerate() {
            let j = k * m as usize;
            if j > max as usize {
                break;
            }
            coeffs[j] = c;
        }
        Self::new(z0.clone(), m, 0, coeffs, Some(max))
    }

    pub fn truncate(&self, max: i64) -> Self {
        Self::new(
            self.base.clone(),
            self.ram,
            self.start,
            self.coeffs.clone(),
            min_order(self.order, Some(max)),
        )
    }

    /// Same series written in `t' = t^{1/q}` with ramification `m·q`.
    pub fn with_ramification(&self, ram: u32) -> Result<Self> {
        if ram % self.ram != 0 {
            return Err(Error::SeriesMismatch("ramification"));
        }
        let q = (ram / self.ram) as i64;
        let mut coeffs = Vec::new();
        if !self.coeffs.is_empty() {
            coeffs = vec![S::zero(); (self.coeffs.len() - 1) * q as usize + 1];
            for (i, c) in self.coeffs.iter().enumerate() {
                coeffs[i * q as usize] = c.clone();
            }
        }
        // Indices strictly between multiples of q are structurally zero.
        Ok(Self::new(self.base.clone(), ram, self.start * q, coeffs, self.order.map(|m| (m + 1) * q - 1)))
    }

    fn align(&self, o: &Self) -> Result<(Self, Self)> {
        if self.base != o.base {
            return Err(Error::SeriesMismatch("base point"));
        }
        if self.ram == o.ram {
            return Ok((self.clone(), o.clone()));
        }
        let l = self.ram.lcm(&o.ram);
        Ok((self.with_ramification(l)?, o.with_ramification(l)?))
    }

    fn combine(a: &Self, b: &Self, f: impl Fn(S, S) -> S) -> Self {
        let order = min_order(a.order, b.order);
        let lo = a.start.min(b.start);
        let hi_a = a.start + a.coeffs.len() as i64 - 1;
        let hi_b = b.start + b.coeffs.len() as i64 - 1;
        let mut hi = hi_a.max(hi_b);
        if let Some(m) = order {
            hi = hi.min(m);
        }
        let coeffs = (lo..=hi)
            .map(|j| {
                let x = if j >= a.start { a.coeffs.get((j - a.start) as usize).cloned() } else { None };
                let y = if j >= b.start { b.coeffs.get((j - b.start) as usize).cloned() } else { None };
                f(x.unwrap_or_else(S::zero), y.unwrap_or_else(S::zero))
            })
            .collect();
        Self::new(a.base.clone(), a.ram, lo, coeffs, order)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let (a, b) = self.align(o)?;
        Ok(Self::combine(&a, &b, |x, y| x + y))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        let (a, b) = self.align(o)?;
        Ok(Self::combine(&a, &b, |x, y| x - y))
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::new(
            self.base.clone(),
            self.ram,
            self.start,
            self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
            self.order,
        )
    }

    /// Product; known through `min(order_a + val_b, order_b + val_a)`.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        let (a, b) = self.align(o)?;
        if (a.is_zero() && a.order.is_none()) || (b.is_zero() && b.order.is_none()) {
            return Ok(Self::zero(a.base.clone(), a.ram, None));
        }
        let order = match (a.order, b.order) {
            (None, None) => None,
            (Some(x), None) => Some(x + b.start),
            (None, Some(y)) => Some(y + a.start),
            (Some(x), Some(y)) => Some((x + b.start).min(y + a.start)),
        };
        if a.is_zero() || b.is_zero() {
            return Ok(Self::zero(a.base.clone(), a.ram, order));
        }
        let start = a.start + b.start;
        let mut n = a.coeffs.len() + b.coeffs.len() - 1;
        if let Some(m) = order {
            n = n.min((m - start + 1).max(0) as usize);
        }
        let mut out = vec![S::zero(); n];
        for (i, x) in a.coeffs.iter().enumerate().take(n) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate().take(n - i) {
                out[i + j] = out[i + j].clone() + x.clone() * y.clone();
            }
        }
        Ok(Self::new(a.base.clone(), a.ram, start, out, order))
    }

    /// `self^n` by repeated squaring.
    pub fn int_pow(&self, mut n: u32) -> Self {
        let mut acc = Self::one(self.base.clone(), self.ram);
        let mut sq = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq).expect("same base and ramification");
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq).expect("same base and ramification");
            }
        }
        acc
    }

    /// `d/dz`: `t^j ↦ (j/m) t^{j−m}`.
    pub fn differentiate(&self) -> Self {
        let m = self.ram as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.clone() * S::from_ratio(self.start + i as i64, m))
            .collect();
        Self::new(self.base.clone(), self.ram, self.start - m, coeffs, self.order.map(|o| o - m))
    }

    /// Termwise antiderivative `t^j ↦ m/(j+m) t^{j+m}`; fails on a `t^{−m}`
    /// term, whose primitive is logarithmic.
    pub fn antiderivative(&self) -> Result<Self> {
        let m = self.ram as i64;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = self.start + i as i64;
            if j == -m {
                if !c.is_zero() {
                    return Err(Error::Precondition("antiderivative of a (z − z0)^{-1} term".into()));
                }
                coeffs.push(S::zero());
            } else {
                coeffs.push(c.clone() * S::from_ratio(m, j + m));
            }
        }
        Ok(Self::new(self.base.clone(), self.ram, self.start + m, coeffs, self.order.map(|o| o + m)))
    }

    /// `t` on sheet `k`: `|ζ|^{1/m} exp(i(Arg ζ + 2πk)/m)`, `Arg ∈ (−π, π]`.
    pub fn sheet_variable(&self, z: Complex64, k: i64) -> Complex64 {
        let zeta = z - self.base.to_complex();
        let m = self.ram as f64;
        let arg = (principal_arg(zeta) + 2.0 * std::f64::consts::PI * k as f64) / m;
        Complex64::from_polar(zeta.norm().powf(1.0 / m), arg)
    }

    /// Value at `z` on branch `k` (taken mod `m`).
    pub fn eval(&self, z: Complex64, k: i64) -> Result<Complex64> {
        let zeta = z - self.base.to_complex();
        if zeta.norm() == 0.0 {
            if self.start < 0 && !self.is_zero() {
                return Err(Error::EvalAtBase);
            }
            return Ok(if self.start == 0 { self.coeffs[0].to_complex() } else { Complex64::new(0.0, 0.0) });
        }
        let t = self.sheet_variable(z, k.rem_euclid(self.ram as i64));
        Ok(self.eval_at_t(t))
    }

    /// Value for a given `t`, bypassing branch selection.
    pub fn eval_at_t(&self, t: Complex64) -> Complex64 {
        let poly = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c.to_complex());
        poly * t.powi(self.start as i32)
    }

    pub fn to_complex(&self) -> PuiseuxSeries<Complex64> {
        PuiseuxSeries::new(
            self.base.to_complex(),
            self.ram,
            self.start,
            self.coeffs.iter().map(|c| c.to_complex()).collect(),
            self.order,
        )
    }

    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactScalar;

    fn ex(n: i64) -> ExactScalar {
        ExactScalar::from_int(n)
    }

    fn mono(m: u32, c: i64, j: i64) -> PuiseuxSeries<ExactScalar> {
        PuiseuxSeries::monomial(ex(0), m, ex(c), j)
    }

    #[test]
    fn lift_examples() {
        let p = Poly::from_ints(&[0, 1]);
        let s = PuiseuxSeries::lift_poly(&p, &ex(5), 2, 4);
        assert_eq!(s.coeff(0), ex(5));
        assert_eq!(s.coeff(2), ex(1));
        assert_eq!(s.coeff(1), ex(0));
        let c = PuiseuxSeries::lift_poly(&Poly::from_ints(&[7]), &ex(3), 4, 6);
        assert_eq!(c.coeffs(), &[ex(7)]);
        let q = PuiseuxSeries::lift_poly(&Poly::from_ints(&[0, 0, 1]), &ex(1), 3, 8);
        assert_eq!(q.coeffs(), &[ex(1), ex(0), ex(0), ex(2), ex(0), ex(0), ex(1)]);
    }

    #[test]
    fn arithmetic_examples() {
        let a = mono(1, 1, -2);
        assert_eq!(a.mul(&a).unwrap(), mono(1, 1, -4));
        let one_t = PuiseuxSeries::new(ex(0), 1, 0, vec![ex(1), ex(1)], Some(1));
        let sq = one_t.int_pow(2);
        assert_eq!(sq.order(), Some(1));
        assert_eq!(sq.coeffs(), &[ex(1), ex(2)]);
        let z = mono(1, 1, -1).add(&mono(1, -1, -1)).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.valuation(), None);
        let zt = PuiseuxSeries::new(ex(0), 1, -1, vec![ex(1)], Some(3))
            .sub(&PuiseuxSeries::new(ex(0), 1, -1, vec![ex(1)], Some(3)))
            .unwrap();
        assert_eq!(zt.start(), 4);
    }

    #[test]
    fn differentiation_examples() {
        let d = mono(1, 1, -2).differentiate();
        assert_eq!(d, mono(1, -2, -3));
        assert!(mono(3, 5, 0).differentiate().is_zero());
        let h = mono(2, 1, 1).differentiate();
        assert_eq!(h, PuiseuxSeries::monomial(ex(0), 2, ExactScalar::from_ratio(1, 2), -1));
    }

    #[test]
    fn eval_examples() {
        let s = mono(2, 1, 2);
        let z = Complex64::new(4.0, 0.0);
        assert!((s.eval(z, 0).unwrap() - 4.0).norm() < 1e-14);
        assert!((s.eval(z, 1).unwrap() - 4.0).norm() < 1e-14);
        let t = mono(2, 1, 1);
        let z = Complex64::new(1.0, 0.0);
        assert!((t.eval(z, 0).unwrap() - 1.0).norm() < 1e-14);
        assert!((t.eval(z, 1).unwrap() + 1.0).norm() < 1e-14);
        let y = mono(3, 1, -2);
        assert!((y.eval(Complex64::new(8.0, 0.0), 0).unwrap() - 0.25).norm() < 1e-14);
        assert_eq!(y.eval(Complex64::new(0.0, 0.0), 0), Err(Error::EvalAtBase));
    }

    #[test]
    fn mixed_ramification_is_rescaled() {
        let a = mono(2, 1, 1);
        let b = mono(3, 1, 1);
        let s = a.mul(&b).unwrap();
        assert_eq!(s.ramification(), 6);
        assert_eq!(s.valuation(), Some(5));
    }

    #[test]
    fn antiderivative_rejects_log_term() {
        assert!(mono(2, 1, -2).antiderivative().is_err());
        let a = mono(2, 3, 1);
        assert_eq!(a.antiderivative().unwrap().differentiate(), a);
    }
}
