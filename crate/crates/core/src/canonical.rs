//! Reduction to `y'' = Σ_{n≤N−2} a_n y^n + 2(N+1)/(N−1)² y^N` via
//! `y = f·ỹ + g`, `dz̃/dz = f^{−2}`.

use num_complex::Complex64;

use crate::equation::{canonical_lead, EquationSpec};
use crate::error::{Error, Result};
use crate::scalar::{ExactScalar, Scalar};
use crate::series::{CoeffFn, Poly, TaylorSeries};

/// Canonical equation with lower coefficients `a_0..a_{N−2}`; `a_{N−1} = 0`
/// and `a_N = 2(N+1)/(N−1)²` are implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalEquation<C> {
    n: usize,
    lower: Vec<C>,
}

impl<C: CoeffFn> CanonicalEquation<C> {
    pub fn from_lower(n: usize, lower: Vec<C>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DegreeTooLow(n));
        }
        if lower.len() != n - 1 {
            return Err(Error::Precondition(format!("canonical N = {n} needs {} lower coefficients", n - 1)));
        }
        Ok(CanonicalEquation { n, lower })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> &[C] {
        &self.lower
    }

    pub fn lead(&self) -> C::Scalar {
        canonical_lead(self.n)
    }

    /// `a_k` for any `0 ≤ k ≤ N`.
    pub fn coeff(&self, k: usize) -> C {
        assert!(k <= self.n);
        if k + 1 < self.n {
            self.lower[k].clone()
        } else if k + 1 == self.n {
            self.lower[0].zero_like()
        } else {
            self.lower[0].constant_like(self.lead())
        }
    }

    pub fn has_constant_coefficients(&self) -> bool {
        let scale = self.magnitude().max(1.0);
        self.lower.iter().all(|a| a.derivative().vanishes(scale))
    }

    pub fn magnitude(&self) -> f64 {
        self.lower.iter().map(|a| a.magnitude()).fold(0.0, f64::max)
    }

    /// `Σ a_n(z) y^n` including the implicit leading term.
    pub fn rhs(&self, z: Complex64, y: Complex64) -> Complex64 {
        let lead = self.lead().to_complex();
        let mut acc = lead * y.powu(self.n as u32);
        let mut yk = Complex64::new(1.0, 0.0);
        for a in &self.lower {
            acc += a.eval_complex(z) * yk;
            yk *= y;
        }
        acc
    }
}

impl CanonicalEquation<Poly<ExactScalar>> {
    /// Accepts an equation already in canonical polynomial form.
    pub fn from_spec(eq: &EquationSpec) -> Result<Self> {
        if !eq.is_canonical() {
            return Err(Error::NotCanonical(format!(
                "need a_{} ≡ 0 and a_{} = {}",
                eq.degree() - 1,
                eq.degree(),
                canonical_lead::<ExactScalar>(eq.degree())
            )));
        }
        Self::from_lower(eq.degree(), eq.coeffs()[..eq.degree() - 1].to_vec())
    }

    pub fn to_spec(&self) -> EquationSpec {
        EquationSpec::canonical(self.n, self.lower.clone()).expect("valid canonical data")
    }
}

/// Data of the change of variables about `z0`.
#[derive(Clone, Debug)]
pub struct TransformRecord {
    pub n: usize,
    pub z0: Complex64,
    pub order: usize,
    /// `f(z)` about `z0`.
    pub f: TaylorSeries<Complex64>,
    /// `g(z)` about `z0`.
    pub g: TaylorSeries<Complex64>,
    /// `z̃(z) = ∫_{z0}^{z} f^{−2}`, about `z0`.
    pub ztilde: TaylorSeries<Complex64>,
    /// `z − z0` as a series in `z̃` about 0.
    pub ztilde_inverse: TaylorSeries<Complex64>,
    df: TaylorSeries<Complex64>,
    dg: TaylorSeries<Complex64>,
    /// Largest coefficient deviation of the computed `ã_N` from its target
    /// and of `ã_{N−1}` from zero, relative to the coefficient scale.
    pub normalization_defect: f64,
    radius: f64,
}

fn binomial(k: usize, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

fn local(p: &Poly<ExactScalar>, z0: Complex64, order: usize) -> TaylorSeries<Complex64> {
    TaylorSeries::with_order(z0, p.to_complex().taylor_coeffs(&z0), Some(order))
}

/// Heuristic convergence radius from the tail of the coefficient list.
fn radius_estimate(s: &TaylorSeries<Complex64>) -> f64 {
    let c = s.coeffs();
    let scale = s.magnitude().max(f64::MIN_POSITIVE);
    let lo = (c.len() / 2).max(1);
    c.iter()
        .enumerate()
        .skip(lo)
        .filter(|(_, x)| x.norm() > 1e-14 * scale)
        .map(|(k, x)| (scale / x.norm()).powf(1.0 / k as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Canonicalizes `eq` about `z0`, computing the new coefficients to order `order`
/// in `z̃`. `f` uses the principal `(N+3)`-th root.
pub fn canonicalize(
    eq: &EquationSpec,
    z0: Complex64,
    order: usize,
) -> Result<(CanonicalEquation<TaylorSeries<Complex64>>, TransformRecord)> {
    let n = eq.degree();
    let work = order + 4;
    let a: Vec<TaylorSeries<Complex64>> = eq.coeffs().iter().map(|p| local(p, z0, work)).collect();
    let lead: Complex64 = canonical_lead(n);
    let an0 = a[n].coeff(0);
    if an0.norm() <= 1e-14 * a[n].magnitude().max(1e-300) {
        return Err(Error::SingularCoefficient);
    }
    let an_inv = a[n].reciprocal();
    let f = an_inv.scale(&lead).powf(1.0 / (n as f64 + 3.0));
    let f2 = f.derivative().derivative();
    let g = if n == 2 {
        // The plain shift −a_1/(2a_2) leaves a linear term −f³f''; this one
        // absorbs it.
        f2.mul(&f.truncate(work - 2).reciprocal())
            .sub(&a[1].truncate(work - 2))
            .mul(&an_inv.truncate(work - 2))
            .scale(&Complex64::new(0.5, 0.0))
    } else {
        a[n - 1].mul(&an_inv).scale(&Complex64::new(-1.0 / n as f64, 0.0))
    };
    let g2 = g.derivative().derivative();

    // ã_k(z) = f³ Σ_{j≥k} a_j C(j,k) f^k g^{j−k} − [k=1] f³f'' − [k=0] f³g''
    let f3 = f.mul(&f).mul(&f);
    let mut fpow = vec![TaylorSeries::with_order(z0, vec![Complex64::new(1.0, 0.0)], Some(work))];
    let mut gpow = fpow.clone();
    for _ in 0..n {
        fpow.push(fpow.last().unwrap().mul(&f));
        gpow.push(gpow.last().unwrap().mul(&g));
    }
    let mut atilde_z = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut sum = TaylorSeries::with_order(z0, vec![], Some(work));
        for j in k..=n {
            let term = a[j].mul(&gpow[j - k]).scale(&Complex64::new(binomial(j, k), 0.0));
            sum = sum.add(&term);
        }
        let mut ak = f3.mul(&fpow[k]).mul(&sum);
        if k == 1 {
            ak = ak.sub(&f3.mul(&f2));
        }
        if k == 0 {
            ak = ak.sub(&f3.mul(&g2));
        }
        atilde_z.push(ak.truncate(order));
    }

    let scale = atilde_z.iter().map(|s| s.magnitude()).fold(1.0, f64::max);
    let lead_defect = atilde_z[n]
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| if k == 0 { (c - lead).norm() } else { c.norm() })
        .fold(0.0, f64::max);
    let sub_defect = atilde_z[n - 1].magnitude();
    let normalization_defect = lead_defect.max(sub_defect) / scale;

    let finv = f.reciprocal();
    let ztilde = finv.mul(&finv).antiderivative().truncate(order + 1);
    let ztilde_inverse = ztilde.truncate(order).reversion();
    let lower = atilde_z[..n - 1].iter().map(|s| s.compose(&ztilde_inverse)).collect();

    let radius = radius_estimate(&f).min(radius_estimate(&g)).min(radius_estimate(&ztilde));
    let rec = TransformRecord {
        n,
        z0,
        order,
        df: f.derivative(),
        dg: g.derivative(),
        f,
        g,
        ztilde,
        ztilde_inverse,
        normalization_defect,
        radius,
    };
    Ok((CanonicalEquation::from_lower(n, lower)?, rec))
}

impl TransformRecord {
    /// Estimated radius (in `z`) inside which the truncated transform is usable.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let one = TaylorSeries::with_order(self.z0, vec![Complex64::new(1.0, 0.0)], self.f.order());
        self.f.sub(&one).magnitude() <= tol && self.g.magnitude() <= tol
    }

    fn check_disk(&self, z: Complex64) -> Result<()> {
        let d = (z - self.z0).norm();
        if d > self.radius {
            return Err(Error::OutsideChart(format!("|z − z0| = {d:e} exceeds transform radius {:e}", self.radius)));
        }
        Ok(())
    }

    /// `(z, y, y') ↦ (z̃, ỹ, ỹ')` with `ỹ = (y−g)/f`, `ỹ' = f(y'−g') − f'(y−g)`.
    pub fn pushforward_state(&self, z: Complex64, y: Complex64, yp: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        self.check_disk(z)?;
        let f = self.f.eval_complex(z);
        if f.norm() == 0.0 {
            return Err(Error::OutsideChart("f vanishes".into()));
        }
        let g = self.g.eval_complex(z);
        let df = self.df.eval_complex(z);
        let dg = self.dg.eval_complex(z);
        let zt = self.ztilde.eval_complex(z);
        Ok((zt, (y - g) / f, f * (yp - dg) - df * (y - g)))
    }

    /// Inverse of [`pushforward_state`](Self::pushforward_state):
    /// `y = fỹ + g`, `y' = f'ỹ + ỹ'/f + g'`.
    pub fn pullback_state(&self, zt: Complex64, yt: Complex64, ytp: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        let z = self.z0 + self.ztilde_inverse.eval_complex(zt);
        self.check_disk(z)?;
        let f = self.f.eval_complex(z);
        if f.norm() == 0.0 {
            return Err(Error::OutsideChart("f vanishes".into()));
        }
        let g = self.g.eval_complex(z);
        let df = self.df.eval_complex(z);
        let dg = self.dg.eval_complex(z);
        Ok((z, f * yt + g, df * yt + ytp / f + dg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn already_canonical_is_identity() {
        let p1 = EquationSpec::from_int_coeffs(2, &[&[0, 1], &[], &[6]]).unwrap();
        let (canon, rec) = canonicalize(&p1, c(0.0), 8).unwrap();
        assert!(rec.is_identity(1e-14));
        assert!((canon.lower()[0].coeff(1) - 1.0).norm() < 1e-14);
        let cubic = EquationSpec::from_int_coeffs(3, &[&[], &[], &[], &[2]]).unwrap();
        let (_, rec) = canonicalize(&cubic, c(0.3), 6).unwrap();
        assert!(rec.is_identity(1e-14));
    }

    #[test]
    fn constant_scaling() {
        let eq = EquationSpec::from_int_coeffs(2, &[&[], &[], &[12]]).unwrap();
        let (_, rec) = canonicalize(&eq, c(0.0), 6).unwrap();
        let f = 2f64.powf(-0.2);
        assert!((rec.f.coeff(0) - f).norm() < 1e-15);
        assert!(rec.f.coeffs()[1..].iter().all(|x| x.norm() < 1e-15));
        assert!(rec.g.magnitude() < 1e-15);
        assert!((rec.ztilde.coeff(1) - 2f64.powf(0.4)).norm() < 1e-14);
        let (zt, yt, ytp) = rec.pushforward_state(c(0.5), c(2.0), c(3.0)).unwrap();
        assert!((zt - 0.5 / (f * f)).norm() < 1e-14);
        assert!((yt - 2.0 / f).norm() < 1e-14);
        assert!((ytp - 3.0 * f).norm() < 1e-14);
    }

    #[test]
    fn singular_point_rejected() {
        let eq = EquationSpec::from_int_coeffs(2, &[&[], &[], &[0, 1]]).unwrap();
        assert!(matches!(canonicalize(&eq, c(0.0), 4), Err(Error::SingularCoefficient)));
    }

    #[test]
    fn normalization_holds_for_variable_coefficients() {
        for n in 2..=5 {
            let mut a: Vec<Vec<i64>> = (0..=n).map(|k| vec![k as i64 - 1, 1, (k % 2) as i64]).collect();
            a[n] = vec![3, 1, 1];
            let refs: Vec<&[i64]> = a.iter().map(|v| v.as_slice()).collect();
            let eq = EquationSpec::from_int_coeffs(n, &refs).unwrap();
            let (_, rec) = canonicalize(&eq, Complex64::new(0.1, 0.2), 12).unwrap();
            assert!(rec.normalization_defect < 1e-12, "N={n}: {}", rec.normalization_defect);
        }
    }

    #[test]
    fn exact_form_requires_normalization() {
        let eq = EquationSpec::from_int_coeffs(2, &[&[0, 1], &[], &[3]]).unwrap();
        assert!(matches!(CanonicalEquation::from_spec(&eq), Err(Error::NotCanonical(_))));
    }
}
