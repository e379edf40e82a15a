//! The auxiliary function
//! `W = y'² + B y' − 2 Σ_{k=1}^{N+1} a_{k−1} y^k / k`, `B = Σ_{k=1}^{N−1} b_k y^{−k}`,
//! its derivative identity `W' + P W = Q y' + R + S`, and the regularizing
//! `(u, v)` charts near a movable singularity.
//!
//! With `A = Σ a_j y^j` the identity holds for
//! `P = Σ k b_k y^{−k−1}`, `Q = Σ b_k' y^{−k} + P B` and
//! `R + S = B A − 2 Σ a'_{k−1} y^k/k − 2 P Σ a_{k−1} y^k/k`,
//! where `S` collects the positive powers of `y` and `R` the rest.
//!
//! Charts. Put `p = 2, e = N+1, σ = 1` for even `N` (`y = u^{−2}`) and
//! `p = 1, e = K+1, σ = −ε` for odd `N = 2K+1` (`y = u^{−1}`). Then
//! `F² = u^{2e}(B² + 8 Σ a_{k−1} y^k/k)` is a polynomial in `u`,
//! `y' = −B/2 + σ F G / (2u^e)` with `G = 1 + 2u^{2e} v / F²`,
//! `W = v + ψ v²` with `ψ = u^{2e}/F²`, and
//! `du/dz = u^{p+1−e} D`, `D = u^e B/(2p) − σF/(2p) − σu^{2e} v/(pF)`.
//! Near the singularity `dz/du = u^{e−p−1}/D`, i.e. `(1−N) u^{N−2}` (even) and
//! `εK u^{K−1}` (odd) at leading order.

use num_complex::Complex64;
use serde::Serialize;

use crate::canonical::CanonicalEquation;
use crate::error::{Error, Result};
use crate::resonance::{b_sequence, BSequence};
use crate::scalar::Scalar;
use crate::series::{CoeffFn, Poly};

/// Finite Laurent polynomial in `y` with coefficient functions of `z`;
/// `coeffs[i]` multiplies `y^{low+i}`.
#[derive(Clone, Debug)]
pub struct LaurentY<C> {
    pub low: i64,
    pub coeffs: Vec<C>,
}

impl<C: CoeffFn> LaurentY<C> {
    fn new(low: i64, coeffs: Vec<C>) -> Self {
        LaurentY { low, coeffs }
    }

    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    /// Coefficient of `y^k`, `None` when outside the stored window.
    pub fn coeff(&self, k: i64) -> Option<&C> {
        if k < self.low {
            return None;
        }
        self.coeffs.get((k - self.low) as usize)
    }

    fn add(&self, o: &Self) -> Self {
        let low = self.low.min(o.low);
        let high = self.high().max(o.high());
        let zero = self.coeffs[0].zero_like();
        let coeffs = (low..=high)
            .map(|k| match (self.coeff(k), o.coeff(k)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => zero.clone(),
            })
            .collect();
        LaurentY::new(low, coeffs)
    }

    fn scale(&self, c: &C::Scalar) -> Self {
        LaurentY::new(self.low, self.coeffs.iter().map(|x| x.scale(c)).collect())
    }

    fn mul(&self, o: &Self) -> Self {
        let zero = self.coeffs[0].zero_like();
        let mut out = vec![zero; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        LaurentY::new(self.low + o.low, out)
    }

    /// Splits into (powers `≤ 0`, powers `> 0`).
    fn split_nonpositive(&self) -> (Self, Self) {
        let zero = self.coeffs[0].zero_like();
        let neg: Vec<C> = (self.low..=0).map(|k| self.coeff(k).cloned().unwrap_or_else(|| zero.clone())).collect();
        let pos: Vec<C> = (1..=self.high().max(1)).map(|k| self.coeff(k).cloned().unwrap_or_else(|| zero.clone())).collect();
        (LaurentY::new(self.low.min(0), neg), LaurentY::new(1, pos))
    }

    pub fn vanishes(&self, scale: f64) -> bool {
        self.coeffs.iter().all(|c| c.vanishes(scale))
    }

    pub fn eval(&self, z: Complex64, y: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.eval_complex(z) * y.powi((self.low + i as i64) as i32))
            .sum()
    }
}

/// `P, Q, R, S` of the derivative identity.
#[derive(Clone, Debug)]
pub struct PqrsDecomposition<C> {
    pub p: LaurentY<C>,
    pub q: LaurentY<C>,
    pub r: LaurentY<C>,
    pub s: LaurentY<C>,
}

/// `W` for a canonical equation together with its `b_k` and decomposition.
#[derive(Clone, Debug)]
pub struct WFunction<C> {
    pub canon: CanonicalEquation<C>,
    pub b: BSequence<C>,
    pub pqrs: PqrsDecomposition<C>,
    da: Vec<C>,
    db: Vec<C>,
}

/// Builds `P, Q, R, S` for the given `b`.
pub fn build_pqrs<C: CoeffFn>(canon: &CanonicalEquation<C>, b: &BSequence<C>) -> PqrsDecomposition<C> {
    let n = canon.degree();
    let ni = n as i64;
    let a: Vec<C> = (0..=n).map(|k| canon.coeff(k)).collect();
    let da: Vec<C> = a.iter().map(|x| x.derivative()).collect();
    let bs = b.as_slice();
    let rev = |v: Vec<C>| v.into_iter().rev().collect::<Vec<_>>();

    let big_a = LaurentY::new(0, a.clone());
    let big_b = LaurentY::new(-(ni - 1), rev(bs.to_vec()));
    let dbs = LaurentY::new(-(ni - 1), rev(bs.iter().map(|x| x.derivative()).collect()));
    let p = LaurentY::new(
        -ni,
        rev(bs.iter().enumerate().map(|(i, x)| x.scale(&C::Scalar::from_int(i as i64 + 1))).collect()),
    );
    let integ = |src: &[C]| {
        let mut v = vec![src[0].zero_like()];
        v.extend(src.iter().enumerate().map(|(k, x)| x.scale(&C::Scalar::from_ratio(1, k as i64 + 1))));
        LaurentY::new(0, v)
    };
    let ia = integ(&a);
    let ida = integ(&da);
    let q = dbs.add(&p.mul(&big_b));
    let two = C::Scalar::from_int(-2);
    let rs = big_b.mul(&big_a).add(&ida.scale(&two)).add(&p.mul(&ia).scale(&two));
    let (r, s) = rs.split_nonpositive();
    PqrsDecomposition { p, q, r, s }
}

impl<C: CoeffFn> WFunction<C> {
    pub fn new(canon: CanonicalEquation<C>) -> Self {
        let b = b_sequence(&canon);
        let pqrs = build_pqrs(&canon, &b);
        let da = (0..=canon.degree()).map(|k| canon.coeff(k).derivative()).collect();
        let db = b.as_slice().iter().map(|x| x.derivative()).collect();
        WFunction { canon, b, pqrs, da, db }
    }

    pub fn degree(&self) -> usize {
        self.canon.degree()
    }

    fn a_vals(&self, z: Complex64) -> Vec<Complex64> {
        (0..=self.degree()).map(|k| self.canon.coeff(k).eval_complex(z)).collect()
    }

    fn b_vals(&self, z: Complex64) -> Vec<Complex64> {
        self.b.as_slice().iter().map(|x| x.eval_complex(z)).collect()
    }

    /// `W(z, y, y')`.
    pub fn eval_w(&self, z: Complex64, y: Complex64, yp: Complex64) -> Result<Complex64> {
        if y.norm() == 0.0 {
            return Err(Error::WAtZero);
        }
        let a = self.a_vals(z);
        let b = self.b_vals(z);
        let yinv = 1.0 / y;
        let bsum: Complex64 = b.iter().enumerate().map(|(i, bk)| bk * yinv.powi(i as i32 + 1)).sum();
        let isum: Complex64 = a.iter().enumerate().map(|(i, ak)| ak * y.powi(i as i32 + 1) / (i as f64 + 1.0)).sum();
        Ok(yp * yp + bsum * yp - 2.0 * isum)
    }

    /// `−P W + Q y' + R` (the predicted `dW/dz` when `S ≡ 0`).
    pub fn predicted_dw(&self, z: Complex64, y: Complex64, yp: Complex64) -> Result<Complex64> {
        let w = self.eval_w(z, y, yp)?;
        let d = &self.pqrs;
        Ok(-d.p.eval(z, y) * w + d.q.eval(z, y) * yp + d.r.eval(z, y) + d.s.eval(z, y))
    }
}

/// Regularizing chart parameters; see the module documentation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UvChart {
    pub n: usize,
    /// Branch sign (odd `N`), `+1` for even `N`.
    pub eps: i8,
}

/// A point in chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartState {
    pub z: Complex64,
    pub u: Complex64,
    pub v: Complex64,
}

/// `F²`, `∂_u F²` and `∂_z F²` at one `(z, u)`.
struct FData {
    f2: Complex64,
    f2_u: Complex64,
    f2_z: Complex64,
}

impl UvChart {
    pub fn new(n: usize, eps: i8) -> Self {
        UvChart { n, eps: if n % 2 == 0 { 1 } else { eps } }
    }

    pub fn is_even(&self) -> bool {
        self.n % 2 == 0
    }

    /// `y = u^{−p}`.
    pub fn p(&self) -> i32 {
        if self.is_even() {
            2
        } else {
            1
        }
    }

    pub fn e(&self) -> i32 {
        if self.is_even() {
            self.n as i32 + 1
        } else {
            (self.n as i32 - 1) / 2 + 1
        }
    }

    pub fn sigma(&self) -> f64 {
        if self.is_even() {
            1.0
        } else {
            -(self.eps as f64)
        }
    }

    /// Sheet count of `u` around the singularity (ramification in `z`).
    pub fn ramification(&self) -> usize {
        if self.is_even() {
            self.n - 1
        } else {
            (self.n - 1) / 2
        }
    }

    /// `F(z, 0)`: `4/(N−1)` (even) or `2/K` (odd).
    pub fn f_at_zero(&self) -> f64 {
        4.0 / (self.n as f64 - 1.0)
    }

    fn f_data(&self, a: &[Complex64], da: &[Complex64], b: &[Complex64], db: &[Complex64], u: Complex64) -> FData {
        let p = self.p() as usize;
        let e2 = 2 * self.e() as usize;
        // Polynomials in u.
        let mut bu = vec![Complex64::new(0.0, 0.0); p * b.len() + 1];
        let mut bzu = bu.clone();
        for (i, (bk, dbk)) in b.iter().zip(db).enumerate() {
            bu[p * (i + 1)] = *bk;
            bzu[p * (i + 1)] = *dbk;
        }
        let bu = Poly::new(bu);
        let bzu = Poly::new(bzu);
        let shift = Poly::monomial(Complex64::new(1.0, 0.0), e2);
        let mut f2 = shift.mul(&bu.mul(&bu));
        let mut f2z = shift.mul(&bu.mul(&bzu)).scale(&Complex64::new(2.0, 0.0));
        for (j, (aj, daj)) in a.iter().zip(da).enumerate() {
            let k = j + 1;
            if p * k > e2 {
                debug_assert!(aj.norm() == 0.0, "nonpolynomial F² term");
                continue;
            }
            let w = 8.0 / k as f64;
            f2 = f2.add(&Poly::monomial(aj * w, e2 - p * k));
            f2z = f2z.add(&Poly::monomial(daj * w, e2 - p * k));
        }
        FData { f2: f2.eval(&u), f2_u: f2.derivative().eval(&u), f2_z: f2z.eval(&u) }
    }

    fn f_root(&self, f2: Complex64) -> Result<Complex64> {
        let f0 = self.f_at_zero();
        if (f2 - f0 * f0).norm() > 0.75 * f0 * f0 {
            return Err(Error::OutsideChart(format!("F² = {f2} is far from its value {} at u = 0", f0 * f0)));
        }
        Ok(f2.sqrt())
    }

    /// `(dz/du, dv/du)` at `(z, u, v)`.
    pub fn rhs<C: CoeffFn>(&self, w: &WFunction<C>, z: Complex64, u: Complex64, v: Complex64) -> Result<(Complex64, Complex64)> {
        let p = self.p();
        let pf = p as f64;
        let e = self.e();
        let sigma = self.sigma();
        let a = w.a_vals(z);
        let da: Vec<Complex64> = w.da.iter().map(|x| x.eval_complex(z)).collect();
        let b = w.b_vals(z);
        let db: Vec<Complex64> = w.db.iter().map(|x| x.eval_complex(z)).collect();
        let fd = self.f_data(&a, &da, &b, &db, u);
        let f = self.f_root(fd.f2)?;

        let up = u.powi(p);
        let ue = u.powi(e);
        let u2e = ue * ue;
        let mut big_b = Complex64::new(0.0, 0.0);
        let mut big_p = Complex64::new(0.0, 0.0);
        for (i, bk) in b.iter().enumerate() {
            let k = i as i32 + 1;
            big_b += bk * up.powi(k);
            big_p += bk * (k as f64) * up.powi(k + 1);
        }
        // Q = Σ_j q_j y^{−j}, with q_1 = b_1' dropped (zero under resonance).
        let mut big_q = Complex64::new(0.0, 0.0);
        let mut q_tail = Complex64::new(0.0, 0.0);
        for j in 1..=(-w.pqrs.q.low) {
            let qj = w.pqrs.q.coeff(-j).map(|c| c.eval_complex(z)).unwrap_or_default();
            big_q += qj * up.powi(j as i32);
            if j >= 2 {
                q_tail += qj * u.powi(p * (j as i32 - 1) - 1);
            }
        }
        let mut big_r = Complex64::new(0.0, 0.0);
        for j in 0..=(-w.pqrs.r.low) {
            let rj = w.pqrs.r.coeff(-j).map(|c| c.eval_complex(z)).unwrap_or_default();
            big_r += rj * up.powi(j as i32);
        }

        let psi = u2e / fd.f2;
        let psi_u = 2.0 * e as f64 * u.powi(2 * e - 1) / fd.f2 - u2e * fd.f2_u / (fd.f2 * fd.f2);
        let psi_z = -u2e * fd.f2_z / (fd.f2 * fd.f2);
        let big_w = v + psi * v * v;
        let d = ue * big_b / (2.0 * pf) - sigma * f / (2.0 * pf) - sigma * u2e * v / (pf * f);
        if d.norm() < 1e-3 * self.f_at_zero() {
            return Err(Error::OutsideChart(format!("du/dz degenerates (D = {d})")));
        }
        let omega = u.powi(e - p - 1) / d;
        let num = (-big_p * big_w + big_r - 0.5 * big_q * big_b + sigma * big_q * ue * v / f) * omega
            + sigma * f / (2.0 * d) * q_tail
            - (psi_z * omega + psi_u) * v * v;
        let denom = 1.0 + 2.0 * psi * v;
        Ok((omega, num / denom))
    }

    /// Chart coordinates of a regular state with `|y|` above `threshold`.
    /// For even `N` the sign of `u = ±y^{−1/2}` is chosen so that
    /// `G = 2u^e(y' + B/2)/(σF)` has positive real part; for odd `N` the
    /// same requirement fixes `ε`, so the returned chart may differ from `self`.
    pub fn from_state<C: CoeffFn>(
        &self,
        w: &WFunction<C>,
        z: Complex64,
        y: Complex64,
        yp: Complex64,
        threshold: f64,
    ) -> Result<(UvChart, ChartState)> {
        if y.norm() < threshold {
            return Err(Error::BranchAmbiguity(y.norm()));
        }
        let a = w.a_vals(z);
        let b = w.b_vals(z);
        let zero = vec![Complex64::new(0.0, 0.0); a.len()];
        let zb = vec![Complex64::new(0.0, 0.0); b.len()];
        let mut chart = *self;
        let u = if self.is_even() {
            let u0 = 1.0 / y.sqrt();
            let g = chart.g_value(&a, &b, &zero, &zb, z, u0, y, yp)?;
            if g.re >= 0.0 {
                u0
            } else {
                -u0
            }
        } else {
            let u0 = 1.0 / y;
            chart.eps = 1;
            let g = chart.g_value(&a, &b, &zero, &zb, z, u0, y, yp)?;
            if g.re < 0.0 {
                chart.eps = -1;
            }
            u0
        };
        let g = chart.g_value(&a, &b, &zero, &zb, z, u, y, yp)?;
        if g.re <= 0.0 || (g - 1.0).norm() > 0.5 {
            return Err(Error::OutsideChart(format!("G = {g} is not close to 1")));
        }
        let big_w = w.eval_w(z, y, yp)?;
        Ok((chart, ChartState { z, u, v: 2.0 * big_w / (1.0 + g) }))
    }

    #[allow(clippy::too_many_arguments)]
    fn g_value(
        &self,
        a: &[Complex64],
        b: &[Complex64],
        da: &[Complex64],
        db: &[Complex64],
        _z: Complex64,
        u: Complex64,
        y: Complex64,
        yp: Complex64,
    ) -> Result<Complex64> {
        let fd = self.f_data(a, da, b, db, u);
        let f = self.f_root(fd.f2)?;
        let yinv = 1.0 / y;
        let big_b: Complex64 = b.iter().enumerate().map(|(i, bk)| bk * yinv.powi(i as i32 + 1)).sum();
        Ok(2.0 * u.powi(self.e()) * (yp + 0.5 * big_b) / (self.sigma() * f))
    }

    /// `(y, y')` from chart coordinates (`u ≠ 0`).
    pub fn to_state<C: CoeffFn>(&self, w: &WFunction<C>, s: &ChartState) -> Result<(Complex64, Complex64)> {
        if s.u.norm() == 0.0 {
            return Err(Error::OutsideChart("u = 0 is the singularity".into()));
        }
        let a = w.a_vals(s.z);
        let b = w.b_vals(s.z);
        let zero = vec![Complex64::new(0.0, 0.0); a.len()];
        let zb = vec![Complex64::new(0.0, 0.0); b.len()];
        let fd = self.f_data(&a, &zero, &b, &zb, s.u);
        let f = self.f_root(fd.f2)?;
        let y = s.u.powi(-self.p());
        let ue = s.u.powi(self.e());
        let yinv = 1.0 / y;
        let big_b: Complex64 = b.iter().enumerate().map(|(i, bk)| bk * yinv.powi(i as i32 + 1)).sum();
        let yp = -0.5 * big_b + self.sigma() * f / (2.0 * ue) + self.sigma() * ue * s.v / f;
        Ok((y, yp))
    }
}
