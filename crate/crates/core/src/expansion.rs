//! Formal solutions `y = Σ_{j≥0} c_j ζ^{(j−2)/(N−1)}` of the canonical
//! equation about a movable singularity `z0`.
//!
//! Series are stored as [`PuiseuxSeries`] in `t = ζ^{1/(N−1)}`, so `c_j`
//! sits at `t`-index `j − 2`. Substituting `y` with `c_r` left at zero into
//! `y'' − Σ a_n y^n` leaves the coefficient `L_r` at `t`-index `r − 2N`, and
//! the recurrence reads `(r+N−1)(r−2N−2) c_r = (N−1)² P_r` with `P_r = −L_r`.
//!
//! If `y` is the finite sum through `c_M`, the residual has `t`-valuation at
//! least `M + 1 − 2N`: every coefficient below that index is one of the
//! `L_r + (linear part) c_r`, `r ≤ M`, that the recurrence annihilates.

use num_complex::Complex64;
use serde::Serialize;

use crate::canonical::CanonicalEquation;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{CoeffFn, PuiseuxSeries};

/// Leading-order class of the expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "parity", rename_all = "snake_case")]
pub enum BranchClass {
    /// Even `N`: one class, `c_0 = 1`.
    Even,
    /// Odd `N = 2K+1`: `c_0^K = ε`.
    Odd { eps: i8 },
}

impl BranchClass {
    pub fn for_degree(n: usize, eps: i8) -> Result<Self> {
        if n < 2 {
            return Err(Error::DegreeTooLow(n));
        }
        if n % 2 == 0 {
            return Ok(BranchClass::Even);
        }
        if eps != 1 && eps != -1 {
            return Err(Error::Precondition(format!("branch sign must be ±1, got {eps}")));
        }
        Ok(BranchClass::Odd { eps })
    }

    /// All classes for degree `n`.
    pub fn all(n: usize) -> Vec<Self> {
        if n % 2 == 0 {
            vec![BranchClass::Even]
        } else {
            vec![BranchClass::Odd { eps: 1 }, BranchClass::Odd { eps: -1 }]
        }
    }

    pub fn eps(&self) -> i8 {
        match self {
            BranchClass::Even => 1,
            BranchClass::Odd { eps } => *eps,
        }
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        match (self, n % 2) {
            (BranchClass::Even, 0) | (BranchClass::Odd { .. }, 1) => Ok(()),
            _ => Err(Error::Precondition(format!("branch class {self:?} does not match N = {n}"))),
        }
    }

    /// A leading coefficient of this class: `1` for even `N` and for `ε = +1`;
    /// for `ε = −1`, `−1` when `K` is odd and `exp(iπ/K)` when `K` is even
    /// (exactly `i` for `K = 2`, float-only for even `K ≥ 4`).
    pub fn representative<S: Scalar>(&self, n: usize) -> Result<S> {
        self.check_degree(n)?;
        match *self {
            BranchClass::Even | BranchClass::Odd { eps: 1 } => Ok(S::one()),
            BranchClass::Odd { .. } => {
                let k = (n - 1) / 2;
                if k % 2 == 1 {
                    Ok(-S::one())
                } else if k == 2 {
                    Ok(S::imag_unit())
                } else {
                    let w = Complex64::from_polar(1.0, std::f64::consts::PI / k as f64);
                    S::try_from_complex(w)
                        .ok_or_else(|| Error::BranchNotRepresentable(format!("c0 = exp(iπ/{k}) for N = {n}")))
                }
            }
        }
    }
}

/// A formal solution truncated after `c_M`.
#[derive(Clone, Debug)]
pub struct ExpansionResult<S> {
    pub n: usize,
    pub z0: S,
    pub branch: BranchClass,
    pub beta: S,
    pub order: usize,
    /// `y` in `t = ζ^{1/(N−1)}`; exact finite sum of the computed terms.
    pub series: PuiseuxSeries<S>,
    pub obstruction: S,
    /// Magnitude of the largest term contributing to the obstruction.
    pub obstruction_scale: f64,
}

impl<S: Scalar> ExpansionResult<S> {
    /// `c_j`, the coefficient of `ζ^{(j−2)/(N−1)}`.
    pub fn coefficient(&self, j: usize) -> S {
        assert!(j <= self.order);
        self.series.coeff(j as i64 - 2)
    }

    pub fn coefficients(&self) -> Vec<S> {
        (0..=self.order).map(|j| self.coefficient(j)).collect()
    }

    /// `(j−2, N−1)`: exponent numerator and denominator of term `j`.
    pub fn exponent(&self, j: usize) -> (i64, i64) {
        (j as i64 - 2, self.n as i64 - 1)
    }

    /// Index of the free coefficient, `2(N+1)`.
    pub fn resonance_index(&self) -> usize {
        2 * (self.n + 1)
    }

    /// `(y, y')` at `z` on sheet `k` of `t`.
    pub fn eval_state(&self, z: Complex64, k: i64) -> Result<(Complex64, Complex64)> {
        Ok((self.series.eval(z, k)?, self.series.differentiate().eval(z, k)?))
    }
}

struct Lifted<S> {
    /// `a_0..a_N` in `t`.
    a: Vec<PuiseuxSeries<S>>,
    ram: u32,
}

fn lift<C: CoeffFn>(canon: &CanonicalEquation<C>, z0: &C::Scalar) -> Lifted<C::Scalar> {
    let m = (canon.degree() - 1) as u32;
    let a = (0..=canon.degree())
        .map(|k| {
            let ts = canon.coeff(k).local_taylor(z0);
            let mut coeffs = Vec::new();
            for (i, c) in ts.coeffs().iter().enumerate() {
                if i > 0 {
                    coeffs.extend(std::iter::repeat_with(C::Scalar::zero).take(m as usize - 1));
                }
                coeffs.push(c.clone());
            }
            let order = ts.order().map(|o| ((o + 1) * m as usize) as i64 - 1);
            PuiseuxSeries::new(z0.clone(), m, 0, coeffs, order)
        })
        .collect();
    Lifted { a, ram: m }
}

/// `y'' − Σ_{n=0}^{N} a_n y^n` as a Puiseux series in `t`.
fn defect<S: Scalar>(lifted: &Lifted<S>, y: &PuiseuxSeries<S>) -> Result<(PuiseuxSeries<S>, Vec<PuiseuxSeries<S>>)> {
    if y.ramification() != lifted.ram {
        return Err(Error::SeriesMismatch("ramification"));
    }
    let n = lifted.a.len() - 1;
    let mut terms = Vec::with_capacity(n + 1);
    let mut ypow = PuiseuxSeries::one(y.base().clone(), lifted.ram);
    let mut sum = PuiseuxSeries::zero(y.base().clone(), lifted.ram, None);
    for a in &lifted.a {
        let t = a.mul(&ypow)?;
        sum = sum.add(&t)?;
        terms.push(t);
        ypow = ypow.mul(y)?;
    }
    let d2 = y.differentiate().differentiate();
    terms.push(d2.clone());
    Ok((d2.sub(&sum)?, terms))
}

/// The defect of a candidate series against the canonical equation.
pub fn residual<C: CoeffFn>(
    canon: &CanonicalEquation<C>,
    y: &PuiseuxSeries<C::Scalar>,
) -> Result<PuiseuxSeries<C::Scalar>> {
    let lifted = lift(canon, y.base());
    Ok(defect(&lifted, y)?.0)
}

struct Run<S> {
    coeffs: Vec<S>,
    obstruction: S,
    scale: f64,
}

/// Runs the recurrence through `c_max`, using `beta` at the resonance (when
/// reached) whatever the obstruction.
fn run<C: CoeffFn>(
    canon: &CanonicalEquation<C>,
    z0: &C::Scalar,
    branch: BranchClass,
    beta: &C::Scalar,
    max: usize,
) -> Result<Run<C::Scalar>> {
    type S<C> = <C as CoeffFn>::Scalar;
    let big = canon.degree();
    branch.check_degree(big)?;
    let lifted = lift(canon, z0);
    let m = lifted.ram;
    let m2 = S::<C>::from_int((m * m) as i64);
    let res_index = 2 * (big + 1);
    let mut c: Vec<S<C>> = vec![branch.representative(big)?];
    let mut obstruction = S::<C>::zero();
    let mut scale = 0.0;
    for r in 1..=max {
        let mut trial = c.clone();
        trial.push(S::<C>::zero());
        let y = PuiseuxSeries::new(z0.clone(), m, -2, trial, Some(r as i64 - 2));
        let (d, terms) = defect(&lifted, &y)?;
        let idx = r as i64 - 2 * big as i64;
        if let Some(o) = d.order() {
            if o < idx {
                return Err(Error::OrderTooLow { got: o.max(0) as usize, needed: idx as usize });
            }
        }
        let l = d.coeff(idx);
        let prefactor = (r as i64 + big as i64 - 1) * (r as i64 - 2 * big as i64 - 2);
        if prefactor == 0 {
            assert_eq!(r, res_index, "recurrence degenerates only at the resonance");
            obstruction = -l;
            scale = terms.iter().map(|t| t.coeff(idx).magnitude()).fold(0.0, f64::max);
            c.push(beta.clone());
        } else {
            c.push(-(m2.clone() * l) / S::<C>::from_int(prefactor));
        }
    }
    Ok(Run { coeffs: c, obstruction, scale })
}

/// `P_{2(N+1)}` for the given class, with the magnitude of the largest
/// contributing term.
pub fn obstruction<C: CoeffFn>(
    canon: &CanonicalEquation<C>,
    z0: &C::Scalar,
    branch: BranchClass,
) -> Result<(C::Scalar, f64)> {
    let n = canon.degree();
    let r = run(canon, z0, branch, &C::Scalar::zero(), 2 * (n + 1))?;
    Ok((r.obstruction, r.scale))
}

/// Builds the formal solution through `c_M` with `c_{2(N+1)} = beta`.
pub fn expand<C: CoeffFn>(
    canon: &CanonicalEquation<C>,
    z0: &C::Scalar,
    branch: BranchClass,
    beta: C::Scalar,
    order: usize,
) -> Result<ExpansionResult<C::Scalar>> {
    let n = canon.degree();
    let needed = 2 * (n + 1);
    if order < needed {
        return Err(Error::OrderTooLow { got: order, needed });
    }
    let r = run(canon, z0, branch, &beta, order)?;
    if !r.obstruction.negligible(r.scale) {
        return Err(Error::ObstructionNonzero { value: r.obstruction.to_complex(), scale: r.scale });
    }
    let m = (n - 1) as u32;
    Ok(ExpansionResult {
        n,
        z0: z0.clone(),
        branch,
        beta,
        order,
        series: PuiseuxSeries::new(z0.clone(), m, -2, r.coeffs, None),
        obstruction: r.obstruction,
        obstruction_scale: r.scale,
    })
}
