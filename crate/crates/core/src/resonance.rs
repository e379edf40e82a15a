//! Resonance conditions for the canonical equation and the `b_k` sequence
//! that makes the polynomial part `S` of the W-derivative vanish.

use num_complex::Complex64;
use serde::Serialize;

use crate::canonical::{canonicalize, CanonicalEquation};
use crate::equation::EquationSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{CoeffFn, TaylorSeries};

/// `b_1..b_{N−1}`; for odd `N = 2K+1` the free entry `b_{K+1}` is set to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BSequence<C> {
    pub n: usize,
    b: Vec<C>,
    /// `K+1` for odd `N`, where the recurrence degenerates.
    pub free_index: Option<usize>,
}

impl<C: CoeffFn> BSequence<C> {
    /// `b_k` for `1 ≤ k ≤ N−1`.
    pub fn get(&self, k: usize) -> &C {
        &self.b[k - 1]
    }

    pub fn as_slice(&self) -> &[C] {
        &self.b
    }
}

fn ratio<S: Scalar>(num: i64, den: i64) -> S {
    S::from_ratio(num, den)
}

/// Right side of the recurrence at step `n`:
/// `(1/(N−n)) a'_{N−n−1} − ½ Σ_{m<n} ((N−n−m+1)/(N−n+m+1)) b_m a_{N+m−n}`.
fn recurrence_rhs<C: CoeffFn>(canon: &CanonicalEquation<C>, b: &[C], n: usize) -> C {
    let big = canon.degree() as i64;
    let ni = n as i64;
    let mut acc = canon.coeff(canon.degree() - n - 1).derivative().scale(&ratio(1, big - ni));
    for m in 1..n {
        let mi = m as i64;
        let a = canon.coeff(canon.degree() + m - n);
        let term = b[m - 1].mul(&a).scale(&ratio(big - ni - mi + 1, 2 * (big - ni + mi + 1)));
        acc = acc.sub(&term);
    }
    acc
}

/// Builds the `b_k`. For odd `N` the degenerate step `n = K+1` is skipped
/// (its right side is `−ρ/2`, see [`rho`]) and `b_{K+1} := 0`.
pub fn b_sequence<C: CoeffFn>(canon: &CanonicalEquation<C>) -> BSequence<C> {
    let big = canon.degree();
    let free_index = (big % 2 == 1).then_some((big + 1) / 2);
    let zero = canon.lower()[0].zero_like();
    let mut b: Vec<C> = Vec::with_capacity(big - 1);
    for n in 1..big {
        if Some(n) == free_index {
            b.push(zero.clone());
            continue;
        }
        let rhs = recurrence_rhs(canon, &b, n);
        let lhs = ratio::<C::Scalar>(((big - 1) * (big - 1)) as i64, big as i64 + 1 - 2 * n as i64);
        b.push(rhs.scale(&lhs));
    }
    BSequence { n: big, b, free_index }
}

/// `ρ = Σ_{m=1}^{K} ((K+1−m)/(K+1+m)) b_m a_{m+K} − (2/K) a'_{K−1}` for `N = 2K+1`.
pub fn rho<C: CoeffFn>(canon: &CanonicalEquation<C>, b: &BSequence<C>) -> Option<C> {
    let big = canon.degree();
    if big % 2 == 0 {
        return None;
    }
    let k = (big - 1) / 2;
    let ki = k as i64;
    let mut acc = canon.coeff(k - 1).derivative().scale(&ratio(-2, ki));
    for m in 1..=k {
        let mi = m as i64;
        acc = acc.add(&b.get(m).mul(&canon.coeff(m + k)).scale(&ratio(ki + 1 - mi, ki + 1 + mi)));
    }
    Some(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckMode {
    /// Exact polynomial identities: verdicts are certificates.
    Exact,
    /// Series identities checked coefficientwise to `order` in float arithmetic.
    Series { order: usize },
}

#[derive(Clone, Debug)]
pub struct ResonanceReport<C> {
    pub n: usize,
    pub parity: Parity,
    pub mode: CheckMode,
    /// `a''_{N−2}`.
    pub condition_a_n2: C,
    pub a_n2_pass: bool,
    /// `ρ` (odd `N` only).
    pub condition_rho: Option<C>,
    pub rho_pass: Option<bool>,
    pub b: BSequence<C>,
}

impl<C: CoeffFn> ResonanceReport<C> {
    pub fn pass(&self) -> bool {
        self.a_n2_pass && self.rho_pass.unwrap_or(true)
    }

    /// The nonzero expressions behind a failure.
    pub fn witnesses(&self) -> Vec<(&'static str, &C)> {
        let mut w = Vec::new();
        if !self.a_n2_pass {
            w.push(("a''_{N-2}", &self.condition_a_n2));
        }
        if self.rho_pass == Some(false) {
            w.push(("rho", self.condition_rho.as_ref().unwrap()));
        }
        w
    }
}

fn gauge<C: CoeffFn>(canon: &CanonicalEquation<C>) -> f64 {
    canon.magnitude().max(canon.lead().magnitude()).max(1.0)
}

/// Even `N`: pass iff `a''_{N−2} ≡ 0`. Odd `N`: additionally `ρ ≡ 0`.
pub fn check_resonance<C: CoeffFn>(canon: &CanonicalEquation<C>) -> ResonanceReport<C> {
    let big = canon.degree();
    let scale = gauge(canon);
    let cond = canon.coeff(big - 2).derivative().derivative();
    let b = b_sequence(canon);
    let r = rho(canon, &b);
    let mode = if C::Scalar::is_exact() {
        CheckMode::Exact
    } else {
        let order = canon.lower()[0].coefficient_list().len().saturating_sub(1);
        CheckMode::Series { order }
    };
    ResonanceReport {
        n: big,
        parity: if big % 2 == 0 { Parity::Even } else { Parity::Odd },
        mode,
        a_n2_pass: cond.vanishes(scale),
        rho_pass: r.as_ref().map(|x| x.vanishes(scale)),
        condition_a_n2: cond,
        condition_rho: r,
        b,
    }
}

/// Closed-form second condition for `N ∈ {3, 5, 7}`:
/// `a_0'`, `[4a_1 − a_3²]'`, `[10a_2 − 9a_4a_5]'`.
pub fn closed_form_condition<C: CoeffFn>(canon: &CanonicalEquation<C>) -> Result<(C, bool)> {
    let a = |k| canon.coeff(k);
    let expr = match canon.degree() {
        3 => a(0).derivative(),
        5 => a(1).scale(&ratio(4, 1)).sub(&a(3).mul(&a(3))).derivative(),
        7 => a(2).scale(&ratio(10, 1)).sub(&a(4).mul(&a(5)).scale(&ratio(9, 1))).derivative(),
        n => return Err(Error::UnsupportedDegree(n)),
    };
    let pass = expr.vanishes(gauge(canon));
    Ok((expr, pass))
}

/// Series-mode verdict for a general equation: canonicalize at each sample
/// point and require every condition to hold to the truncation order.
pub fn check_resonance_series(
    eq: &EquationSpec,
    points: &[Complex64],
    order: usize,
) -> Result<Vec<ResonanceReport<TaylorSeries<Complex64>>>> {
    if points.len() < 3 {
        return Err(Error::Precondition("series-mode resonance needs at least 3 base points".into()));
    }
    // Two derivatives of the truncated coefficients are taken.
    let order = order.max(4);
    points
        .iter()
        .map(|&z0| {
            let (canon, _) = canonicalize(eq, z0, order)?;
            let canon = CanonicalEquation::from_lower(
                canon.degree(),
                canon.lower().iter().map(|s| s.truncate(order)).collect(),
            )?;
            Ok(check_resonance(&canon))
        })
        .collect()
}
