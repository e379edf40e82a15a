use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrator::{drive, Control, DriveOptions, DriveStatus, Tolerances};
use super::{ContinuationSettings, Sample, Trajectory};
use crate::canonical::{canonicalize, CanonicalEquation, TransformRecord};
use crate::equation::{EquationSpec, SecondOrderOde};
use crate::error::{Error, Result};
use crate::expansion::{expand, BranchClass};
use crate::resonance::check_resonance;
use crate::series::{CoeffFn, Poly};
use crate::wfunc::{UvChart, WFunction};

/// Order of the local canonical form built at the chart handoff point.
const HANDOFF_ORDER: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    UvChart,
    ExponentFit,
    SeriesMatch,
}

/// Branch class of a located singularity, or a coarse label for equations
/// outside the class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassTag {
    Even,
    Odd { eps: i8 },
    Pole,
    Other,
}

impl From<BranchClass> for ClassTag {
    fn from(b: BranchClass) -> Self {
        match b {
            BranchClass::Even => ClassTag::Even,
            BranchClass::Odd { eps } => ClassTag::Odd { eps },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub z_star: Complex64,
    pub exponent_estimate: f64,
    pub branch_class: ClassTag,
    /// `κ = v(0)` for the chart method, `β` for series matching.
    pub beta_or_kappa: Option<Complex64>,
    pub method: Method,
    /// Chart method: distance to the exponent-fit location. Fit methods:
    /// RMS residual of the fit. NaN (`null`) when unavailable.
    #[serde(with = "super::nan_as_null")]
    pub residual: f64,
    /// Set when the chart could not be used and the fit was taken instead.
    pub fallback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Result of [`fit_exponent`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentFit {
    pub exponent: f64,
    pub z_star: Complex64,
    /// RMS residual of `log|y|`.
    pub residual: f64,
    pub samples_used: usize,
}

/// Pole distance and exponent implied by one state: with `w = y'/y`,
/// `ζ = −w/w'` and `p = ζw`. Returns `(z − ζ, p)`.
pub fn local_power<O: SecondOrderOde + ?Sized>(ode: &O, z: Complex64, y: Complex64, yp: Complex64) -> (Complex64, Complex64) {
    let w = yp / y;
    let ypp = ode.accel(z, y, yp);
    let dw = ypp / y - w * w;
    let zeta = -w / dw;
    (z - zeta, zeta * w)
}

/// Indices of the monotone tail used for fits: walks back from the end while
/// `|y|` keeps decreasing, stopping below `√|y_last|` once ten samples are in.
fn monotone_tail(samples: &[Sample]) -> &[Sample] {
    if samples.is_empty() {
        return samples;
    }
    let last = samples[samples.len() - 1].y.norm();
    let floor = last.sqrt();
    let mut i = samples.len() - 1;
    while i > 0 {
        let prev = samples[i - 1].y.norm();
        if prev >= samples[i].y.norm() {
            break;
        }
        if prev < floor && samples.len() - i >= 10 {
            break;
        }
        i -= 1;
    }
    &samples[i..]
}

/// Solves the 2×2 complex least-squares problem `t ≈ α x + β`.
fn complex_line_fit(x: &[Complex64], t: &[Complex64]) -> Option<(Complex64, Complex64)> {
    let n = x.len() as f64;
    let sx: Complex64 = x.iter().sum();
    let st: Complex64 = t.iter().sum();
    let sxx: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    let sxt: Complex64 = x.iter().zip(t).map(|(a, b)| a.conj() * b).sum();
    // [sxx  sx̄; sx  n] [α; β] = [sxt; st]
    let det = sxx * n - sx.norm_sqr();
    if det.abs() <= 1e-300 {
        return None;
    }
    let alpha = (sxt * n - sx.conj() * st) / det;
    let beta = (st * sxx - sx * sxt) / det;
    Some((alpha, beta))
}

fn log_fit(samples: &[Sample], z_star: Complex64) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for s in samples {
        let x = (s.z - z_star).norm().ln();
        let y = s.y.norm().ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let p = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let l = (sy - p * sx) / n;
    let ssr = samples
        .iter()
        .map(|s| (s.y.norm().ln() - l - p * (s.z - z_star).norm().ln()).powi(2))
        .sum::<f64>();
    (p, l, ssr)
}

/// Fits `|y| ≈ |c₀|·|z − z*|^p` to the monotone tail of `samples`.
/// The starting point comes from the line `y/y' ≈ (z − z*)/p` (or `z_guess`);
/// `p` and `z*` are then refined alternately.
pub fn fit_exponent(samples: &[Sample], z_guess: Option<Complex64>) -> Result<ExponentFit> {
    let tail = monotone_tail(samples);
    if tail.len() < 10 {
        return Err(Error::FitFailed(format!("non-monotone tail: only {} samples with growing |y|", tail.len())));
    }
    let xs: Vec<Complex64> = tail.iter().map(|s| s.z).collect();
    let ts: Vec<Complex64> = tail.iter().map(|s| s.y / s.yp).collect();
    let (alpha, beta) = complex_line_fit(&xs, &ts).ok_or_else(|| Error::FitFailed("degenerate sample geometry".into()))?;
    if alpha.norm() == 0.0 {
        return Err(Error::FitFailed("no power-law growth in the tail".into()));
    }
    let mut z_star = z_guess.unwrap_or(-beta / alpha);
    if tail.iter().any(|s| s.z == z_star) {
        return Err(Error::FitFailed("singularity estimate coincides with a sample".into()));
    }
    let (mut p, mut l, mut ssr) = log_fit(tail, z_star);
    for _ in 0..100 {
        // Gauss–Newton on z* with p, log|c₀| frozen.
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for s in tail {
            let zeta = s.z - z_star;
            let d2 = zeta.norm_sqr();
            let r = s.y.norm().ln() - l - p * zeta.norm().ln();
            let j1 = p * zeta.re / d2;
            let j2 = p * zeta.im / d2;
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            g1 += j1 * r;
            g2 += j2 * r;
        }
        let lambda = 1e-6 * (a11 + a22);
        let (a11, a22) = (a11 + lambda, a22 + lambda);
        let det = a11 * a22 - a12 * a12;
        if det <= 0.0 || !det.is_finite() {
            break;
        }
        let step = Complex64::new(-(a22 * g1 - a12 * g2) / det, -(a11 * g2 - a12 * g1) / det);
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = z_star + step * scale;
            if tail.iter().all(|s| s.z != cand) {
                let (pc, lc, sc) = log_fit(tail, cand);
                if sc < ssr {
                    let moved = (cand - z_star).norm();
                    z_star = cand;
                    p = pc;
                    l = lc;
                    ssr = sc;
                    improved = moved > 1e-15 * (1.0 + z_star.norm());
                    break;
                }
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if !p.is_finite() {
        return Err(Error::FitFailed("exponent is not finite".into()));
    }
    Ok(ExponentFit { exponent: p, z_star, residual: (ssr / tail.len() as f64).sqrt(), samples_used: tail.len() })
}

/// Integrates the chart system from the handoff state to `u = 0`.
fn chart_run<C: CoeffFn>(
    w: &WFunction<C>,
    z: Complex64,
    y: Complex64,
    yp: Complex64,
    settings: &ContinuationSettings,
) -> Result<(UvChart, Complex64, Complex64)> {
    let n = w.degree();
    let (chart, st) = UvChart::new(n, 1).from_state(w, z, y, yp, settings.chart_handoff_radius)?;
    let u0 = st.u;
    let base = settings.tolerances();
    let mut f = |s: f64, x: &[Complex64; 2]| {
        let u = u0 * (1.0 - s);
        let (dz, dv) = chart.rhs(w, x[0], u, x[1])?;
        Ok([-u0 * dz, -u0 * dv])
    };
    let opts = DriveOptions {
        tol: Tolerances { rel: base.rel * 1e-2, abs: base.abs * 1e-3 },
        min_step: 1e-13,
        max_steps: settings.max_steps,
        h0: None,
    };
    let res = drive(&mut f, 0.0, 1.0, [st.z, st.v], &opts, |_, _, _, _| Control::Continue)?;
    match res.status {
        DriveStatus::Completed => Ok((chart, res.y[0], res.y[1])),
        s => Err(Error::LocateFailed(format!("chart integration ended with {s:?}"))),
    }
}

/// W-function at a handoff state, with the local transform when one was needed.
enum LocalModel {
    Exact(WFunction<Poly<crate::scalar::ExactScalar>>),
    Local(WFunction<crate::series::TaylorSeries<Complex64>>, TransformRecord),
}

fn local_model(eq: &EquationSpec, z: Complex64) -> Result<(LocalModel, bool)> {
    if eq.is_canonical() {
        let canon = CanonicalEquation::from_spec(eq)?;
        let pass = check_resonance(&canon).pass();
        Ok((LocalModel::Exact(WFunction::new(canon)), pass))
    } else {
        let (canon, rec) = canonicalize(eq, z, HANDOFF_ORDER)?;
        let pass = check_resonance(&canon).pass();
        Ok((LocalModel::Local(WFunction::new(canon), rec), pass))
    }
}

fn chart_locate(eq: &EquationSpec, h: &Sample, settings: &ContinuationSettings) -> Result<(Complex64, Complex64, ClassTag)> {
    let (model, pass) = local_model(eq, h.z)?;
    if !pass {
        return Err(Error::Precondition("resonance conditions fail; the chart does not apply".into()));
    }
    let (chart, zt, kappa) = match &model {
        LocalModel::Exact(w) => chart_run(w, h.z, h.y, h.yp, settings)?,
        LocalModel::Local(w, rec) => {
            let (zt, yt, ytp) = rec.pushforward_state(h.z, h.y, h.yp)?;
            chart_run(w, zt, yt, ytp, settings)?
        }
    };
    let z_star = match &model {
        LocalModel::Exact(_) => zt,
        LocalModel::Local(_, rec) => rec.z0 + rec.ztilde_inverse.eval_complex(zt),
    };
    let class = if chart.is_even() { ClassTag::Even } else { ClassTag::Odd { eps: chart.eps } };
    Ok((z_star, kappa, class))
}

/// Locates the singularity that ended `traj`. The first sample with
/// `|y| ≥ chart_handoff_radius` is mapped into the regularizing chart and the
/// chart system is integrated to `u = 0`; an exponent fit on the tail
/// validates the result and replaces it when the chart is unusable.
pub fn locate(eq: &EquationSpec, traj: &Trajectory, settings: &ContinuationSettings) -> Result<SingularityReport> {
    settings.validate()?;
    if !traj.termination.is_encounter() {
        return Err(Error::LocateFailed(format!("trajectory ended with {:?}, not at a singularity", traj.termination)));
    }
    let fit = fit_exponent(&traj.samples, None);
    let handoff = traj.samples.iter().find(|s| s.y.norm() >= settings.chart_handoff_radius);
    let chart = match handoff {
        Some(h) => chart_locate(eq, h, settings),
        None => Err(Error::BranchAmbiguity(traj.samples.iter().map(|s| s.y.norm()).fold(0.0, f64::max))),
    };
    match (chart, fit) {
        (Ok((z_star, kappa, class)), fit) => {
            let refit = fit_exponent(&traj.samples, Some(z_star)).or(fit);
            let (exponent, residual, note) = match refit {
                Ok(f) => (f.exponent, (f.z_star - z_star).norm(), None),
                Err(e) => (-2.0 / (eq.degree() as f64 - 1.0), f64::NAN, Some(format!("exponent fit unavailable: {e}"))),
            };
            Ok(SingularityReport {
                z_star,
                exponent_estimate: exponent,
                branch_class: class,
                beta_or_kappa: Some(kappa),
                method: Method::UvChart,
                residual,
                fallback: false,
                note,
            })
        }
        (Err(chart_err), Ok(f)) => Ok(SingularityReport {
            z_star: f.z_star,
            exponent_estimate: f.exponent,
            branch_class: ClassTag::Other,
            beta_or_kappa: None,
            method: Method::ExponentFit,
            residual: f.residual,
            fallback: true,
            note: Some(format!("chart unavailable: {chart_err}")),
        }),
        (Err(chart_err), Err(fit_err)) => Err(Error::LocateFailed(format!("chart: {chart_err}; fit: {fit_err}"))),
    }
}

/// Options for [`series_match`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesMatchOptions {
    /// Samples with `|z − z*|` in `[inner·radius, radius]` enter the fit.
    pub radius: f64,
    pub inner: f64,
    /// Expansion order; `None` picks `16(N−1)`.
    pub order: Option<usize>,
    /// Largest acceptable RMS relative residual.
    pub threshold: f64,
}

impl Default for SeriesMatchOptions {
    fn default() -> Self {
        SeriesMatchOptions { radius: 0.5, inner: 0.05, order: None, threshold: 1e-4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesMatch {
    pub beta: Complex64,
    /// RMS relative residual of `y`.
    pub residual: f64,
    pub samples_used: usize,
}

fn to_complex_canon(eq: &EquationSpec) -> Result<CanonicalEquation<Poly<Complex64>>> {
    let canon = CanonicalEquation::from_spec(eq)?;
    CanonicalEquation::from_lower(eq.degree(), canon.lower().iter().map(|p| p.to_complex()).collect())
}

fn match_in<C: CoeffFn<Scalar = Complex64>>(
    canon: &CanonicalEquation<C>,
    z0: Complex64,
    branch: BranchClass,
    points: &[(Complex64, Complex64)],
    order: usize,
    threshold: f64,
) -> Result<SeriesMatch> {
    let model = |beta: Complex64| -> Result<Vec<Vec<Complex64>>> {
        let e = expand(canon, &z0, branch, beta, order)?;
        let sheets = e.series.ramification() as i64;
        points
            .iter()
            .map(|(z, _)| (0..sheets).map(|k| e.series.eval(*z, k)).collect::<Result<Vec<_>>>())
            .collect()
    };
    let base = model(Complex64::new(0.0, 0.0))?;
    // Sheet per sample from the leading behaviour.
    let sheet: Vec<usize> = base
        .iter()
        .zip(points)
        .map(|(vals, (_, y))| {
            (0..vals.len())
                .min_by(|&a, &b| (vals[a] - y).norm().total_cmp(&(vals[b] - y).norm()))
                .unwrap()
        })
        .collect();
    let eval = |beta: Complex64| -> Result<Vec<Complex64>> {
        let all = model(beta)?;
        Ok(all.iter().zip(&sheet).map(|(v, &k)| v[k]).collect())
    };
    let weighted = |vals: &[Complex64]| -> Vec<Complex64> {
        vals.iter().zip(points).map(|(m, (_, y))| (y - m) / y.norm()).collect()
    };
    let mut beta = Complex64::new(0.0, 0.0);
    let mut r = weighted(&eval(beta)?);
    for _ in 0..8 {
        let delta = 1e-3 * (1.0 + beta.norm());
        let r2 = weighted(&eval(beta + delta)?);
        // r(β+δ) − r(β) = −J δ
        let jac: Vec<Complex64> = r.iter().zip(&r2).map(|(a, b)| (a - b) / delta).collect();
        let den: f64 = jac.iter().map(|j| j.norm_sqr()).sum();
        if den == 0.0 {
            break;
        }
        let num: Complex64 = jac.iter().zip(&r).map(|(j, ri)| j.conj() * ri).sum();
        let step = num / den;
        beta += step;
        r = weighted(&eval(beta)?);
        if step.norm() <= 1e-13 * (1.0 + beta.norm()) {
            break;
        }
    }
    let residual = (r.iter().map(|x| x.norm_sqr()).sum::<f64>() / r.len() as f64).sqrt();
    if !(residual <= threshold) {
        return Err(Error::NoBranchFits(residual));
    }
    Ok(SeriesMatch { beta, residual, samples_used: points.len() })
}

/// Least-squares `β` so that the truncated expansion of `branch` about
/// `z_star` matches the trajectory samples near `z_star`.
pub fn series_match(
    eq: &EquationSpec,
    z_star: Complex64,
    branch: BranchClass,
    traj: &Trajectory,
    opts: &SeriesMatchOptions,
) -> Result<SeriesMatch> {
    let n = eq.degree();
    let order = opts.order.unwrap_or(16 * (n - 1)).max(2 * n + 2);
    let near: Vec<&Sample> = traj
        .samples
        .iter()
        .filter(|s| {
            let d = (s.z - z_star).norm();
            d <= opts.radius && d >= opts.inner * opts.radius
        })
        .collect();
    if near.len() < 5 {
        return Err(Error::Precondition(format!("only {} samples lie in the matching annulus", near.len())));
    }
    if eq.is_canonical() {
        let canon = to_complex_canon(eq)?;
        if !check_resonance(&CanonicalEquation::from_spec(eq)?).pass() {
            return Err(Error::Precondition("resonance conditions fail".into()));
        }
        let pts: Vec<_> = near.iter().map(|s| (s.z, s.y)).collect();
        match_in(&canon, z_star, branch, &pts, order, opts.threshold)
    } else {
        let (canon, rec) = canonicalize(eq, z_star, order)?;
        if !check_resonance(&canon).pass() {
            return Err(Error::Precondition("resonance conditions fail".into()));
        }
        let pts: Vec<_> = near
            .iter()
            .filter_map(|s| rec.pushforward_state(s.z, s.y, s.yp).ok().map(|(zt, yt, _)| (zt, yt)))
            .collect();
        if pts.len() < 5 {
            return Err(Error::Precondition("too few samples inside the canonical chart".into()));
        }
        match_in(&canon, Complex64::new(0.0, 0.0), branch, &pts, order, opts.threshold)
    }
}
