//! Dormand–Prince 5(4) with FSAL over complex state vectors and a real
//! independent variable.

use num_complex::Complex64;

use crate::error::Result;

pub type Vector<const D: usize> = [Complex64; D];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

fn combo<const D: usize>(y: &Vector<D>, h: f64, terms: &[(f64, &Vector<D>)]) -> Vector<D> {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

fn finite<const D: usize>(v: &Vector<D>) -> bool {
    v.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}

/// Outcome of a single trial step.
pub struct Trial<const D: usize> {
    pub y: Vector<D>,
    /// Derivative at the new point (first stage of the next step).
    pub k_new: Vector<D>,
    /// Scaled RMS error; the step is acceptable when ≤ 1.
    pub err: f64,
}

/// One Dormand–Prince step from `(t, y)` with derivative `k1`.
pub fn step<const D: usize, F>(f: &mut F, t: f64, y: &Vector<D>, k1: &Vector<D>, h: f64, tol: Tolerances) -> Result<Option<Trial<D>>>
where
    F: FnMut(f64, &Vector<D>) -> Result<Vector<D>>,
{
    let k2 = f(t + C2 * h, &combo(y, h, &[(A21, k1)]))?;
    let k3 = f(t + C3 * h, &combo(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(t + C4 * h, &combo(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(t + C5 * h, &combo(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(t + h, &combo(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y_new = combo(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    if !finite(&y_new) {
        return Ok(None);
    }
    let k7 = f(t + h, &y_new)?;
    if !finite(&k7) {
        return Ok(None);
    }
    let mut acc = 0.0;
    for i in 0..D {
        let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        let sc = tol.abs + tol.rel * y[i].norm().max(y_new[i].norm());
        acc += (e.norm() / sc).powi(2);
    }
    let err = (acc / D as f64).sqrt();
    if !err.is_finite() {
        return Ok(None);
    }
    Ok(Some(Trial { y: y_new, k_new: k7, err }))
}

/// How the adaptive drive ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriveStatus {
    Completed,
    /// The acceptance callback asked to stop.
    Stopped,
    StepCollapse,
    MaxSteps,
}

pub enum Control {
    Continue,
    Stop,
}

pub struct DriveResult<const D: usize> {
    pub t: f64,
    pub y: Vector<D>,
    pub status: DriveStatus,
    pub steps: usize,
    /// Last proposed step size.
    pub h: f64,
}

pub struct DriveOptions {
    pub tol: Tolerances,
    pub min_step: f64,
    pub max_steps: usize,
    /// Initial step; estimated when `None`.
    pub h0: Option<f64>,
}

/// Integrates from `t0` to `t1 > t0`, calling `on_accept(t, y, h, err)` after
/// every accepted step.
pub fn drive<const D: usize, F, G>(
    f: &mut F,
    t0: f64,
    t1: f64,
    y0: Vector<D>,
    opts: &DriveOptions,
    mut on_accept: G,
) -> Result<DriveResult<D>>
where
    F: FnMut(f64, &Vector<D>) -> Result<Vector<D>>,
    G: FnMut(f64, &Vector<D>, f64, f64) -> Control,
{
    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k = f(t, &y)?;
    let mut h = opts.h0.unwrap_or_else(|| initial_step(&y, &k, span, opts.tol)).min(span);
    let mut steps = 0;
    loop {
        if t >= t1 {
            return Ok(DriveResult { t, y, status: DriveStatus::Completed, steps, h });
        }
        if steps >= opts.max_steps {
            return Ok(DriveResult { t, y, status: DriveStatus::MaxSteps, steps, h });
        }
        let last = t + h >= t1 - 1e-15 * span.abs().max(1.0);
        let h_try = if last { t1 - t } else { h };
        if h_try < opts.min_step && !last {
            return Ok(DriveResult { t, y, status: DriveStatus::StepCollapse, steps, h });
        }
        match step(f, t, &y, &k, h_try, opts.tol)? {
            Some(trial) if trial.err <= 1.0 => {
                t = if last { t1 } else { t + h_try };
                y = trial.y;
                k = trial.k_new;
                steps += 1;
                let fac = if trial.err == 0.0 { 5.0 } else { (0.9 * trial.err.powf(-0.2)).clamp(0.2, 5.0) };
                h = h_try * fac;
                if let Control::Stop = on_accept(t, &y, h_try, trial.err) {
                    return Ok(DriveResult { t, y, status: DriveStatus::Stopped, steps, h });
                }
            }
            Some(trial) => {
                h = h_try * (0.9 * trial.err.powf(-0.2)).clamp(0.1, 0.9);
            }
            None => {
                h = h_try * 0.25;
            }
        }
        if h < opts.min_step && t < t1 {
            return Ok(DriveResult { t, y, status: DriveStatus::StepCollapse, steps, h });
        }
    }
}

fn initial_step<const D: usize>(y: &Vector<D>, k: &Vector<D>, span: f64, tol: Tolerances) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..D {
        let sc = tol.abs + tol.rel * y[i].norm();
        d0 += (y[i].norm() / sc).powi(2);
        d1 += (k[i].norm() / sc).powi(2);
    }
    let d0 = (d0 / D as f64).sqrt();
    let d1 = (d1 / D as f64).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span * 0.1).max(span * 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_along_complex_direction() {
        // y' = i y, y(0) = 1 → y(t) = exp(i t)
        let mut f = |_t: f64, y: &Vector<1>| Ok([y[0] * Complex64::new(0.0, 1.0)]);
        let opts = DriveOptions { tol: Tolerances { rel: 1e-10, abs: 1e-12 }, min_step: 1e-12, max_steps: 10_000, h0: None };
        let r = drive(&mut f, 0.0, 3.0, [Complex64::new(1.0, 0.0)], &opts, |_, _, _, _| Control::Continue).unwrap();
        assert_eq!(r.status, DriveStatus::Completed);
        assert!((r.y[0] - Complex64::from_polar(1.0, 3.0)).norm() < 1e-8);
    }

    #[test]
    fn stop_callback_is_honored() {
        let mut f = |_t: f64, _y: &Vector<1>| Ok([Complex64::new(1.0, 0.0)]);
        let opts = DriveOptions { tol: Tolerances { rel: 1e-9, abs: 1e-9 }, min_step: 1e-12, max_steps: 10_000, h0: Some(0.1) };
        let r = drive(&mut f, 0.0, 10.0, [Complex64::new(0.0, 0.0)], &opts, |t, _, _, _| {
            if t > 1.0 {
                Control::Stop
            } else {
                Control::Continue
            }
        })
        .unwrap();
        assert_eq!(r.status, DriveStatus::Stopped);
        assert!(r.t > 1.0 && r.t < 10.0);
    }
}
