//! Pole-field exploration: follows a path, vaults around singularities that
//! sit on it and probes local maxima of `|y|` for singularities close to it.
//!
//! Near a singularity `y ≈ c(z − z*)^p`, so one state gives the estimate
//! `z* ≈ z + w/w'` with `w = y'/y` (see [`local_power`]). A probe walks
//! straight to that estimate, re-estimates, and repeats until `|y|` exceeds
//! the blow-up threshold. The vault is a heuristic: a rectangular detour of
//! width `probe_offset × piece length` on the side away from the singularity,
//! with the other side tried when the first one meets a singularity too.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::locate::{fit_exponent, local_power};
use super::{run_pieces, ContinuationSettings, PathSpec, Piece, Sample, State, Termination, Trajectory};
use crate::equation::SecondOrderOde;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExploreSettings {
    /// Smallest `|y|` at a local maximum that triggers a probe.
    pub peak_min: f64,
    pub max_probe_rounds: usize,
    /// Probes whose first target lies farther than this are abandoned.
    pub max_reach: f64,
    /// Detections closer than this are merged.
    pub dedup_tol: f64,
    pub max_vaults: usize,
}

impl Default for ExploreSettings {
    fn default() -> Self {
        ExploreSettings { peak_min: 4.0, max_probe_rounds: 40, max_reach: 1.0, dedup_tol: 1e-8, max_vaults: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub z_star: Complex64,
    /// Exponent from a log-modulus fit of the approach.
    pub exponent: f64,
    /// Exponent implied by the last state alone.
    pub local_exponent: Complex64,
    /// Whether the path itself ran into the singularity.
    pub on_path: bool,
    #[serde(with = "super::nan_as_null")]
    pub fit_residual: f64,
    /// Samples approaching the singularity.
    pub tail: Vec<Sample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Exploration {
    pub trajectory: Trajectory,
    pub detections: Vec<Detection>,
}

fn detection<O: SecondOrderOde + ?Sized>(ode: &O, tail: Vec<Sample>, on_path: bool) -> Result<Detection> {
    let last = *tail.last().ok_or_else(|| Error::LocateFailed("empty approach".into()))?;
    let (z_local, p_local) = local_power(ode, last.z, last.y, last.yp);
    let fit = fit_exponent(&tail, Some(z_local));
    let (exponent, fit_residual) = match fit {
        Ok(f) => (f.exponent, f.residual),
        Err(_) => (p_local.re, f64::NAN),
    };
    Ok(Detection { z_star: z_local, exponent, local_exponent: p_local, on_path, fit_residual, tail })
}

fn probe_min_step(len: f64, z: Complex64) -> f64 {
    (1e-13 * len).max(4.0 * f64::EPSILON * (1.0 + z.norm()))
}

/// Walks from `start` toward successive local estimates of the nearest
/// singularity until the solution blows up.
pub fn probe<O: SecondOrderOde + ?Sized>(
    ode: &O,
    start: State,
    settings: &ContinuationSettings,
    ex: &ExploreSettings,
) -> Result<Option<Detection>> {
    let mut cur = start;
    let mut approach: Vec<Sample> = Vec::new();
    for round in 0..ex.max_probe_rounds {
        let (target, _) = local_power(ode, cur.z, cur.y, cur.yp);
        let d = target - cur.z;
        if !(d.re.is_finite() && d.im.is_finite()) || d.norm() <= 4.0 * f64::EPSILON * (1.0 + cur.z.norm()) {
            break;
        }
        if round == 0 && d.norm() > ex.max_reach {
            return Ok(None);
        }
        let leg = [Piece::Line { a: cur.z, b: target }];
        let from = approach.len();
        let t = run_pieces(ode, cur, &leg, settings, probe_min_step(d.norm(), cur.z), &mut approach)?;
        match t {
            Termination::Completed => {
                if approach.len() == from {
                    break;
                }
                cur = approach.last().unwrap().state();
            }
            Termination::MaxSteps => break,
            _ => return detection(ode, approach, false).map(Some),
        }
    }
    Ok(None)
}

fn is_new(found: &[Detection], z: Complex64, tol: f64) -> bool {
    found.iter().all(|d| (d.z_star - z).norm() > tol * (1.0 + z.norm()))
}

/// Follows `path` from `state0`, vaulting around singularities on straight
/// pieces, then probes every local maximum of `|y|` above `peak_min`.
pub fn explore<O: SecondOrderOde + ?Sized>(
    ode: &O,
    state0: State,
    path: &PathSpec,
    settings: &ContinuationSettings,
    ex: &ExploreSettings,
) -> Result<Exploration> {
    path.validate()?;
    let min_step = settings.validate_for(path.length())?;
    if (state0.z - path.start()).norm() > 1e-12 * (1.0 + state0.z.norm()) {
        return Err(Error::InvalidPath("path must start at the initial state".into()));
    }
    let mut queue: VecDeque<Piece> = path.pieces().into();
    let mut samples: Vec<Sample> = Vec::new();
    let mut detections: Vec<Detection> = Vec::new();
    let mut cur = state0;
    let mut termination = Termination::Completed;
    let mut vaults = 0;
    while let Some(piece) = queue.pop_front() {
        let from = samples.len();
        let t = run_pieces(ode, cur, &[piece], settings, min_step, &mut samples)?;
        match t {
            Termination::Completed => {
                if let Some(s) = samples.last() {
                    cur = s.state();
                }
                continue;
            }
            Termination::MaxSteps => {
                termination = t;
                break;
            }
            _ => {}
        }
        let tail: Vec<Sample> = samples[from..].to_vec();
        let det = detection(ode, tail, true)?;
        let z_star = det.z_star;
        let Piece::Line { a, b } = piece else {
            detections.push(det);
            termination = t;
            break;
        };
        if vaults >= ex.max_vaults {
            detections.push(det);
            termination = t;
            break;
        }
        vaults += 1;
        let len = (b - a).norm();
        let dir = (b - a) / len;
        let rel = (z_star - a) * dir.conj();
        let gap = (samples.last().unwrap().z - z_star).norm();
        let rho = (settings.probe_offset * len).max(4.0 * gap);
        // Back up to the last sample at least `rho` from the singularity.
        let keep = (from..samples.len())
            .rev()
            .find(|&i| (samples[i].z - z_star).norm() >= rho)
            .map(|i| i + 1)
            .unwrap_or(from);
        samples.truncate(keep);
        let back = if keep > from { samples[keep - 1].state() } else { cur };
        let s_exit = rel.re + rho;
        let z_exit = if s_exit < len { a + dir * s_exit } else { b };
        let away = if rel.im > 0.0 { -1.0 } else { 1.0 };
        let mut passed = false;
        for side in [away, -away] {
            let off = Complex64::new(0.0, side) * dir * rho;
            let detour = [
                Piece::Line { a: back.z, b: back.z + off },
                Piece::Line { a: back.z + off, b: z_exit + off },
                Piece::Line { a: z_exit + off, b: z_exit },
            ];
            let mut trial = Vec::new();
            let td = run_pieces(ode, back, &detour, settings, min_step, &mut trial)?;
            if td == Termination::Completed {
                cur = trial.last().map(|s| s.state()).unwrap_or(back);
                samples.extend(trial);
                passed = true;
                break;
            }
        }
        detections.push(det);
        if !passed {
            termination = t;
            break;
        }
        if z_exit != b {
            queue.push_front(Piece::Line { a: z_exit, b });
        }
    }

    for i in 1..samples.len().saturating_sub(1) {
        let m = samples[i].y.norm();
        if m < ex.peak_min || m < samples[i - 1].y.norm() || m < samples[i + 1].y.norm() {
            continue;
        }
        if let Some(d) = probe(ode, samples[i].state(), settings, ex)? {
            if is_new(&detections, d.z_star, ex.dedup_tol) {
                detections.push(d);
            }
        }
    }
    Ok(Exploration { trajectory: Trajectory { start: state0, samples, termination }, detections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::EquationSpec;

    #[test]
    fn probe_finds_offset_pole() {
        // y = 1/(z − z*) with z* just off the real axis
        let eq = EquationSpec::from_int_coeffs(3, &[&[], &[], &[], &[2]]).unwrap().to_complex();
        let zs = Complex64::new(1.0, 0.05);
        let z0 = Complex64::new(0.0, 0.0);
        let s0 = State::new(z0, 1.0 / (z0 - zs), -1.0 / ((z0 - zs) * (z0 - zs)));
        let path = PathSpec::segment(z0, Complex64::new(2.0, 0.0)).unwrap();
        let ex = explore(&eq, s0, &path, &ContinuationSettings::default(), &ExploreSettings::default()).unwrap();
        assert_eq!(ex.trajectory.termination, Termination::Completed);
        assert_eq!(ex.detections.len(), 1);
        assert!((ex.detections[0].z_star - zs).norm() < 1e-8);
        assert!((ex.detections[0].exponent + 1.0).abs() < 1e-3);
    }

    #[test]
    fn vault_passes_pole_on_path() {
        let eq = EquationSpec::from_int_coeffs(3, &[&[], &[], &[], &[2]]).unwrap().to_complex();
        let z0 = Complex64::new(0.0, 0.0);
        let s0 = State::new(z0, Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0));
        let path = PathSpec::segment(z0, Complex64::new(2.0, 0.0)).unwrap();
        let ex = explore(&eq, s0, &path, &ContinuationSettings::default(), &ExploreSettings::default()).unwrap();
        assert_eq!(ex.trajectory.termination, Termination::Completed);
        assert!(ex.detections[0].on_path);
        assert!((ex.detections[0].z_star - 1.0).norm() < 1e-8);
        let end = ex.trajectory.last_state();
        assert!((end.z - 2.0).norm() < 1e-12);
        assert!((end.y - 1.0).norm() < 1e-6);
    }
}
