use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{run_pieces, ContinuationSettings, Piece, State};
use crate::equation::SecondOrderOde;
use crate::error::{Error, Result};

/// States on a circle around a singularity after each full loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    pub center: Complex64,
    pub radius: f64,
    /// State where the first loop begins.
    pub circle_start: State,
    /// State after loop `k + 1`.
    pub after_loop: Vec<State>,
    /// `max(|Δy|, |Δy'|) / scale` after each loop.
    pub deviations: Vec<f64>,
    /// `max(|y|, |y'|, 1)` at the circle start.
    pub scale: f64,
}

impl MonodromyResult {
    /// First loop count whose deviation is at most `tol`.
    pub fn closes_after(&self, tol: f64) -> Option<usize> {
        self.deviations.iter().position(|&d| d <= tol).map(|i| i + 1)
    }
}

fn collapsed(z: Complex64) -> Error {
    Error::LoopEncounter(z)
}

/// Moves radially from `anchor` onto the circle of `radius` about `center`
/// and runs `loops` counterclockwise turns, recording the state after each.
pub fn monodromy<O: SecondOrderOde + ?Sized>(
    ode: &O,
    anchor: State,
    center: Complex64,
    radius: f64,
    loops: usize,
    settings: &ContinuationSettings,
) -> Result<MonodromyResult> {
    settings.validate()?;
    if !(radius > 0.0 && radius.is_finite()) || loops == 0 {
        return Err(Error::InvalidPath("monodromy needs a positive radius and at least one loop".into()));
    }
    let offset = anchor.z - center;
    if offset.norm() == 0.0 {
        return Err(Error::InvalidPath("anchor coincides with the loop center".into()));
    }
    let dir = offset / offset.norm();
    let entry = center + dir * radius;
    let circumference = 2.0 * std::f64::consts::PI * radius;
    let min_step = settings.min_step(circumference);
    let mut samples = Vec::new();
    let mut cur = anchor;
    if (entry - anchor.z).norm() > 0.0 {
        let leg = [Piece::Line { a: anchor.z, b: entry }];
        let t = run_pieces(ode, cur, &leg, settings, min_step, &mut samples)?;
        if t.is_encounter() {
            return Err(collapsed(samples.last().map(|s| s.z).unwrap_or(anchor.z)));
        }
        let s = samples.last().expect("radial leg produced no step");
        cur = State::new(entry, s.y, s.yp);
    }
    let start = cur;
    let scale = start.y.norm().max(start.yp.norm()).max(1.0);
    let turn = [Piece::Arc { center, radius, theta0: dir.arg(), sweep: 2.0 * std::f64::consts::PI }];
    let mut after = Vec::with_capacity(loops);
    let mut deviations = Vec::with_capacity(loops);
    for _ in 0..loops {
        samples.clear();
        let t = run_pieces(ode, cur, &turn, settings, min_step, &mut samples)?;
        if t != super::Termination::Completed {
            return Err(collapsed(samples.last().map(|s| s.z).unwrap_or(cur.z)));
        }
        let s = samples.last().expect("loop produced no step");
        cur = State::new(entry, s.y, s.yp);
        deviations.push((cur.y - start.y).norm().max((cur.yp - start.yp).norm()) / scale);
        after.push(cur);
    }
    Ok(MonodromyResult { center, radius, circle_start: start, after_loop: after, deviations, scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::EquationSpec;

    #[test]
    fn simple_pole_is_single_valued() {
        let eq = EquationSpec::from_int_coeffs(3, &[&[], &[], &[], &[2]]).unwrap().to_complex();
        let z = Complex64::new(0.8, 0.0);
        let zeta = z - 1.0;
        let anchor = State::new(z, 1.0 / zeta, -1.0 / (zeta * zeta));
        let m = monodromy(&eq, anchor, Complex64::new(1.0, 0.0), 0.1, 2, &ContinuationSettings::default()).unwrap();
        assert!(m.deviations[0] <= 1e-6, "{:?}", m.deviations);
        assert_eq!(m.closes_after(1e-6), Some(1));
    }
}
