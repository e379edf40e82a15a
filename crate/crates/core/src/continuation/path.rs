use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed circular loop appended after the last waypoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub center: Complex64,
    pub radius: f64,
    /// Signed number of full turns; positive is counterclockwise.
    pub turns: f64,
}

/// Piecewise-linear path through `waypoints`, optionally followed by a radial
/// leg onto a circle and `turns` loops around it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    waypoints: Vec<Complex64>,
    #[serde(default)]
    loop_spec: Option<LoopSpec>,
}

/// One geometric piece of a path, parametrized by arclength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    Line { a: Complex64, b: Complex64 },
    Arc { center: Complex64, radius: f64, theta0: f64, sweep: f64 },
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Line { a, b } => (b - a).norm(),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point at arclength `s`.
    pub fn point(&self, s: f64) -> Complex64 {
        match *self {
            Piece::Line { a, b } => a + (b - a) * (s / (b - a).norm()),
            Piece::Arc { center, radius, theta0, sweep } => {
                center + Complex64::from_polar(radius, theta0 + sweep.signum() * s / radius)
            }
        }
    }

    /// Unit tangent `dz/ds` at arclength `s`.
    pub fn tangent(&self, s: f64) -> Complex64 {
        match *self {
            Piece::Line { a, b } => (b - a) / (b - a).norm(),
            Piece::Arc { theta0, sweep, radius, .. } => {
                Complex64::new(0.0, sweep.signum()) * Complex64::from_polar(1.0, theta0 + sweep.signum() * s / radius)
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        match *self {
            Piece::Line { b, .. } => b,
            _ => self.point(self.length()),
        }
    }
}

impl PathSpec {
    pub fn new(waypoints: Vec<Complex64>) -> Result<Self> {
        Self::with_loop(waypoints, None)
    }

    pub fn with_loop(waypoints: Vec<Complex64>, loop_spec: Option<LoopSpec>) -> Result<Self> {
        let p = PathSpec { waypoints, loop_spec };
        p.validate()?;
        Ok(p)
    }

    /// Straight segment.
    pub fn segment(a: Complex64, b: Complex64) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.len() < 2 {
            return Err(Error::InvalidPath("at least two waypoints are required".into()));
        }
        for (i, w) in self.waypoints.iter().enumerate() {
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::InvalidPath(format!("waypoint {i} is not finite")));
            }
        }
        for (i, pair) in self.waypoints.windows(2).enumerate() {
            if pair[0] == pair[1] {
                return Err(Error::InvalidPath(format!("waypoints {i} and {} coincide", i + 1)));
            }
        }
        if let Some(l) = &self.loop_spec {
            if !(l.radius > 0.0 && l.radius.is_finite()) || !l.turns.is_finite() || l.turns == 0.0 {
                return Err(Error::InvalidPath("loop needs a positive radius and nonzero turns".into()));
            }
            if !(l.center.re.is_finite() && l.center.im.is_finite()) || *self.waypoints.last().unwrap() == l.center {
                return Err(Error::InvalidPath("loop center must be finite and differ from the last waypoint".into()));
            }
        }
        Ok(())
    }

    pub fn waypoints(&self) -> &[Complex64] {
        &self.waypoints
    }

    pub fn loop_spec(&self) -> Option<&LoopSpec> {
        self.loop_spec.as_ref()
    }

    pub fn start(&self) -> Complex64 {
        self.waypoints[0]
    }

    pub fn pieces(&self) -> Vec<Piece> {
        let mut out: Vec<Piece> = self.waypoints.windows(2).map(|w| Piece::Line { a: w[0], b: w[1] }).collect();
        if let Some(l) = &self.loop_spec {
            let last = *self.waypoints.last().unwrap();
            let dir = (last - l.center) / (last - l.center).norm();
            let entry = l.center + dir * l.radius;
            if (entry - last).norm() > 0.0 {
                out.push(Piece::Line { a: last, b: entry });
            }
            out.push(Piece::Arc {
                center: l.center,
                radius: l.radius,
                theta0: dir.arg(),
                sweep: 2.0 * std::f64::consts::PI * l.turns,
            });
        }
        out
    }

    pub fn length(&self) -> f64 {
        self.pieces().iter().map(Piece::length).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn validation() {
        assert!(PathSpec::new(vec![c(0.0, 0.0)]).is_err());
        assert!(PathSpec::new(vec![c(0.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(PathSpec::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).is_ok());
        let bad = LoopSpec { center: c(1.0, 0.0), radius: -1.0, turns: 1.0 };
        assert!(PathSpec::with_loop(vec![c(0.0, 0.0), c(0.5, 0.0)], Some(bad)).is_err());
    }

    #[test]
    fn loop_geometry() {
        let l = LoopSpec { center: c(1.0, 0.0), radius: 0.1, turns: 2.0 };
        let p = PathSpec::with_loop(vec![c(0.0, 0.0), c(0.5, 0.0)], Some(l)).unwrap();
        let pieces = p.pieces();
        assert_eq!(pieces.len(), 3);
        assert!((pieces[1].end() - c(0.9, 0.0)).norm() < 1e-15);
        let arc = pieces[2];
        assert!((arc.end() - c(0.9, 0.0)).norm() < 1e-12);
        assert!((arc.length() - 0.4 * std::f64::consts::PI).abs() < 1e-12);
        // counterclockwise from angle π heads downward
        assert!((arc.tangent(0.0) - c(0.0, -1.0)).norm() < 1e-12);
    }
}
