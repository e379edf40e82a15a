//! Numerical continuation of solutions along complex paths, singularity
//! location through the regularizing chart, exponent fits, series matching,
//! monodromy loops and pole-field exploration.

pub mod demos;
pub mod explore;
pub mod integrator;
pub mod locate;
pub mod monodromy;
pub mod path;
pub mod scan;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equation::{EquationSpec, SecondOrderOde};
use crate::error::{Error, Result};
use integrator::{drive, Control, DriveOptions, DriveStatus, Tolerances};

pub use demos::{run_demo, DemoEquation, DemoRun, DemoSingularity, SmithEquation, WarningEquation};
pub use explore::{explore, probe, Detection, Exploration, ExploreSettings};
pub use locate::{fit_exponent, local_power, locate, series_match, ClassTag, ExponentFit, Method, SeriesMatch, SeriesMatchOptions, SingularityReport};
pub use monodromy::{monodromy, MonodromyResult};
pub use path::{LoopSpec, PathSpec, Piece};
pub use scan::{scan, scan_serial, ScanEntry};

/// Numerical knobs shared by all continuation operations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `|y|` above which a step counts as a singularity encounter. Once `|y|`
    /// passes `chart_handoff_radius`, an estimated distance to the singularity
    /// below `1e3 × min_step` also counts.
    pub blowup_threshold: f64,
    /// Smallest admissible step; `None` means `1e-13 ×` path length.
    pub min_step: Option<f64>,
    pub max_steps: usize,
    /// `|y|` at which `locate` switches to the regularizing chart.
    pub chart_handoff_radius: f64,
    /// Perpendicular offset, relative to the distance travelled, used to
    /// probe around an encounter.
    pub probe_offset: f64,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        ContinuationSettings {
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            blowup_threshold: 1e6,
            min_step: None,
            max_steps: 200_000,
            chart_handoff_radius: 1e3,
            probe_offset: 0.05,
        }
    }
}

impl ContinuationSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let checks = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("blowup_threshold", self.blowup_threshold),
            ("chart_handoff_radius", self.chart_handoff_radius),
            ("probe_offset", self.probe_offset),
        ];
        for (name, v) in checks {
            if !positive(v) {
                return Err(Error::InvalidSettings(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if let Some(m) = self.min_step {
            if !positive(m) {
                return Err(Error::InvalidSettings(format!("min_step must be positive, got {m}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidSettings("max_steps must be positive".into()));
        }
        if self.chart_handoff_radius >= self.blowup_threshold {
            return Err(Error::InvalidSettings("chart_handoff_radius must be below blowup_threshold".into()));
        }
        Ok(())
    }

    /// Validates against a concrete path length.
    pub fn validate_for(&self, length: f64) -> Result<f64> {
        self.validate()?;
        let m = self.min_step(length);
        if m >= length {
            return Err(Error::InvalidSettings(format!("min_step {m:e} is not below the path length {length:e}")));
        }
        Ok(m)
    }

    pub fn min_step(&self, length: f64) -> f64 {
        self.min_step.unwrap_or(1e-13 * length)
    }

    pub(crate) fn tolerances(&self) -> Tolerances {
        let cal = |t: f64| t * (t / CALIBRATION_PIVOT).powf(CALIBRATION_EXPONENT);
        Tolerances { rel: cal(self.rel_tol), abs: cal(self.abs_tol) }
    }
}

/// Serde adapter for `f64` fields that use NaN for "not available": JSON has
/// no NaN, so it is written as `null` and read back as NaN.
pub(crate) mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Per-step tolerances are `tol·(tol/pivot)^e`, which makes the global error
/// scale at least linearly with the requested tolerance.
const CALIBRATION_PIVOT: f64 = 1e-9;
const CALIBRATION_EXPONENT: f64 = 1.0 / 3.0;

/// `(z, y, y')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub z: Complex64,
    pub y: Complex64,
    pub yp: Complex64,
}

impl State {
    pub fn new(z: Complex64, y: Complex64, yp: Complex64) -> Self {
        State { z, y, yp }
    }

    pub fn is_finite(&self) -> bool {
        [self.z, self.y, self.yp].iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// One accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub z: Complex64,
    pub y: Complex64,
    pub yp: Complex64,
    /// Arclength of the step that produced this sample.
    pub h: f64,
    /// Scaled local error estimate (accepted steps have `err ≤ 1`).
    pub err: f64,
}

impl Sample {
    pub fn state(&self) -> State {
        State::new(self.z, self.y, self.yp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    SingularityEncounter,
    StepCollapse,
    MaxSteps,
}

impl Termination {
    /// Whether the run stopped because the solution blew up or the step
    /// collapsed.
    pub fn is_encounter(&self) -> bool {
        matches!(self, Termination::SingularityEncounter | Termination::StepCollapse)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: State,
    pub samples: Vec<Sample>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last_state(&self) -> State {
        self.samples.last().map(Sample::state).unwrap_or(self.start)
    }
}

/// Whether the singularity implied by the local power law is closer than the
/// step resolution, where steps may jump across it.
fn unresolved<O: SecondOrderOde + ?Sized>(ode: &O, z: Complex64, v: &[Complex64; 2], min_step: f64) -> bool {
    let (zs, _) = locate::local_power(ode, z, v[0], v[1]);
    (zs - z).norm() < RESOLUTION_FACTOR * min_step
}

/// Multiple of `min_step` below which an estimated singularity distance
/// counts as an encounter.
const RESOLUTION_FACTOR: f64 = 1e3;

/// Integrates `ode` along `pieces` starting from `state`, appending accepted
/// steps to `samples`. `min_step` and `max_steps` apply to the whole run.
pub(crate) fn run_pieces<O: SecondOrderOde + ?Sized>(
    ode: &O,
    state: State,
    pieces: &[Piece],
    settings: &ContinuationSettings,
    min_step: f64,
    samples: &mut Vec<Sample>,
) -> Result<Termination> {
    let tol = settings.tolerances();
    let mut cur = state;
    let mut used = 0usize;
    for piece in pieces {
        let len = piece.length();
        if len == 0.0 {
            continue;
        }
        let mut f = |s: f64, v: &[Complex64; 2]| {
            let dz = piece.tangent(s);
            let z = piece.point(s);
            Ok([v[1] * dz, ode.accel(z, v[0], v[1]) * dz])
        };
        let opts = DriveOptions { tol, min_step, max_steps: settings.max_steps - used, h0: None };
        let mut blew_up = false;
        let res = drive(&mut f, 0.0, len, [cur.y, cur.yp], &opts, |s, v, h, err| {
            let z = piece.point(s);
            samples.push(Sample { z, y: v[0], yp: v[1], h, err });
            let m = v[0].norm();
            if m > settings.blowup_threshold || (m >= settings.chart_handoff_radius && unresolved(ode, z, v, min_step)) {
                blew_up = true;
                Control::Stop
            } else {
                Control::Continue
            }
        })?;
        used += res.steps;
        let z_end = if res.status == DriveStatus::Completed { piece.end() } else { piece.point(res.t) };
        cur = State::new(z_end, res.y[0], res.y[1]);
        if let Some(last) = samples.last_mut() {
            if res.status == DriveStatus::Completed {
                last.z = z_end;
            }
        }
        match res.status {
            DriveStatus::Completed => {}
            DriveStatus::Stopped if blew_up => return Ok(Termination::SingularityEncounter),
            DriveStatus::Stopped => unreachable!("only blow-up stops the drive"),
            DriveStatus::StepCollapse => return Ok(Termination::StepCollapse),
            DriveStatus::MaxSteps => return Ok(Termination::MaxSteps),
        }
    }
    Ok(Termination::Completed)
}

/// Continues `state0` along `path` with adaptive Dormand–Prince steps on
/// `(y, y')`.
pub fn integrate<O: SecondOrderOde + ?Sized>(
    ode: &O,
    state0: State,
    path: &PathSpec,
    settings: &ContinuationSettings,
) -> Result<Trajectory> {
    path.validate()?;
    let length = path.length();
    let min_step = settings.validate_for(length)?;
    if !state0.is_finite() {
        return Err(Error::Precondition("initial state is not finite".into()));
    }
    if (state0.z - path.start()).norm() > 1e-12 * (1.0 + state0.z.norm()) {
        return Err(Error::InvalidPath(format!("path starts at {} but the state is at {}", path.start(), state0.z)));
    }
    let mut samples = Vec::new();
    let termination = run_pieces(ode, state0, &path.pieces(), settings, min_step, &mut samples)?;
    Ok(Trajectory { start: state0, samples, termination })
}

/// `y'² − 2Σ a_n y^{n+1}/(n+1)` for constant coefficients `a`.
pub fn first_integral(a: &[Complex64], y: Complex64, yp: Complex64) -> Complex64 {
    let mut pot = Complex64::new(0.0, 0.0);
    let mut yk = y;
    for (n, an) in a.iter().enumerate() {
        pot += an * yk / (n as f64 + 1.0);
        yk *= y;
    }
    yp * yp - 2.0 * pot
}

/// Largest change of the first integral along `traj` relative to its start.
pub fn conserved_drift(eq: &EquationSpec, traj: &Trajectory) -> Result<f64> {
    if !eq.has_constant_coefficients() {
        return Err(Error::Precondition("first integral requires constant coefficients".into()));
    }
    let a = eq.to_complex().values_at(Complex64::new(0.0, 0.0));
    let fi0 = first_integral(&a, traj.start.y, traj.start.yp);
    Ok(traj
        .samples
        .iter()
        .map(|s| (first_integral(&a, s.y, s.yp) - fi0).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cubic() -> EquationSpec {
        EquationSpec::from_int_coeffs(3, &[&[], &[], &[], &[2]]).unwrap()
    }

    #[test]
    fn exact_pole_before_singularity() {
        let eq = cubic().to_complex();
        let s0 = State::new(c(0.0), c(-1.0), c(-1.0));
        let t = integrate(&eq, s0, &PathSpec::segment(c(0.0), c(0.9)).unwrap(), &ContinuationSettings::default()).unwrap();
        assert_eq!(t.termination, Termination::Completed);
        let last = t.last_state();
        assert_eq!(last.z, c(0.9));
        assert!((last.y + 10.0).norm() < 1e-6);
        assert!(t.samples.iter().all(|s| s.err <= 1.0));
    }

    #[test]
    fn encounter_before_pole() {
        let eq = cubic().to_complex();
        let s0 = State::new(c(0.0), c(-1.0), c(-1.0));
        let t = integrate(&eq, s0, &PathSpec::segment(c(0.0), c(1.5)).unwrap(), &ContinuationSettings::default()).unwrap();
        assert!(t.termination.is_encounter());
        assert!(t.last_state().z.re < 1.0);
    }

    #[test]
    fn state_must_sit_on_path_start() {
        let eq = cubic().to_complex();
        let s0 = State::new(c(0.1), c(-1.0), c(-1.0));
        assert!(matches!(
            integrate(&eq, s0, &PathSpec::segment(c(0.0), c(0.5)).unwrap(), &ContinuationSettings::default()),
            Err(Error::InvalidPath(_))
        ));
    }

    #[test]
    fn settings_validation() {
        let mut s = ContinuationSettings::default();
        assert!(s.validate().is_ok());
        s.rel_tol = 0.0;
        assert!(s.validate().is_err());
        let s = ContinuationSettings { min_step: Some(2.0), ..Default::default() };
        assert!(s.validate_for(1.0).is_err());
    }
}
