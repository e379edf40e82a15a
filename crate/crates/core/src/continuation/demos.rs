//! Built-in equations outside the polynomial class, used to exercise the
//! continuation engine on accumulating singularities.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::explore::{explore, Detection, ExploreSettings};
use super::{ClassTag, ContinuationSettings, Method, PathSpec, SingularityReport, State, Trajectory};
use crate::equation::SecondOrderOde;
use crate::error::{Error, Result};

/// `y'' = −4y³y' − y`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SmithEquation;

impl SmithEquation {
    /// `Φ = y' + y⁴`, which satisfies `Φ' = −y`.
    pub fn phi(y: Complex64, yp: Complex64) -> Complex64 {
        yp + y.powi(4)
    }
}

impl SecondOrderOde for SmithEquation {
    fn accel(&self, _z: Complex64, y: Complex64, yp: Complex64) -> Complex64 {
        -4.0 * y * y * y * yp - y
    }
}

/// `y'' = (2y − 1)/(y² + 1) · y'²`, solved by `y = tan(log(c₁z − c₂))`.
#[derive(Clone, Copy, Debug, Default)]
pub struct WarningEquation;

impl WarningEquation {
    pub fn exact(c1: Complex64, c2: Complex64, z: Complex64) -> (Complex64, Complex64) {
        let s = c1 * z - c2;
        let y = s.ln().tan();
        (y, (1.0 + y * y) * c1 / s)
    }

    /// Pole `n`: `log(c₁z − c₂) = π/2 + nπ`.
    pub fn pole(c1: Complex64, c2: Complex64, n: i64) -> Complex64 {
        (c2 + (PI / 2.0 + n as f64 * PI).exp()) / c1
    }

    /// Index of the pole nearest to `z` in the sense of `log(c₁z − c₂)`.
    pub fn pole_index(c1: Complex64, c2: Complex64, z: Complex64) -> i64 {
        (((c1 * z - c2).ln().re - PI / 2.0) / PI).round() as i64
    }
}

impl SecondOrderOde for WarningEquation {
    fn accel(&self, _z: Complex64, y: Complex64, yp: Complex64) -> Complex64 {
        (2.0 * y - 1.0) / (y * y + 1.0) * yp * yp
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoEquation {
    Smith,
    Warning,
}

impl FromStr for DemoEquation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smith" => Ok(DemoEquation::Smith),
            "warning" => Ok(DemoEquation::Warning),
            other => Err(Error::Precondition(format!("unknown demo `{other}` (expected smith or warning)"))),
        }
    }
}

/// Constants of the warning-equation demo solution.
pub const WARNING_C1: Complex64 = Complex64::new(1.0, 0.0);
pub const WARNING_C2: Complex64 = Complex64::new(-1.0, 0.0);
/// Angle of the ray into the accumulation point.
pub const WARNING_ANGLE: f64 = 0.05;

impl DemoEquation {
    pub fn name(&self) -> &'static str {
        match self {
            DemoEquation::Smith => "smith",
            DemoEquation::Warning => "warning",
        }
    }

    pub fn ode(&self) -> &'static dyn SecondOrderOde {
        match self {
            DemoEquation::Smith => &SmithEquation,
            DemoEquation::Warning => &WarningEquation,
        }
    }

    /// Initial state and the documented path.
    pub fn setup(&self) -> (State, PathSpec) {
        let c = Complex64::new;
        match self {
            DemoEquation::Smith => {
                let start = State::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
                let path = PathSpec::new(smith_waypoints()).expect("static path");
                (start, path)
            }
            DemoEquation::Warning => {
                let z0 = c(0.0, 0.0);
                let (y, yp) = WarningEquation::exact(WARNING_C1, WARNING_C2, z0);
                let apex = WARNING_C2 / WARNING_C1;
                let dir = Complex64::from_polar(1.0, WARNING_ANGLE);
                let path = PathSpec::new(vec![z0, apex + dir, apex + dir * 1e-7]).expect("static path");
                (State::new(z0, y, yp), path)
            }
        }
    }

    pub fn settings(&self) -> (ContinuationSettings, ExploreSettings) {
        match self {
            DemoEquation::Smith => (
                ContinuationSettings { blowup_threshold: 1e3, chart_handoff_radius: 1e2, ..Default::default() },
                ExploreSettings { peak_min: 2.0, ..Default::default() },
            ),
            DemoEquation::Warning => (ContinuationSettings::default(), ExploreSettings::default()),
        }
    }
}

/// Angle and length of the Smith demo ray; it runs alongside a chain of
/// branch points starting near `16 + 9.6i`.
pub const SMITH_ANGLE: f64 = 0.55;
pub const SMITH_LENGTH: f64 = 30.0;

fn smith_waypoints() -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0), Complex64::from_polar(SMITH_LENGTH, SMITH_ANGLE)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoSingularity {
    pub report: SingularityReport,
    /// Smith: `Φ` on the approach where `|y|` is closest to 10.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Complex64>,
    /// Smith: largest deviation of `Φ` from that value over the approach
    /// samples with `10 ≤ |y| ≤ 100`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_spread: Option<f64>,
    /// Warning: index `n` of the matching exact pole and its location.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pole_index: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemoRun {
    pub demo: DemoEquation,
    pub path: PathSpec,
    pub trajectory: Trajectory,
    pub singularities: Vec<DemoSingularity>,
}

fn report(d: &Detection, class: ClassTag) -> SingularityReport {
    SingularityReport {
        z_star: d.z_star,
        exponent_estimate: d.exponent,
        branch_class: class,
        beta_or_kappa: None,
        method: Method::ExponentFit,
        residual: d.fit_residual,
        fallback: false,
        note: Some(if d.on_path { "on path".into() } else { "near path".into() }),
    }
}

/// Runs a demo along its documented path, or along `path` when given.
pub fn run_demo(
    demo: DemoEquation,
    path: Option<PathSpec>,
    settings: Option<&ContinuationSettings>,
) -> Result<DemoRun> {
    let (start, default_path) = demo.setup();
    let (default_settings, ex) = demo.settings();
    let path = path.unwrap_or(default_path);
    let settings = settings.cloned().unwrap_or(default_settings);
    let start = if (path.start() - start.z).norm() == 0.0 {
        start
    } else {
        return Err(Error::InvalidPath(format!("demo paths start at {}", start.z)));
    };
    let run = explore(demo.ode(), start, &path, &settings, &ex)?;
    let mut singularities: Vec<DemoSingularity> = run
        .detections
        .iter()
        .map(|d| match demo {
            DemoEquation::Smith => {
                let phi = d
                    .tail
                    .iter()
                    .min_by(|a, b| (a.y.norm().ln() - 10f64.ln()).abs().total_cmp(&(b.y.norm().ln() - 10f64.ln()).abs()))
                    .map(|s| SmithEquation::phi(s.y, s.yp));
                let phi_spread = phi.map(|p0| {
                    d.tail
                        .iter()
                        .filter(|s| (10.0..=100.0).contains(&s.y.norm()))
                        .map(|s| (SmithEquation::phi(s.y, s.yp) - p0).norm())
                        .fold(0.0, f64::max)
                });
                DemoSingularity {
                    report: report(d, ClassTag::Other),
                    phi,
                    phi_spread,
                    pole_index: None,
                    exact: None,
                    error: None,
                }
            }
            DemoEquation::Warning => {
                let n = WarningEquation::pole_index(WARNING_C1, WARNING_C2, d.z_star);
                let exact = WarningEquation::pole(WARNING_C1, WARNING_C2, n);
                DemoSingularity {
                    report: report(d, ClassTag::Pole),
                    phi: None,
                    phi_spread: None,
                    pole_index: Some(n),
                    exact: Some(exact),
                    error: Some((exact - d.z_star).norm()),
                }
            }
        })
        .collect();
    if demo == DemoEquation::Warning {
        singularities.sort_by_key(|s| std::cmp::Reverse(s.pole_index));
    }
    Ok(DemoRun { demo, path, trajectory: run.trajectory, singularities })
}
