//! Command-line grammar and value parsers.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use psent::continuation::ContinuationSettings;
use psent::ExactScalar;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "psent", version, about = "Movable algebraic singularities of y'' = sum a_n(z) y^n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the resonance conditions and print a report.
    Analyze(Opts),
    /// Compute the formal solution about a point and print its terms.
    Expand(Opts),
    /// Integrate along a path and write the trajectory.
    Continue(Opts),
    /// Integrate into a singularity and locate it.
    Locate(Opts),
    /// Loop around a point and report how the solution returns.
    Monodromy(Opts),
    /// Integrate and locate along several paths from one start.
    Scan(Opts),
    /// Run a built-in demonstration equation.
    Demo {
        #[arg(value_enum)]
        which: DemoName,
        #[command(flatten)]
        opts: Opts,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Expand(_) => "expand",
            Command::Continue(_) => "continue",
            Command::Locate(_) => "locate",
            Command::Monodromy(_) => "monodromy",
            Command::Scan(_) => "scan",
            Command::Demo { .. } => "demo",
        }
    }

    pub fn opts(&self) -> &Opts {
        match self {
            Command::Analyze(o)
            | Command::Expand(o)
            | Command::Continue(o)
            | Command::Locate(o)
            | Command::Monodromy(o)
            | Command::Scan(o) => o,
            Command::Demo { opts, .. } => opts,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    Smith,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Default, Args)]
pub struct Opts {
    /// Equation file (JSON).
    #[arg(long, value_name = "FILE")]
    pub equation: Option<PathBuf>,
    /// Base point of the expansion, or the singularity a seed is taken from.
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    pub z0: Option<String>,
    /// Branch class: 1 or +1 for eps = +1, -1 for eps = -1, any other
    /// integer k for sheet k of the eps = +1 class.
    #[arg(long, value_name = "1|+1|-1|k", allow_hyphen_values = true)]
    pub branch: Option<String>,
    /// Free coefficient of the expansion.
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Truncation order M.
    #[arg(long, value_name = "M")]
    pub order: Option<usize>,
    /// Path waypoints; repeat for scan.
    #[arg(long, value_name = "x0,y0:x1,y1:...", allow_hyphen_values = true)]
    pub path: Vec<String>,
    /// Monodromy loop.
    #[arg(long = "loop", value_name = "cx,cy,r,turns", allow_hyphen_values = true)]
    pub loop_spec: Option<String>,
    #[arg(long, value_name = "TOL")]
    pub rel_tol: Option<f64>,
    #[arg(long, value_name = "TOL")]
    pub abs_tol: Option<f64>,
    /// Directory for report and trajectory files.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Initial value y at the path start (instead of a series seed).
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    pub y0: Option<String>,
    /// Initial derivative y' at the path start.
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    pub yp0: Option<String>,
}

/// A parsed `--branch` value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchArg {
    pub eps: i8,
    pub sheet: i64,
}

pub fn parse_branch(s: &str) -> Result<BranchArg, CliError> {
    let k: i64 = s
        .trim()
        .trim_start_matches('+')
        .parse()
        .map_err(|_| CliError::input(format!("--branch expects 1, +1, -1 or an integer sheet, got `{s}`")))?;
    Ok(match k {
        1 => BranchArg { eps: 1, sheet: 0 },
        -1 => BranchArg { eps: -1, sheet: 0 },
        k => BranchArg { eps: 1, sheet: k },
    })
}

fn pair<'a>(s: &'a str, what: &str) -> Result<(&'a str, &'a str), CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [re, im] => Ok((re, im)),
        [re] => Ok((re, "0")),
        _ => Err(CliError::input(format!("{what} expects RE,IM, got `{s}`"))),
    }
}

fn real(s: &str, what: &str) -> Result<f64, CliError> {
    let bad = || CliError::input(format!("{what}: `{s}` is not a number"));
    let v: f64 = match s.split_once('/') {
        Some((n, d)) => n.trim().parse::<f64>().map_err(|_| bad())? / d.trim().parse::<f64>().map_err(|_| bad())?,
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::input(format!("{what}: `{s}` is not finite")))
    }
}

pub fn parse_complex(s: &str, what: &str) -> Result<Complex64, CliError> {
    let (re, im) = pair(s, what)?;
    Ok(Complex64::new(real(re, what)?, real(im, what)?))
}

/// Rewrites a decimal such as `-1.25e-3` as a rational string `-125/100000`.
/// Rational input `p/q` passes through.
fn decimal_to_rational(s: &str) -> Option<String> {
    let s = s.trim();
    if s.contains('/') {
        return Some(s.to_string());
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let shift = exp - frac.len() as i32;
    if shift.unsigned_abs() > 4096 {
        return None;
    }
    Some(if shift >= 0 {
        format!("{sign}{digits}{}", "0".repeat(shift as usize))
    } else {
        format!("{sign}{digits}/1{}", "0".repeat((-shift) as usize))
    })
}

/// Exact reading of `RE,IM` where each part is a decimal or `p/q`.
pub fn parse_exact(s: &str, what: &str) -> Result<ExactScalar, CliError> {
    let (re, im) = pair(s, what)?;
    let bad = |p: &str| CliError::input(format!("{what}: `{p}` is not a decimal or rational"));
    let re_q = decimal_to_rational(re).ok_or_else(|| bad(re))?;
    let im_q = decimal_to_rational(im).ok_or_else(|| bad(im))?;
    ExactScalar::parse_pair(&re_q, &im_q).map_err(|e| CliError::input(format!("{what}: {e}")))
}

pub fn parse_path(s: &str) -> Result<Vec<Complex64>, CliError> {
    let pts = s.split(':').map(|p| parse_complex(p, "--path")).collect::<Result<Vec<_>, _>>()?;
    if pts.len() < 2 {
        return Err(CliError::input(format!("--path needs at least two waypoints, got `{s}`")));
    }
    Ok(pts)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopArg {
    pub center: Complex64,
    pub radius: f64,
    pub turns: usize,
}

pub fn parse_loop(s: &str) -> Result<LoopArg, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::input(format!("--loop expects cx,cy,r,turns, got `{s}`")));
    }
    let radius = real(parts[2], "--loop radius")?;
    let turns: usize = parts[3]
        .trim()
        .parse()
        .map_err(|_| CliError::input(format!("--loop turns must be a positive integer, got `{}`", parts[3])))?;
    if radius <= 0.0 || turns == 0 {
        return Err(CliError::input("--loop needs a positive radius and at least one turn".into()));
    }
    Ok(LoopArg { center: Complex64::new(real(parts[0], "--loop")?, real(parts[1], "--loop")?), radius, turns })
}

impl Opts {
    pub fn settings(&self, base: ContinuationSettings) -> Result<ContinuationSettings, CliError> {
        let mut s = base;
        if let Some(t) = self.rel_tol {
            s.rel_tol = t;
        }
        if let Some(t) = self.abs_tol {
            s.abs_tol = t;
        }
        s.validate().map_err(CliError::from)?;
        Ok(s)
    }

    pub fn single_path(&self) -> Result<Option<Vec<Complex64>>, CliError> {
        match self.path.as_slice() {
            [] => Ok(None),
            [p] => parse_path(p).map(Some),
            _ => Err(CliError::input("only scan accepts more than one --path".into())),
        }
    }
}
