//! Machine-readable outputs. Every JSON document carries `schema_version`
//! and `command`; trajectories go to CSV.

use std::io::Write;

use num_complex::Complex64;
use psent::continuation::{
    ContinuationSettings, DemoSingularity, MonodromyResult, Sample, ScanEntry, SingularityReport, State, Termination,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 9] = ["step_index", "z_re", "z_im", "y_re", "y_im", "yp_re", "yp_im", "abs_y", "err_est"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub command: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Envelope<T> {
    pub fn new(command: &str, body: T) -> Self {
        Envelope { schema_version: SCHEMA_VERSION, command: command.to_string(), body }
    }
}

/// A number that is either exact (`["p/q", "r/s"]`) or floating (`[re, im]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Exact([String; 2]),
    Float([f64; 2]),
}

impl Number {
    pub fn float(c: Complex64) -> Self {
        Number::Float([c.re, c.im])
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Number::Float([re, im]) => Complex64::new(*re, *im),
            Number::Exact([re, im]) => {
                let f = |s: &str| match s.split_once('/') {
                    Some((n, d)) => n.parse::<f64>().unwrap_or(f64::NAN) / d.parse::<f64>().unwrap_or(f64::NAN),
                    None => s.parse().unwrap_or(f64::NAN),
                };
                Complex64::new(f(re), f(im))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    /// `a''_{N-2}` or `rho`.
    pub name: String,
    pub pass: bool,
    /// Polynomial (exact) or Taylor (series mode) coefficients in increasing powers.
    pub coefficients: Vec<Number>,
    pub display: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    /// Base point of the local canonical form; absent for exact checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Complex64>,
    pub pass: bool,
    pub conditions: Vec<Condition>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub parity: String,
    /// `exact` or `series`.
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_order: Option<usize>,
    pub pass: bool,
    pub verdict: String,
    /// Names of the failing conditions.
    pub witnesses: Vec<String>,
    pub checks: Vec<PointCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub j: usize,
    /// `(j-2)/(N-1)` in lowest terms.
    pub exponent: String,
    pub coefficient: Number,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub mode: String,
    /// `original` when the input was canonical, `canonical` when the terms
    /// refer to the local canonical variables at `z0`.
    pub variables: String,
    pub z0: Number,
    pub branch: String,
    pub eps: i8,
    pub beta: Number,
    pub order: usize,
    pub resonance_index: usize,
    pub obstruction: Number,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub start: State,
    pub waypoints: Vec<Complex64>,
    pub settings: ContinuationSettings,
    pub accepted_steps: usize,
    pub termination: Termination,
    pub final_state: State,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singularity: Option<SingularityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub settings: ContinuationSettings,
    pub turns: usize,
    /// Loop count after which the state returns to within `closure_tol`.
    pub closes_after: Option<usize>,
    pub closure_tol: f64,
    pub result: MonodromyResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub start: State,
    pub settings: ContinuationSettings,
    pub entries: Vec<ScanEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub demo: String,
    pub waypoints: Vec<Complex64>,
    pub settings: ContinuationSettings,
    pub accepted_steps: usize,
    pub termination: Termination,
    pub singularities: Vec<DemoSingularity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub exit_code: i32,
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction_scale: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CsvRow {
    pub step_index: usize,
    pub z_re: f64,
    pub z_im: f64,
    pub y_re: f64,
    pub y_im: f64,
    pub yp_re: f64,
    pub yp_im: f64,
    pub abs_y: f64,
    pub err_est: f64,
}

impl CsvRow {
    pub fn new(i: usize, s: &Sample) -> Self {
        CsvRow {
            step_index: i,
            z_re: s.z.re,
            z_im: s.z.im,
            y_re: s.y.re,
            y_im: s.y.im,
            yp_re: s.yp.re,
            yp_im: s.yp.im,
            abs_y: s.y.norm(),
            err_est: s.err,
        }
    }
}

/// One row per accepted step.
pub fn write_trajectory<W: Write>(w: W, samples: &[Sample]) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    if samples.is_empty() {
        wr.write_record(CSV_HEADER)?;
    }
    for (i, s) in samples.iter().enumerate() {
        wr.serialize(CsvRow::new(i, s))?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_rows() {
        let c = Complex64::new;
        let s = Sample { z: c(0.1, 0.2), y: c(3.0, 4.0), yp: c(0.0, -1.0), h: 0.1, err: 0.5 };
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &[s, s]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("1,0.1,0.2,3.0,4.0,0.0,-1.0,5.0,0.5"));
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), CSV_HEADER.join(","));
    }

    #[test]
    fn numbers_keep_their_kind() {
        let e: Number = serde_json::from_str(r#"["1/3","-2"]"#).unwrap();
        assert_eq!(e, Number::Exact(["1/3".into(), "-2".into()]));
        let f: Number = serde_json::from_str("[0.5,-2.0]").unwrap();
        assert_eq!(f.to_complex(), Complex64::new(0.5, -2.0));
        assert!((e.to_complex().re - 1.0 / 3.0).abs() < 1e-16);
    }
}
