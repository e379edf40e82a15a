use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{integrate, locate, ContinuationSettings, PathSpec, SingularityReport, State, Termination};
use crate::equation::EquationSpec;
use crate::error::{Error, Result};

/// Environment variable capping the number of scan worker threads.
pub const THREADS_ENV: &str = "PSENT_THREADS";

/// Outcome of one path of a scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub path_index: usize,
    pub termination: Option<Termination>,
    pub report: Option<SingularityReport>,
    pub error: Option<String>,
}

fn run_one(eq: &EquationSpec, state0: State, index: usize, path: &PathSpec, settings: &ContinuationSettings) -> ScanEntry {
    let ode = eq.to_complex();
    let mut entry = ScanEntry { path_index: index, termination: None, report: None, error: None };
    match integrate(&ode, state0, path, settings) {
        Err(e) => entry.error = Some(e.to_string()),
        Ok(traj) => {
            entry.termination = Some(traj.termination);
            if traj.termination.is_encounter() {
                match locate(eq, &traj, settings) {
                    Ok(r) => entry.report = Some(r),
                    Err(e) => entry.error = Some(e.to_string()),
                }
            }
        }
    }
    entry
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0)
}

/// Runs integrate + locate along every path of `fan`, possibly in parallel.
/// Entries come back in input order; per-path failures are recorded, not
/// propagated.
pub fn scan(eq: &EquationSpec, state0: State, fan: &[PathSpec], settings: &ContinuationSettings) -> Result<Vec<ScanEntry>> {
    if eq.degree() < 2 {
        return Err(Error::Precondition(format!("scan needs a nonlinear equation, got N = {}", eq.degree())));
    }
    settings.validate()?;
    let work = || -> Vec<ScanEntry> {
        fan.par_iter().enumerate().map(|(i, p)| run_one(eq, state0, i, p, settings)).collect()
    };
    match thread_cap() {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidSettings(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// Serial variant of [`scan`].
pub fn scan_serial(eq: &EquationSpec, state0: State, fan: &[PathSpec], settings: &ContinuationSettings) -> Result<Vec<ScanEntry>> {
    if eq.degree() < 2 {
        return Err(Error::Precondition(format!("scan needs a nonlinear equation, got N = {}", eq.degree())));
    }
    settings.validate()?;
    Ok(fan.iter().enumerate().map(|(i, p)| run_one(eq, state0, i, p, settings)).collect())
}
