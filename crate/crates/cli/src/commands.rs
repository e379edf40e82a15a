//! One function per subcommand. Each returns the report to print; files go
//! to `--out` when it is given.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use psent::canonical::{canonicalize, CanonicalEquation};
use psent::continuation::{
    integrate, locate, monodromy, run_demo, scan, ContinuationSettings, DemoEquation, PathSpec, State, Termination,
};
use psent::equation::EquationSpec;
use psent::expansion::{expand, BranchClass, ExpansionResult};
use psent::resonance::{check_resonance, check_resonance_series, Parity, ResonanceReport};
use psent::series::{CoeffFn, Poly, TaylorSeries};
use psent::{ExactScalar, Scalar};
use serde::Serialize;

use crate::args::{parse_branch, parse_complex, parse_exact, parse_loop, Command, DemoName, Mode, Opts};
use crate::equation_file::EquationFile;
use crate::report::*;
use crate::CliError;

/// Exit code, text for stdout, and an optional diagnostic for stderr.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub diagnostic: Option<String>,
}

/// Deviation below which a monodromy loop counts as closed.
pub const CLOSURE_TOL: f64 = 1e-5;

/// Order used for series-mode resonance checks when `--order` is absent.
const SERIES_CHECK_ORDER: usize = 24;

type Done = (i32, String);

pub fn run(cmd: &Command) -> Outcome {
    let opts = cmd.opts();
    let result = allowed_flags(cmd).and_then(|_| match cmd {
        Command::Analyze(o) => analyze(o),
        Command::Expand(o) => expansion(o),
        Command::Continue(o) => continuation(o, false),
        Command::Locate(o) => continuation(o, true),
        Command::Monodromy(o) => loops(o),
        Command::Scan(o) => scanning(o),
        Command::Demo { which, opts } => demo(*which, opts),
    });
    match result {
        Ok((code, stdout)) => {
            let diagnostic = (code != 0).then(|| format!("finished with exit code {code}"));
            Outcome { code, stdout, diagnostic }
        }
        Err(e) => {
            let rep = Envelope::new(
                cmd.name(),
                ErrorReport {
                    exit_code: e.code,
                    kind: e.kind.to_string(),
                    message: e.message.clone(),
                    obstruction: e.obstruction.map(|o| o.0),
                    obstruction_scale: e.obstruction.map(|o| o.1),
                },
            );
            let mut stdout = to_json(&rep);
            if let Err(w) = emit(opts, "error.json", &stdout) {
                stdout = to_json(&Envelope::new(
                    cmd.name(),
                    ErrorReport { exit_code: w.code, kind: w.kind.into(), message: w.message, obstruction: None, obstruction_scale: None },
                ));
            }
            Outcome { code: e.code, stdout, diagnostic: Some(e.to_string()) }
        }
    }
}

fn allowed_flags(cmd: &Command) -> Result<(), CliError> {
    let o = cmd.opts();
    let present = [
        ("--equation", o.equation.is_some()),
        ("--z0", o.z0.is_some()),
        ("--branch", o.branch.is_some()),
        ("--beta", o.beta.is_some()),
        ("--order", o.order.is_some()),
        ("--path", !o.path.is_empty()),
        ("--loop", o.loop_spec.is_some()),
        ("--rel-tol", o.rel_tol.is_some()),
        ("--abs-tol", o.abs_tol.is_some()),
        ("--mode", o.mode.is_some()),
        ("--y0", o.y0.is_some()),
        ("--yp0", o.yp0.is_some()),
    ];
    let allowed: &[&str] = match cmd {
        Command::Analyze(_) => &["--equation", "--z0", "--order", "--mode"],
        Command::Expand(_) => &["--equation", "--z0", "--branch", "--beta", "--order", "--mode"],
        Command::Continue(_) | Command::Locate(_) | Command::Scan(_) => &[
            "--equation", "--z0", "--branch", "--beta", "--order", "--path", "--rel-tol", "--abs-tol", "--y0", "--yp0",
        ],
        Command::Monodromy(_) => &[
            "--equation", "--z0", "--branch", "--beta", "--order", "--path", "--loop", "--rel-tol", "--abs-tol",
            "--y0", "--yp0",
        ],
        Command::Demo { .. } => &["--path", "--rel-tol", "--abs-tol"],
    };
    for (flag, on) in present {
        if on && !allowed.contains(&flag) {
            return Err(CliError::input(format!("{flag} does not apply to {}", cmd.name())));
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn out_file(opts: &Opts, name: &str) -> Result<Option<std::path::PathBuf>, CliError> {
    let Some(dir) = &opts.out else { return Ok(None) };
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    Ok(Some(dir.join(name)))
}

fn emit(opts: &Opts, name: &str, text: &str) -> Result<(), CliError> {
    if let Some(p) = out_file(opts, name)? {
        fs::write(&p, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn emit_trajectory(opts: &Opts, samples: &[psent::continuation::Sample]) -> Result<Option<String>, CliError> {
    let Some(p) = out_file(opts, "trajectory.csv")? else { return Ok(None) };
    let f = fs::File::create(&p).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display())))?;
    write_trajectory(f, samples).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display())))?;
    Ok(Some(file_name(&p)))
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn load(opts: &Opts) -> Result<EquationSpec, CliError> {
    let path = opts.equation.as_ref().ok_or_else(|| CliError::input("--equation is required".into()))?;
    EquationFile::read(path)?.to_spec()
}

fn mode_for(opts: &Opts, spec: &EquationSpec) -> Result<Mode, CliError> {
    match opts.mode {
        Some(Mode::Exact) if !spec.is_canonical() => Err(CliError::input(
            "exact mode needs an equation already in canonical form; use --mode float".into(),
        )),
        Some(m) => Ok(m),
        None if spec.is_canonical() => Ok(Mode::Exact),
        None => Ok(Mode::Float),
    }
}

// ---------------------------------------------------------------- analyze

fn exact_numbers(p: &Poly<ExactScalar>) -> Vec<Number> {
    p.coeffs().iter().map(|c| Number::Exact(c.to_string_pair())).collect()
}

fn series_numbers(s: &TaylorSeries<Complex64>) -> Vec<Number> {
    s.coeffs().iter().map(|&c| Number::float(c)).collect()
}

fn conditions<C: CoeffFn>(
    rep: &ResonanceReport<C>,
    numbers: impl Fn(&C) -> Vec<Number>,
    display: impl Fn(&C) -> String,
) -> Vec<Condition> {
    let mut out = vec![Condition {
        name: "a''_{N-2}".into(),
        pass: rep.a_n2_pass,
        coefficients: numbers(&rep.condition_a_n2),
        display: display(&rep.condition_a_n2),
    }];
    if let (Some(rho), Some(pass)) = (&rep.condition_rho, rep.rho_pass) {
        out.push(Condition { name: "rho".into(), pass, coefficients: numbers(rho), display: display(rho) });
    }
    out
}

fn analyze(opts: &Opts) -> Result<Done, CliError> {
    let spec = load(opts)?;
    let n = spec.degree();
    let parity = if n % 2 == 0 { Parity::Even } else { Parity::Odd };
    let (mode, series_order, checks) = match mode_for(opts, &spec)? {
        Mode::Exact => {
            let canon = CanonicalEquation::from_spec(&spec)?;
            let rep = check_resonance(&canon);
            let conds = conditions(&rep, exact_numbers, |p| format!("{p:?}"));
            ("exact", None, vec![PointCheck { base_point: None, pass: rep.pass(), conditions: conds }])
        }
        Mode::Float => {
            let z0 = opts.z0.as_deref().map(|s| parse_complex(s, "--z0")).transpose()?.unwrap_or_default();
            let order = opts.order.unwrap_or(SERIES_CHECK_ORDER);
            let h = 0.1;
            let pts = [z0, z0 + Complex64::new(h, 0.0), z0 + Complex64::new(0.0, h)];
            let reps = check_resonance_series(&spec, &pts, order)?;
            let checks = pts
                .iter()
                .zip(&reps)
                .map(|(&p, rep)| PointCheck {
                    base_point: Some(p),
                    pass: rep.pass(),
                    conditions: conditions(rep, series_numbers, |s| format!("max |coefficient| = {:.3e}", s.magnitude())),
                })
                .collect();
            ("series", Some(order), checks)
        }
    };
    let pass = checks.iter().all(|c: &PointCheck| c.pass);
    let mut witnesses: Vec<String> = Vec::new();
    for c in checks.iter().flat_map(|c| &c.conditions).filter(|c| !c.pass) {
        if !witnesses.contains(&c.name) {
            witnesses.push(c.name.clone());
        }
    }
    let report = AnalysisReport {
        n,
        parity: match parity {
            Parity::Even => "even".into(),
            Parity::Odd => "odd".into(),
        },
        mode: mode.into(),
        series_order,
        pass,
        verdict: if pass { "PASS".into() } else { "FAIL".into() },
        witnesses,
        checks,
    };
    let text = to_json(&Envelope::new("analyze", report));
    emit(opts, "analysis.json", &text)?;
    Ok((if pass { 0 } else { 2 }, text))
}

// ----------------------------------------------------------------- expand

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn exponent_string((num, den): (i64, i64)) -> String {
    let g = gcd(num, den).max(1);
    let (p, q) = (num / g, den / g);
    if q == 1 {
        p.to_string()
    } else {
        format!("{p}/{q}")
    }
}

fn branch_name(b: BranchClass) -> String {
    match b {
        BranchClass::Even => "even".into(),
        BranchClass::Odd { eps } => format!("odd, eps = {eps:+}"),
    }
}

fn default_expand_order(n: usize) -> usize {
    2 * (n + 1) + 2
}

fn expansion_report<S: Scalar>(
    e: &ExpansionResult<S>,
    mode: &str,
    variables: &str,
    z0: Number,
    number: impl Fn(&S) -> Number,
) -> ExpansionReport {
    ExpansionReport {
        n: e.n,
        mode: mode.into(),
        variables: variables.into(),
        z0,
        branch: branch_name(e.branch),
        eps: e.branch.eps(),
        beta: number(&e.beta),
        order: e.order,
        resonance_index: e.resonance_index(),
        obstruction: number(&e.obstruction),
        terms: (0..=e.order)
            .map(|j| Term { j, exponent: exponent_string(e.exponent(j)), coefficient: number(&e.coefficient(j)) })
            .collect(),
    }
}

fn table(r: &ExpansionReport, shown: impl Fn(&Number) -> String) -> String {
    let mut s = format!(
        "# N = {}, z0 = {}, branch {}, beta = {}, order {} ({} arithmetic, {} variables)\n",
        r.n,
        shown(&r.z0),
        r.branch,
        shown(&r.beta),
        r.order,
        r.mode,
        r.variables
    );
    s.push_str(&format!("{:>4}  {:>8}  {}\n", "j", "exponent", "coefficient"));
    for t in &r.terms {
        s.push_str(&format!("{:>4}  {:>8}  {}\n", t.j, t.exponent, shown(&t.coefficient)));
    }
    s
}

fn show(n: &Number) -> String {
    match n {
        Number::Exact([re, im]) => ExactScalar::parse_pair(re, im).map(|q| q.to_string()).unwrap_or_default(),
        Number::Float([re, im]) => format!("{}", Complex64::new(*re, *im)),
    }
}

fn expansion(opts: &Opts) -> Result<Done, CliError> {
    let spec = load(opts)?;
    let n = spec.degree();
    let z0s = opts.z0.as_deref().ok_or_else(|| CliError::input("expand needs --z0".into()))?;
    let bs = opts.branch.as_deref().ok_or_else(|| CliError::input("expand needs --branch".into()))?;
    let branch = parse_branch(bs)?;
    if branch.sheet != 0 {
        return Err(CliError::input("expand takes --branch 1, +1 or -1".into()));
    }
    let class = BranchClass::for_degree(n, branch.eps)?;
    let order = opts.order.unwrap_or(default_expand_order(n));
    let report = match mode_for(opts, &spec)? {
        Mode::Exact => {
            let canon = CanonicalEquation::from_spec(&spec)?;
            let z0 = parse_exact(z0s, "--z0")?;
            let beta = opts.beta.as_deref().map(|s| parse_exact(s, "--beta")).transpose()?.unwrap_or_else(ExactScalar::zero);
            let e = expand(&canon, &z0, class, beta, order)?;
            expansion_report(&e, "exact", "original", Number::Exact(z0.to_string_pair()), |c| {
                Number::Exact(c.to_string_pair())
            })
        }
        Mode::Float => {
            let z0 = parse_complex(z0s, "--z0")?;
            let beta = opts.beta.as_deref().map(|s| parse_complex(s, "--beta")).transpose()?.unwrap_or_default();
            if spec.is_canonical() {
                let canon = float_canonical(&spec)?;
                let e = expand(&canon, &z0, class, beta, order)?;
                expansion_report(&e, "float", "original", Number::float(z0), |c| Number::float(*c))
            } else {
                let (canon, _) = canonicalize(&spec, z0, order)?;
                let e = expand(&canon, &Complex64::new(0.0, 0.0), class, beta, order)?;
                expansion_report(&e, "float", "canonical", Number::float(z0), |c| Number::float(*c))
            }
        }
    };
    let text = to_json(&Envelope::new("expand", &report));
    emit(opts, "expansion.json", &text)?;
    Ok((0, table(&report, show)))
}

fn float_canonical(spec: &EquationSpec) -> Result<CanonicalEquation<Poly<Complex64>>, CliError> {
    let exact = CanonicalEquation::from_spec(spec)?;
    Ok(CanonicalEquation::from_lower(spec.degree(), exact.lower().iter().map(|p| p.to_complex()).collect())?)
}

// ----------------------------------------------------------- continuation

/// Initial state at `at`: explicit `--y0/--yp0`, or the series solution
/// about `--z0` in class `--branch`.
fn seed(opts: &Opts, spec: &EquationSpec, at: Complex64) -> Result<State, CliError> {
    let explicit = opts.y0.is_some() || opts.yp0.is_some();
    let series = opts.z0.is_some() || opts.branch.is_some() || opts.beta.is_some() || opts.order.is_some();
    match (explicit, series) {
        (true, true) => Err(CliError::input("give either --y0/--yp0 or a series seed (--z0, --branch), not both".into())),
        (false, false) => Err(CliError::input("initial data missing: give --y0 and --yp0, or --z0 and --branch".into())),
        (true, false) => {
            let y = parse_complex(opts.y0.as_deref().ok_or_else(|| CliError::input("--yp0 needs --y0".into()))?, "--y0")?;
            let yp = parse_complex(opts.yp0.as_deref().ok_or_else(|| CliError::input("--y0 needs --yp0".into()))?, "--yp0")?;
            Ok(State::new(at, y, yp))
        }
        (false, true) => {
            let n = spec.degree();
            if !spec.is_canonical() {
                return Err(CliError::input("series seeds need an equation in canonical form; use --y0/--yp0".into()));
            }
            let z0 = parse_complex(opts.z0.as_deref().ok_or_else(|| CliError::input("series seed needs --z0".into()))?, "--z0")?;
            let b = parse_branch(opts.branch.as_deref().ok_or_else(|| CliError::input("series seed needs --branch".into()))?)?;
            let beta = opts.beta.as_deref().map(|s| parse_complex(s, "--beta")).transpose()?.unwrap_or_default();
            let order = opts.order.unwrap_or((16 * (n - 1)).max(2 * (n + 1)));
            if at == z0 {
                return Err(CliError::input("the path must not start at the seed singularity --z0".into()));
            }
            let e = expand(&float_canonical(spec)?, &z0, BranchClass::for_degree(n, b.eps)?, beta, order)?;
            let (y, yp) = e.eval_state(at, b.sheet)?;
            Ok(State::new(at, y, yp))
        }
    }
}

fn continuation(opts: &Opts, find: bool) -> Result<Done, CliError> {
    let spec = load(opts)?;
    let settings = opts.settings(ContinuationSettings::default())?;
    let waypoints = opts.single_path()?.ok_or_else(|| CliError::input("--path is required".into()))?;
    let path = PathSpec::new(waypoints.clone())?;
    let s0 = seed(opts, &spec, waypoints[0])?;
    let traj = integrate(&spec.to_complex(), s0, &path, &settings)?;
    let trajectory_csv = emit_trajectory(opts, &traj.samples)?;
    let (singularity, failure) = if find {
        match locate(&spec, &traj, &settings) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(CliError::from(e))),
        }
    } else {
        (None, None)
    };
    let report = RunReport {
        start: s0,
        waypoints,
        settings,
        accepted_steps: traj.samples.len(),
        termination: traj.termination,
        final_state: traj.last_state(),
        singularity,
        trajectory_csv,
    };
    let name = if find { "locate" } else { "continue" };
    let text = to_json(&Envelope::new(name, report));
    emit(opts, "report.json", &text)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let code = if traj.termination == Termination::MaxSteps { 3 } else { 0 };
    Ok((code, text))
}

fn loops(opts: &Opts) -> Result<Done, CliError> {
    let spec = load(opts)?;
    let settings = opts.settings(ContinuationSettings::default())?;
    let l = parse_loop(opts.loop_spec.as_deref().ok_or_else(|| CliError::input("monodromy needs --loop".into()))?)?;
    let anchor = match opts.single_path()? {
        Some(w) if w.len() == 2 => w[0],
        Some(_) => return Err(CliError::input("monodromy takes --path with one start point and one loop point only".into())),
        None => l.center + l.radius,
    };
    let s0 = seed(opts, &spec, anchor)?;
    let result = monodromy(&spec.to_complex(), s0, l.center, l.radius, l.turns, &settings)?;
    let report = MonodromyReport {
        settings,
        turns: l.turns,
        closes_after: result.closes_after(CLOSURE_TOL),
        closure_tol: CLOSURE_TOL,
        result,
    };
    let text = to_json(&Envelope::new("monodromy", report));
    emit(opts, "monodromy.json", &text)?;
    Ok((0, text))
}

fn scanning(opts: &Opts) -> Result<Done, CliError> {
    let spec = load(opts)?;
    let settings = opts.settings(ContinuationSettings::default())?;
    if opts.path.is_empty() {
        return Err(CliError::input("scan needs at least one --path".into()));
    }
    let fan = opts
        .path
        .iter()
        .map(|p| crate::args::parse_path(p).and_then(|w| PathSpec::new(w).map_err(CliError::from)))
        .collect::<Result<Vec<_>, _>>()?;
    let start = fan[0].start();
    if let Some(p) = fan.iter().find(|p| p.start() != start) {
        return Err(CliError::input(format!("scan paths share one start point; {} differs from {start}", p.start())));
    }
    let s0 = seed(opts, &spec, start)?;
    let entries = scan(&spec, s0, &fan, &settings)?;
    let text = to_json(&Envelope::new("scan", ScanReport { start: s0, settings, entries }));
    emit(opts, "scan.json", &text)?;
    Ok((0, text))
}

fn demo(which: DemoName, opts: &Opts) -> Result<Done, CliError> {
    let demo = match which {
        DemoName::Smith => DemoEquation::Smith,
        DemoName::Warning => DemoEquation::Warning,
    };
    let settings = opts.settings(demo.settings().0)?;
    let path = opts.single_path()?.map(PathSpec::new).transpose()?;
    let run = run_demo(demo, path, Some(&settings))?;
    let trajectory_csv = emit_trajectory(opts, &run.trajectory.samples)?;
    let report = DemoReport {
        demo: demo.name().into(),
        waypoints: run.path.waypoints().to_vec(),
        settings,
        accepted_steps: run.trajectory.samples.len(),
        termination: run.trajectory.termination,
        singularities: run.singularities,
        trajectory_csv,
    };
    let text = to_json(&Envelope::new("demo", report));
    emit(opts, "demo.json", &text)?;
    Ok((0, text))
}
