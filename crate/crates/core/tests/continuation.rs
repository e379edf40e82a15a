mod common;

use common::*;
use psent::continuation::*;
use psent::equation::EquationSpec;
use psent::expansion::BranchClass;
use psent::Error;

fn random_planted(seed: u64, n: usize, eps: i8) -> (EquationSpec, State, C, PathSpec) {
    let mut r = rng(seed);
    let eq = EquationSpec::canonical(n, passing_lower(&mut r, n, 1, 1)).unwrap();
    let zs = c(0.3, 0.1);
    let start = zs - c(0.25, 0.0);
    let s0 = planted(&eq, BranchClass::for_degree(n, eps).unwrap(), zs, c(0.4, -0.2), start);
    let path = PathSpec::segment(start, zs + c(0.25, 0.0)).unwrap();
    (eq, s0, zs, path)
}

#[test]
fn exponent_law_on_random_equations() {
    let settings = ContinuationSettings::default();
    for i in 0..20u64 {
        let n = 2 + (i as usize % 6);
        let eps = if i % 4 < 2 { 1 } else { -1 };
        let (eq, s0, zs, path) = random_planted(100 + i, n, eps);
        let t = integrate(&eq.to_complex(), s0, &path, &settings).unwrap();
        assert!(t.termination.is_encounter(), "case {i} N={n}: {:?}", t.termination);
        let fit = fit_exponent(&t.samples, None).unwrap();
        let want = -2.0 / (n as f64 - 1.0);
        assert!((fit.exponent - want).abs() < 0.05, "case {i} N={n}: exponent {} vs {want}", fit.exponent);
        let rep = locate(&eq, &t, &settings).unwrap();
        assert!(!rep.fallback, "case {i} N={n}: {:?}", rep.note);
        assert!((rep.z_star - zs).norm() < 1e-6, "case {i} N={n}: z* {} vs {zs}", rep.z_star);
        assert!(rep.residual < 1e-4, "case {i} N={n}: chart and fit differ by {}", rep.residual);
        if n % 2 == 1 {
            assert_eq!(rep.branch_class, ClassTag::Odd { eps }, "case {i} N={n}");
        } else {
            assert_eq!(rep.branch_class, ClassTag::Even);
        }
    }
}

#[test]
fn series_match_prefers_the_planted_class() {
    let settings = ContinuationSettings::default();
    for (n, eps) in [(3usize, 1i8), (3, -1), (4, 1), (5, 1), (5, -1)] {
        let (eq, s0, zs, path) = random_planted(7 + n as u64, n, eps);
        let t = integrate(&eq.to_complex(), s0, &path, &settings).unwrap();
        let rep = locate(&eq, &t, &settings).unwrap();
        let opts = SeriesMatchOptions { radius: 0.2, ..Default::default() };
        for branch in BranchClass::all(n) {
            let m = series_match(&eq, rep.z_star, branch, &t, &opts);
            if branch.eps() == eps {
                let m = m.unwrap();
                assert!((m.beta - c(0.4, -0.2)).norm() < 1e-4, "N={n} eps={eps}: beta {}", m.beta);
            } else {
                assert!(matches!(m, Err(Error::NoBranchFits(_))), "N={n} eps={eps}: {m:?}");
            }
        }
        assert!((rep.z_star - zs).norm() < 1e-6);
    }
}

#[test]
fn monodromy_order_equals_ramification() {
    let settings = ContinuationSettings::default();
    for (n, eps, order) in [(3usize, 1i8, 1usize), (4, 1, 3), (5, 1, 2), (5, -1, 2), (6, 1, 5), (7, -1, 3)] {
        let (eq, s0, zs, _) = random_planted(40 + n as u64, n, eps);
        let m = monodromy(&eq.to_complex(), s0, zs, 0.12, order + 1, &settings).unwrap();
        assert_eq!(m.closes_after(1e-5), Some(order), "N={n}: {:?}", m.deviations);
        for d in &m.deviations[..order - 1] {
            assert!(*d >= 1e-1, "N={n}: {:?}", m.deviations);
        }
    }
}

#[test]
fn monodromy_loop_meeting_a_singularity_fails() {
    // y = 1/(z − 1): a loop of radius 0.5 about 1.4 passes within 0.1 of the pole.
    let eq = EquationSpec::from_int_coeffs(3, &[&[], &[], &[], &[2]]).unwrap().to_complex();
    let z = c(0.0, 0.0);
    let s0 = State::new(z, c(-1.0, 0.0), c(-1.0, 0.0));
    let r = monodromy(&eq, s0, c(1.0, 0.02), 0.5, 1, &ContinuationSettings::default());
    assert!(r.is_ok());
    let r = monodromy(&eq, s0, c(1.5, 0.0), 0.5, 1, &ContinuationSettings::default());
    assert!(matches!(r, Err(Error::LoopEncounter(_))), "{r:?}");
}

#[test]
fn runs_are_deterministic() {
    let settings = ContinuationSettings::default();
    let (eq, s0, _, path) = random_planted(3, 4, 1);
    let a = integrate(&eq.to_complex(), s0, &path, &settings).unwrap();
    let b = integrate(&eq.to_complex(), s0, &path, &settings).unwrap();
    assert_eq!(a, b);
    assert_eq!(locate(&eq, &a, &settings).unwrap(), locate(&eq, &b, &settings).unwrap());
}

fn cubic() -> EquationSpec {
    EquationSpec::from_int_coeffs(3, &[&[], &[], &[], &[2]]).unwrap()
}

#[test]
fn first_integral_drift() {
    let settings = ContinuationSettings::default();
    let s0 = State::new(c(0.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0));
    let path = PathSpec::new(vec![c(0.0, 0.0), c(0.5, 0.8), c(2.0, 0.6), c(2.0, -0.6)]).unwrap();
    let t = integrate(&cubic().to_complex(), s0, &path, &settings).unwrap();
    assert_eq!(t.termination, Termination::Completed);
    assert!(conserved_drift(&cubic(), &t).unwrap() <= 1e-8);

    let shifted = EquationSpec::from_int_coeffs(3, &[&[1], &[], &[], &[2]]).unwrap();
    let s1 = State::new(c(0.0, 0.0), c(0.5, 0.0), c(0.2, 0.1));
    let t = integrate(&shifted.to_complex(), s1, &PathSpec::segment(s1.z, c(0.6, 0.3)).unwrap(), &settings).unwrap();
    assert_eq!(t.termination, Termination::Completed);
    let a = shifted.to_complex().values_at(c(0.0, 0.0));
    let scale = first_integral(&a, s1.y, s1.yp).norm().max(1.0);
    assert!(conserved_drift(&shifted, &t).unwrap() / scale <= 1e-6);

    let p1 = EquationSpec::from_int_coeffs(2, &[&[0, 1], &[], &[6]]).unwrap();
    let t = integrate(&p1.to_complex(), s1, &PathSpec::segment(s1.z, c(0.1, 0.0)).unwrap(), &settings).unwrap();
    assert!(matches!(conserved_drift(&p1, &t), Err(Error::Precondition(_))));
}

fn fan(count: usize, len: f64) -> Vec<PathSpec> {
    (0..count)
        .map(|k| {
            let dir = C::from_polar(len, 2.0 * std::f64::consts::PI * k as f64 / count as f64);
            PathSpec::segment(c(0.0, 0.0), dir).unwrap()
        })
        .collect()
}

#[test]
fn scan_keeps_input_order() {
    // y = 1/(z + 1): only the ray through −1 meets the pole.
    let s0 = State::new(c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0));
    let rays = fan(8, 2.0);
    let settings = ContinuationSettings::default();
    let par = scan(&cubic(), s0, &rays, &settings).unwrap();
    let ser = scan_serial(&cubic(), s0, &rays, &settings).unwrap();
    assert_eq!(par, ser);
    assert_eq!(par.len(), 8);
    for (i, e) in par.iter().enumerate() {
        assert_eq!(e.path_index, i);
        assert!(e.error.is_none(), "{e:?}");
        if i == 4 {
            assert!(e.termination.unwrap().is_encounter());
            let r = e.report.as_ref().unwrap();
            assert!((r.z_star + 1.0).norm() < 1e-8);
        } else {
            assert_eq!(e.termination, Some(Termination::Completed));
            assert!(e.report.is_none());
        }
    }
}

#[test]
fn scan_records_per_path_failures() {
    let s0 = State::new(c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0));
    let bad = PathSpec::segment(c(0.5, 0.0), c(1.0, 0.0)).unwrap();
    let rays = vec![fan(1, 1.0).remove(0), bad];
    let out = scan(&cubic(), s0, &rays, &ContinuationSettings::default()).unwrap();
    assert!(out[0].error.is_none());
    assert!(out[1].error.as_deref().unwrap().contains("invalid path"));
}

/// Mean `z*` error for `y = 1/(z − 1)` started at twelve points on `[−0.55, 0]`.
fn mean_pole_error(rel_tol: f64) -> f64 {
    let eq = cubic();
    let ode = eq.to_complex();
    let settings = ContinuationSettings { rel_tol, abs_tol: 1e-15, ..Default::default() };
    let total: f64 = (0..12)
        .map(|k| {
            let z0 = c(-0.05 * k as f64, 0.0);
            let zeta = z0 - 1.0;
            let s0 = State::new(z0, 1.0 / zeta, -1.0 / (zeta * zeta));
            let t = integrate(&ode, s0, &PathSpec::segment(z0, c(2.0, 0.0)).unwrap(), &settings).unwrap();
            (locate(&eq, &t, &settings).unwrap().z_star - 1.0).norm()
        })
        .sum();
    total / 12.0
}

#[test]
fn halving_the_tolerance_halves_the_error() {
    for tol in [1e-9, 5e-10, 2.5e-10] {
        let (a, b) = (mean_pole_error(tol), mean_pole_error(tol / 2.0));
        assert!(a >= 2.0 * b, "tol {tol:e}: {a:e} -> {b:e}");
    }
}

#[test]
fn encounter_reports_are_serializable() {
    let s0 = State::new(c(0.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0));
    let settings = ContinuationSettings::default();
    let t = integrate(&cubic().to_complex(), s0, &PathSpec::segment(s0.z, c(2.0, 0.0)).unwrap(), &settings).unwrap();
    let r = locate(&cubic(), &t, &settings).unwrap();
    let js = serde_json::to_string(&r).unwrap();
    let back: SingularityReport = serde_json::from_str(&js).unwrap();
    assert_eq!(back, r);
    let unavailable = SingularityReport { residual: f64::NAN, ..r };
    let js = serde_json::to_string(&unavailable).unwrap();
    assert!(js.contains("\"residual\":null"), "{js}");
    let back: SingularityReport = serde_json::from_str(&js).unwrap();
    assert!(back.residual.is_nan());
    let js = serde_json::to_string(&t).unwrap();
    let back: Trajectory = serde_json::from_str(&js).unwrap();
    assert_eq!(back.samples.len(), t.samples.len());
}

#[test]
fn locate_needs_an_encounter() {
    let s0 = State::new(c(0.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0));
    let settings = ContinuationSettings::default();
    let t = integrate(&cubic().to_complex(), s0, &PathSpec::segment(s0.z, c(0.5, 0.0)).unwrap(), &settings).unwrap();
    assert!(locate(&cubic(), &t, &settings).is_err());
}

#[test]
fn non_canonical_equation_is_located_through_the_transform() {
    // y'' = 6y³ is solved by y = 1/(√3 (z − 1)).
    let eq = EquationSpec::from_int_coeffs(3, &[&[], &[], &[], &[6]]).unwrap();
    let k = 1.0 / 3f64.sqrt();
    let z0 = c(0.0, 0.0);
    let zeta = z0 - 1.0;
    let s0 = State::new(z0, k / zeta, -k / (zeta * zeta));
    let settings = ContinuationSettings::default();
    let t = integrate(&eq.to_complex(), s0, &PathSpec::segment(z0, c(2.0, 0.0)).unwrap(), &settings).unwrap();
    let r = locate(&eq, &t, &settings).unwrap();
    assert!((r.z_star - 1.0).norm() < 1e-8, "{r:?}");
    assert_eq!(r.method, Method::UvChart);
}
