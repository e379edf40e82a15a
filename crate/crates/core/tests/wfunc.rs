mod common;

use common::*;
use proptest::prelude::*;
use psent::continuation::{integrate, ContinuationSettings, PathSpec, State, Termination};
use psent::expansion::{expand, BranchClass};
use psent::wfunc::{UvChart, WFunction};

fn w_after(ode: &psent::equation::ComplexEquation, w: &WFunction<psent::series::Poly<Q>>, s: State, dz: C) -> C {
    let settings = ContinuationSettings { rel_tol: 1e-12, abs_tol: 1e-12, ..Default::default() };
    let t = integrate(ode, s, &PathSpec::segment(s.z, s.z + dz).unwrap(), &settings).unwrap();
    assert_eq!(t.termination, Termination::Completed);
    let e = t.last_state();
    w.eval_w(e.z, e.y, e.yp).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// `dW/dz = −PW + Qy' + R + S` along solutions, whether or not the
    /// resonance conditions hold.
    #[test]
    fn derivative_identity_along_solutions(
        seed in any::<u64>(),
        n in 2usize..8,
        passing in prop::bool::ANY,
        y in 0.5f64..2.0,
        yp in -1.0f64..1.0,
    ) {
        let mut r = rng(seed);
        let lower = if passing { passing_lower(&mut r, n, 2, 2) } else { (0..n - 1).map(|_| rand_poly(&mut r, 2, 2)).collect() };
        let canon = canon_exact(n, lower);
        let ode = canon.to_spec().to_complex();
        let w = WFunction::new(canon);
        let s = State::new(c(0.1, 0.2), c(y, 0.3), c(yp, -0.2));
        let predicted = w.predicted_dw(s.z, s.y, s.yp).unwrap();
        let d = |h: f64| {
            let dz = C::from_polar(h, 0.7);
            (w_after(&ode, &w, s, dz) - w_after(&ode, &w, s, -dz)) / (2.0 * dz)
        };
        let h = 2e-3;
        let rich = (4.0 * d(h / 2.0) - d(h)) / 3.0;
        let scale = predicted.norm().max(w.eval_w(s.z, s.y, s.yp).unwrap().norm()).max(1.0);
        prop_assert!((rich - predicted).norm() < 1e-6 * scale, "fd {} vs {}", rich, predicted);
    }

    #[test]
    fn chart_roundtrip_near_singularity(seed in any::<u64>(), n in 2usize..8, eps_plus in prop::bool::ANY, r0 in 1e-9f64..1e-5, ang in -3.0f64..3.0) {
        let mut r = rng(seed);
        let canon = canon_exact(n, passing_lower(&mut r, n, 1, 2));
        let fc = psent::canonical::CanonicalEquation::from_lower(n, canon.lower().iter().map(|p| p.to_complex()).collect()).unwrap();
        let branch = BranchClass::for_degree(n, if eps_plus { 1 } else { -1 }).unwrap();
        let zs = c(0.2, -0.1);
        let e = expand(&fc, &zs, branch, c(0.5, 0.0), 8 * (n - 1)).unwrap();
        let z = zs + C::from_polar(r0, ang);
        let (y, yp) = e.eval_state(z, 0).unwrap();
        let w = WFunction::new(canon);
        let (chart, st) = UvChart::new(n, 1).from_state(&w, z, y, yp, 10.0).unwrap();
        prop_assert_eq!(chart.eps, branch.eps());
        let (y1, yp1) = chart.to_state(&w, &st).unwrap();
        prop_assert!((y1 - y).norm() <= 1e-10 * y.norm());
        prop_assert!((yp1 - yp).norm() <= 1e-8 * yp.norm());
        // |u|^m ≈ |z − z*| with m the ramification.
        let ratio = st.u.norm().powi(chart.ramification() as i32) / r0;
        prop_assert!((ratio - 1.0).abs() < 0.2, "|u|^m / |ζ| = {}", ratio);
    }
}

#[test]
fn constant_coefficient_w_is_conserved() {
    let settings = ContinuationSettings::default();
    for n in 2..=7 {
        let canon = canon_exact(n, (0..n - 1).map(|k| psent::series::Poly::constant(q(k as i64 + 1, 3))).collect());
        let ode = canon.to_spec().to_complex();
        let w = WFunction::new(canon);
        let s = State::new(c(0.0, 0.0), c(0.4, 0.1), c(0.2, 0.0));
        let t = integrate(&ode, s, &PathSpec::segment(s.z, c(0.5, 0.5)).unwrap(), &settings).unwrap();
        let w0 = w.eval_w(s.z, s.y, s.yp).unwrap();
        for smp in &t.samples {
            assert!((w.eval_w(smp.z, smp.y, smp.yp).unwrap() - w0).norm() < 1e-8, "N={n}");
        }
    }
}
