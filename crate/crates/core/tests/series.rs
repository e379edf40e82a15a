mod common;

use common::*;
use proptest::prelude::*;
use psent::series::{Poly, PuiseuxSeries, TaylorSeries};
use psent::Scalar;

fn scalar() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=5, -6i64..=6, 1i64..=5).prop_map(|(a, b, c, d)| Q::from_parts(a, b, c, d))
}

fn poly() -> impl Strategy<Value = Poly<Q>> {
    prop::collection::vec(scalar(), 0..5).prop_map(Poly::new)
}

fn puiseux(ram: u32) -> impl Strategy<Value = PuiseuxSeries<Q>> {
    (-3i64..3, prop::collection::vec(scalar(), 0..5))
        .prop_map(move |(start, c)| PuiseuxSeries::new(q(1, 2), ram, start, c, None))
}

fn taylor() -> impl Strategy<Value = TaylorSeries<Q>> {
    prop::collection::vec(scalar(), 6).prop_map(|c| TaylorSeries::truncated(q(0, 1), c))
}

proptest! {
    #[test]
    fn poly_ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        prop_assert_eq!(a.mul(&Poly::constant(q(1, 1))), a.clone());
    }

    #[test]
    fn poly_calculus(a in poly(), b in poly()) {
        prop_assert_eq!(a.mul(&b).derivative(), a.derivative().mul(&b).add(&a.mul(&b.derivative())));
        prop_assert_eq!(a.antiderivative().derivative(), a.clone());
    }

    #[test]
    fn poly_taylor_shift(a in poly(), z in scalar(), w in scalar()) {
        let t = TaylorSeries::exact(z.clone(), a.taylor_coeffs(&z));
        prop_assert_eq!(t.eval_offset(&(w.clone() - z)), a.eval(&w));
    }

    #[test]
    fn puiseux_ring_axioms(a in puiseux(3), b in puiseux(3), c in puiseux(3)) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn puiseux_leibniz(a in puiseux(2), b in puiseux(2)) {
        let lhs = a.mul(&b).unwrap().differentiate();
        let rhs = a.differentiate().mul(&b).unwrap().add(&a.mul(&b.differentiate()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn puiseux_ramification_lift(a in puiseux(2), b in puiseux(3)) {
        let a6 = a.with_ramification(6).unwrap();
        let b6 = b.with_ramification(6).unwrap();
        let p = a.mul(&b).unwrap();
        prop_assert_eq!(p, a6.mul(&b6).unwrap());
        let t = c(0.3, 0.2);
        let z = q(1, 2).to_complex() + t.powi(6);
        let lhs = a6.eval(z, 0).unwrap();
        let rhs = a.eval(z, 0).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn puiseux_int_pow(a in puiseux(2), n in 0u32..4) {
        let mut r = PuiseuxSeries::one(q(1, 2), 2);
        for _ in 0..n {
            r = r.mul(&a).unwrap();
        }
        prop_assert_eq!(a.int_pow(n), r);
    }

    #[test]
    fn taylor_reciprocal(a in taylor()) {
        prop_assume!(!a.coeff(0).is_zero());
        let one = a.mul(&a.reciprocal());
        prop_assert_eq!(one.coeff(0), q(1, 1));
        for k in 1..=5 {
            prop_assert!(one.coeff(k).is_zero());
        }
    }

    #[test]
    fn taylor_reversion_roundtrip(a in taylor()) {
        let mut c = a.coeffs().to_vec();
        c[0] = q(0, 1);
        prop_assume!(!c[1].is_zero());
        let w = TaylorSeries::truncated(q(0, 1), c);
        let inv = w.reversion();
        let id = inv.compose(&w);
        prop_assert_eq!(id.coeff(1), q(1, 1));
        for k in [0usize, 2, 3, 4, 5] {
            prop_assert!(id.coeff(k).is_zero());
        }
    }

    #[test]
    fn taylor_recenter_agrees(a in taylor(), s in scalar()) {
        let moved = a.recenter(&s);
        let z = s.to_complex() + c(0.01, -0.02);
        let exact = a.eval_complex(z);
        prop_assert!((moved.eval_complex(z) - exact).norm() <= 1e-9 * (1.0 + exact.norm()));
    }
}

#[test]
fn truncation_orders_propagate() {
    let a = TaylorSeries::truncated(q(0, 1), vec![q(1, 1), q(2, 1), q(3, 1)]);
    let b = TaylorSeries::truncated(q(0, 1), vec![q(1, 1), q(1, 1)]);
    assert_eq!(a.mul(&b).order(), Some(1));
    assert_eq!(a.derivative().order(), Some(1));
    let p = PuiseuxSeries::new(q(0, 1), 2, -1, vec![q(1, 1), q(1, 1)], Some(3));
    let e = PuiseuxSeries::monomial(q(0, 1), 2, q(1, 1), -2);
    assert_eq!(p.mul(&e).unwrap().order(), Some(1));
}

#[test]
fn sheets_of_square_root() {
    let s = PuiseuxSeries::monomial(q(0, 1), 2, q(1, 1), 1);
    let z = c(-4.0, 0.0);
    let a = s.eval(z, 0).unwrap();
    let b = s.eval(z, 1).unwrap();
    assert!((a - c(0.0, 2.0)).norm() < 1e-14);
    assert!((a + b).norm() < 1e-14);
}
