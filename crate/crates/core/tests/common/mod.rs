#![allow(dead_code)]

use num_complex::Complex64;
use psent::canonical::CanonicalEquation;
use psent::continuation::State;
use psent::equation::EquationSpec;
use psent::expansion::{expand, BranchClass};
use psent::series::Poly;
use psent::{ExactScalar, Scalar};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Q = ExactScalar;
pub type C = Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

pub fn rand_scalar<R: Rng>(rng: &mut R, bound: i64) -> Q {
    let re = rng.gen_range(-bound..=bound);
    let im = if rng.gen_bool(0.3) { rng.gen_range(-bound..=bound) } else { 0 };
    Q::from_parts(re, rng.gen_range(1..=4), im, rng.gen_range(1..=4))
}

/// Random polynomial of degree at most `deg`.
pub fn rand_poly<R: Rng>(rng: &mut R, deg: usize, bound: i64) -> Poly<Q> {
    Poly::new((0..=deg).map(|_| rand_scalar(rng, bound)).collect())
}

pub fn constant(c: Q) -> Poly<Q> {
    Poly::constant(c)
}

/// Lower coefficients `a_0..a_{N−2}` of a random canonical equation with
/// `a_{N−2}` linear; for odd `N ≤ 7` the second condition is imposed through
/// its closed form.
pub fn passing_lower<R: Rng>(rng: &mut R, n: usize, deg: usize, bound: i64) -> Vec<Poly<Q>> {
    build_lower(rng, n, deg, bound, true, true)
}

/// Random canonical equation; each condition holds with probability ½.
pub fn mixed_lower<R: Rng>(rng: &mut R, n: usize) -> (Vec<Poly<Q>>, bool, bool) {
    let first = rng.gen_bool(0.5);
    let second = rng.gen_bool(0.5);
    (build_lower(rng, n, 2, 3, first, second), first, second)
}

fn build_lower<R: Rng>(rng: &mut R, n: usize, deg: usize, bound: i64, first: bool, second: bool) -> Vec<Poly<Q>> {
    let mut a: Vec<Poly<Q>> = (0..n - 1).map(|_| rand_poly(rng, deg, bound)).collect();
    a[n - 2] = rand_poly(rng, 1, bound);
    if !first {
        a[n - 2] = a[n - 2].add(&Poly::monomial(rand_nonzero(rng), 2));
    }
    match n {
        3 => a[0] = constant(rand_scalar(rng, bound)),
        5 => a[1] = a[3].mul(&a[3]).scale(&q(1, 4)).add(&constant(rand_scalar(rng, bound))),
        7 => a[2] = a[4].mul(&a[5]).scale(&q(9, 10)).add(&constant(rand_scalar(rng, bound))),
        _ => {}
    }
    if !second && n % 2 == 1 {
        let k = (n - 3) / 2;
        a[k] = a[k].add(&Poly::monomial(rand_nonzero(rng), 1));
    }
    a
}

pub fn rand_nonzero<R: Rng>(rng: &mut R) -> Q {
    loop {
        let c = rand_scalar(rng, 3);
        if !c.is_zero() {
            return c;
        }
    }
}

pub fn canon_exact(n: usize, lower: Vec<Poly<Q>>) -> CanonicalEquation<Poly<Q>> {
    CanonicalEquation::from_lower(n, lower).unwrap()
}

pub fn canon_complex(eq: &EquationSpec) -> CanonicalEquation<Poly<C>> {
    let canon = CanonicalEquation::from_spec(eq).unwrap();
    CanonicalEquation::from_lower(eq.degree(), canon.lower().iter().map(|p| p.to_complex()).collect()).unwrap()
}

/// Initial state at `start` taken from the truncated formal solution about
/// `z_star`.
pub fn planted(eq: &EquationSpec, branch: BranchClass, z_star: C, beta: C, start: C) -> State {
    let n = eq.degree();
    let e = expand(&canon_complex(eq), &z_star, branch, beta, 40 * (n - 1)).unwrap();
    let (y, yp) = e.eval_state(start, 0).unwrap();
    State::new(start, y, yp)
}

/// `y'' = 2(N+1)/(N−1)² y^N`.
pub fn monomial(n: usize) -> EquationSpec {
    EquationSpec::canonical(n, vec![Poly::zero(); n - 1]).unwrap()
}

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}
