//! Scalar types shared by the symbolic and numeric layers.
//!
//! [`ExactScalar`] is a Gaussian rational used whenever a "≡ 0" condition has
//! to be decided exactly. `Complex64` is the floating counterpart used by the
//! continuation code and by canonicalization (which needs fractional powers).
//! Conversion from exact to floating is explicit via [`Scalar::to_complex`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ParseError;

/// Relative threshold below which a floating quantity counts as zero when a
/// verdict has to be issued in float mode.
pub const FLOAT_ZERO_RTOL: f64 = 1e-10;

/// Field operations required by the series and analysis modules.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn imag_unit() -> Self;
    fn is_zero(&self) -> bool;
    fn to_complex(&self) -> Complex64;
    /// True for exact arithmetic, where zero tests are certificates.
    fn is_exact() -> bool;
    /// Lossless import of a floating value; `None` for exact types.
    fn try_from_complex(c: Complex64) -> Option<Self>;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn magnitude(&self) -> f64 {
        self.to_complex().norm()
    }

    /// Zero test used for verdicts: exact equality in exact mode, relative
    /// to `scale` in float mode.
    fn negligible(&self, scale: f64) -> bool {
        if Self::is_exact() {
            self.is_zero()
        } else {
            self.magnitude() <= FLOAT_ZERO_RTOL * scale.max(f64::MIN_POSITIVE)
        }
    }

    fn powi(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base.clone();
            }
            n >>= 1;
            if n > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
    fn try_from_complex(c: Complex64) -> Option<Self> {
        Some(c)
    }
}

/// Gaussian rational `re + i·im` with both parts in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactScalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        ExactScalar { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        ExactScalar { re, im: BigRational::zero() }
    }

    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        ExactScalar {
            re: BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            im: BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        }
    }

    pub fn conj(&self) -> Self {
        ExactScalar { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Parses a pair of rational strings such as `("3/4", "-1")`.
    pub fn parse_pair(re: &str, im: &str) -> Result<Self, ParseError> {
        Ok(ExactScalar { re: parse_rational(re)?, im: parse_rational(im)? })
    }

    /// The `[re, im]` rational strings used by the equation file format.
    pub fn to_string_pair(&self) -> [String; 2] {
        [rational_to_string(&self.re), rational_to_string(&self.im)]
    }
}

pub fn rational_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"p"`, `"p/q"` (optionally signed) into a normalized rational.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseError> {
    let s = s.trim();
    let bad = || ParseError::Rational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    if num.is_empty() || den.is_empty() {
        return Err(bad());
    }
    let n = BigInt::from_str(num).map_err(|_| bad())?;
    let d = BigInt::from_str(den).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: fall back to scaled division.
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", rational_to_string(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{}i", rational_to_string(&self.im))
        } else {
            let sign = if self.im.is_negative() { "-" } else { "+" };
            write!(f, "{}{}{}i", rational_to_string(&self.re), sign, rational_to_string(&self.im.abs()))
        }
    }
}

impl Add for ExactScalar {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ExactScalar { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for ExactScalar {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        ExactScalar { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for ExactScalar {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return ExactScalar::real(self.re * o.re);
        }
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        ExactScalar { re, im }
    }
}

impl Div for ExactScalar {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        assert!(!o.is_zero(), "division by exact zero");
        if o.im.is_zero() {
            return ExactScalar { re: self.re / &o.re, im: self.im / &o.re };
        }
        let d = o.norm_sqr();
        let num = self * o.conj();
        ExactScalar { re: num.re / &d, im: num.im / d }
    }
}

impl Neg for ExactScalar {
    type Output = Self;
    fn neg(self) -> Self {
        ExactScalar { re: -self.re, im: -self.im }
    }
}

impl Scalar for ExactScalar {
    fn zero() -> Self {
        ExactScalar { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn one() -> Self {
        ExactScalar { re: BigRational::one(), im: BigRational::zero() }
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        ExactScalar::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
    fn imag_unit() -> Self {
        ExactScalar { re: BigRational::zero(), im: BigRational::one() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn is_exact() -> bool {
        true
    }
    fn try_from_complex(_: Complex64) -> Option<Self> {
        None
    }
}

/// Principal `n`-th root: `|x|^{1/n} exp(i Arg(x)/n)` with `Arg ∈ (−π, π]`.
pub fn principal_root(x: Complex64, n: u32) -> Complex64 {
    if x.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = x.norm().powf(1.0 / n as f64);
    let arg = principal_arg(x) / n as f64;
    if arg == 0.0 {
        Complex64::new(r, 0.0)
    } else {
        Complex64::from_polar(r, arg)
    }
}

/// Argument in `(−π, π]`; `atan2` returns `−π` for `(−x, −0.0)`, which is
/// folded back onto `π`.
pub fn principal_arg(x: Complex64) -> f64 {
    let a = x.im.atan2(x.re);
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::from_ratio(n, d)
    }

    #[test]
    fn gaussian_field_ops() {
        let a = ExactScalar::from_parts(1, 2, 3, 1);
        let b = ExactScalar::from_parts(-2, 1, 1, 3);
        let p = a.clone() * b.clone();
        assert_eq!(p.clone() / b.clone(), a);
        assert_eq!((a.clone() + b.clone()) - b, a);
        assert_eq!(ExactScalar::imag_unit().powi(2), q(-1, 1));
    }

    #[test]
    fn parse_and_print() {
        let x = ExactScalar::parse_pair("6/4", "-2").unwrap();
        assert_eq!(x.to_string_pair(), ["3/2".to_string(), "-2".to_string()]);
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/3").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(format!("{}", x), "3/2-2i");
    }

    #[test]
    fn principal_root_branch() {
        let r = principal_root(Complex64::new(8.0, 0.0), 3);
        assert!((r - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let r = principal_root(Complex64::new(-1.0, 0.0), 2);
        assert!((r - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let r = principal_root(Complex64::new(-1.0, -0.0), 2);
        assert!((r - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(principal_root(Complex64::new(1.0, 0.0), 5), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn float_negligible_is_relative() {
        let x = Complex64::new(1e-12, 0.0);
        assert!(x.negligible(1.0));
        assert!(!x.negligible(1e-4));
        assert!(!q(1, 1_000_000_000).negligible(1e30));
    }
}
