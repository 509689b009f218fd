use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// `r + s·√3` with rational `r`, `s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QuadExt {
    pub r: Rational,
    pub s: Rational,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl QuadExt {
    pub fn new(r: Rational, s: Rational) -> Self {
        Self { r, s }
    }

    pub fn rational(r: Rational) -> Self {
        Self { r, s: Rational::zero() }
    }

    pub fn from_int(v: i64) -> Self {
        Self::rational(Rational::from_integer(BigInt::from(v)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `√3`.
    pub fn sqrt3() -> Self {
        Self { r: Rational::zero(), s: Rational::one() }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.s.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.s.is_zero()
    }

    pub fn signum(&self) -> i32 {
        qsign(self)
    }

    /// `r - s√3`.
    pub fn conjugate(&self) -> Self {
        Self { r: self.r.clone(), s: -self.s.clone() }
    }

    /// Field norm `r² - 3s²`; zero only for zero.
    pub fn norm(&self) -> Rational {
        &self.r * &self.r - Rational::from_integer(BigInt::from(3)) * &self.s * &self.s
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self { r: &self.r * k, s: &self.s * k }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let norm = other.norm();
        let num = self * &other.conjugate();
        Ok(Self { r: num.r / &norm, s: num.s / norm })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one().checked_div(self)
    }

    pub fn apply(&self, op: FieldOp, other: &Self) -> Result<Self> {
        Ok(match op {
            FieldOp::Add => self + other,
            FieldOp::Sub => self - other,
            FieldOp::Mul => self * other,
            FieldOp::Div => self.checked_div(other)?,
        })
    }

    /// Nearest `f64`, for floating assembly and diagnostics only.
    pub fn to_f64(&self) -> f64 {
        let r = self.r.to_f64().unwrap_or(f64::NAN);
        let s = self.s.to_f64().unwrap_or(f64::NAN);
        r + s * 3f64.sqrt()
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match qsign(&(self - other)) {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

fn rsign(q: &Rational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// Exact sign of `r + s√3`.
pub fn qsign(q: &QuadExt) -> i32 {
    let (sr, ss) = (rsign(&q.r), rsign(&q.s));
    if ss == 0 {
        return sr;
    }
    if sr == 0 || sr == ss {
        return ss;
    }
    // Opposite signs: |r| vs |s|√3.
    let r2 = &q.r * &q.r;
    let s2 = Rational::from_integer(BigInt::from(3)) * &q.s * &q.s;
    match r2.cmp(&s2) {
        Ordering::Greater => sr,
        Ordering::Less => ss,
        Ordering::Equal => 0,
    }
}

impl PartialOrd for QuadExt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: &QuadExt) -> QuadExt {
                (&self).$method(rhs)
            }
        }
        impl $trait<QuadExt> for &QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                self.$method(&rhs)
            }
        }
    };
}

impl Add<&QuadExt> for &QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: &QuadExt) -> QuadExt {
        QuadExt { r: &self.r + &rhs.r, s: &self.s + &rhs.s }
    }
}

impl Sub<&QuadExt> for &QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: &QuadExt) -> QuadExt {
        QuadExt { r: &self.r - &rhs.r, s: &self.s - &rhs.s }
    }
}

impl Mul<&QuadExt> for &QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: &QuadExt) -> QuadExt {
        let three = Rational::from_integer(BigInt::from(3));
        QuadExt {
            r: &self.r * &rhs.r + three * &self.s * &rhs.s,
            s: &self.r * &rhs.s + &self.s * &rhs.r,
        }
    }
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&QuadExt> for QuadExt {
    fn add_assign(&mut self, rhs: &QuadExt) {
        self.r += &rhs.r;
        self.s += &rhs.s;
    }
}

impl SubAssign<&QuadExt> for QuadExt {
    fn sub_assign(&mut self, rhs: &QuadExt) {
        self.r -= &rhs.r;
        self.s -= &rhs.s;
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt { r: -self.r, s: -self.s }
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt { r: -self.r.clone(), s: -self.s.clone() }
    }
}

impl From<Rational> for QuadExt {
    fn from(r: Rational) -> Self {
        Self::rational(r)
    }
}

impl From<i64> for QuadExt {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

fn fmt_rational(q: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

/// Text form `p/q`, `p/q+r/s*z` or `p/q-r/s*z` (`z` = √3); integers are
/// written without `/1`.
impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_rational(&self.r, f)?;
        if !self.s.is_zero() {
            f.write_str(if self.s.is_negative() { "-" } else { "+" })?;
            fmt_rational(&self.s.abs(), f)?;
            f.write_str("*z")?;
        }
        Ok(())
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let is_int = |t: &str, signed: bool| {
        let digits = if signed { t.strip_prefix(['+', '-']).unwrap_or(t) } else { t };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !is_int(num, true) || !is_int(den, false) {
        return Err(bad());
    }
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

impl FromStr for QuadExt {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        let Some(body) = t.strip_suffix("*z") else {
            return Ok(Self::rational(parse_rational(t)?));
        };
        // The irrational coefficient starts at the last sign after position 0.
        match body.char_indices().rev().find(|&(i, c)| i > 0 && (c == '+' || c == '-')) {
            Some((i, _)) => {
                let r = parse_rational(&body[..i])?;
                let s = parse_rational(&body[i..])?;
                Ok(Self { r, s })
            }
            None => Ok(Self { r: Rational::zero(), s: parse_rational(body)? }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QuadExt {
        s.parse().unwrap()
    }

    #[test]
    fn sign_examples() {
        assert_eq!(qsign(&q("0")), 0);
        assert_eq!(qsign(&q("-2+1*z")), -1);
        assert_eq!(qsign(&q("-3+2*z")), 1);
        assert_eq!(qsign(&q("2-1*z")), 1);
        assert_eq!(qsign(&q("-5/3")), -1);
        assert_eq!(qsign(&q("0-1/7*z")), -1);
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(q("1+1*z") * q("1-1*z"), q("-2"));
        assert_eq!(QuadExt::sqrt3() * QuadExt::sqrt3(), q("3"));
        assert_eq!(q("1").checked_div(&q("2+1*z")).unwrap(), q("2-1*z"));
        assert!(matches!(q("1").checked_div(&q("0")), Err(Error::DivisionByZero)));
        assert_eq!(q("3/4+1/2*z").apply(FieldOp::Sub, &q("3/4")).unwrap(), q("0+1/2*z"));
    }

    #[test]
    fn text_syntax() {
        for s in ["0", "-7", "3043753/35", "2188885+6744*z", "-331211+104766*z", "2364069/352+59879/160*z", "5-1/3*z"] {
            assert_eq!(q(s).to_string(), s);
        }
        assert_eq!(q("54083-1*z"), QuadExt::from_int(54083) - QuadExt::sqrt3());
        assert_eq!(q("7/2*z"), QuadExt::new(Rational::zero(), parse_rational("7/2").unwrap()));
        assert_eq!(q("4/6"), q("2/3"));
        for bad in ["", "1/0", "a", "1+*z", "1/-2", "1.5"] {
            assert!(bad.parse::<QuadExt>().is_err(), "{bad}");
        }
    }
}
