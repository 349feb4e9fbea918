//! Coefficient fields used by jets.
//!
//! Two numeric modes are supported and never mixed inside one computation:
//! exact arithmetic in the real quadratic field ℚ(√5) (which contains ℚ and the
//! golden ratio), and IEEE doubles. Complex extensions of both are available
//! for the complex-Morse coordinates used by the Birkhoff normalization.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse coefficient `{0}`")]
pub struct ParseScalarError(pub String);

/// A commutative field of jet coefficients.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// `true` when equality tests are exact (no rounding).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
    /// Complex value as a double-precision approximation.
    fn to_c64(&self) -> Complex64;
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    fn parse_str(s: &str) -> Result<Self, ParseScalarError>;
    /// Text form accepted back by [`Scalar::parse_str`].
    fn to_text(&self) -> String {
        self.to_string()
    }

    /// Tolerance used when deciding numerical rank or ideal membership.
    fn tolerance() -> f64 {
        if Self::EXACT {
            0.0
        } else {
            1e-12
        }
    }

    /// Zero test honoring [`Scalar::tolerance`].
    fn is_negligible(&self) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= Self::tolerance()
        }
    }
}

/// Ordered real fields.
pub trait RealScalar: Scalar + PartialOrd {
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

/// Fields containing a square root of −1.
pub trait ComplexScalar: Scalar {
    type Real: RealScalar;
    fn i() -> Self;
    fn from_real(r: Self::Real) -> Self;
    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn magnitude(&self) -> f64 {
        f64::abs(*self)
    }
    fn parse_str(s: &str) -> Result<Self, ParseScalarError> {
        let s = s.trim();
        if let Some(v) = parse_sqrt5_float(s) {
            return Ok(v);
        }
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| ParseScalarError(s.into()))?;
            let d: f64 = d.trim().parse().map_err(|_| ParseScalarError(s.into()))?;
            return Ok(n / d);
        }
        s.parse().map_err(|_| ParseScalarError(s.into()))
    }
}

impl RealScalar for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
}

fn parse_sqrt5_float(s: &str) -> Option<f64> {
    if !s.contains("sqrt5") {
        return None;
    }
    QSqrt5::parse_str(s).ok().map(|q| q.to_f64())
}

/// Element `a + b√5` of the real quadratic field ℚ(√5), with exact rational parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QSqrt5 {
    pub a: BigRational,
    pub b: BigRational,
}

impl QSqrt5 {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Self { a, b }
    }

    pub fn rational(a: BigRational) -> Self {
        Self { a, b: BigRational::zero() }
    }

    pub fn integer(v: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(v)))
    }

    /// The golden ratio (1+√5)/2.
    pub fn golden() -> Self {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        Self { a: half.clone(), b: half }
    }

    pub fn sqrt5() -> Self {
        Self { a: BigRational::zero(), b: BigRational::one() }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Field conjugate `a − b√5`.
    pub fn conj(&self) -> Self {
        Self { a: self.a.clone(), b: -self.b.clone() }
    }

    /// Norm `a² − 5b²` (nonzero for nonzero elements).
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(BigInt::from(5)) * &self.b * &self.b
    }

    pub fn recip(&self) -> Self {
        let n = self.norm();
        Self { a: &self.a / &n, b: -(&self.b / &n) }
    }

    fn signum_i(&self) -> i32 {
        let sa = sign(&self.a);
        let sb = sign(&self.b);
        if sa >= 0 && sb >= 0 {
            return if sa == 0 && sb == 0 { 0 } else { 1 };
        }
        if sa <= 0 && sb <= 0 {
            return -1;
        }
        // mixed signs: compare a² with 5b²
        let a2 = &self.a * &self.a;
        let b2 = BigRational::from_integer(BigInt::from(5)) * &self.b * &self.b;
        let c = match a2.cmp(&b2) {
            Ordering::Greater => 1,
            Ordering::Less => -1,
            Ordering::Equal => 0,
        };
        if sa > 0 {
            c
        } else {
            -c
        }
    }
}

fn sign(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // very large numerators/denominators: fall back to ratio of logs
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn parse_rational(s: &str) -> Result<BigRational, ParseScalarError> {
    let s = s.trim();
    let err = || ParseScalarError(s.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Ok(BigRational::from_integer(n));
    }
    // decimal literal, converted exactly from its decimal expansion
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let mut num = BigInt::from_str(&digits).map_err(|_| err())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

impl Scalar for QSqrt5 {
    const EXACT: bool = true;
    fn zero() -> Self {
        Self { a: BigRational::zero(), b: BigRational::zero() }
    }
    fn one() -> Self {
        Self::integer(1)
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn from_i64(v: i64) -> Self {
        Self::integer(v)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64(), 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    /// Accepts `a`, `b*sqrt5`, `a+b*sqrt5` or `a-b*sqrt5` with rational or
    /// decimal `a`, `b`.
    fn parse_str(s: &str) -> Result<Self, ParseScalarError> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let err = || ParseScalarError(s.to_string());
        if !t.contains("sqrt5") {
            return Ok(Self::rational(parse_rational(&t)?));
        }
        // split at the sign that starts the surd term (skip exponent signs)
        let bytes = t.as_bytes();
        let surd_start = t.find("sqrt5").ok_or_else(err)?;
        let mut split = 0usize;
        for idx in (1..surd_start).rev() {
            let c = bytes[idx] as char;
            if (c == '+' || c == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
                split = idx;
                break;
            }
        }
        let (a_str, b_str) = t.split_at(split);
        let a = if a_str.is_empty() { BigRational::zero() } else { parse_rational(a_str)? };
        let b_body = b_str.trim_end_matches("sqrt5").trim_end_matches('*');
        let b = match b_body {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other.trim_start_matches('+'))?,
        };
        Ok(Self { a, b })
    }
}

impl RealScalar for QSqrt5 {
    fn to_f64(&self) -> f64 {
        rat_to_f64(&self.a) + rat_to_f64(&self.b) * 5f64.sqrt()
    }
}

impl PartialOrd for QSqrt5 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QSqrt5 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).signum_i().cmp(&0)
    }
}

impl fmt::Debug for QSqrt5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QSqrt5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let mag = self.b.abs();
        let surd = if mag.is_one() { "sqrt5".to_string() } else { format!("{mag}*sqrt5") };
        let sign = if self.b.is_negative() { "-" } else { "+" };
        if self.a.is_zero() {
            write!(f, "{}{surd}", if self.b.is_negative() { "-" } else { "" })
        } else {
            write!(f, "{}{sign}{surd}", self.a)
        }
    }
}

impl Add for QSqrt5 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { a: self.a + o.a, b: self.b + o.b }
    }
}

impl Sub for QSqrt5 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { a: self.a - o.a, b: self.b - o.b }
    }
}

impl Mul for QSqrt5 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.b.is_zero() && o.b.is_zero() {
            return Self::rational(self.a * o.a);
        }
        let five = BigRational::from_integer(BigInt::from(5));
        Self {
            a: &self.a * &o.a + five * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl Div for QSqrt5 {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        if self.b.is_zero() && o.b.is_zero() {
            return Self::rational(self.a / o.a);
        }
        self * o.recip()
    }
}

impl Rem for QSqrt5 {
    type Output = Self;
    fn rem(self, _o: Self) -> Self {
        // every nonzero element is a unit
        <Self as Scalar>::zero()
    }
}

impl Neg for QSqrt5 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { a: -self.a, b: -self.b }
    }
}

impl Zero for QSqrt5 {
    fn zero() -> Self {
        <Self as Scalar>::zero()
    }
    fn is_zero(&self) -> bool {
        <Self as Scalar>::is_zero(self)
    }
}

impl One for QSqrt5 {
    fn one() -> Self {
        <Self as Scalar>::one()
    }
}

impl Num for QSqrt5 {
    type FromStrRadixErr = ParseScalarError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ParseScalarError> {
        if radix != 10 {
            return Err(ParseScalarError(s.to_string()));
        }
        Self::parse_str(s)
    }
}

impl FromPrimitive for QSqrt5 {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Self::integer(n))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Self::rational(BigRational::from_integer(BigInt::from(n))))
    }
    fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Self::rational)
    }
}

impl<T> Scalar for Complex<T>
where
    T: RealScalar + Num + Neg<Output = T>,
{
    const EXACT: bool = T::EXACT;
    fn zero() -> Self {
        Complex::new(<T as Scalar>::zero(), <T as Scalar>::zero())
    }
    fn one() -> Self {
        Complex::new(<T as Scalar>::one(), <T as Scalar>::zero())
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(&self.re) && Scalar::is_zero(&self.im)
    }
    fn from_i64(v: i64) -> Self {
        Complex::new(<T as Scalar>::from_i64(v), <T as Scalar>::zero())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(<T as Scalar>::from_ratio(num, den), <T as Scalar>::zero())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
    /// Accepts `re` or `re;im`.
    fn parse_str(s: &str) -> Result<Self, ParseScalarError> {
        match s.split_once(';') {
            Some((re, im)) => Ok(Complex::new(T::parse_str(re)?, T::parse_str(im)?)),
            None => Ok(Complex::new(T::parse_str(s)?, <T as Scalar>::zero())),
        }
    }
    fn to_text(&self) -> String {
        if Scalar::is_zero(&self.im) {
            self.re.to_text()
        } else {
            format!("{};{}", self.re.to_text(), self.im.to_text())
        }
    }
}

impl<T> ComplexScalar for Complex<T>
where
    T: RealScalar + Num + Neg<Output = T>,
{
    type Real = T;
    fn i() -> Self {
        Complex::new(<T as Scalar>::zero(), <T as Scalar>::one())
    }
    fn from_real(r: T) -> Self {
        Complex::new(r, <T as Scalar>::zero())
    }
    fn re(&self) -> T {
        self.re.clone()
    }
    fn im(&self) -> T {
        self.im.clone()
    }
}

/// Exact complex coefficients over ℚ(√5)(i).
pub type CQSqrt5 = Complex<QSqrt5>;
