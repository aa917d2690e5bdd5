//! Scalars in two arithmetic modes: exact Gaussian rationals and
//! double-precision complex numbers.
//!
//! Algorithms are generic over [`Field`]; the dynamically tagged [`Scalar`]
//! is used at the I/O boundary where the mode is only known at run time.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Arithmetic mode of a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// A field of complex scalars, either exact or floating.
pub trait Field:
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
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// The real rational `num / den`.
    fn from_frac(num: i64, den: i64) -> Self;
    /// Exact conversion for the exact mode (binary floats are rationals).
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(&self) -> Complex64;
    /// Structural zero test; exact in exact mode, `== 0.0` in float mode.
    fn is_zero(&self) -> bool;
    fn conj(&self) -> Self;
    /// Approximate modulus.
    fn modulus(&self) -> f64 {
        self.to_c64().norm()
    }
    /// Zero test used by elimination: exact zero in exact mode, otherwise
    /// `|x| <= tol * scale`.
    fn negligible(&self, tol: f64, scale: f64) -> bool;
    /// Random element used for generation: small Gaussian rationals or
    /// standard complex Gaussians.
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn mul_ref(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.clone() + other.clone();
    }
    fn sub_assign_ref(&mut self, other: &Self) {
        *self = self.clone() - other.clone();
    }
    fn is_exact() -> bool {
        Self::MODE == Mode::Exact
    }
}

impl Field for Complex64 {
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_frac(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn negligible(&self, tol: f64, scale: f64) -> bool {
        self.norm() <= tol * scale
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign_ref(&mut self, other: &Self) {
        *self -= other;
    }
}

/// Exact complex rational `re + im·i`. Both parts are kept in lowest terms
/// with positive denominators by `BigRational`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_ints(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        GaussRat {
            re: BigRational::new(re_num.into(), re_den.into()),
            im: BigRational::new(im_num.into(), im_den.into()),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// `|z|²`, exact.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero_exact() {
            return Err(Error::DivisionByZero);
        }
        if self.is_real() {
            return Ok(GaussRat::real(self.re.recip()));
        }
        let n = self.norm_sqr();
        Ok(GaussRat {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }

    fn is_zero_exact(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn mul_impl(a: &GaussRat, b: &GaussRat) -> GaussRat {
        if a.is_real() && b.is_real() {
            return GaussRat::real(&a.re * &b.re);
        }
        if a.is_real() {
            return GaussRat {
                re: &a.re * &b.re,
                im: &a.re * &b.im,
            };
        }
        if b.is_real() {
            return GaussRat {
                re: &a.re * &b.re,
                im: &a.im * &b.re,
            };
        }
        GaussRat {
            re: &a.re * &b.re - &a.im * &b.im,
            im: &a.re * &b.im + &a.im * &b.re,
        }
    }
}

fn rational_to_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

impl fmt::Display for GaussRat {
    /// `p/q` for real values, `p/q+r/t*i` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return f.write_str(&rational_to_string(&self.re));
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(
            f,
            "{}{}{}*i",
            rational_to_string(&self.re),
            sign,
            rational_to_string(&self.im.abs())
        )
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl FromStr for GaussRat {
    type Err = Error;

    /// Accepts `p`, `p/q`, `r/t*i`, and `p/q±r/t*i`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(body) = s.strip_suffix("*i") else {
            return Ok(GaussRat::real(parse_rational(s)?));
        };
        // Split at the last sign that is not the leading one.
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        match split {
            Some(i) => {
                let re = parse_rational(&body[..i])?;
                let mut im = parse_rational(&body[i + 1..])?;
                if body.as_bytes()[i] == b'-' {
                    im = -im;
                }
                Ok(GaussRat::new(re, im))
            }
            None => Ok(GaussRat::new(BigRational::zero(), parse_rational(body)?)),
        }
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: GaussRat) -> GaussRat {
        GaussRat {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: GaussRat) -> GaussRat {
        GaussRat {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: GaussRat) -> GaussRat {
        GaussRat::mul_impl(&self, &rhs)
    }
}

impl Div for GaussRat {
    type Output = GaussRat;
    /// Panics on division by zero, like the integer types.
    fn div(self, rhs: GaussRat) -> GaussRat {
        let inv = rhs.inv().expect("division by exact zero");
        GaussRat::mul_impl(&self, &inv)
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Field for GaussRat {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        GaussRat::default()
    }
    fn one() -> Self {
        GaussRat::real(BigRational::one())
    }
    fn from_i64(v: i64) -> Self {
        GaussRat::real(BigRational::from_integer(v.into()))
    }
    fn from_frac(num: i64, den: i64) -> Self {
        GaussRat::real(BigRational::new(num.into(), den.into()))
    }
    fn from_c64(z: Complex64) -> Self {
        let conv = |x: f64| BigRational::from_float(x).unwrap_or_else(BigRational::zero);
        GaussRat::new(conv(z.re), conv(z.im))
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn is_zero(&self) -> bool {
        self.is_zero_exact()
    }
    fn conj(&self) -> Self {
        GaussRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }
    fn negligible(&self, _tol: f64, _scale: f64) -> bool {
        self.is_zero_exact()
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let part = |rng: &mut R| {
            let num: i64 = rng.random_range(-9..=9);
            let den: i64 = rng.random_range(1..=4);
            BigRational::new(num.into(), den.into())
        };
        let re = part(rng);
        let im = part(rng);
        GaussRat { re, im }
    }
    fn mul_ref(&self, other: &Self) -> Self {
        GaussRat::mul_impl(self, other)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        self.re += &other.re;
        if !other.im.is_zero() {
            self.im += &other.im;
        }
    }
    fn sub_assign_ref(&mut self, other: &Self) {
        self.re -= &other.re;
        if !other.im.is_zero() {
            self.im -= &other.im;
        }
    }
}

/// A mode-tagged scalar. Arithmetic between different modes is an error.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(GaussRat),
    Float(Complex64),
}

macro_rules! scalar_binop {
    ($name:ident, $op:tt) => {
        pub fn $name(&self, other: &Scalar) -> Result<Scalar> {
            match (self, other) {
                (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a.clone() $op b.clone())),
                (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a $op b)),
                _ => Err(Error::ModeMismatch),
            }
        }
    };
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    scalar_binop!(try_add, +);
    scalar_binop!(try_sub, -);
    scalar_binop!(try_mul, *);

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a.clone() * b.inv()?)),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a / b)),
            _ => Err(Error::ModeMismatch),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(q) => q.to_c64(),
            Scalar::Float(z) => *z,
        }
    }
}

impl From<GaussRat> for Scalar {
    fn from(q: GaussRat) -> Self {
        Scalar::Exact(q)
    }
}

impl From<Complex64> for Scalar {
    fn from(z: Complex64) -> Self {
        Scalar::Float(z)
    }
}

/// Conversion from the tagged scalar into a concrete field, checking mode.
pub trait FromScalar: Field {
    fn from_scalar(s: &Scalar) -> Result<Self>;
    fn into_scalar(self) -> Scalar;
}

impl FromScalar for GaussRat {
    fn from_scalar(s: &Scalar) -> Result<Self> {
        match s {
            Scalar::Exact(q) => Ok(q.clone()),
            Scalar::Float(_) => Err(Error::ModeMismatch),
        }
    }
    fn into_scalar(self) -> Scalar {
        Scalar::Exact(self)
    }
}

impl FromScalar for Complex64 {
    fn from_scalar(s: &Scalar) -> Result<Self> {
        match s {
            Scalar::Float(z) => Ok(*z),
            Scalar::Exact(_) => Err(Error::ModeMismatch),
        }
    }
    fn into_scalar(self) -> Scalar {
        Scalar::Float(self)
    }
}

/// Relative closeness with the float-mode convention
/// `|x - y| <= tol * max(1, |x|, |y|)`; exact equality in exact mode.
pub fn close<F: Field>(x: &F, y: &F, tol: f64) -> bool {
    if F::is_exact() {
        return x == y;
    }
    let (a, b) = (x.to_c64(), y.to_c64());
    (a - b).norm() <= tol * 1f64.max(a.norm()).max(b.norm())
}
