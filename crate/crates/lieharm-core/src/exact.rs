//! Exact scalar arithmetic: Gaussian rationals and surd scalars `q * sqrt(m)`.
//!
//! Surd scalars are the exact carrier for ladder-operator matrix entries,
//! whose magnitudes are square roots of half-integer products. Products of
//! surds stay exact; sums of surds with different radicands do not, and the
//! caller is expected to fall back to floating point in that case.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// A Gaussian rational `re + im*i` with arbitrary-precision components.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::new(BigRational::one(), BigRational::zero())
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_i64(n: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn real(re: BigRational) -> Self {
        Self::new(re, BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_imaginary(&self) -> bool {
        self.re.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.re + &other.re, &self.im + &other.im)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(&self.re - &other.re, &self.im - &other.im)
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.re.clone(), -self.im.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// Squared modulus `re^2 + im^2` as a rational.
    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sq();
        if n.is_zero() {
            return None;
        }
        Some(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "({}{:+}i)", self.re, self.im)
        }
    }
}

/// Convert a big rational to f64, tolerating magnitudes outside f64 range of
/// the raw integer parts by scaling both sides down together.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back to a bit-length balanced quotient.
    let num = r.numer();
    let den = r.denom();
    let shift = (num.bits() as i64 - den.bits() as i64).clamp(-1000, 1000);
    let (n, d) = if shift > 0 {
        (num >> shift as u64, den.clone())
    } else {
        (num.clone(), den >> (-shift) as u64)
    };
    let base = n.to_f64().unwrap_or(f64::MAX) / d.to_f64().unwrap_or(1.0);
    base * 2f64.powi(shift as i32)
}

/// Natural log of a positive rational, stable for values far outside f64 range.
pub fn rational_ln(r: &BigRational) -> f64 {
    assert!(r.is_positive(), "rational_ln requires a positive argument");
    let num = r.numer();
    let den = r.denom();
    let ln_big = |x: &BigInt| -> f64 {
        let bits = x.bits();
        if bits <= 52 {
            (x.to_f64().unwrap()).ln()
        } else {
            let shift = bits - 52;
            let top = (x >> shift).to_f64().unwrap();
            top.ln() + shift as f64 * std::f64::consts::LN_2
        }
    };
    ln_big(&num.abs()) - ln_big(den)
}

/// Remove the square part of `m`, returning `(s, m0)` with `m = s^2 * m0`
/// and `m0` squarefree.
pub fn extract_square_part(m: u64) -> (u64, u64) {
    if m == 0 {
        return (0, 1);
    }
    let mut s = 1u64;
    let mut m0 = m;
    let mut p = 2u64;
    while p * p <= m0 {
        while m0 % (p * p) == 0 {
            m0 /= p * p;
            s *= p;
        }
        p += 1;
    }
    (s, m0)
}

/// An exact scalar of the form `coeff * sqrt(radicand)` with `coeff` a
/// Gaussian rational and `radicand` a squarefree positive integer.
/// Zero is represented uniquely as `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SurdScalar {
    coeff: GaussRational,
    radicand: u64,
}

impl SurdScalar {
    /// Build from a coefficient and a raw (not necessarily squarefree) radicand.
    pub fn new(coeff: GaussRational, radicand: u64) -> Self {
        if coeff.is_zero() || radicand == 0 {
            return Self { coeff: GaussRational::zero(), radicand: 1 };
        }
        let (s, m0) = extract_square_part(radicand);
        let scale = GaussRational::from_i64(s as i64);
        Self { coeff: coeff.mul(&scale), radicand: m0 }
    }

    pub fn zero() -> Self {
        Self { coeff: GaussRational::zero(), radicand: 1 }
    }

    pub fn one() -> Self {
        Self { coeff: GaussRational::one(), radicand: 1 }
    }

    pub fn from_rational(coeff: GaussRational) -> Self {
        if coeff.is_zero() {
            Self::zero()
        } else {
            Self { coeff, radicand: 1 }
        }
    }

    pub fn coeff(&self) -> &GaussRational {
        &self.coeff
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// Pure rational value (radicand 1), if this scalar is rational.
    pub fn as_rational(&self) -> Option<&GaussRational> {
        (self.radicand == 1).then_some(&self.coeff)
    }

    pub fn neg(&self) -> Self {
        Self { coeff: self.coeff.neg(), radicand: self.radicand }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        // m1*m2 = g^2 * (m1/g) * (m2/g) with coprime squarefree cofactors,
        // so the product radicand is already squarefree.
        let g = self.radicand.gcd(&other.radicand);
        let coeff = self
            .coeff
            .mul(&other.coeff)
            .mul(&GaussRational::from_i64(g as i64));
        Self { coeff, radicand: (self.radicand / g) * (other.radicand / g) }
    }

    /// Sum, exact only when the radicands agree (or one side is zero).
    pub fn add(&self, other: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        if self.radicand != other.radicand {
            return None;
        }
        let coeff = self.coeff.add(&other.coeff);
        if coeff.is_zero() {
            Some(Self::zero())
        } else {
            Some(Self { coeff, radicand: self.radicand })
        }
    }

    pub fn scale(&self, by: &GaussRational) -> Self {
        if by.is_zero() || self.is_zero() {
            return Self::zero();
        }
        Self { coeff: self.coeff.mul(by), radicand: self.radicand }
    }

    pub fn to_complex64(&self) -> Complex64 {
        self.coeff.to_complex64() * (self.radicand as f64).sqrt()
    }
}

impl fmt::Display for SurdScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand == 1 {
            write!(f, "{}", self.coeff)
        } else {
            write!(f, "{}*sqrt({})", self.coeff, self.radicand)
        }
    }
}
