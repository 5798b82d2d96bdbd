//! Scalar abstraction used by the measure and noise code.
//!
//! Verdicts are always computed over [`Rational`]; `f64`/`f32` instances
//! exist for quick estimates and plotting.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde::Serializer;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub trait Scalar: Clone + Debug + PartialOrd + Num + Send + Sync {
    fn from_rational(r: &Rational) -> Self;

    fn from_u64(v: u64) -> Self;

    fn to_f64(&self) -> f64;

    fn powu(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_rational(r: &Rational) -> Self {
                ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t
            }

            fn from_u64(v: u64) -> Self {
                v as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_u64(v: u64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn from_biguint(v: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(v.clone()))
}

/// Integer power with a possibly negative exponent.
pub fn powi(r: &Rational, e: i64) -> Rational {
    if e >= 0 {
        r.clone().powu(e as u32)
    } else {
        r.recip().powu((-e) as u32)
    }
}

/// Accepts `a`, `a/b`, decimal `0.25` and scientific `1e-3`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a = BigInt::from_str_radix(a.trim(), 10).map_err(|e| Error::parse(format!("{s}: {e}")))?;
        let b = BigInt::from_str_radix(b.trim(), 10).map_err(|e| Error::parse(format!("{s}: {e}")))?;
        if b.is_zero() {
            return Err(Error::parse(format!("{s}: zero denominator")));
        }
        return Ok(Rational::new(a, b));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| Error::parse(format!("bad exponent in {s}")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa),
    };
    let (ip, fp) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(Error::parse(format!("not a number: {s}")));
    }
    let digits = format!("{ip}{fp}");
    let n = BigInt::from_str_radix(&digits, 10).map_err(|e| Error::parse(format!("{s}: {e}")))?;
    let mut r = Rational::from_integer(n) * powi(&int(10), exp - fp.len() as i64);
    if neg {
        r = -r;
    }
    Ok(r)
}

pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

pub fn ser_opt_rational<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&fmt_rational(r)),
        None => s.serialize_none(),
    }
}

pub fn ser_biguint<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// `a/b` as a pair of unsigned integers, for the scaled-integer kernels.
pub fn unsigned_parts(r: &Rational) -> Option<(BigUint, BigUint)> {
    if r.is_negative() {
        return None;
    }
    Some((r.numer().magnitude().clone(), r.denom().magnitude().clone()))
}

pub fn is_in_open_unit(r: &Rational) -> bool {
    r.is_positive() && *r < Rational::one()
}

pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_f64(x)
}

/// `a <= r^e * b` for nonnegative `r`.
pub fn le_scaled(a: u64, b: u64, r: &Rational, e: i64) -> bool {
    int(a) <= powi(r, e) * int(b)
}

/// Table `r^0, r^1, ..., r^max`.
pub fn power_table(r: &Rational, max: u32) -> Vec<Rational> {
    let mut v = Vec::with_capacity(max as usize + 1);
    let mut acc = Rational::one();
    for _ in 0..=max {
        v.push(acc.clone());
        acc *= r;
    }
    v
}
