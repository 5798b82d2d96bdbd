//! Rigorous rational enclosures for logarithms and roots.
//!
//! Bound formulas mix rationals with `log2`, `ln` and fractional powers. An
//! [`Interval`] carries a lower and upper rational bound on the true value so
//! comparisons against exact counts stay sound.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::scalar::{fmt_rational, int, Rational, Scalar};

const FRACTION_BITS: u32 = 72;
const FIXED_BITS: u32 = 120;

#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn exact(v: Rational) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    pub fn int(v: u64) -> Self {
        Interval::exact(int(v))
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mid_f64(&self) -> f64 {
        (self.lo.to_f64() + self.hi.to_f64()) / 2.0
    }

    /// Certainly `<= other`.
    pub fn le_certain(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    /// Certainly `> other`.
    pub fn gt_certain(&self, other: &Interval) -> bool {
        self.lo > other.hi
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    /// `None` when the divisor straddles zero.
    pub fn div(&self, o: &Interval) -> Option<Interval> {
        if o.lo <= Rational::zero() && o.hi >= Rational::zero() {
            return None;
        }
        let inv = Interval { lo: o.hi.recip(), hi: o.lo.recip() };
        Some(self.mul(&inv))
    }

    pub fn powu(&self, e: u32) -> Interval {
        let mut acc = Interval::int(1);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale(&self, r: &Rational) -> Interval {
        self.mul(&Interval::exact(r.clone()))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", fmt_rational(&self.lo))
        } else {
            write!(f, "[{}, {}]", self.lo.to_f64(), self.hi.to_f64())
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Interval", 3)?;
        st.serialize_field("lo", &fmt_rational(&self.lo))?;
        st.serialize_field("hi", &fmt_rational(&self.hi))?;
        st.serialize_field("approx", &self.mid_f64())?;
        st.end()
    }
}

fn log2_uint(a: &BigUint) -> (Rational, Rational) {
    let bits = a.bits() as u32;
    let e = bits - 1;
    let one_fixed = BigUint::one() << FIXED_BITS;
    let two_fixed = &one_fixed << 1u32;
    let shifted = a << FIXED_BITS;
    let denom = BigUint::one() << e;
    let (q, r) = shifted.div_rem(&denom);
    let mut y_lo = q.clone();
    let mut y_hi = if r.is_zero() { q } else { q + 1u32 };
    let mut lo_bits = BigUint::zero();
    let mut hi_bits = BigUint::zero();
    for _ in 0..FRACTION_BITS {
        y_lo = (&y_lo * &y_lo) >> FIXED_BITS;
        let sq = &y_hi * &y_hi;
        let (q, r) = sq.div_rem(&one_fixed);
        y_hi = if r.is_zero() { q } else { q + 1u32 };
        lo_bits <<= 1u32;
        hi_bits <<= 1u32;
        if y_lo >= two_fixed {
            lo_bits += 1u32;
            y_lo >>= 1u32;
        }
        if y_hi >= two_fixed {
            hi_bits += 1u32;
            let odd = y_hi.is_odd();
            y_hi >>= 1u32;
            if odd {
                y_hi += 1u32;
            }
        }
    }
    let scale = Rational::from_integer(BigInt::from(BigUint::one() << FRACTION_BITS));
    let base = int(e as u64);
    let lo = &base + Rational::from_integer(BigInt::from(lo_bits)) / &scale;
    let hi = &base + Rational::from_integer(BigInt::from(hi_bits + 1u32)) / &scale;
    (lo, hi)
}

/// Enclosure of `log2(x)` for `x > 0`; exact when `x` is a power of two.
pub fn log2(x: &Rational) -> Interval {
    assert!(x.is_positive(), "log2 of a non-positive value");
    let a = x.numer().magnitude();
    let b = x.denom().magnitude();
    let pow2 = |v: &BigUint| v.count_ones() == 1;
    if pow2(a) && pow2(b) {
        let e = a.bits() as i64 - b.bits() as i64;
        return Interval::exact(Rational::from_integer(BigInt::from(e)));
    }
    let (alo, ahi) = log2_uint(a);
    let (blo, bhi) = log2_uint(b);
    Interval { lo: alo - bhi, hi: ahi - blo }
}

fn ln2() -> Interval {
    let digits = BigInt::parse_bytes(b"69314718055994530941723212145817", 10).unwrap();
    let scale = Rational::from_integer(BigInt::from(10u32).pow(32));
    let lo = Rational::from_integer(digits) / &scale;
    let hi = &lo + scale.recip();
    Interval { lo, hi }
}

/// Enclosure of the natural logarithm.
pub fn ln(x: &Rational) -> Interval {
    log2(x).mul(&ln2())
}

/// Enclosure of `x^(1/n)` for `x >= 0`.
pub fn root(x: &Rational, n: u32) -> Interval {
    assert!(n >= 1 && !x.is_negative());
    if n == 1 || x.is_zero() {
        return Interval::exact(x.clone());
    }
    let a = x.numer().magnitude();
    let b = x.denom().magnitude();
    // Largest y with y^n * b <= a * 2^(n*FIXED_BITS).
    let target = a << (n * FIXED_BITS);
    let fits = |y: &BigUint| y.pow(n) * b <= target;
    let mut lo = BigUint::zero();
    let mut hi = BigUint::one();
    while fits(&hi) {
        hi <<= 1u32;
    }
    while &hi - &lo > BigUint::one() {
        let mid = (&lo + &hi) >> 1u32;
        if fits(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let scale = Rational::from_integer(BigInt::from(BigUint::one() << FIXED_BITS));
    let exact = lo.pow(n) * b == target;
    let l = Rational::from_integer(BigInt::from(lo.clone())) / &scale;
    let h = if exact { l.clone() } else { Rational::from_integer(BigInt::from(lo + 1u32)) / &scale };
    Interval { lo: l, hi: h }
}

/// Enclosure of `x^(p/q)` for `x > 0` and integers `p`, `q > 0`.
pub fn pow_frac(x: &Rational, p: i64, q: u32) -> Interval {
    let base = if p >= 0 { x.clone() } else { x.recip() };
    let r = root(&base, q);
    r.powu(p.unsigned_abs() as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn log2_of_powers_is_exact() {
        assert_eq!(log2(&int(8)), Interval::int(3));
        assert_eq!(log2(&ratio(1, 4)).lo, int(0) - int(2));
    }

    #[test]
    fn log2_encloses_float_value() {
        for v in [3u64, 5, 7, 10, 1000, 123456789] {
            let iv = log2(&int(v));
            let f = (v as f64).log2();
            assert!(iv.lo.to_f64() <= f + 1e-12 && f - 1e-12 <= iv.hi.to_f64(), "{v}");
            assert!(iv.hi.clone() - iv.lo.clone() < ratio(1, 1 << 40));
        }
    }

    #[test]
    fn ln_and_root() {
        let l = ln(&int(4));
        assert!((l.mid_f64() - 4f64.ln()).abs() < 1e-15);
        let r = root(&int(27), 3);
        assert_eq!(r, Interval::int(3));
        let r = root(&int(2), 2);
        assert!(r.lo.to_f64() <= std::f64::consts::SQRT_2 && std::f64::consts::SQRT_2 <= r.hi.to_f64() + 1e-15);
        let c = pow_frac(&int(1000), -1, 3);
        assert!((c.mid_f64() - 0.1).abs() < 1e-15);
    }
}
