//! Closed-form bounds, extremal constructions and instance verification.

mod constructions;
mod verify;

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::approximation::core_constant;
use crate::bits::{binom, factorial};
use crate::error::{Error, Result};
use crate::interval::{self, Interval};
use crate::scalar::{from_biguint, int, Rational};

pub use constructions::{example_23, example_23_count, example_23_lower_bound, fstar_family, product_family, FStar};
pub use verify::{best_construction_base, verify_instance, BoundRow, Construction, VerifyReport};

pub const FORMULAS: &[&str] = &[
    "erdos_rado",
    "claim4.6",
    "emc",
    "ekr",
    "thm1.4",
    "thm1.2.large",
    "thm1.2.small",
    "thm1.2.derivation",
    "thm5.2",
    "thm5.4",
    "example23.lower",
    "fstar.gap",
];

/// Where the value of `φ(s, t)` inside a formula came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PhiSource {
    /// `s = 2` or `t = 1`.
    Trivial { value: u64 },
    Exact { value: u64 },
    /// The universal upper bound `(2^14 s log2 t)^t`.
    Claim46,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundValue {
    Number(Interval),
    /// The formula involves a constant that is only known to exist.
    Symbolic { token: String, note: String },
}

impl BoundValue {
    pub fn number(&self) -> Option<&Interval> {
        match self {
            BoundValue::Number(v) => Some(v),
            BoundValue::Symbolic { .. } => None,
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Number(v) => write!(f, "{v}"),
            BoundValue::Symbolic { token, .. } => write!(f, "incomparable({token})"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BoundParams {
    pub n: Option<u64>,
    pub k: Option<u64>,
    pub s: Option<u64>,
    pub t: Option<u64>,
    #[serde(skip)]
    pub r: Option<Rational>,
    /// Known exact `φ(s, t)`.
    pub phi: Option<u64>,
    /// Spreadness `A_t` term for the gap formula.
    pub a_t: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundFormula {
    pub name: String,
    pub params: BoundParams,
    pub value: BoundValue,
    pub phi: Option<PhiSource>,
    pub hypotheses_met: bool,
}

fn need(v: Option<u64>, name: &str, formula: &str) -> Result<u64> {
    v.ok_or_else(|| Error::precondition(format!("{formula} needs parameter {name}")))
}

pub fn phi_value(s: u64, t: u64, known: Option<u64>) -> (Interval, PhiSource) {
    if s == 2 {
        return (Interval::int(1), PhiSource::Trivial { value: 1 });
    }
    if t == 1 {
        return (Interval::int(s - 1), PhiSource::Trivial { value: s - 1 });
    }
    match known {
        Some(v) => (Interval::int(v), PhiSource::Exact { value: v }),
        None => (core_constant(s as usize, t as u32).powu(t as u32), PhiSource::Claim46),
    }
}

fn b(n: u64, k: u64) -> Rational {
    from_biguint(&binom(n, k))
}

/// Evaluates a named bound; see [`FORMULAS`].
pub fn bound_rhs(name: &str, p: &BoundParams) -> Result<BoundFormula> {
    let mut phi = None;
    let mut hyp = true;
    let value = match name {
        "erdos_rado" => {
            let (s, k) = (need(p.s, "s", name)?, need(p.k, "k", name)?);
            let v = from_biguint(&factorial(k)) * int(s - 1).pow(k as i32);
            BoundValue::Number(Interval::exact(v))
        }
        "claim4.6" => {
            let (s, t) = (need(p.s, "s", name)?, need(p.t, "t", name)?);
            BoundValue::Number(core_constant(s as usize, t as u32).powu(t as u32))
        }
        "emc" => {
            let (n, k, s) = (need(p.n, "n", name)?, need(p.k, "k", name)?, need(p.s, "s", name)?);
            // Proven for graphs (Erdős–Gallai) and for s = 2 (EKR); otherwise conjectural.
            hyp = n + 1 >= k * s && (k <= 2 || s == 2 && n >= 2 * k);
            let a = b(k * s - 1, k);
            let c = b(n, k) - b(n - (s - 1).min(n), k);
            BoundValue::Number(Interval::exact(if a > c { a } else { c }))
        }
        "ekr" => {
            let (n, k) = (need(p.n, "n", name)?, need(p.k, "k", name)?);
            hyp = n >= 2 * k && p.s.map_or(true, |s| s == 2);
            BoundValue::Number(Interval::exact(b(n - 1, k.max(1) - 1)))
        }
        "thm1.4" => {
            let (n, k, s, t) = (need(p.n, "n", name)?, need(p.k, "k", name)?, need(p.s, "s", name)?, need(p.t, "t", name)?);
            let (ph, src) = phi_value(s, t, p.phi);
            phi = Some(src);
            let r = int(n) / int(k);
            let lr = interval::log2(&r);
            let c = b(n - t, k - t);
            let rem = core_constant(s as usize, t as u32)
                .powu(t as u32)
                .mul(&lr)
                .scale(&(int(1 << 19) * int(s * (t + 1)) * &c / &r));
            let h1 = lr.scale(&(int(1 << 18) * int(s * (t + 1))));
            let h2 = interval::log2(&int(k.max(1))).scale(&(int(1 << 15) * int(s * k)));
            hyp = r >= h1.hi && int(n) >= h2.hi;
            BoundValue::Number(ph.scale(&c).add(&rem))
        }
        "thm1.2.large" | "thm1.2.small" | "thm1.2.derivation" => {
            let (n, k, s, t) = (need(p.n, "n", name)?, need(p.k, "k", name)?, need(p.s, "s", name)?, need(p.t, "t", name)?);
            let (ph, src) = phi_value(s, t, p.phi);
            phi = Some(src);
            let c = b(n - t.min(n), k - t.min(k));
            let main = ph.scale(&c);
            let ratio_nk = int(n) / int(k);
            let rem = match name {
                "thm1.2.large" => core_constant(s as usize, t as u32)
                    .powu(t as u32)
                    .mul(&interval::ln(&ratio_nk))
                    .scale(&(int(1 << 17) * int(s * s * t * t * k) * &c / int(n))),
                "thm1.2.small" => interval::pow_frac(&int(n), -1, 3).scale(&c),
                _ => {
                    let l = interval::ln(&ratio_nk);
                    core_constant(s as usize, t as u32)
                        .powu(t as u32)
                        .mul(&l.mul(&l))
                        .scale(&(int(1 << 5) * int(s * s * t * t * k) * &c / int(n)))
                }
            };
            // n0(s, t) is only known to exist.
            hyp = false;
            BoundValue::Number(main.add(&rem))
        }
        "thm5.2" => {
            hyp = false;
            BoundValue::Symbolic {
                token: "c(s,k)".into(),
                note: "phi(s,t)C(n,k-t) + k c(s,k)/(n-k) C(n,k-t); c(s,k) <= s^(2^k) 2^(2^(Ck)) for an unspecified C".into(),
            }
        }
        "thm5.4" => {
            hyp = false;
            BoundValue::Symbolic {
                token: "C_k".into(),
                note: "C_k n^(k-t) s^t for k >= 2t-1, C_k n^(t-1) s^(k-t+1) otherwise; C_k double-exponential in k".into(),
            }
        }
        "example23.lower" => {
            let (n, k, s, t) = (need(p.n, "n", name)?, need(p.k, "k", name)?, need(p.s, "s", name)?, need(p.t, "t", name)?);
            let (ph, src) = phi_value(s, t, p.phi);
            phi = Some(src);
            let c = b(n - t, k - t);
            let sub = ph.mul(&ph).scale(&(int(t * (k - t)) * &c / int(n - t)));
            hyp = matches!(phi, Some(PhiSource::Trivial { .. } | PhiSource::Exact { .. }));
            BoundValue::Number(ph.scale(&c).sub(&sub))
        }
        "fstar.gap" => {
            let (s, t) = (need(p.s, "s", name)?, need(p.t, "t", name)?);
            let a_t = need(p.a_t, "a_t", name)?;
            let r = p.r.clone().ok_or_else(|| Error::precondition("fstar.gap needs parameter r"))?;
            if r <= Rational::zero() {
                return Err(Error::precondition("r must be positive"));
            }
            let (ph, src) = phi_value(s, t, p.phi);
            phi = Some(src);
            BoundValue::Number(ph.mul(&ph).scale(&(int(t * a_t) / r)))
        }
        _ => return Err(Error::precondition(format!("unknown bound formula {name:?}; known: {}", FORMULAS.join(", ")))),
    };
    Ok(BoundFormula { name: name.to_string(), params: p.clone(), value, phi, hypotheses_met: hyp })
}

/// `(s-1)^t`, the size of the product construction.
pub fn product_lower_bound(s: u64, t: u32) -> u64 {
    (s - 1).pow(t)
}

impl BoundFormula {
    pub fn is_symbolic(&self) -> bool {
        self.value.number().is_none()
    }

    pub fn exact_value(&self) -> Option<Rational> {
        self.value.number().filter(|v| v.is_exact()).map(|v| v.lo.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u64, k: u64, s: u64, t: u64) -> BoundParams {
        BoundParams { n: Some(n), k: Some(k), s: Some(s), t: Some(t), ..Default::default() }
    }

    #[test]
    fn erdos_rado_value() {
        let f = bound_rhs("erdos_rado", &BoundParams { s: Some(3), k: Some(2), ..Default::default() }).unwrap();
        assert_eq!(f.exact_value(), Some(int(8)));
    }

    #[test]
    fn claim46_value() {
        let f = bound_rhs("claim4.6", &BoundParams { s: Some(3), t: Some(2), ..Default::default() }).unwrap();
        assert_eq!(f.exact_value(), Some(int(49152 * 49152)));
    }

    #[test]
    fn thm14_exact_at_power_of_two() {
        let k = 4;
        let f = bound_rhs("thm1.4", &params(k << 20, k, 3, 2)).unwrap();
        let v = f.exact_value().expect("log2 of a power of two is exact");
        assert!(v > Rational::zero());
        assert_eq!(f.phi, Some(PhiSource::Claim46));
    }

    #[test]
    fn symbolic_and_unknown() {
        assert!(bound_rhs("thm5.4", &params(10, 4, 3, 2)).unwrap().is_symbolic());
        assert!(bound_rhs("nope", &BoundParams::default()).is_err());
    }

    #[test]
    fn emc_small() {
        let f = bound_rhs("emc", &params(6, 2, 3, 1)).unwrap();
        assert_eq!(f.exact_value(), Some(int(10)));
        assert!(f.hypotheses_met);
    }
}
