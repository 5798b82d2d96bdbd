use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{self, Mask};
use crate::domains::{Domain, SpreadnessReport};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::{int, powi, ser_rational, Rational, Scalar};

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionParams {
    pub q: u32,
    pub t: u32,
    #[serde(serialize_with = "ser_rational")]
    pub eta: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub mu: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub r: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct Assumption2 {
    pub ok: bool,
    pub a_t: u64,
    pub size: u64,
    /// `A_t / |A|`.
    #[serde(serialize_with = "ser_rational")]
    pub ratio: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct Assumption3Failure {
    #[serde(rename = "S")]
    pub s: Mask,
    pub h: u32,
    /// Offending point mass, or `None` for a sampled subfamily.
    pub member: Option<Mask>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Assumption3Report {
    pub ok: bool,
    pub pairs_checked: usize,
    pub point_masses_checked: usize,
    pub subfamilies_checked: usize,
    pub failure: Option<Assumption3Failure>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Assumption4 {
    pub ok: bool,
    /// `(R, h)` with the smallest slack.
    #[serde(rename = "worst_R")]
    pub worst_r: Mask,
    pub worst_h: u32,
    #[serde(serialize_with = "ser_rational")]
    pub worst_lhs: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub worst_rhs: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionsReport {
    pub params: AssumptionParams,
    pub spreadness: SpreadnessReport,
    pub large_links: Assumption2,
    pub expectation: Assumption3Report,
    pub shadow_consistency: Assumption4,
}

impl AssumptionsReport {
    pub fn all_hold(&self) -> bool {
        self.spreadness.ok && self.large_links.ok && self.expectation.ok && self.shadow_consistency.ok
    }
}

/// Checks the four domain assumptions exhaustively.
///
/// The expectation identity is checked for `h <= t - 1`, the shadow
/// condition for `h <= t`.
pub fn check_assumptions(a: &Domain, params: AssumptionParams, seed: u64) -> Result<AssumptionsReport> {
    let AssumptionParams { q, t, .. } = params;
    if q > a.k() || t > a.k() || t == 0 {
        return Err(Error::precondition(format!("need 1 <= t <= k and q <= k (k = {})", a.k())));
    }
    if !params.r.is_positive() || !params.mu.is_positive() {
        return Err(Error::precondition("r and mu must be positive"));
    }
    let spreadness = a.check_rt_spread(&params.r, q);

    let (_, a_t) = a.max_link(t)?;
    let ratio = int(a_t) / int(a.len());
    let b = params.eta.denom().to_u32_digits().1;
    let b = match b.as_slice() {
        [d] => *d,
        _ => return Err(Error::precondition("eta denominator too large")),
    };
    let num: i64 = params.eta.numer().try_into().map_err(|_| Error::precondition("eta numerator too large"))?;
    let a2_ok = ratio.powu(b) * powi(&params.r, num * t as i64) >= Rational::one();
    let large_links = Assumption2 { ok: a2_ok, a_t, size: a.len(), ratio };

    let expectation = check_assumption3(a, q, t - 1, seed, 100)?;

    let shadow_consistency = check_assumption4(a, q, t, &params.mu);
    Ok(AssumptionsReport { params, spreadness, large_links, expectation, shadow_consistency })
}

fn check_assumption4(a: &Domain, q: u32, t: u32, mu: &Rational) -> Assumption4 {
    let amb = a.ambient();
    let base: Vec<u64> = (0..=t).map(|h| amb.shadow(h).len() as u64).collect();
    let mk = mu * int(a.k() as u64);
    let mut worst: Option<(Rational, Mask, u32, Rational, Rational)> = None;
    for r in amb.shadow_up_to(q) {
        let link = amb.restrict(r);
        let factor = Rational::one() - int(r.count_ones() as u64) / &mk;
        for h in 0..=t {
            if base[h as usize] == 0 {
                continue;
            }
            let lhs = int(link.shadow(h).len() as u64) / int(base[h as usize]);
            let rhs = factor.powu(h);
            let slack = &lhs - &rhs;
            if worst.as_ref().map_or(true, |w| slack < w.0) {
                worst = Some((slack, r, h, lhs, rhs));
            }
        }
    }
    let (slack, worst_r, worst_h, worst_lhs, worst_rhs) = worst.expect("R = ∅ is always checked");
    Assumption4 { ok: !slack.is_negative(), worst_r, worst_h, worst_lhs, worst_rhs }
}

/// The expectation identity `μ(F) = E_H μ(F(H))` over `H` uniform in
/// `∂_h A(S)`, for every `S ∈ ∂_{<=q} A` and `h <= h_max`.
///
/// Every point mass `{F}` is checked (which implies all subfamilies by
/// linearity), plus the full link and `random` sampled subfamilies.
pub fn check_assumption3(a: &Domain, q: u32, h_max: u32, seed: u64, random: usize) -> Result<Assumption3Report> {
    let amb = a.ambient();
    let mut pairs = Vec::new();
    for s in amb.shadow_up_to(q) {
        for h in 0..=h_max.min(a.k() - s.count_ones()) {
            pairs.push((s, h));
        }
    }
    let results: Vec<(usize, usize, Option<Assumption3Failure>)> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(s, h))| {
            let link = amb.restrict(s);
            let hs = link.shadow(h);
            let size = BigUint::from(link.size());
            let denom_lcm = hs.iter().fold(BigUint::one(), |l, &x| l.lcm(&BigUint::from(link.link(x))));
            let members = link.members();
            let weights: Vec<BigUint> = members
                .members()
                .iter()
                .map(|&f| {
                    bits::submasks_of_size(f, h).map(|x| &denom_lcm / BigUint::from(link.link(x))).sum()
                })
                .collect();
            let unit = &denom_lcm * BigUint::from(hs.len());
            let fail = |member| Some(Assumption3Failure { s, h, member });
            for (w, &f) in weights.iter().zip(members.members()) {
                if w * &size != unit {
                    return (members.len(), 0, fail(Some(f)));
                }
            }
            let mut rng = rng::derive(seed, idx as u64, 3);
            let mut sub = 0;
            for trial in 0..=random {
                let mut total = BigUint::default();
                let mut count = 0u64;
                for w in &weights {
                    if trial == 0 || rng.gen_bool(0.5) {
                        total += w;
                        count += 1;
                    }
                }
                sub += 1;
                if total * &size != &unit * BigUint::from(count) {
                    return (members.len(), sub, fail(None));
                }
            }
            (members.len(), sub, None)
        })
        .collect();
    let point_masses_checked = results.iter().map(|r| r.0).sum();
    let subfamilies_checked = results.iter().map(|r| r.1).sum();
    let failure = results.into_iter().find_map(|r| r.2);
    Ok(Assumption3Report { ok: failure.is_none(), pairs_checked: pairs.len(), point_masses_checked, subfamilies_checked, failure })
}
