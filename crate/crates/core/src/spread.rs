//! R-spread families: certificates, maximal spread links, the spread lemma
//! by Monte Carlo, and disjoint representatives.

use num_traits::{One, Signed};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{elements, Mask};
use crate::error::{Error, Result};
use crate::family::{SetFamily, SunflowerWitness};
use crate::interval::{self, Interval};
use crate::rng;
use crate::scalar::{int, power_table, ser_rational, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadVerdict {
    #[serde(rename = "R", serialize_with = "ser_rational")]
    pub r: Rational,
    pub ok: bool,
    /// The worst set `X`, when it violates.
    pub violation: Option<Mask>,
    /// `max_X |F(X)| R^|X| / |F|` over nonempty `X`.
    #[serde(serialize_with = "ser_rational")]
    pub worst_ratio: Rational,
}

/// Exhaustive spreadness check; reports the worst violating `X`.
pub fn check_spread(f: &SetFamily, r: &Rational) -> Result<SpreadVerdict> {
    if f.is_empty() {
        return Err(Error::precondition("spreadness of an empty family"));
    }
    let pow = power_table(r, f.max_size().unwrap_or(0));
    let total = int(f.len() as u64);
    let mut worst = None;
    let mut worst_ratio = Rational::default();
    for (x, c) in f.subset_counts() {
        if x == 0 {
            continue;
        }
        let ratio = int(c) * &pow[x.count_ones() as usize] / &total;
        if worst.is_none() || ratio > worst_ratio {
            worst_ratio = ratio;
            worst = Some(x);
        }
    }
    let ok = worst.is_none() || worst_ratio <= Rational::one();
    Ok(SpreadVerdict { r: r.clone(), ok, violation: if ok { None } else { worst }, worst_ratio })
}

/// Largest `X` with `|F(X)| >= R^-|X| |F|`, smallest mask among ties.
pub fn max_spread_restriction(f: &SetFamily, r: &Rational) -> Result<Mask> {
    if f.is_empty() {
        return Err(Error::precondition("max_spread_restriction of an empty family"));
    }
    let pow = power_table(r, f.max_size().unwrap_or(0));
    let total = int(f.len() as u64);
    let mut cands = f.subset_counts();
    cands.sort_by_key(|&(x, _)| (std::cmp::Reverse(x.count_ones()), x));
    let x = cands
        .iter()
        .find(|&&(x, c)| int(c) * &pow[x.count_ones() as usize] >= total)
        .map(|&(x, _)| x)
        .expect("X = ∅ always qualifies");
    let v = check_spread(&f.link(x), r)?;
    if !v.ok {
        return Err(Error::assertion(format!("link at {x:#x} is not R-spread")));
    }
    Ok(x)
}

pub const WILSON_Z99: f64 = 2.575_829_303_548_900_4;

/// Wilson score interval for `hits / trials`.
pub fn wilson(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let d = 1.0 + z2 / n;
    let lo = if hits == 0 { 0.0 } else { ((centre - half) / d).max(0.0) };
    let hi = if hits == trials { 1.0 } else { ((centre + half) / d).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpreadLemmaEstimate {
    pub m: u32,
    #[serde(serialize_with = "ser_rational")]
    pub delta: Rational,
    #[serde(rename = "R", serialize_with = "ser_rational")]
    pub r: Rational,
    pub seed: u64,
    pub trials: u64,
    pub hits: u64,
    #[serde(serialize_with = "ser_rational")]
    pub hit_rate: Rational,
    pub wilson99: (f64, f64),
    /// `1 - (5 / log2(Rδ))^m`, absent when `Rδ <= 1`.
    pub paper_bound: Option<Interval>,
    /// The same with the failure term multiplied by the uniformity.
    pub paper_bound_k: Option<Interval>,
    pub vacuous: bool,
    /// The whole confidence interval lies below a nonvacuous bound.
    pub violation: bool,
}

impl SpreadLemmaEstimate {
    /// The lower confidence bound certainly exceeds the paper bound.
    pub fn lower_exceeds_bound(&self) -> bool {
        match &self.paper_bound {
            Some(b) => Interval::exact(Rational::from_float(self.wilson99.0).unwrap_or_default()).gt_certain(b),
            None => false,
        }
    }
}

const MC_BLOCK: u64 = 4096;

/// Estimates `P[some F ⊆ W]` for `W` a `mδ`-random subset of the ground set.
pub fn spread_lemma_mc(f: &SetFamily, r: &Rational, m: u32, delta: &Rational, trials: u64, seed: u64) -> Result<SpreadLemmaEstimate> {
    let v = check_spread(f, r)?;
    if !v.ok {
        return Err(Error::precondition(format!("family is not R-spread (X = {:?})", v.violation)));
    }
    let p = int(m as u64) * delta;
    if p.is_negative() || p > Rational::one() {
        return Err(Error::precondition("need 0 <= mδ <= 1"));
    }
    let pf = p.to_f64();
    let n = f.n();
    let members = f.members();
    let blocks = trials.div_ceil(MC_BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::derive(seed, b, 5);
            let count = MC_BLOCK.min(trials - b * MC_BLOCK);
            let mut hits = 0;
            for _ in 0..count {
                let mut w: Mask = 0;
                for e in 0..n {
                    if rng.gen_bool(pf) {
                        w |= 1 << e;
                    }
                }
                if members.iter().any(|&x| x & !w == 0) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let rd = r * delta;
    let (paper_bound, paper_bound_k) = if rd > Rational::one() {
        let ratio = Interval::int(5).div(&interval::log2(&rd)).expect("log2 of a value above 1 is positive");
        let fail = ratio.powu(m);
        let k = int(f.max_size().unwrap_or(0).max(1) as u64);
        (Some(Interval::int(1).sub(&fail)), Some(Interval::int(1).sub(&fail.scale(&k))))
    } else {
        (None, None)
    };
    let vacuous = paper_bound.as_ref().map_or(true, |b| b.hi <= Rational::default());
    let wilson99 = wilson(hits, trials, WILSON_Z99);
    let violation = !vacuous
        && paper_bound
            .as_ref()
            .is_some_and(|b| Rational::from_float(wilson99.1).unwrap_or_default() < b.lo);
    let hit_rate = if trials == 0 { Rational::default() } else { int(hits) / int(trials) };
    Ok(SpreadLemmaEstimate {
        m,
        delta: delta.clone(),
        r: r.clone(),
        seed,
        trials,
        hits,
        hit_rate,
        wilson99,
        paper_bound,
        paper_bound_k,
        vacuous,
        violation,
    })
}

pub const REPRESENTATIVE_RESTARTS: u64 = 64;

/// Pairwise disjoint `F_i ∈ G_i`, all avoiding `forbidden`.
///
/// Random colourings of the ground set are tried first: each `G_i` looks
/// for a member inside its own colour class. An exhaustive search settles
/// the remaining cases.
pub fn find_disjoint_representatives(g: &[SetFamily], forbidden: Mask, seed: u64) -> Result<Option<Vec<Mask>>> {
    if g.iter().any(|f| f.is_empty()) {
        return Err(Error::precondition("every family must be nonempty"));
    }
    let s = g.len();
    if s == 0 {
        return Ok(Some(Vec::new()));
    }
    let pools: Vec<Vec<Mask>> = g
        .iter()
        .map(|f| f.members().iter().copied().filter(|&m| m & forbidden == 0).collect())
        .collect();
    if pools.iter().any(|p| p.is_empty()) {
        return Ok(None);
    }
    let n = g[0].n();
    for restart in 0..REPRESENTATIVE_RESTARTS {
        let mut rng = rng::derive(seed, restart, 7);
        let mut class = vec![0 as Mask; s];
        for e in 0..n {
            class[rng.gen_range(0..s)] |= 1 << e;
        }
        let picks: Option<Vec<Mask>> = pools
            .iter()
            .zip(&class)
            .map(|(p, &c)| p.iter().copied().find(|&m| m & !c == 0 && m != 0))
            .collect();
        if let Some(p) = picks {
            return Ok(Some(p));
        }
    }
    Ok(exhaustive_representatives(&pools))
}

fn exhaustive_representatives(pools: &[Vec<Mask>]) -> Option<Vec<Mask>> {
    fn rec(pools: &[Vec<Mask>], order: &[usize], depth: usize, used: Mask, empties: bool, out: &mut [Mask]) -> bool {
        if depth == order.len() {
            return true;
        }
        let i = order[depth];
        for &m in &pools[i] {
            if m & used != 0 || m == 0 && empties {
                continue;
            }
            out[i] = m;
            if rec(pools, order, depth + 1, used | m, empties || m == 0, out) {
                return true;
            }
        }
        false
    }
    let mut order: Vec<usize> = (0..pools.len()).collect();
    order.sort_by_key(|&i| pools[i].len());
    let mut out = vec![0; pools.len()];
    rec(pools, &order, 0, 0, false, &mut out).then_some(out)
}

/// Restrict to the maximal spread link, then look for `s` disjoint sets in
/// it; their unions with the restriction set form a sunflower.
pub fn sunflower_via_spread(f: &SetFamily, s: usize, r: &Rational, seed: u64) -> Result<Option<SunflowerWitness>> {
    let x = max_spread_restriction(f, r)?;
    let link = f.link(x).filter(|m| m != 0);
    if link.is_empty() {
        return Ok(None);
    }
    let fams = vec![link; s];
    Ok(find_disjoint_representatives(&fams, 0, seed)?.map(|reps| SunflowerWitness {
        petals: reps.iter().map(|&p| p | x).collect(),
        core: x,
        s,
        degenerate: false,
    }))
}

/// Elements of a mask, 1-based, for messages.
pub fn describe(m: Mask) -> Vec<u32> {
    elements(m).map(|e| e + 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Domain;
    use crate::scalar::ratio;

    #[test]
    fn spread_examples() {
        let c62 = Domain::binomial(6, 2).unwrap();
        assert!(check_spread(c62.family(), &int(3)).unwrap().ok);
        let single = SetFamily::from_masks(2, [0b11]).unwrap();
        assert_eq!(check_spread(&single, &int(2)).unwrap().violation, Some(0b11));
        let c42 = Domain::binomial(4, 2).unwrap();
        assert!(check_spread(c42.family(), &int(2)).unwrap().ok);
        let v = check_spread(c42.family(), &ratio(201, 100)).unwrap();
        assert_eq!(v.violation.map(|x| x.count_ones()), Some(1));
    }

    #[test]
    fn restriction_examples() {
        let single = SetFamily::from_masks(3, [0b111]).unwrap();
        assert_eq!(max_spread_restriction(&single, &int(2)).unwrap(), 0b111);
        let c62 = Domain::binomial(6, 2).unwrap();
        assert_eq!(max_spread_restriction(c62.family(), &int(2)).unwrap(), 0);
    }

    #[test]
    fn representatives_examples() {
        let g1 = SetFamily::from_masks(3, [0b1]).unwrap();
        let g2 = SetFamily::from_masks(3, [0b10]).unwrap();
        assert_eq!(find_disjoint_representatives(&[g1, g2], 0, 1).unwrap(), Some(vec![0b1, 0b10]));
        let g = SetFamily::from_masks(3, [0b11]).unwrap();
        assert_eq!(find_disjoint_representatives(&[g.clone(), g], 0, 1).unwrap(), None);
    }

    #[test]
    fn mc_trivial_family() {
        let f = SetFamily::from_masks(4, [0]).unwrap();
        let e = spread_lemma_mc(&f, &int(100), 1, &ratio(1, 2), 1000, 3).unwrap();
        assert_eq!(e.hits, 1000);
        let c = Domain::binomial(12, 2).unwrap();
        let e = spread_lemma_mc(c.family(), &int(6), 2, &ratio(1, 4), 2000, 3).unwrap();
        assert!(e.vacuous);
    }
}
