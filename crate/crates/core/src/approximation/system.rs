//! Intersection reduction of homogeneous decompositions and clustering.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_traits::{One, Zero};
use serde::Serialize;

use super::simplify::{simplify, SimplifyOptions};
use super::{core_constant, Decomposition, DecompositionMode};
use crate::bits::{k_subsets, deposit, key, Mask};
use crate::domains::homogeneous_subfamily_in;
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::family::{SetFamily, SunflowerWitness};
use crate::interval::{self, Interval};
use crate::report::BoundCheck;
use crate::scalar::{int, ratio, ser_rational, Rational};
use crate::sunflower::{find_sunflower, CorePredicate};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowCheck {
    pub h: u32,
    pub shadow: u64,
    pub ambient_shadow: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemPart {
    pub core: Mask,
    /// The homogeneous subfamily `U_S`, as link sets.
    pub family: SetFamily,
    pub original: usize,
    pub removed_cores: Vec<Mask>,
    pub shadow_checks: Vec<ShadowCheck>,
}

/// `s` cores forming a sunflower with a small kernel whose `U`-shadows
/// share the set `common`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClauseViolation {
    pub cores: Vec<Mask>,
    pub kernel: Mask,
    pub common: Mask,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemSST {
    pub s: usize,
    pub t: u32,
    #[serde(serialize_with = "ser_rational")]
    pub tau: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub alpha: Rational,
    pub parts: Vec<SystemPart>,
    /// `s` cores forming a sunflower with kernel of size exactly `t-1`.
    pub clause1: Option<SunflowerWitness>,
    pub clause2: Option<ClauseViolation>,
}

impl SystemSST {
    pub fn clauses_hold(&self) -> bool {
        self.clause1.is_none() && self.clause2.is_none()
    }

    pub fn cores(&self, n: u32) -> SetFamily {
        SetFamily::from_masks(n, self.parts.iter().map(|p| p.core)).expect("cores lie in the ground set")
    }

    pub fn shadow_checks_hold(&self) -> bool {
        self.parts.iter().all(|p| p.shadow_checks.iter().all(|c| c.holds))
    }
}

/// Minimal homogeneity parameter data: `μ(F(X))/μ(F)` for every nonempty `X`.
fn ratios(f: &SetFamily, amb: crate::domains::Ambient<'_>) -> Vec<(u32, Rational)> {
    let total = int(amb.size());
    let fl = int(f.len() as u64);
    f.subset_counts()
        .into_iter()
        .filter(|&(x, _)| x != 0)
        .map(|(x, c)| (x.count_ones(), int(c) * &total / (int(amb.link(x)) * &fl)))
        .collect()
}

/// Turns every part of a homogeneous decomposition into its homogeneous
/// subfamily and checks the two intersection clauses on the cores.
pub fn reduce_intersections(d: &Decomposition, a: &Domain, s: usize, t: u32, alpha: &Rational) -> Result<SystemSST> {
    let tau = match &d.mode {
        DecompositionMode::Homogeneous { tau, .. } => tau.clone(),
        DecompositionMode::Spread { .. } => return Err(Error::precondition("need a homogeneous decomposition")),
    };
    let k = a.k().max(1);
    if *alpha <= Rational::zero() || *alpha > ratio(1, 4 * k as i64) {
        return Err(Error::precondition(format!("α must lie in (0, 1/(4k)] with k={k}")));
    }
    if s < 2 || t == 0 {
        return Err(Error::precondition("need s >= 2 and t >= 1"));
    }
    let amb = a.ambient();
    let c = Rational::one() - int(2 * a.k() as u64) * alpha;
    let mut parts = Vec::with_capacity(d.parts.len());
    for p in &d.parts {
        let sub = amb.restrict(p.core);
        let hs = homogeneous_subfamily_in(&p.family, sub, &tau, alpha, t)?;
        let rs = ratios(&p.family, sub);
        let mut checks = Vec::new();
        for h in 1..sub.uniformity() {
            let shadow = hs.family.shadow(h).len() as u64;
            let ambient_shadow = sub.shadow(h).len() as u64;
            let rho = int(shadow) / int(ambient_shadow.max(1));
            let holds = rs.iter().any(|(x, r)| r.clone().pow(h as i32) * rho.clone().pow(*x as i32) >= c.clone().pow((h * x) as i32));
            checks.push(ShadowCheck { h, shadow, ambient_shadow, holds: holds || rs.is_empty() });
        }
        parts.push(SystemPart {
            core: p.core,
            family: hs.family,
            original: p.family.len(),
            removed_cores: hs.removed_cores,
            shadow_checks: checks,
        });
    }
    let cores = SetFamily::from_masks(a.n(), parts.iter().map(|p| p.core))?;
    let clause1 = find_sunflower(&cores, &CorePredicate::exact(s, t - 1));
    let clause2 = if t >= 2 { clause_two(&parts, s, t) } else { None };
    Ok(SystemSST { s, t, tau, alpha: alpha.clone(), parts, clause1, clause2 })
}

fn clause_two(parts: &[SystemPart], s: usize, t: u32) -> Option<ClauseViolation> {
    let mut order: Vec<usize> = (0..parts.len()).collect();
    order.sort_by_key(|&i| key(parts[i].core));
    let mut shadows: HashMap<(usize, u32), HashSet<Mask>> = HashMap::new();
    let mut shadow = |i: usize, h: u32| -> HashSet<Mask> {
        shadows.entry((i, h)).or_insert_with(|| parts[i].family.shadow(h).members().iter().copied().collect()).clone()
    };
    let mut chosen: Vec<usize> = Vec::with_capacity(s);
    let mut out = None;
    #[allow(clippy::too_many_arguments)]
    fn rec(
        parts: &[SystemPart],
        order: &[usize],
        from: usize,
        kernel: Mask,
        petals: Mask,
        chosen: &mut Vec<usize>,
        s: usize,
        t: u32,
        visit: &mut dyn FnMut(&[usize], Mask) -> bool,
    ) -> bool {
        if chosen.len() == s {
            return visit(chosen, kernel);
        }
        for (pos, &i) in order.iter().enumerate().skip(from) {
            let m = parts[i].core;
            let (nk, np) = match chosen.first() {
                None => (m, 0),
                Some(&j) if chosen.len() == 1 => {
                    let k = parts[j].core & m;
                    if k.count_ones() + 2 > t {
                        continue;
                    }
                    (k, (parts[j].core | m) & !k)
                }
                Some(_) => {
                    if m & kernel != kernel || m & !kernel & petals != 0 {
                        continue;
                    }
                    (kernel, petals | (m & !kernel))
                }
            };
            chosen.push(i);
            if rec(parts, order, pos + 1, nk, np, chosen, s, t, visit) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    let mut visit = |sel: &[usize], kernel: Mask| -> bool {
        let h = t - kernel.count_ones() - 1;
        let mut common = shadow(sel[0], h);
        for &i in &sel[1..] {
            let other = shadow(i, h);
            common.retain(|x| other.contains(x));
            if common.is_empty() {
                return false;
            }
        }
        let p = common.into_iter().min_by_key(|&x| key(x)).expect("nonempty");
        out = Some(ClauseViolation { cores: sel.iter().map(|&i| parts[i].core).collect(), kernel, common: p });
        true
    };
    rec(parts, &order, 0, 0, 0, &mut chosen, s, t, &mut visit);
    out
}

#[derive(Clone, Debug, Default)]
pub struct ClusterOptions {
    /// Exact value of the sunflower-free number used for the count bound;
    /// the universal bound is used otherwise.
    pub phi: Option<u64>,
    pub r: Option<Rational>,
    pub simplify: SimplifyOptions,
    pub eps: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster {
    /// The shared `(t-1)`-set.
    pub anchor: Mask,
    pub cores: Vec<Mask>,
    pub family: SetFamily,
    pub sunflower_free: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    /// Minimum `t`-uniform family covering the leftover cores.
    pub tail: SetFamily,
    pub family: SetFamily,
    #[serde(serialize_with = "ser_rational")]
    pub lambda: Rational,
    /// `Σ |U_S|` over cores not covered by `family`.
    pub uncovered_weight: u64,
    pub count_bound: BoundCheck,
    pub remainder_bound: Option<BoundCheck>,
}

fn min_cover(cores: &[Mask], t: u32) -> Vec<Mask> {
    fn rec(cores: &[Mask], t: u32, budget: usize, chosen: &mut Vec<Mask>) -> bool {
        let Some(&first) = cores.iter().find(|&&c| !chosen.iter().any(|&x| x & c == x)) else {
            return true;
        };
        if chosen.len() == budget {
            return false;
        }
        let base = first;
        for l in k_subsets(base.count_ones(), t) {
            let x = deposit(l, base);
            chosen.push(x);
            if rec(cores, t, budget, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    let mut chosen = Vec::new();
    for budget in 0..=cores.len() {
        chosen.clear();
        if rec(cores, t, budget, &mut chosen) {
            break;
        }
    }
    chosen.sort_unstable_by_key(|&x| key(x));
    chosen
}

/// Groups cores sharing a `(t-1)`-set in their `U`-shadows and simplifies
/// each group.
pub fn cluster_system(u: &SystemSST, a: &Domain, lambda: &Rational, opts: &ClusterOptions) -> Result<Clustering> {
    if *lambda <= Rational::zero() || *lambda > Rational::one() {
        return Err(Error::precondition("λ must lie in (0, 1]"));
    }
    let t = u.t;
    let s = u.s;
    let amb = a.ambient();
    let h = t - 1;
    let mut shadows: Vec<HashSet<Mask>> = Vec::with_capacity(u.parts.len());
    for p in &u.parts {
        let sh: HashSet<Mask> = p.family.shadow(h).members().iter().copied().collect();
        let full = amb.restrict(p.core).shadow(h).len() as u64;
        if int(sh.len() as u64) < lambda * int(full) {
            return Err(Error::precondition(format!("part {:#x} has a (t-1)-shadow below λ", p.core)));
        }
        shadows.push(sh);
    }
    let eps = opts.eps.clone().unwrap_or_else(|| ratio(1, 2));
    let mut live: Vec<usize> = (0..u.parts.len()).collect();
    let mut clusters = Vec::new();
    while lambda * int(live.len() as u64) > Rational::one() {
        let mut hits: BTreeMap<(u32, Mask), usize> = BTreeMap::new();
        for &i in &live {
            for &x in &shadows[i] {
                *hits.entry(key(x)).or_insert(0) += 1;
            }
        }
        let best = hits.iter().fold(None::<((u32, Mask), usize)>, |acc, (&k, &c)| match acc {
            Some((_, bc)) if bc >= c => acc,
            _ => Some((k, c)),
        });
        let Some(((_, anchor), count)) = best else {
            return Err(Error::precondition("clustering stalled: no shared shadow set"));
        };
        if int(count as u64) < lambda * int(live.len() as u64) {
            return Err(Error::precondition("clustering stalled: best shadow set is hit by fewer than λ|S| cores"));
        }
        let (inside, rest): (Vec<usize>, Vec<usize>) = live.iter().partition(|&&i| shadows[i].contains(&anchor));
        let cores = SetFamily::from_masks(a.n(), inside.iter().map(|&i| u.parts[i].core))?;
        let so = SimplifyOptions { r: opts.r.clone().or(opts.simplify.r.clone()), ..opts.simplify.clone() };
        let simp = simplify(&cores, a, s, t, &eps, &so)?;
        clusters.push(Cluster {
            anchor,
            cores: cores.members().to_vec(),
            family: simp.family,
            sunflower_free: simp.sunflower_free,
        });
        live = rest;
    }
    let leftover: Vec<Mask> = live.iter().map(|&i| u.parts[i].core).collect();
    if leftover.iter().any(|c| c.count_ones() < t) {
        return Err(Error::precondition("a leftover core has fewer than t elements"));
    }
    let tail = SetFamily::from_masks(a.n(), min_cover(&leftover, t))?;
    let family = clusters.iter().fold(tail.clone(), |acc, c| acc.union(&c.family));
    let uncovered_weight = u
        .parts
        .iter()
        .filter(|p| !family.members().iter().any(|&x| x & p.core == x))
        .map(|p| p.family.len() as u64)
        .sum();

    let q = u.parts.iter().map(|p| p.core.count_ones()).max().unwrap_or(0);
    let big = int(amb.shadow_up_to(q).len() as u64) * lambda;
    let l = if big > Rational::one() { interval::ln(&big) } else { Interval::int(0) };
    let phi = match opts.phi {
        Some(v) => Interval::int(v),
        None => core_constant(s, t).powu(t),
    };
    let inv = lambda.recip();
    let rhs = phi.mul(&l).scale(&int(2)).add(&Interval::int(1)).scale(&inv);
    let m = clusters.len() as u64;
    let hyp = opts.phi.is_some()
        && clusters.iter().all(|c| c.sunflower_free)
        && (m == 0 || l.scale(&inv).lo >= ratio(1, 2));
    let count_bound = BoundCheck::new("cluster count", int(family.len() as u64), rhs, hyp, hyp).enforce()?;
    let remainder_bound = opts.r.as_ref().map(|r| {
        let a_t = a.max_link(t).map(|(_, c)| c).unwrap_or(0);
        let rhs = core_constant(s, t).powu(t).mul(&l).scale(&(int(4) * int(a_t) / (lambda * r)));
        BoundCheck::new("cluster remainder", int(uncovered_weight), rhs, false, false)
    });
    Ok(Clustering {
        clusters,
        tail,
        family,
        lambda: lambda.clone(),
        uncovered_weight,
        count_bound,
        remainder_bound,
    })
}
