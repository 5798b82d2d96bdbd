//! Simplification of core families and the down-closed cover.

use num_traits::{One, Zero};
use serde::Serialize;

use super::{core_constant, require_inside, Extraction, Part};
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::interval::{self, Interval};
use crate::report::BoundCheck;
use crate::scalar::{int, ratio, ser_rational, Rational, Scalar};
use crate::spread::max_spread_restriction;
use crate::sunflower::{find_sunflower, CorePredicate};

#[derive(Clone, Debug, Default)]
pub struct SimplifyOptions {
    /// Overrides the default `α = max(sq, 2^14 s log2 t)`.
    pub alpha: Option<Rational>,
    /// Top layer; defaults to the largest member size.
    pub q: Option<u32>,
    /// Spreadness parameter of the ambient, only used for the cover bound.
    pub r: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplifyLayer {
    pub i: u32,
    pub size: u32,
    pub extracted: Vec<Extraction>,
    /// Sets of this layer that no extracted `T` absorbed.
    pub residual: SetFamily,
    pub bound: BoundCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Simplification {
    pub family: SetFamily,
    pub s: usize,
    pub t: u32,
    pub q: u32,
    pub alpha: Interval,
    pub layers: Vec<SimplifyLayer>,
    pub sunflower_free: bool,
    /// Whether sunflower-freeness of the output was required.
    pub sunflower_asserted: bool,
    /// `|A[S \ S[T]]|`.
    pub uncovered: u64,
    pub cover_bound: BoundCheck,
}

pub(crate) fn default_alpha(s: usize, t: u32, q: u32) -> Interval {
    let sq = int(s as u64 * q as u64);
    let c = core_constant(s, t);
    if c.lo >= sq {
        c
    } else if c.hi <= sq {
        Interval::exact(sq)
    } else {
        Interval { lo: sq, hi: c.hi }
    }
}

/// `count * α^j > total`, failing when the enclosure cannot decide.
fn exceeds(count: u64, alpha: &Interval, j: u32, total: u64) -> Result<bool> {
    let lhs = alpha.powu(j).scale(&int(count));
    let total = int(total);
    if lhs.lo > total {
        Ok(true)
    } else if lhs.hi <= total {
        Ok(false)
    } else {
        Err(Error::precondition("α enclosure too wide to decide a comparison; pass an exact α"))
    }
}

/// Replaces the core family `S` by a family of sets of size at most `t`
/// with no `s`-sunflower, layer by layer from the top.
pub fn simplify(sf: &SetFamily, a: &Domain, s: usize, t: u32, eps: &Rational, opts: &SimplifyOptions) -> Result<Simplification> {
    if s < 2 || t == 0 {
        return Err(Error::precondition("need s >= 2 and t >= 1"));
    }
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(Error::precondition("ε must lie in (0, 1)"));
    }
    if sf.n() != a.n() {
        return Err(Error::precondition("family and domain have different ground sets"));
    }
    let q = opts.q.unwrap_or_else(|| sf.max_size().unwrap_or(t).max(t));
    let amb = a.ambient();
    if let Some(&m) = sf.members().iter().find(|&&m| m.count_ones() > q || amb.link(m) == 0) {
        return Err(Error::precondition(format!("{m:#x} is not in the shadow of the domain up to size {q}")));
    }
    if let Some(w) = find_sunflower(sf, &CorePredicate::at_most(s, t - 1).with_degenerate()) {
        return Err(Error::SunflowerPresent { context: "simplify input".into(), witness: w });
    }
    let alpha = match &opts.alpha {
        Some(al) if *al > Rational::one() => Interval::exact(al.clone()),
        Some(_) => return Err(Error::precondition("α must exceed 1")),
        None => default_alpha(s, t, q),
    };
    let mut cur = sf.clone();
    let mut layers = Vec::new();
    for i in 0..q.saturating_sub(t) {
        let size = q - i;
        let mut w = cur.layer(size);
        let mut extracted = Vec::new();
        loop {
            if w.is_empty() {
                break;
            }
            let mut cands = w.subset_counts();
            cands.sort_by_key(|&(x, _)| (std::cmp::Reverse(x.count_ones()), x));
            let mut pick = None;
            for &(x, c) in &cands {
                if exceeds(c, &alpha, x.count_ones(), w.len() as u64)? {
                    pick = Some(x);
                    break;
                }
            }
            match pick {
                Some(x) if x.count_ones() < size => {
                    extracted.push(Extraction { set: x, family: w.link(x) });
                    w = w.filter(|m| m & x != x);
                }
                _ => break,
            }
        }
        let rhs = core_constant(s, size).powu(t).mul(&alpha.powu(size - t));
        let bound = BoundCheck::new(format!("residual layer {size}"), int(w.len() as u64), rhs, true, true).enforce()?;
        let lower = cur.layers_up_to(size - 1);
        cur = lower.union(&lower.with_members(extracted.iter().map(|e| e.set)));
        layers.push(SimplifyLayer { i, size, extracted, residual: w, bound });
    }
    let sunflower_asserted = alpha.lo >= int(s as u64 * q as u64);
    let witness = find_sunflower(&cur, &CorePredicate::any(s));
    if sunflower_asserted {
        if let Some(w) = witness {
            return Err(Error::SunflowerPresent { context: "simplified family".into(), witness: w });
        }
    }
    let lost = sf.difference(&sf.trace_cover(&cur));
    let uncovered = a.family().trace_cover(&lost).len() as u64;
    let a_t = a.max_link(t).map(|(_, c)| c).unwrap_or(0);
    let rhs = core_constant(s, t)
        .powu(t)
        .scale(&(eps / (Rational::one() - eps)))
        .scale(&int(a_t));
    let hyp = t >= 2 && opts.r.as_ref().is_some_and(|r| eps * r > int(1 << 17) * int(s as u64 * q as u64));
    let cover_bound = BoundCheck::new("uncovered weight", int(uncovered), rhs, hyp, hyp).enforce()?;
    Ok(Simplification {
        family: cur,
        s,
        t,
        q,
        alpha,
        layers,
        sunflower_free: witness.is_none(),
        sunflower_asserted,
        uncovered,
        cover_bound,
    })
}

#[derive(Clone, Debug, Default)]
pub struct CoverOptions {
    /// Peeling threshold; defaults to `(t+1) log2 r`.
    pub w: Option<Rational>,
    pub alpha: Option<Rational>,
    /// Defaults to `1/2`.
    pub eps: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cover {
    pub family: SetFamily,
    /// `F \ F[T]`.
    pub residue: SetFamily,
    /// 1 when the uniformity is already at most `w`, else 2.
    pub case: u8,
    pub w: Interval,
    #[serde(rename = "r", serialize_with = "ser_rational")]
    pub r: Rational,
    /// Spread restrictions found while peeling (case 2).
    pub peeled: Vec<Part>,
    pub collected: SetFamily,
    pub simplification: Option<Simplification>,
    pub bound: BoundCheck,
}

/// `n > w`, using the midpoint only when the enclosure straddles `n`.
fn above(n: u32, w: &Interval) -> bool {
    let n = int(n as u64);
    if n > w.hi {
        true
    } else if n <= w.lo {
        false
    } else {
        n.to_f64() > w.mid_f64()
    }
}

/// A family `T` of sets of size at most `t` without `s`-sunflowers such that
/// `F[T]` captures all but a small part of the `k`-uniform family `F`.
pub fn down_closed_cover(f: &SetFamily, a: &Domain, s: usize, t: u32, r: &Rational, opts: &CoverOptions) -> Result<Cover> {
    require_inside(f, a)?;
    if *r <= int(2) {
        return Err(Error::precondition("r must exceed 2"));
    }
    if let Some(w) = find_sunflower(f, &CorePredicate::at_most(s, t.saturating_sub(1)).with_degenerate()) {
        return Err(Error::SunflowerPresent { context: "input family".into(), witness: w });
    }
    let eps = opts.eps.clone().unwrap_or_else(|| ratio(1, 2));
    let w = match &opts.w {
        Some(w) => Interval::exact(w.clone()),
        None => interval::log2(r).scale(&int(t as u64 + 1)),
    };
    let k = a.k();
    let ks = f.max_size().unwrap_or(k);
    let mut peeled = Vec::new();
    let (case, collected) = if !above(ks, &w) {
        (1, f.clone())
    } else {
        let half = r / int(2);
        let mut cur = f.clone();
        while !cur.is_empty() {
            let x = max_spread_restriction(&cur, &half)?;
            if above(x.count_ones(), &w) {
                break;
            }
            peeled.push(Part { core: x, family: cur.link(x) });
            cur = cur.filter(|m| m & x != x);
        }
        (2, f.with_members(peeled.iter().map(|p| p.core)))
    };
    let simplification = if collected.is_empty() {
        None
    } else {
        let so = SimplifyOptions { alpha: opts.alpha.clone(), q: collected.max_size(), r: Some(r.clone()) };
        match simplify(&collected, a, s, t, &eps, &so) {
            Err(Error::SunflowerPresent { witness, .. }) if case == 2 => {
                return Err(Error::SunflowerPresent { context: "collected cores".into(), witness })
            }
            other => Some(other?),
        }
    };
    let family = simplification.as_ref().map_or_else(|| f.with_members([]), |s| s.family.clone());
    let residue = f.difference(&f.trace_cover(&family));
    let a_t = a.max_link(t).map(|(_, c)| c).unwrap_or(0);
    let lr = interval::log2(r);
    let rhs = core_constant(s, t)
        .powu(t)
        .mul(&lr)
        .scale(&(int(1 << 19) * int(s as u64 * (t as u64 + 1)) * int(a_t) / r));
    let c1 = lr.scale(&(int(1 << 18) * int(s as u64 * (t as u64 + 1))));
    let c2 = interval::log2(&int(k.max(1) as u64)).scale(&(int(1 << 15) * int(s as u64)));
    let hyp = t >= 2 && *r >= c1.hi && *r >= c2.hi;
    let bound = BoundCheck::new("cover residue", int(residue.len() as u64), rhs, hyp, hyp).enforce()?;
    Ok(Cover { family, residue, case, w, r: r.clone(), peeled, collected, simplification, bound })
}
