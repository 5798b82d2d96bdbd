use num_traits::{One, Zero};
use serde::Serialize;

use crate::bits::{key, Mask};
use crate::domains::{Ambient, Domain};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::scalar::{int, power_table, ratio, ser_rational, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogeneityVerdict {
    #[serde(serialize_with = "ser_rational")]
    pub tau: Rational,
    pub ok: bool,
    /// Maximizer of `μ(F(X)) / (τ^|X| μ(F))`.
    pub worst: Mask,
    #[serde(serialize_with = "ser_rational")]
    pub worst_ratio: Rational,
}

fn check_inside(f: &SetFamily, amb: Ambient<'_>) -> Result<()> {
    match f.members().iter().find(|&&m| !amb.contains(m)) {
        Some(&m) => Err(Error::precondition(format!("set {m:#x} is not a member of the ambient family"))),
        None => Ok(()),
    }
}

pub fn check_tau_homogeneous(f: &SetFamily, a: &Domain, tau: &Rational) -> Result<HomogeneityVerdict> {
    check_tau_homogeneous_in(f, a.ambient(), tau)
}

/// Homogeneity of `f` relative to the ambient link `amb`.
pub fn check_tau_homogeneous_in(f: &SetFamily, amb: Ambient<'_>, tau: &Rational) -> Result<HomogeneityVerdict> {
    check_inside(f, amb)?;
    if f.is_empty() {
        return Ok(HomogeneityVerdict { tau: tau.clone(), ok: true, worst: 0, worst_ratio: Rational::zero() });
    }
    let pow = power_table(tau, amb.uniformity());
    let total = int(amb.size());
    let fl = int(f.len() as u64);
    let mut worst = 0;
    let mut worst_ratio = Rational::zero();
    for (x, c) in f.subset_counts() {
        let r = int(c) * &total / (int(amb.link(x)) * &fl * &pow[x.count_ones() as usize]);
        if r > worst_ratio {
            worst_ratio = r;
            worst = x;
        }
    }
    Ok(HomogeneityVerdict { tau: tau.clone(), ok: worst_ratio <= Rational::one(), worst, worst_ratio })
}

pub fn max_homogeneous_restriction(f: &SetFamily, a: &Domain, tau: &Rational) -> Result<Mask> {
    max_homogeneous_restriction_in(f, a.ambient(), tau)
}

/// Largest `S` with `μ(F(S)) >= τ^|S| μ(F)`, smallest mask among ties.
///
/// The link `F(S)` is then `τ`-homogeneous in `A(S)`, which is re-checked.
pub fn max_homogeneous_restriction_in(f: &SetFamily, amb: Ambient<'_>, tau: &Rational) -> Result<Mask> {
    if f.is_empty() {
        return Err(Error::precondition("max_homogeneous_restriction of an empty family"));
    }
    check_inside(f, amb)?;
    let pow = power_table(tau, amb.uniformity());
    let total = int(amb.size());
    let fl = int(f.len() as u64);
    let mut cands = f.subset_counts();
    cands.sort_by_key(|&(x, _)| (std::cmp::Reverse(x.count_ones()), x));
    let s = cands
        .iter()
        .find(|&&(x, c)| int(c) * &total >= &pow[x.count_ones() as usize] * &fl * int(amb.link(x)))
        .map(|&(x, _)| x)
        .expect("S = ∅ always qualifies");
    let link = f.link(s);
    let v = check_tau_homogeneous_in(&link, amb.restrict(s), tau)?;
    if !v.ok {
        return Err(Error::assertion(format!("restriction to {s:#x} is not {tau}-homogeneous (worst {:#x})", v.worst)));
    }
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct HomogeneousSubfamily {
    pub family: SetFamily,
    /// Sparse cores `P ∈ ∂F` whose stars were removed.
    pub removed_cores: Vec<Mask>,
    /// `(1 - 2αk)|F|`.
    #[serde(serialize_with = "ser_rational")]
    pub size_bound: Rational,
    /// `α(τ/α)^t`.
    #[serde(serialize_with = "ser_rational")]
    pub link_tau: Rational,
    pub links_checked: usize,
}

pub fn homogeneous_subfamily(f: &SetFamily, a: &Domain, tau: &Rational, alpha: &Rational, t: u32) -> Result<HomogeneousSubfamily> {
    homogeneous_subfamily_in(f, a.ambient(), tau, alpha, t)
}

/// Removes the stars of sparse small cores so that every surviving link
/// is homogeneous with parameter `α(τ/α)^t`.
pub fn homogeneous_subfamily_in(
    f: &SetFamily,
    amb: Ambient<'_>,
    tau: &Rational,
    alpha: &Rational,
    t: u32,
) -> Result<HomogeneousSubfamily> {
    let k = amb.uniformity();
    if t == 0 {
        return Err(Error::precondition("t must be at least 1"));
    }
    if *alpha <= Rational::zero() || k > 0 && *alpha > ratio(1, 2 * k as i64) {
        return Err(Error::precondition(format!("alpha must lie in (0, 1/(2k)] with k={k}")));
    }
    let hv = check_tau_homogeneous_in(f, amb, tau)?;
    if !hv.ok {
        return Err(Error::precondition(format!("family is not {tau}-homogeneous (worst set {:#x})", hv.worst)));
    }
    let total = int(amb.size());
    let fl = int(f.len().max(1) as u64);
    let apow = power_table(alpha, t);
    let counts = f.subset_counts();
    let removed: Vec<Mask> = counts
        .iter()
        .filter(|&&(p, _)| p != 0 && p.count_ones() < t)
        .filter(|&&(p, c)| int(c) * &total < &apow[p.count_ones() as usize] * &fl * int(amb.link(p)))
        .map(|&(p, _)| p)
        .collect();
    let g = f.filter(|m| !removed.iter().any(|&p| p & m == p));
    let size_bound = (Rational::one() - int(2 * k as u64) * alpha) * int(f.len() as u64);
    if int(g.len() as u64) < size_bound {
        return Err(Error::assertion(format!("subfamily has {} < (1-2αk)|F| members", g.len())));
    }
    let link_tau = alpha * (tau / alpha).powu(t);
    let mut links_checked = 0;
    let mut ps: Vec<Mask> = counts.iter().map(|&(p, _)| p).filter(|p| p.count_ones() < t).collect();
    ps.sort_unstable_by_key(|&p| key(p));
    for p in ps {
        if g.link_len(p) == 0 {
            continue;
        }
        links_checked += 1;
        let v = check_tau_homogeneous_in(&f.link(p), amb.restrict(p), &link_tau)?;
        if !v.ok {
            return Err(Error::assertion(format!("link at {p:#x} fails {link_tau}-homogeneity")));
        }
    }
    Ok(HomogeneousSubfamily { family: g, removed_cores: removed, size_bound, link_tau, links_checked })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneity_examples() {
        let a = Domain::binomial(4, 2).unwrap();
        let v = check_tau_homogeneous(a.family(), &a, &int(1)).unwrap();
        assert!(v.ok);
        let f = a.family().with_members([0b11]);
        let v = check_tau_homogeneous(&f, &a, &int(1)).unwrap();
        assert!(!v.ok);
        assert_eq!((v.worst, v.worst_ratio), (0b11, int(6)));
        let outside = SetFamily::from_masks(4, [0b111]).unwrap();
        assert!(check_tau_homogeneous(&outside, &a, &int(1)).is_err());
    }

    #[test]
    fn restriction_examples() {
        let a = Domain::binomial(6, 3).unwrap();
        let star = a.family().trace_set(1);
        assert_eq!(max_homogeneous_restriction(&star, &a, &ratio(3, 2)).unwrap(), 1);
        assert_eq!(max_homogeneous_restriction(&star, &a, &int(6)).unwrap(), 0);
        assert_eq!(max_homogeneous_restriction(a.family(), &a, &int(2)).unwrap(), 0);
        let single = a.family().with_members([0b111]);
        assert_eq!(max_homogeneous_restriction(&single, &a, &int(2)).unwrap(), 0b111);
    }

    #[test]
    fn subfamily_examples() {
        let a = Domain::binomial(6, 3).unwrap();
        let g = homogeneous_subfamily(a.family(), &a, &int(1), &ratio(1, 6), 2).unwrap();
        assert_eq!(g.family, *a.family());
    }
}
