//! Sunflower-free constructions used as lower bounds.

use serde::Serialize;

use crate::bits::{binom, k_subsets, Mask};
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::interval::Interval;
use crate::report::BoundCheck;
use crate::scalar::{from_biguint, int, Rational};
use crate::sunflower::{find_sunflower, CorePredicate};

const MAX_ENUMERATION: u64 = 5_000_000;

fn check_base(t_fam: &SetFamily, s: usize, t: u32) -> Result<()> {
    if t == 0 || s < 2 {
        return Err(Error::precondition("need t >= 1 and s >= 2"));
    }
    if let Some(&m) = t_fam.members().iter().find(|m| m.count_ones() != t) {
        return Err(Error::precondition(format!("{m:#x} is not a {t}-set")));
    }
    if let Some(w) = find_sunflower(t_fam, &CorePredicate::any(s)) {
        return Err(Error::SunflowerPresent { context: "base family".into(), witness: w });
    }
    Ok(())
}

/// `{F ∈ C([n],k) : F ∩ supp(T) ∈ T}`.
pub fn example_23(n: u32, k: u32, s: usize, t: u32, t_fam: &SetFamily) -> Result<SetFamily> {
    check_base(t_fam, s, t)?;
    if t_fam.n() != n {
        return Err(Error::precondition("base family lives on a different ground set"));
    }
    if k < t || k > n {
        return Err(Error::precondition("need t <= k <= n"));
    }
    if binom(n as u64, k as u64) > MAX_ENUMERATION.into() {
        return Err(Error::capacity(format!("C({n},{k}) too large to enumerate")));
    }
    let supp = t_fam.support();
    let f = SetFamily::from_masks(n, k_subsets(n, k).into_iter().filter(|&m| t_fam.contains(m & supp)))?;
    if let Some(w) = find_sunflower(&f, &CorePredicate::at_most(s, t - 1)) {
        return Err(Error::SunflowerPresent { context: "example construction".into(), witness: w });
    }
    Ok(f)
}

/// `|T| C(n - |supp T|, k - t)`, the exact size of [`example_23`].
pub fn example_23_count(n: u64, k: u64, t: u64, size: u64, support: u64) -> Rational {
    int(size) * from_biguint(&binom(n - support, k - t))
}

/// `m C(n-t,k-t) - t m^2 (k-t)/(n-t) C(n-t,k-t)` with `m = |T|`.
pub fn example_23_lower_bound(n: u64, k: u64, t: u64, size: u64) -> Rational {
    let c = from_biguint(&binom(n - t, k - t));
    int(size) * &c - int(t * size * size * (k - t)) * &c / int(n - t)
}

/// The product of `t` blocks of `s-1` elements: `(s-1)^t` sets, no
/// `s`-sunflower.
pub fn product_family(s: usize, t: u32) -> Result<SetFamily> {
    if s < 2 || t == 0 {
        return Err(Error::precondition("need s >= 2 and t >= 1"));
    }
    let w = (s - 1) as u32;
    if w * t > 64 {
        return Err(Error::capacity("product construction needs more than 64 elements"));
    }
    let mut sets: Vec<Mask> = vec![0];
    for j in 0..t {
        sets = sets.iter().flat_map(|&m| (0..w).map(move |e| m | 1 << (j * w + e))).collect();
    }
    SetFamily::from_masks(w * t, sets)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FStar {
    pub family: SetFamily,
    /// `|A[T*]|`.
    pub trace_size: u64,
    /// `|A[T*]| - |F*| <= Σ_T Σ_{x ∈ supp \ T} |A(T ⊔ {x})|`.
    pub gap: BoundCheck,
    /// The same gap against `|T*| |supp T*| A_t / r`.
    pub spread_gap: Option<BoundCheck>,
}

/// `⋃_{T ∈ T*} A(T, supp T*) ∨ {T}`.
pub fn fstar_family(a: &Domain, t_star: &SetFamily, s: usize, t: u32, r: Option<&Rational>) -> Result<FStar> {
    check_base(t_star, s, t)?;
    let amb = a.ambient();
    if let Some(&m) = t_star.members().iter().find(|&&m| amb.link(m) == 0) {
        return Err(Error::precondition(format!("{m:#x} is not in the t-shadow of the domain")));
    }
    let supp = t_star.support();
    let family = a.family().filter(|m| t_star.contains(m & supp));
    if let Some(w) = find_sunflower(&family, &CorePredicate::at_most(s, t - 1)) {
        return Err(Error::SunflowerPresent { context: "F* construction".into(), witness: w });
    }
    let trace_size = a.family().trace_cover(t_star).len() as u64;
    let gap_v = int(trace_size - family.len() as u64);
    let mid: u64 = t_star
        .members()
        .iter()
        .flat_map(|&tm| crate::bits::elements(supp & !tm).map(move |x| tm | 1 << x))
        .map(|y| amb.link(y))
        .sum();
    let gap = BoundCheck::new("F* gap", gap_v.clone(), Interval::int(mid), true, true).enforce()?;
    let spread_gap = match r {
        Some(r) => {
            let a_t = a.max_link(t)?.1;
            let hyp = a.check_rt_spread(r, t).ok;
            let rhs = int(t_star.len() as u64 * supp.count_ones() as u64 * a_t) / r;
            Some(BoundCheck::new("F* gap (spread)", gap_v, Interval::exact(rhs), hyp, hyp).enforce()?)
        }
        None => None,
    };
    Ok(FStar { family, trace_size, gap, spread_gap })
}
