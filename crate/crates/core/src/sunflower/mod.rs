//! Sunflower detection and extremal search.

mod search;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bits::{key, Mask};
use crate::error::{Error, Result};
use crate::family::{SetFamily, SunflowerWitness};

pub use search::{max_sunflower_free, max_sunflower_free_in, phi_exact, PhiResult, SearchResult, DEFAULT_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", content = "size", rename_all = "snake_case")]
pub enum CoreMode {
    Exact(u32),
    AtMost(u32),
    Any,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CorePredicate {
    pub mode: CoreMode,
    pub s: usize,
    /// Treats any member of size at most the core bound as `s` copies of
    /// itself, i.e. as a sunflower with empty petals.
    pub degenerate_small_sets: bool,
}

impl CorePredicate {
    pub fn exact(s: usize, core: u32) -> Self {
        CorePredicate { mode: CoreMode::Exact(core), s, degenerate_small_sets: false }
    }

    pub fn at_most(s: usize, core: u32) -> Self {
        CorePredicate { mode: CoreMode::AtMost(core), s, degenerate_small_sets: false }
    }

    pub fn any(s: usize) -> Self {
        CorePredicate { mode: CoreMode::Any, s, degenerate_small_sets: false }
    }

    pub fn with_degenerate(mut self) -> Self {
        self.degenerate_small_sets = true;
        self
    }

    pub fn admits(&self, core_size: u32) -> bool {
        match self.mode {
            CoreMode::Exact(c) => core_size == c,
            CoreMode::AtMost(c) => core_size <= c,
            CoreMode::Any => true,
        }
    }

    fn degenerate_bound(&self) -> Option<u32> {
        match self.mode {
            CoreMode::AtMost(c) if self.degenerate_small_sets => Some(c),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.s < 2 {
            return Err(Error::precondition("a sunflower needs at least 2 petals"));
        }
        Ok(())
    }
}

impl fmt::Display for CorePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            CoreMode::Exact(c) => write!(f, "s={}, core=exact:{c}", self.s),
            CoreMode::AtMost(c) => write!(f, "s={}, core=atmost:{c}", self.s),
            CoreMode::Any => write!(f, "s={}, core=any", self.s),
        }
    }
}

impl FromStr for CoreMode {
    type Err = Error;

    /// `exact:<c>`, `atmost:<c>` or `any`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "any" {
            return Ok(CoreMode::Any);
        }
        let (kind, v) = s.split_once(':').ok_or_else(|| Error::parse(format!("bad core predicate {s:?}")))?;
        let v: u32 = v.parse().map_err(|_| Error::parse(format!("bad core size in {s:?}")))?;
        match kind {
            "exact" => Ok(CoreMode::Exact(v)),
            "atmost" | "at_most" | "le" => Ok(CoreMode::AtMost(v)),
            _ => Err(Error::parse(format!("unknown core mode {kind:?}"))),
        }
    }
}

/// The common core if the sets form a sunflower.
pub fn is_sunflower(sets: &[Mask]) -> Result<Option<Mask>> {
    if sets.len() < 2 {
        return Err(Error::precondition("need at least two sets"));
    }
    let mut sorted = sets.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::precondition("duplicate sets"));
    }
    let core = sets.iter().fold(!0u64, |a, &m| a & m);
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if sets[i] & sets[j] != core {
                return Ok(None);
            }
        }
    }
    Ok(Some(core))
}

/// First `need` pairwise disjoint entries of `petals` (lexicographically
/// least index tuple), avoiding `forbidden`.
pub(crate) fn disjoint_pick(petals: &[Mask], need: usize, forbidden: Mask) -> Option<Vec<usize>> {
    fn rec(p: &[Mask], from: usize, need: usize, used: Mask, out: &mut Vec<usize>) -> bool {
        if need == 0 {
            return true;
        }
        if p.len() - from < need {
            return false;
        }
        for i in from..p.len() {
            if p.len() - i < need {
                return false;
            }
            if p[i] & used == 0 {
                out.push(i);
                if rec(p, i + 1, need - 1, used | p[i], out) {
                    return true;
                }
                out.pop();
            }
        }
        false
    }
    let mut out = Vec::with_capacity(need);
    rec(petals, 0, need, forbidden, &mut out).then_some(out)
}

/// A sunflower among the members matching `pred`, or `None` after an
/// exhaustive search.
///
/// Cores are tried in canonical order; every core of a sunflower with at
/// least two petals is the intersection of two members, so those are the
/// only candidates.
pub fn find_sunflower(f: &SetFamily, pred: &CorePredicate) -> Option<SunflowerWitness> {
    pred.validate().ok()?;
    let s = pred.s;
    if let Some(c) = pred.degenerate_bound() {
        if let Some(&m) = f.members().iter().find(|m| m.count_ones() <= c) {
            return Some(SunflowerWitness { petals: vec![m; s], core: m, s, degenerate: true });
        }
    }
    if f.len() < s {
        return None;
    }
    let members = f.members();
    let mut cores: Vec<Mask> = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let c = members[i] & members[j];
            if pred.admits(c.count_ones()) {
                cores.push(c);
            }
        }
    }
    cores.sort_unstable_by_key(|&c| key(c));
    cores.dedup();
    for c in cores {
        let sets: Vec<Mask> = members.iter().copied().filter(|&m| m & c == c).collect();
        if sets.len() < s {
            continue;
        }
        let petals: Vec<Mask> = sets.iter().map(|&m| m & !c).collect();
        if let Some(idx) = disjoint_pick(&petals, s, 0) {
            return Some(SunflowerWitness { petals: idx.iter().map(|&i| sets[i]).collect(), core: c, s, degenerate: false });
        }
    }
    None
}

/// Whether adding `x` to the sunflower-free `members` creates a sunflower
/// matching `pred` (necessarily one containing `x`).
pub fn creates_sunflower(members: &[Mask], x: Mask, pred: &CorePredicate) -> bool {
    if let Some(c) = pred.degenerate_bound() {
        if x.count_ones() <= c {
            return true;
        }
    }
    let need = pred.s - 1;
    let mut cores: Vec<Mask> = members.iter().map(|&g| g & x).filter(|c| pred.admits(c.count_ones())).collect();
    cores.sort_unstable();
    cores.dedup();
    let mut petals = Vec::new();
    for c in cores {
        petals.clear();
        petals.extend(members.iter().filter(|&&g| g != x && g & x == c).map(|&g| g & !c));
        if petals.len() >= need && disjoint_pick(&petals, need, 0).is_some() {
            return true;
        }
    }
    false
}

/// Brute force over all `s`-subsets; the oracle for [`find_sunflower`].
pub fn has_sunflower_bruteforce(members: &[Mask], pred: &CorePredicate) -> bool {
    fn rec(m: &[Mask], from: usize, chosen: &mut Vec<Mask>, s: usize, pred: &CorePredicate) -> bool {
        if chosen.len() == s {
            return matches!(is_sunflower(chosen), Ok(Some(c)) if pred.admits(c.count_ones()));
        }
        for i in from..m.len() {
            chosen.push(m[i]);
            if rec(m, i + 1, chosen, s, pred) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    if let Some(c) = pred.degenerate_bound() {
        if members.iter().any(|m| m.count_ones() <= c) {
            return true;
        }
    }
    rec(members, 0, &mut Vec::new(), pred.s, pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Domain;

    fn m(s: &[u32]) -> Mask {
        s.iter().fold(0, |a, &e| a | 1 << (e - 1))
    }

    #[test]
    fn is_sunflower_examples() {
        assert_eq!(is_sunflower(&[m(&[1, 2]), m(&[1, 3]), m(&[1, 4])]).unwrap(), Some(m(&[1])));
        assert_eq!(is_sunflower(&[m(&[1, 2]), m(&[3, 4]), m(&[5, 6])]).unwrap(), Some(0));
        assert_eq!(is_sunflower(&[m(&[1, 2]), m(&[2, 3]), m(&[1, 3])]).unwrap(), None);
        assert!(is_sunflower(&[m(&[1]), m(&[1])]).is_err());
    }

    #[test]
    fn find_examples() {
        let d = Domain::binomial(6, 3).unwrap();
        let star = d.family().trace_set(1);
        assert!(find_sunflower(&star, &CorePredicate::exact(3, 0)).is_none());
        let c62 = Domain::binomial(6, 2).unwrap();
        let w = find_sunflower(c62.family(), &CorePredicate::any(3)).unwrap();
        assert!(w.is_valid());
        let f = SetFamily::from_masks(4, [m(&[1, 2]), m(&[1, 3]), m(&[1, 4]), m(&[2, 3])]).unwrap();
        let w = find_sunflower(&f, &CorePredicate::exact(3, 1)).unwrap();
        assert_eq!(w.petals, vec![m(&[1, 2]), m(&[1, 3]), m(&[1, 4])]);
        assert_eq!(w.core, m(&[1]));
    }

    #[test]
    fn degenerate_flag() {
        let f = SetFamily::from_masks(4, [m(&[1]), m(&[2, 3])]).unwrap();
        let p = CorePredicate::at_most(3, 1);
        assert!(find_sunflower(&f, &p).is_none());
        let w = find_sunflower(&f, &p.with_degenerate()).unwrap();
        assert!(w.degenerate && w.is_valid());
    }

    #[test]
    fn parse_modes() {
        assert_eq!("exact:1".parse::<CoreMode>().unwrap(), CoreMode::Exact(1));
        assert_eq!("atmost:0".parse::<CoreMode>().unwrap(), CoreMode::AtMost(0));
        assert_eq!("any".parse::<CoreMode>().unwrap(), CoreMode::Any);
        assert!("foo:1".parse::<CoreMode>().is_err());
    }
}
