//! The largest subfamily in which every set has a `t`-subset all of whose
//! intermediate supersets are `p`-sunflower kernels.

use std::collections::HashMap;

use num_bigint::BigUint;
use serde::Serialize;

use crate::bits::{binom, elements, Mask};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::scalar::ser_biguint;
use crate::sunflower::disjoint_pick;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaFilter {
    pub family: SetFamily,
    /// `(F, T(F))` with `T(F)` the lexicographically least valid subset.
    pub witnesses: Vec<(Mask, Mask)>,
    pub rounds: usize,
    pub removed: usize,
    /// `C(n, k-t-1)`.
    #[serde(serialize_with = "ser_biguint")]
    pub reference: BigUint,
}

/// `t`-subsets of `m` in lexicographic order of their sorted element lists.
fn lex_subsets(m: Mask, t: u32) -> Vec<Mask> {
    let el: Vec<u32> = elements(m).collect();
    let mut out = Vec::new();
    fn rec(el: &[u32], from: usize, t: u32, acc: Mask, out: &mut Vec<Mask>) {
        if t == 0 {
            out.push(acc);
            return;
        }
        for i in from..el.len() {
            if el.len() - i < t as usize {
                break;
            }
            rec(el, i + 1, t - 1, acc | 1 << el[i], out);
        }
    }
    rec(&el, 0, t, 0, &mut out);
    out
}

fn is_kernel(g: &[Mask], e: Mask, p: usize, memo: &mut HashMap<Mask, bool>) -> bool {
    *memo.entry(e).or_insert_with(|| {
        let petals: Vec<Mask> = g.iter().filter(|&&m| m & e == e).map(|&m| m & !e).collect();
        petals.len() >= p && disjoint_pick(&petals, p, 0).is_some()
    })
}

fn valid_t(g: &[Mask], f: Mask, t: u32, p: usize, memo: &mut HashMap<Mask, bool>) -> Option<Mask> {
    lex_subsets(f, t).into_iter().find(|&tm| {
        let free = f & !tm;
        crate::bits::submasks(free).all(|extra| extra == free || is_kernel(g, tm | extra, p, memo))
    })
}

/// Greatest fixed point of removing sets without a valid `t`-subset.
pub fn delta_filter(f: &SetFamily, p: usize, t: u32) -> Result<DeltaFilter> {
    let k = match f.uniformity() {
        Some(k) => k,
        None if f.is_empty() => t,
        None => return Err(Error::precondition("family must be uniform")),
    };
    if t > k {
        return Err(Error::precondition("t exceeds the uniformity"));
    }
    if p == 0 {
        return Err(Error::precondition("p must be positive"));
    }
    let mut g: Vec<Mask> = f.members().to_vec();
    let mut rounds = 0;
    let witnesses = loop {
        rounds += 1;
        let mut memo = HashMap::new();
        let w: Vec<(Mask, Mask)> = g.iter().filter_map(|&m| valid_t(&g, m, t, p, &mut memo).map(|x| (m, x))).collect();
        if w.len() == g.len() {
            break w;
        }
        g = w.into_iter().map(|(m, _)| m).collect();
    };
    let family = f.with_members(g);
    let reference = binom(f.n() as u64, (k as u64).saturating_sub(t as u64 + 1));
    Ok(DeltaFilter { removed: f.len() - family.len(), family, witnesses, rounds, reference })
}
