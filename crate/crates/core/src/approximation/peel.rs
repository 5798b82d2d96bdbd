//! Reduction of high-uniformity sunflower-free families to uniformity
//! `2t` or `2t+1`.

use serde::Serialize;

use super::Extraction;
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::scalar::{int, power_table, Rational};
use crate::spread::check_spread;
use crate::sunflower::{find_sunflower, CorePredicate};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeelStep {
    pub i: u32,
    pub size: u32,
    /// Extracted sets of size above `2t-1`, passed on to the next level.
    pub promoted: Vec<Extraction>,
    /// Extracted sets of size at most `2t-1`.
    pub small: Vec<Extraction>,
    pub residual: SetFamily,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeelReport {
    pub family: SetFamily,
    pub alpha: u64,
    pub steps: Vec<PeelStep>,
    /// Union of every intermediate level, checked for sunflowers with a
    /// `(t-1)`-kernel.
    pub union_size: usize,
}

/// Repeatedly replaces spread stars in the top layer by their kernels.
pub fn peel_high_uniformity(f: &SetFamily, s: usize, t: u32) -> Result<PeelReport> {
    let k = f.uniformity().ok_or_else(|| Error::precondition("family must be nonempty and uniform"))?;
    if t == 0 || k < 2 * t + 1 {
        return Err(Error::precondition(format!("need t >= 1 and k >= 2t+1, got k={k}, t={t}")));
    }
    if s < 2 {
        return Err(Error::precondition("need s >= 2"));
    }
    if let Some(w) = find_sunflower(f, &CorePredicate::exact(s, t - 1)) {
        return Err(Error::SunflowerPresent { context: "input family".into(), witness: w });
    }
    let alpha = s as u64 * k as u64;
    let ar: Rational = int(alpha);
    let pow = power_table(&ar, k);
    let mut cur = f.clone();
    let mut union = f.clone();
    let mut steps = Vec::new();
    for i in 0..k - 2 * t - 1 {
        let size = k - i;
        let mut w = cur.layer(size);
        let mut promoted = Vec::new();
        let mut small = Vec::new();
        loop {
            if w.is_empty() {
                break;
            }
            let mut cands = w.subset_counts();
            cands.retain(|&(x, _)| x.count_ones() < size);
            cands.sort_by_key(|&(x, _)| (std::cmp::Reverse(x.count_ones()), x));
            let mut pick = None;
            for &(x, c) in &cands {
                // Each member of the link forces |W(x)| >= α^(size-|x|).
                if int(c) < pow[(size - x.count_ones()) as usize] {
                    continue;
                }
                let link = w.link(x);
                if check_spread(&link, &ar)?.ok {
                    pick = Some((x, link));
                    break;
                }
            }
            let Some((x, link)) = pick else { break };
            w = w.filter(|m| m & x != x);
            let e = Extraction { set: x, family: link };
            if x.count_ones() > 2 * t - 1 {
                promoted.push(e);
            } else {
                small.push(e);
            }
        }
        let lower = cur.layers_up_to(size - 1);
        cur = lower.union(&lower.with_members(promoted.iter().map(|e| e.set)));
        union = union.union(&cur).union(&cur.with_members(small.iter().map(|e| e.set)));
        steps.push(PeelStep { i, size, promoted, small, residual: w });
    }
    if let Some(&m) = cur.members().iter().find(|m| !(2 * t..=2 * t + 1).contains(&m.count_ones())) {
        return Err(Error::assertion(format!("output set {m:#x} has size outside [2t, 2t+1]")));
    }
    if let Some(w) = find_sunflower(&union, &CorePredicate::exact(s, t - 1)) {
        return Err(Error::SunflowerPresent { context: "peeled levels".into(), witness: w });
    }
    Ok(PeelReport { family: cur, alpha, steps, union_size: union.len() })
}
