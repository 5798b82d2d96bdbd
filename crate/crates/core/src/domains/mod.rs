//! Ambient k-uniform families and their spreadness.

mod assumptions;
mod homogeneity;

use std::collections::HashMap;
use std::sync::OnceLock;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{self, binom_u64, full, is_subset, k_subsets, key, Mask};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::scalar::{int, power_table, ser_rational, Rational};

pub use assumptions::{check_assumption3, check_assumptions, Assumption3Report, AssumptionParams, AssumptionsReport};
pub use homogeneity::{
    check_tau_homogeneous, check_tau_homogeneous_in, homogeneous_subfamily, homogeneous_subfamily_in,
    max_homogeneous_restriction, max_homogeneous_restriction_in, HomogeneityVerdict, HomogeneousSubfamily,
};

/// Largest ambient family materialized in memory.
pub const MAX_DOMAIN_MEMBERS: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Binomial {
        n: u32,
        k: u32,
    },
    /// `[n]^k`; position `i`, value `j` is element `i*n + j`.
    Sequences {
        n: u32,
        k: u32,
    },
    /// Product of `C(block, parts[i])` over disjoint blocks of size `n`.
    #[serde(alias = "kpartite")]
    KpartiteProduct {
        n: u32,
        parts: Vec<u32>,
    },
    /// Permutation graphs `{(i, σ(i))}` on `[n]²`, element `i*n + j`.
    Permutations {
        n: u32,
    },
    /// The `k`-th layer of the complex generated by `maximal_faces` (1-based).
    ComplexLayer {
        maximal_faces: Vec<Vec<u32>>,
        k: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<u32>,
    },
}

#[derive(Debug)]
struct SubsetCounts {
    map: HashMap<Mask, u64>,
    sorted: Vec<Mask>,
}

#[derive(Debug)]
pub struct Domain {
    spec: DomainSpec,
    family: SetFamily,
    k: u32,
    blocks: Option<Vec<Mask>>,
    counts: OnceLock<SubsetCounts>,
}

impl Clone for Domain {
    fn clone(&self) -> Self {
        Domain::new(self.spec.clone()).expect("spec already validated")
    }
}

fn check_members(count: u64) -> Result<()> {
    if count > MAX_DOMAIN_MEMBERS {
        return Err(Error::capacity(format!("domain has {count} members, limit {MAX_DOMAIN_MEMBERS}")));
    }
    Ok(())
}

fn product_members(blocks: &[(Mask, u32)]) -> Vec<Mask> {
    let mut acc = vec![0u64];
    for &(block, take) in blocks {
        let local = k_subsets(block.count_ones(), take);
        let choices: Vec<Mask> = local.iter().map(|&l| bits::deposit(l, block)).collect();
        acc = acc.iter().flat_map(|&a| choices.iter().map(move |&c| a | c)).collect();
    }
    acc
}

fn permutations(n: u32) -> Vec<Mask> {
    fn rec(n: u32, row: u32, used: u32, acc: Mask, out: &mut Vec<Mask>) {
        if row == n {
            out.push(acc);
            return;
        }
        for j in 0..n {
            if used >> j & 1 == 0 {
                rec(n, row + 1, used | 1 << j, acc | 1 << (row * n + j), out);
            }
        }
    }
    let mut out = Vec::new();
    rec(n, 0, 0, 0, &mut out);
    out
}

type Built = (u32, u32, Vec<Mask>, Option<Vec<Mask>>);

fn product_domain(n: u32, parts: &[u32]) -> Result<Built> {
    let w = parts.len() as u32;
    if w == 0 || n == 0 || parts.iter().any(|&p| p > n) {
        return Err(Error::precondition("product domain needs at least one part, each of size at most n"));
    }
    let ground = n
        .checked_mul(w)
        .filter(|&g| g <= 64)
        .ok_or_else(|| Error::capacity("product ground set exceeds 64 elements"))?;
    let count = parts.iter().try_fold(1u64, |a, &p| a.checked_mul(binom_u64(n as u64, p as u64)));
    check_members(count.unwrap_or(u64::MAX))?;
    let blocks: Vec<(Mask, u32)> = parts.iter().enumerate().map(|(i, &p)| (full(n) << (i as u32 * n), p)).collect();
    let k = parts.iter().sum();
    Ok((ground, k, product_members(&blocks), Some(blocks.iter().map(|b| b.0).collect())))
}

impl Domain {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        let (n, k, members, blocks): Built = match &spec {
            DomainSpec::Binomial { n, k } => {
                if k > n {
                    return Err(Error::precondition(format!("binomial k={k} > n={n}")));
                }
                check_members(bits::binom(*n as u64, *k as u64).to_u64().unwrap_or(u64::MAX))?;
                (*n, *k, k_subsets(*n, *k), Some(vec![full(*n)]))
            }
            DomainSpec::Sequences { n, k } => product_domain(*n, &vec![1; *k as usize])?,
            DomainSpec::KpartiteProduct { n, parts } => product_domain(*n, parts)?,
            DomainSpec::Permutations { n } => {
                if *n == 0 || *n > 7 {
                    return Err(Error::capacity(format!("permutations limited to n <= 7, got {n}")));
                }
                (n * n, *n, permutations(*n), None)
            }
            DomainSpec::ComplexLayer { maximal_faces, k, n } => {
                let support = maximal_faces.iter().flatten().copied().max().unwrap_or(1);
                let n = n.unwrap_or(support).max(support);
                let faces = SetFamily::from_sets(n, maximal_faces)?;
                let mut members = Vec::new();
                for &f in faces.members() {
                    if f.count_ones() >= *k {
                        members.extend(bits::submasks_of_size(f, *k));
                    }
                    check_members(members.len() as u64)?;
                }
                (n, *k, members, None)
            }
        };
        let family = SetFamily::from_masks(n, members)?;
        if family.is_empty() {
            return Err(Error::precondition("domain has no members"));
        }
        Ok(Domain { spec, family, k, blocks, counts: OnceLock::new() })
    }

    pub fn binomial(n: u32, k: u32) -> Result<Self> {
        Domain::new(DomainSpec::Binomial { n, k })
    }

    pub fn sequences(n: u32, k: u32) -> Result<Self> {
        Domain::new(DomainSpec::Sequences { n, k })
    }

    pub fn kpartite(n: u32, parts: &[u32]) -> Result<Self> {
        Domain::new(DomainSpec::KpartiteProduct { n, parts: parts.to_vec() })
    }

    pub fn permutations(n: u32) -> Result<Self> {
        Domain::new(DomainSpec::Permutations { n })
    }

    pub fn complex_layer(maximal_faces: &[Vec<u32>], k: u32) -> Result<Self> {
        Domain::new(DomainSpec::ComplexLayer { maximal_faces: maximal_faces.to_vec(), k, n: None })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    pub fn n(&self) -> u32 {
        self.family.n()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> u64 {
        self.family.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    /// Element blocks on which every permutation is an automorphism.
    pub fn symmetric_blocks(&self) -> Option<&[Mask]> {
        self.blocks.as_deref()
    }

    pub fn ambient(&self) -> Ambient<'_> {
        Ambient { domain: self, base: 0 }
    }

    fn counts(&self) -> &SubsetCounts {
        self.counts.get_or_init(|| {
            let mut map: HashMap<Mask, u64> = HashMap::new();
            for &m in self.family.members() {
                for x in bits::submasks(m) {
                    *map.entry(x).or_insert(0) += 1;
                }
            }
            let mut sorted: Vec<Mask> = map.keys().copied().collect();
            sorted.sort_unstable_by_key(|&m| key(m));
            SubsetCounts { map, sorted }
        })
    }

    /// `|A(T)|`, zero when `T` is outside the shadow.
    pub fn link_raw(&self, t: Mask) -> u64 {
        match self.spec {
            DomainSpec::Binomial { n, k } => {
                let j = t.count_ones();
                if is_subset(t, full(n)) && j <= k {
                    binom_u64((n - j) as u64, (k - j) as u64)
                } else {
                    0
                }
            }
            _ => self.counts().map.get(&t).copied().unwrap_or(0),
        }
    }

    /// `|A(T)|` for `T` in the shadow.
    pub fn link_count(&self, t: Mask) -> Result<u64> {
        match self.link_raw(t) {
            0 => Err(Error::precondition(format!("{:?} is not in the shadow of the domain", bits::to_elements_1based(t)))),
            c => Ok(c),
        }
    }

    /// `∂_t A` in canonical order.
    pub fn shadow(&self, t: u32) -> Vec<Mask> {
        self.ambient().shadow(t)
    }

    /// A maximizer of `|A(T)|` over `T ∈ ∂_t A` and the value `A_t`.
    pub fn max_link(&self, t: u32) -> Result<(Mask, u64)> {
        if t > self.k {
            return Err(Error::precondition(format!("t={t} exceeds uniformity {}", self.k)));
        }
        let mut best: Option<(Mask, u64)> = None;
        for tm in self.shadow(t) {
            let c = self.link_raw(tm);
            if best.map_or(true, |(_, b)| c > b) {
                best = Some((tm, c));
            }
        }
        Ok(best.expect("nonempty domain has a nonempty shadow"))
    }

    /// Exhaustive check that every link `A(T)`, `|T| <= t`, is `r`-spread.
    pub fn check_rt_spread(&self, r: &Rational, t: u32) -> SpreadnessReport {
        let pow = power_table(r, self.k);
        let ts: Vec<Mask> = (0..=t.min(self.k)).flat_map(|j| self.shadow(j)).collect();
        let amb = self.ambient();
        let violation = ts.par_iter().find_map_first(|&tm| {
            let base = amb.restrict(tm);
            let size = base.size();
            let xs = match self.spec {
                // Links of a binomial domain depend only on sizes.
                DomainSpec::Binomial { n, .. } => {
                    let rest = full(n) & !tm;
                    (1..=base.uniformity()).map(|i| bits::deposit(full(i), rest)).collect::<Vec<_>>()
                }
                _ => base.shadow_up_to(base.uniformity()),
            };
            xs.into_iter().filter(|&x| x != 0).find_map(|x| {
                let sub = base.link(x);
                let lhs = int(sub) * &pow[x.count_ones() as usize];
                (lhs > int(size)).then_some(RtViolation { t: tm, s: x, link_size: size, sub_size: sub })
            })
        });
        SpreadnessReport { r: r.clone(), t, ok: violation.is_none(), violation }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RtViolation {
    #[serde(rename = "T")]
    pub t: Mask,
    #[serde(rename = "S")]
    pub s: Mask,
    pub link_size: u64,
    pub sub_size: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadnessReport {
    #[serde(serialize_with = "ser_rational")]
    pub r: Rational,
    pub t: u32,
    pub ok: bool,
    pub violation: Option<RtViolation>,
}

/// The link `A(base)` viewed as an ambient family on the same ground set.
#[derive(Clone, Copy, Debug)]
pub struct Ambient<'a> {
    domain: &'a Domain,
    base: Mask,
}

impl<'a> Ambient<'a> {
    pub fn domain(&self) -> &'a Domain {
        self.domain
    }

    pub fn base(&self) -> Mask {
        self.base
    }

    pub fn restrict(&self, extra: Mask) -> Ambient<'a> {
        debug_assert_eq!(extra & self.base, 0);
        Ambient { domain: self.domain, base: self.base | extra }
    }

    pub fn size(&self) -> u64 {
        self.domain.link_raw(self.base)
    }

    /// `|A(base)(x)|`.
    pub fn link(&self, x: Mask) -> u64 {
        if x & self.base != 0 {
            0
        } else {
            self.domain.link_raw(self.base | x)
        }
    }

    pub fn uniformity(&self) -> u32 {
        self.domain.k - self.base.count_ones()
    }

    pub fn contains(&self, m: Mask) -> bool {
        m & self.base == 0 && self.domain.family.contains(m | self.base)
    }

    pub fn members(&self) -> SetFamily {
        self.domain.family.link(self.base)
    }

    /// `∂_h A(base)` in canonical order.
    pub fn shadow(&self, h: u32) -> Vec<Mask> {
        if h > self.uniformity() {
            return Vec::new();
        }
        match self.domain.spec {
            DomainSpec::Binomial { n, .. } => {
                let rest = full(n) & !self.base;
                k_subsets(rest.count_ones(), h).into_iter().map(|l| bits::deposit(l, rest)).collect()
            }
            _ => {
                let b = self.base;
                let want = b.count_ones() + h;
                self.domain
                    .counts()
                    .sorted
                    .iter()
                    .filter(|&&y| y.count_ones() == want && is_subset(b, y))
                    .map(|&y| y & !b)
                    .collect()
            }
        }
    }

    pub fn shadow_up_to(&self, h: u32) -> Vec<Mask> {
        (0..=h.min(self.uniformity())).flat_map(|j| self.shadow(j)).collect()
    }
}
