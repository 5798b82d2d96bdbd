//! Bitmask set families and the basic notation on them.
//!
//! Bit `i` of a [`Mask`] stands for element `i + 1` of the ground set.
//! Members are kept sorted by `(popcount, value)` and deduplicated.

use std::sync::Arc;

use serde::Serialize;

use crate::bits::{self, elements, full, is_subset, key, Mask};
use crate::error::{Error, Result};

pub const MAX_GROUND: u32 = 64;
pub const MAX_CLOSURE_GROUND: u32 = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroundSet {
    n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Arc<Vec<String>>>,
}

impl GroundSet {
    pub fn new(n: u32) -> Result<Self> {
        if n > MAX_GROUND {
            return Err(Error::capacity(format!("ground set size {n} exceeds {MAX_GROUND}")));
        }
        Ok(GroundSet { n, labels: None })
    }

    pub fn with_labels(n: u32, labels: Vec<String>) -> Result<Self> {
        if labels.len() != n as usize {
            return Err(Error::precondition(format!("{} labels for {n} elements", labels.len())));
        }
        let mut g = GroundSet::new(n)?;
        g.labels = Some(Arc::new(labels));
        Ok(g)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn mask(&self) -> Mask {
        full(self.n)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref().map(|v| v.as_slice())
    }
}

/// `s` member sets sharing pairwise intersection `core`.
///
/// With `degenerate` set, the petals are `s` copies of one small set, the
/// convention used by the simplification pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SunflowerWitness {
    pub petals: Vec<Mask>,
    pub core: Mask,
    pub s: usize,
    pub degenerate: bool,
}

impl SunflowerWitness {
    pub fn petals_1based(&self) -> Vec<Vec<u32>> {
        self.petals.iter().map(|&m| bits::to_elements_1based(m)).collect()
    }

    /// Re-checks the defining property from scratch.
    pub fn is_valid(&self) -> bool {
        if self.petals.len() != self.s {
            return false;
        }
        if self.degenerate {
            return self.petals.iter().all(|&p| p == self.core);
        }
        let all = self.petals.iter().fold(!0u64, |a, &p| a & p);
        if all != self.core {
            return false;
        }
        for i in 0..self.s {
            for j in i + 1..self.s {
                if self.petals[i] == self.petals[j] || self.petals[i] & self.petals[j] != self.core {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily {
    ground: GroundSet,
    members: Vec<Mask>,
    uniformity: Option<u32>,
}

fn uniformity_of(members: &[Mask]) -> Option<u32> {
    let first = members.first()?.count_ones();
    members.iter().all(|m| m.count_ones() == first).then_some(first)
}

impl SetFamily {
    pub fn new(ground: GroundSet, members: impl IntoIterator<Item = Mask>) -> Result<Self> {
        let g = ground.mask();
        let mut v: Vec<Mask> = members.into_iter().collect();
        if let Some(bad) = v.iter().find(|&&m| !is_subset(m, g)) {
            return Err(Error::precondition(format!("set {bad:#x} not inside ground set of size {}", ground.n)));
        }
        v.sort_unstable_by_key(|&m| key(m));
        v.dedup();
        let uniformity = uniformity_of(&v);
        Ok(SetFamily { ground, members: v, uniformity })
    }

    pub fn from_masks(n: u32, members: impl IntoIterator<Item = Mask>) -> Result<Self> {
        SetFamily::new(GroundSet::new(n)?, members)
    }

    /// Builds from 1-based element lists.
    pub fn from_sets(n: u32, sets: &[Vec<u32>]) -> Result<Self> {
        let mut masks = Vec::with_capacity(sets.len());
        for s in sets {
            let mut m = 0u64;
            for &e in s {
                if e == 0 || e > n {
                    return Err(Error::precondition(format!("element {e} outside [1, {n}]")));
                }
                m |= 1 << (e - 1);
            }
            masks.push(m);
        }
        SetFamily::from_masks(n, masks)
    }

    pub fn empty(ground: GroundSet) -> Self {
        SetFamily { ground, members: Vec::new(), uniformity: None }
    }

    /// Same ground set, new members; members must lie in the ground set.
    pub fn with_members(&self, members: impl IntoIterator<Item = Mask>) -> Self {
        SetFamily::new(self.ground.clone(), members).expect("members outside ground set")
    }

    fn from_sorted(&self, members: Vec<Mask>) -> Self {
        debug_assert!(members.windows(2).all(|w| key(w[0]) < key(w[1])));
        let uniformity = uniformity_of(&members);
        SetFamily { ground: self.ground.clone(), members, uniformity }
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn n(&self) -> u32 {
        self.ground.n
    }

    pub fn members(&self) -> &[Mask] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn uniformity(&self) -> Option<u32> {
        self.uniformity
    }

    pub fn contains(&self, m: Mask) -> bool {
        self.members.binary_search_by_key(&key(m), |&x| key(x)).is_ok()
    }

    pub fn support(&self) -> Mask {
        self.members.iter().fold(0, |a, &m| a | m)
    }

    pub fn max_size(&self) -> Option<u32> {
        self.members.last().map(|m| m.count_ones())
    }

    pub fn min_size(&self) -> Option<u32> {
        self.members.first().map(|m| m.count_ones())
    }

    pub fn filter(&self, mut pred: impl FnMut(Mask) -> bool) -> Self {
        self.from_sorted(self.members.iter().copied().filter(|&m| pred(m)).collect())
    }

    /// Members of size exactly `h`.
    pub fn layer(&self, h: u32) -> Self {
        self.filter(|m| m.count_ones() == h)
    }

    pub fn layers_up_to(&self, h: u32) -> Self {
        self.filter(|m| m.count_ones() <= h)
    }

    pub fn union(&self, other: &SetFamily) -> Self {
        self.with_members(self.members.iter().chain(other.members.iter()).copied())
    }

    pub fn difference(&self, other: &SetFamily) -> Self {
        self.filter(|m| !other.contains(m))
    }

    pub fn is_subfamily_of(&self, other: &SetFamily) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    /// `F(A, B) = { F \ B : F ∈ F, F ∩ B = A }`.
    pub fn restrict(&self, a: Mask, b: Mask) -> Result<Self> {
        if !is_subset(a, b) {
            return Err(Error::precondition(format!("restrict: A={a:#x} is not a subset of B={b:#x}")));
        }
        Ok(self.restrict_unchecked(a, b))
    }

    pub(crate) fn restrict_unchecked(&self, a: Mask, b: Mask) -> Self {
        self.with_members(self.members.iter().filter(|&&m| m & b == a).map(|&m| m & !b))
    }

    /// The link `F(B) = F(B, B)`.
    pub fn link(&self, b: Mask) -> Self {
        self.restrict_unchecked(b, b)
    }

    /// `|F(B)|` without materializing the link.
    pub fn link_len(&self, b: Mask) -> usize {
        self.members.iter().filter(|&&m| m & b == b).count()
    }

    /// Members containing some member of `b` (the trace `F[B]`).
    pub fn trace_cover(&self, b: &SetFamily) -> Self {
        self.filter(|m| b.members.iter().any(|&x| is_subset(x, m)))
    }

    /// Members containing the single set `x`.
    pub fn trace_set(&self, x: Mask) -> Self {
        self.filter(|m| is_subset(x, m))
    }

    /// All `h`-subsets of members.
    pub fn shadow(&self, h: u32) -> Self {
        let mut out = Vec::new();
        for &m in &self.members {
            if m.count_ones() >= h {
                out.extend(bits::submasks_of_size(m, h));
            }
        }
        self.with_members(out)
    }

    /// All subsets of members of size at most `h`.
    pub fn shadow_up_to(&self, h: u32) -> Self {
        let mut out = Vec::new();
        for &m in &self.members {
            out.extend(bits::submasks(m).filter(|s| s.count_ones() <= h));
        }
        self.with_members(out)
    }

    /// `F ∨ B = { F ∪ B }`.
    pub fn join(&self, b: &SetFamily) -> Self {
        let mut out = Vec::with_capacity(self.len() * b.len());
        for &f in &self.members {
            for &x in &b.members {
                out.push(f | x);
            }
        }
        self.with_members(out)
    }

    pub fn upper_closure_contains(&self, s: Mask) -> bool {
        self.members.iter().any(|&m| is_subset(m, s))
    }

    /// Every superset of a member inside the ground set.
    pub fn upper_closure(&self) -> Result<Self> {
        let n = self.n();
        if n > MAX_CLOSURE_GROUND {
            return Err(Error::capacity(format!("upper closure over {n} > {MAX_CLOSURE_GROUND} elements")));
        }
        let size = 1usize << n;
        let mut mark = vec![false; size];
        for &m in &self.members {
            mark[m as usize] = true;
        }
        for i in 0..n {
            let bit = 1usize << i;
            for s in 0..size {
                if s & bit == 0 && mark[s] {
                    mark[s | bit] = true;
                }
            }
        }
        let members = (0..size).filter(|&s| mark[s]).map(|s| s as Mask);
        Ok(self.with_members(members))
    }

    pub fn is_upward_closed(&self) -> bool {
        let g = self.ground.mask();
        self.members.iter().all(|&m| elements(g & !m).all(|e| self.contains(m | 1 << e)))
    }

    /// Minimum hitting set size and one witness, by iterative deepening.
    pub fn transversal_number(&self) -> Result<(u32, Mask)> {
        if self.members.contains(&0) {
            return Err(Error::precondition("the empty set has no transversal"));
        }
        if self.members.is_empty() {
            return Err(Error::precondition("transversal of an empty family"));
        }
        for depth in 0..=self.n() {
            if let Some(w) = hit_search(&self.members, 0, depth) {
                return Ok((depth, w));
            }
        }
        unreachable!("the ground set hits every nonempty member")
    }

    /// Applies an element permutation (`perm[i]` is the new index of element `i`).
    pub fn relabel(&self, perm: &[u32]) -> Self {
        let map = |m: Mask| elements(m).fold(0u64, |a, e| a | 1 << perm[e as usize]);
        self.with_members(self.members.iter().map(|&m| map(m)))
    }

    pub fn sets_1based(&self) -> Vec<Vec<u32>> {
        self.members.iter().map(|&m| bits::to_elements_1based(m)).collect()
    }
}

fn hit_search(members: &[Mask], chosen: Mask, depth_left: u32) -> Option<Mask> {
    // Members are sorted by size, so the first unhit member is a smallest one.
    let Some(&target) = members.iter().find(|&&m| m & chosen == 0) else {
        return Some(chosen);
    };
    if depth_left == 0 {
        return None;
    }
    let mut used = 0;
    let mut packing = 0;
    for &m in members {
        if m & chosen == 0 && m & used == 0 {
            used |= m;
            packing += 1;
        }
    }
    if packing > depth_left {
        return None;
    }
    elements(target).find_map(|e| hit_search(members, chosen | 1 << e, depth_left - 1))
}

impl Serialize for SetFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SetFamily", 2)?;
        st.serialize_field("n", &self.n())?;
        st.serialize_field("sets", &self.sets_1based())?;
        st.end()
    }
}


impl SetFamily {
    /// `|F(X)|` for every `X` contained in some member, canonical order.
    pub fn subset_counts(&self) -> Vec<(Mask, u64)> {
        let mut map: std::collections::HashMap<Mask, u64> = std::collections::HashMap::new();
        for &m in &self.members {
            for x in bits::submasks(m) {
                *map.entry(x).or_insert(0) += 1;
            }
        }
        let mut v: Vec<(Mask, u64)> = map.into_iter().collect();
        v.sort_unstable_by_key(|&(m, _)| key(m));
        v
    }
}
