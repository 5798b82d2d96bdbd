//! Structural pipelines: spread approximation, simplification, the
//! down-closed cover, intersection reduction, clustering, high-uniformity
//! peeling and the Δ-system filter.
//!
//! Every "maximal set" choice breaks ties by size (descending) and then by
//! mask (ascending), so all pipelines are deterministic.

mod delta;
mod peel;
mod simplify;
mod system;

use serde::Serialize;

use crate::bits::{key, Mask};
use crate::domains::max_homogeneous_restriction_in;
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::interval::Interval;
use crate::report::BoundCheck;
use crate::scalar::{int, ser_opt_rational, ser_rational, Rational, Scalar};

pub use delta::{delta_filter, DeltaFilter};
pub use peel::{peel_high_uniformity, PeelReport, PeelStep};
pub use simplify::{down_closed_cover, simplify, Cover, CoverOptions, SimplifyLayer, SimplifyOptions, Simplification};
pub use system::{cluster_system, reduce_intersections, Cluster, ClusterOptions, Clustering, ClauseViolation, ShadowCheck, SystemPart, SystemSST};

/// A set `T` together with the link family it was extracted with.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extraction {
    pub set: Mask,
    pub family: SetFamily,
}

/// One piece `F_S ∨ {S}` of a decomposition; `family` holds the link sets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Part {
    pub core: Mask,
    pub family: SetFamily,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DecompositionMode {
    Homogeneous {
        #[serde(serialize_with = "ser_rational")]
        tau: Rational,
        q: u32,
        #[serde(serialize_with = "ser_opt_rational")]
        floor: Option<Rational>,
    },
    Spread {
        #[serde(rename = "R", serialize_with = "ser_rational")]
        r: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub mode: DecompositionMode,
    pub parts: Vec<Part>,
    pub remainder: SetFamily,
    pub remainder_bound: Option<BoundCheck>,
}

impl Decomposition {
    /// The family `{S}` of cores.
    pub fn cores(&self) -> SetFamily {
        self.remainder.with_members(self.parts.iter().map(|p| p.core))
    }

    /// Members reassembled from the parts and the remainder, with
    /// multiplicity.
    pub fn reassemble(&self) -> Vec<Mask> {
        let mut v: Vec<Mask> = self
            .parts
            .iter()
            .flat_map(|p| p.family.members().iter().map(move |&m| m | p.core))
            .chain(self.remainder.members().iter().copied())
            .collect();
        v.sort_unstable_by_key(|&m| key(m));
        v
    }

    /// Parts and remainder repartition `f` with no loss or duplication.
    pub fn is_partition_of(&self, f: &SetFamily) -> bool {
        self.parts.iter().all(|p| p.family.members().iter().all(|&m| m & p.core == 0)) && self.reassemble() == f.members()
    }
}

/// `2^14 s log2 t`, the sunflower-free size constant per unit of uniformity.
pub fn core_constant(s: usize, t: u32) -> Interval {
    if t <= 1 {
        return Interval::int(0);
    }
    crate::interval::log2(&int(t as u64)).scale(&int((1u64 << 14) * s as u64))
}

pub(crate) fn require_inside(f: &SetFamily, a: &Domain) -> Result<()> {
    if f.n() != a.n() {
        return Err(Error::precondition("family and domain have different ground sets"));
    }
    match f.members().iter().find(|&&m| !a.family().contains(m)) {
        Some(m) => Err(Error::precondition(format!("{:?} is not a member of the domain", crate::bits::to_elements_1based(*m)))),
        None => Ok(()),
    }
}

/// Repeatedly restricts to the maximal homogeneous link and removes its
/// star, until the core grows beyond `q` (or, with a floor, the link's
/// relative measure drops below it).
pub fn spread_approximation(f: &SetFamily, a: &Domain, tau: &Rational, q: u32, floor: Option<&Rational>) -> Result<Decomposition> {
    require_inside(f, a)?;
    if *tau <= int(1) {
        return Err(Error::precondition("τ must exceed 1"));
    }
    let amb = a.ambient();
    let mut cur = f.clone();
    let mut parts = Vec::new();
    while !cur.is_empty() {
        let s = max_homogeneous_restriction_in(&cur, amb, tau)?;
        if s.count_ones() > q {
            break;
        }
        let link = cur.link(s);
        if let Some(fl) = floor {
            let mu = int(link.len() as u64) / int(amb.link(s));
            if mu < *fl {
                break;
            }
        }
        cur = cur.filter(|m| m & s != s);
        parts.push(Part { core: s, family: link });
    }
    let base = tau.powu(q + 1).recip();
    let bound = match floor {
        Some(fl) if *fl > base => fl.clone(),
        _ => base,
    };
    let check = BoundCheck::new(
        "remainder",
        int(cur.len() as u64),
        Interval::exact(bound * int(a.len())),
        true,
        true,
    )
    .enforce()?;
    let d = Decomposition {
        mode: DecompositionMode::Homogeneous { tau: tau.clone(), q, floor: floor.cloned() },
        parts,
        remainder: cur,
        remainder_bound: Some(check),
    };
    if !d.is_partition_of(f) {
        return Err(Error::assertion("decomposition does not repartition the input"));
    }
    Ok(d)
}
