//! Construction ≤ optimum ≤ bound tables for small domains.

use serde::Serialize;

use super::{bound_rhs, BoundParams, BoundValue, PhiSource};
use crate::bits::{binom_u64, Mask};
use crate::domains::{Domain, DomainSpec};
use crate::error::Result;
use crate::family::SetFamily;
use crate::scalar::int;
use crate::sunflower::{creates_sunflower, find_sunflower, max_sunflower_free, phi_exact, CoreMode, CorePredicate};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Construction {
    pub name: String,
    pub base: SetFamily,
    pub size: u64,
    /// The base search finished within its budget.
    pub certified: bool,
    pub avoids_predicate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub name: String,
    pub value: BoundValue,
    pub phi: Option<PhiSource>,
    pub hypotheses_met: bool,
    /// The optimum exceeds the value (only a finding when hypotheses hold).
    pub exceeded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub domain: DomainSpec,
    pub s: usize,
    pub t: u32,
    pub predicate: String,
    /// `None` when the search ran out of budget.
    pub optimum: Option<usize>,
    pub lower: usize,
    pub nodes_explored: u64,
    pub construction: Option<Construction>,
    pub bounds: Vec<BoundRow>,
    pub red_flags: Vec<String>,
}

/// Sizes `|{F ∈ A : F ∩ supp T ∈ T}|` maximized over `s`-sunflower-free
/// `t`-families `T` in the shadow of `A`.
pub fn best_construction_base(a: &Domain, s: usize, t: u32, budget: u64) -> Result<(SetFamily, u64, bool)> {
    let cands = a.ambient().shadow(t);
    let members = a.family().members();
    let value = |chosen: &[Mask]| -> u64 {
        let supp = chosen.iter().fold(0, |x, &m| x | m);
        members.iter().filter(|&&m| chosen.contains(&(m & supp))).count() as u64
    };
    struct St<'a> {
        cands: &'a [Mask],
        pred: CorePredicate,
        budget: u64,
        nodes: u64,
        best: (u64, Vec<Mask>),
    }
    fn rec(st: &mut St<'_>, from: usize, chosen: &mut Vec<Mask>, value: &dyn Fn(&[Mask]) -> u64) {
        st.nodes += 1;
        let v = value(chosen);
        if v > st.best.0 {
            st.best = (v, chosen.clone());
        }
        if st.nodes >= st.budget {
            return;
        }
        for i in from..st.cands.len() {
            let x = st.cands[i];
            if creates_sunflower(chosen, x, &st.pred) {
                continue;
            }
            chosen.push(x);
            rec(st, i + 1, chosen, value);
            chosen.pop();
            if st.nodes >= st.budget {
                return;
            }
        }
    }
    let mut st = St { cands: &cands, pred: CorePredicate::any(s), budget, nodes: 0, best: (0, Vec::new()) };
    let symmetric = matches!(a.spec(), DomainSpec::Binomial { .. });
    let mut chosen = Vec::new();
    if symmetric && !cands.is_empty() {
        chosen.push(cands[0]);
        rec(&mut st, 1, &mut chosen, &value);
    } else {
        rec(&mut st, 0, &mut chosen, &value);
    }
    let certified = st.nodes < st.budget;
    let base = a.family().with_members(st.best.1.iter().copied());
    Ok((base, st.best.0, certified))
}

/// Exact `φ(s, t)` when a certified search over a provably large enough
/// support is cheap.
fn phi_if_cheap(s: usize, t: u32, budget: u64) -> Option<u64> {
    if s == 2 || t == 1 {
        return None;
    }
    let er = (1..=t as u64).product::<u64>() * (s as u64 - 1).pow(t);
    let support = t as u64 * (er + 1);
    if support > 64 || binom_u64(support, t as u64) > 2_000 {
        return None;
    }
    let r = phi_exact(s, t, support as u32, budget).ok()?;
    r.unconditional.then_some(r.search.optimum as u64)
}

fn applicable(pred: &CorePredicate, t: u32) -> Vec<&'static str> {
    let mut v = vec![];
    match pred.mode {
        CoreMode::Any => v.push("erdos_rado"),
        CoreMode::Exact(c) | CoreMode::AtMost(c) if c + 1 == t => {
            if t == 1 {
                v.push("emc");
                if pred.s == 2 {
                    v.push("ekr");
                }
                v.push("thm1.4");
            } else {
                if matches!(pred.mode, CoreMode::AtMost(_)) {
                    v.push("thm1.4");
                }
                v.extend(["thm1.2.large", "thm1.2.small", "thm1.2.derivation", "thm5.2", "thm5.4"]);
            }
        }
        _ => {}
    }
    v
}

/// Runs the exact search, the best construction and every applicable
/// bound, and flags any ordering violation.
pub fn verify_instance(a: &Domain, s: usize, t: u32, pred: &CorePredicate, budget: u64) -> Result<VerifyReport> {
    let search = max_sunflower_free(a, pred, budget)?;
    let optimum = search.certified.then_some(search.optimum);
    let mut red_flags = Vec::new();
    let matching_core = matches!(pred.mode, CoreMode::Exact(c) | CoreMode::AtMost(c) if c + 1 == t);
    let construction = if matching_core && pred.s == s {
        let (base, size, certified) = best_construction_base(a, s, t, budget)?;
        let supp = base.support();
        let fam = a.family().filter(|m| base.contains(m & supp));
        let avoids = find_sunflower(&fam, pred).is_none();
        if !avoids {
            red_flags.push("construction contains a forbidden sunflower".into());
        }
        Some(Construction { name: "example_2.3".into(), base, size, certified, avoids_predicate: avoids })
    } else if !a.is_empty() {
        let base = a.family().with_members([a.family().members()[0]]);
        Some(Construction { name: "single_set".into(), base, size: 1, certified: true, avoids_predicate: true })
    } else {
        None
    };
    if let (Some(c), Some(o)) = (&construction, optimum) {
        if c.avoids_predicate && c.size > o as u64 {
            red_flags.push(format!("construction {} exceeds the optimum {o}", c.size));
        }
    }
    let params = BoundParams {
        n: Some(a.n() as u64),
        k: Some(a.k() as u64),
        s: Some(s as u64),
        t: Some(t as u64),
        r: Some(int(a.n() as u64) / int(a.k().max(1) as u64)),
        phi: phi_if_cheap(s, t, budget),
        a_t: None,
    };
    let binomial = matches!(a.spec(), DomainSpec::Binomial { .. });
    let mut bounds = vec![BoundRow {
        name: "domain_size".into(),
        value: BoundValue::Number(crate::interval::Interval::int(a.len())),
        phi: None,
        hypotheses_met: true,
        exceeded: optimum.is_some_and(|o| o as u64 > a.len()),
    }];
    for name in applicable(pred, t) {
        if name != "erdos_rado" && !binomial {
            continue;
        }
        if name.starts_with("thm1.2") && (a.k() < t || a.n() <= a.k()) {
            continue;
        }
        let f = bound_rhs(name, &params)?;
        let exceeded = match (f.value.number(), optimum) {
            (Some(v), Some(o)) => int(o as u64) > v.hi,
            _ => false,
        };
        if exceeded && f.hypotheses_met {
            red_flags.push(format!("optimum exceeds {name}"));
        }
        bounds.push(BoundRow { name: name.into(), value: f.value, phi: f.phi, hypotheses_met: f.hypotheses_met, exceeded });
    }
    Ok(VerifyReport {
        domain: a.spec().clone(),
        s,
        t,
        predicate: pred.to_string(),
        optimum,
        lower: search.optimum,
        nodes_explored: search.nodes_explored,
        construction,
        bounds,
        red_flags,
    })
}

fn csv_field(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.red_flags.is_empty()
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["domain", "s", "t", "predicate", "construction", "optimum"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        for b in &self.bounds {
            cols.push(b.name.clone());
            cols.push(format!("{}_hypotheses", b.name));
        }
        cols.push("red_flags".into());
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            serde_json::to_string(&self.domain).unwrap_or_default(),
            self.s.to_string(),
            self.t.to_string(),
            self.predicate.clone(),
            self.construction.as_ref().map_or(String::new(), |c| c.size.to_string()),
            self.optimum.map_or("budget".into(), |o| o.to_string()),
        ];
        for b in &self.bounds {
            cols.push(b.value.to_string());
            cols.push(b.hypotheses_met.to_string());
        }
        cols.push(self.red_flags.join("; "));
        cols.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",")
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", self.csv_header(), self.csv_row())
    }
}
