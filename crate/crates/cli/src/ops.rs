//! Operation registry shared by the subcommands and the scenario runner.
//!
//! Every operation takes a JSON parameter object and returns a JSON report
//! plus any families it produced, in a fixed order (the first is primary).

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};
use sforge::approximation::{self, ClusterOptions, CoverOptions, SimplifyOptions};
use sforge::bounds::{self, BoundParams};
use sforge::domains::{self, AssumptionParams};
use sforge::sunflower::{self, CoreMode, DEFAULT_BUDGET};
use sforge::{boolean, spread, Error, SetFamily};

use crate::params::Params;
use crate::CliError;

pub const OPERATIONS: &[&str] = &[
    "family.info",
    "family.link",
    "family.restrict",
    "family.shadow",
    "family.trace",
    "family.upper_closure",
    "family.transversal",
    "family.union",
    "family.difference",
    "family.assert_subfamily",
    "domains.build",
    "domains.link_count",
    "domains.max_link",
    "domains.rt_spread",
    "domains.homogeneity",
    "domains.max_homogeneous",
    "domains.homogeneous_subfamily",
    "domains.assumptions",
    "domains.assumption3",
    "sunflower.find",
    "sunflower.max_free",
    "sunflower.phi",
    "spread.check",
    "spread.max_restriction",
    "spread.lemma_mc",
    "spread.via_spread",
    "spread.representatives",
    "boolean.measure",
    "boolean.global",
    "boolean.max_global",
    "boolean.stability",
    "boolean.sharp_threshold",
    "boolean.upgrade",
    "boolean.hypercontractivity",
    "pipeline.approx",
    "pipeline.simplify",
    "pipeline.cover",
    "pipeline.reduce",
    "pipeline.cluster",
    "pipeline.peel",
    "pipeline.delta",
    "bounds.eval",
    "bounds.example23",
    "bounds.fstar",
    "bounds.product",
    "verify",
];

#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub families: Vec<(String, SetFamily)>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn report<T: Serialize>(v: &T) -> Outcome {
    Outcome { report: to_value(v), families: Vec::new() }
}

fn with(v: Value, fams: Vec<(&str, SetFamily)>) -> Outcome {
    Outcome { report: v, families: fams.into_iter().map(|(k, f)| (k.to_string(), f)).collect() }
}

fn fam(f: &SetFamily) -> Outcome {
    with(to_value(f), vec![("family", f.clone())])
}

/// Runs `op` with parameters `p`; `seed` feeds operations that sample.
pub fn execute(op: &str, value: &Value, handles: &BTreeMap<String, SetFamily>, seed: u64) -> Result<Outcome, CliError> {
    let p = Params::new(value, handles);
    let seed = p.u64_or("seed", seed)?;
    Ok(match op {
        "family.info" => {
            let f = p.family("family")?;
            report(&json!({
                "n": f.n(),
                "size": f.len(),
                "uniformity": f.uniformity(),
                "min_size": f.min_size(),
                "max_size": f.max_size(),
                "support": sforge::bits::to_elements_1based(f.support()),
                "upward_closed": f.is_upward_closed(),
            }))
        }
        "family.link" => fam(&p.family("family")?.link(p.set("set")?)),
        "family.restrict" => fam(&p.family("family")?.restrict(p.set("a")?, p.set("b")?)?),
        "family.shadow" => fam(&p.family("family")?.shadow(p.u32("h")?)),
        "family.trace" => {
            let f = p.family("family")?;
            let g = if p.has("by") { f.trace_cover(&p.family("by")?) } else { f.trace_set(p.set("set")?) };
            fam(&g)
        }
        "family.upper_closure" => fam(&p.family("family")?.upper_closure()?),
        "family.transversal" => {
            let (size, set) = p.family("family")?.transversal_number()?;
            report(&json!({ "transversal_number": size, "witness": sforge::bits::to_elements_1based(set) }))
        }
        "family.union" => fam(&p.family("family")?.union(&p.family("other")?)),
        "family.difference" => fam(&p.family("family")?.difference(&p.family("other")?)),
        "family.assert_subfamily" => {
            let f = p.family("family")?;
            let of = p.family("of")?;
            if !f.is_subfamily_of(&of) {
                let extra = f.difference(&of);
                return Err(Error::assertion(format!("{} sets are not in the reference family, e.g. {:?}", extra.len(), extra.sets_1based().first())).into());
            }
            report(&json!({ "subfamily": true, "size": f.len(), "reference_size": of.len() }))
        }
        "domains.build" => {
            let a = p.domain("domain")?;
            with(json!({ "spec": a.spec(), "size": a.len(), "n": a.n(), "k": a.k() }), vec![("family", a.family().clone())])
        }
        "domains.link_count" => {
            let a = p.domain("domain")?;
            report(&json!({ "count": a.link_count(p.set("set")?)? }))
        }
        "domains.max_link" => {
            let (set, count) = p.domain("domain")?.max_link(p.u32("t")?)?;
            report(&json!({ "set": sforge::bits::to_elements_1based(set), "count": count }))
        }
        "domains.rt_spread" => report(&p.domain("domain")?.check_rt_spread(&p.rational("r")?, p.u32("t")?)),
        "domains.homogeneity" => report(&domains::check_tau_homogeneous(&p.family("family")?, &p.domain("domain")?, &p.rational("tau")?)?),
        "domains.max_homogeneous" => {
            let s = domains::max_homogeneous_restriction(&p.family("family")?, &p.domain("domain")?, &p.rational("tau")?)?;
            report(&json!({ "set": sforge::bits::to_elements_1based(s) }))
        }
        "domains.homogeneous_subfamily" => {
            let r = domains::homogeneous_subfamily(&p.family("family")?, &p.domain("domain")?, &p.rational("tau")?, &p.rational("alpha")?, p.u32("t")?)?;
            let g = r.family.clone();
            with(to_value(&r), vec![("family", g)])
        }
        "domains.assumptions" => {
            let params = AssumptionParams {
                q: p.u32("q")?,
                t: p.u32("t")?,
                eta: p.rational("eta")?,
                mu: p.rational("mu")?,
                r: p.rational("r")?,
            };
            report(&domains::check_assumptions(&p.domain("domain")?, params, seed)?)
        }
        "domains.assumption3" => {
            let a = p.domain("domain")?;
            report(&domains::check_assumption3(&a, p.u32("q")?, p.u32("h")?, seed, p.u64_or("random", 0)? as usize)?)
        }
        "sunflower.find" => {
            let f = p.family("family")?;
            let w = sunflower::find_sunflower(&f, &p.predicate(Some(CoreMode::Any))?);
            report(&json!({ "found": w.is_some(), "witness": w }))
        }
        "sunflower.max_free" => {
            let a = p.domain("domain")?;
            let r = sunflower::max_sunflower_free(&a, &p.predicate(Some(CoreMode::Any))?, p.u64_or("budget", DEFAULT_BUDGET)?)?;
            let w = r.witness.clone();
            with(to_value(&r), vec![("family", w)])
        }
        "sunflower.phi" => {
            let s = p.usize("s")?;
            let t = p.u32("t")?;
            let support = p.opt_u32("support")?.unwrap_or(t * (s as u32) * t);
            let r = sunflower::phi_exact(s, t, support, p.u64_or("budget", DEFAULT_BUDGET)?)?;
            let w = r.search.witness.clone();
            with(to_value(&r), vec![("family", w)])
        }
        "spread.check" => report(&spread::check_spread(&p.family("family")?, &p.rational("R")?)?),
        "spread.max_restriction" => {
            let f = p.family("family")?;
            let x = spread::max_spread_restriction(&f, &p.rational("R")?)?;
            with(json!({ "set": sforge::bits::to_elements_1based(x) }), vec![("family", f.link(x))])
        }
        "spread.lemma_mc" => {
            let f = p.family("family")?;
            report(&spread::spread_lemma_mc(&f, &p.rational("R")?, p.u32("m")?, &p.rational("delta")?, p.u64("trials")?, seed)?)
        }
        "spread.via_spread" => {
            let w = spread::sunflower_via_spread(&p.family("family")?, p.usize("s")?, &p.rational("R")?, seed)?;
            report(&json!({ "found": w.is_some(), "witness": w }))
        }
        "spread.representatives" => {
            let gs = p.families("families")?;
            let r = spread::find_disjoint_representatives(&gs, p.set("forbidden")?, seed)?;
            let sets = r.map(|v| v.into_iter().map(sforge::bits::to_elements_1based).collect::<Vec<_>>());
            report(&json!({ "found": sets.is_some(), "representatives": sets }))
        }
        "boolean.measure" => {
            let f = p.family("family")?;
            let mu: sforge::Rational = boolean::biased_measure(&f, &p.rational("p")?);
            report(&json!({ "measure": sforge::scalar::fmt_rational(&mu) }))
        }
        "boolean.global" => report(&boolean::check_global(&p.family("family")?, &p.rational("p")?, &p.rational("tau")?)?),
        "boolean.max_global" => report(&boolean::max_global_restriction(&p.family("family")?, &p.rational("p")?, &p.rational("tau")?)?),
        "boolean.stability" => {
            let s = boolean::stability(&p.family("family")?, &p.rational("p")?, &p.rational("rho")?)?;
            report(&json!({ "stability": sforge::scalar::fmt_rational(&s) }))
        }
        "boolean.sharp_threshold" => {
            let tau = p.opt_rational("tau")?;
            report(&boolean::verify_sharp_threshold(&p.family("family")?, &p.rational("p")?, &p.rational("p_tilde")?, tau.as_ref())?)
        }
        "boolean.upgrade" => report(&boolean::measure_upgrade(&p.family("family")?, &p.rational("p")?, &p.rational("tau")?, p.u32("z")?, p.u32("m")?)?),
        "boolean.hypercontractivity" => report(&boolean::hypercontractivity_check(
            &p.family("family")?,
            &p.rational("p")?,
            &p.rational("tau")?,
            &p.rational("rho")?,
            &p.rational("q")?,
        )?),
        "pipeline.approx" => {
            let d = approx(&p)?;
            let r = d.remainder.clone();
            with(to_value(&d), vec![("cores", d.cores()), ("remainder", r)])
        }
        "pipeline.simplify" => {
            let opts = SimplifyOptions { alpha: p.opt_rational("alpha")?, q: p.opt_u32("q")?, r: p.opt_rational("r")? };
            let eps = p.opt_rational("eps")?.unwrap_or_else(|| sforge::scalar::ratio(1, 2));
            let r = approximation::simplify(&p.family("family")?, &p.domain("domain")?, p.usize("s")?, p.u32("t")?, &eps, &opts)?;
            let f = r.family.clone();
            with(to_value(&r), vec![("family", f)])
        }
        "pipeline.cover" => {
            let opts = CoverOptions { w: p.opt_rational("w")?, alpha: p.opt_rational("alpha")?, eps: p.opt_rational("eps")? };
            let c = approximation::down_closed_cover(&p.family("family")?, &p.domain("domain")?, p.usize("s")?, p.u32("t")?, &p.rational("r")?, &opts)?;
            let (t, res) = (c.family.clone(), c.residue.clone());
            with(to_value(&c), vec![("family", t), ("residue", res)])
        }
        "pipeline.reduce" => {
            let a = p.domain("domain")?;
            let d = approx(&p)?;
            let sys = approximation::reduce_intersections(&d, &a, p.usize("s")?, p.u32("t")?, &p.rational("alpha")?)?;
            let cores = sys.cores(a.n());
            with(json!({ "decomposition": to_value(&d), "system": to_value(&sys) }), vec![("cores", cores)])
        }
        "pipeline.cluster" => {
            let a = p.domain("domain")?;
            let d = approx(&p)?;
            let sys = approximation::reduce_intersections(&d, &a, p.usize("s")?, p.u32("t")?, &p.rational("alpha")?)?;
            let opts = ClusterOptions {
                phi: p.opt_u64("phi")?,
                r: p.opt_rational("r")?,
                simplify: SimplifyOptions { alpha: p.opt_rational("simplify_alpha")?, q: None, r: None },
                eps: p.opt_rational("eps")?,
            };
            let c = approximation::cluster_system(&sys, &a, &p.rational("lambda")?, &opts)?;
            let f = c.family.clone();
            with(json!({ "system": to_value(&sys), "clustering": to_value(&c) }), vec![("family", f)])
        }
        "pipeline.peel" => {
            let r = approximation::peel_high_uniformity(&p.family("family")?, p.usize("s")?, p.u32("t")?)?;
            let f = r.family.clone();
            with(to_value(&r), vec![("family", f)])
        }
        "pipeline.delta" => {
            let r = approximation::delta_filter(&p.family("family")?, p.usize("p")?, p.u32("t")?)?;
            let f = r.family.clone();
            with(to_value(&r), vec![("family", f)])
        }
        "bounds.eval" => {
            let name = p.str("name")?;
            let empty = Value::Object(Default::default());
            let inner = p.value.get("params").unwrap_or(&empty);
            let q = Params::new(inner, handles);
            let bp = BoundParams {
                n: q.opt_u64("n")?,
                k: q.opt_u64("k")?,
                s: q.opt_u64("s")?,
                t: q.opt_u64("t")?,
                r: q.opt_rational("r")?,
                phi: q.opt_u64("phi")?,
                a_t: q.opt_u64("a_t")?,
            };
            report(&bounds::bound_rhs(name, &bp)?)
        }
        "bounds.example23" => {
            let (n, k, s, t) = (p.u32("n")?, p.u32("k")?, p.usize("s")?, p.u32("t")?);
            let base = match p.family("base") {
                Ok(b) => b,
                Err(_) => {
                    let prod = bounds::product_family(s, t)?;
                    SetFamily::from_masks(n, prod.members().iter().copied())?
                }
            };
            let f = bounds::example_23(n, k, s, t, &base)?;
            let count = bounds::example_23_count(n as u64, k as u64, t as u64, base.len() as u64, base.support().count_ones() as u64);
            let lower = bounds::example_23_lower_bound(n as u64, k as u64, t as u64, base.len() as u64);
            with(
                json!({
                    "size": f.len(),
                    "formula": sforge::scalar::fmt_rational(&count),
                    "lower_bound": sforge::scalar::fmt_rational(&lower),
                    "base": to_value(&base),
                }),
                vec![("family", f), ("base", base)],
            )
        }
        "bounds.fstar" => {
            let a = p.domain("domain")?;
            let r = p.opt_rational("r")?;
            let fs = bounds::fstar_family(&a, &p.family("base")?, p.usize("s")?, p.u32("t")?, r.as_ref())?;
            let f = fs.family.clone();
            with(to_value(&fs), vec![("family", f)])
        }
        "bounds.product" => fam(&bounds::product_family(p.usize("s")?, p.u32("t")?)?),
        "verify" => {
            let a = p.domain("domain")?;
            let t = p.u32("t")?;
            let pred = p.predicate(Some(CoreMode::Exact(t.saturating_sub(1))))?;
            let r = bounds::verify_instance(&a, pred.s, t, &pred, p.u64_or("budget", DEFAULT_BUDGET)?)?;
            let mut v = to_value(&r);
            v["csv"] = Value::String(r.to_csv());
            report(&v)
        }
        _ => return Err(CliError::Usage(format!("unknown operation {op:?}"))),
    })
}

fn approx(p: &Params<'_>) -> Result<approximation::Decomposition, CliError> {
    let floor = p.opt_rational("floor")?;
    Ok(approximation::spread_approximation(
        &p.family("family")?,
        &p.domain("domain")?,
        &p.rational("tau")?,
        p.u32("q")?,
        floor.as_ref(),
    )?)
}
