mod common;

use common::*;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use sforge::bounds::{
    bound_rhs, example_23, example_23_count, example_23_lower_bound, fstar_family, phi_value, product_family,
    verify_instance, BoundParams,
};
use sforge::sunflower::{max_sunflower_free, CorePredicate, DEFAULT_BUDGET};
use sforge::{Domain, SetFamily};

fn params(n: u64, k: u64, s: u64, t: u64) -> BoundParams {
    BoundParams { n: Some(n), k: Some(k), s: Some(s), t: Some(t), ..Default::default() }
}

fn exact(name: &str, p: &BoundParams) -> Q {
    bound_rhs(name, p).unwrap().exact_value().unwrap()
}

fn factorial(k: u64) -> u64 {
    (1..=k).product()
}

/// Random `t`-uniform families on `[n]` with no `s`-sunflower of any core.
fn free_base(n: u32, t: u32, s: usize) -> impl Strategy<Value = Vec<u64>> {
    uniform_family(n, t, 6).prop_map(move |ms| {
        let mut kept: Vec<u64> = Vec::new();
        for m in ms {
            kept.push(m);
            if has_sunflower(&kept, s, &|_| true) {
                kept.pop();
            }
        }
        kept
    })
}

#[test]
fn erdos_rado_formula_and_small_phi() {
    for s in 2..=5u64 {
        for k in 1..=5u64 {
            let p = BoundParams { s: Some(s), k: Some(k), ..Default::default() };
            assert_eq!(exact("erdos_rado", &p), qi(factorial(k) * (s - 1).pow(k as u32)));
        }
    }
    // φ(3, 2) = 6 (two disjoint triangles), below 2!·2² = 8.
    let d = Domain::binomial(6, 2).unwrap();
    let opt = max_free_dfs(d.family().members(), 3, &|_| true);
    assert_eq!(opt, 6);
    assert_eq!(max_sunflower_free(&d, &CorePredicate::any(3), DEFAULT_BUDGET).unwrap().optimum, 6);
    assert!(qi(opt as u64) <= exact("erdos_rado", &BoundParams { s: Some(3), k: Some(2), ..Default::default() }));
}

#[test]
fn trivial_phi_values_match_search() {
    for s in 2..=4u64 {
        let (v, _) = phi_value(s, 1, None);
        let d = Domain::binomial(6, 1).unwrap();
        assert_eq!(v.lo, qi(max_free_dfs(d.family().members(), s as usize, &|_| true) as u64));
    }
    for t in 1..=3u32 {
        let (v, _) = phi_value(2, t as u64, None);
        let d = Domain::binomial(6, t).unwrap();
        assert_eq!(v.lo, qi(max_free_dfs(d.family().members(), 2, &|_| true) as u64));
    }
}

#[test]
fn product_construction_is_free_and_sized() {
    for s in 2..=4usize {
        for t in 1..=3u32 {
            let p = product_family(s, t).unwrap();
            assert_eq!(p.len() as u64, ((s - 1) as u64).pow(t));
            assert_eq!(p.uniformity(), Some(t));
            assert!(!has_sunflower(p.members(), s, &|_| true), "s={s} t={t}");
        }
    }
}

#[test]
fn sunflower_constant_values() {
    // (2^14 · s · log2 t)^t
    assert_eq!(exact("claim4.6", &BoundParams { s: Some(3), t: Some(2), ..Default::default() }), qi(49152 * 49152));
    assert_eq!(exact("claim4.6", &BoundParams { s: Some(5), t: Some(4), ..Default::default() }), pow(&qi(163_840), 4));
    let v = bound_rhs("claim4.6", &BoundParams { s: Some(3), t: Some(3), ..Default::default() }).unwrap();
    let want = (16384.0 * 3.0 * 3f64.log2()).powi(3);
    let iv = v.value.number().unwrap();
    assert!(iv.lo.to_f64().unwrap() <= want * (1.0 + 1e-12) && iv.hi.to_f64().unwrap() >= want * (1.0 - 1e-12));
}

#[test]
fn main_bound_at_power_of_two_ratio() {
    let (k, s, t) = (4u64, 3u64, 2u64);
    let n = k << 20;
    let got = exact("thm1.4", &params(n, k, s, t)).to_f64().unwrap();
    let c = (binom(n - t, k - t)) as f64;
    let phi = 49152f64.powi(2);
    let want = phi * c + phi * (2f64.powi(19) * (s * (t + 1)) as f64 * 20.0 / 2f64.powi(20)) * c;
    assert!((got - want).abs() / want < 1e-12);
}

#[test]
fn matching_bounds_agree_with_search() {
    for n in 4..=7u32 {
        for s in 2..=3u64 {
            let d = Domain::binomial(n, 2).unwrap();
            let f = bound_rhs("emc", &params(n as u64, 2, s, 1)).unwrap();
            let opt = max_free_dfs(d.family().members(), s as usize, &|c| c == 0);
            if f.hypotheses_met {
                assert_eq!(f.exact_value().unwrap(), qi(opt as u64), "n={n} s={s}");
            }
        }
    }
    // Intersecting triples on [6]: the star has C(5,2) = 10 members.
    let d = Domain::binomial(6, 3).unwrap();
    let opt = max_free_dfs(d.family().members(), 2, &|c| c == 0);
    assert_eq!(exact("ekr", &params(6, 3, 2, 1)), qi(opt as u64));
    assert_eq!(exact("emc", &params(6, 3, 2, 1)), qi(10));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn example_construction_matches_enumeration(
        (n, k, t, s, base) in (7u32..=9, 2u32..=4, 1u32..=2, 2usize..=3)
            .prop_filter("t <= k", |(_, k, t, _)| t <= k)
            .prop_flat_map(|(n, k, t, s)| (Just(n), Just(k), Just(t), Just(s), free_base(n, t, s)))
    ) {
        let tf = SetFamily::from_masks(n, base.iter().copied()).unwrap();
        let f = example_23(n, k, s, t, &tf).unwrap();
        let supp = base.iter().fold(0, |a, &m| a | m);
        let want: Vec<u64> = k_sets(n, k).into_iter().filter(|&m| base.contains(&(m & supp))).collect();
        prop_assert_eq!(f.len(), want.len());
        prop_assert!(want.iter().all(|&m| f.contains(m)));
        let size = tf.len() as u64;
        let count = example_23_count(n as u64, k as u64, t as u64, size, supp.count_ones() as u64);
        prop_assert_eq!(count.clone(), qi(want.len() as u64));
        prop_assert!(example_23_lower_bound(n as u64, k as u64, t as u64, size) <= count);
        prop_assert!(!has_sunflower(f.members(), s, &|c| c < t));
    }

    #[test]
    fn fstar_gap_matches_oracle(base in free_base(8, 2, 3)) {
        let a = Domain::binomial(8, 3).unwrap();
        let tf = SetFamily::from_masks(8, base.iter().copied()).unwrap();
        let fs = fstar_family(&a, &tf, 3, 2, Some(&q(8, 3))).unwrap();
        let all = k_sets(8, 3);
        let supp = base.iter().fold(0, |x, &m| x | m);
        let fam: Vec<u64> = all.iter().copied().filter(|&m| base.contains(&(m & supp))).collect();
        let trace = all.iter().filter(|&&m| base.iter().any(|&t| m & t == t)).count() as u64;
        let mid: u64 = base
            .iter()
            .flat_map(|&t| (0..8).filter(move |x| (supp & !t) >> x & 1 == 1).map(move |x| t | 1 << x))
            .map(|y| all.iter().filter(|&&m| m & y == y).count() as u64)
            .sum();
        prop_assert_eq!(fs.family.len(), fam.len());
        prop_assert_eq!(fs.trace_size, trace);
        prop_assert_eq!(fs.gap.rhs.lo.clone(), qi(mid));
        prop_assert!(qi(trace - fam.len() as u64) <= qi(mid));
    }
}

#[test]
fn verify_tables_are_consistent_with_search() {
    for (n, k, s, t) in [(6, 2, 3, 1), (6, 3, 3, 2), (7, 2, 3, 2), (5, 3, 2, 1)] {
        let a = Domain::binomial(n, k).unwrap();
        let pred = CorePredicate::at_most(s, t - 1);
        let r = verify_instance(&a, s, t, &pred, DEFAULT_BUDGET).unwrap();
        let opt = max_free_dfs(a.family().members(), s, &|c| c < t);
        assert_eq!(r.optimum, Some(opt), "n={n} k={k} s={s} t={t}");
        let c = r.construction.as_ref().unwrap();
        assert!(c.avoids_predicate && c.size <= opt as u64);
        assert!(r.is_clean(), "{:?}", r.red_flags);
        for row in &r.bounds {
            if row.hypotheses_met {
                assert!(!row.exceeded, "{}", row.name);
            }
        }
    }
}
