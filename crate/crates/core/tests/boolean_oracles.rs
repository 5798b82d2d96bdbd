mod common;

use common::*;
use num_traits::{One, Zero};
use proptest::prelude::*;
use sforge::boolean::{
    biased_measure, check_global, max_global_restriction, noise_operator, restricted_measure as lib_restricted, stability,
    stability_in, verify_sharp_threshold,
};
use sforge::SetFamily;

fn p_strategy() -> impl Strategy<Value = Q> {
    (1i64..=9).prop_map(|a| q(a, 10))
}

fn upward(n: u32, gens: &[u64]) -> Vec<u64> {
    all_subsets(n).filter(|&w| gens.iter().any(|&g| g & w == g)).collect()
}

/// `P[y | x]` under `ρ`-correlated resampling with bias `p`.
fn transition(x: u64, y: u64, n: u32, p: &Q, rho: &Q) -> Q {
    let fresh = |bit: bool| if bit { p.clone() } else { Q::one() - p };
    (0..n).fold(Q::one(), |acc, i| {
        let xb = x >> i & 1 == 1;
        let yb = y >> i & 1 == 1;
        let stay = if xb == yb { rho.clone() } else { Q::zero() };
        acc * (stay + (Q::one() - rho) * fresh(yb))
    })
}

fn stability_oracle(members: &[u64], n: u32, p: &Q, rho: &Q) -> Q {
    let mut total = Q::zero();
    for &x in members {
        let px = measure(&[x], n, p);
        for &y in members {
            total += &px * transition(x, y, n, p, rho);
        }
    }
    total
}

fn global_oracle(members: &[u64], n: u32, p: &Q, tau: &Q) -> bool {
    let mu = measure(members, n, p);
    all_subsets(n).all(|b| {
        let bound = pow(tau, b.count_ones()) * &mu;
        sforge::bits::submasks(b).all(|a| restricted_measure(members, n, a, b, p) <= bound)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn measures_match_product_formula(ms in any_family(6, 30), p in p_strategy(), b in 0u64..64, abits in 0u64..64) {
        let f = SetFamily::from_masks(6, ms.iter().copied()).unwrap();
        prop_assert_eq!(biased_measure(&f, &p), measure(f.members(), 6, &p));
        let pf = num_traits::ToPrimitive::to_f64(&p).unwrap();
        let exact = num_traits::ToPrimitive::to_f64(&measure(f.members(), 6, &p)).unwrap();
        prop_assert!((biased_measure(&f, &pf) - exact).abs() < 1e-12);
        let a = abits & b;
        prop_assert_eq!(lib_restricted(&f, a, b, &p).unwrap(), restricted_measure(f.members(), 6, a, b, &p));
    }

    #[test]
    fn globalness_matches_definition(ms in any_family(5, 20).prop_filter("nonempty", |v| !v.is_empty()), p in p_strategy(), tau in (1i64..=8).prop_map(|a| q(a, 2))) {
        let f = SetFamily::from_masks(5, ms.iter().copied()).unwrap();
        let v = check_global(&f, &p, &tau).unwrap();
        prop_assert_eq!(v.ok, global_oracle(f.members(), 5, &p, &tau));
        prop_assert_eq!(&v.measure, &measure(f.members(), 5, &p));
        if let Some((a, b)) = v.violation {
            prop_assert!(restricted_measure(f.members(), 5, a, b, &p) > pow(&tau, b.count_ones()) * &v.measure);
        }
        // The maximizing restriction is τ-global.
        let r = max_global_restriction(&f, &p, &tau).unwrap();
        let link: Vec<u64> = f.members().iter().filter(|&&m| m & r.b == r.a).map(|&m| sforge::bits::extract(m & !r.b, 0b11111 & !r.b)).collect();
        let rest = 5 - r.b.count_ones();
        if !link.is_empty() {
            prop_assert!(global_oracle(&link, rest, &p, &tau));
        }
    }

    #[test]
    fn monotone_globalness_matches_definition(gens in any_family(6, 4).prop_filter("nonempty", |v| !v.is_empty()), p in p_strategy(), tau in (2i64..=8).prop_map(|a| q(a, 2))) {
        let up = upward(6, &gens);
        let f = SetFamily::from_masks(6, up.iter().copied()).unwrap();
        prop_assert_eq!(check_global(&f, &p, &tau).unwrap().ok, global_oracle(&up, 6, &p, &tau));
    }

    #[test]
    fn stability_matches_double_sum(ms in any_family(4, 10), p in p_strategy(), rho in (0i64..=5).prop_map(|a| q(a, 5))) {
        let f = SetFamily::from_masks(4, ms.iter().copied()).unwrap();
        let want = stability_oracle(f.members(), 4, &p, &rho);
        prop_assert_eq!(stability(&f, &p, &rho).unwrap(), want.clone());
        prop_assert_eq!(stability_in(&f, &p, &rho).unwrap(), want);
    }

    #[test]
    fn noise_endpoints_and_semigroup(ms in any_family(5, 20), p in p_strategy(), a in 0i64..=4, b in 0i64..=4) {
        let f = SetFamily::from_masks(5, ms.iter().copied()).unwrap();
        let vals: Vec<Q> = (0..32u64).map(|x| if f.contains(x) { Q::one() } else { Q::zero() }).collect();
        let mu = measure(f.members(), 5, &p);
        prop_assert!(noise_operator(&vals, &p, &Q::zero()).iter().all(|v| *v == mu));
        prop_assert_eq!(noise_operator(&vals, &p, &Q::one()), vals.clone());
        let (ra, rb) = (q(a, 4), q(b, 4));
        let twice = noise_operator(&noise_operator(&vals, &p, &ra), &p, &rb);
        prop_assert_eq!(twice, noise_operator(&vals, &p, &(ra * rb)));
    }

    #[test]
    fn upper_closure_measure_bound(ms in uniform_family(9, 3, 40).prop_filter("nonempty", |v| !v.is_empty())) {
        let p = q(3, 9);
        let up = upward(9, &ms);
        let lhs = measure(&up, 9, &p);
        prop_assert!(lhs * qi(4 * binom(9, 3)) >= qi(ms.len() as u64));
    }
}

fn threshold(n: u32, k: u32) -> SetFamily {
    SetFamily::from_masks(n, all_subsets(n).filter(|m| m.count_ones() >= k)).unwrap()
}

#[test]
fn sharp_threshold_inequality_on_classic_functions() {
    let fams = [
        SetFamily::from_masks(5, upward(5, &[1])).unwrap(),
        threshold(5, 3),
        threshold(5, 2),
        threshold(4, 4),
    ];
    for f in &fams {
        for (p, pt) in [(q(1, 10), q(1, 5)), (q(1, 4), q(1, 2)), (q(1, 3), q(2, 3)), (q(1, 2), q(9, 10))] {
            let r = verify_sharp_threshold(f, &p, &pt, None).unwrap();
            let rho = &p * (Q::one() - &pt) / (&pt * (Q::one() - &p));
            let stab = stability_oracle(f.members(), f.n(), &p, &rho);
            let mu = measure(f.members(), f.n(), &p);
            assert_eq!(r.stab, stab);
            assert!(measure(f.members(), f.n(), &pt) * &stab >= &mu * &mu);
        }
    }
}

#[test]
fn non_monotone_input_is_rejected() {
    let f = SetFamily::from_masks(3, [0b1]).unwrap();
    assert!(verify_sharp_threshold(&f, &q(1, 4), &q(1, 2), None).is_err());
}
