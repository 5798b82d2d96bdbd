mod common;

use common::*;
use num_traits::Zero;
use proptest::prelude::*;
use sforge::domains::{check_assumption3, check_tau_homogeneous, max_homogeneous_restriction};
use sforge::spread::{check_spread, find_disjoint_representatives, max_spread_restriction, spread_lemma_mc, wilson};
use sforge::{Domain, SetFamily};

fn domains() -> Vec<Domain> {
    vec![
        Domain::binomial(6, 3).unwrap(),
        Domain::binomial(7, 2).unwrap(),
        Domain::sequences(3, 3).unwrap(),
        Domain::kpartite(4, &[2, 1]).unwrap(),
        Domain::permutations(4).unwrap(),
        Domain::complex_layer(&[vec![1, 2, 3, 4], vec![3, 4, 5, 6], vec![1, 5, 6]], 2).unwrap(),
    ]
}

fn link_oracle(d: &Domain, t: u64) -> u64 {
    d.family().members().iter().filter(|&&m| m & t == t).count() as u64
}

#[test]
fn domain_sizes_match_formulas() {
    assert_eq!(Domain::binomial(9, 4).unwrap().len(), binom(9, 4));
    assert_eq!(Domain::sequences(4, 3).unwrap().len(), 64);
    assert_eq!(Domain::kpartite(5, &[2, 3, 1]).unwrap().len(), binom(5, 2) * binom(5, 3) * 5);
    assert_eq!(Domain::permutations(5).unwrap().len(), 120);
    for d in domains() {
        let k = d.k();
        assert!(d.family().members().iter().all(|m| m.count_ones() == k));
    }
}

#[test]
fn links_and_shadows_match_enumeration() {
    for d in domains() {
        let n = d.n();
        for t in all_subsets(n).filter(|m| m.count_ones() <= 3) {
            assert_eq!(d.link_raw(t), link_oracle(&d, t), "{:?} T={t:#x}", d.spec());
        }
        for h in 0..=d.k() {
            let want: Vec<u64> = sorted_shadow(&d, h);
            assert_eq!(d.shadow(h), want);
        }
        for h in 1..=d.k() {
            let best = d.shadow(h).iter().map(|&t| link_oracle(&d, t)).max().unwrap();
            assert_eq!(d.max_link(h).unwrap().1, best);
        }
    }
}

fn sorted_shadow(d: &Domain, h: u32) -> Vec<u64> {
    let mut v: Vec<u64> = all_subsets(d.n()).filter(|&y| y.count_ones() == h && link_oracle(d, y) > 0).collect();
    v.sort_unstable_by_key(|&m| sforge::bits::key(m));
    v
}

/// Every link at depth `<= t` is `r`-spread, straight from the definition.
fn rt_spread_oracle(d: &Domain, r: &Q, t: u32) -> bool {
    let n = d.n();
    let members = d.family().members();
    all_subsets(n).filter(|m| m.count_ones() <= t).all(|tm| {
        let link: Vec<u64> = members.iter().filter(|&&m| m & tm == tm).map(|&m| m & !tm).collect();
        if link.is_empty() {
            return true;
        }
        let size = qi(link.len() as u64);
        all_subsets(n).filter(|&x| x != 0 && x & tm == 0).all(|x| {
            let sub = link.iter().filter(|&&m| m & x == x).count() as u64;
            qi(sub) * pow(r, x.count_ones()) <= size
        })
    })
}

#[test]
fn rt_spread_matches_definition() {
    let cases: Vec<(Domain, Q)> = vec![
        (Domain::binomial(6, 2).unwrap(), q(3, 1)),
        (Domain::binomial(6, 2).unwrap(), q(31, 10)),
        (Domain::binomial(7, 3).unwrap(), q(7, 3)),
        (Domain::binomial(7, 3).unwrap(), q(5, 2)),
        (Domain::sequences(3, 2).unwrap(), q(3, 1)),
        (Domain::sequences(3, 2).unwrap(), q(4, 1)),
        (Domain::permutations(4).unwrap(), q(1, 1)),
        (Domain::permutations(4).unwrap(), q(3, 1)),
        (Domain::kpartite(4, &[2, 2]).unwrap(), q(2, 1)),
        (Domain::kpartite(4, &[2, 2]).unwrap(), q(5, 2)),
    ];
    for (d, r) in cases {
        for t in 0..=d.k() {
            assert_eq!(d.check_rt_spread(&r, t).ok, rt_spread_oracle(&d, &r, t), "{:?} r={r} t={t}", d.spec());
        }
    }
}

/// `μ(F) = E_H μ(F(H))` for a point mass, with `H` uniform in `∂_h A`.
fn point_mass_identity(d: &Domain, f: u64, h: u32) -> bool {
    let members = d.family().members();
    let shadow = sorted_shadow(d, h);
    let lhs = q(1, members.len() as i64);
    let rhs = shadow
        .iter()
        .filter(|&&x| f & x == x)
        .fold(Q::zero(), |acc, &x| acc + q(1, link_oracle(d, x) as i64))
        / qi(shadow.len() as u64);
    lhs == rhs
}

#[test]
fn expectation_identity_matches_oracle() {
    for d in [Domain::binomial(6, 3).unwrap(), Domain::sequences(3, 2).unwrap(), Domain::kpartite(3, &[2, 1]).unwrap()] {
        let lib = check_assumption3(&d, 0, 2, 1, 5).unwrap();
        let oracle = d.family().members().iter().all(|&f| (0..=2).all(|h| point_mass_identity(&d, f, h)));
        assert_eq!(lib.ok, oracle);
        assert!(lib.ok);
    }
    // A non-regular complex breaks the identity at h = 1.
    let d = Domain::complex_layer(&[vec![1, 2, 3], vec![3, 4]], 2).unwrap();
    let oracle = d.family().members().iter().all(|&f| point_mass_identity(&d, f, 1));
    assert!(!oracle);
    assert!(!check_assumption3(&d, 0, 1, 1, 5).unwrap().ok);
}

fn spread_oracle(ms: &[u64], n: u32, r: &Q) -> bool {
    let total = qi(ms.len() as u64);
    all_subsets(n).filter(|&x| x != 0).all(|x| {
        let c = ms.iter().filter(|&&m| m & x == x).count() as u64;
        qi(c) * pow(r, x.count_ones()) <= total
    })
}

fn r_strategy() -> impl Strategy<Value = Q> {
    (1i64..=12, 1i64..=4).prop_map(|(a, b)| q(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn spread_check_matches_definition(ms in any_family(7, 24).prop_filter("nonempty", |v| !v.is_empty()), r in r_strategy()) {
        let f = SetFamily::from_masks(7, ms.iter().copied()).unwrap();
        let v = check_spread(&f, &r).unwrap();
        prop_assert_eq!(v.ok, spread_oracle(f.members(), 7, &r));
        if let Some(x) = v.violation {
            let c = f.link_len(x) as u64;
            prop_assert!(qi(c) * pow(&r, x.count_ones()) > qi(f.len() as u64));
        }
    }

    #[test]
    fn max_spread_restriction_is_maximal(ms in any_family(7, 24).prop_filter("nonempty", |v| !v.is_empty()), r in r_strategy()) {
        let f = SetFamily::from_masks(7, ms.iter().copied()).unwrap();
        let x = max_spread_restriction(&f, &r).unwrap();
        let total = qi(f.len() as u64);
        let qualifies = |y: u64| {
            let c = f.link_len(y) as u64;
            c > 0 && qi(c) * pow(&r, y.count_ones()) >= total.clone()
        };
        prop_assert!(qualifies(x));
        prop_assert!(all_subsets(7).filter(|&y| qualifies(y)).all(|y| y.count_ones() <= x.count_ones()));
        let link = f.link(x);
        prop_assert!(spread_oracle(link.members(), 7, &r));
    }

    #[test]
    fn homogeneity_matches_definition(ms in uniform_family(6, 3, 20).prop_filter("nonempty", |v| !v.is_empty()), tau in r_strategy()) {
        let d = Domain::binomial(6, 3).unwrap();
        let f = SetFamily::from_masks(6, ms.iter().copied()).unwrap();
        let v = check_tau_homogeneous(&f, &d, &tau).unwrap();
        let mu = q(f.len() as i64, binom(6, 3) as i64);
        let oracle = all_subsets(6).filter(|x| x.count_ones() <= 3).all(|x| {
            let fx = f.link_len(x) as i64;
            let ax = binom(6 - x.count_ones() as u64, 3 - x.count_ones() as u64) as i64;
            q(fx, ax) <= pow(&tau, x.count_ones()) * &mu
        });
        prop_assert_eq!(v.ok, oracle);
        let s = max_homogeneous_restriction(&f, &d, &tau).unwrap();
        let lhs = |x: u64| q(f.link_len(x) as i64, binom(6 - x.count_ones() as u64, 3 - x.count_ones() as u64) as i64);
        prop_assert!(lhs(s) >= pow(&tau, s.count_ones()) * &mu);
        prop_assert!(all_subsets(6)
            .filter(|y| y.count_ones() <= 3 && f.link_len(*y) > 0)
            .filter(|&y| lhs(y) >= pow(&tau, y.count_ones()) * &mu)
            .all(|y| y.count_ones() <= s.count_ones()));
    }

    #[test]
    fn representatives_match_brute_force(
        fams in proptest::collection::vec(any_family(6, 5).prop_filter("nonempty", |v| !v.is_empty()), 1..=3),
        forbidden in 0u64..1 << 6,
        seed in 0u64..1000,
    ) {
        let g: Vec<SetFamily> = fams.iter().map(|v| SetFamily::from_masks(6, v.iter().copied()).unwrap()).collect();
        let got = find_disjoint_representatives(&g, forbidden, seed).unwrap();
        let want = brute_representatives(&fams, forbidden);
        prop_assert_eq!(got.is_some(), want);
        if let Some(reps) = got {
            for (i, &a) in reps.iter().enumerate() {
                prop_assert!(g[i].contains(a));
                prop_assert_eq!(a & forbidden, 0);
                for &b in &reps[i + 1..] {
                    prop_assert_eq!(a & b, 0);
                    prop_assert!(a != b);
                }
            }
        }
    }
}

fn brute_representatives(fams: &[Vec<u64>], forbidden: u64) -> bool {
    fn rec(f: &[Vec<u64>], i: usize, picked: &mut Vec<u64>, forbidden: u64) -> bool {
        if i == f.len() {
            return true;
        }
        f[i].iter().any(|&m| {
            let ok = m & forbidden == 0 && picked.iter().all(|&p| p & m == 0 && p != m);
            ok && {
                picked.push(m);
                let r = rec(f, i + 1, picked, forbidden);
                picked.pop();
                r
            }
        })
    }
    rec(fams, 0, &mut Vec::new(), forbidden)
}

/// `P[some member ⊆ W]` for a `p`-random `W`, summed over all `W`.
fn hit_probability(ms: &[u64], n: u32, p: &Q) -> Q {
    let up: Vec<u64> = all_subsets(n).filter(|&w| ms.iter().any(|&m| m & w == m)).collect();
    measure(&up, n, p)
}

#[test]
fn spread_lemma_mc_tracks_exact_probability() {
    let cases: Vec<(SetFamily, Q, u32, Q)> = vec![
        (Domain::binomial(8, 2).unwrap().family().clone(), q(4, 1), 2, q(1, 5)),
        (Domain::binomial(9, 3).unwrap().family().clone(), q(3, 1), 1, q(1, 3)),
        (SetFamily::from_masks(10, (0..10).map(|i| 1u64 << i)).unwrap(), q(10, 1), 3, q(1, 20)),
        (SetFamily::from_masks(8, [0b11, 0b1100, 0b110000, 0b11000000]).unwrap(), q(2, 1), 1, q(1, 2)),
    ];
    for (i, (f, r, m, delta)) in cases.into_iter().enumerate() {
        let est = spread_lemma_mc(&f, &r, m, &delta, 40_000, 11 + i as u64).unwrap();
        let exact = hit_probability(f.members(), f.n(), &(qi(m as u64) * &delta));
        let exact = num_traits::ToPrimitive::to_f64(&exact).unwrap();
        let (lo, hi) = wilson(est.hits, est.trials, 3.89);
        assert!(lo <= exact && exact <= hi, "case {i}: exact {exact} outside [{lo}, {hi}]");
        assert!(!est.violation);
    }
}

#[test]
fn wilson_interval_contains_rate() {
    for (h, n) in [(0, 10), (5, 10), (10, 10), (317, 1000)] {
        let (lo, hi) = wilson(h, n, 2.576);
        let p = h as f64 / n as f64;
        assert!(lo <= p && p <= hi && (0.0..=1.0).contains(&lo) && hi <= 1.0);
    }
    assert_eq!(wilson(0, 0, 2.0), (0.0, 1.0));
}
