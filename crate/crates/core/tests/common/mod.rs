//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the library's search or counting code.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

pub type Q = BigRational;

pub fn q(a: i64, b: i64) -> Q {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

pub fn qi(a: u64) -> Q {
    BigRational::from_integer(BigInt::from(a))
}

pub fn mask(elems: &[u32]) -> u64 {
    elems.iter().fold(0, |m, &e| m | 1 << (e - 1))
}

pub fn pow(x: &Q, e: u32) -> Q {
    (0..e).fold(Q::one(), |acc, _| acc * x)
}

pub fn all_subsets(n: u32) -> impl Iterator<Item = u64> {
    0..1u64 << n
}

pub fn k_sets(n: u32, k: u32) -> Vec<u64> {
    all_subsets(n).filter(|m| m.count_ones() == k).collect()
}

pub fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Core of `sets` if they form a sunflower, from the definition.
pub fn sunflower_core(sets: &[u64]) -> Option<u64> {
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if sets[i] == sets[j] {
                return None;
            }
        }
    }
    let core = sets.iter().fold(!0u64, |a, &b| a & b);
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if sets[i] & sets[j] != core {
                return None;
            }
        }
    }
    Some(core)
}

/// Whether some `s` members form a sunflower whose core size passes `ok`.
pub fn has_sunflower(members: &[u64], s: usize, ok: &dyn Fn(u32) -> bool) -> bool {
    fn rec(m: &[u64], from: usize, chosen: &mut Vec<u64>, s: usize, ok: &dyn Fn(u32) -> bool) -> bool {
        if chosen.len() == s {
            return sunflower_core(chosen).is_some_and(|c| ok(c.count_ones()));
        }
        (from..m.len()).any(|i| {
            chosen.push(m[i]);
            let hit = rec(m, i + 1, chosen, s, ok);
            chosen.pop();
            hit
        })
    }
    rec(members, 0, &mut Vec::new(), s, ok)
}

/// Largest sunflower-free subfamily by plain enumeration of all subsets.
pub fn max_free_exhaustive(cands: &[u64], s: usize, ok: &dyn Fn(u32) -> bool) -> usize {
    assert!(cands.len() <= 22);
    let mut best = 0;
    for pick in 0..1u64 << cands.len() {
        let size = pick.count_ones() as usize;
        if size <= best {
            continue;
        }
        let chosen: Vec<u64> = (0..cands.len()).filter(|&i| pick >> i & 1 == 1).map(|i| cands[i]).collect();
        if !has_sunflower(&chosen, s, ok) {
            best = size;
        }
    }
    best
}

/// Largest sunflower-free subfamily by a DFS with no pruning beyond the
/// sunflower test itself.
pub fn max_free_dfs(cands: &[u64], s: usize, ok: &dyn Fn(u32) -> bool) -> usize {
    fn rec(c: &[u64], from: usize, chosen: &mut Vec<u64>, s: usize, ok: &dyn Fn(u32) -> bool, best: &mut usize) {
        *best = (*best).max(chosen.len());
        for i in from..c.len() {
            chosen.push(c[i]);
            if !has_sunflower_with(chosen, s, ok) {
                rec(c, i + 1, chosen, s, ok, best);
            }
            chosen.pop();
        }
    }
    let mut best = 0;
    rec(cands, 0, &mut Vec::new(), s, ok, &mut best);
    best
}

/// Sunflowers through the last member only.
fn has_sunflower_with(chosen: &[u64], s: usize, ok: &dyn Fn(u32) -> bool) -> bool {
    let (&x, rest) = chosen.split_last().unwrap();
    fn rec(m: &[u64], from: usize, picked: &mut Vec<u64>, s: usize, ok: &dyn Fn(u32) -> bool) -> bool {
        if picked.len() == s {
            return sunflower_core(picked).is_some_and(|c| ok(c.count_ones()));
        }
        (from..m.len()).any(|i| {
            picked.push(m[i]);
            let hit = rec(m, i + 1, picked, s, ok);
            picked.pop();
            hit
        })
    }
    rec(rest, 0, &mut vec![x], s, ok)
}

/// `μ_p(F)` from the product formula, one point at a time.
pub fn measure(members: &[u64], n: u32, p: &Q) -> Q {
    let one_minus = Q::one() - p;
    members.iter().fold(Q::zero(), |acc, &m| {
        let k = m.count_ones();
        acc + pow(p, k) * pow(&one_minus, n - k)
    })
}

/// `μ_p` over the `n - |B|` coordinates outside `B` of `F(A, B)`.
pub fn restricted_measure(members: &[u64], n: u32, a: u64, b: u64, p: &Q) -> Q {
    let rest = n - b.count_ones();
    let one_minus = Q::one() - p;
    members.iter().filter(|&&m| m & b == a).fold(Q::zero(), |acc, &m| {
        let k = (m & !b).count_ones();
        acc + pow(p, k) * pow(&one_minus, rest - k)
    })
}

/// Random family of `k`-sets on `[n]` with roughly `density` of all sets.
pub fn uniform_family(n: u32, k: u32, max_len: usize) -> impl Strategy<Value = Vec<u64>> {
    let all = k_sets(n, k);
    proptest::sample::subsequence(all.clone(), 0..=max_len.min(all.len()))
}

/// Random family of arbitrary subsets of `[n]`.
pub fn any_family(n: u32, max_len: usize) -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::btree_set(0..1u64 << n, 0..=max_len).prop_map(|s| s.into_iter().collect())
}
