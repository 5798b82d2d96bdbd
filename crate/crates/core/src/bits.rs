//! Bitmask helpers: canonical order, subset enumeration, binomials.

use num_bigint::BigUint;
use num_traits::One;

pub type Mask = u64;

/// Canonical order key: popcount first, then numeric value.
#[inline]
pub fn key(m: Mask) -> (u32, Mask) {
    (m.count_ones(), m)
}

#[inline]
pub fn full(n: u32) -> Mask {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[inline]
pub fn is_subset(a: Mask, b: Mask) -> bool {
    a & !b == 0
}

/// Set bits, lowest first.
pub fn elements(mut m: Mask) -> impl Iterator<Item = u32> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros();
            m &= m - 1;
            Some(i)
        }
    })
}

/// All submasks of `m`, including `0` and `m`, in decreasing numeric order.
pub fn submasks(m: Mask) -> impl Iterator<Item = Mask> {
    let mut cur = Some(m);
    std::iter::from_fn(move || {
        let s = cur?;
        cur = if s == 0 { None } else { Some((s - 1) & m) };
        Some(s)
    })
}

/// Submasks of `m` with exactly `h` elements.
pub fn submasks_of_size(m: Mask, h: u32) -> impl Iterator<Item = Mask> {
    submasks(m).filter(move |s| s.count_ones() == h)
}

/// All `k`-subsets of `[n]` in increasing numeric order (Gosper's hack).
pub fn k_subsets(n: u32, k: u32) -> Vec<Mask> {
    assert!(n <= 64);
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut x: u128 = (1u128 << k) - 1;
    let limit: u128 = 1u128 << n;
    while x < limit {
        out.push(x as Mask);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// Spreads the low bits of `local` onto the set bits of `within`.
pub fn deposit(local: Mask, within: Mask) -> Mask {
    let mut out = 0;
    for (i, e) in elements(within).enumerate() {
        if local >> i & 1 == 1 {
            out |= 1 << e;
        }
    }
    out
}

/// Packs the bits of `m` lying in `within` into the low bits (inverse of [`deposit`]).
pub fn extract(m: Mask, within: Mask) -> Mask {
    let mut out = 0;
    for (i, e) in elements(within).enumerate() {
        if m >> e & 1 == 1 {
            out |= 1 << i;
        }
    }
    out
}

pub fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Binomial coefficient in `u64`; panics on overflow.
pub fn binom_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    u64::try_from(acc).expect("binomial overflows u64")
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |a, i| a * i)
}

/// 1-based element list, the form used by the file formats.
pub fn to_elements_1based(m: Mask) -> Vec<u32> {
    elements(m).map(|e| e + 1).collect()
}
