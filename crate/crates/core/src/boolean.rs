//! p-biased measures, τ-globalness, the noise operator and the sharp
//! threshold statements built on them.
//!
//! Exact routines scale every quantity to a common integer denominator:
//! with `p = a/b`, `c = b - a` and `τ = d/e`, the weight of a restriction
//! `(A, B)` is `W(A,B) = Σ a^|F\A| c^(n-|B|-|F\A|)` over members with
//! `F ∩ B = A`, and `τ^-|B| μ^-B(F(A,B)) = W (be)^|B| d^(n-|B|) / (bd)^n`.

use std::ops::{Add, Mul};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{extract, full, Mask};
use crate::error::{Error, Result};
use crate::family::{GroundSet, SetFamily};
use crate::interval::{self, Interval};
use crate::scalar::{from_biguint, int, is_in_open_unit, ser_rational, unsigned_parts, Rational, Scalar};

/// Largest ground set for exhaustive restriction and noise computations.
pub const MAX_EXACT_N: u32 = 16;
/// Largest ground set for the diagonal (`A = B`) restriction scan.
pub const MAX_DIAGONAL_N: u32 = 24;
/// Largest ground set for hypercontractivity norms.
pub const MAX_HYPER_N: u32 = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasedMeasure {
    #[serde(serialize_with = "ser_rational")]
    pub p: Rational,
    pub ground: GroundSet,
}

impl BiasedMeasure {
    pub fn new(p: Rational, ground: GroundSet) -> Result<Self> {
        if !is_in_open_unit(&p) {
            return Err(Error::precondition("p must lie in (0, 1)"));
        }
        Ok(BiasedMeasure { p, ground })
    }

    /// `μ_p` of a single point.
    pub fn point(&self, x: Mask) -> Rational {
        let k = x.count_ones();
        self.p.powu(k) * (Rational::one() - &self.p).powu(self.ground.n() - k)
    }

    pub fn measure(&self, f: &SetFamily) -> Result<Rational> {
        if f.n() != self.ground.n() {
            return Err(Error::precondition("family and measure live on different ground sets"));
        }
        Ok(measure_on(f.members(), f.n(), &self.p))
    }
}

fn measure_on<S: Scalar>(members: &[Mask], n: u32, p: &S) -> S {
    let mut counts = vec![0u64; n as usize + 1];
    for &m in members {
        counts[m.count_ones() as usize] += 1;
    }
    let q = S::one() - p.clone();
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .fold(S::zero(), |acc, (k, &c)| {
            acc + S::from_u64(c) * p.powu(k as u32) * q.powu(n - k as u32)
        })
}

/// `μ_p(F) = Σ p^|F| (1-p)^(n-|F|)`.
pub fn biased_measure<S: Scalar>(f: &SetFamily, p: &S) -> S {
    measure_on(f.members(), f.n(), p)
}

/// `F(A, B)` re-indexed onto the `n - |B|` elements outside `B`.
pub fn compact_restriction(f: &SetFamily, a: Mask, b: Mask) -> Result<SetFamily> {
    let r = f.restrict(a, b)?;
    let keep = full(f.n()) & !b;
    SetFamily::from_masks(keep.count_ones(), r.members().iter().map(|&m| extract(m, keep)))
}

/// `μ_p^-B(F(A, B))`.
pub fn restricted_measure(f: &SetFamily, a: Mask, b: Mask, p: &Rational) -> Result<Rational> {
    Ok(biased_measure(&compact_restriction(f, a, b)?, p))
}

fn table(f: &SetFamily, cap: u32) -> Result<Vec<bool>> {
    if f.n() > cap {
        return Err(Error::capacity(format!("exact enumeration over {} > {cap} elements", f.n())));
    }
    let mut t = vec![false; 1 << f.n()];
    for &m in f.members() {
        t[m as usize] = true;
    }
    Ok(t)
}

fn parts(r: &Rational, what: &str) -> Result<(BigUint, BigUint)> {
    unsigned_parts(r).ok_or_else(|| Error::precondition(format!("{what} must be nonnegative")))
}

trait Acc:
    Clone + Ord + Send + Sync + Zero + One + Add<Output = Self> + Mul<Output = Self> + for<'a> Mul<&'a Self, Output = Self>
{
    fn of(v: &BigUint) -> Self;
    fn big(&self) -> BigUint;
}

impl Acc for u128 {
    fn of(v: &BigUint) -> Self {
        v.to_u128().expect("operand fits in u128")
    }

    fn big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Acc for BigUint {
    fn of(v: &BigUint) -> Self {
        v.clone()
    }

    fn big(&self) -> BigUint {
        self.clone()
    }
}

#[derive(Clone, Debug)]
struct Cand<T> {
    key: T,
    a: Mask,
    b: Mask,
}

/// Larger key wins; then smaller `|B|`, smaller `B`, larger `A`.
fn better<T: Ord>(x: &Cand<T>, y: &Cand<T>) -> bool {
    use std::cmp::Ordering::*;
    match x.key.cmp(&y.key) {
        Greater => true,
        Less => false,
        Equal => (x.b.count_ones(), x.b, std::cmp::Reverse(x.a)) < (y.b.count_ones(), y.b, std::cmp::Reverse(y.a)),
    }
}

fn pick<T: Ord>(x: Cand<T>, y: Cand<T>) -> Cand<T> {
    if better(&y, &x) {
        y
    } else {
        x
    }
}

struct Weights<T> {
    a: T,
    c: T,
    /// `mult[j] = (be)^j d^(n-j)`.
    mult: Vec<T>,
}

fn weights<T: Acc>(n: u32, p: &Rational, tau: &Rational) -> Result<Weights<T>> {
    let (a, b) = parts(p, "p")?;
    let (d, e) = parts(tau, "τ")?;
    let c = &b - &a;
    let be = &b * &e;
    let mult = (0..=n).map(|j| T::of(&(be.pow(j) * d.pow(n - j)))).collect();
    Ok(Weights { a: T::of(&a), c: T::of(&c), mult })
}

fn fits_u128(n: u32, p: &Rational, tau: &Rational) -> bool {
    let (_, b) = unsigned_parts(p).unwrap_or_default();
    let (d, e) = unsigned_parts(tau).unwrap_or_default();
    let bits = n as u64 * (b.bits() + d.max(e).bits());
    bits < 126
}

fn diagonal<T: Acc>(t: &[bool], n: u32, w: &Weights<T>) -> Cand<T> {
    let mut v: Vec<T> = t.iter().map(|&x| if x { T::one() } else { T::zero() }).collect();
    for i in 0..n {
        let bit = 1usize << i;
        for x in 0..v.len() {
            if x & bit == 0 {
                v[x] = v[x].clone() * &w.c + v[x | bit].clone() * &w.a;
            }
        }
    }
    v.into_par_iter()
        .enumerate()
        .map(|(x, val)| Cand { key: val * &w.mult[x.count_ones() as usize], a: x as Mask, b: x as Mask })
        .reduce_with(pick)
        .expect("nonempty table")
}

fn ternary<T: Acc>(arr: &[T], m: u32, b: Mask, a: Mask, w: &Weights<T>) -> Cand<T> {
    if m == 0 {
        return Cand { key: arr[0].clone() * &w.mult[b.count_ones() as usize], a, b };
    }
    let bit = 1 << (m - 1);
    let half = arr.len() / 2;
    let (lo, hi) = arr.split_at(half);
    let free: Vec<T> = lo.iter().zip(hi).map(|(l, h)| l.clone() * &w.c + h.clone() * &w.a).collect();
    let x = ternary(&free, m - 1, b, a, w);
    let y = ternary(lo, m - 1, b | bit, a, w);
    let z = ternary(hi, m - 1, b | bit, a | bit, w);
    pick(pick(x, y), z)
}

fn general<T: Acc>(t: &[bool], n: u32, w: &Weights<T>) -> Cand<T> {
    let root: Vec<T> = t.iter().map(|&x| if x { T::one() } else { T::zero() }).collect();
    // Expand the top two coordinates into independent tasks.
    let mut tasks = vec![(root, n, 0 as Mask, 0 as Mask)];
    for _ in 0..n.min(2) {
        let mut next = Vec::new();
        for (arr, m, b, a) in tasks {
            let bit = 1 << (m - 1);
            let half = arr.len() / 2;
            let free = arr[..half].iter().zip(&arr[half..]).map(|(l, h)| l.clone() * &w.c + h.clone() * &w.a).collect();
            next.push((free, m - 1, b, a));
            next.push((arr[..half].to_vec(), m - 1, b | bit, a));
            next.push((arr[half..].to_vec(), m - 1, b | bit, a | bit));
        }
        tasks = next;
    }
    tasks
        .into_par_iter()
        .map(|(arr, m, b, a)| ternary(&arr, m, b, a, w))
        .reduce_with(pick)
        .expect("at least one task")
}

fn base_key<T: Acc>(t: &[bool], n: u32, w: &Weights<T>) -> T {
    let mut acc = T::zero();
    for (x, &v) in t.iter().enumerate() {
        if v {
            let k = x.count_ones();
            let mut term = T::one();
            for _ in 0..k {
                term = term * &w.a;
            }
            for _ in k..n {
                term = term * &w.c;
            }
            acc = acc + term;
        }
    }
    acc * &w.mult[0]
}

/// A restriction `(A, B)` with its score `τ^-|B| μ_p^-B(F(A, B))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Restriction {
    pub a: Mask,
    pub b: Mask,
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
}

struct Scan {
    best: Restriction,
    diagonal_best: Option<Restriction>,
    base: Rational,
    exhaustive: bool,
}

fn scan_with<T: Acc>(f: &SetFamily, p: &Rational, tau: &Rational, want_diag: bool) -> Result<Scan> {
    let n = f.n();
    let monotone = f.is_upward_closed();
    let t = table(f, if monotone { MAX_DIAGONAL_N } else { MAX_EXACT_N })?;
    let w = weights::<T>(n, p, tau)?;
    let scale = {
        let (_, b) = parts(p, "p")?;
        let (d, _) = parts(tau, "τ")?;
        from_biguint(&(b * d).pow(n))
    };
    let to_r = |c: &Cand<T>| Restriction { a: c.a, b: c.b, value: from_biguint(&c.key.big()) / &scale };
    let diag = diagonal(&t, n, &w);
    let best = if monotone { diag.clone() } else { general(&t, n, &w) };
    let base = from_biguint(&base_key(&t, n, &w).big()) / &scale;
    Ok(Scan {
        best: to_r(&best),
        diagonal_best: (want_diag || monotone).then(|| to_r(&diag)),
        base,
        exhaustive: !monotone,
    })
}

fn scan(f: &SetFamily, p: &Rational, tau: &Rational, want_diag: bool) -> Result<Scan> {
    if !is_in_open_unit(p) {
        return Err(Error::precondition("p must lie in (0, 1)"));
    }
    if !tau.is_positive() {
        return Err(Error::precondition("τ must be positive"));
    }
    if fits_u128(f.n(), p, tau) {
        scan_with::<u128>(f, p, tau, want_diag)
    } else {
        scan_with::<BigUint>(f, p, tau, want_diag)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalnessVerdict {
    #[serde(serialize_with = "ser_rational")]
    pub tau: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub p: Rational,
    pub ok: bool,
    /// `(A, B)` with `μ_p^-B(F(A,B)) > τ^|B| μ_p(F)`, the worst one.
    pub violation: Option<(Mask, Mask)>,
    #[serde(serialize_with = "ser_rational")]
    pub measure: Rational,
    pub worst: Restriction,
    /// All `3^n` pairs were scanned (false for upward-closed families,
    /// where `A = B` dominates).
    pub exhaustive: bool,
}

pub fn check_global(f: &SetFamily, p: &Rational, tau: &Rational) -> Result<GlobalnessVerdict> {
    let s = scan(f, p, tau, false)?;
    let ok = s.best.value <= s.base;
    Ok(GlobalnessVerdict {
        tau: tau.clone(),
        p: p.clone(),
        ok,
        violation: (!ok).then_some((s.best.a, s.best.b)),
        measure: s.base,
        worst: s.best,
        exhaustive: s.exhaustive,
    })
}

/// Maximizer of `τ^-|B| μ_p^-B(F(A, B))`; `F(A, B)` is then τ-global.
///
/// When `τ(1-p) > 1` the best `A = B` restriction is checked to reach the
/// overall maximum and is returned.
pub fn max_global_restriction(f: &SetFamily, p: &Rational, tau: &Rational) -> Result<Restriction> {
    let collapse = tau * (Rational::one() - p) > Rational::one();
    let s = scan(f, p, tau, collapse)?;
    if collapse {
        let d = s.diagonal_best.expect("diagonal scan requested");
        if d.value != s.best.value {
            return Err(Error::assertion(format!(
                "best A = B restriction {} is below the overall maximum {}",
                d.value, s.best.value
            )));
        }
        return Ok(d);
    }
    Ok(s.best)
}

/// Best `S` for `τ^-|S| μ_p(F(S))`, smallest `|S|` then mask on ties.
pub fn max_link_restriction(f: &SetFamily, p: &Rational, tau: &Rational) -> Result<Restriction> {
    if !is_in_open_unit(p) {
        return Err(Error::precondition("p must lie in (0, 1)"));
    }
    let t = table(f, MAX_DIAGONAL_N)?;
    let n = f.n();
    let (_, b) = parts(p, "p")?;
    let (d, _) = parts(tau, "τ")?;
    let scale = from_biguint(&(b * d).pow(n));
    let w = weights::<BigUint>(n, p, tau)?;
    let c = diagonal(&t, n, &w);
    Ok(Restriction { a: c.a, b: c.b, value: from_biguint(&c.key) / scale })
}

/// Applies `T_ρ` to a function on `{0,1}^n` given as a table.
///
/// Per coordinate the kernel is `g ↦ ρ g + (1-ρ)(p g|₁ + (1-p) g|₀)`.
pub fn noise_operator<S: Scalar>(values: &[S], p: &S, rho: &S) -> Vec<S> {
    assert!(values.len().is_power_of_two());
    let mut v = values.to_vec();
    let q = S::one() - p.clone();
    let rest = S::one() - rho.clone();
    let mut bit = 1;
    while bit < v.len() {
        for x in 0..v.len() {
            if x & bit == 0 {
                let g0 = v[x].clone();
                let g1 = v[x | bit].clone();
                let mean = rest.clone() * (p.clone() * g1.clone() + q.clone() * g0.clone());
                v[x] = rho.clone() * g0 + mean.clone();
                v[x | bit] = rho.clone() * g1 + mean;
            }
        }
        bit <<= 1;
    }
    v
}

/// `Stab_ρ(f) = <T_ρ f, f>` over any scalar.
pub fn stability_in<S: Scalar>(f: &SetFamily, p: &S, rho: &S) -> Result<S> {
    let t = table(f, MAX_EXACT_N)?;
    let vals: Vec<S> = t.iter().map(|&x| if x { S::one() } else { S::zero() }).collect();
    let tf = noise_operator(&vals, p, rho);
    let n = f.n();
    let q = S::one() - p.clone();
    Ok(f.members().iter().fold(S::zero(), |acc, &m| {
        let k = m.count_ones();
        acc + p.powu(k) * q.powu(n - k) * tf[m as usize].clone()
    }))
}

/// Integer image of `T_ρ f` scaled by `(sb)^n` for `p = a/b`, `ρ = r/s`.
fn noise_scaled(t: &[bool], p: &Rational, rho: &Rational) -> Result<Vec<BigUint>> {
    let (a, b) = parts(p, "p")?;
    let (r, s) = parts(rho, "ρ")?;
    if r > s {
        return Err(Error::precondition("ρ must lie in [0, 1]"));
    }
    let c = &b - &a;
    let rb = &r * &b;
    let sr = &s - &r;
    let mut v: Vec<BigUint> = t.iter().map(|&x| BigUint::from(x as u8)).collect();
    let mut bit = 1;
    while bit < v.len() {
        for x in 0..v.len() {
            if x & bit == 0 {
                let mean = &sr * (&a * &v[x | bit] + &c * &v[x]);
                let g0 = &rb * &v[x] + &mean;
                let g1 = &rb * &v[x | bit] + mean;
                v[x] = g0;
                v[x | bit] = g1;
            }
        }
        bit <<= 1;
    }
    Ok(v)
}

/// Exact `Stab_ρ(f)` for `ρ ∈ [0, 1]`.
pub fn stability(f: &SetFamily, p: &Rational, rho: &Rational) -> Result<Rational> {
    if !is_in_open_unit(p) {
        return Err(Error::precondition("p must lie in (0, 1)"));
    }
    let t = table(f, MAX_EXACT_N)?;
    let v = noise_scaled(&t, p, rho)?;
    let (a, b) = parts(p, "p")?;
    let (_, s) = parts(rho, "ρ")?;
    let c = &b - &a;
    let n = f.n();
    let num = f.members().iter().fold(BigUint::zero(), |acc, &m| {
        let k = m.count_ones();
        acc + a.pow(k) * c.pow(n - k) * &v[m as usize]
    });
    let den = b.pow(n) * (s * &b).pow(n);
    Ok(Rational::new(BigInt::from(num), BigInt::from(den)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OneStepCheck {
    #[serde(serialize_with = "ser_rational")]
    pub tau: Rational,
    pub global: bool,
    /// `p̃ = 2^6 τ p`, `p < 2^-7/τ` and τ-globalness all hold.
    pub applicable: bool,
    /// `μ_p̃(F)^4 >= μ_p(F)^3`, when applicable.
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpThresholdReport {
    #[serde(serialize_with = "ser_rational")]
    pub p: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub p_tilde: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub rho: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub mu_p: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub mu_p_tilde: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub stab: Rational,
    /// `μ_p(f)^2 / Stab_ρ(f)` (zero when `f ≡ 0`).
    #[serde(serialize_with = "ser_rational")]
    pub rhs: Rational,
    pub holds: bool,
    pub one_step: Option<OneStepCheck>,
}

fn require_monotone(f: &SetFamily) -> Result<()> {
    if f.is_upward_closed() {
        Ok(())
    } else {
        Err(Error::precondition("family is not upward closed"))
    }
}

/// `μ_p̃(f) >= μ_p(f)^2 / Stab_ρ(f)` with `ρ = p(1-p̃) / (p̃(1-p))`.
///
/// With `tau` given, also checks the one-step bound `μ_p̃ >= μ_p^(3/4)`
/// whenever its hypotheses hold.
pub fn verify_sharp_threshold(f: &SetFamily, p: &Rational, p_tilde: &Rational, tau: Option<&Rational>) -> Result<SharpThresholdReport> {
    require_monotone(f)?;
    if !is_in_open_unit(p) || !is_in_open_unit(p_tilde) || p >= p_tilde {
        return Err(Error::precondition("need 0 < p < p̃ < 1"));
    }
    let one = Rational::one();
    let rho = p * (&one - p_tilde) / (p_tilde * (&one - p));
    let mu_p = biased_measure(f, p);
    let mu_pt = biased_measure(f, p_tilde);
    let stab = stability(f, p, &rho)?;
    let rhs = if stab.is_zero() { Rational::zero() } else { &mu_p * &mu_p / &stab };
    let holds = mu_pt >= rhs;
    if !holds {
        return Err(Error::assertion(format!("μ_p̃ = {mu_pt} < μ_p²/Stab = {rhs}")));
    }
    let one_step = match tau {
        None => None,
        Some(tau) => {
            let global = check_global(f, p, tau)?.ok;
            let applicable = global && *p_tilde == int(64) * tau * p && p * int(128) * tau < one;
            let holds = applicable.then(|| mu_pt.clone().powu(4) >= mu_p.clone().powu(3));
            if holds == Some(false) {
                return Err(Error::assertion(format!("μ_p̃ = {mu_pt} < μ_p^(3/4) with μ_p = {mu_p}")));
            }
            Some(OneStepCheck { tau: tau.clone(), global, applicable, holds })
        }
    };
    Ok(SharpThresholdReport {
        p: p.clone(),
        p_tilde: p_tilde.clone(),
        rho,
        mu_p,
        mu_p_tilde: mu_pt,
        stab,
        rhs,
        holds,
        one_step,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpgradeRound {
    #[serde(serialize_with = "ser_rational")]
    pub p: Rational,
    /// Elements fixed this round, in original coordinates.
    pub fixed: Mask,
    #[serde(serialize_with = "ser_rational")]
    pub measure_before: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub measure_restricted: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub measure_next: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpgradeReport {
    pub rounds: Vec<UpgradeRound>,
    pub r: Mask,
    #[serde(serialize_with = "ser_rational")]
    pub p_final: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub initial_measure: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub final_measure: Rational,
    pub size_bound: u32,
    /// Whether `F(R)` is τ-global for the final measure (reported only).
    pub final_global: bool,
}

/// Iterated restriction and measure boosting: `m` rounds of "fix the best
/// link, multiply `p` by `2^6 τ`".
pub fn measure_upgrade(f: &SetFamily, p: &Rational, tau: &Rational, z: u32, m: u32) -> Result<UpgradeReport> {
    require_monotone(f)?;
    if f.n() > MAX_EXACT_N {
        return Err(Error::capacity(format!("measure upgrade over {} > {MAX_EXACT_N} elements", f.n())));
    }
    if !is_in_open_unit(p) {
        return Err(Error::precondition("p must lie in (0, 1)"));
    }
    if *tau < int(2) {
        return Err(Error::precondition("τ must be at least 2"));
    }
    let step = int(64) * tau;
    let initial = biased_measure(f, p);
    if initial.clone() * tau.powu(z) < Rational::one() {
        return Err(Error::precondition(format!("μ_p(F) = {initial} < τ^-{z}")));
    }
    if p * int(2) * step.powu(m) >= Rational::one() {
        return Err(Error::precondition("need p < (2^6 τ)^-m / 2"));
    }
    let mut cur = f.clone();
    let mut keep = full(f.n());
    let mut r: Mask = 0;
    let mut pi = p.clone();
    let mut rounds = Vec::new();
    for _ in 0..m {
        let before = biased_measure(&cur, &pi);
        let best = max_link_restriction(&cur, &pi, tau)?;
        let next = compact_restriction(&cur, best.b, best.b)?;
        let restricted = biased_measure(&next, &pi);
        if !check_global(&next, &pi, tau)?.ok {
            return Err(Error::assertion("maximal link restriction is not τ-global"));
        }
        let fixed = crate::bits::deposit(best.b, keep);
        keep &= !fixed;
        r |= fixed;
        let p_next = &pi * &step;
        let after = biased_measure(&next, &p_next);
        if after.clone().powu(4) < restricted.clone().powu(3) {
            return Err(Error::assertion(format!("one-step bound fails: {after} < ({restricted})^(3/4)")));
        }
        rounds.push(UpgradeRound {
            p: pi.clone(),
            fixed,
            measure_before: before,
            measure_restricted: restricted,
            measure_next: after,
        });
        cur = next;
        pi = p_next;
    }
    let final_measure = biased_measure(&cur, &pi);
    let size_bound = 4 * z;
    if r.count_ones() > size_bound {
        return Err(Error::assertion(format!("|R| = {} > 4z = {size_bound}", r.count_ones())));
    }
    let e = 4u32.checked_pow(m).ok_or_else(|| Error::capacity("too many rounds"))?;
    if final_measure.powu(e) < initial.powu(3u32.pow(m)) {
        return Err(Error::assertion(format!("final measure {final_measure} < μ_p(F)^((3/4)^{m})")));
    }
    let final_global = pi < Rational::one() && check_global(&cur, &pi, tau)?.ok;
    Ok(UpgradeReport { rounds, r, p_final: pi, initial_measure: initial, final_measure, size_bound, final_global })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypercontractivityReport {
    pub verdict: Verdict,
    /// `‖T_ρ f‖_q^q`.
    pub lhs: Interval,
    /// `‖f‖_2^q`.
    pub rhs: Interval,
    /// `ln q / (16 τ q)`.
    pub rho_bound: Interval,
    pub rho_within_bound: bool,
}

/// Compares `‖T_ρ f‖_q` with `‖f‖_2` for a τ-global Boolean `f`.
///
/// Integer `q` is decided exactly (`lhs^2` against `μ^q`); other `q` use
/// rational enclosures of the fractional powers.
pub fn hypercontractivity_check(f: &SetFamily, p: &Rational, tau: &Rational, rho: &Rational, q: &Rational) -> Result<HypercontractivityReport> {
    if f.n() > MAX_HYPER_N {
        return Err(Error::capacity(format!("hypercontractivity over {} > {MAX_HYPER_N} elements", f.n())));
    }
    if *q <= int(2) {
        return Err(Error::precondition("q must exceed 2"));
    }
    let g = check_global(f, p, tau)?;
    if !g.ok {
        return Err(Error::precondition(format!("family is not τ-global (violation {:?})", g.violation)));
    }
    let rho_bound = interval::ln(q).div(&Interval::exact(int(16) * tau * q)).expect("positive divisor");
    let rho_within_bound = Interval::exact(rho.clone()).le_certain(&rho_bound);
    let t = table(f, MAX_HYPER_N)?;
    let vals: Vec<Rational> = t.iter().map(|&x| if x { Rational::one() } else { Rational::zero() }).collect();
    let tf = noise_operator(&vals, p, rho);
    let bm = BiasedMeasure::new(p.clone(), f.ground().clone())?;
    let mu = &g.measure;
    let (lhs, rhs, verdict) = if q.is_integer() {
        let qi = q.to_integer().to_u32().ok_or_else(|| Error::capacity("q too large"))?;
        let lhs = tf.iter().enumerate().fold(Rational::zero(), |acc, (x, v)| acc + bm.point(x as Mask) * v.powu(qi));
        let holds = lhs.clone() * &lhs <= mu.powu(qi);
        let rhs = if qi % 2 == 0 { Interval::exact(mu.powu(qi / 2)) } else { interval::pow_frac(mu, qi as i64, 2) };
        (Interval::exact(lhs), rhs, if holds { Verdict::Holds } else { Verdict::Fails })
    } else {
        let (u, v) = parts(q, "q")?;
        let u = u.to_i64().ok_or_else(|| Error::capacity("q numerator too large"))?;
        let v = v.to_u32().ok_or_else(|| Error::capacity("q denominator too large"))?;
        let mut lhs = Interval::int(0);
        for (x, val) in tf.iter().enumerate() {
            if val.is_zero() {
                continue;
            }
            lhs = lhs.add(&interval::pow_frac(val, u, v).scale(&bm.point(x as Mask)));
        }
        let rhs = if mu.is_zero() { Interval::int(0) } else { interval::pow_frac(mu, u, 2 * v) };
        let verdict = if lhs.le_certain(&rhs) {
            Verdict::Holds
        } else if lhs.gt_certain(&rhs) {
            Verdict::Fails
        } else {
            Verdict::Undecided
        };
        (lhs, rhs, verdict)
    };
    Ok(HypercontractivityReport { verdict, lhs, rhs, rho_bound, rho_within_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn fam(n: u32, sets: &[&[u32]]) -> SetFamily {
        SetFamily::from_sets(n, &sets.iter().map(|s| s.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn measure_examples() {
        assert_eq!(biased_measure(&fam(2, &[&[]]), &ratio(1, 3)), ratio(4, 9));
        let dict = fam(5, &[&[1]]).upper_closure().unwrap();
        assert_eq!(biased_measure(&dict, &ratio(2, 7)), ratio(2, 7));
        let c42 = SetFamily::from_masks(4, crate::bits::k_subsets(4, 2)).unwrap();
        assert_eq!(biased_measure(&c42, &ratio(1, 2)), ratio(6, 16));
        assert!((biased_measure(&c42, &0.5f64) - 0.375).abs() < 1e-12);
    }

    #[test]
    fn global_examples() {
        let cube = SetFamily::from_masks(3, 0..8).unwrap();
        assert!(check_global(&cube, &ratio(1, 3), &int(1)).unwrap().ok);
        let point = fam(4, &[&[1]]);
        let v = check_global(&point, &ratio(1, 2), &ratio(3, 2)).unwrap();
        assert_eq!(v.violation, Some((0b1, 0b1111)));
    }

    #[test]
    fn stability_examples() {
        let p = ratio(1, 5);
        let rho = ratio(2, 7);
        let cube = SetFamily::from_masks(3, 0..8).unwrap();
        assert_eq!(stability(&cube, &p, &rho).unwrap(), int(1));
        let dict = fam(3, &[&[1]]).upper_closure().unwrap();
        let closed = &p * (&rho + (int(1) - &rho) * &p);
        assert_eq!(stability(&dict, &p, &rho).unwrap(), closed);
        assert_eq!(stability_in(&dict, &p, &rho).unwrap(), closed);
        assert_eq!(stability(&dict, &p, &int(0)).unwrap(), &p * &p);
    }

    #[test]
    fn threshold_and_upgrade() {
        let dict = fam(4, &[&[1]]).upper_closure().unwrap();
        let r = verify_sharp_threshold(&dict, &ratio(1, 8), &ratio(1, 4), None).unwrap();
        assert!(r.holds);
        let cube = SetFamily::from_masks(3, 0..8).unwrap();
        let u = measure_upgrade(&cube, &ratio(1, 512), &int(2), 1, 1).unwrap();
        assert_eq!(u.r, 0);
        assert_eq!(u.final_measure, int(1));
    }
}
