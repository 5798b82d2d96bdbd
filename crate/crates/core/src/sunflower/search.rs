//! Certified maximum sunflower-free subfamilies.
//!
//! Depth-first branch and bound over members in canonical order. Under a
//! symmetric block structure, new elements entering a family must be the
//! lowest unused labels of their block; the lexicographically least
//! relabeling of every family has this form, so no optimum is lost.
//!
//! The tree is split at a fixed depth and the subtrees are searched
//! independently, each with its own incumbent, so node counts and the
//! reported witness do not depend on the thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{self, binom_u64, full, Mask};
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::sunflower::{creates_sunflower, find_sunflower, CorePredicate};

pub const DEFAULT_BUDGET: u64 = 10_000_000;
const SPLIT_DEPTH: usize = 2;

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub optimum: usize,
    pub witness: SetFamily,
    pub nodes_explored: u64,
    pub certified: bool,
}

struct Ctx<'a> {
    cands: &'a [Mask],
    blocks: Option<&'a [Mask]>,
    pred: &'a CorePredicate,
}

impl Ctx<'_> {
    fn fresh_ok(&self, used: Mask, x: Mask) -> bool {
        let Some(blocks) = self.blocks else { return true };
        blocks.iter().all(|&b| {
            let free = b & !used;
            let new = x & free;
            new == bits::deposit(full(new.count_ones()), free)
        })
    }

    /// Indices in `alive` that remain addable after `x` joins `chosen`.
    fn filter_alive(&self, chosen: &[Mask], x: Mask, alive: &[usize], after: usize) -> Vec<usize> {
        let mut with = chosen.to_vec();
        with.push(x);
        alive
            .iter()
            .copied()
            .filter(|&j| j > after && !creates_sunflower(&with, self.cands[j], self.pred))
            .collect()
    }
}

struct Node {
    chosen: Vec<Mask>,
    used: Mask,
    alive: Vec<usize>,
}

struct Task {
    best: Option<Vec<Mask>>,
    floor: usize,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl Task {
    fn dfs(&mut self, ctx: &Ctx<'_>, node: &Node) {
        if self.nodes >= self.budget {
            self.exhausted = true;
            return;
        }
        self.nodes += 1;
        let size = node.chosen.len();
        let best_len = self.best.as_ref().map_or(self.floor, |b| b.len());
        if size > best_len || self.best.is_none() && size >= self.floor {
            self.best = Some(node.chosen.clone());
        }
        for (pos, &j) in node.alive.iter().enumerate() {
            let best_len = self.best.as_ref().map_or(self.floor.saturating_sub(1), |b| b.len());
            if size + node.alive.len() - pos <= best_len {
                return;
            }
            let x = ctx.cands[j];
            if !ctx.fresh_ok(node.used, x) {
                continue;
            }
            let alive = ctx.filter_alive(&node.chosen, x, &node.alive[pos + 1..], j);
            let mut chosen = node.chosen.clone();
            chosen.push(x);
            self.dfs(ctx, &Node { chosen, used: node.used | x, alive });
            if self.exhausted {
                return;
            }
        }
    }
}

fn greedy(ctx: &Ctx<'_>) -> Vec<Mask> {
    let mut out = Vec::new();
    for &x in ctx.cands {
        if !creates_sunflower(&out, x, ctx.pred) {
            out.push(x);
        }
    }
    out
}

/// Expands the tree to `SPLIT_DEPTH`, returning the frontier in DFS order
/// and the best shallower family.
fn frontier(ctx: &Ctx<'_>, node: Node, depth: usize, out: &mut Vec<Node>, shallow: &mut Vec<Mask>, nodes: &mut u64) {
    if depth == SPLIT_DEPTH {
        out.push(node);
        return;
    }
    *nodes += 1;
    if node.chosen.len() > shallow.len() {
        *shallow = node.chosen.clone();
    }
    for (pos, &j) in node.alive.iter().enumerate() {
        let x = ctx.cands[j];
        if !ctx.fresh_ok(node.used, x) {
            continue;
        }
        let alive = ctx.filter_alive(&node.chosen, x, &node.alive[pos + 1..], j);
        let mut chosen = node.chosen.clone();
        chosen.push(x);
        frontier(ctx, Node { chosen, used: node.used | x, alive }, depth + 1, out, shallow, nodes);
    }
}

/// Maximum subfamily of `cands` without a sunflower matching `pred`.
///
/// `blocks` lists element blocks under whose permutations the candidate
/// family is invariant; pass `None` to disable symmetry breaking.
pub fn max_sunflower_free_in(
    n: u32,
    cands: &[Mask],
    blocks: Option<&[Mask]>,
    pred: &CorePredicate,
    budget: u64,
) -> Result<SearchResult> {
    if pred.s < 2 {
        return Err(Error::precondition("a sunflower needs at least 2 petals"));
    }
    let mut cands: Vec<Mask> = cands.to_vec();
    cands.sort_unstable_by_key(|&m| bits::key(m));
    cands.dedup();
    let ctx = Ctx { cands: &cands, blocks, pred };
    let lb = greedy(&ctx).len();
    let root_alive: Vec<usize> = (0..cands.len()).filter(|&j| !creates_sunflower(&[], cands[j], pred)).collect();
    let mut tasks = Vec::new();
    let mut shallow = Vec::new();
    let mut nodes = 0;
    let root = Node { chosen: Vec::new(), used: 0, alive: root_alive };
    frontier(&ctx, root, 0, &mut tasks, &mut shallow, &mut nodes);
    let results: Vec<Task> = tasks
        .par_iter()
        .map(|node| {
            let mut task = Task { best: None, floor: lb.max(SPLIT_DEPTH), nodes: 0, budget, exhausted: false };
            task.dfs(&ctx, node);
            task
        })
        .collect();
    let mut best: Option<Vec<Mask>> = None;
    let mut certified = true;
    for t in &results {
        nodes += t.nodes;
        certified &= !t.exhausted;
        if let Some(b) = &t.best {
            if best.as_ref().map_or(true, |x| b.len() > x.len()) {
                best = Some(b.clone());
            }
        }
    }
    let witness = match best {
        Some(b) => b,
        None if shallow.len() >= lb || certified => shallow,
        None => greedy(&ctx),
    };
    let witness = SetFamily::from_masks(n, witness)?;
    if let Some(w) = find_sunflower(&witness, pred) {
        return Err(Error::SunflowerPresent { context: "search witness".into(), witness: w });
    }
    Ok(SearchResult { optimum: witness.len(), witness, nodes_explored: nodes, certified })
}

pub fn max_sunflower_free(a: &Domain, pred: &CorePredicate, budget: u64) -> Result<SearchResult> {
    max_sunflower_free_in(a.n(), a.family().members(), a.symmetric_blocks(), pred, budget)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiResult {
    pub s: usize,
    pub t: u32,
    pub support_bound: u32,
    pub search: SearchResult,
    /// The support is large enough that no larger family can exist anywhere.
    pub unconditional: bool,
}

/// `φ(s, t)` computed over `t`-subsets of `[support_bound]`.
pub fn phi_exact(s: usize, t: u32, support_bound: u32, budget: u64) -> Result<PhiResult> {
    if t == 0 || t > support_bound {
        return Err(Error::precondition(format!("need 1 <= t <= support ({t}, {support_bound})")));
    }
    if binom_u64(support_bound as u64, t as u64) > 100_000 {
        return Err(Error::capacity("candidate family too large for exact search"));
    }
    let d = Domain::binomial(support_bound, t)?;
    let search = max_sunflower_free(&d, &CorePredicate::any(s), budget)?;
    let unconditional = search.certified && support_bound as usize >= t as usize * (search.optimum + 1);
    Ok(PhiResult { s, t, support_bound, search, unconditional })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_optima() {
        let d = Domain::binomial(5, 2).unwrap();
        let r = max_sunflower_free(&d, &CorePredicate::exact(2, 0), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.optimum, 4);
        assert!(r.certified);
        let r = max_sunflower_free(&d, &CorePredicate::any(2), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.optimum, 1);
    }

    #[test]
    fn phi_trivia() {
        for s in 2..=6 {
            let p = phi_exact(s, 1, s as u32, DEFAULT_BUDGET).unwrap();
            assert_eq!(p.search.optimum, s - 1);
            assert!(p.unconditional);
        }
        let p = phi_exact(2, 3, 6, DEFAULT_BUDGET).unwrap();
        assert_eq!(p.search.optimum, 1);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let d = Domain::binomial(7, 2).unwrap();
        let r = max_sunflower_free_in(7, d.family().members(), None, &CorePredicate::exact(3, 0), 5).unwrap();
        assert!(!r.certified);
        assert!(r.optimum >= 1);
    }
}
