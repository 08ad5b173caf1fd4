//! Pomset and step bisimilarity by partition refinement, and simulation
//! preorders by greatest fixpoint, directly on a PLTS.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{Outcome, Witness};
use crate::plts::Plts;
use crate::pomset::Pomset;
use crate::verdict::Verdict;

/// A PLTS with labels interned, restricted to step labels on request.
pub(super) struct View {
    pub out: Vec<Vec<(usize, usize)>>,
    pub enabled: Vec<BTreeSet<usize>>,
    pub preds: Vec<BTreeSet<String>>,
    pub frontier: Vec<bool>,
    pub labels: Vec<Pomset>,
}

impl View {
    pub fn new(p: &Plts, step_only: bool) -> View {
        let mut ids: HashMap<Pomset, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut out = vec![Vec::new(); p.len()];
        for (s, o) in out.iter_mut().enumerate() {
            for (u, t) in p.successors(s) {
                if step_only && !u.is_step() {
                    continue;
                }
                let id = *ids.entry(u.clone()).or_insert_with(|| {
                    labels.push(u.clone());
                    labels.len() - 1
                });
                o.push((id, t));
            }
            o.sort_unstable();
            o.dedup();
        }
        let enabled = out.iter().map(|o| o.iter().map(|&(l, _)| l).collect()).collect();
        View {
            out,
            enabled,
            preds: (0..p.len()).map(|s| p.predicates(s).clone()).collect(),
            frontier: (0..p.len()).map(|s| p.is_frontier(s)).collect(),
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn reachable_frontier(&self, from: &[usize]) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = from.to_vec();
        while let Some(s) = stack.pop() {
            if std::mem::replace(&mut seen[s], true) {
                continue;
            }
            if self.frontier[s] {
                return true;
            }
            stack.extend(self.out[s].iter().map(|&(_, t)| t));
        }
        false
    }
}

/// Coarsest stable partition: states start split by predicates and are
/// refined by the set of (label, target block) pairs they can reach.
pub(super) fn partition(v: &View) -> Vec<usize> {
    let mut block = renumber(v.preds.iter());
    let mut count = block.iter().max().map_or(0, |m| m + 1);
    loop {
        let sigs: Vec<(usize, BTreeSet<(usize, usize)>)> = (0..v.len())
            .map(|s| (block[s], v.out[s].iter().map(|&(l, t)| (l, block[t])).collect()))
            .collect();
        let next = renumber(sigs.iter());
        let n = next.iter().max().map_or(0, |m| m + 1);
        block = next;
        if n == count {
            return block;
        }
        count = n;
    }
}

pub(super) fn renumber<'a, T: Ord + 'a>(keys: impl Iterator<Item = &'a T>) -> Vec<usize> {
    let mut ids: std::collections::BTreeMap<&T, usize> = std::collections::BTreeMap::new();
    keys.map(|k| {
        let n = ids.len();
        *ids.entry(k).or_insert(n)
    })
    .collect()
}

/// Greatest relation satisfying the transfer clauses; pairs touching a
/// frontier state are kept, since their behaviour is unknown.
pub(super) fn fixpoint(v: &View, both: bool, ready: bool) -> Vec<Vec<bool>> {
    let n = v.len();
    let mut rel = vec![vec![false; n]; n];
    for x in 0..n {
        for y in 0..n {
            rel[x][y] = v.frontier[x] || v.frontier[y] || base_ok(v, x, y, both, ready);
        }
    }
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in 0..n {
                if !rel[x][y] || v.frontier[x] || v.frontier[y] {
                    continue;
                }
                let ok = transfers(v, &rel, x, y, false) && (!both || transfers(v, &rel, y, x, true));
                if !ok {
                    rel[x][y] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return rel;
        }
    }
}

/// Predicate and refusal clauses for a pair.
fn base_ok(v: &View, x: usize, y: usize, both: bool, ready: bool) -> bool {
    if both || ready {
        v.preds[x] == v.preds[y] && (!ready || v.enabled[y].is_subset(&v.enabled[x]))
    } else {
        v.preds[x].is_subset(&v.preds[y])
    }
}

/// Every move of `x` is answered by `y`; `flipped` reads `rel` transposed.
fn transfers(v: &View, rel: &[Vec<bool>], x: usize, y: usize, flipped: bool) -> bool {
    v.out[x].iter().all(|&(l, x2)| {
        v.out[y].iter().any(|&(m, y2)| m == l && if flipped { rel[y2][x2] } else { rel[x2][y2] })
    })
}

/// Pairs reachable from `(s1, s2)` through matched moves inside `rel`.
fn witness(v: &View, rel: &dyn Fn(usize, usize) -> bool, s1: usize, s2: usize) -> Vec<(usize, usize)> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([(s1, s2)]);
    while let Some((x, y)) = queue.pop_front() {
        if !seen.insert((x, y)) {
            continue;
        }
        order.push((x, y));
        for &(l, x2) in &v.out[x] {
            for &(m, y2) in &v.out[y] {
                if l == m && rel(x2, y2) {
                    queue.push_back((x2, y2));
                }
            }
        }
    }
    order
}

pub(super) fn bisimilar(p: &Plts, s1: usize, s2: usize, step_only: bool) -> Outcome {
    let v = View::new(p, step_only);
    if v.frontier.iter().all(|f| !f) {
        let block = partition(&v);
        if block[s1] != block[s2] {
            let formula = super::modal::distinguish(&v, s1, s2).expect("states are in different blocks").to_string();
            return Outcome { verdict: Verdict::Fails, witness: Witness::Formula { formula } };
        }
        let pairs = witness(&v, &|a, b| block[a] == block[b], s1, s2);
        return Outcome { verdict: Verdict::Holds, witness: Witness::Relation { pairs } };
    }
    let rel = fixpoint(&v, true, false);
    let verdict = Verdict::bounded(rel[s1][s2], !v.reachable_frontier(&[s1, s2]));
    bounded_outcome(&v, &rel, s1, s2, verdict)
}

/// A pomset-labelled modal formula separating `s1` from `s2`, when both
/// are fully explored and not bisimilar.
pub fn distinguishing_modal(p: &Plts, s1: usize, s2: usize, step_only: bool) -> Option<super::Modal> {
    let v = View::new(p, step_only);
    if v.reachable_frontier(&[s1, s2]) {
        return None;
    }
    super::modal::distinguish(&v, s1, s2)
}

pub(super) fn similar(p: &Plts, s1: usize, s2: usize, step_only: bool, ready: bool) -> Outcome {
    let v = View::new(p, step_only);
    let rel = fixpoint(&v, false, ready);
    let verdict = Verdict::bounded(rel[s1][s2], !v.reachable_frontier(&[s1, s2]));
    bounded_outcome(&v, &rel, s1, s2, verdict)
}

fn bounded_outcome(v: &View, rel: &[Vec<bool>], s1: usize, s2: usize, verdict: Verdict) -> Outcome {
    if verdict.holds() {
        let pairs = witness(v, &|a, b| rel[a][b], s1, s2);
        Outcome { verdict, witness: Witness::Relation { pairs } }
    } else {
        Outcome::bare(verdict)
    }
}

/// Checks a candidate bisimulation against the definition, independently of
/// the decision procedures.
pub fn is_bisimulation(p: &Plts, rel: &[(usize, usize)], step_only: bool) -> bool {
    let set: BTreeSet<(usize, usize)> = rel.iter().copied().collect();
    let flipped: Vec<(usize, usize)> = rel.iter().map(|&(a, b)| (b, a)).collect();
    let set_t: BTreeSet<(usize, usize)> = flipped.iter().copied().collect();
    check_sim(p, &set, step_only, false, true) && check_sim(p, &set_t, step_only, false, true)
}

/// Checks a candidate (ready) simulation against the definition.
pub fn is_simulation(p: &Plts, rel: &[(usize, usize)], step_only: bool, ready: bool) -> bool {
    let set: BTreeSet<(usize, usize)> = rel.iter().copied().collect();
    check_sim(p, &set, step_only, ready, false)
}

fn check_sim(p: &Plts, rel: &BTreeSet<(usize, usize)>, step_only: bool, ready: bool, exact_preds: bool) -> bool {
    let moves = |s: usize| -> Vec<(&Pomset, usize)> { p.successors(s).filter(|(u, _)| !step_only || u.is_step()).collect() };
    rel.iter().all(|&(x, y)| {
        if p.is_frontier(x) || p.is_frontier(y) {
            return true;
        }
        let (px, py) = (p.predicates(x), p.predicates(y));
        let preds_ok = if ready || exact_preds { px == py } else { px.is_subset(py) };
        let refusals_ok = !ready || moves(y).iter().all(|(u, _)| moves(x).iter().any(|(w, _)| w == u));
        let transfer = moves(x).iter().all(|(u, x2)| moves(y).iter().any(|(w, y2)| w == u && rel.contains(&(*x2, *y2))));
        preds_ok && refusals_ok && transfer
    })
}
