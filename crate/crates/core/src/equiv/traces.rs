//! Decorated pomset trace inclusions, decided by a subset construction:
//! each path of the left state is paired with the set of right states
//! reachable by the same pomset sequence, and the decoration at every
//! position is checked against that set. Visited (state, set) pairs are
//! memoized, so cyclic systems terminate.

use std::collections::{BTreeSet, HashSet};

use super::{Outcome, TraceKind, Witness};
use crate::plts::{InitialSet, Plts};
use crate::pomset::Pomset;
use crate::verdict::Verdict;

struct Search<'a> {
    p: &'a Plts,
    kind: TraceKind,
    accept: &'a str,
    init: Vec<InitialSet>,
    seen: HashSet<(usize, Vec<usize>)>,
    incomplete: bool,
}

fn describe(x: &InitialSet) -> String {
    let mut parts: Vec<String> = x.pomsets.iter().map(Pomset::to_string).collect();
    parts.extend(x.predicates.iter().cloned());
    format!("{{{}}}", parts.join(", "))
}

impl Search<'_> {
    /// Filters `set` by the decoration at a position reached in state `x`;
    /// `None` means the decorated trace ending here is missing on the right,
    /// with a description of the decoration.
    fn check(&self, x: usize, set: Vec<usize>) -> Result<Vec<usize>, String> {
        let ix = &self.init[x];
        let some = |f: &dyn Fn(&InitialSet) -> bool| set.iter().any(|&y| f(&self.init[y]));
        match self.kind {
            TraceKind::Trace => Ok(set),
            TraceKind::Completed => {
                if ix.is_empty() && !some(&|iy| iy.is_empty()) {
                    return Err("completed".into());
                }
                for q in &ix.predicates {
                    if !set.iter().any(|&y| self.p.has_predicate(y, q)) {
                        return Err(format!("then {q}"));
                    }
                }
                Ok(set)
            }
            TraceKind::Accepting => {
                if self.p.has_predicate(x, self.accept) && !set.iter().any(|&y| self.p.has_predicate(y, self.accept)) {
                    return Err(format!("then {}", self.accept));
                }
                Ok(set)
            }
            TraceKind::Readies => {
                if some(&|iy| iy == ix) {
                    Ok(set)
                } else {
                    Err(format!("ready {}", describe(ix)))
                }
            }
            TraceKind::Failures => {
                if some(&|iy| iy.is_subset(ix)) {
                    Ok(set)
                } else {
                    Err(format!("refusing all but {}", describe(ix)))
                }
            }
            TraceKind::ReadyTrace => {
                let kept: Vec<usize> = set.into_iter().filter(|&y| self.init[y] == *ix).collect();
                if kept.is_empty() {
                    Err(format!("ready {}", describe(ix)))
                } else {
                    Ok(kept)
                }
            }
            TraceKind::FailureTrace => {
                let kept: Vec<usize> = set.into_iter().filter(|&y| self.init[y].is_subset(ix)).collect();
                if kept.is_empty() {
                    Err(format!("refusing all but {}", describe(ix)))
                } else {
                    Ok(kept)
                }
            }
        }
    }

    /// Depth-first over left paths; on failure returns the left path and
    /// the trace items leading to the missing decorated trace.
    fn run(&mut self, x: usize, set: Vec<usize>, path: &mut Vec<usize>, items: &mut Vec<String>) -> bool {
        if self.p.is_frontier(x) || set.iter().any(|&y| self.p.is_frontier(y)) {
            self.incomplete = true;
            return true;
        }
        if !self.seen.insert((x, set.clone())) {
            return true;
        }
        let set = match self.check(x, set) {
            Ok(s) => s,
            Err(why) => {
                items.push(why);
                return false;
            }
        };
        let mut labels: BTreeSet<&Pomset> = BTreeSet::new();
        for (u, _) in self.p.successors(x) {
            labels.insert(u);
        }
        let p = self.p;
        for u in labels {
            let next: BTreeSet<usize> =
                set.iter().flat_map(|&y| p.successors(y).filter(|(w, _)| *w == u).map(|(_, t)| t)).collect();
            let next: Vec<usize> = next.into_iter().collect();
            for x2 in p.successors(x).filter(|(w, _)| *w == u).map(|(_, t)| t).collect::<Vec<_>>() {
                path.push(x2);
                items.push(u.to_string());
                if next.is_empty() {
                    return false;
                }
                if !self.run(x2, next.clone(), path, items) {
                    return false;
                }
                path.pop();
                items.pop();
            }
        }
        true
    }
}

pub(super) fn included(p: &Plts, s1: usize, s2: usize, kind: TraceKind, accept: &str) -> Outcome {
    let init = (0..p.len()).map(|s| p.initial_set(s).expect("declared")).collect();
    let mut search = Search { p, kind, accept, init, seen: HashSet::new(), incomplete: false };
    let (mut path, mut items) = (vec![s1], Vec::new());
    if search.run(s1, vec![s2], &mut path, &mut items) {
        Outcome { verdict: Verdict::bounded(true, !search.incomplete), witness: Witness::None }
    } else {
        Outcome { verdict: Verdict::Fails, witness: Witness::Trace { path, items } }
    }
}
