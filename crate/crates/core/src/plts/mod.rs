//! Pomset-labelled transition systems, their unfoldings into configuration
//! structures, and prime event structures as an alternative source of
//! configurations.

mod dot;
mod events;
mod json;
mod unfold;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::pomset::Pomset;
use crate::term::Term;
use crate::verdict::Verdict;

pub use events::{EventStructureError, PrimeEventStructure};
pub use json::{PltsJson, PomsetJson};
pub use unfold::{unfold, unfold_with_mode, ConfigStructure, ConfigTransition, Event, EventId, Mode, Node, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PltsError {
    #[error("state {0} is not declared")]
    UnknownState(usize),
    #[error("invalid PLTS JSON: {0}")]
    Json(String),
    #[error("invalid pomset in PLTS JSON: {0}")]
    Pomset(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: usize,
    pub label: Pomset,
    pub to: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct State {
    /// The closed term the state was derived from, if any.
    pub term: Option<Term>,
    /// Display text for the state; the term's text when derived.
    pub text: Option<String>,
}

/// A PLTS with a designated initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plts {
    states: Vec<State>,
    out: Vec<BTreeSet<(Pomset, usize)>>,
    preds: Vec<BTreeSet<String>>,
    initial: usize,
    truncated: bool,
    /// States whose outgoing behaviour was not explored.
    frontier: BTreeSet<usize>,
}

/// Labels and predicates enabled in a state.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InitialSet {
    pub pomsets: BTreeSet<Pomset>,
    pub predicates: BTreeSet<String>,
}

impl InitialSet {
    pub fn is_empty(&self) -> bool {
        self.pomsets.is_empty() && self.predicates.is_empty()
    }

    pub fn is_subset(&self, other: &InitialSet) -> bool {
        self.pomsets.is_subset(&other.pomsets) && self.predicates.is_subset(&other.predicates)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Finiteness {
    pub finitely_branching: Verdict,
    pub regular: Verdict,
    pub finite: Verdict,
}

impl Plts {
    /// `n` states with no transitions; `initial` must be below `n`.
    pub fn new(n: usize, initial: usize) -> Result<Self, PltsError> {
        if initial >= n {
            return Err(PltsError::UnknownState(initial));
        }
        Ok(Plts {
            states: vec![State::default(); n],
            out: vec![BTreeSet::new(); n],
            preds: vec![BTreeSet::new(); n],
            initial,
            truncated: false,
            frontier: BTreeSet::new(),
        })
    }

    pub fn add_state(&mut self, state: State) -> usize {
        self.states.push(state);
        self.out.push(BTreeSet::new());
        self.preds.push(BTreeSet::new());
        self.states.len() - 1
    }

    fn check(&self, s: usize) -> Result<(), PltsError> {
        if s < self.states.len() {
            Ok(())
        } else {
            Err(PltsError::UnknownState(s))
        }
    }

    pub fn add_transition(&mut self, from: usize, label: Pomset, to: usize) -> Result<(), PltsError> {
        self.check(from)?;
        self.check(to)?;
        self.out[from].insert((label, to));
        Ok(())
    }

    pub fn add_predicate(&mut self, s: usize, name: &str) -> Result<(), PltsError> {
        self.check(s)?;
        self.preds[s].insert(name.to_string());
        Ok(())
    }

    pub fn set_state(&mut self, s: usize, state: State) -> Result<(), PltsError> {
        self.check(s)?;
        self.states[s] = state;
        Ok(())
    }

    pub fn mark_frontier(&mut self, s: usize) -> Result<(), PltsError> {
        self.check(s)?;
        self.frontier.insert(s);
        self.truncated = true;
        Ok(())
    }

    pub fn set_truncated(&mut self, t: bool) {
        self.truncated = t;
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn frontier(&self) -> &BTreeSet<usize> {
        &self.frontier
    }

    pub fn is_frontier(&self, s: usize) -> bool {
        self.frontier.contains(&s)
    }

    pub fn state(&self, s: usize) -> &State {
        &self.states[s]
    }

    /// Display name of a state: its text if known, else its index.
    pub fn state_name(&self, s: usize) -> String {
        self.states[s].text.clone().unwrap_or_else(|| format!("s{s}"))
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = (&Pomset, usize)> {
        self.out[s].iter().map(|(p, t)| (p, *t))
    }

    pub fn has_transition(&self, s: usize, label: &Pomset, t: usize) -> bool {
        self.out[s].contains(&(label.clone(), t))
    }

    pub fn predicates(&self, s: usize) -> &BTreeSet<String> {
        &self.preds[s]
    }

    pub fn has_predicate(&self, s: usize, p: &str) -> bool {
        self.preds[s].contains(p)
    }

    pub fn transitions(&self) -> Vec<Transition> {
        let mut v = Vec::new();
        for (s, out) in self.out.iter().enumerate() {
            for (label, t) in out {
                v.push(Transition { from: s, label: label.clone(), to: *t });
            }
        }
        v
    }

    pub fn transition_count(&self) -> usize {
        self.out.iter().map(BTreeSet::len).sum()
    }

    /// All predicate names that occur.
    pub fn predicate_names(&self) -> BTreeSet<String> {
        self.preds.iter().flatten().cloned().collect()
    }

    /// All transition labels that occur.
    pub fn labels(&self) -> BTreeSet<Pomset> {
        self.out.iter().flatten().map(|(p, _)| p.clone()).collect()
    }

    pub fn initial_set(&self, s: usize) -> Result<InitialSet, PltsError> {
        self.check(s)?;
        Ok(InitialSet {
            pomsets: self.out[s].iter().map(|(p, _)| p.clone()).collect(),
            predicates: self.preds[s].clone(),
        })
    }

    /// States reachable from `s`, in breadth-first order.
    pub fn reachable_from(&self, s: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut order = vec![s];
        seen[s] = true;
        let mut k = 0;
        while k < order.len() {
            let u = order[k];
            k += 1;
            for (_, v) in self.successors(u) {
                if !seen[v] {
                    seen[v] = true;
                    order.push(v);
                }
            }
        }
        order
    }

    /// Whether some cycle is reachable from `s`.
    pub fn has_cycle_from(&self, s: usize) -> bool {
        // 0 unvisited, 1 on stack, 2 done
        let mut mark = vec![0u8; self.len()];
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(s, self.successors(s).map(|(_, t)| t).collect())];
        mark[s] = 1;
        while let Some((u, rest)) = stack.last_mut() {
            match rest.pop() {
                Some(v) if mark[v] == 1 => return true,
                Some(v) if mark[v] == 0 => {
                    mark[v] = 1;
                    let next = self.successors(v).map(|(_, t)| t).collect();
                    stack.push((v, next));
                }
                Some(_) => {}
                None => {
                    mark[*u] = 2;
                    stack.pop();
                }
            }
        }
        false
    }

    pub fn finiteness(&self) -> Finiteness {
        let complete = !self.truncated;
        let cyclic = self.has_cycle_from(self.initial);
        Finiteness {
            finitely_branching: Verdict::bounded(true, complete),
            regular: Verdict::bounded(true, complete),
            finite: Verdict::bounded(!cyclic, complete),
        }
    }

    /// Copy keeping only states reachable from the initial one, renumbered
    /// in breadth-first order.
    pub fn reachable_part(&self) -> Plts {
        let order = self.reachable_from(self.initial);
        let index: BTreeMap<usize, usize> = order.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        let mut out = Plts::new(order.len(), 0).expect("nonempty");
        for (k, &s) in order.iter().enumerate() {
            out.states[k] = self.states[s].clone();
            out.preds[k] = self.preds[s].clone();
            for (p, t) in &self.out[s] {
                out.out[k].insert((p.clone(), index[t]));
            }
            if self.frontier.contains(&s) {
                out.frontier.insert(k);
            }
        }
        out.truncated = self.truncated;
        out
    }

    /// Disjoint union with a fresh copy of `other`; returns the offset of
    /// `other`'s states. The initial state stays `self`'s.
    pub fn disjoint_union(&self, other: &Plts) -> (Plts, usize) {
        let mut out = self.clone();
        let off = self.len();
        for s in 0..other.len() {
            out.add_state(other.states[s].clone());
        }
        for s in 0..other.len() {
            for (p, t) in &other.out[s] {
                out.out[off + s].insert((p.clone(), off + t));
            }
            out.preds[off + s] = other.preds[s].clone();
            if other.frontier.contains(&s) {
                out.frontier.insert(off + s);
            }
        }
        out.truncated |= other.truncated;
        (out, off)
    }

    /// Same structure with a different initial state.
    pub fn with_initial(&self, s: usize) -> Result<Plts, PltsError> {
        self.check(s)?;
        let mut p = self.clone();
        p.initial = s;
        Ok(p)
    }

    pub fn to_dot(&self) -> String {
        dot::to_dot(self)
    }

    pub fn to_json(&self) -> PltsJson {
        json::to_json(self)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Plts, PltsError> {
        json::from_json_str(s)
    }
}

#[cfg(test)]
mod tests;
