use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use super::unfold::{ConfigStructure, ConfigTransition, EventId, Mode};
use crate::pomset::{ActionLabel, Pomset, MAX_EVENTS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventStructureError {
    #[error("event {0} is out of range")]
    UnknownEvent(usize),
    #[error("causality is cyclic")]
    Cyclic,
    #[error("an event conflicts with itself or one of its causes")]
    SelfConflict,
    #[error("at most {MAX_EVENTS} events are supported")]
    TooLarge,
}

/// Labelled events with causality and (inherited) conflict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeEventStructure {
    labels: Vec<ActionLabel>,
    /// below[e]: bitmask of strict causes of e.
    below: Vec<u64>,
    /// conflict[e]: bitmask of events in conflict with e.
    conflict: Vec<u64>,
}

impl PrimeEventStructure {
    pub fn new(
        labels: Vec<ActionLabel>,
        causality: &[(usize, usize)],
        conflict: &[(usize, usize)],
    ) -> Result<Self, EventStructureError> {
        let n = labels.len();
        if n > MAX_EVENTS {
            return Err(EventStructureError::TooLarge);
        }
        let check = |e: usize| if e < n { Ok(()) } else { Err(EventStructureError::UnknownEvent(e)) };
        let mut below = vec![0u64; n];
        for &(a, b) in causality {
            check(a)?;
            check(b)?;
            below[b] |= 1 << a;
        }
        // transitive closure
        loop {
            let mut changed = false;
            for e in 0..n {
                let mut m = below[e];
                for c in 0..n {
                    if below[e] >> c & 1 == 1 {
                        m |= below[c];
                    }
                }
                if m != below[e] {
                    below[e] = m;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if (0..n).any(|e| below[e] >> e & 1 == 1) {
            return Err(EventStructureError::Cyclic);
        }
        let mut conf = vec![0u64; n];
        for &(a, b) in conflict {
            check(a)?;
            check(b)?;
            conf[a] |= 1 << b;
            conf[b] |= 1 << a;
        }
        // inheritance: e # e' and e' <= e'' give e # e''
        loop {
            let mut changed = false;
            for e in 0..n {
                let mut m = conf[e];
                for f in 0..n {
                    if conf[e] & (below[f] | 1 << f) != 0 {
                        m |= 1 << f;
                    }
                }
                if m != conf[e] {
                    conf[e] = m;
                    changed = true;
                }
            }
            for e in 0..n {
                for f in 0..n {
                    if conf[e] >> f & 1 == 1 && conf[f] >> e & 1 == 0 {
                        conf[f] |= 1 << e;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for e in 0..n {
            if conf[e] & (below[e] | 1 << e) != 0 {
                return Err(EventStructureError::SelfConflict);
            }
        }
        Ok(PrimeEventStructure { labels, below, conflict: conf })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, e: usize) -> &ActionLabel {
        &self.labels[e]
    }

    pub fn less(&self, a: usize, b: usize) -> bool {
        self.below[b] >> a & 1 == 1
    }

    pub fn conflict(&self, a: usize, b: usize) -> bool {
        self.conflict[a] >> b & 1 == 1
    }

    /// Downward closed and conflict free.
    pub fn is_configuration(&self, mask: u64) -> bool {
        (0..self.len()).filter(|&e| mask >> e & 1 == 1).all(|e| self.below[e] & !mask == 0 && self.conflict[e] & mask == 0)
    }

    /// All configurations with every nonempty extension as a transition;
    /// events keep their indices.
    pub fn configurations(&self) -> ConfigStructure {
        let n = self.len();
        let mut cs = ConfigStructure::empty(Mode::Strict);
        for e in 0..n {
            let preds = (0..n).filter(|&c| self.less(c, e)).collect();
            cs.push_event(self.labels[e].clone(), preds);
        }
        let mut index: HashMap<u64, usize> = HashMap::new();
        let root = cs.push_node(vec![], 0);
        index.insert(0, root);
        let mut queue = VecDeque::from([0u64]);
        let all: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        while let Some(c) = queue.pop_front() {
            let from = index[&c];
            let depth = cs.node(from).depth;
            let rest = all & !c;
            // enumerate nonempty submasks of the remaining events
            let mut x = rest;
            let mut exts = BTreeSet::new();
            while x != 0 {
                if self.is_configuration(c | x) {
                    exts.insert(x);
                }
                x = (x - 1) & rest;
            }
            for x in exts {
                let target_mask = c | x;
                let target = match index.get(&target_mask) {
                    Some(&t) => t,
                    None => {
                        let evs: Vec<EventId> = (0..n).filter(|&e| target_mask >> e & 1 == 1).collect();
                        let t = cs.push_node(evs, depth + 1);
                        index.insert(target_mask, t);
                        queue.push_back(target_mask);
                        t
                    }
                };
                let evs: Vec<usize> = (0..n).filter(|&e| x >> e & 1 == 1).collect();
                let (label, order) = self.pomset_with_order(&evs);
                let events = order.into_iter().map(|k| evs[k]).collect();
                cs.push_transition(from, ConfigTransition { label, events, target });
            }
        }
        cs.set_roots(vec![root]);
        cs.set_truncated(false);
        cs
    }

    fn pomset_with_order(&self, evs: &[usize]) -> (Pomset, Vec<usize>) {
        let labels = evs.iter().map(|&e| self.labels[e].clone()).collect();
        let succ = evs
            .iter()
            .map(|&a| {
                let mut m = 0u64;
                for (j, &b) in evs.iter().enumerate() {
                    if self.less(a, b) {
                        m |= 1 << j;
                    }
                }
                m
            })
            .collect();
        Pomset::from_closed_with_order(labels, succ)
    }
}
