//! Event-level unfolding of a PLTS into a configuration structure.
//!
//! Every node is a configuration: a set of events with a causal order and
//! the PLTS state reached. Events are keyed by their causal history, their
//! label and the states around their canonical occurrence, so a granular
//! diamond `a;b` / `b;a` closes into one node `{a, b}`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::Serialize;

use super::Plts;
use crate::pomset::{ActionLabel, Pomset};

pub type NodeId = usize;
pub type EventId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strict,
    Granular,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "strict" => Ok(Mode::Strict),
            "granular" => Ok(Mode::Granular),
            _ => Err(format!("unknown mode `{s}` (expected strict or granular)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub label: ActionLabel,
    /// Strict causal predecessors, sorted and transitively closed.
    pub preds: Vec<EventId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigTransition {
    pub label: Pomset,
    /// New events, in canonical position order of `label`.
    pub events: Vec<EventId>,
    pub target: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    /// Sorted event set.
    pub events: Vec<EventId>,
    /// The PLTS state, when the structure came from a PLTS.
    pub state: Option<usize>,
    pub predicates: BTreeSet<String>,
    /// Shortest number of transitions from a root.
    pub depth: usize,
    /// Outgoing behaviour was cut off by the depth bound or the PLTS itself
    /// was unexplored here.
    pub frontier: bool,
    pub out: Vec<ConfigTransition>,
    /// One path from the root: (label, new events, state after).
    path: Vec<(Pomset, Vec<EventId>, usize)>,
    root_state: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigStructure {
    events: Vec<Event>,
    nodes: Vec<Node>,
    index: HashMap<(Vec<EventId>, Option<usize>), NodeId>,
    roots: Vec<NodeId>,
    mode: Mode,
    truncated: bool,
}

/// Key identifying an event across interleavings.
#[derive(Hash, PartialEq, Eq)]
struct EventKey {
    preds: Vec<EventId>,
    before: usize,
    label: Pomset,
    position: usize,
    after: usize,
}

/// Upper bound on interleavings explored per granular extension.
const CLASS_CAP: usize = 20_000;

pub fn unfold(p: &Plts, depth: usize) -> ConfigStructure {
    unfold_with_mode(p, depth, Mode::Strict)
}

pub fn unfold_with_mode(p: &Plts, depth: usize, mode: Mode) -> ConfigStructure {
    ConfigStructure::from_plts(p, &[p.initial()], depth, mode)
}

struct Builder<'a> {
    p: &'a Plts,
    cs: ConfigStructure,
    keys: HashMap<EventKey, EventId>,
}

impl ConfigStructure {
    /// Unfolds from each of `roots` (a forest sharing no events).
    pub fn from_plts(p: &Plts, roots: &[usize], depth: usize, mode: Mode) -> ConfigStructure {
        let cs = ConfigStructure {
            events: Vec::new(),
            nodes: Vec::new(),
            index: HashMap::new(),
            roots: Vec::new(),
            mode,
            truncated: false,
        };
        let mut b = Builder { p, cs, keys: HashMap::new() };
        let mut queue = VecDeque::new();
        for &r in roots {
            let id = b.cs.nodes.len();
            // distinct roots must not share nodes, so key them apart by state
            b.cs.nodes.push(Node {
                events: vec![],
                state: Some(r),
                predicates: p.predicates(r).clone(),
                depth: 0,
                frontier: false,
                out: vec![],
                path: vec![],
                root_state: r,
            });
            b.cs.index.entry((vec![], Some(r))).or_insert(id);
            b.cs.roots.push(id);
            queue.push_back(id);
        }
        while let Some(n) = queue.pop_front() {
            let (state, d) = (b.cs.nodes[n].state.expect("plts node"), b.cs.nodes[n].depth);
            if p.is_frontier(state) {
                b.cs.nodes[n].frontier = true;
                b.cs.truncated = true;
                continue;
            }
            let succs: Vec<(Pomset, usize)> = p.successors(state).map(|(l, t)| (l.clone(), t)).collect();
            if d >= depth {
                if !succs.is_empty() {
                    b.cs.nodes[n].frontier = true;
                    b.cs.truncated = true;
                }
                continue;
            }
            for (label, target) in succs {
                let new_events = b.new_events(n, &label, target);
                let mut evs = b.cs.nodes[n].events.clone();
                evs.extend(new_events.iter().copied());
                evs.sort_unstable();
                evs.dedup();
                if evs.len() != b.cs.nodes[n].events.len() + new_events.len() {
                    // an event key collided with an existing event; keep the
                    // branch apart with fresh events
                    let fresh = b.fresh_events(n, &label);
                    b.attach(n, label, fresh, target, &mut queue);
                    continue;
                }
                b.attach(n, label, new_events, target, &mut queue);
            }
        }
        b.cs
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn root(&self) -> NodeId {
        self.roots[0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n]
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, e: EventId) -> &Event {
        &self.events[e]
    }

    pub fn label(&self, e: EventId) -> &ActionLabel {
        &self.events[e].label
    }

    /// Causal order between two events.
    pub fn less(&self, a: EventId, b: EventId) -> bool {
        self.events[b].preds.binary_search(&a).is_ok()
    }

    /// The node with exactly these events; with several (different states),
    /// the first created.
    pub fn lookup(&self, events: &[EventId]) -> Option<NodeId> {
        let mut evs = events.to_vec();
        evs.sort_unstable();
        self.nodes.iter().position(|n| n.events == evs)
    }

    pub fn lookup_with_state(&self, events: &[EventId], state: Option<usize>) -> Option<NodeId> {
        let mut evs = events.to_vec();
        evs.sort_unstable();
        self.index.get(&(evs, state)).copied()
    }

    /// The configuration of node `n` as a pomset.
    pub fn node_pomset(&self, n: NodeId) -> Pomset {
        self.pomset_of(&self.nodes[n].events)
    }

    /// Induced pomset on a set of events.
    pub fn pomset_of(&self, evs: &[EventId]) -> Pomset {
        let labels = evs.iter().map(|&e| self.events[e].label.clone()).collect();
        let mut pairs = Vec::new();
        for (i, &a) in evs.iter().enumerate() {
            for (j, &b) in evs.iter().enumerate() {
                if self.less(a, b) {
                    pairs.push((i, j));
                }
            }
        }
        Pomset::from_parts(labels, pairs).expect("causal order is acyclic")
    }

    /// Nodes without outgoing transitions that were not cut off.
    pub fn maximal_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&n| self.nodes[n].out.is_empty() && !self.nodes[n].frontier).collect()
    }

    /// Maximal configurations up to their state and pomset.
    pub fn maximal_configurations(&self) -> BTreeSet<(Option<usize>, Pomset)> {
        self.maximal_nodes()
            .into_iter()
            .map(|n| (self.nodes[n].state, self.node_pomset(n)))
            .collect()
    }

    /// Pairs of events that occur together in some node.
    pub fn coexisting(&self) -> HashSet<(EventId, EventId)> {
        let mut out = HashSet::new();
        for n in &self.nodes {
            for &a in &n.events {
                for &b in &n.events {
                    out.insert((a, b));
                }
            }
        }
        out
    }

    /// Nodes reachable from `n` by one or more transitions.
    pub fn descendants(&self, n: NodeId) -> Vec<NodeId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<NodeId> = self.nodes[n].out.iter().map(|t| t.target).collect();
        while let Some(m) = stack.pop() {
            if seen.insert(m) {
                stack.extend(self.nodes[m].out.iter().map(|t| t.target));
            }
        }
        seen.into_iter().collect()
    }

    /// Nodes from which `n` is reachable by one or more transitions: the
    /// proper sub-configurations of `n` within its unfolding.
    pub fn ancestors(&self, n: NodeId) -> Vec<NodeId> {
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); self.nodes.len()];
        for (m, node) in self.nodes.iter().enumerate() {
            for t in &node.out {
                preds[t.target].push(m);
            }
        }
        let mut seen = BTreeSet::new();
        let mut stack = preds[n].clone();
        while let Some(m) = stack.pop() {
            if seen.insert(m) {
                stack.extend(preds[m].iter().copied());
            }
        }
        seen.into_iter().collect()
    }

    /// Whether some node at or below `n` is a frontier node.
    pub fn frontier_below(&self, n: NodeId) -> bool {
        self.nodes[n].frontier || self.descendants(n).into_iter().any(|m| self.nodes[m].frontier)
    }

    /// The sub-structure of nodes within `depth` transitions of a root,
    /// as (sorted event-key sets, state) for comparison across unfoldings.
    pub fn shape(&self, depth: usize) -> BTreeSet<(Vec<(String, Vec<usize>)>, Option<usize>)> {
        self.nodes
            .iter()
            .filter(|n| n.depth <= depth)
            .map(|n| {
                let evs = n
                    .events
                    .iter()
                    .map(|&e| (self.events[e].label.to_string(), self.events[e].preds.clone()))
                    .collect();
                (evs, n.state)
            })
            .collect()
    }

    pub(super) fn empty(mode: Mode) -> Self {
        ConfigStructure {
            events: Vec::new(),
            nodes: Vec::new(),
            index: HashMap::new(),
            roots: Vec::new(),
            mode,
            truncated: false,
        }
    }

    pub(super) fn push_event(&mut self, label: ActionLabel, preds: Vec<EventId>) -> EventId {
        self.events.push(Event { label, preds });
        self.events.len() - 1
    }

    pub(super) fn push_node(&mut self, events: Vec<EventId>, depth: usize) -> NodeId {
        let id = self.nodes.len();
        self.index.insert((events.clone(), None), id);
        self.nodes.push(Node {
            events,
            state: None,
            predicates: BTreeSet::new(),
            depth,
            frontier: false,
            out: vec![],
            path: vec![],
            root_state: 0,
        });
        id
    }

    pub(super) fn push_transition(&mut self, from: NodeId, t: ConfigTransition) {
        self.nodes[from].out.push(t);
    }

    pub(super) fn set_roots(&mut self, roots: Vec<NodeId>) {
        self.roots = roots;
    }

    pub(super) fn set_truncated(&mut self, t: bool) {
        self.truncated = t;
    }
}

impl Builder<'_> {
    fn attach(
        &mut self,
        n: NodeId,
        label: Pomset,
        new_events: Vec<EventId>,
        target: usize,
        queue: &mut VecDeque<NodeId>,
    ) {
        let mut evs = self.cs.nodes[n].events.clone();
        evs.extend(new_events.iter().copied());
        evs.sort_unstable();
        let key = (evs.clone(), Some(target));
        let child = match self.cs.index.get(&key) {
            Some(&c) => c,
            None => {
                let mut path = self.cs.nodes[n].path.clone();
                path.push((label.clone(), new_events.clone(), target));
                let c = self.cs.nodes.len();
                self.cs.nodes.push(Node {
                    events: evs,
                    state: Some(target),
                    predicates: self.p.predicates(target).clone(),
                    depth: self.cs.nodes[n].depth + 1,
                    frontier: false,
                    out: vec![],
                    path,
                    root_state: self.cs.nodes[n].root_state,
                });
                self.cs.index.insert(key, c);
                queue.push_back(c);
                c
            }
        };
        self.cs.nodes[n].out.push(ConfigTransition { label, events: new_events, target: child });
    }

    fn intern(&mut self, key: EventKey, label: ActionLabel) -> EventId {
        if let Some(&e) = self.keys.get(&key) {
            return e;
        }
        let e = self.cs.push_event(label, key.preds.clone());
        self.keys.insert(key, e);
        e
    }

    fn fresh_events(&mut self, n: NodeId, label: &Pomset) -> Vec<EventId> {
        let base = self.cs.nodes[n].events.clone();
        let mut ids = Vec::new();
        for i in 0..label.len() {
            let mut preds = base.clone();
            for j in 0..i {
                if label.less(j, i) {
                    preds.push(ids[j]);
                }
            }
            preds.sort_unstable();
            ids.push(self.cs.push_event(label.label(i).clone(), preds));
        }
        ids
    }

    /// Events executed by `label` from node `n` towards `target`.
    fn new_events(&mut self, n: NodeId, label: &Pomset, target: usize) -> Vec<EventId> {
        let state = self.cs.nodes[n].state.expect("plts node");
        if self.cs.mode == Mode::Granular && label.is_primitive() {
            if let Some((preds, before, after)) = self.granular_history(n, label, target) {
                let key = EventKey { preds, before, label: label.clone(), position: 0, after };
                return vec![self.intern(key, label.label(0).clone())];
            }
        }
        // every earlier event is below every event of the transition
        let base = self.cs.nodes[n].events.clone();
        let mut ids: Vec<EventId> = Vec::new();
        for i in 0..label.len() {
            let mut preds = base.clone();
            for j in 0..i {
                if label.less(j, i) {
                    preds.push(ids[j]);
                    preds.extend(self.cs.events[ids[j]].preds.iter().copied());
                }
            }
            preds.sort_unstable();
            preds.dedup();
            let key = EventKey { preds, before: state, label: label.clone(), position: i, after: target };
            let event_label = label.label(i).clone();
            ids.push(self.intern(key, event_label));
        }
        ids
    }

    /// For a primitive step appended to the node's path: the events that
    /// precede it in every diamond-equivalent interleaving, and the states
    /// around its earliest occurrence.
    fn granular_history(&self, n: NodeId, label: &Pomset, target: usize) -> Option<(Vec<EventId>, usize, usize)> {
        let node = &self.cs.nodes[n];
        let mut steps: Vec<(Pomset, Vec<EventId>)> =
            node.path.iter().map(|(l, e, _)| (l.clone(), e.clone())).collect();
        steps.push((label.clone(), vec![usize::MAX]));
        let mut states: Vec<usize> = node.path.iter().map(|s| s.2).collect();
        states.push(target);
        let root = node.root_state;
        let k = steps.len() - 1;

        // members: (order of step indices, states after each position)
        let start: (Vec<usize>, Vec<usize>) = ((0..steps.len()).collect(), states);
        let mut seen: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
        seen.insert(start.clone());
        let mut queue = VecDeque::from([start]);
        let mut before_k: BTreeSet<usize> = BTreeSet::new(); // steps seen after k somewhere
        let mut earliest: Option<(usize, usize, usize)> = None; // (position, before, after)
        while let Some((order, sts)) = queue.pop_front() {
            let pos = order.iter().position(|&s| s == k).expect("k present");
            for &s in &order[pos + 1..] {
                before_k.insert(s);
            }
            let before = if pos == 0 { root } else { sts[pos - 1] };
            let cand = (pos, before, sts[pos]);
            if earliest.map_or(true, |e| (cand.0, cand.1, cand.2) < e) {
                earliest = Some(cand);
            }
            if seen.len() >= CLASS_CAP {
                continue;
            }
            for i in 0..order.len() - 1 {
                let (li, lj) = (&steps[order[i]].0, &steps[order[i + 1]].0);
                if !li.is_primitive() || !lj.is_primitive() {
                    continue;
                }
                let from = if i == 0 { root } else { sts[i - 1] };
                let to = sts[i + 1];
                for (l, mid) in self.p.successors(from) {
                    if l != lj || !self.p.has_transition(mid, li, to) {
                        continue;
                    }
                    // equal labels have only one interleaving
                    if li == lj {
                        continue;
                    }
                    let mut o2 = order.clone();
                    o2.swap(i, i + 1);
                    let mut s2 = sts.clone();
                    s2[i] = mid;
                    let m = (o2, s2);
                    if seen.insert(m.clone()) {
                        queue.push_back(m);
                    }
                }
            }
        }
        let mut preds: BTreeSet<EventId> = BTreeSet::new();
        for (idx, (_, evs)) in steps.iter().enumerate().take(k) {
            if !before_k.contains(&idx) {
                for &e in evs {
                    preds.insert(e);
                    preds.extend(self.cs.events[e].preds.iter().copied());
                }
            }
        }
        let (_, before, after) = earliest?;
        let preds: Vec<EventId> = preds.into_iter().collect();
        Some((preds, before, after))
    }
}
