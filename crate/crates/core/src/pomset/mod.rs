//! Labelled partial orders and their isomorphism classes.
//!
//! A [`Poset`] carries arbitrary event names; a [`Pomset`] is the canonical
//! representative of a poset's isomorphism class, with events numbered
//! `0..n`. All orders are stored strict and transitively closed.

mod canon;
pub(crate) mod text;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use text::parse_pomset;

/// Largest number of events a single pomset may carry.
pub const MAX_EVENTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PomsetError {
    #[error("duplicate event id `{0}`")]
    DuplicateEvent(String),
    #[error("unknown event id `{0}` in order")]
    UnknownEvent(String),
    #[error("order is cyclic through event `{0}`")]
    Cyclic(String),
    #[error("invalid action label `{0}`")]
    BadLabel(String),
    #[error("pomset has more than {MAX_EVENTS} events")]
    TooLarge,
    #[error("operation requires a nonempty pomset")]
    Empty,
}

/// An action name. `tau` and `sigma` are reserved for the silent step and
/// the time tick.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ActionLabel(String);

impl ActionLabel {
    pub const TAU: &'static str = "tau";
    pub const SIGMA: &'static str = "sigma";

    pub fn new(name: impl Into<String>) -> Result<Self, PomsetError> {
        let name = name.into();
        let mut chars = name.chars();
        let ok = chars.next().is_some_and(crate::syntax::is_ident_start)
            && chars.all(crate::syntax::is_ident_char);
        if ok {
            Ok(ActionLabel(name))
        } else {
            Err(PomsetError::BadLabel(name))
        }
    }

    pub fn tau() -> Self {
        ActionLabel(Self::TAU.to_string())
    }

    pub fn sigma() -> Self {
        ActionLabel(Self::SIGMA.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_tau(&self) -> bool {
        self.0 == Self::TAU
    }

    pub fn is_sigma(&self) -> bool {
        self.0 == Self::SIGMA
    }
}

impl TryFrom<String> for ActionLabel {
    type Error = PomsetError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        ActionLabel::new(s)
    }
}

impl From<ActionLabel> for String {
    fn from(a: ActionLabel) -> String {
        a.0
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Transitive closure of a successor-bitmask relation, in place.
fn close(succ: &mut [u64]) {
    let n = succ.len();
    for k in 0..n {
        for i in 0..n {
            if succ[i] >> k & 1 == 1 {
                succ[i] |= succ[k];
            }
        }
    }
}

/// A finite labelled partial order over named events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    ids: Vec<String>,
    labels: Vec<ActionLabel>,
    /// `succ[i]` has bit `j` set iff event `i` is strictly below event `j`.
    succ: Vec<u64>,
}

impl Poset {
    /// Builds a poset from events and generating pairs; the order is closed
    /// transitively and must be acyclic.
    pub fn new<S: AsRef<str>>(
        events: impl IntoIterator<Item = (S, ActionLabel)>,
        order: impl IntoIterator<Item = (S, S)>,
    ) -> Result<Self, PomsetError> {
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        let mut index = BTreeMap::new();
        for (id, label) in events {
            let id = id.as_ref().to_string();
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(PomsetError::DuplicateEvent(id));
            }
            ids.push(id);
            labels.push(label);
        }
        if ids.len() > MAX_EVENTS {
            return Err(PomsetError::TooLarge);
        }
        let mut succ = vec![0u64; ids.len()];
        for (a, b) in order {
            let i = *index
                .get(a.as_ref())
                .ok_or_else(|| PomsetError::UnknownEvent(a.as_ref().to_string()))?;
            let j = *index
                .get(b.as_ref())
                .ok_or_else(|| PomsetError::UnknownEvent(b.as_ref().to_string()))?;
            succ[i] |= 1 << j;
        }
        close(&mut succ);
        if let Some(i) = (0..ids.len()).find(|&i| succ[i] >> i & 1 == 1) {
            return Err(PomsetError::Cyclic(ids[i].clone()));
        }
        Ok(Poset { ids, labels, succ })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn label_of(&self, id: &str) -> Option<&ActionLabel> {
        self.ids.iter().position(|x| x == id).map(|i| &self.labels[i])
    }

    /// Strict order test by event id.
    pub fn less(&self, a: &str, b: &str) -> bool {
        match (self.index(a), self.index(b)) {
            (Some(i), Some(j)) => self.succ[i] >> j & 1 == 1,
            _ => false,
        }
    }

    fn index(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Strict order pairs, sorted by id.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in 0..self.len() {
                if self.succ[i] >> j & 1 == 1 {
                    out.push((self.ids[i].clone(), self.ids[j].clone()));
                }
            }
        }
        out.sort();
        out
    }

    /// The poset with events renamed `0..n` in the order given by `Pomset`.
    pub fn from_pomset(p: &Pomset) -> Poset {
        Poset {
            ids: (0..p.len()).map(|i| i.to_string()).collect(),
            labels: p.labels.clone(),
            succ: p.succ.clone(),
        }
    }

    pub fn canonicalize(&self) -> Pomset {
        canonicalize(self)
    }
}

/// Canonical representative of the isomorphism class of `p`.
pub fn canonicalize(p: &Poset) -> Pomset {
    let perm = canon::canonical_order(&p.labels, &p.succ);
    Pomset::permuted(&p.labels, &p.succ, &perm)
}

/// An order- and label-preserving bijection between two posets, as a map
/// from event ids of `p` to event ids of `q`.
pub fn iso(p: &Poset, q: &Poset) -> Option<BTreeMap<String, String>> {
    if p.len() != q.len() {
        return None;
    }
    let pp = canon::canonical_order(&p.labels, &p.succ);
    let qp = canon::canonical_order(&q.labels, &q.succ);
    if Pomset::permuted(&p.labels, &p.succ, &pp) != Pomset::permuted(&q.labels, &q.succ, &qp) {
        return None;
    }
    // pp[k] and qp[k] both land on canonical position k
    Some(
        pp.iter()
            .zip(&qp)
            .map(|(&i, &j)| (p.ids[i].clone(), q.ids[j].clone()))
            .collect(),
    )
}

/// The shape of a pomset with respect to the two compositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PomsetClass {
    Empty,
    Primitive,
    Sequential,
    Parallel,
    PrimeCompound,
}

/// Result of [`Pomset::first_step`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstStep {
    /// Restriction to the order-minimal events.
    pub step: Pomset,
    /// Induced sub-pomset on the remaining events.
    pub rest: Pomset,
    /// Whether iterating the decomposition and recomposing with `seq`
    /// reproduces the pomset exactly.
    pub layered: bool,
}

/// A pomset in canonical form: events `0..n`, labels and strict order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pomset {
    labels: Vec<ActionLabel>,
    succ: Vec<u64>,
}

impl Pomset {
    pub fn empty() -> Self {
        Pomset { labels: Vec::new(), succ: Vec::new() }
    }

    pub fn primitive(a: ActionLabel) -> Self {
        Pomset { labels: vec![a], succ: vec![0] }
    }

    /// Primitive pomset from a label name; panics on an invalid name.
    pub fn action(name: &str) -> Self {
        Pomset::primitive(ActionLabel::new(name).expect("valid action name"))
    }

    pub fn tau() -> Self {
        Pomset::primitive(ActionLabel::tau())
    }

    pub fn sigma() -> Self {
        Pomset::primitive(ActionLabel::sigma())
    }

    /// Canonicalizes an arbitrary indexed labelled relation. `pairs` are
    /// closed transitively; a cycle is an error.
    pub fn from_parts(
        labels: Vec<ActionLabel>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, PomsetError> {
        let native: Vec<(String, ActionLabel)> =
            labels.into_iter().enumerate().map(|(i, l)| (i.to_string(), l)).collect();
        let order: Vec<(String, String)> =
            pairs.into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        Ok(canonicalize(&Poset::new(native, order)?))
    }

    /// Pomset over labelled events whose order is already closed and acyclic.
    pub(crate) fn from_closed(labels: Vec<ActionLabel>, succ: Vec<u64>) -> Self {
        let perm = canon::canonical_order(&labels, &succ);
        Pomset::permuted(&labels, &succ, &perm)
    }

    /// Like `from_closed`, also returning which input event sits at each
    /// canonical position.
    pub(crate) fn from_closed_with_order(labels: Vec<ActionLabel>, succ: Vec<u64>) -> (Self, Vec<usize>) {
        let perm = canon::canonical_order(&labels, &succ);
        (Pomset::permuted(&labels, &succ, &perm), perm)
    }

    /// Builds the pomset whose position `k` is old event `perm[k]`.
    fn permuted(labels: &[ActionLabel], succ: &[u64], perm: &[usize]) -> Self {
        let n = perm.len();
        let mut inv = vec![0usize; n];
        for (k, &old) in perm.iter().enumerate() {
            inv[old] = k;
        }
        let mut out = vec![0u64; n];
        for i in 0..n {
            for j in 0..n {
                if succ[i] >> j & 1 == 1 {
                    out[inv[i]] |= 1 << inv[j];
                }
            }
        }
        Pomset { labels: perm.iter().map(|&i| labels[i].clone()).collect(), succ: out }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[ActionLabel] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &ActionLabel {
        &self.labels[i]
    }

    /// `i < j` in the strict order.
    pub fn less(&self, i: usize, j: usize) -> bool {
        self.succ[i] >> j & 1 == 1
    }

    pub fn concurrent(&self, i: usize, j: usize) -> bool {
        i != j && !self.less(i, j) && !self.less(j, i)
    }

    #[cfg(test)]
    pub(crate) fn succ_masks(&self) -> &[u64] {
        &self.succ
    }

    /// All strict order pairs.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.less(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Covering pairs (the Hasse diagram).
    pub fn covers(&self) -> Vec<(usize, usize)> {
        self.pairs()
            .into_iter()
            .filter(|&(i, j)| !(0..self.len()).any(|k| self.less(i, k) && self.less(k, j)))
            .collect()
    }

    pub fn is_primitive(&self) -> bool {
        self.len() == 1
    }

    /// All distinct events pairwise concurrent.
    pub fn is_step(&self) -> bool {
        self.succ.iter().all(|&m| m == 0)
    }

    /// Every event is labelled `tau` (the empty pomset qualifies).
    pub fn is_tau_only(&self) -> bool {
        self.labels.iter().all(ActionLabel::is_tau)
    }

    pub fn contains_label(&self, name: &str) -> bool {
        self.labels.iter().any(|l| l.as_str() == name)
    }

    fn full_mask(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    /// Induced sub-pomset on the events in `mask`.
    pub fn restrict(&self, mask: u64) -> Pomset {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| mask >> i & 1 == 1).collect();
        let mut pos = vec![usize::MAX; self.len()];
        for (k, &i) in keep.iter().enumerate() {
            pos[i] = k;
        }
        let mut succ = vec![0u64; keep.len()];
        for (k, &i) in keep.iter().enumerate() {
            for &j in &keep {
                if self.less(i, j) {
                    succ[k] |= 1 << pos[j];
                }
            }
        }
        Pomset::from_closed(keep.iter().map(|&i| self.labels[i].clone()).collect(), succ)
    }

    /// Disjoint union of carriers and orders.
    pub fn par(&self, other: &Pomset) -> Pomset {
        self.compose(other, false)
    }

    /// Disjoint union plus every pair from `self` to `other`.
    pub fn seq(&self, other: &Pomset) -> Pomset {
        self.compose(other, true)
    }

    fn compose(&self, other: &Pomset, cross: bool) -> Pomset {
        let (n, m) = (self.len(), other.len());
        assert!(n + m <= MAX_EVENTS, "pomset composition exceeds {MAX_EVENTS} events");
        let high = if m == 0 { 0 } else { ((1u64 << m) - 1) << n };
        let mut succ: Vec<u64> = self.succ.iter().map(|&s| s | if cross { high } else { 0 }).collect();
        succ.extend(other.succ.iter().map(|&s| s << n));
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Pomset::from_closed(labels, succ)
    }

    /// Sequential composition of a list (ε for the empty list).
    pub fn seq_all<'a>(parts: impl IntoIterator<Item = &'a Pomset>) -> Pomset {
        parts.into_iter().fold(Pomset::empty(), |acc, p| acc.seq(p))
    }

    /// Parallel composition of a list (ε for the empty list).
    pub fn par_all<'a>(parts: impl IntoIterator<Item = &'a Pomset>) -> Pomset {
        parts.into_iter().fold(Pomset::empty(), |acc, p| acc.par(p))
    }

    pub fn classify(&self) -> PomsetClass {
        match self.len() {
            0 => PomsetClass::Empty,
            1 => PomsetClass::Primitive,
            _ if self.seq_cut_masks().len() > 1 => PomsetClass::Sequential,
            _ if self.components().len() > 1 => PomsetClass::Parallel,
            _ => PomsetClass::PrimeCompound,
        }
    }

    /// Masks of the segments between consecutive sequential cuts, in order.
    fn seq_cut_masks(&self) -> Vec<u64> {
        let n = self.len();
        let lin = self.linear_extension();
        // a prefix of a linear extension is a cut iff it lies entirely below the suffix
        let mut segments = Vec::new();
        let mut seg = 0u64;
        for k in 0..n {
            seg |= 1 << lin[k];
            if k + 1 == n {
                break;
            }
            let cut = lin[..=k]
                .iter()
                .all(|&i| lin[k + 1..].iter().all(|&j| self.less(i, j)));
            if cut {
                segments.push(seg);
                seg = 0;
            }
        }
        if seg != 0 {
            segments.push(seg);
        }
        segments
    }

    fn linear_extension(&self) -> Vec<usize> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        // number of predecessors is strictly monotone along the order
        order.sort_by_key(|&j| ((0..n).filter(|&i| self.less(i, j)).count(), j));
        order
    }

    /// Connected components of the comparability graph, as masks.
    fn components(&self) -> Vec<u64> {
        canon::components(&self.succ)
    }

    /// Unique decomposition into nonempty non-sequential factors.
    pub fn seq_factorize(&self) -> Result<Vec<Pomset>, PomsetError> {
        if self.is_empty() {
            return Err(PomsetError::Empty);
        }
        Ok(self.seq_cut_masks().into_iter().map(|m| self.restrict(m)).collect())
    }

    /// Unique multiset of nonempty non-parallel factors, sorted.
    pub fn par_factorize(&self) -> Result<Vec<Pomset>, PomsetError> {
        if self.is_empty() {
            return Err(PomsetError::Empty);
        }
        let mut out: Vec<Pomset> = self.components().into_iter().map(|m| self.restrict(m)).collect();
        out.sort();
        Ok(out)
    }

    fn minimal_mask(&self) -> u64 {
        let mut has_pred = 0u64;
        for &s in &self.succ {
            has_pred |= s;
        }
        self.full_mask() & !has_pred
    }

    /// Splits off the order-minimal layer.
    pub fn first_step(&self) -> Result<FirstStep, PomsetError> {
        if self.is_empty() {
            return Err(PomsetError::Empty);
        }
        let minimal = self.minimal_mask();
        let step = self.restrict(minimal);
        let rest = self.restrict(self.full_mask() & !minimal);
        let layers = self.layers();
        let layered = Pomset::seq_all(&layers) == *self;
        Ok(FirstStep { step, rest, layered })
    }

    /// Iterated minimal-layer decomposition.
    pub fn layers(&self) -> Vec<Pomset> {
        let mut out = Vec::new();
        let mut cur = self.clone();
        while !cur.is_empty() {
            let minimal = cur.minimal_mask();
            out.push(cur.restrict(minimal));
            cur = cur.restrict(cur.full_mask() & !minimal);
        }
        out
    }

    /// The first step of a nonempty pomset; ε for ε.
    pub fn step_head(&self) -> Pomset {
        if self.is_empty() {
            Pomset::empty()
        } else {
            self.restrict(self.minimal_mask())
        }
    }

    /// Length of the longest chain ending in each event.
    pub fn heights(&self) -> Vec<usize> {
        let n = self.len();
        let lin = self.linear_extension();
        let mut h = vec![0usize; n];
        for &j in &lin {
            h[j] = (0..n).filter(|&i| self.less(i, j)).map(|i| h[i] + 1).max().unwrap_or(0);
        }
        h
    }
}

impl fmt::Display for Pomset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        text::write_pomset(self, f)
    }
}
