//! Behavioural relations over PLTSs and configuration structures:
//! bisimulations and simulations at pomset, step and history-preserving
//! granularity, decorated trace preorders, branching bisimulations, the
//! preorder hierarchy harness and congruence sampling.

mod branching;
mod congruence;
mod hierarchy;
mod history;
mod modal;
mod strong;
mod traces;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::plts::{ConfigStructure, EventId, Mode, NodeId, Plts};
use crate::term::SQRT;
use crate::verdict::Verdict;

pub use congruence::{check_congruence_samples, CongruenceReport, CongruenceSample};
pub use hierarchy::{hierarchy_check, hierarchy_edges, relation_pairs, Edge, EdgeReport, HierarchyReport};
pub use history::{check_posetal_relation, history_game, history_game_from, Game};
pub use modal::Modal;
pub use strong::{distinguishing_modal, is_bisimulation, is_simulation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Pomset,
    Step,
    Hp,
    Hhp,
}

impl Granularity {
    fn suffix(self) -> &'static str {
        match self {
            Granularity::Pomset => "p",
            Granularity::Step => "s",
            Granularity::Hp => "hp",
            Granularity::Hhp => "hhp",
        }
    }

    fn from_suffix(s: &str) -> Option<Granularity> {
        Some(match s {
            "p" => Granularity::Pomset,
            "s" => Granularity::Step,
            "hp" => Granularity::Hp,
            "hhp" => Granularity::Hhp,
            _ => return None,
        })
    }

    pub fn is_history(self) -> bool {
        matches!(self, Granularity::Hp | Granularity::Hhp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Trace,
    Completed,
    Accepting,
    Readies,
    Failures,
    ReadyTrace,
    FailureTrace,
}

impl TraceKind {
    pub const ALL: [TraceKind; 7] = [
        TraceKind::Trace,
        TraceKind::Completed,
        TraceKind::Accepting,
        TraceKind::Readies,
        TraceKind::Failures,
        TraceKind::ReadyTrace,
        TraceKind::FailureTrace,
    ];

    fn name(self) -> &'static str {
        match self {
            TraceKind::Trace => "t",
            TraceKind::Completed => "ct",
            TraceKind::Accepting => "at",
            TraceKind::Readies => "r",
            TraceKind::Failures => "f",
            TraceKind::ReadyTrace => "rt",
            TraceKind::FailureTrace => "ft",
        }
    }
}

/// Every relation the checker decides. Bisimulations and branching
/// bisimulations are equivalences; simulations and trace inclusions are
/// preorders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum RelationKind {
    Bisim { base: Granularity },
    Sim { base: Granularity, ready: bool },
    Trace { kind: TraceKind },
    Branching { base: Granularity, rooted: bool },
}

impl RelationKind {
    pub fn is_preorder(self) -> bool {
        matches!(self, RelationKind::Sim { .. } | RelationKind::Trace { .. })
    }

    /// Short name: `p`, `hhp`, `rp`, `ft`, `bp`, `rbhp`, ... Simulations
    /// and bisimulations share the suffix; `sim:` / `bisim:` prefixes are
    /// added by `Display`.
    pub fn short(self) -> String {
        match self {
            RelationKind::Bisim { base } => base.suffix().to_string(),
            RelationKind::Sim { base, ready } => format!("{}{}", if ready { "r" } else { "" }, base.suffix()),
            RelationKind::Trace { kind } => kind.name().to_string(),
            RelationKind::Branching { base, rooted } => {
                format!("{}b{}", if rooted { "r" } else { "" }, base.suffix())
            }
        }
    }

    /// A preorder name: `p s hp hhp rp rs rhp rhhp t ct at r f rt ft`.
    pub fn preorder(name: &str) -> Result<RelationKind, String> {
        if let Some(base) = Granularity::from_suffix(name) {
            return Ok(RelationKind::Sim { base, ready: false });
        }
        if let Some(kind) = TraceKind::ALL.into_iter().find(|k| k.name() == name) {
            return Ok(RelationKind::Trace { kind });
        }
        if let Some(base) = name.strip_prefix('r').and_then(Granularity::from_suffix) {
            return Ok(RelationKind::Sim { base, ready: true });
        }
        Err(format!("unknown preorder `{name}` (expected one of p s hp hhp rp rs rhp rhhp t ct at r f rt ft)"))
    }

    /// An equivalence name: `p s hp hhp`, branching `bp bs bhp bhhp` and
    /// rooted `rbp rbs rbhp rbhhp`.
    pub fn equivalence(name: &str) -> Result<RelationKind, String> {
        if let Some(base) = Granularity::from_suffix(name) {
            return Ok(RelationKind::Bisim { base });
        }
        let (rooted, rest) = match name.strip_prefix("rb") {
            Some(r) => (true, r),
            None => (false, name.strip_prefix('b').unwrap_or("")),
        };
        if let Some(base) = Granularity::from_suffix(rest) {
            return Ok(RelationKind::Branching { base, rooted });
        }
        Err(format!("unknown equivalence `{name}` (expected p s hp hhp, bp bs bhp bhhp or rbp rbs rbhp rbhhp)"))
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = if self.is_preorder() { "≲" } else if matches!(self, RelationKind::Bisim { .. }) { "~" } else { "≈" };
        write!(f, "{sym}{}", self.short())
    }
}

impl FromStr for RelationKind {
    type Err = String;
    /// Accepts `sim:NAME` / `bisim:NAME` or a bare name, which is read as an
    /// equivalence when it names one and as a preorder otherwise.
    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(n) = s.strip_prefix("sim:") {
            return RelationKind::preorder(n);
        }
        if let Some(n) = s.strip_prefix("bisim:") {
            return RelationKind::equivalence(n);
        }
        RelationKind::equivalence(s).or_else(|_| RelationKind::preorder(s))
    }
}

/// One entry of a history-preserving relation: two configurations and an
/// order isomorphism between (the visible parts of) them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Triple {
    pub left: NodeId,
    pub right: NodeId,
    pub map: Vec<(EventId, EventId)>,
}

/// Evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Witness {
    None,
    /// State pairs forming the relation, starting with the queried pair.
    Relation { pairs: Vec<(usize, usize)> },
    /// Posetal triples over the unfolding used for the check.
    Posetal { triples: Vec<Triple> },
    /// A decorated trace of the left state missing on the right: the
    /// visited left states and the decorated trace.
    Trace { path: Vec<usize>, items: Vec<String> },
    /// A modal formula over pomset labels true at the left state only.
    Formula { formula: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub verdict: Verdict,
    pub witness: Witness,
}

impl Outcome {
    fn bare(verdict: Verdict) -> Outcome {
        Outcome { verdict, witness: Witness::None }
    }
}

/// Knobs for the checks that build an unfolding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivOptions {
    pub mode: Mode,
    /// Unfolding depth for history-preserving relations; `None` picks the
    /// state count (exact on acyclic systems).
    pub depth: Option<usize>,
    /// Predicate read as acceptance by accepting traces.
    pub accept: String,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions { mode: Mode::Strict, depth: None, accept: SQRT.to_string() }
    }
}

impl EquivOptions {
    fn depth_for(&self, p: &Plts) -> usize {
        self.depth.unwrap_or_else(|| p.len().clamp(1, 12))
    }
}

fn unfold_pair(p: &Plts, s1: usize, s2: usize, opts: &EquivOptions) -> (ConfigStructure, NodeId, NodeId) {
    let cs = ConfigStructure::from_plts(p, &[s1, s2], opts.depth_for(p), opts.mode);
    let (r1, r2) = (cs.roots()[0], cs.roots()[1]);
    (cs, r1, r2)
}

/// Bisimilarity of two states of `p`.
pub fn bisimilar(p: &Plts, s1: usize, s2: usize, base: Granularity, opts: &EquivOptions) -> Outcome {
    match base {
        Granularity::Pomset | Granularity::Step => strong::bisimilar(p, s1, s2, base == Granularity::Step),
        Granularity::Hp | Granularity::Hhp => {
            let (cs, r1, r2) = unfold_pair(p, s1, s2, opts);
            history_game(&cs, r1, r2, Game::bisim(base == Granularity::Hhp))
        }
    }
}

/// `s1` simulated by `s2`, optionally with the ready clauses.
pub fn similar(p: &Plts, s1: usize, s2: usize, base: Granularity, ready: bool, opts: &EquivOptions) -> Outcome {
    match base {
        Granularity::Pomset | Granularity::Step => strong::similar(p, s1, s2, base == Granularity::Step, ready),
        Granularity::Hp | Granularity::Hhp => {
            let (cs, r1, r2) = unfold_pair(p, s1, s2, opts);
            history_game(&cs, r1, r2, Game::sim(base == Granularity::Hhp, ready))
        }
    }
}

/// Inclusion of the decorated trace set of `s1` in that of `s2`.
pub fn trace_preorder(p: &Plts, s1: usize, s2: usize, kind: TraceKind, opts: &EquivOptions) -> Outcome {
    traces::included(p, s1, s2, kind, &opts.accept)
}

pub fn branching_bisimilar(p: &Plts, s1: usize, s2: usize, base: Granularity, rooted: bool, opts: &EquivOptions) -> Outcome {
    match base {
        Granularity::Pomset | Granularity::Step => branching::bisimilar(p, s1, s2, base == Granularity::Step, rooted),
        Granularity::Hp | Granularity::Hhp => {
            let (cs, r1, r2) = unfold_pair(p, s1, s2, opts);
            history::branching_game(&cs, r1, r2, base == Granularity::Hhp, rooted)
        }
    }
}

/// Decides `s1 R s2` for any relation kind (for preorders, `s1 ≲ s2`).
pub fn relate(p: &Plts, s1: usize, s2: usize, kind: RelationKind, opts: &EquivOptions) -> Outcome {
    match kind {
        RelationKind::Bisim { base } => bisimilar(p, s1, s2, base, opts),
        RelationKind::Sim { base, ready } => similar(p, s1, s2, base, ready, opts),
        RelationKind::Trace { kind } => trace_preorder(p, s1, s2, kind, opts),
        RelationKind::Branching { base, rooted } => branching_bisimilar(p, s1, s2, base, rooted, opts),
    }
}

/// Like `relate`, but preorders are replaced by their kernels.
pub fn equivalent(p: &Plts, s1: usize, s2: usize, kind: RelationKind, opts: &EquivOptions) -> Outcome {
    let fwd = relate(p, s1, s2, kind, opts);
    if !kind.is_preorder() || fwd.verdict.fails() {
        return fwd;
    }
    let bwd = relate(p, s2, s1, kind, opts);
    let verdict = fwd.verdict.and(bwd.verdict);
    let witness = if bwd.verdict.fails() { bwd.witness } else { fwd.witness };
    Outcome { verdict, witness }
}

/// Relations on a configuration structure, reading nodes as states. Used
/// for event structures, whose configurations need no PLTS.
pub fn relate_configs(cs: &ConfigStructure, n1: NodeId, n2: NodeId, kind: RelationKind) -> Outcome {
    match kind {
        RelationKind::Bisim { base } if base.is_history() => history_game(cs, n1, n2, Game::bisim(base == Granularity::Hhp)),
        RelationKind::Sim { base, ready } if base.is_history() => {
            history_game(cs, n1, n2, Game::sim(base == Granularity::Hhp, ready))
        }
        RelationKind::Branching { base, rooted } if base.is_history() => {
            history::branching_game(cs, n1, n2, base == Granularity::Hhp, rooted)
        }
        _ => {
            let p = configs_as_plts(cs);
            relate(&p, n1, n2, kind, &EquivOptions::default())
        }
    }
}

/// The nodes and transitions of a configuration structure as a PLTS with
/// state `i` for node `i`; frontier nodes become frontier states.
pub fn configs_as_plts(cs: &ConfigStructure) -> Plts {
    let n = cs.nodes().len().max(1);
    let mut p = Plts::new(n, cs.roots().first().copied().unwrap_or(0)).expect("nonempty");
    for (i, node) in cs.nodes().iter().enumerate() {
        for t in &node.out {
            p.add_transition(i, t.label.clone(), t.target).expect("declared");
        }
        for q in &node.predicates {
            p.add_predicate(i, q).expect("declared");
        }
        if node.frontier {
            p.mark_frontier(i).expect("declared");
        }
    }
    p.set_truncated(cs.truncated());
    p
}

#[cfg(test)]
mod tests;
