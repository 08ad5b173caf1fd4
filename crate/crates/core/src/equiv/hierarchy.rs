//! Checks the inclusions between preorders (and bisimilarities) on the
//! state pairs of one PLTS.

use std::collections::HashMap;

use serde::Serialize;

use super::{history_game, relate, EquivOptions, Game, Granularity, RelationKind, TraceKind};
use crate::plts::{ConfigStructure, Plts};
use crate::verdict::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: RelationKind,
    pub to: RelationKind,
    /// Drawn in the inclusion diagram, as opposed to the listed extras.
    pub figure: bool,
}

fn bisim(base: Granularity) -> RelationKind {
    RelationKind::Bisim { base }
}

fn sim(base: Granularity) -> RelationKind {
    RelationKind::Sim { base, ready: false }
}

fn ready(base: Granularity) -> RelationKind {
    RelationKind::Sim { base, ready: true }
}

fn tr(kind: TraceKind) -> RelationKind {
    RelationKind::Trace { kind }
}

/// Every inclusion to verify: the diagram's arrows, then the extras.
pub fn hierarchy_edges() -> Vec<Edge> {
    use Granularity::*;
    use TraceKind::*;
    let figure = [
        (bisim(Hhp), bisim(Hp)),
        (bisim(Hp), bisim(Pomset)),
        (bisim(Pomset), ready(Pomset)),
        (ready(Pomset), tr(ReadyTrace)),
        (tr(ReadyTrace), tr(FailureTrace)),
        (tr(ReadyTrace), tr(Readies)),
        (tr(FailureTrace), tr(Failures)),
        (tr(Readies), tr(Failures)),
        (tr(Failures), tr(Completed)),
        (tr(Completed), tr(Accepting)),
        (bisim(Hhp), ready(Hhp)),
        (ready(Hhp), sim(Hhp)),
        (bisim(Hp), ready(Hp)),
        (ready(Hp), sim(Hp)),
        (ready(Pomset), sim(Pomset)),
    ];
    let extras = [
        (ready(Hhp), ready(Hp)),
        (ready(Hp), ready(Pomset)),
        (sim(Hhp), sim(Hp)),
        (sim(Hp), sim(Pomset)),
        (sim(Pomset), tr(Accepting)),
        (sim(Pomset), tr(Trace)),
        (ready(Pomset), tr(Trace)),
    ];
    figure
        .into_iter()
        .map(|(from, to)| Edge { from, to, figure: true })
        .chain(extras.into_iter().map(|(from, to)| Edge { from, to, figure: false }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeReport {
    pub edge: Edge,
    /// Pairs in the source relation whose target verdict was definite.
    pub checked: usize,
    /// Pairs where a bound left the source or the target undecided.
    pub inconclusive: usize,
    /// Pairs in the source relation but definitely not in the target.
    pub violations: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HierarchyReport {
    pub pairs: usize,
    pub edges: Vec<EdgeReport>,
}

impl HierarchyReport {
    pub fn violated(&self) -> Vec<&EdgeReport> {
        self.edges.iter().filter(|e| !e.violations.is_empty()).collect()
    }

    pub fn ok(&self) -> bool {
        self.violated().is_empty()
    }
}

/// Verdicts of one relation on the given state pairs.
pub fn relation_pairs(p: &Plts, kind: RelationKind, pairs: &[(usize, usize)], opts: &EquivOptions) -> Vec<Verdict> {
    let history = match kind {
        RelationKind::Bisim { base } => base.is_history().then(|| Game::bisim(base == Granularity::Hhp)),
        RelationKind::Sim { base, ready } => base.is_history().then(|| Game::sim(base == Granularity::Hhp, ready)),
        _ => None,
    };
    match history {
        Some(game) => {
            // one unfolding rooted at every state serves all pairs
            let states: Vec<usize> = (0..p.len()).collect();
            let cs = ConfigStructure::from_plts(p, &states, opts.depth_for(p), opts.mode);
            pairs.iter().map(|&(a, b)| history_game(&cs, cs.roots()[a], cs.roots()[b], game).verdict).collect()
        }
        None => pairs.iter().map(|&(a, b)| relate(p, a, b, kind, opts).verdict).collect(),
    }
}

/// Verifies every edge of the hierarchy on `pairs` (all ordered pairs of
/// states when `None`).
pub fn hierarchy_check(p: &Plts, pairs: Option<&[(usize, usize)]>, opts: &EquivOptions) -> HierarchyReport {
    let all: Vec<(usize, usize)> = match pairs {
        Some(ps) => ps.to_vec(),
        None => (0..p.len()).flat_map(|a| (0..p.len()).map(move |b| (a, b))).collect(),
    };
    let mut cache: HashMap<RelationKind, Vec<Verdict>> = HashMap::new();
    let mut get = |k: RelationKind| -> Vec<Verdict> {
        cache.entry(k).or_insert_with(|| relation_pairs(p, k, &all, opts)).clone()
    };
    let mut edges = Vec::new();
    for edge in hierarchy_edges() {
        let src = get(edge.from);
        let dst = get(edge.to);
        let mut rep = EdgeReport { edge, checked: 0, inconclusive: 0, violations: vec![] };
        for (i, &(a, b)) in all.iter().enumerate() {
            match (src[i], dst[i]) {
                (Verdict::Fails, _) => {}
                (Verdict::Holds, Verdict::Fails) => rep.violations.push((a, b)),
                (Verdict::Holds, Verdict::Holds) => rep.checked += 1,
                _ => rep.inconclusive += 1,
            }
        }
        edges.push(rep);
    }
    HierarchyReport { pairs: all.len(), edges }
}
