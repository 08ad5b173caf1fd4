use std::collections::{BTreeSet, HashMap};

use super::{Formula, Fragment, Model, Var};
use crate::plts::{ConfigStructure, EventId, NodeId};
use crate::pomset::ActionLabel;
use crate::verdict::Verdict;

/// Distinguishing positions explored before giving up.
const BUDGET: usize = 500_000;

/// Two configurations with their bound events; variable `x{i}` names the
/// i-th event on each side.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Pos {
    l: NodeId,
    le: Vec<EventId>,
    r: NodeId,
    re: Vec<EventId>,
}

impl Pos {
    fn closed(l: NodeId, r: NodeId) -> Pos {
        Pos { l, le: vec![], r, re: vec![] }
    }

    fn swap(&self) -> Pos {
        Pos { l: self.r, le: self.re.clone(), r: self.l, re: self.le.clone() }
    }
}

fn var(i: usize) -> Var {
    format!("x{i}")
}

fn names(ix: &[usize]) -> Vec<Var> {
    ix.iter().map(|&i| var(i)).collect()
}

fn pick(ix: &[usize], evs: &[EventId]) -> Vec<EventId> {
    ix.iter().map(|&i| evs[i]).collect()
}

type Profile = (Vec<usize>, Vec<usize>, ActionLabel);

/// Depth-bounded search for formulas true on the left and false on the
/// right. Every move on one side is answered by all matching moves on the
/// other, so a formula is found exactly when the left configuration wins
/// the depth-bounded game for the fragment. Binders always state every
/// causal and concurrency relation to the bound events, the strongest
/// claim available.
struct Search<'a> {
    m: Model<'a>,
    frag: Fragment,
    memo: HashMap<(Pos, usize), Option<Formula>>,
    calls: usize,
    exhausted: bool,
}

fn better(f: &Formula, best: &Option<Formula>) -> bool {
    best.as_ref().is_none_or(|b| (f.size(), f) < (b.size(), b))
}

impl<'a> Search<'a> {
    fn new(cs: &'a ConfigStructure, frag: Fragment) -> Self {
        Search { m: Model::new(cs), frag, memo: HashMap::new(), calls: 0, exhausted: false }
    }

    fn dist(&mut self, pos: &Pos, k: usize) -> Option<Formula> {
        let key = (pos.clone(), k);
        if let Some(f) = self.memo.get(&key) {
            return f.clone();
        }
        self.calls += 1;
        if self.calls > BUDGET {
            self.exhausted = true;
            return None;
        }
        let mut best = None;
        for f in self.atoms(pos, k) {
            if better(&f, &best) {
                best = Some(f);
            }
        }
        for f in self.moves(pos, k) {
            if better(&f, &best) {
                best = Some(f);
            }
        }
        if !self.frag.is_denial() {
            for f in self.moves(&pos.swap(), k) {
                let f = Formula::not(f);
                if better(&f, &best) {
                    best = Some(f);
                }
            }
        }
        self.memo.insert(key, best.clone());
        best
    }

    fn atoms(&self, pos: &Pos, k: usize) -> Vec<Formula> {
        let (nl, nr) = (self.m.cs.node(pos.l), self.m.cs.node(pos.r));
        if self.frag.is_denial() {
            if k == 0 {
                return vec![];
            }
            let il = self.m.initials(pos.l);
            return self
                .m
                .initials(pos.r)
                .into_iter()
                .filter(|a| !il.contains(a))
                .map(|a| Formula::denial(a.clone()))
                .collect();
        }
        let mut out: Vec<Formula> = nl.predicates.difference(&nr.predicates).map(|p| Formula::Pred(p.clone())).collect();
        out.extend(nr.predicates.difference(&nl.predicates).map(|p| Formula::not(Formula::Pred(p.clone()))));
        out
    }

    fn moves(&mut self, pos: &Pos, k: usize) -> Vec<Formula> {
        match self.frag.host() {
            Fragment::Bcl => self.bcl_moves(pos, k),
            Fragment::Hpl => self.hpl_moves(pos, k),
            Fragment::Pl => {
                let mut out = Vec::new();
                if k > 0 {
                    self.grow_block(k, pos.l, vec![], vec![], vec![(pos.r, vec![])], &mut out);
                }
                out
            }
            Fragment::Sl => {
                let mut out = Vec::new();
                if k > 0 {
                    self.grow_step(pos, k, vec![], vec![vec![]], &mut out);
                }
                out
            }
            _ => unreachable!("hosts are the four logics"),
        }
    }

    /// The conjunction of distinguishers for every answer, if each exists.
    fn answer_all(&mut self, answers: impl IntoIterator<Item = Pos>, k: usize) -> Option<Formula> {
        let mut parts = Vec::new();
        for p in answers {
            parts.push(self.dist(&p, k)?);
        }
        Some(Formula::all(parts))
    }

    fn profile(&self, bound: &[EventId], e: EventId) -> (Vec<usize>, Vec<usize>) {
        let xs = (0..bound.len()).filter(|&i| self.m.less(bound[i], e)).collect();
        let ys = (0..bound.len()).filter(|&i| self.m.concurrent(bound[i], e)).collect();
        (xs, ys)
    }

    fn bcl_moves(&mut self, pos: &Pos, k: usize) -> Vec<Formula> {
        let mut out = Vec::new();
        for i in 0..pos.le.len() {
            let lefts: Vec<NodeId> = self.m.exec(pos.l, pos.le[i]).collect();
            let rights: Vec<NodeId> = self.m.exec(pos.r, pos.re[i]).collect();
            for s1 in lefts {
                let answers = rights.iter().map(|&s2| Pos { l: s1, le: pos.le.clone(), r: s2, re: pos.re.clone() });
                if let Some(f) = self.answer_all(answers.collect::<Vec<_>>(), k) {
                    out.push(Formula::exec(var(i), f));
                }
            }
        }
        if k == 0 {
            return out;
        }
        for e1 in self.m.enabled_events(pos.l) {
            if pos.le.contains(&e1) {
                continue;
            }
            let (xs, ys) = self.profile(&pos.le, e1);
            let a = self.m.label(e1).clone();
            let cands = self.m.candidates(pos.r, &a, &pick(&xs, &pos.re), &pick(&ys, &pos.re));
            let mut le = pos.le.clone();
            le.push(e1);
            let answers: Vec<Pos> = cands
                .into_iter()
                .map(|e2| {
                    let mut re = pos.re.clone();
                    re.push(e2);
                    Pos { l: pos.l, le: le.clone(), r: pos.r, re }
                })
                .collect();
            if let Some(f) = self.answer_all(answers, k - 1) {
                out.push(Formula::bind(names(&xs), names(&ys), a, var(pos.le.len()), f));
            }
        }
        out
    }

    fn hpl_moves(&mut self, pos: &Pos, k: usize) -> Vec<Formula> {
        let mut out = Vec::new();
        if k == 0 {
            return out;
        }
        for &(e1, s1) in &self.m.enabled(pos.l).to_vec() {
            let (xs, ys) = self.profile(&pos.le, e1);
            let a = self.m.label(e1).clone();
            let mut le = pos.le.clone();
            le.push(e1);
            let mut answers = Vec::new();
            for e2 in self.m.candidates(pos.r, &a, &pick(&xs, &pos.re), &pick(&ys, &pos.re)) {
                for s2 in self.m.exec(pos.r, e2) {
                    let mut re = pos.re.clone();
                    re.push(e2);
                    answers.push(Pos { l: s1, le: le.clone(), r: s2, re });
                }
            }
            if let Some(f) = self.answer_all(answers, k - 1) {
                out.push(Formula::diamond(names(&xs), names(&ys), a, var(pos.le.len()), f));
            }
        }
        out
    }

    /// Pomset blocks: a chain of executed events on the left, with their
    /// relations to the earlier ones, matched by every chain on the right;
    /// after the block the formula is closed again.
    fn grow_block(
        &mut self,
        k: usize,
        c1: NodeId,
        seq1: Vec<EventId>,
        profiles: Vec<Profile>,
        ends: Vec<(NodeId, Vec<EventId>)>,
        out: &mut Vec<Formula>,
    ) {
        for &(e1, s1) in &self.m.enabled(c1).to_vec() {
            let (xs, ys) = self.profile(&seq1, e1);
            let a = self.m.label(e1).clone();
            let mut next = Vec::new();
            for (c2, seq2) in &ends {
                for e2 in self.m.candidates(*c2, &a, &pick(&xs, seq2), &pick(&ys, seq2)) {
                    for s2 in self.m.exec(*c2, e2) {
                        let mut q = seq2.clone();
                        q.push(e2);
                        next.push((s2, q));
                    }
                }
            }
            next.sort();
            next.dedup();
            let mut profiles2 = profiles.clone();
            profiles2.push((xs, ys, a));
            let rest = k - profiles2.len();
            let targets: BTreeSet<NodeId> = next.iter().map(|p| p.0).collect();
            let answers: Vec<Pos> = targets.iter().map(|&t| Pos::closed(s1, t)).collect();
            if let Some(f) = self.answer_all(answers, rest) {
                out.push(block(&profiles2, f));
            }
            if rest > 0 && !next.is_empty() {
                let mut seq = seq1.clone();
                seq.push(e1);
                self.grow_block(k, s1, seq, profiles2, next, out);
            }
        }
    }

    /// Step blocks: pairwise concurrent events bound at the left node and
    /// executed in order, against every matching set on the right.
    fn grow_step(&mut self, pos: &Pos, k: usize, seq1: Vec<EventId>, partial: Vec<Vec<EventId>>, out: &mut Vec<Formula>) {
        for e1 in self.m.enabled_events(pos.l) {
            if seq1.contains(&e1) || !seq1.iter().all(|&x| self.m.concurrent(x, e1)) {
                continue;
            }
            let a = self.m.label(e1).clone();
            let mut next = Vec::new();
            for p in &partial {
                for e2 in self.m.candidates(pos.r, &a, &[], p) {
                    let mut q = p.clone();
                    q.push(e2);
                    next.push(q);
                }
            }
            let mut seq = seq1.clone();
            seq.push(e1);
            let rest = k - seq.len();
            let targets: BTreeSet<NodeId> = next.iter().flat_map(|q| self.run(pos.r, q)).collect();
            let items: Vec<(ActionLabel, Var)> =
                seq.iter().enumerate().map(|(i, &e)| (self.m.label(e).clone(), var(i))).collect();
            for s1 in self.run(pos.l, &seq) {
                let answers: Vec<Pos> = targets.iter().map(|&t| Pos::closed(s1, t)).collect();
                if let Some(f) = self.answer_all(answers, rest) {
                    out.push(Formula::step(items.clone(), f));
                }
            }
            if rest > 0 && !next.is_empty() {
                self.grow_step(pos, k, seq, next, out);
            }
        }
    }

    /// Nodes reached by executing `seq` in order from `n`.
    fn run(&self, n: NodeId, seq: &[EventId]) -> Vec<NodeId> {
        let mut cur = vec![n];
        for &e in seq {
            let mut nxt: Vec<NodeId> = cur.iter().flat_map(|&c| self.m.exec(c, e)).collect();
            nxt.sort_unstable();
            nxt.dedup();
            cur = nxt;
        }
        cur
    }
}

fn block(profiles: &[Profile], body: Formula) -> Formula {
    profiles
        .iter()
        .enumerate()
        .rev()
        .fold(body, |f, (i, (xs, ys, a))| Formula::diamond(names(xs), names(ys), a.clone(), var(i), f))
}

/// A closed formula of `fragment` with at most `depth` nested binders that
/// `n1` satisfies and `n2` does not, preferring the shallowest and then
/// the smallest.
pub fn distinguishing_formula(
    cs: &ConfigStructure,
    n1: NodeId,
    n2: NodeId,
    fragment: Fragment,
    depth: usize,
) -> Option<Formula> {
    let mut s = Search::new(cs, fragment);
    let root = Pos::closed(n1, n2);
    (0..=depth).find_map(|k| s.dist(&root, k))
}

/// Whether `n1` and `n2` agree on every formula of `fragment` with at most
/// `depth` nested binders. Cut-off nodes below either configuration make a
/// difference found, or its absence, inconclusive.
pub fn logical_equiv(cs: &ConfigStructure, n1: NodeId, n2: NodeId, fragment: Fragment, depth: usize) -> Verdict {
    let mut s = Search::new(cs, fragment);
    let found = s.dist(&Pos::closed(n1, n2), depth).is_some() || s.dist(&Pos::closed(n2, n1), depth).is_some();
    let complete = !cs.frontier_below(n1) && !cs.frontier_below(n2);
    match (found, complete && !s.exhausted) {
        (true, _) if complete => Verdict::Fails,
        (false, true) => Verdict::Holds,
        _ => Verdict::Unknown,
    }
}
