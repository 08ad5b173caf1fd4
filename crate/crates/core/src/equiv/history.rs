//! History-preserving games over the posetal product of a configuration
//! structure: hp and hhp bisimulations and simulations, their ready
//! variants, and branching hp/hhp bisimulation.
//!
//! Candidate triples are generated from the root triple by matched moves
//! (and, for hereditary games, by restriction to sub-configurations); the
//! greatest relation is then found by deleting triples that violate a
//! clause until nothing changes. Triples at frontier nodes keep their
//! transfer clauses unchecked, so a deletion is always a genuine failure.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{Outcome, Triple, Witness};
use crate::plts::{ConfigStructure, EventId, NodeId};
use crate::verdict::Verdict;

/// Which clauses a history-preserving game checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Game {
    /// Transfer in both directions (bisimulation) or left to right only.
    pub both: bool,
    /// Ready clauses: refused labels and absent predicates carry over.
    pub ready: bool,
    /// Downward closure.
    pub hereditary: bool,
    /// τ events are unobservable and may be absorbed.
    pub branching: bool,
}

impl Game {
    pub fn bisim(hereditary: bool) -> Game {
        Game { both: true, ready: false, hereditary, branching: false }
    }

    pub fn sim(hereditary: bool, ready: bool) -> Game {
        Game { both: false, ready, hereditary, branching: false }
    }

    pub fn branching(hereditary: bool) -> Game {
        Game { both: true, ready: false, hereditary, branching: true }
    }
}

type Map = Vec<(EventId, EventId)>;
type Key = (NodeId, NodeId, Map);

/// A move of one side and the ways the other side may answer it.
enum Answer {
    /// An unobservable move; the triple with the mover advanced must stay.
    Silent(usize),
    /// Options (intermediate triple after τ moves of the answerer, target
    /// triple); one option with both alive suffices.
    Match(Vec<(Option<usize>, usize)>),
}

/// A predicate of one side and the triples where the other side shows it.
struct PredReq(Vec<Option<usize>>);

#[derive(Default)]
struct Clauses {
    left: Vec<Answer>,
    right: Vec<Answer>,
    left_preds: Vec<PredReq>,
    right_preds: Vec<PredReq>,
    static_ok: bool,
    subs: Vec<usize>,
}

/// The part of the structure a game runs on: configurations at or above
/// the starting pair. Events of the starting configurations outside the
/// starting map form the floor; maps never cover them.
struct Frame {
    floor: [BTreeSet<EventId>; 2],
    above: [BTreeSet<NodeId>; 2],
}

impl Frame {
    fn new(cs: &ConfigStructure, start: &Triple) -> Frame {
        let side = |n: NodeId, mapped: BTreeSet<EventId>| {
            let floor = cs.node(n).events.iter().copied().filter(|e| !mapped.contains(e)).collect();
            let mut above: BTreeSet<NodeId> = cs.descendants(n).into_iter().collect();
            above.insert(n);
            (floor, above)
        };
        let (f1, a1) = side(start.left, start.map.iter().map(|p| p.0).collect());
        let (f2, a2) = side(start.right, start.map.iter().map(|p| p.1).collect());
        Frame { floor: [f1, f2], above: [a1, a2] }
    }
}

struct Solver<'a> {
    cs: &'a ConfigStructure,
    game: Game,
    frame: Frame,
    keys: Vec<Key>,
    ids: HashMap<Key, usize>,
    clauses: Vec<Option<Clauses>>,
    queue: VecDeque<usize>,
    tau_reach: HashMap<NodeId, Vec<NodeId>>,
    subnodes: HashMap<NodeId, Vec<NodeId>>,
}

impl<'a> Solver<'a> {
    fn new(cs: &'a ConfigStructure, game: Game, start: &Triple) -> Self {
        Solver {
            cs,
            game,
            frame: Frame::new(cs, start),
            keys: Vec::new(),
            ids: HashMap::new(),
            clauses: Vec::new(),
            queue: VecDeque::new(),
            tau_reach: HashMap::new(),
            subnodes: HashMap::new(),
        }
    }

    fn intern(&mut self, key: Key) -> usize {
        if let Some(&i) = self.ids.get(&key) {
            return i;
        }
        let i = self.keys.len();
        self.ids.insert(key.clone(), i);
        self.keys.push(key);
        self.clauses.push(None);
        self.queue.push_back(i);
        i
    }

    fn visible(&self, e: EventId) -> bool {
        !self.game.branching || !self.cs.label(e).is_tau()
    }

    /// Nodes reachable by τ-only transitions, the node itself first.
    fn reach(&mut self, n: NodeId) -> Vec<NodeId> {
        if !self.game.branching {
            return vec![n];
        }
        if let Some(r) = self.tau_reach.get(&n) {
            return r.clone();
        }
        let mut seen = vec![n];
        let mut k = 0;
        while k < seen.len() {
            let m = seen[k];
            k += 1;
            for t in &self.cs.node(m).out {
                if t.label.is_tau_only() && !seen.contains(&t.target) {
                    seen.push(t.target);
                }
            }
        }
        self.tau_reach.insert(n, seen.clone());
        seen
    }

    /// Proper sub-configurations of `n`.
    fn subs_of(&mut self, n: NodeId) -> Vec<NodeId> {
        if let Some(s) = self.subnodes.get(&n) {
            return s.clone();
        }
        let out = self.cs.ancestors(n);
        self.subnodes.insert(n, out.clone());
        out
    }

    /// All ways to extend `f` by a bijection between the visible events
    /// of two moves that preserves labels and causality.
    fn extensions(&self, f: &Map, x1: &[EventId], x2: &[EventId]) -> Vec<Map> {
        let x1: Vec<EventId> = x1.iter().copied().filter(|&e| self.visible(e)).collect();
        let x2: Vec<EventId> = x2.iter().copied().filter(|&e| self.visible(e)).collect();
        if x1.len() != x2.len() {
            return vec![];
        }
        let mut out = Vec::new();
        let mut assign: Vec<(EventId, EventId)> = Vec::new();
        let mut used = vec![false; x2.len()];
        self.extend_rec(f, &x1, &x2, &mut assign, &mut used, &mut out);
        out
    }

    fn extend_rec(
        &self,
        f: &Map,
        x1: &[EventId],
        x2: &[EventId],
        assign: &mut Vec<(EventId, EventId)>,
        used: &mut [bool],
        out: &mut Vec<Map>,
    ) {
        let k = assign.len();
        if k == x1.len() {
            let mut g = f.clone();
            g.extend(assign.iter().copied());
            g.sort_unstable();
            out.push(g);
            return;
        }
        let a = x1[k];
        for (j, &b) in x2.iter().enumerate() {
            if used[j] || self.cs.label(a) != self.cs.label(b) {
                continue;
            }
            let cs = self.cs;
            let consistent = f.iter().chain(assign.iter()).all(|&(c, d)| {
                cs.less(c, a) == cs.less(d, b) && cs.less(a, c) == cs.less(b, d)
            });
            if !consistent {
                continue;
            }
            used[j] = true;
            assign.push((a, b));
            self.extend_rec(f, x1, x2, assign, used, out);
            assign.pop();
            used[j] = false;
        }
    }

    /// Answers of `other` to every move of `mover`. With `flip` the mover
    /// is the right component.
    fn answers(&mut self, mover: NodeId, other: NodeId, f: &Map, flip: bool) -> Vec<Answer> {
        let cs = self.cs;
        let fi: Map = if flip { f.iter().map(|&(a, b)| (b, a)).collect() } else { f.clone() };
        let mut out = Vec::new();
        for t1 in &cs.node(mover).out {
            if self.game.branching && t1.label.is_tau_only() {
                let key = if flip { (other, t1.target, f.clone()) } else { (t1.target, other, f.clone()) };
                out.push(Answer::Silent(self.intern(key)));
                continue;
            }
            let mut opts = Vec::new();
            for o0 in self.reach(other) {
                let pre = if o0 == other {
                    None
                } else {
                    let key = if flip { (o0, mover, f.clone()) } else { (mover, o0, f.clone()) };
                    Some(self.intern(key))
                };
                for t2 in &cs.node(o0).out {
                    if t2.label != t1.label {
                        continue;
                    }
                    for g in self.extensions(&fi, &t1.events, &t2.events) {
                        let key = if flip {
                            let mut back: Map = g.iter().map(|&(a, b)| (b, a)).collect();
                            back.sort_unstable();
                            (t2.target, t1.target, back)
                        } else {
                            (t1.target, t2.target, g)
                        };
                        let tgt = self.intern(key);
                        opts.push((pre, tgt));
                    }
                }
            }
            out.push(Answer::Match(opts));
        }
        out
    }

    fn pred_reqs(&mut self, holder: NodeId, other: NodeId, f: &Map, flip: bool) -> Vec<PredReq> {
        let preds: Vec<String> = self.cs.node(holder).predicates.iter().cloned().collect();
        let mut out = Vec::new();
        for q in preds {
            let mut opts = Vec::new();
            for o0 in self.reach(other) {
                if !self.cs.node(o0).predicates.contains(&q) {
                    continue;
                }
                if o0 == other {
                    opts.push(None);
                } else {
                    let key = if flip { (o0, holder, f.clone()) } else { (holder, o0, f.clone()) };
                    opts.push(Some(self.intern(key)));
                }
            }
            out.push(PredReq(opts));
        }
        out
    }

    /// Sub-triples below `(a, f, b)`: configurations inside each side whose
    /// visible parts correspond under `f`.
    fn sub_triples(&mut self, a: NodeId, b: NodeId, f: &Map) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cands_a = self.subs_of(a);
        cands_a.push(a);
        cands_a.retain(|c| self.frame.above[0].contains(c));
        for c1 in cands_a {
            let e1: BTreeSet<EventId> = self.cs.node(c1).events.iter().copied().collect();
            let f2: Map = f.iter().copied().filter(|(x, _)| e1.contains(x)).collect();
            let image: BTreeSet<EventId> = f2.iter().map(|&(_, y)| y).collect();
            let mut targets = self.subs_of(b);
            targets.push(b);
            targets.retain(|&c2| {
                let vis: BTreeSet<EventId> = self
                    .cs
                    .node(c2)
                    .events
                    .iter()
                    .copied()
                    .filter(|&e| self.visible(e) && !self.frame.floor[1].contains(&e))
                    .collect();
                self.frame.above[1].contains(&c2) && vis == image
            });
            for c2 in targets {
                if (c1, c2) != (a, b) {
                    let k = (c1, c2, f2.clone());
                    out.push(self.intern(k));
                }
            }
        }
        out
    }

    fn expand(&mut self, i: usize) {
        let (a, b, f) = self.keys[i].clone();
        let (na, nb) = (self.cs.node(a), self.cs.node(b));
        let mut c = Clauses { static_ok: true, ..Default::default() };
        if self.game.ready {
            let la: BTreeSet<_> = na.out.iter().map(|t| &t.label).collect();
            let lb: BTreeSet<_> = nb.out.iter().map(|t| &t.label).collect();
            c.static_ok = na.predicates == nb.predicates && lb.is_subset(&la);
        } else if !self.game.branching {
            c.static_ok =
                if self.game.both { na.predicates == nb.predicates } else { na.predicates.is_subset(&nb.predicates) };
        } else {
            c.left_preds = self.pred_reqs(a, b, &f, false);
            c.right_preds = self.pred_reqs(b, a, &f, true);
        }
        c.left = self.answers(a, b, &f, false);
        if self.game.both {
            c.right = self.answers(b, a, &f, true);
        }
        if self.game.hereditary {
            c.subs = self.sub_triples(a, b, &f);
        }
        self.clauses[i] = Some(c);
    }

    fn close(&mut self) {
        while let Some(i) = self.queue.pop_front() {
            if self.clauses[i].is_none() {
                self.expand(i);
            }
        }
    }

    fn optimistic(&self, i: usize) -> bool {
        let (a, b, _) = &self.keys[i];
        self.cs.node(*a).frontier || self.cs.node(*b).frontier
    }

    /// Deletes violating triples until stable; returns the survivors.
    fn refine(&self) -> Vec<bool> {
        let mut alive = vec![true; self.keys.len()];
        loop {
            let mut changed = false;
            for i in 0..self.keys.len() {
                if alive[i] && !self.holds(i, &alive) {
                    alive[i] = false;
                    changed = true;
                }
            }
            if !changed {
                return alive;
            }
        }
    }

    fn holds(&self, i: usize, alive: &[bool]) -> bool {
        let c = self.clauses[i].as_ref().expect("closed");
        if c.subs.iter().any(|&s| !alive[s]) {
            return false;
        }
        if self.optimistic(i) {
            return true;
        }
        let answered = |ans: &Answer| match ans {
            Answer::Silent(t) => alive[*t],
            Answer::Match(opts) => opts.iter().any(|&(pre, t)| pre.is_none_or(|p| alive[p]) && alive[t]),
        };
        let shown = |r: &PredReq| r.0.iter().any(|o| o.is_none_or(|p| alive[p]));
        c.static_ok
            && c.left.iter().all(answered)
            && c.right.iter().all(answered)
            && c.left_preds.iter().all(shown)
            && c.right_preds.iter().all(shown)
    }

    fn complete(&self, n1: NodeId, n2: NodeId) -> bool {
        !self.cs.frontier_below(n1) && !self.cs.frontier_below(n2)
    }

    fn triples(&self, alive: &[bool]) -> Vec<Triple> {
        let mut out: Vec<Triple> = (0..self.keys.len())
            .filter(|&i| alive[i])
            .map(|i| {
                let (left, right, map) = self.keys[i].clone();
                Triple { left, right, map }
            })
            .collect();
        out.sort();
        out
    }
}

/// Decides a history-preserving game between two configurations (usually
/// roots) of `cs`.
pub fn history_game(cs: &ConfigStructure, n1: NodeId, n2: NodeId, game: Game) -> Outcome {
    history_game_from(cs, &Triple { left: n1, right: n2, map: Vec::new() }, game)
}

/// The same game started from an arbitrary triple, whose map must be an
/// isomorphism between the two configurations.
pub fn history_game_from(cs: &ConfigStructure, start: &Triple, game: Game) -> Outcome {
    let (n1, n2) = (start.left, start.right);
    let mut map = start.map.clone();
    map.sort_unstable();
    let mut s = Solver::new(cs, game, start);
    let root = s.intern((n1, n2, map));
    s.close();
    let alive = s.refine();
    let verdict = Verdict::bounded(alive[root], s.complete(n1, n2));
    let witness = if alive[root] { Witness::Posetal { triples: s.triples(&alive) } } else { Witness::None };
    Outcome { verdict, witness }
}

/// Branching hp/hhp bisimilarity of two configurations; the rooted variant
/// requires every initial move to be answered by an identical one (τ
/// included) with the targets branching bisimilar, and predicates to agree.
pub(super) fn branching_game(cs: &ConfigStructure, n1: NodeId, n2: NodeId, hereditary: bool, rooted: bool) -> Outcome {
    let mut s = Solver::new(cs, Game::branching(hereditary), &Triple { left: n1, right: n2, map: Vec::new() });
    let root = s.intern((n1, n2, Vec::new()));
    if !rooted {
        s.close();
        let alive = s.refine();
        let verdict = Verdict::bounded(alive[root], s.complete(n1, n2));
        let witness = if alive[root] { Witness::Posetal { triples: s.triples(&alive) } } else { Witness::None };
        return Outcome { verdict, witness };
    }
    // root clauses: strong matching, including τ moves
    let mut left: Vec<Vec<usize>> = Vec::new();
    let mut right: Vec<Vec<usize>> = vec![Vec::new(); cs.node(n2).out.len()];
    for t1 in &cs.node(n1).out {
        let mut opts = Vec::new();
        for (j, t2) in cs.node(n2).out.iter().enumerate() {
            if t1.label != t2.label {
                continue;
            }
            for g in s.extensions(&Vec::new(), &t1.events, &t2.events) {
                let k = s.intern((t1.target, t2.target, g));
                opts.push(k);
                right[j].push(k);
            }
        }
        left.push(opts);
    }
    s.close();
    let alive = s.refine();
    let preds_ok = cs.node(n1).predicates == cs.node(n2).predicates;
    let ok = cs.node(n1).frontier
        || cs.node(n2).frontier
        || (preds_ok
            && left.iter().all(|o| o.iter().any(|&k| alive[k]))
            && right.iter().all(|o| o.iter().any(|&k| alive[k])));
    let verdict = Verdict::bounded(ok, s.complete(n1, n2));
    let witness = if ok { Witness::Posetal { triples: s.triples(&alive) } } else { Witness::None };
    Outcome { verdict, witness }
}

/// Re-checks a posetal relation against the raw clauses of `game`: each
/// map is an order isomorphism between (the visible parts of) its
/// configurations, transfers are answered inside the relation, predicate
/// and ready clauses hold, and, for hereditary games, every sub-triple in
/// the posetal product above `start` is present. Frontier configurations
/// are exempt from transfer clauses.
pub fn check_posetal_relation(cs: &ConfigStructure, start: &Triple, triples: &[Triple], game: Game) -> bool {
    let set: BTreeSet<(NodeId, NodeId, Map)> = triples.iter().map(|t| (t.left, t.right, t.map.clone())).collect();
    let frame = Frame::new(cs, start);
    let visible = |e: EventId| !game.branching || !cs.label(e).is_tau();
    let vis_side = |n: NodeId, side: usize| -> BTreeSet<EventId> {
        cs.node(n).events.iter().copied().filter(|&e| visible(e) && !frame.floor[side].contains(&e)).collect()
    };
    let vis = |n: NodeId| vis_side(n, 1);
    let is_iso = |t: &(NodeId, NodeId, Map)| {
        let dom: BTreeSet<EventId> = t.2.iter().map(|p| p.0).collect();
        let img: BTreeSet<EventId> = t.2.iter().map(|p| p.1).collect();
        frame.above[0].contains(&t.0)
            && frame.above[1].contains(&t.1)
            && dom == vis_side(t.0, 0)
            && img == vis_side(t.1, 1)
            && t.2.iter().all(|&(a, b)| cs.label(a) == cs.label(b))
            && t.2.iter().all(|&(a, b)| t.2.iter().all(|&(c, d)| cs.less(a, c) == cs.less(b, d)))
    };
    let tau_reach = |n: NodeId| -> Vec<NodeId> {
        let mut seen = vec![n];
        if game.branching {
            let mut k = 0;
            while k < seen.len() {
                for t in &cs.node(seen[k]).out {
                    if t.label.is_tau_only() && !seen.contains(&t.target) {
                        seen.push(t.target);
                    }
                }
                k += 1;
            }
        }
        seen
    };
    // does the triple extend `f` by the new events of the two moves?
    let extends = |f: &Map, g: &Map, x1: &[EventId], x2: &[EventId]| {
        let mut want: BTreeSet<(EventId, EventId)> = f.iter().copied().collect();
        let ne: Vec<(EventId, EventId)> = g.iter().copied().filter(|p| !f.contains(p)).collect();
        let (n1, n2): (BTreeSet<EventId>, BTreeSet<EventId>) = (ne.iter().map(|p| p.0).collect(), ne.iter().map(|p| p.1).collect());
        want.extend(ne.iter().copied());
        want == g.iter().copied().collect()
            && n1 == x1.iter().copied().filter(|&e| visible(e)).collect()
            && n2 == x2.iter().copied().filter(|&e| visible(e)).collect()
    };
    let flip = |m: &Map| -> Map {
        let mut v: Map = m.iter().map(|&(a, b)| (b, a)).collect();
        v.sort_unstable();
        v
    };
    let member = |a: NodeId, b: NodeId, f: &Map, flipped: bool| {
        if flipped {
            set.contains(&(b, a, flip(f)))
        } else {
            set.contains(&(a, b, f.clone()))
        }
    };
    let transfer = |a: NodeId, b: NodeId, f: &Map, flipped: bool| {
        cs.node(a).out.iter().all(|t1| {
            if game.branching && t1.label.is_tau_only() {
                return member(t1.target, b, f, flipped);
            }
            tau_reach(b).into_iter().any(|b0| {
                (b0 == b || member(a, b0, f, flipped))
                    && cs.node(b0).out.iter().any(|t2| {
                        t2.label == t1.label
                            && set.iter().any(|(l, r, g)| {
                                let (l, r, g) = if flipped { (*r, *l, flip(g)) } else { (*l, *r, g.clone()) };
                                l == t1.target && r == t2.target && extends(f, &g, &t1.events, &t2.events)
                            })
                    })
            })
        })
    };
    let preds = |a: NodeId, b: NodeId, f: &Map, flipped: bool| {
        cs.node(a).predicates.iter().all(|q| {
            tau_reach(b).into_iter().any(|b0| (b0 == b || member(a, b0, f, flipped)) && cs.node(b0).predicates.contains(q))
        })
    };
    set.iter().all(|t| {
        let (a, b, f) = (t.0, t.1, &t.2);
        if !is_iso(t) {
            return false;
        }
        if game.hereditary {
            let below = |n: NodeId, side: usize| {
                let mut v = cs.ancestors(n);
                v.push(n);
                v.retain(|c| frame.above[side].contains(c));
                v
            };
            for c1 in below(a, 0) {
                let e1 = &cs.node(c1).events;
                let f2: Map = f.iter().copied().filter(|(x, _)| e1.contains(x)).collect();
                let img: BTreeSet<EventId> = f2.iter().map(|p| p.1).collect();
                for c2 in below(b, 1) {
                    if vis(c2) == img && !set.contains(&(c1, c2, f2.clone())) {
                        return false;
                    }
                }
            }
        }
        if cs.node(a).frontier || cs.node(b).frontier {
            return true;
        }
        let static_ok = if game.ready {
            let la: BTreeSet<_> = cs.node(a).out.iter().map(|t| &t.label).collect();
            let lb: BTreeSet<_> = cs.node(b).out.iter().map(|t| &t.label).collect();
            cs.node(a).predicates == cs.node(b).predicates && lb.is_subset(&la)
        } else if game.branching {
            preds(a, b, f, false) && preds(b, a, &flip(f), true)
        } else if game.both {
            cs.node(a).predicates == cs.node(b).predicates
        } else {
            cs.node(a).predicates.is_subset(&cs.node(b).predicates)
        };
        static_ok && transfer(a, b, f, false) && (!game.both || transfer(b, a, &flip(f), true))
    })
}
