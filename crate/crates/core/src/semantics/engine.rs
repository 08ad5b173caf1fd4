//! Ground derivation over the subjects reachable from a set of roots, and the
//! alternating fixpoint that yields the least three-valued stable model.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use super::{ExploreBounds, Justification};
use crate::pomset::Pomset;
use crate::rules::{GroundLiteral, Guard, LabelAssign, LabelExpr, Literal, Ptss, Rule};
use crate::term::{match_into, Substitution, Term};

pub(super) type TermId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(super) enum Fact {
    Trans(TermId, Pomset, TermId),
    Pred(TermId, String),
}

#[derive(Debug, Clone, Default)]
pub(super) struct FactSet {
    trans: HashMap<TermId, BTreeSet<(Pomset, TermId)>>,
    preds: HashMap<TermId, BTreeSet<String>>,
    pub(super) just: HashMap<Fact, Justification>,
    len: usize,
}

impl FactSet {
    fn contains(&self, f: &Fact) -> bool {
        match f {
            Fact::Trans(t, u, t2) => self.trans.get(t).is_some_and(|s| s.contains(&(u.clone(), *t2))),
            Fact::Pred(t, p) => self.preds.get(t).is_some_and(|s| s.contains(p)),
        }
    }

    fn insert(&mut self, f: Fact) -> bool {
        let new = match &f {
            Fact::Trans(t, u, t2) => self.trans.entry(*t).or_default().insert((u.clone(), *t2)),
            Fact::Pred(t, p) => self.preds.entry(*t).or_default().insert(p.clone()),
        };
        self.len += usize::from(new);
        new
    }

    pub(super) fn facts(&self) -> BTreeSet<Fact> {
        let mut out = BTreeSet::new();
        for (t, s) in &self.trans {
            for (u, t2) in s {
                out.insert(Fact::Trans(*t, u.clone(), *t2));
            }
        }
        for (t, s) in &self.preds {
            for p in s {
                out.insert(Fact::Pred(*t, p.clone()));
            }
        }
        out
    }

    fn same_facts(&self, other: &FactSet) -> bool {
        self.len == other.len && self.facts() == other.facts()
    }

    fn no_trans_headed(&self, t: TermId, head: &Pomset) -> bool {
        self.trans.get(&t).is_none_or(|s| s.iter().all(|(u, _)| u != head))
    }
}

pub(super) struct Engine<'a> {
    ptss: &'a Ptss,
    bounds: ExploreBounds,
    explore_states: bool,
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
    pub(super) labels: Vec<Pomset>,
    subjects: Vec<TermId>,
    is_subject: HashSet<TermId>,
    pub(super) states: BTreeMap<TermId, usize>,
    pub(super) frontier: BTreeSet<TermId>,
    deps: HashMap<TermId, BTreeSet<TermId>>,
    pub(super) exhausted: bool,
    pub(super) truncated: bool,
}

/// Pomsets a label variable may range over.
pub(super) fn label_universe(ptss: &Ptss, roots: &[Term]) -> Vec<Pomset> {
    let mut out: BTreeSet<Pomset> = BTreeSet::new();
    let add_expr = |e: &LabelExpr, out: &mut BTreeSet<Pomset>| out.extend(e.constants());
    for r in &ptss.rules {
        for l in r.premises.iter().chain(std::iter::once(&r.conclusion)) {
            if let Some(e) = l.label() {
                add_expr(e, &mut out);
            }
        }
        for g in &r.guards {
            match g {
                Guard::PriorityLt(a, b) | Guard::LabelEq(a, b) => {
                    add_expr(a, &mut out);
                    add_expr(b, &mut out);
                }
                Guard::IsStep(a) => add_expr(a, &mut out),
            }
        }
    }
    out.extend(ptss.priority.pomsets());
    for t in roots {
        for c in t.constants() {
            out.insert(c.step_head());
            out.insert(c);
        }
    }
    out.insert(Pomset::tau());
    out.insert(Pomset::sigma());
    out.remove(&Pomset::empty());
    out.into_iter().collect()
}

pub(super) fn has_sigma(p: &Pomset) -> bool {
    p.labels().iter().any(|l| l.is_sigma())
}

impl<'a> Engine<'a> {
    pub(super) fn new(ptss: &'a Ptss, roots: &[Term], bounds: ExploreBounds, explore_states: bool) -> Self {
        let mut e = Engine {
            ptss,
            bounds,
            explore_states,
            terms: Vec::new(),
            ids: HashMap::new(),
            labels: label_universe(ptss, roots),
            subjects: Vec::new(),
            is_subject: HashSet::new(),
            states: BTreeMap::new(),
            frontier: BTreeSet::new(),
            deps: HashMap::new(),
            exhausted: false,
            truncated: false,
        };
        for r in roots {
            let id = e.intern(r);
            e.states.entry(id).or_insert(0);
            e.add_subject(id);
        }
        e
    }

    pub(super) fn term(&self, id: TermId) -> &Term {
        &self.terms[id]
    }

    pub(super) fn subjects(&self) -> &[TermId] {
        &self.subjects
    }

    fn intern(&mut self, t: &Term) -> TermId {
        if let Some(&id) = self.ids.get(t) {
            return id;
        }
        self.terms.push(t.clone());
        self.ids.insert(t.clone(), self.terms.len() - 1);
        self.terms.len() - 1
    }

    fn subject_cap(&self) -> usize {
        self.bounds.max_states.saturating_mul(8).saturating_add(1024)
    }

    fn add_subject(&mut self, id: TermId) -> bool {
        if self.is_subject.contains(&id) {
            return false;
        }
        if self.subjects.len() >= self.subject_cap() {
            self.exhausted = true;
            return false;
        }
        self.is_subject.insert(id);
        self.subjects.push(id);
        true
    }

    pub(super) fn to_literal(&self, f: &Fact) -> GroundLiteral {
        match f {
            Fact::Trans(t, u, t2) => GroundLiteral::Trans(self.terms[*t].clone(), u.clone(), self.terms[*t2].clone()),
            Fact::Pred(t, p) => GroundLiteral::Pred(self.terms[*t].clone(), p.clone()),
        }
    }

    /// The derivation operator: the least set closed under all rule
    /// instances whose negative premises are not denied by `j` (all of them
    /// hold when `j` is absent). New subjects are discovered only when `j` is
    /// absent.
    pub(super) fn gamma(&mut self, j: Option<&FactSet>) -> FactSet {
        let discover = j.is_none();
        let mut cur = FactSet::default();
        let mut queue: VecDeque<TermId> = self.subjects.iter().copied().collect();
        let mut queued: HashSet<TermId> = queue.iter().copied().collect();
        while let Some(t) = queue.pop_front() {
            queued.remove(&t);
            let before = self.subjects.len();
            let derived = self.eval_subject(t, j, &cur, discover);
            for &s in &self.subjects[before..] {
                if queued.insert(s) {
                    queue.push_back(s);
                }
            }
            let mut changed = false;
            for (fact, just) in derived {
                if cur.contains(&fact) {
                    continue;
                }
                if discover {
                    if let Fact::Trans(src, _, tgt) = &fact {
                        self.reach(*src, *tgt, &cur, &mut queue, &mut queued);
                    }
                }
                cur.just.insert(fact.clone(), just);
                cur.insert(fact);
                changed = true;
            }
            if changed {
                if let Some(ds) = self.deps.get(&t) {
                    for &d in ds {
                        if queued.insert(d) {
                            queue.push_back(d);
                        }
                    }
                }
            }
        }
        cur
    }

    /// Records the move `src -> tgt` for exploration. A subject that turns
    /// into a state late already has facts, so its known targets are
    /// reached here too.
    fn reach(
        &mut self,
        src: TermId,
        tgt: TermId,
        cur: &FactSet,
        queue: &mut VecDeque<TermId>,
        queued: &mut HashSet<TermId>,
    ) {
        let mut todo = vec![(src, tgt)];
        while let Some((src, tgt)) = todo.pop() {
            let Some(&d) = self.states.get(&src) else { continue };
            if !self.explore_states || self.states.contains_key(&tgt) {
                if !self.states.contains_key(&tgt) {
                    self.frontier.insert(tgt);
                }
                continue;
            }
            if d < self.bounds.max_depth && self.states.len() < self.bounds.max_states {
                self.states.insert(tgt, d + 1);
                self.frontier.remove(&tgt);
                if self.add_subject(tgt) && queued.insert(tgt) {
                    queue.push_back(tgt);
                }
                if let Some(out) = cur.trans.get(&tgt) {
                    todo.extend(out.iter().map(|&(_, t2)| (tgt, t2)));
                }
            } else {
                self.frontier.insert(tgt);
                self.truncated = true;
            }
        }
    }

    /// Reads the facts of premise subject `s` on behalf of subject `t`.
    fn touch(&mut self, t: TermId, s: &Term, discover: bool) -> TermId {
        let id = self.intern(s);
        self.deps.entry(id).or_default().insert(t);
        if discover {
            self.add_subject(id);
        }
        id
    }

    fn eval_subject(&mut self, t: TermId, j: Option<&FactSet>, cur: &FactSet, discover: bool) -> Vec<(Fact, Justification)> {
        let mut out = Vec::new();
        let term = self.terms[t].clone();
        if self.ptss.pomset_axiom {
            if let Term::Const(u) = &term {
                let eps = self.intern(&Term::eps());
                out.push((Fact::Trans(t, u.clone(), eps), ("pomset".to_string(), vec![], vec![])));
            }
        }
        if self.ptss.fix_recursion && matches!(term, Term::Fix(..)) {
            let unf = term.unfold().expect("fix term");
            let u = self.touch(t, &unf, discover);
            if let Some(ts) = cur.trans.get(&u) {
                for (l, tgt) in ts {
                    let prem = Fact::Trans(u, l.clone(), *tgt);
                    out.push((Fact::Trans(t, l.clone(), *tgt), ("fix".to_string(), vec![prem], vec![])));
                }
            }
            if let Some(ps) = cur.preds.get(&u) {
                for p in ps {
                    let prem = Fact::Pred(u, p.clone());
                    out.push((Fact::Pred(t, p.clone()), ("fix".to_string(), vec![prem], vec![])));
                }
            }
        }
        let ptss = self.ptss;
        for rule in &ptss.rules {
            let mut s = Substitution::new();
            if !match_into(rule.source(), &term, &mut s) {
                continue;
            }
            let pending: Vec<usize> = (0..rule.premises.len()).filter(|&i| rule.premises[i].is_positive()).collect();
            let mut acc = Acc { t, j, cur, discover, rule, out: &mut out };
            self.search(&mut acc, pending, s, LabelAssign::new(), Vec::new());
        }
        out
    }

    fn search(&mut self, acc: &mut Acc, pending: Vec<usize>, s: Substitution, a: LabelAssign, chosen: Vec<Fact>) {
        let bound = |lit: &Literal| lit.subject().free_vars().iter().all(|x| s.contains_key(x));
        let Some(pos) = pending.iter().position(|&i| bound(&acc.rule.premises[i])) else {
            if pending.is_empty() {
                self.finish(acc, &s, &a, chosen);
            }
            return;
        };
        let mut rest = pending.clone();
        let i = rest.remove(pos);
        let prem = &acc.rule.premises[i];
        let subj = prem.subject().substitute(&s);
        let sid = self.touch(acc.t, &subj, acc.discover);
        match prem {
            Literal::PosTrans(_, lexpr, tgt) => {
                let Some(ts) = acc.cur.trans.get(&sid) else { return };
                let ts: Vec<(Pomset, TermId)> = ts.iter().cloned().collect();
                for (u, tid) in ts {
                    for a2 in self.match_label(lexpr, &u, &a) {
                        let mut s2 = s.clone();
                        if !match_into(tgt, &self.terms[tid], &mut s2) {
                            continue;
                        }
                        let mut c2 = chosen.clone();
                        c2.push(Fact::Trans(sid, u.clone(), tid));
                        self.search(acc, rest.clone(), s2, a2, c2);
                    }
                }
            }
            Literal::Pred(_, p) => {
                if acc.cur.preds.get(&sid).is_some_and(|ps| ps.contains(p)) {
                    let mut c2 = chosen;
                    c2.push(Fact::Pred(sid, p.clone()));
                    self.search(acc, rest, s, a, c2);
                }
            }
            _ => unreachable!("only positive premises are pending"),
        }
    }

    /// Assignments extending `a` under which `e` evaluates to `u`.
    fn match_label(&self, e: &LabelExpr, u: &Pomset, a: &LabelAssign) -> Vec<LabelAssign> {
        match e {
            LabelExpr::Var(x) => match a.get(x) {
                Some(v) => if v == u { vec![a.clone()] } else { vec![] },
                None if has_sigma(u) => vec![],
                None => {
                    let mut a2 = a.clone();
                    a2.insert(x.clone(), u.clone());
                    vec![a2]
                }
            },
            _ => {
                let free: Vec<String> = e.vars().into_iter().filter(|x| !a.contains_key(x)).collect();
                self.assignments(&free, a)
                    .into_iter()
                    .filter(|a2| e.eval(a2).is_ok_and(|v| &v == u))
                    .collect()
            }
        }
    }

    /// All extensions of `a` to `vars` over the label universe.
    fn assignments(&self, vars: &[String], a: &LabelAssign) -> Vec<LabelAssign> {
        let mut out = vec![a.clone()];
        for x in vars {
            let mut next = Vec::new();
            for base in &out {
                for l in self.labels.iter().filter(|l| !has_sigma(l)) {
                    let mut a2 = base.clone();
                    a2.insert(x.clone(), l.clone());
                    next.push(a2);
                }
            }
            out = next;
        }
        out
    }

    fn finish(&mut self, acc: &mut Acc, s: &Substitution, a: &LabelAssign, chosen: Vec<Fact>) {
        let rule = acc.rule;
        let universal = rule.universal_label_vars();
        let concl_free: Vec<String> = rule
            .conclusion
            .label_vars()
            .into_iter()
            .chain(rule.guards.iter().flat_map(Guard::vars))
            .filter(|x| !a.contains_key(x) && !universal.contains(x))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for a in self.assignments(&concl_free, a) {
            let plain_ok = rule
                .guards
                .iter()
                .filter(|g| g.vars().is_disjoint(&universal))
                .all(|g| g.holds(&a, &self.ptss.priority).unwrap_or(false));
            if !plain_ok {
                continue;
            }
            let Some(negs) = self.negatives(acc, s, &a, &universal) else { continue };
            let blocked = match acc.j {
                None => false,
                Some(j) => negs.iter().any(|n| self.denied(j, n)),
            };
            if blocked {
                continue;
            }
            let Ok(lit) = rule.conclusion.ground(s, &a) else { continue };
            let fact = match lit {
                GroundLiteral::Trans(_, u, tgt) => {
                    if u.len() > self.bounds.max_pomset_size {
                        self.truncated = true;
                        continue;
                    }
                    Fact::Trans(acc.t, u, self.intern(&tgt))
                }
                GroundLiteral::Pred(_, p) => Fact::Pred(acc.t, p),
                _ => continue,
            };
            let neg_lits = negs.iter().map(|n| n.lit.clone()).collect();
            acc.out.push((fact, (rule.name.clone(), chosen.clone(), neg_lits)));
        }
    }

    /// Ground negative premises of an instance, with universally read label
    /// variables expanded over the label universe; `None` if some
    /// premise cannot be closed.
    fn negatives(&mut self, acc: &Acc, s: &Substitution, a: &LabelAssign, universal: &BTreeSet<String>) -> Option<Vec<Neg>> {
        let rule = acc.rule;
        let uvars: Vec<String> = universal.iter().cloned().collect();
        let uguards: Vec<&Guard> = rule.guards.iter().filter(|g| !g.vars().is_disjoint(universal)).collect();
        let mut out = Vec::new();
        for prem in rule.premises.iter().filter(|p| !p.is_positive()) {
            let mine: Vec<String> = prem.label_vars().intersection(universal).cloned().collect();
            let expansions = if mine.is_empty() { vec![a.clone()] } else { self.assignments(&uvars, a) };
            let mut seen = BTreeSet::new();
            for a2 in expansions {
                if !mine.is_empty() && !uguards.iter().all(|g| g.holds(&a2, &self.ptss.priority).unwrap_or(false)) {
                    continue;
                }
                let lit = prem.ground(s, &a2).ok()?;
                if !seen.insert(lit.clone()) {
                    continue;
                }
                let sid = self.touch(acc.t, lit.subject(), acc.discover);
                let tgt = match &lit {
                    GroundLiteral::NegTransTo(_, _, t2) => Some(self.intern(t2)),
                    _ => None,
                };
                out.push(Neg { subject: sid, target: tgt, lit });
            }
        }
        Some(out)
    }

    fn denied(&self, j: &FactSet, n: &Neg) -> bool {
        match &n.lit {
            GroundLiteral::NegTrans(_, u) => !j.no_trans_headed(n.subject, &u.step_head()),
            GroundLiteral::NegTransTo(_, u, _) => j.contains(&Fact::Trans(n.subject, u.clone(), n.target.expect("target"))),
            GroundLiteral::NegPred(_, p) => j.contains(&Fact::Pred(n.subject, p.clone())),
            _ => false,
        }
    }

    /// Least three-valued stable model by alternating fixpoint: returns
    /// (K, U, U0): K the true facts, U \ K the unknown ones, U0 everything
    /// derivable when negative premises are ignored.
    pub(super) fn alternating(&mut self) -> (FactSet, FactSet, FactSet) {
        let u0 = self.gamma(None);
        let mut u = u0.clone();
        loop {
            let k = self.gamma(Some(&u));
            let u2 = self.gamma(Some(&k));
            if u2.same_facts(&u) {
                return (k, u, u0);
            }
            u = u2;
        }
    }
}

struct Acc<'r, 'o> {
    t: TermId,
    j: Option<&'r FactSet>,
    cur: &'r FactSet,
    discover: bool,
    rule: &'r Rule,
    out: &'o mut Vec<(Fact, Justification)>,
}

struct Neg {
    subject: TermId,
    target: Option<TermId>,
    lit: GroundLiteral,
}
