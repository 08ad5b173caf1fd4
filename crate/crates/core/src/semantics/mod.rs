//! Transitions provable from a PTSS, least three-valued stable models,
//! well-supported provability and stratification checks.

mod engine;
mod strat;
mod verify;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::plts::{Plts, State};
use crate::pomset::Pomset;
use crate::rules::{GroundLiteral, Ptss};
use crate::term::Term;

pub use strat::{check_stratification, check_stratification_with, Measure, StratificationReport, Violation};
pub use verify::{verify_model, ModelCheck};

use engine::{Engine, Fact, FactSet};

/// (rule name, positive premises, negative premises) of a first derivation.
type Justification = (String, Vec<Fact>, Vec<GroundLiteral>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExploreBounds {
    pub max_states: usize,
    pub max_depth: usize,
    pub max_pomset_size: usize,
}

impl Default for ExploreBounds {
    fn default() -> Self {
        ExploreBounds { max_states: 10_000, max_depth: 64, max_pomset_size: 64 }
    }
}

impl ExploreBounds {
    pub fn new(max_states: usize, max_depth: usize) -> Self {
        ExploreBounds { max_states, max_depth, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("term `{0}` is not closed")]
    Open(String),
    #[error("exploration bounds exhausted: {0}")]
    BoundExhausted(String),
    #[error("the specification leaves {0} unknown; no PLTS is determined")]
    Incomplete(String),
    #[error("computed model fails re-verification: {0}")]
    Unverified(String),
}

/// Truth value of a ground literal in a three-valued model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    True,
    Unknown,
    False,
}

/// A least three-valued stable model over an explored ground universe.
#[derive(Debug, Clone)]
pub struct ThreeValuedModel {
    /// Positive literals that hold.
    pub c: BTreeSet<GroundLiteral>,
    /// Positive literals left unknown.
    pub v: BTreeSet<GroundLiteral>,
    /// Everything derivable with negative premises read optimistically; the
    /// rest is false.
    pub universe: BTreeSet<GroundLiteral>,
    pub subjects: BTreeSet<Term>,
    pub roots: Vec<Term>,
    /// Pomsets label variables ranged over.
    pub labels: Vec<Pomset>,
    /// Explored states with their distance from a root.
    pub states: BTreeMap<Term, usize>,
    /// Targets reached but not explored.
    pub frontier: BTreeSet<Term>,
    pub truncated: bool,
    justification: HashMap<GroundLiteral, (String, Vec<GroundLiteral>, Vec<GroundLiteral>)>,
}

impl ThreeValuedModel {
    /// No unknown literals remain.
    pub fn positive_after_reduction(&self) -> bool {
        self.v.is_empty()
    }

    pub fn truth(&self, lit: &GroundLiteral) -> Truth {
        if self.c.contains(lit) {
            Truth::True
        } else if self.v.contains(lit) {
            Truth::Unknown
        } else {
            Truth::False
        }
    }

    /// True literals with subject `t`.
    pub fn literals_of(&self, t: &Term) -> BTreeSet<GroundLiteral> {
        self.c.iter().filter(|l| l.subject() == t).cloned().collect()
    }

    pub fn unknown_of(&self, t: &Term) -> BTreeSet<GroundLiteral> {
        self.v.iter().filter(|l| l.subject() == t).cloned().collect()
    }

    /// A proof tree for a true literal, built from first derivations.
    pub fn proof(&self, lit: &GroundLiteral) -> Option<Proof> {
        let (rule, pos, neg) = self.justification.get(lit)?;
        let premises = pos.iter().map(|p| self.proof(p)).collect::<Option<Vec<_>>>()?;
        Some(Proof { conclusion: lit.clone(), rule: rule.clone(), premises, negative: neg.clone() })
    }
}

/// A proof tree: positive premises have subproofs, negative ones are leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub conclusion: GroundLiteral,
    pub rule: String,
    pub premises: Vec<Proof>,
    pub negative: Vec<GroundLiteral>,
}

impl Proof {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Proof::size).sum::<usize>()
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        writeln!(f, "{:indent$}{}  [{}]", "", self.conclusion, self.rule, indent = indent)?;
        for p in &self.premises {
            p.write(f, indent + 2)?;
        }
        for n in &self.negative {
            writeln!(f, "{:indent$}{}", "", n, indent = indent + 2)?;
        }
        Ok(())
    }
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

fn check_closed(t: &Term) -> Result<(), SemanticsError> {
    if t.is_closed() {
        Ok(())
    } else {
        Err(SemanticsError::Open(t.to_string()))
    }
}

fn compute(ptss: &Ptss, roots: &[Term], bounds: ExploreBounds, explore: bool) -> Result<ThreeValuedModel, SemanticsError> {
    for r in roots {
        check_closed(r)?;
    }
    let mut eng = Engine::new(ptss, roots, bounds, explore);
    let (k, u, u0) = eng.alternating();
    if eng.exhausted {
        return Err(SemanticsError::BoundExhausted(format!(
            "more than {} ground subjects",
            bounds.max_states.saturating_mul(8).saturating_add(1024)
        )));
    }
    Ok(model_from(&eng, roots, &k, &u, &u0))
}

fn model_from(eng: &Engine, roots: &[Term], k: &FactSet, u: &FactSet, u0: &FactSet) -> ThreeValuedModel {
    let kf = k.facts();
    let uf = u.facts();
    let c: BTreeSet<GroundLiteral> = kf.iter().map(|f| eng.to_literal(f)).collect();
    let v = uf.difference(&kf).map(|f| eng.to_literal(f)).collect();
    let justification = k
        .just
        .iter()
        .filter(|(f, _)| kf.contains(f))
        .map(|(f, (r, pos, neg))| {
            (eng.to_literal(f), (r.clone(), pos.iter().map(|p| eng.to_literal(p)).collect(), neg.clone()))
        })
        .collect();
    ThreeValuedModel {
        c,
        v,
        universe: u0.facts().iter().map(|f| eng.to_literal(f)).collect(),
        subjects: eng.subjects().iter().map(|&s| eng.term(s).clone()).collect(),
        roots: roots.to_vec(),
        labels: eng.labels.clone(),
        states: eng.states.iter().map(|(&s, &d)| (eng.term(s).clone(), d)).collect(),
        frontier: eng.frontier.iter().map(|&s| eng.term(s).clone()).collect(),
        truncated: eng.truncated,
        justification,
    }
}

/// Least three-valued stable model over the ground universe reachable from
/// `roots`, re-verified against both defining conditions.
pub fn stable_model(ptss: &Ptss, roots: &[Term], bounds: ExploreBounds) -> Result<ThreeValuedModel, SemanticsError> {
    let m = compute(ptss, roots, bounds, true)?;
    let check = verify_model(ptss, &m);
    if !check.ok() {
        return Err(SemanticsError::Unverified(check.to_string()));
    }
    Ok(m)
}

/// Model restricted to what one term needs: only the term itself is
/// explored as a state.
pub fn model_for(ptss: &Ptss, t: &Term, bounds: ExploreBounds) -> Result<ThreeValuedModel, SemanticsError> {
    compute(ptss, std::slice::from_ref(t), bounds, false)
}

/// Provable literals whose subject is `t`.
pub fn derive_transitions(ptss: &Ptss, t: &Term, bounds: ExploreBounds) -> Result<BTreeSet<GroundLiteral>, SemanticsError> {
    Ok(model_for(ptss, t, bounds)?.literals_of(t))
}

/// Provable literals about `t` with a proof tree each.
pub fn derive_with_proofs(ptss: &Ptss, t: &Term, bounds: ExploreBounds) -> Result<Vec<(GroundLiteral, Proof)>, SemanticsError> {
    let m = model_for(ptss, t, bounds)?;
    Ok(m.literals_of(t)
        .into_iter()
        .map(|l| {
            let p = m.proof(&l).expect("true literals are justified");
            (l, p)
        })
        .collect())
}

/// Well-supported provability, read off the least three-valued stable model.
pub fn ws_provable(ptss: &Ptss, lit: &GroundLiteral, bounds: ExploreBounds) -> Result<bool, SemanticsError> {
    let m = model_for(ptss, lit.subject(), bounds)?;
    let known = |l: &GroundLiteral| m.c.contains(l) || m.v.contains(l);
    Ok(match lit {
        GroundLiteral::Trans(..) | GroundLiteral::Pred(..) => m.c.contains(lit),
        GroundLiteral::NegTrans(t, u) => {
            let head = u.step_head();
            !m.c.iter().chain(m.v.iter()).any(|l| matches!(l, GroundLiteral::Trans(s, w, _) if s == t && *w == head))
        }
        GroundLiteral::NegTransTo(t, u, t2) => !known(&GroundLiteral::Trans(t.clone(), u.clone(), t2.clone())),
        GroundLiteral::NegPred(t, p) => !known(&GroundLiteral::Pred(t.clone(), p.clone())),
    })
}

/// The PLTS reachable from `t0` through true transitions. States beyond
/// the bounds are kept as frontier states and the result is flagged
/// truncated.
pub fn build_plts(ptss: &Ptss, t0: &Term, bounds: ExploreBounds) -> Result<Plts, SemanticsError> {
    let m = compute(ptss, std::slice::from_ref(t0), bounds, true)?;
    plts_of_model(&m, t0)
}

pub fn plts_of_model(m: &ThreeValuedModel, t0: &Term) -> Result<Plts, SemanticsError> {
    let mut trans: HashMap<&Term, Vec<(&Pomset, &Term)>> = HashMap::new();
    let mut preds: HashMap<&Term, Vec<&str>> = HashMap::new();
    for l in &m.c {
        match l {
            GroundLiteral::Trans(s, u, t) => trans.entry(s).or_default().push((u, t)),
            GroundLiteral::Pred(s, p) => preds.entry(s).or_default().push(p),
            _ => {}
        }
    }
    let mut index: HashMap<&Term, usize> = HashMap::new();
    let mut order: Vec<&Term> = vec![t0];
    index.insert(t0, 0);
    let mut k = 0;
    while k < order.len() {
        let s = order[k];
        k += 1;
        if !m.states.contains_key(s) {
            continue;
        }
        if let Some(l) = m.v.iter().find(|l| l.subject() == s) {
            return Err(SemanticsError::Incomplete(l.to_string()));
        }
        for (_, t) in trans.get(s).into_iter().flatten() {
            if !index.contains_key(t) {
                index.insert(t, order.len());
                order.push(t);
            }
        }
    }
    let mut p = Plts::new(order.len(), 0).expect("initial state exists");
    for (i, s) in order.iter().enumerate() {
        p.set_state(i, State { term: Some((*s).clone()), text: Some(s.to_string()) }).expect("declared");
        if !m.states.contains_key(*s) {
            p.mark_frontier(i).expect("declared");
            continue;
        }
        for (u, t) in trans.get(s).into_iter().flatten() {
            p.add_transition(i, (*u).clone(), index[t]).expect("declared");
        }
        for q in preds.get(s).into_iter().flatten() {
            p.add_predicate(i, q).expect("declared");
        }
    }
    if m.truncated {
        p.set_truncated(true);
    }
    Ok(p)
}
