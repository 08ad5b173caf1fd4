use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::gsos;
use crate::pomset::{ActionLabel, Pomset};
use crate::rules::{GroundLiteral, LabelExpr, Literal, Ptss, Rule};
use crate::semantics::{derive_transitions, ExploreBounds, SemanticsError};
use crate::term::{Signature, Term};

/// How a variable became source-dependent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "by", content = "premise")]
pub enum Derivation {
    Source,
    /// Index of the premise whose target introduced it.
    Premise(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceDependency {
    pub rule: String,
    /// Variables in the order they were derived.
    pub derived: Vec<(String, Derivation)>,
    pub missing: Vec<String>,
}

impl SourceDependency {
    pub fn holds(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Least set of variables containing those of the source and closed under
/// positive transition premises whose left-hand side is covered.
pub fn source_dependent(rule: &Rule) -> SourceDependency {
    let mut derived: Vec<(String, Derivation)> =
        rule.source().var_occurrences().into_iter().collect::<BTreeSet<_>>().into_iter().map(|x| (x, Derivation::Source)).collect();
    let mut have: BTreeSet<String> = derived.iter().map(|(x, _)| x.clone()).collect();
    loop {
        let mut grew = false;
        for (k, p) in rule.premises.iter().enumerate() {
            if let Literal::PosTrans(t, _, u) = p {
                if t.free_vars().is_subset(&have) {
                    for y in u.free_vars() {
                        if have.insert(y.clone()) {
                            derived.push((y, Derivation::Premise(k)));
                            grew = true;
                        }
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    let missing = rule.term_vars().difference(&have).cloned().collect();
    SourceDependency { rule: rule.name.clone(), derived, missing }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConservativeError {
    #[error("incompatible signatures: {0}")]
    IncompatibleSignatures(String),
}

/// The part of the sufficient condition a rule violates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "clause")]
pub enum Clause {
    /// A base rule is not source-dependent.
    BaseSourceDependency { rule: String, missing: Vec<String> },
    /// An extension rule has neither a fresh source nor a premise that
    /// tests a base term for something fresh.
    ExtensionRule { rule: String },
}

impl Clause {
    pub fn number(&self) -> usize {
        match self {
            Clause::BaseSourceDependency { .. } => 1,
            Clause::ExtensionRule { .. } => 2,
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::BaseSourceDependency { rule, missing } => {
                write!(f, "clause 1: base rule `{rule}` is not source-dependent ({})", missing.join(", "))
            }
            Clause::ExtensionRule { rule } => {
                write!(f, "clause 2: extension rule `{rule}` has no fresh source and no fresh-testing premise")
            }
        }
    }
}

/// Outcome of the sufficient condition. It never refutes conservativity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "verdict", content = "reasons")]
pub enum Conservativity {
    Certified,
    Unknown(Vec<Clause>),
}

impl Conservativity {
    pub fn certified(&self) -> bool {
        *self == Conservativity::Certified
    }
}

/// Symbols and labels of the base that decide freshness.
struct Base<'a> {
    sig: &'a Signature,
    predicates: BTreeSet<String>,
    actions: BTreeSet<ActionLabel>,
    /// Whether label variables or the pomset axiom let every user action
    /// occur in the base.
    all_user_actions: bool,
    fix: bool,
}

impl<'a> Base<'a> {
    fn new(p: &'a Ptss) -> Self {
        let mut predicates = BTreeSet::new();
        let mut actions = BTreeSet::new();
        let mut all_user_actions = p.pomset_axiom;
        for r in &p.rules {
            for l in r.premises.iter().chain(std::iter::once(&r.conclusion)) {
                if let Some(q) = l.predicate() {
                    predicates.insert(q.to_string());
                }
                if let Some(e) = l.label() {
                    all_user_actions |= !e.is_closed();
                    actions.extend(e.constants().iter().flat_map(|u| u.labels().to_vec()));
                }
            }
        }
        actions.extend(p.priority.pomsets().iter().flat_map(|u| u.labels().to_vec()));
        Base { sig: &p.signature, predicates, actions, all_user_actions, fix: p.fix_recursion }
    }

    fn fresh_term(&self, t: &Term) -> bool {
        match t {
            Term::Var(_) => false,
            Term::Fun(f, args) => !self.sig.functions.contains_key(f) || args.iter().any(|a| self.fresh_term(a)),
            Term::Const(_) => !self.sig.pomset_constants,
            Term::Fix(_, b) => !self.fix || self.fresh_term(b),
        }
    }

    fn fresh_action(&self, a: &ActionLabel) -> bool {
        let reserved = a.is_tau() || a.is_sigma();
        !self.actions.contains(a) && (reserved || !self.all_user_actions)
    }

    fn fresh_label(&self, e: &LabelExpr) -> bool {
        e.is_closed() && e.constants().iter().all(|u: &Pomset| !u.is_empty() && u.labels().iter().all(|a| self.fresh_action(a)))
    }

    /// A premise on a base term over source variables that asks for a
    /// fresh predicate or a transition with only fresh actions.
    fn guarding_premise(&self, rule: &Rule, p: &Literal) -> bool {
        let t = p.subject();
        let base_term = !self.fresh_term(t) && t.free_vars().is_subset(&rule.source().free_vars());
        let fresh = match p {
            Literal::PosTrans(_, l, _) => self.fresh_label(l),
            Literal::Pred(_, q) => !self.predicates.contains(q),
            _ => false,
        };
        base_term && fresh
    }
}

/// Sufficient condition for `base ⊕ ext` to be an operational
/// conservative extension of `base`. Rules of `ext` that are also rules of
/// `base` belong to the base. A recursion schema the base lacks has fresh
/// sources, since `fix` terms are then not base terms.
pub fn check_conservative_extension(base: &Ptss, ext: &Ptss) -> Result<Conservativity, ConservativeError> {
    base.signature.merge(&ext.signature).map_err(ConservativeError::IncompatibleSignatures)?;
    let mut reasons = Vec::new();
    for r in &base.rules {
        let d = source_dependent(r);
        if !d.holds() {
            reasons.push(Clause::BaseSourceDependency { rule: r.name.clone(), missing: d.missing });
        }
    }
    let b = Base::new(base);
    for r in ext.rules_beyond(base) {
        let ok = b.fresh_term(r.source()) || r.premises.iter().any(|p| b.guarding_premise(&r, p));
        if !ok {
            reasons.push(Clause::ExtensionRule { rule: r.name.clone() });
        }
    }
    if ext.pomset_axiom && !base.pomset_axiom && base.signature.pomset_constants {
        reasons.push(Clause::ExtensionRule { rule: "pomset axiom".into() });
    }
    Ok(if reasons.is_empty() { Conservativity::Certified } else { Conservativity::Unknown(reasons) })
}

/// A base term whose transitions differ between base and extension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub term: String,
    pub only_base: Vec<String>,
    pub only_extension: Vec<String>,
}

/// Compares the provable literals with source `t` for each term under
/// `base` and under `base ⊕ ext`.
pub fn spot_check_extension(
    base: &Ptss,
    ext: &Ptss,
    terms: &[Term],
    bounds: ExploreBounds,
) -> Result<Vec<Discrepancy>, SemanticsError> {
    let sum = base.combine(ext).map_err(|e| SemanticsError::Incomplete(e.to_string()))?;
    let mut out = Vec::new();
    for t in terms {
        let own = |s: BTreeSet<GroundLiteral>| -> BTreeSet<GroundLiteral> { s.into_iter().filter(|l| l.subject() == t).collect() };
        let a = own(derive_transitions(base, t, bounds)?);
        let b = own(derive_transitions(&sum, t, bounds)?);
        if a != b {
            out.push(Discrepancy {
                term: t.to_string(),
                only_base: a.difference(&b).map(ToString::to_string).collect(),
                only_extension: b.difference(&a).map(ToString::to_string).collect(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Junk {
    Junk,
    MaybeLive,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JunkError {
    #[error("rule `{rule}` is not in GSOS format: {reason}")]
    NotGsos { rule: String, reason: String },
}

/// Whether every instance of `l` is a step.
fn always_step(l: &LabelExpr, rule: &Rule) -> bool {
    match l {
        LabelExpr::Const(p) => p.is_step(),
        LabelExpr::Tau | LabelExpr::Sigma => true,
        LabelExpr::Var(_) => rule.guards.iter().any(|g| *g == crate::rules::Guard::IsStep(l.clone())),
        LabelExpr::Par(a, b) => always_step(a, rule) && always_step(b, rule),
        LabelExpr::Seq(..) => false,
    }
}

/// A GSOS rule is junk when a positive premise `x -U-> y` and a negative
/// premise `x -/V->` on the same variable clash in every instance, that is
/// `U` is the first step of `V`. Anything else is reported as possibly
/// live.
pub fn junk_rule(rule: &Rule) -> Result<Junk, JunkError> {
    gsos(rule).map_err(|reason| JunkError::NotGsos { rule: rule.name.clone(), reason })?;
    for p in &rule.premises {
        let Literal::PosTrans(x, u, _) = p else { continue };
        for n in &rule.premises {
            let Literal::NegTrans(x2, v) = n else { continue };
            if x != x2 {
                continue;
            }
            let clash = if u.is_closed() && v.is_closed() {
                match (u.eval(&Default::default()), v.eval(&Default::default())) {
                    (Ok(a), Ok(b)) => a == b.step_head(),
                    _ => false,
                }
            } else {
                u == v && always_step(u, rule)
            };
            if clash {
                return Ok(Junk::Junk);
            }
        }
    }
    Ok(Junk::MaybeLive)
}
