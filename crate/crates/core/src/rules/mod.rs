//! Literals, rule schemas with label metavariables, guards and whole
//! specifications.

mod dsl;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::pomset::Pomset;
use crate::term::{Signature, Substitution, Term};

pub use dsl::{parse_ptss, parse_ptss_with, parse_rule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("priority order is cyclic at {0}")]
    CyclicPriority(String),
    #[error("rule `{rule}`: {msg}")]
    Malformed { rule: String, msg: String },
    #[error("duplicate rule name `{0}`")]
    DuplicateRule(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("variable `{0}` is not covered by the assignment")]
    Uncovered(String),
    #[error("guard `{0}` does not hold")]
    GuardFailed(String),
}

pub type LabelAssign = BTreeMap<String, Pomset>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelExpr {
    Var(String),
    Const(Pomset),
    Par(Box<LabelExpr>, Box<LabelExpr>),
    Seq(Box<LabelExpr>, Box<LabelExpr>),
    Tau,
    Sigma,
}

impl LabelExpr {
    pub fn var(x: &str) -> Self {
        LabelExpr::Var(x.to_string())
    }

    pub fn eval(&self, a: &LabelAssign) -> Result<Pomset, InstantiateError> {
        Ok(match self {
            LabelExpr::Var(x) => a.get(x).cloned().ok_or_else(|| InstantiateError::Uncovered(x.clone()))?,
            LabelExpr::Const(p) => p.clone(),
            LabelExpr::Par(l, r) => l.eval(a)?.par(&r.eval(a)?),
            LabelExpr::Seq(l, r) => l.eval(a)?.seq(&r.eval(a)?),
            LabelExpr::Tau => Pomset::tau(),
            LabelExpr::Sigma => Pomset::sigma(),
        })
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            LabelExpr::Var(x) => {
                out.insert(x.clone());
            }
            LabelExpr::Par(l, r) | LabelExpr::Seq(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            _ => {}
        }
    }

    /// Pomsets named literally in the expression.
    pub fn constants(&self) -> Vec<Pomset> {
        match self {
            LabelExpr::Const(p) => vec![p.clone()],
            LabelExpr::Tau => vec![Pomset::tau()],
            LabelExpr::Sigma => vec![Pomset::sigma()],
            LabelExpr::Par(l, r) | LabelExpr::Seq(l, r) => {
                let mut v = l.constants();
                v.extend(r.constants());
                v
            }
            LabelExpr::Var(_) => vec![],
        }
    }

    pub fn is_closed(&self) -> bool {
        self.vars().is_empty()
    }
}

impl fmt::Display for LabelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(e: &LabelExpr, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let (p, op) = match e {
                LabelExpr::Par(..) => (1, "||"),
                LabelExpr::Seq(..) => (2, "."),
                _ => (3, ""),
            };
            if p < ctx {
                f.write_str("(")?;
            }
            match e {
                LabelExpr::Var(x) => f.write_str(x)?,
                LabelExpr::Const(u) => write!(f, "{u}")?,
                LabelExpr::Tau => f.write_str("tau")?,
                LabelExpr::Sigma => f.write_str("sigma")?,
                LabelExpr::Par(l, r) | LabelExpr::Seq(l, r) => {
                    go(l, p, f)?;
                    write!(f, " {op} ")?;
                    go(r, p + 1, f)?;
                }
            }
            if p < ctx {
                f.write_str(")")?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    PosTrans(Term, LabelExpr, Term),
    NegTrans(Term, LabelExpr),
    NegTransTo(Term, LabelExpr, Term),
    Pred(Term, String),
    NegPred(Term, String),
}

impl Literal {
    pub fn subject(&self) -> &Term {
        match self {
            Literal::PosTrans(t, ..)
            | Literal::NegTrans(t, _)
            | Literal::NegTransTo(t, ..)
            | Literal::Pred(t, _)
            | Literal::NegPred(t, _) => t,
        }
    }

    pub fn target(&self) -> Option<&Term> {
        match self {
            Literal::PosTrans(_, _, t) | Literal::NegTransTo(_, _, t) => Some(t),
            _ => None,
        }
    }

    pub fn label(&self) -> Option<&LabelExpr> {
        match self {
            Literal::PosTrans(_, l, _) | Literal::NegTrans(_, l) | Literal::NegTransTo(_, l, _) => Some(l),
            _ => None,
        }
    }

    pub fn predicate(&self) -> Option<&str> {
        match self {
            Literal::Pred(_, p) | Literal::NegPred(_, p) => Some(p),
            _ => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, Literal::PosTrans(..) | Literal::Pred(..))
    }

    pub fn term_vars(&self) -> BTreeSet<String> {
        let mut v = self.subject().free_vars();
        if let Some(t) = self.target() {
            v.extend(t.free_vars());
        }
        v
    }

    pub fn label_vars(&self) -> BTreeSet<String> {
        self.label().map(LabelExpr::vars).unwrap_or_default()
    }

    pub fn ground(&self, s: &Substitution, a: &LabelAssign) -> Result<GroundLiteral, InstantiateError> {
        let close = |t: &Term| -> Result<Term, InstantiateError> {
            let u = t.substitute(s);
            match u.free_vars().into_iter().next() {
                Some(x) => Err(InstantiateError::Uncovered(x)),
                None => Ok(u),
            }
        };
        Ok(match self {
            Literal::PosTrans(t, l, u) => GroundLiteral::Trans(close(t)?, l.eval(a)?, close(u)?),
            Literal::NegTrans(t, l) => GroundLiteral::NegTrans(close(t)?, l.eval(a)?),
            Literal::NegTransTo(t, l, u) => GroundLiteral::NegTransTo(close(t)?, l.eval(a)?, close(u)?),
            Literal::Pred(t, p) => GroundLiteral::Pred(close(t)?, p.clone()),
            Literal::NegPred(t, p) => GroundLiteral::NegPred(close(t)?, p.clone()),
        })
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::PosTrans(t, l, u) => write!(f, "{t} -{l}-> {u}"),
            Literal::NegTrans(t, l) => write!(f, "{t} -/{l}->"),
            Literal::NegTransTo(t, l, u) => write!(f, "{t} -/{l}-> {u}"),
            Literal::Pred(t, p) => write!(f, "{t} : {p}"),
            Literal::NegPred(t, p) => write!(f, "{t} !: {p}"),
        }
    }
}

/// A closed literal with an evaluated label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundLiteral {
    Trans(Term, Pomset, Term),
    NegTrans(Term, Pomset),
    NegTransTo(Term, Pomset, Term),
    Pred(Term, String),
    NegPred(Term, String),
}

impl GroundLiteral {
    pub fn subject(&self) -> &Term {
        match self {
            GroundLiteral::Trans(t, ..)
            | GroundLiteral::NegTrans(t, _)
            | GroundLiteral::NegTransTo(t, ..)
            | GroundLiteral::Pred(t, _)
            | GroundLiteral::NegPred(t, _) => t,
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, GroundLiteral::Trans(..) | GroundLiteral::Pred(..))
    }
}

impl fmt::Display for GroundLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundLiteral::Trans(t, l, u) => write!(f, "{t} -{l}-> {u}"),
            GroundLiteral::NegTrans(t, l) => write!(f, "{t} -/{l}->"),
            GroundLiteral::NegTransTo(t, l, u) => write!(f, "{t} -/{l}-> {u}"),
            GroundLiteral::Pred(t, p) => write!(f, "{t} : {p}"),
            GroundLiteral::NegPred(t, p) => write!(f, "{t} !: {p}"),
        }
    }
}

/// Whether two closed literals deny each other. A transition denies a
/// negative premise without target when its label is the first step of the
/// premise's label.
pub fn denies(l1: &GroundLiteral, l2: &GroundLiteral) -> bool {
    use GroundLiteral::*;
    fn one_way(a: &GroundLiteral, b: &GroundLiteral) -> bool {
        match (a, b) {
            (Trans(t, u, t2), NegTransTo(s, v, s2)) => t == s && u == v && t2 == s2,
            (Trans(t, u, _), NegTrans(s, v)) => t == s && *u == v.step_head(),
            (Pred(t, p), NegPred(s, q)) => t == s && p == q,
            _ => false,
        }
    }
    one_way(l1, l2) || one_way(l2, l1)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guard {
    PriorityLt(LabelExpr, LabelExpr),
    IsStep(LabelExpr),
    LabelEq(LabelExpr, LabelExpr),
}

impl Guard {
    pub fn vars(&self) -> BTreeSet<String> {
        match self {
            Guard::PriorityLt(a, b) | Guard::LabelEq(a, b) => {
                let mut v = a.vars();
                v.extend(b.vars());
                v
            }
            Guard::IsStep(a) => a.vars(),
        }
    }

    pub fn holds(&self, a: &LabelAssign, prio: &Priority) -> Result<bool, InstantiateError> {
        Ok(match self {
            Guard::PriorityLt(l, r) => prio.less(&l.eval(a)?, &r.eval(a)?),
            Guard::IsStep(l) => l.eval(a)?.is_step(),
            Guard::LabelEq(l, r) => l.eval(a)? == r.eval(a)?,
        })
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::PriorityLt(a, b) => write!(f, "{a} <p {b}"),
            Guard::IsStep(a) => write!(f, "step({a})"),
            Guard::LabelEq(a, b) => write!(f, "{a} = {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub name: String,
    pub premises: Vec<Literal>,
    pub guards: Vec<Guard>,
    pub conclusion: Literal,
}

/// A closed instance of a rule with all guards satisfied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleInstance {
    pub rule: String,
    pub premises: Vec<GroundLiteral>,
    pub conclusion: GroundLiteral,
}

impl fmt::Display for RuleInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prem: Vec<String> = self.premises.iter().map(ToString::to_string).collect();
        write!(f, "{} |- {}", prem.join(", "), self.conclusion)
    }
}

impl Rule {
    pub fn source(&self) -> &Term {
        self.conclusion.subject()
    }

    pub fn target(&self) -> Option<&Term> {
        self.conclusion.target()
    }

    pub fn is_positive(&self) -> bool {
        self.premises.iter().all(Literal::is_positive)
    }

    pub fn term_vars(&self) -> BTreeSet<String> {
        let mut v = self.conclusion.term_vars();
        for p in &self.premises {
            v.extend(p.term_vars());
        }
        v
    }

    pub fn label_vars(&self) -> BTreeSet<String> {
        let mut v = self.conclusion.label_vars();
        for p in &self.premises {
            v.extend(p.label_vars());
        }
        for g in &self.guards {
            v.extend(g.vars());
        }
        v
    }

    /// Label variables bound by positive premises or the conclusion only
    /// through negative premises (and guards) are read universally.
    pub fn universal_label_vars(&self) -> BTreeSet<String> {
        let mut positive = self.conclusion.label_vars();
        for p in self.premises.iter().filter(|p| p.is_positive()) {
            positive.extend(p.label_vars());
        }
        let mut neg = BTreeSet::new();
        for p in self.premises.iter().filter(|p| !p.is_positive()) {
            neg.extend(p.label_vars());
        }
        neg.difference(&positive).cloned().collect()
    }

    pub fn instantiate(
        &self,
        s: &Substitution,
        a: &LabelAssign,
        prio: &Priority,
    ) -> Result<RuleInstance, InstantiateError> {
        for g in &self.guards {
            if !g.holds(a, prio)? {
                return Err(InstantiateError::GuardFailed(g.to_string()));
            }
        }
        Ok(RuleInstance {
            rule: self.name.clone(),
            premises: self.premises.iter().map(|p| p.ground(s, a)).collect::<Result<_, _>>()?,
            conclusion: self.conclusion.ground(s, a)?,
        })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}:", self.name)?;
        let prem: Vec<String> = self.premises.iter().map(ToString::to_string).collect();
        if !prem.is_empty() {
            write!(f, " {}", prem.join(", "))?;
        }
        if !self.guards.is_empty() {
            let g: Vec<String> = self.guards.iter().map(ToString::to_string).collect();
            write!(f, " | {}", g.join(", "))?;
        }
        write!(f, " |- {};", self.conclusion)
    }
}

pub fn instantiate(
    rule: &Rule,
    s: &Substitution,
    a: &LabelAssign,
    prio: &Priority,
) -> Result<RuleInstance, InstantiateError> {
    rule.instantiate(s, a, prio)
}

/// A finite strict order on pomsets, stored transitively closed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Priority {
    pairs: BTreeSet<(Pomset, Pomset)>,
}

impl Priority {
    pub fn new(pairs: impl IntoIterator<Item = (Pomset, Pomset)>) -> Result<Self, RuleError> {
        let mut set: BTreeSet<(Pomset, Pomset)> = pairs.into_iter().collect();
        loop {
            let mut add = Vec::new();
            for (a, b) in &set {
                for (c, d) in set.range((b.clone(), Pomset::empty())..) {
                    if c != b {
                        break;
                    }
                    if !set.contains(&(a.clone(), d.clone())) {
                        add.push((a.clone(), d.clone()));
                    }
                }
            }
            if add.is_empty() {
                break;
            }
            set.extend(add);
        }
        if let Some((a, _)) = set.iter().find(|(a, b)| a == b) {
            return Err(RuleError::CyclicPriority(a.to_string()));
        }
        Ok(Priority { pairs: set })
    }

    pub fn less(&self, a: &Pomset, b: &Pomset) -> bool {
        self.pairs.contains(&(a.clone(), b.clone()))
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(Pomset, Pomset)> {
        self.pairs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pomsets(&self) -> BTreeSet<Pomset> {
        self.pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect()
    }

    /// Generating pairs: closed pairs not implied through a third element.
    pub fn covers(&self) -> Vec<(Pomset, Pomset)> {
        let all = self.pomsets();
        self.pairs
            .iter()
            .filter(|(a, b)| !all.iter().any(|c| self.less(a, c) && self.less(c, b)))
            .cloned()
            .collect()
    }
}

/// A pomset transition system specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ptss {
    pub name: String,
    pub signature: Signature,
    pub rules: Vec<Rule>,
    pub priority: Priority,
    /// The schema `U -U-> eps` for every pomset constant `U`.
    pub pomset_axiom: bool,
    /// The recursion rule: `fix X.t` behaves as its unfolding.
    pub fix_recursion: bool,
}

impl Ptss {
    pub fn new(name: &str, signature: Signature) -> Self {
        Ptss {
            name: name.to_string(),
            signature,
            rules: Vec::new(),
            priority: Priority::default(),
            pomset_axiom: false,
            fix_recursion: false,
        }
    }

    /// Explicit rules plus the built-in schemas that are switched on.
    pub fn rule_count(&self) -> usize {
        self.rules.len() + usize::from(self.pomset_axiom) + usize::from(self.fix_recursion)
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn is_positive(&self) -> bool {
        self.rules.iter().all(Rule::is_positive)
    }

    /// Checks well-formedness of every rule against the signature.
    pub fn validate(&self) -> Result<(), RuleError> {
        let mut names = BTreeSet::new();
        for r in &self.rules {
            if !names.insert(&r.name) {
                return Err(RuleError::DuplicateRule(r.name.clone()));
            }
            let bad = |msg: String| RuleError::Malformed { rule: r.name.clone(), msg };
            if !matches!(r.conclusion, Literal::PosTrans(..) | Literal::Pred(..)) {
                return Err(bad("conclusion must be a positive transition or predicate".into()));
            }
            for l in r.premises.iter().chain(std::iter::once(&r.conclusion)) {
                if let Some(p) = l.predicate() {
                    if !self.signature.predicates.contains(p) {
                        return Err(bad(format!("predicate `{p}` is not declared")));
                    }
                }
                check_arities(l.subject(), &self.signature).map_err(bad)?;
                if let Some(t) = l.target() {
                    check_arities(t, &self.signature).map_err(bad)?;
                }
            }
        }
        Ok(())
    }

    /// Base plus extension rules, signatures merged. Name clashes between
    /// rules are resolved by keeping both under qualified names.
    pub fn combine(&self, ext: &Ptss) -> Result<Ptss, RuleError> {
        let signature = self
            .signature
            .merge(&ext.signature)
            .map_err(|msg| RuleError::Malformed { rule: ext.name.clone(), msg })?;
        let mut out = Ptss {
            name: format!("{}+{}", self.name, ext.name),
            signature,
            rules: self.rules.clone(),
            priority: Priority::new(self.priority.pairs().chain(ext.priority.pairs()).cloned())?,
            pomset_axiom: self.pomset_axiom || ext.pomset_axiom,
            fix_recursion: self.fix_recursion || ext.fix_recursion,
        };
        for r in &ext.rules {
            match out.rule(&r.name) {
                Some(existing) if existing == r => {}
                Some(_) => {
                    let mut r = r.clone();
                    r.name = format!("{}.{}", ext.name, r.name);
                    out.rules.push(r);
                }
                None => out.rules.push(r.clone()),
            }
        }
        Ok(out)
    }

    /// Rules of `self` that are not rules of `base`.
    pub fn rules_beyond(&self, base: &Ptss) -> Vec<Rule> {
        self.rules
            .iter()
            .filter(|r| !base.rules.iter().any(|b| b.premises == r.premises && b.guards == r.guards && b.conclusion == r.conclusion))
            .cloned()
            .collect()
    }
}

fn check_arities(t: &Term, sig: &Signature) -> Result<(), String> {
    match t {
        Term::Fun(f, args) => {
            match sig.arity(f) {
                Some(n) if n == args.len() => {}
                Some(n) => return Err(format!("`{f}` has arity {n}, used with {}", args.len())),
                None => return Err(format!("symbol `{f}` is not declared")),
            }
            args.iter().try_for_each(|a| check_arities(a, sig))
        }
        Term::Const(_) if !sig.pomset_constants => Err("pomset constants are not enabled".into()),
        Term::Fix(_, b) => check_arities(b, sig),
        _ => Ok(()),
    }
}

impl fmt::Display for Ptss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        dsl::write_ptss(self, f)
    }
}

#[cfg(test)]
mod tests;
