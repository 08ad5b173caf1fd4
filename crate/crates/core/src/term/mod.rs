//! Signatures, open and closed terms, substitution, matching and contexts.

pub(crate) mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::pomset::Pomset;

pub use parse::{parse_context, parse_pattern, parse_term};

/// Symbols with dedicated surface syntax.
pub mod sym {
    pub const EPS: &str = "eps";
    pub const ALT: &str = "+";
    pub const SEQ: &str = ".";
    pub const PAR: &str = "||";
    pub const THETA: &str = "theta";
    pub const DELAY: &str = "sigma_d";
}

/// The termination predicate `√`.
pub const SQRT: &str = "sqrt";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("context has {holes} holes but {fillers} fillers were given")]
    HoleMismatch { holes: usize, fillers: usize },
    #[error("`{0}` is not a fixpoint term")]
    NotFix(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub functions: BTreeMap<String, usize>,
    pub predicates: BTreeSet<String>,
    pub pomset_constants: bool,
}

impl Signature {
    pub fn arity(&self, f: &str) -> Option<usize> {
        self.functions.get(f).copied()
    }

    pub fn with_function(mut self, f: &str, arity: usize) -> Self {
        self.functions.insert(f.to_string(), arity);
        self
    }

    pub fn with_predicate(mut self, p: &str) -> Self {
        self.predicates.insert(p.to_string());
        self
    }

    /// Union of two signatures; arities of shared symbols must agree.
    pub fn merge(&self, other: &Signature) -> Result<Signature, String> {
        let mut out = self.clone();
        for (f, &n) in &other.functions {
            match out.functions.insert(f.clone(), n) {
                Some(m) if m != n => return Err(format!("symbol `{f}` has arities {m} and {n}")),
                _ => {}
            }
        }
        out.predicates.extend(other.predicates.iter().cloned());
        out.pomset_constants |= other.pomset_constants;
        Ok(out)
    }

    /// Whether `self` is contained in `other`.
    pub fn is_subsignature(&self, other: &Signature) -> bool {
        self.functions.iter().all(|(f, n)| other.functions.get(f) == Some(n))
            && self.predicates.is_subset(&other.predicates)
            && (!self.pomset_constants || other.pomset_constants)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Fun(String, Vec<Term>),
    Const(Pomset),
    Fix(String, Box<Term>),
}

pub type Substitution = BTreeMap<String, Term>;

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(x.to_string())
    }

    pub fn fun(f: &str, args: Vec<Term>) -> Term {
        Term::Fun(f.to_string(), args)
    }

    pub fn eps() -> Term {
        Term::fun(sym::EPS, vec![])
    }

    pub fn action(a: &str) -> Term {
        Term::Const(Pomset::action(a))
    }

    pub fn alt(l: Term, r: Term) -> Term {
        Term::fun(sym::ALT, vec![l, r])
    }

    pub fn seq(l: Term, r: Term) -> Term {
        Term::fun(sym::SEQ, vec![l, r])
    }

    pub fn par(l: Term, r: Term) -> Term {
        Term::fun(sym::PAR, vec![l, r])
    }

    pub fn fix(x: &str, body: Term) -> Term {
        Term::Fix(x.to_string(), Box::new(body))
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Term::Fun(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Fun(_, args) => args.iter().for_each(|a| a.collect_free(bound, out)),
            Term::Const(_) => {}
            Term::Fix(x, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Variables in order of first occurrence, with repetitions.
    pub fn var_occurrences(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn go(t: &Term, out: &mut Vec<String>) {
            match t {
                Term::Var(x) => out.push(x.clone()),
                Term::Fun(_, args) => args.iter().for_each(|a| go(a, out)),
                Term::Const(_) => {}
                Term::Fix(_, b) => go(b, out),
            }
        }
        go(self, &mut out);
        out
    }

    /// Number of symbol, constant and binder occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Fun(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Term::Const(_) => 1,
            Term::Fix(_, b) => 1 + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::Fun(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            Term::Fix(_, b) => 1 + b.depth(),
        }
    }

    /// Occurrences of function symbol `f`.
    pub fn count_symbol(&self, f: &str) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::Fun(g, args) => {
                usize::from(g == f) + args.iter().map(|a| a.count_symbol(f)).sum::<usize>()
            }
            Term::Fix(_, b) => b.count_symbol(f),
        }
    }

    /// Pomset constants occurring in the term.
    pub fn constants(&self) -> BTreeSet<Pomset> {
        let mut out = BTreeSet::new();
        fn go(t: &Term, out: &mut BTreeSet<Pomset>) {
            match t {
                Term::Var(_) => {}
                Term::Const(p) => {
                    out.insert(p.clone());
                }
                Term::Fun(_, args) => args.iter().for_each(|a| go(a, out)),
                Term::Fix(_, b) => go(b, out),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn substitute(&self, s: &Substitution) -> Term {
        match self {
            Term::Var(x) => s.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::Fun(f, args) => Term::Fun(f.clone(), args.iter().map(|a| a.substitute(s)).collect()),
            Term::Const(_) => self.clone(),
            Term::Fix(x, body) => {
                let mut inner = s.clone();
                inner.remove(x);
                let free = body.free_vars();
                let captures = inner
                    .iter()
                    .any(|(y, img)| free.contains(y) && img.free_vars().contains(x));
                if !captures {
                    return Term::Fix(x.clone(), Box::new(body.substitute(&inner)));
                }
                let mut avoid: BTreeSet<String> = free.clone();
                for img in inner.values() {
                    avoid.extend(img.free_vars());
                }
                avoid.extend(inner.keys().cloned());
                let fresh = fresh_name(x, &avoid);
                let mut rename = Substitution::new();
                rename.insert(x.clone(), Term::Var(fresh.clone()));
                let renamed = body.substitute(&rename);
                Term::Fix(fresh, Box::new(renamed.substitute(&inner)))
            }
        }
    }

    /// `t[fix X.t / X]` for `self = fix X.t`.
    pub fn unfold(&self) -> Result<Term, TermError> {
        match self {
            Term::Fix(x, body) => {
                let mut s = Substitution::new();
                s.insert(x.clone(), self.clone());
                Ok(body.substitute(&s))
            }
            _ => Err(TermError::NotFix(self.to_string())),
        }
    }

    /// Replaces every subterm equal to `from` with `to`.
    pub fn replace(&self, from: &Term, to: &Term) -> Term {
        if self == from {
            return to.clone();
        }
        match self {
            Term::Fun(f, args) => Term::Fun(f.clone(), args.iter().map(|a| a.replace(from, to)).collect()),
            Term::Fix(x, b) => Term::Fix(x.clone(), Box::new(b.replace(from, to))),
            _ => self.clone(),
        }
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut k = 1;
    loop {
        let cand = format!("{base}{k}");
        if !avoid.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}

pub fn substitute(t: &Term, s: &Substitution) -> Term {
    t.substitute(s)
}

/// One-sided matching of `pattern` against a closed `subject`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    match_into(pattern, subject, &mut s).then_some(s)
}

/// Extends `s` so that `pattern` under `s` equals `subject`.
pub fn match_into(pattern: &Term, subject: &Term, s: &mut Substitution) -> bool {
    match (pattern, subject) {
        (Term::Var(x), _) => match s.get(x) {
            Some(bound) => bound == subject,
            None => {
                s.insert(x.clone(), subject.clone());
                true
            }
        },
        (Term::Fun(f, ps), Term::Fun(g, ts)) => {
            f == g && ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, t)| match_into(p, t, s))
        }
        (Term::Const(p), Term::Const(q)) => p == q,
        (Term::Fix(x, pb), Term::Fix(y, tb)) => x == y && **pb == **tb,
        _ => false,
    }
}

/// A term with numbered holes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    term: Term,
    holes: Vec<String>,
}

impl Context {
    /// Wraps `term`, treating the listed variables as holes in order.
    pub fn new(term: Term, holes: Vec<String>) -> Self {
        Context { term, holes }
    }

    /// The identity context `[]`.
    pub fn hole() -> Self {
        let h = hole_name(0);
        Context { term: Term::Var(h.clone()), holes: vec![h] }
    }

    pub fn holes(&self) -> usize {
        self.holes.len()
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn plug(&self, fillers: &[Term]) -> Result<Term, TermError> {
        if fillers.len() != self.holes.len() {
            return Err(TermError::HoleMismatch { holes: self.holes.len(), fillers: fillers.len() });
        }
        let s: Substitution = self.holes.iter().cloned().zip(fillers.iter().cloned()).collect();
        Ok(self.term.substitute(&s))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let holes: Vec<Term> = self.holes.iter().map(|_| Term::var("[]")).collect();
        let s: Substitution = self.holes.iter().cloned().zip(holes).collect();
        write!(f, "{}", self.term.substitute(&s))
    }
}

pub(crate) fn hole_name(k: usize) -> String {
    format!("[]{k}")
}

pub fn plug(c: &Context, fillers: &[Term]) -> Result<Term, TermError> {
    c.plug(fillers)
}

fn prec(t: &Term) -> u8 {
    match t {
        Term::Fun(f, a) if f == sym::ALT && a.len() == 2 => 1,
        Term::Fun(f, a) if f == sym::PAR && a.len() == 2 => 2,
        Term::Fun(f, a) if f == sym::SEQ && a.len() == 2 => 3,
        Term::Fix(..) => 0,
        _ => 4,
    }
}

fn write_at(t: &Term, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let p = prec(t);
    let paren = p < ctx;
    if paren {
        f.write_str("(")?;
    }
    match t {
        Term::Var(x) => f.write_str(x)?,
        Term::Const(u) => write!(f, "{u}")?,
        Term::Fix(x, body) => {
            write!(f, "fix {x} . ")?;
            write_at(body, 0, f)?;
        }
        Term::Fun(op, args) if p < 4 => {
            write_at(&args[0], p, f)?;
            write!(f, " {op} ")?;
            write_at(&args[1], p + 1, f)?;
        }
        Term::Fun(g, args) if args.is_empty() => f.write_str(g)?,
        Term::Fun(g, args) => {
            write!(f, "{g}(")?;
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                write_at(a, 0, f)?;
            }
            f.write_str(")")?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, f)
    }
}

#[cfg(test)]
mod tests;
