//! Event-based modal logic over configuration structures: formulas, their
//! fragments, satisfaction, and bounded distinguishing-formula search.
//!
//! A binder `(xs, ~ys < a z) f` names an `a`-labelled event enabled in the
//! current configuration that causally follows the events bound to `xs` and
//! is concurrent with those bound to `ys`; `<z> f` executes the event bound
//! to `z`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::plts::EventId;
use crate::pomset::ActionLabel;

mod eval;
mod parse;
mod search;
#[cfg(test)]
mod tests;

pub use eval::{satisfies, Model};
pub use parse::parse_formula;
pub use search::{distinguishing_formula, logical_equiv};

pub type Var = String;

/// Variable assignment: each variable names one event of the structure.
pub type Env = BTreeMap<Var, EventId>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    Pred(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Bind { xs: Vec<Var>, ys: Vec<Var>, a: ActionLabel, z: Var, body: Box<Formula> },
    Exec { z: Var, body: Box<Formula> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("formula parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("event {0} does not exist in the structure")]
    UnknownEvent(EventId),
    #[error("node {0} does not exist in the structure")]
    UnknownNode(usize),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(f: Formula, g: Formula) -> Formula {
        Formula::And(Box::new(f), Box::new(g))
    }

    /// Conjunction of all `fs`, `true` when empty; `true` conjuncts and
    /// duplicates are dropped and the rest sorted.
    pub fn all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut parts = BTreeSet::new();
        for f in fs {
            f.conjuncts(&mut parts);
        }
        let mut it = parts.into_iter().rev();
        match it.next() {
            None => Formula::True,
            Some(last) => it.fold(last, |acc, f| Formula::and(f, acc)),
        }
    }

    fn conjuncts(self, out: &mut BTreeSet<Formula>) {
        match self {
            Formula::True => {}
            Formula::And(f, g) => {
                f.conjuncts(out);
                g.conjuncts(out);
            }
            f => {
                out.insert(f);
            }
        }
    }

    pub fn bind(xs: Vec<Var>, ys: Vec<Var>, a: ActionLabel, z: impl Into<Var>, body: Formula) -> Formula {
        Formula::Bind { xs, ys, a, z: z.into(), body: Box::new(body) }
    }

    pub fn exec(z: impl Into<Var>, body: Formula) -> Formula {
        Formula::Exec { z: z.into(), body: Box::new(body) }
    }

    /// `<<xs, ~ys < a z>> body`: bind, then execute.
    pub fn diamond(xs: Vec<Var>, ys: Vec<Var>, a: ActionLabel, z: impl Into<Var>, body: Formula) -> Formula {
        let z = z.into();
        Formula::bind(xs, ys, a, z.clone(), Formula::exec(z, body))
    }

    /// `(<a1 x1> * ... * <an xn>) body`: n pairwise concurrent events bound
    /// at once, then executed in order.
    pub fn step(items: Vec<(ActionLabel, Var)>, body: Formula) -> Formula {
        let mut f = body;
        for (_, x) in items.iter().rev() {
            f = Formula::exec(x.clone(), f);
        }
        for (i, (a, x)) in items.iter().enumerate().rev() {
            let ys = items[..i].iter().map(|(_, y)| y.clone()).collect();
            f = Formula::bind(vec![], ys, a.clone(), x.clone(), f);
        }
        f
    }

    /// `!<<a z>>true`: no `a`-event is enabled.
    pub fn denial(a: ActionLabel) -> Formula {
        Formula::not(Formula::diamond(vec![], vec![], a, "z", Formula::True))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut need = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::True | Formula::Pred(_) => {}
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(f, g) => {
                f.collect_free(bound, out);
                g.collect_free(bound, out);
            }
            Formula::Bind { xs, ys, z, body, .. } => {
                for v in xs.iter().chain(ys) {
                    need(v, bound);
                }
                bound.push(z.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Formula::Exec { z, body } => {
                need(z, bound);
                body.collect_free(bound, out);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Nesting depth of binders; each binder names one new event, so this
    /// bounds the number of events a formula can look at.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::Pred(_) => 0,
            Formula::Not(f) | Formula::Exec { body: f, .. } => f.depth(),
            Formula::And(f, g) => f.depth().max(g.depth()),
            Formula::Bind { body, .. } => 1 + body.depth(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::Pred(_) => 1,
            Formula::Not(f) | Formula::Exec { body: f, .. } | Formula::Bind { body: f, .. } => 1 + f.size(),
            Formula::And(f, g) => 1 + f.size() + g.size(),
        }
    }

    /// Actions named by binders.
    pub fn actions(&self) -> BTreeSet<ActionLabel> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Bind { a, .. } = f {
                out.insert(a.clone());
            }
        });
        out
    }

    fn visit(&self, k: &mut impl FnMut(&Formula)) {
        k(self);
        match self {
            Formula::True | Formula::Pred(_) => {}
            Formula::Not(f) | Formula::Exec { body: f, .. } | Formula::Bind { body: f, .. } => f.visit(k),
            Formula::And(f, g) => {
                f.visit(k);
                g.visit(k);
            }
        }
    }

    /// `Bind(z) Exec(z) body` with the same `z`.
    fn as_diamond(&self) -> Option<(&[Var], &[Var], &ActionLabel, &Var, &Formula)> {
        match self {
            Formula::Bind { xs, ys, a, z, body } => match &**body {
                Formula::Exec { z: z2, body: inner } if z2 == z => Some((xs, ys, a, z, inner)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Reads a step block: binders with no causes, each concurrent with
    /// exactly the earlier ones, followed by executions in the same order.
    fn as_step(&self) -> Option<(Vec<(&ActionLabel, &Var)>, &Formula)> {
        let mut items: Vec<(&ActionLabel, &Var)> = Vec::new();
        let mut f = self;
        while let Formula::Bind { xs, ys, a, z, body } = f {
            let earlier: Vec<&Var> = items.iter().map(|p| p.1).collect();
            if !xs.is_empty() || ys.iter().collect::<Vec<_>>() != earlier || earlier.contains(&z) {
                return None;
            }
            items.push((a, z));
            f = body;
        }
        if items.is_empty() {
            return None;
        }
        for (_, x) in &items {
            match f {
                Formula::Exec { z, body } if z == *x => f = body,
                _ => return None,
            }
        }
        Some((items, f))
    }

    fn is_denied_action(&self) -> bool {
        match self {
            Formula::Not(f) => matches!(f.as_diamond(), Some((xs, ys, _, _, Formula::True)) if xs.is_empty() && ys.is_empty()),
            _ => false,
        }
    }
}

/// The BCL fragment family plus the denial languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Fragment {
    #[serde(rename = "BCL")]
    Bcl,
    #[serde(rename = "HPL")]
    Hpl,
    #[serde(rename = "PL")]
    Pl,
    #[serde(rename = "SL")]
    Sl,
    #[serde(rename = "D_p")]
    Dp,
    #[serde(rename = "D_s")]
    Ds,
    #[serde(rename = "D_hp")]
    Dhp,
    #[serde(rename = "D_hhp")]
    Dhhp,
}

impl Fragment {
    pub const ALL: [Fragment; 8] =
        [Fragment::Bcl, Fragment::Hpl, Fragment::Pl, Fragment::Sl, Fragment::Dp, Fragment::Ds, Fragment::Dhp, Fragment::Dhhp];

    pub fn name(self) -> &'static str {
        match self {
            Fragment::Bcl => "BCL",
            Fragment::Hpl => "HPL",
            Fragment::Pl => "PL",
            Fragment::Sl => "SL",
            Fragment::Dp => "D_p",
            Fragment::Ds => "D_s",
            Fragment::Dhp => "D_hp",
            Fragment::Dhhp => "D_hhp",
        }
    }

    pub fn is_denial(self) -> bool {
        matches!(self, Fragment::Dp | Fragment::Ds | Fragment::Dhp | Fragment::Dhhp)
    }

    /// The logic a denial language is carved out of.
    pub fn host(self) -> Fragment {
        match self {
            Fragment::Dp => Fragment::Pl,
            Fragment::Ds => Fragment::Sl,
            Fragment::Dhp => Fragment::Hpl,
            Fragment::Dhhp => Fragment::Bcl,
            f => f,
        }
    }

    /// Fragments drawn from a granularity name: p, s, hp, hhp.
    pub fn for_granularity(g: crate::equiv::Granularity) -> Fragment {
        use crate::equiv::Granularity::*;
        match g {
            Pomset => Fragment::Pl,
            Step => Fragment::Sl,
            Hp => Fragment::Hpl,
            Hhp => Fragment::Bcl,
        }
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fragment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let k = s.to_ascii_lowercase().replace('_', "");
        Ok(match k.as_str() {
            "bcl" => Fragment::Bcl,
            "hpl" => Fragment::Hpl,
            "pl" => Fragment::Pl,
            "sl" => Fragment::Sl,
            "dp" => Fragment::Dp,
            "ds" => Fragment::Ds,
            "dhp" => Fragment::Dhp,
            "dhhp" => Fragment::Dhhp,
            _ => return Err(format!("unknown fragment `{s}` (BCL, HPL, PL, SL, D_p, D_s, D_hp, D_hhp)")),
        })
    }
}

/// Every fragment whose grammar generates `f`. Formulas with unbound
/// variables belong to none.
pub fn fragment_of(f: &Formula) -> BTreeSet<Fragment> {
    let mut out = BTreeSet::new();
    if !f.is_closed() {
        return out;
    }
    out.insert(Fragment::Bcl);
    for frag in [Fragment::Hpl, Fragment::Pl, Fragment::Sl, Fragment::Dp, Fragment::Ds, Fragment::Dhp, Fragment::Dhhp] {
        if generates(frag, f) {
            out.insert(frag);
        }
    }
    out
}

fn generates(frag: Fragment, f: &Formula) -> bool {
    let denial = frag.is_denial();
    if denial && f.is_denied_action() {
        return true;
    }
    match f {
        Formula::True => true,
        Formula::Pred(_) => !denial,
        Formula::Not(g) => !denial && (frag != Fragment::Pl || g.is_closed()) && generates(frag, g),
        Formula::And(g, h) => {
            let closed_only = matches!(frag, Fragment::Pl | Fragment::Dp);
            (!closed_only || f.is_closed()) && generates(frag, g) && generates(frag, h)
        }
        Formula::Bind { body, .. } | Formula::Exec { body, .. } => match frag.host() {
            Fragment::Bcl => generates(frag, body),
            Fragment::Hpl | Fragment::Pl => f.as_diamond().is_some_and(|(.., inner)| generates(frag, inner)),
            Fragment::Sl => f.as_step().is_some_and(|(_, inner)| inner.is_closed() && generates(frag, inner)),
            _ => unreachable!("hosts are the four logics"),
        },
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // `&` groups to the right
            Formula::And(g, h) => {
                write_unary(f, g)?;
                f.write_str(" & ")?;
                write!(f, "{h}")
            }
            _ => write_unary(f, self),
        }
    }
}

fn write_unary(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
    let vars = |xs: &[Var]| xs.join(" ");
    let head = |xs: &[Var], ys: &[Var], a: &ActionLabel, z: &Var| {
        let mut s = vars(xs);
        if !ys.is_empty() {
            if !s.is_empty() {
                s.push_str(", ");
            }
            s.push_str(&ys.iter().map(|y| format!("~{y}")).collect::<Vec<_>>().join(" "));
        }
        if s.is_empty() {
            format!("{a} {z}")
        } else {
            format!("{s} < {a} {z}")
        }
    };
    match g {
        Formula::True => f.write_str("true"),
        Formula::Pred(p) => f.write_str(p),
        Formula::Not(h) => {
            f.write_str("!")?;
            write_body(f, h)
        }
        Formula::And(..) => write!(f, "({g})"),
        _ => {
            if let Some((items, body)) = g.as_step().filter(|(items, _)| items.len() > 1) {
                let parts: Vec<String> = items.iter().map(|(a, x)| format!("<{a} {x}>")).collect();
                write!(f, "({}) ", parts.join(" * "))?;
                return write_body(f, body);
            }
            if let Some((xs, ys, a, z, body)) = g.as_diamond() {
                write!(f, "<< {} >> ", head(xs, ys, a, z))?;
                return write_body(f, body);
            }
            match g {
                Formula::Bind { xs, ys, a, z, body } => {
                    write!(f, "({}) ", head(xs, ys, a, z))?;
                    write_body(f, body)
                }
                Formula::Exec { z, body } => {
                    write!(f, "<{z}> ")?;
                    write_body(f, body)
                }
                _ => unreachable!("other shapes handled above"),
            }
        }
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
    match g {
        Formula::And(..) => write!(f, "({g})"),
        _ => write_unary(f, g),
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
