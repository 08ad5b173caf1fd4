use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{
    classify, flat_source, lhs_occurrences, positive_rhs_vars, rhs_not_in_lhs, ensure, Check, Format, FormatVerdict,
    RuleDiagnostic, VarDepGraph,
};
use crate::rules::{LabelExpr, Literal, Ptss, Rule};
use crate::term::{Signature, Term};
use crate::verdict::Verdict;

/// Beyond this many argument slots the exhaustive search is not attempted.
pub const MAX_SEARCH_SLOTS: usize = 20;

/// A function symbol and a 1-based argument position.
pub type Slot = (String, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tameness {
    Tame,
    Wild,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TameWildLabelling {
    map: BTreeMap<Slot, Tameness>,
}

impl TameWildLabelling {
    /// Every argument of every symbol of `sig` tame.
    pub fn all_tame(sig: &Signature) -> Self {
        let map = sig
            .functions
            .iter()
            .flat_map(|(f, &n)| (1..=n).map(move |i| ((f.clone(), i), Tameness::Tame)))
            .collect();
        TameWildLabelling { map }
    }

    pub fn with_wild(sig: &Signature, wild: &[(&str, usize)]) -> Self {
        let mut l = Self::all_tame(sig);
        for &(f, i) in wild {
            l.map.insert((f.to_string(), i), Tameness::Wild);
        }
        l
    }

    /// Unknown slots count as tame.
    pub fn get(&self, f: &str, i: usize) -> Tameness {
        self.map.get(&(f.to_string(), i)).copied().unwrap_or(Tameness::Tame)
    }

    pub fn is_wild(&self, f: &str, i: usize) -> bool {
        self.get(f, i) == Tameness::Wild
    }

    pub fn set(&mut self, f: &str, i: usize, t: Tameness) {
        self.map.insert((f.to_string(), i), t);
    }

    pub fn wild_slots(&self) -> Vec<&Slot> {
        self.map.iter().filter(|(_, &t)| t == Tameness::Wild).map(|(s, _)| s).collect()
    }

    pub fn slots(&self) -> impl Iterator<Item = (&Slot, Tameness)> {
        self.map.iter().map(|(s, &t)| (s, t))
    }

    /// Whether every argument slot of `sig` is labelled.
    pub fn is_total(&self, sig: &Signature) -> bool {
        sig.functions.iter().all(|(f, &n)| (1..=n).all(|i| self.map.contains_key(&(f.clone(), i))))
    }

    /// Occurrences of variables in `t` with whether each sits at a
    /// wild-nested position, reached through wild slots only.
    pub fn occurrences(&self, t: &Term) -> Vec<(String, bool)> {
        fn go(l: &TameWildLabelling, t: &Term, nested: bool, out: &mut Vec<(String, bool)>) {
            match t {
                Term::Var(x) => out.push((x.clone(), nested)),
                Term::Fun(f, args) => {
                    for (i, a) in args.iter().enumerate() {
                        go(l, a, nested && l.is_wild(f, i + 1), out);
                    }
                }
                Term::Const(_) => {}
                Term::Fix(_, b) => go(l, b, false, out),
            }
        }
        let mut out = Vec::new();
        go(self, t, true, &mut out);
        out
    }
}

impl fmt::Display for TameWildLabelling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wild: Vec<String> = self.wild_slots().iter().map(|(g, i)| format!("{g}.{i}: wild")).collect();
        if wild.is_empty() {
            f.write_str("{all tame}")
        } else {
            write!(f, "{{{}}}", wild.join(", "))
        }
    }
}

impl Serialize for TameWildLabelling {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, Tameness> = self.map.iter().map(|((f, i), &t)| (format!("{f}.{i}"), t)).collect();
        m.serialize(s)
    }
}

/// The slot a rule waits on when it has the patience shape
/// `x_i -L-> y |- f(..x_i..) -L-> f(..y..)`. The flag tells whether `L` is
/// `tau` itself; for a label variable only the `tau` instance is a
/// patience rule.
pub fn patience_slot(rule: &Rule) -> Option<(Slot, bool)> {
    if !rule.guards.is_empty() || rule.premises.len() != 1 {
        return None;
    }
    let Literal::PosTrans(Term::Fun(f, args), l, Term::Fun(g, args2)) = &rule.conclusion else { return None };
    let Literal::PosTrans(Term::Var(x), l2, Term::Var(y)) = &rule.premises[0] else { return None };
    let (_, xs) = flat_source(rule)?;
    if f != g || l != l2 || xs.contains(&y.as_str()) || !matches!(l, LabelExpr::Tau | LabelExpr::Var(_)) {
        return None;
    }
    let i = xs.iter().position(|v| v == x)?;
    let mut expect = args.clone();
    expect[i] = Term::Var(y.clone());
    (expect == *args2).then(|| ((f.clone(), i + 1), *l == LabelExpr::Tau))
}

fn patience_slots(ptss: &Ptss) -> BTreeSet<Slot> {
    ptss.rules.iter().filter_map(patience_slot).map(|(s, _)| s).collect()
}

/// Variables among `vars` that occur in the target off wild-nested
/// positions.
fn nested_only(rule: &Rule, lab: &TameWildLabelling, vars: &BTreeSet<String>) -> Check {
    let Some(t) = rule.target() else { return Ok(()) };
    match lab.occurrences(t).into_iter().find(|(x, nested)| !nested && vars.contains(x)) {
        Some((x, _)) => Err(format!("`{x}` occurs at a position of the target that is not wild-nested")),
        None => Ok(()),
    }
}

fn wild_source_vars(rule: &Rule, lab: &TameWildLabelling) -> Vec<(usize, String)> {
    match flat_source(rule) {
        Some((f, xs)) => {
            xs.iter().enumerate().filter(|(i, _)| lab.is_wild(f, i + 1)).map(|(i, x)| (i + 1, x.to_string())).collect()
        }
        None => Vec::new(),
    }
}

fn may_be_tau(l: &LabelExpr) -> bool {
    match l {
        LabelExpr::Tau | LabelExpr::Var(_) => true,
        LabelExpr::Par(a, b) | LabelExpr::Seq(a, b) => may_be_tau(a) || may_be_tau(b),
        LabelExpr::Const(p) => p.labels().iter().any(|a| a.is_tau()),
        LabelExpr::Sigma => false,
    }
}

fn rbb_rule(rule: &Rule, lab: &TameWildLabelling, patient: &BTreeSet<Slot>) -> Check {
    let mut non_tau_schema = false;
    if let Some(((f, i), pure)) = patience_slot(rule) {
        if lab.is_wild(&f, i) {
            if pure {
                return Ok(());
            }
            non_tau_schema = true;
        }
    }
    let (f, _) = flat_source(rule).ok_or_else(|| format!("source `{}` is not f(x1, ..., xn)", rule.source()))?;
    rhs_not_in_lhs(rule)?;
    let lhs = lhs_occurrences(rule);
    let wild = wild_source_vars(rule, lab);
    for (i, x) in &wild {
        let n = lhs.iter().filter(|v| *v == x).count();
        if !patient.contains(&(f.to_string(), *i)) {
            ensure(n == 0, || format!("wild `{x}` without patience rule occurs in a premise"))?;
            continue;
        }
        ensure(n <= 1, || format!("wild `{x}` occurs in several premises"))?;
        if let Some(p) = rule.premises.iter().find(|p| p.subject().free_vars().contains(x)) {
            ensure(p.is_positive(), || format!("wild `{x}` occurs in negative premise `{p}`"))?;
            ensure(*p.subject() == Term::Var(x.clone()), || format!("wild `{x}` is inside a premise source"))?;
            let tau = p.label().is_some_and(|l| if non_tau_schema { *l == LabelExpr::Tau } else { may_be_tau(l) });
            ensure(!tau, || format!("premise `{p}` on wild `{x}` may be a tau step"))?;
        }
    }
    let mut vars = positive_rhs_vars(rule);
    vars.extend(wild.into_iter().map(|(_, x)| x));
    nested_only(rule, lab, &vars)
}

fn f_winterized_rule(rule: &Rule, lab: &TameWildLabelling) -> Check {
    rhs_not_in_lhs(rule)?;
    let target_vars = rule.target().map(Term::free_vars).unwrap_or_default();
    let wild = wild_source_vars(rule, lab);
    for (_, x) in &wild {
        let on_x: Vec<&Literal> = rule.premises.iter().filter(|p| *p.subject() == Term::var(x)).collect();
        let kept = on_x.iter().any(|p| matches!(p, Literal::PosTrans(_, _, Term::Var(y)) if target_vars.contains(y)));
        ensure(!kept || on_x.len() == 1, || format!("wild `{x}` has a premise feeding the target and other premises"))?;
    }
    let mut vars = positive_rhs_vars(rule);
    vars.extend(wild.into_iter().map(|(_, x)| x));
    nested_only(rule, lab, &vars)?;
    let occ = rule.target().map(Term::var_occurrences).unwrap_or_default();
    let mut seen = BTreeSet::new();
    for x in occ {
        ensure(seen.insert(x.clone()), || format!("variable `{x}` occurs more than once in the target"))?;
    }
    Ok(())
}

fn l_cool_rule(rule: &Rule, lab: &TameWildLabelling) -> Check {
    let mut vars: BTreeSet<String> = wild_source_vars(rule, lab).into_iter().map(|(_, x)| x).collect();
    vars.extend(rule.premises.iter().filter_map(Literal::target).flat_map(Term::free_vars));
    let target_occ = rule.target().map(|t| lab.occurrences(t)).unwrap_or_default();
    for x in &vars {
        let mut good = 0;
        let mut total = 0;
        for p in &rule.premises {
            let n = p.subject().var_occurrences().iter().filter(|v| *v == x).count();
            total += n;
            if *p.subject() == Term::var(x) {
                good += 1;
            }
        }
        for (v, nested) in &target_occ {
            if v == x {
                total += 1;
                good += usize::from(*nested);
            }
        }
        ensure(total == 1 && good == 1, || {
            format!("`{x}` must occur exactly once, as a premise source or wild-nested in the target")
        })?;
    }
    ensure(VarDepGraph::of_premises(&rule.premises).is_acyclic(), || "premises have a cyclic dependency".into())
}

/// Rule-by-rule failures under `lab`, after the format's prerequisite.
fn failures(ptss: &Ptss, format: Format, lab: &TameWildLabelling, patient: &BTreeSet<Slot>) -> Vec<RuleDiagnostic> {
    let diag = |r: &Rule, e: Check| e.err().map(|reason| RuleDiagnostic { rule: r.name.clone(), reason });
    ptss.rules
        .iter()
        .filter_map(|r| match format {
            Format::RbbSafe => diag(r, rbb_rule(r, lab, patient)),
            Format::FWinterized => diag(r, f_winterized_rule(r, lab)),
            Format::LCool => diag(r, l_cool_rule(r, lab)),
            _ => unreachable!("not a labelling format"),
        })
        .collect()
}

fn prerequisite(format: Format) -> Format {
    match format {
        Format::RbbSafe => Format::Panth,
        Format::FWinterized => Format::Gsos,
        Format::LCool => Format::Path,
        _ => unreachable!("not a labelling format"),
    }
}

fn check(ptss: &Ptss, format: Format, lab: &TameWildLabelling) -> Result<(), Vec<RuleDiagnostic>> {
    let pre = classify(ptss, prerequisite(format));
    if !pre.verdict.holds() {
        return Err(pre.failures);
    }
    let f = failures(ptss, format, lab, &patience_slots(ptss));
    if f.is_empty() {
        Ok(())
    } else {
        Err(f)
    }
}

/// Checks the RBB safe clauses of every rule under a given labelling.
pub fn check_rbb_safe(ptss: &Ptss, lab: &TameWildLabelling) -> Result<(), Vec<RuleDiagnostic>> {
    check(ptss, Format::RbbSafe, lab)
}

pub fn check_f_winterized(ptss: &Ptss, lab: &TameWildLabelling) -> Result<(), Vec<RuleDiagnostic>> {
    check(ptss, Format::FWinterized, lab)
}

pub fn check_l_cool(ptss: &Ptss, lab: &TameWildLabelling) -> Result<(), Vec<RuleDiagnostic>> {
    check(ptss, Format::LCool, lab)
}

/// Argument slots of symbols that occur in some rule; the labels of other
/// slots cannot matter.
fn search_space(ptss: &Ptss) -> Vec<Slot> {
    fn symbols(t: &Term, out: &mut BTreeSet<String>) {
        match t {
            Term::Fun(f, args) => {
                out.insert(f.clone());
                args.iter().for_each(|a| symbols(a, out));
            }
            Term::Fix(_, b) => symbols(b, out),
            _ => {}
        }
    }
    let mut used = BTreeSet::new();
    for r in &ptss.rules {
        for l in r.premises.iter().chain(std::iter::once(&r.conclusion)) {
            symbols(l.subject(), &mut used);
            if let Some(t) = l.target() {
                symbols(t, &mut used);
            }
        }
    }
    ptss.signature
        .functions
        .iter()
        .filter(|(f, _)| used.contains(*f))
        .flat_map(|(f, &n)| (1..=n).map(move |i| (f.clone(), i)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchError {
    /// The format's prerequisite fails on these rules.
    Prerequisite(Vec<RuleDiagnostic>),
    TooManySlots(usize),
}

/// Searches all labellings, fewest wild slots first, for one under which
/// `format` holds; `Ok(None)` when none exists.
pub fn search_labelling(ptss: &Ptss, format: Format) -> Result<Option<TameWildLabelling>, SearchError> {
    search(ptss, format).map(|(l, _)| l)
}

fn search(ptss: &Ptss, format: Format) -> Result<(Option<TameWildLabelling>, Vec<RuleDiagnostic>), SearchError> {
    let pre = classify(ptss, prerequisite(format));
    if !pre.verdict.holds() {
        return Err(SearchError::Prerequisite(pre.failures));
    }
    let space = search_space(ptss);
    if space.len() > MAX_SEARCH_SLOTS {
        return Err(SearchError::TooManySlots(space.len()));
    }
    let patient = patience_slots(ptss);
    let mut masks: Vec<u32> = (0..1u32 << space.len()).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut best: Option<Vec<RuleDiagnostic>> = None;
    for m in masks {
        let mut lab = TameWildLabelling::all_tame(&ptss.signature);
        for (k, (f, i)) in space.iter().enumerate() {
            if m & (1 << k) != 0 {
                lab.set(f, *i, Tameness::Wild);
            }
        }
        let f = failures(ptss, format, &lab, &patient);
        if f.is_empty() {
            return Ok((Some(lab), Vec::new()));
        }
        if best.as_ref().is_none_or(|b| f.len() < b.len()) {
            best = Some(f);
        }
    }
    Ok((None, best.unwrap_or_default()))
}

pub(super) fn classify_labelled(ptss: &Ptss, format: Format) -> FormatVerdict {
    let (verdict, failures, labelling) = match search(ptss, format) {
        Ok((Some(l), _)) => (Verdict::Holds, Vec::new(), Some(l)),
        Ok((None, best)) => (Verdict::Fails, best, None),
        Err(SearchError::Prerequisite(d)) => (Verdict::Fails, d, None),
        Err(SearchError::TooManySlots(n)) => {
            let reason = format!("{n} argument slots exceed the search limit of {MAX_SEARCH_SLOTS}");
            (Verdict::Unknown, vec![RuleDiagnostic { rule: String::new(), reason }], None)
        }
    };
    FormatVerdict { format, verdict, failures, labelling }
}
