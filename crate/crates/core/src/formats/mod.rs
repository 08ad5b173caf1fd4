//! Syntactic rule formats, conservative extension and junk rules.
//!
//! Every check reads rules literally. Label metavariables stand for all
//! their instances; guards are ignored. The built-in pomset axiom has a
//! constant source, no premises and target `eps`, so it passes every
//! format. The fixpoint recursion schema sits outside the formats and is
//! listed separately in reports.

mod conservative;
mod labelling;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::rules::{Literal, Ptss, Rule};
use crate::term::Term;
use crate::verdict::Verdict;

pub use conservative::{
    check_conservative_extension, junk_rule, source_dependent, spot_check_extension, Clause, ConservativeError,
    Conservativity, Derivation, Discrepancy, Junk, JunkError, SourceDependency,
};
pub use labelling::{
    check_f_winterized, check_l_cool, check_rbb_safe, patience_slot, search_labelling, SearchError, Slot, Tameness,
    TameWildLabelling, MAX_SEARCH_SLOTS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Format {
    Positive,
    Panth,
    Path,
    NtyftNtyxt,
    TyftTyxt,
    Tyft,
    Ntree,
    DeSimone,
    Gsos,
    PositiveGsos,
    ReadySimulation,
    ReadyPomsetTrace,
    PomsetTrace,
    RbbSafe,
    FWinterized,
    LCool,
    SourceDependent,
}

impl Format {
    pub const ALL: [Format; 17] = [
        Format::Positive,
        Format::Panth,
        Format::Path,
        Format::NtyftNtyxt,
        Format::TyftTyxt,
        Format::Tyft,
        Format::Ntree,
        Format::DeSimone,
        Format::Gsos,
        Format::PositiveGsos,
        Format::ReadySimulation,
        Format::ReadyPomsetTrace,
        Format::PomsetTrace,
        Format::RbbSafe,
        Format::FWinterized,
        Format::LCool,
        Format::SourceDependent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Format::Positive => "positive",
            Format::Panth => "panth",
            Format::Path => "path",
            Format::NtyftNtyxt => "ntyft/ntyxt",
            Format::TyftTyxt => "tyft/tyxt",
            Format::Tyft => "tyft",
            Format::Ntree => "ntree",
            Format::DeSimone => "De Simone",
            Format::Gsos => "GSOS",
            Format::PositiveGsos => "positive GSOS",
            Format::ReadySimulation => "ready simulation",
            Format::ReadyPomsetTrace => "ready pomset trace",
            Format::PomsetTrace => "pomset trace",
            Format::RbbSafe => "RBB safe",
            Format::FWinterized => "F-winterized",
            Format::LCool => "L cool",
            Format::SourceDependent => "source-dependent",
        }
    }

    /// Whether the format asks for a tame/wild labelling.
    pub fn needs_labelling(self) -> bool {
        matches!(self, Format::RbbSafe | Format::FWinterized | Format::LCool)
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Format {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Inclusions between formats: every rule of the first is a rule of the
/// second.
pub const LATTICE: [(Format, Format); 8] = [
    (Format::DeSimone, Format::PositiveGsos),
    (Format::PositiveGsos, Format::Gsos),
    (Format::PositiveGsos, Format::TyftTyxt),
    (Format::Gsos, Format::NtyftNtyxt),
    (Format::TyftTyxt, Format::NtyftNtyxt),
    (Format::TyftTyxt, Format::Path),
    (Format::NtyftNtyxt, Format::Panth),
    (Format::Path, Format::Panth),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleDiagnostic {
    pub rule: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormatVerdict {
    pub format: Format,
    pub verdict: Verdict,
    pub failures: Vec<RuleDiagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labelling: Option<TameWildLabelling>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormatReport {
    pub ptss: String,
    pub formats: Vec<FormatVerdict>,
    /// Built-in schemas that are not classified rule by rule.
    pub schemas: Vec<String>,
}

impl FormatReport {
    pub fn get(&self, f: Format) -> Option<&FormatVerdict> {
        self.formats.iter().find(|v| v.format == f)
    }

    pub fn verdict(&self, f: Format) -> Verdict {
        self.get(f).map_or(Verdict::Unknown, |v| v.verdict)
    }

    pub fn holds(&self, f: Format) -> bool {
        self.verdict(f).holds()
    }

    /// Human-readable table, one format per line with its first failure.
    pub fn table(&self) -> String {
        let mut out = format!("formats of {}\n", self.ptss);
        for v in &self.formats {
            let extra = match (&v.labelling, v.failures.first()) {
                (Some(l), _) => format!("  labelling {l}"),
                (None, Some(d)) => format!("  {}: {}", d.rule, d.reason),
                (None, None) => String::new(),
            };
            let line = format!("{:<20} {:<8}{}", v.format.name(), v.verdict.to_string(), extra);
            out.push_str(line.trim_end());
            out.push('\n');
        }
        for s in &self.schemas {
            out.push_str(&format!("schema {s}: not classified\n"));
        }
        out
    }
}

/// Every inclusion of the lattice holds on the report's verdicts: no
/// format holds while a format above it fails.
pub fn lattice_consistency(report: &FormatReport) -> bool {
    LATTICE.iter().all(|&(lo, hi)| !(report.verdict(lo).holds() && report.verdict(hi).fails()))
}

/// The variable dependency graph of a set of premises: an edge from `x` to
/// `y` when some positive transition premise has `x` in its left-hand side
/// and `y` in its right-hand side.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VarDepGraph {
    pub vertices: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl VarDepGraph {
    pub fn of_premises<'a>(premises: impl IntoIterator<Item = &'a Literal>) -> Self {
        let mut g = VarDepGraph::default();
        for p in premises {
            g.vertices.extend(p.term_vars());
            if let Literal::PosTrans(t, _, u) = p {
                for x in t.free_vars() {
                    for y in u.free_vars() {
                        g.edges.insert((x.clone(), y));
                    }
                }
            }
        }
        g
    }

    /// The graph of a rule's premises with every rule variable as vertex.
    pub fn of_rule(rule: &Rule) -> Self {
        let mut g = Self::of_premises(&rule.premises);
        g.vertices.extend(rule.term_vars());
        g
    }

    fn successors(&self, x: &str) -> impl Iterator<Item = &String> + '_ {
        let x = x.to_string();
        self.edges.iter().filter(move |(a, _)| *a == x).map(|(_, b)| b)
    }

    /// A finite graph has no infinite backward or forward chain exactly
    /// when it is acyclic.
    pub fn is_acyclic(&self) -> bool {
        let mut indeg: BTreeMap<&String, usize> = self.vertices.iter().map(|v| (v, 0)).collect();
        for (_, b) in &self.edges {
            *indeg.entry(b).or_default() += 1;
        }
        let mut ready: Vec<&String> = indeg.iter().filter(|(_, &d)| d == 0).map(|(v, _)| *v).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for w in self.successors(v) {
                let d = indeg.get_mut(w).expect("vertex");
                *d -= 1;
                if *d == 0 {
                    ready.push(w);
                }
            }
        }
        seen == indeg.len()
    }

    pub fn is_well_founded(&self) -> bool {
        self.is_acyclic()
    }

    /// Whether `x` and `y` are joined by a path in the symmetric closure.
    pub fn connected(&self, x: &str, y: &str) -> bool {
        let mut seen: BTreeSet<&str> = BTreeSet::from([x]);
        let mut todo = vec![x];
        while let Some(v) = todo.pop() {
            if v == y {
                return true;
            }
            for (a, b) in &self.edges {
                let next = if a == v {
                    b.as_str()
                } else if b == v {
                    a.as_str()
                } else {
                    continue;
                };
                if seen.insert(next) {
                    todo.push(next);
                }
            }
        }
        false
    }
}

/// Number of function symbols, pomset constants and binders in `t`.
fn symbols(t: &Term) -> usize {
    t.size()
}

fn lhs_occurrences(rule: &Rule) -> Vec<String> {
    rule.premises.iter().flat_map(|p| p.subject().var_occurrences()).collect()
}

fn positive_rhs(rule: &Rule) -> Vec<&Term> {
    rule.premises
        .iter()
        .filter_map(|p| match p {
            Literal::PosTrans(_, _, u) => Some(u),
            _ => None,
        })
        .collect()
}

fn positive_rhs_vars(rule: &Rule) -> BTreeSet<String> {
    positive_rhs(rule).into_iter().flat_map(Term::free_vars).collect()
}

fn has_predicates(rule: &Rule) -> bool {
    rule.premises.iter().chain(std::iter::once(&rule.conclusion)).any(|l| l.predicate().is_some())
}

/// Source arguments when the source is `f(x1, ..., xn)` with distinct
/// variables.
fn flat_source(rule: &Rule) -> Option<(&str, Vec<&str>)> {
    let (f, args): (&str, &[Term]) = match rule.source() {
        Term::Fun(f, args) => (f, args),
        Term::Const(_) => ("", &[]),
        _ => return None,
    };
    let mut xs: Vec<&str> = Vec::new();
    for a in args {
        match a {
            Term::Var(x) if !xs.contains(&x.as_str()) => xs.push(x),
            _ => return None,
        }
    }
    Some((f, xs))
}

type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub(crate) fn panth(rule: &Rule) -> Check {
    for p in &rule.premises {
        if let Literal::PosTrans(_, _, u) = p {
            ensure(matches!(u, Term::Var(_)), || format!("premise `{p}` has a compound right-hand side"))?;
        }
    }
    ensure(symbols(rule.source()) <= 1, || format!("source `{}` has more than one function symbol", rule.source()))?;
    let mut seen = BTreeSet::new();
    let occ = rule.source().var_occurrences().into_iter().chain(positive_rhs(rule).into_iter().flat_map(Term::var_occurrences));
    for x in occ {
        ensure(seen.insert(x.clone()), || format!("variable `{x}` repeats among source and premise targets"))?;
    }
    Ok(())
}

fn positive(rule: &Rule) -> Check {
    match rule.premises.iter().find(|p| !p.is_positive()) {
        Some(p) => Err(format!("negative premise `{p}`")),
        None => Ok(()),
    }
}

fn no_predicates(rule: &Rule) -> Check {
    ensure(!has_predicates(rule), || "uses a predicate".into())
}

fn ntree(rule: &Rule) -> Check {
    panth(rule)?;
    let g = VarDepGraph::of_premises(&rule.premises);
    ensure(g.is_well_founded(), || "premises are not well-founded".into())?;
    let mut allowed = rule.source().free_vars();
    allowed.extend(positive_rhs_vars(rule));
    if let Some(x) = rule.term_vars().difference(&allowed).next() {
        return Err(format!("variable `{x}` is neither in the source nor a premise target"));
    }
    for p in rule.premises.iter().filter(|p| matches!(p, Literal::PosTrans(..) | Literal::Pred(..))) {
        ensure(matches!(p.subject(), Term::Var(_)), || format!("premise `{p}` has a compound left-hand side"))?;
    }
    Ok(())
}

/// Shared part of De Simone and GSOS: a flat source, premises on source
/// variables with variable targets, all variables distinct and no others.
fn gsos_shape(rule: &Rule, positive_only: bool) -> Result<Vec<String>, String> {
    let Literal::PosTrans(..) = rule.conclusion else {
        return Err("conclusion is not a transition".into());
    };
    let (_, xs) = flat_source(rule).ok_or_else(|| format!("source `{}` is not f(x1, ..., xn)", rule.source()))?;
    let mut vars: BTreeSet<String> = xs.iter().map(|x| x.to_string()).collect();
    for p in &rule.premises {
        let lhs_ok = matches!(p.subject(), Term::Var(x) if xs.contains(&x.as_str()));
        match p {
            Literal::PosTrans(_, _, Term::Var(y)) if lhs_ok => {
                ensure(vars.insert(y.clone()), || format!("variable `{y}` is not distinct"))?;
            }
            Literal::NegTrans(..) if lhs_ok && !positive_only => {}
            _ => return Err(format!("premise `{p}` is not of the form x -U-> y or x -/U->")),
        }
    }
    if let Some(x) = rule.target().into_iter().flat_map(Term::free_vars).find(|x| !vars.contains(x)) {
        return Err(format!("target variable `{x}` does not occur in source or premises"));
    }
    Ok(xs.iter().map(|x| x.to_string()).collect())
}

fn de_simone(rule: &Rule) -> Check {
    gsos_shape(rule, true)?;
    let mut used = BTreeSet::new();
    for p in &rule.premises {
        let x = p.subject().to_string();
        ensure(used.insert(x.clone()), || format!("source variable `{x}` has several premises"))?;
    }
    let target = rule.target().expect("transition conclusion");
    let occ = target.var_occurrences();
    if let Some(x) = occ.iter().find(|x| used.contains(*x)) {
        return Err(format!("target contains premise source `{x}`"));
    }
    let mut seen = BTreeSet::new();
    for x in occ {
        ensure(seen.insert(x.clone()), || format!("variable `{x}` occurs more than once in the target"))?;
    }
    Ok(())
}

fn gsos(rule: &Rule) -> Check {
    match rule.premises.iter().find(|p| matches!(p, Literal::NegTransTo(..))) {
        Some(p) => Err(format!("premise `{p}` is not of the form x -/U->")),
        None => gsos_shape(rule, false).map(|_| ()),
    }
}

fn rhs_not_in_lhs(rule: &Rule) -> Check {
    let rhs = positive_rhs_vars(rule);
    match lhs_occurrences(rule).into_iter().find(|x| rhs.contains(x)) {
        Some(x) => Err(format!("premise target `{x}` occurs in a premise left-hand side")),
        None => Ok(()),
    }
}

fn ready_simulation(rule: &Rule) -> Check {
    panth(rule)?;
    rhs_not_in_lhs(rule)
}

fn ready_pomset_trace(rule: &Rule) -> Check {
    ready_simulation(rule)?;
    let Some(target) = rule.target() else { return Ok(()) };
    let occ = target.var_occurrences();
    let g = VarDepGraph::of_premises(&rule.premises);
    for (i, x) in occ.iter().enumerate() {
        for y in &occ[i + 1..] {
            ensure(x != y && !g.connected(x, y), || format!("target variables `{x}` and `{y}` are connected"))?;
        }
    }
    Ok(())
}

fn tyft_tyxt(rule: &Rule) -> Check {
    panth(rule)?;
    positive(rule)?;
    no_predicates(rule)
}

fn tyft(rule: &Rule) -> Check {
    tyft_tyxt(rule)?;
    ensure(symbols(rule.source()) == 1, || format!("source `{}` is a variable", rule.source()))
}

fn pomset_trace(rule: &Rule) -> Check {
    tyft(rule)?;
    let mut allowed = rule.source().free_vars();
    allowed.extend(rule.premises.iter().filter_map(Literal::target).flat_map(Term::free_vars));
    if let Some(x) = rule.term_vars().difference(&allowed).next() {
        return Err(format!("variable `{x}` is neither in the source nor a premise target"));
    }
    let mut seen = BTreeSet::new();
    let target = rule.target().map(Term::var_occurrences).unwrap_or_default();
    for x in lhs_occurrences(rule).into_iter().chain(target) {
        ensure(seen.insert(x.clone()), || format!("variable `{x}` occurs twice in premise sources and target"))?;
    }
    Ok(())
}

fn source_dep(rule: &Rule) -> Check {
    let d = source_dependent(rule);
    match d.missing.first() {
        Some(x) => Err(format!("variable `{x}` is not source-dependent")),
        None => Ok(()),
    }
}

fn per_rule(ptss: &Ptss, format: Format, check: fn(&Rule) -> Check) -> FormatVerdict {
    let failures: Vec<RuleDiagnostic> = ptss
        .rules
        .iter()
        .filter_map(|r| check(r).err().map(|reason| RuleDiagnostic { rule: r.name.clone(), reason }))
        .collect();
    FormatVerdict { format, verdict: Verdict::from_bool(failures.is_empty()), failures, labelling: None }
}

/// Decides every format for `ptss`. Labelling formats are decided by
/// exhaustive search; when the signature has more than
/// [`MAX_SEARCH_SLOTS`] relevant argument slots they stay unknown.
pub fn classify_formats(ptss: &Ptss) -> FormatReport {
    let formats = Format::ALL.iter().map(|&f| classify(ptss, f)).collect();
    let mut schemas = Vec::new();
    if ptss.fix_recursion {
        schemas.push("fix recursion".to_string());
    }
    FormatReport { ptss: ptss.name.clone(), formats, schemas }
}

/// Decides one format for `ptss`.
pub fn classify(ptss: &Ptss, format: Format) -> FormatVerdict {
    let check: fn(&Rule) -> Check = match format {
        Format::Positive => positive,
        Format::Panth => panth,
        Format::Path => |r| panth(r).and_then(|_| positive(r)),
        Format::NtyftNtyxt => |r| panth(r).and_then(|_| no_predicates(r)),
        Format::TyftTyxt => tyft_tyxt,
        Format::Tyft => tyft,
        Format::Ntree => ntree,
        Format::DeSimone => de_simone,
        Format::Gsos => gsos,
        Format::PositiveGsos => |r| gsos(r).and_then(|_| positive(r)),
        Format::ReadySimulation => ready_simulation,
        Format::ReadyPomsetTrace => ready_pomset_trace,
        Format::PomsetTrace => pomset_trace,
        Format::SourceDependent => source_dep,
        Format::RbbSafe | Format::FWinterized | Format::LCool => return labelling::classify_labelled(ptss, format),
    };
    per_rule(ptss, format, check)
}
