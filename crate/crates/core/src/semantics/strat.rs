//! Bounded search for stratification certificates with subject-based
//! measures.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::pomset::Pomset;
use crate::rules::{Literal, Ptss, Rule};
use crate::term::{Substitution, Term};

/// Weights on closed terms, compared lexicographically; a literal weighs
/// what its subject weighs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Measure {
    SourceSize,
    SymbolCount(String),
    Lex(Vec<Measure>),
}

impl Measure {
    pub fn weight(&self, t: &Term) -> Vec<u64> {
        match self {
            Measure::SourceSize => vec![t.size() as u64],
            Measure::SymbolCount(f) => vec![t.count_symbol(f) as u64],
            Measure::Lex(ms) => ms.iter().flat_map(|m| m.weight(t)).collect(),
        }
    }

    /// `source-size`, `symbol-count(f)` or `lex(m1, m2, ...)`.
    pub fn parse(s: &str) -> Result<Measure, String> {
        let s = s.trim();
        if s == "source-size" {
            return Ok(Measure::SourceSize);
        }
        if let Some(inner) = s.strip_prefix("symbol-count(").and_then(|r| r.strip_suffix(')')) {
            return Ok(Measure::SymbolCount(inner.trim().to_string()));
        }
        if let Some(inner) = s.strip_prefix("lex(").and_then(|r| r.strip_suffix(')')) {
            let mut parts = Vec::new();
            let (mut depth, mut start) = (0, 0);
            for (i, c) in inner.char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    ',' if depth == 0 => {
                        parts.push(Measure::parse(&inner[start..i])?);
                        start = i + 1;
                    }
                    _ => {}
                }
            }
            parts.push(Measure::parse(&inner[start..])?);
            return Ok(Measure::Lex(parts));
        }
        Err(format!("unknown measure `{s}` (expected source-size, symbol-count(f) or lex(...))"))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::SourceSize => f.write_str("source-size"),
            Measure::SymbolCount(s) => write!(f, "symbol-count({s})"),
            Measure::Lex(ms) => {
                let parts: Vec<String> = ms.iter().map(ToString::to_string).collect();
                write!(f, "lex({})", parts.join(", "))
            }
        }
    }
}

/// An instance breaking condition 1 (positive premise heavier than the
/// conclusion) or condition 2 (negative premise not lighter).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: String,
    pub condition: u8,
    pub premise: String,
    pub conclusion: String,
    pub premise_weight: Vec<u64>,
    pub conclusion_weight: Vec<u64>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rule {}: premise `{}` weighs {:?}, conclusion `{}` weighs {:?} (condition {})",
            self.rule, self.premise, self.premise_weight, self.conclusion, self.conclusion_weight, self.condition
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratificationReport {
    pub measure: String,
    /// Depth of the closed terms substituted for variables.
    pub pool_depth: usize,
    pub instances: usize,
    pub violation: Option<Violation>,
}

impl StratificationReport {
    pub fn certified(&self) -> bool {
        self.violation.is_none()
    }
}

pub fn check_stratification(ptss: &Ptss, measure: &Measure) -> StratificationReport {
    check_stratification_with(ptss, measure, 1)
}

const POOL_CAP: usize = 400;

fn term_pool(ptss: &Ptss, depth: usize) -> Vec<Term> {
    let sig = &ptss.signature;
    let mut pool: Vec<Term> = sig.functions.iter().filter(|(_, &n)| n == 0).map(|(f, _)| Term::fun(f, vec![])).collect();
    if sig.pomset_constants {
        pool.push(Term::Const(Pomset::action("a")));
        pool.push(Term::Const(Pomset::action("b")));
    }
    for _ in 0..depth {
        let base = pool.clone();
        let mut seen: BTreeSet<Term> = pool.iter().cloned().collect();
        for (f, &n) in &sig.functions {
            if n == 0 {
                continue;
            }
            let mut args: Vec<Vec<Term>> = vec![vec![]];
            for _ in 0..n {
                args = args
                    .into_iter()
                    .flat_map(|a| {
                        base.iter().map(move |t| {
                            let mut a2 = a.clone();
                            a2.push(t.clone());
                            a2
                        })
                    })
                    .collect();
            }
            for a in args {
                let t = Term::fun(f, a);
                if pool.len() < POOL_CAP && seen.insert(t.clone()) {
                    pool.push(t);
                }
            }
        }
    }
    pool
}

fn subject_vars(r: &Rule) -> Vec<String> {
    let mut v: BTreeSet<String> = r.source().free_vars();
    for p in &r.premises {
        v.extend(p.subject().free_vars());
    }
    v.into_iter().collect()
}

/// Checks both stratification conditions on every rule instance obtained by
/// substituting closed terms of depth at most `pool_depth` for the
/// variables of sources and premise subjects.
pub fn check_stratification_with(ptss: &Ptss, measure: &Measure, pool_depth: usize) -> StratificationReport {
    let pool = term_pool(ptss, pool_depth);
    let mut report =
        StratificationReport { measure: measure.to_string(), pool_depth, instances: 0, violation: None };
    let mut rules: Vec<Rule> = ptss.rules.clone();
    if ptss.fix_recursion {
        rules.extend(fix_instances(ptss, &pool));
    }
    for r in &rules {
        let vars = subject_vars(r);
        let mut idx = vec![0usize; vars.len()];
        if !vars.is_empty() && pool.is_empty() {
            continue;
        }
        loop {
            let s: Substitution = vars.iter().cloned().zip(idx.iter().map(|&i| pool[i].clone())).collect();
            report.instances += 1;
            if let Some(v) = check_instance(r, &s, measure) {
                report.violation = Some(v);
                return report;
            }
            // odometer over the pool
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] < pool.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    report
}

/// The recursion schema as closed rules `unfold(fix X.t) -U-> y |- fix X.t -U-> y`
/// for sample bodies.
fn fix_instances(ptss: &Ptss, pool: &[Term]) -> Vec<Rule> {
    let x = Term::var("X");
    let mut bodies = vec![x.clone()];
    for (f, &n) in &ptss.signature.functions {
        if n == 2 {
            for c in pool.iter().take(4) {
                bodies.push(Term::fun(f, vec![c.clone(), x.clone()]));
                bodies.push(Term::fun(f, vec![x.clone(), c.clone()]));
            }
        }
    }
    bodies
        .into_iter()
        .map(|b| {
            let fix = Term::fix("X", b);
            let unf = fix.unfold().expect("fix");
            Rule {
                name: "fix".into(),
                premises: vec![Literal::PosTrans(unf, crate::rules::LabelExpr::var("U"), Term::var("y"))],
                guards: vec![],
                conclusion: Literal::PosTrans(fix, crate::rules::LabelExpr::var("U"), Term::var("y")),
            }
        })
        .collect()
}

fn check_instance(r: &Rule, s: &Substitution, m: &Measure) -> Option<Violation> {
    let concl = r.source().substitute(s);
    let cw = m.weight(&concl);
    for p in &r.premises {
        let subj = p.subject().substitute(s);
        let pw = m.weight(&subj);
        let bad = if p.is_positive() { pw > cw } else { pw >= cw };
        if bad {
            return Some(Violation {
                rule: r.name.clone(),
                condition: if p.is_positive() { 1 } else { 2 },
                premise: show(p, s),
                conclusion: show(&r.conclusion, s),
                premise_weight: pw,
                conclusion_weight: cw,
            });
        }
    }
    None
}

fn show(l: &Literal, s: &Substitution) -> String {
    let subject = l.subject().substitute(s);
    match l {
        Literal::PosTrans(_, e, t) => format!("{subject} -{e}-> {}", t.substitute(s)),
        Literal::NegTrans(_, e) => format!("{subject} -/{e}->"),
        Literal::NegTransTo(_, e, t) => format!("{subject} -/{e}-> {}", t.substitute(s)),
        Literal::Pred(_, p) => format!("{subject} : {p}"),
        Literal::NegPred(_, p) => format!("{subject} !: {p}"),
    }
}
