//! Built-in specifications: BPA with the empty process, parallel
//! composition, priority, discrete time, and fixpoint recursion.
//!
//! Each one also ships as a `.ptss` file under `data/`.

use thiserror::Error;

use crate::pomset::Pomset;
use crate::rules::{Guard, LabelExpr, Literal, Priority, Ptss, Rule, RuleError};
use crate::term::{sym, Signature, Term, SQRT};

pub const BPA_EPS_SRC: &str = include_str!("../../data/bpa_eps.ptss");
pub const APTC_SRC: &str = include_str!("../../data/aptc.ptss");
pub const BPA_EPS_THETA_SRC: &str = include_str!("../../data/bpa_eps_theta.ptss");
pub const BPA_EPS_DT_SRC: &str = include_str!("../../data/bpa_eps_dt.ptss");
pub const DE_SIMONE_FIX_SRC: &str = include_str!("../../data/de_simone_fix.ptss");
pub const SELF_NEGATION_SRC: &str = include_str!("../../data/self_negation.ptss");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("unknown algebra `{name}` (known: {known})", known = NAMES.join(", "))]
    Unknown { name: String },
    #[error(transparent)]
    Priority(#[from] RuleError),
}

pub const NAMES: [&str; 6] = ["bpa_eps", "aptc", "bpa_eps_theta", "bpa_eps_dt", "de_simone_fix", "self_negation"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuiltinName {
    BpaEps,
    Aptc,
    BpaEpsTheta(Priority),
    BpaEpsDt,
    DeSimoneFix,
    SelfNegation,
}

pub fn builtin(name: BuiltinName) -> Ptss {
    match name {
        BuiltinName::BpaEps => bpa_eps(),
        BuiltinName::Aptc => aptc(),
        BuiltinName::BpaEpsTheta(p) => bpa_eps_theta(p),
        BuiltinName::BpaEpsDt => bpa_eps_dt(),
        BuiltinName::DeSimoneFix => de_simone_fix(),
        BuiltinName::SelfNegation => self_negation(),
    }
}

/// Looks a builtin up by name; the priority algebra gets an empty order.
pub fn by_name(name: &str) -> Result<Ptss, AlgebraError> {
    Ok(match name {
        "bpa_eps" => bpa_eps(),
        "aptc" => aptc(),
        "bpa_eps_theta" => bpa_eps_theta(Priority::default()),
        "bpa_eps_dt" => bpa_eps_dt(),
        "de_simone_fix" => de_simone_fix(),
        "self_negation" => self_negation(),
        _ => return Err(AlgebraError::Unknown { name: name.to_string() }),
    })
}

/// The priority algebra over `pairs` (each `a < b` means `b` wins).
pub fn bpa_eps_theta_with(pairs: &[(Pomset, Pomset)]) -> Result<Ptss, AlgebraError> {
    Ok(bpa_eps_theta(Priority::new(pairs.iter().cloned())?))
}

pub fn source_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "bpa_eps" => BPA_EPS_SRC,
        "aptc" => APTC_SRC,
        "bpa_eps_theta" => BPA_EPS_THETA_SRC,
        "bpa_eps_dt" => BPA_EPS_DT_SRC,
        "de_simone_fix" => DE_SIMONE_FIX_SRC,
        "self_negation" => SELF_NEGATION_SRC,
        _ => return None,
    })
}

fn v(x: &str) -> Term {
    Term::var(x)
}

fn lv(x: &str) -> LabelExpr {
    LabelExpr::var(x)
}

fn tr(t: Term, l: LabelExpr, u: Term) -> Literal {
    Literal::PosTrans(t, l, u)
}

fn ok(t: Term) -> Literal {
    Literal::Pred(t, SQRT.to_string())
}

fn rule(name: &str, premises: Vec<Literal>, conclusion: Literal) -> Rule {
    Rule { name: name.to_string(), premises, guards: vec![], conclusion }
}

pub fn bpa_eps() -> Ptss {
    let mut sig = Signature::default()
        .with_function(sym::EPS, 0)
        .with_function(sym::ALT, 2)
        .with_function(sym::SEQ, 2)
        .with_predicate(SQRT);
    sig.pomset_constants = true;
    let mut p = Ptss::new("bpa_eps", sig);
    p.pomset_axiom = true;
    let alt = || Term::alt(v("x"), v("y"));
    let seq = || Term::seq(v("x"), v("y"));
    p.rules = vec![
        rule("eps_term", vec![], ok(Term::eps())),
        rule("alt_term_l", vec![ok(v("x"))], ok(alt())),
        rule("alt_l", vec![tr(v("x"), lv("U"), v("x'"))], tr(alt(), lv("U"), v("x'"))),
        rule("alt_term_r", vec![ok(v("y"))], ok(alt())),
        rule("alt_r", vec![tr(v("y"), lv("U"), v("y'"))], tr(alt(), lv("U"), v("y'"))),
        rule("seq_term", vec![ok(v("x")), ok(v("y"))], ok(seq())),
        rule("seq_skip", vec![ok(v("x")), tr(v("y"), lv("U"), v("y'"))], tr(seq(), lv("U"), v("y'"))),
        rule("seq", vec![tr(v("x"), lv("U"), v("x'"))], tr(seq(), lv("U"), Term::seq(v("x'"), v("y")))),
    ];
    p
}

pub fn aptc() -> Ptss {
    let mut p = bpa_eps();
    p.name = "aptc".into();
    p.signature.functions.insert(sym::PAR.into(), 2);
    let par = || Term::par(v("x"), v("y"));
    p.rules.extend([
        rule("par_term", vec![ok(v("x")), ok(v("y"))], ok(par())),
        rule("par_l", vec![tr(v("x"), lv("U"), v("x'")), ok(v("y"))], tr(par(), lv("U"), v("x'"))),
        rule("par_r", vec![ok(v("x")), tr(v("y"), lv("U"), v("y'"))], tr(par(), lv("U"), v("y'"))),
        rule(
            "par",
            vec![tr(v("x"), lv("U1"), v("x'")), tr(v("y"), lv("U2"), v("y'"))],
            tr(par(), LabelExpr::Par(Box::new(lv("U1")), Box::new(lv("U2"))), Term::par(v("x'"), v("y'"))),
        ),
    ]);
    p
}

pub fn bpa_eps_theta(priority: Priority) -> Ptss {
    let mut p = bpa_eps();
    p.name = "bpa_eps_theta".into();
    p.signature.functions.insert(sym::THETA.into(), 1);
    p.priority = priority;
    let th = |t: Term| Term::fun(sym::THETA, vec![t]);
    p.rules.push(rule("theta_term", vec![ok(v("x"))], ok(th(v("x")))));
    p.rules.push(Rule {
        name: "theta".into(),
        premises: vec![tr(v("x"), lv("U1"), v("x'")), Literal::NegTrans(v("x"), lv("U2"))],
        guards: vec![Guard::PriorityLt(lv("U1"), lv("U2"))],
        conclusion: tr(th(v("x")), lv("U1"), th(v("x'"))),
    });
    p
}

pub fn bpa_eps_dt() -> Ptss {
    let mut p = bpa_eps();
    p.name = "bpa_eps_dt".into();
    p.signature.functions.insert(sym::DELAY.into(), 1);
    let s = || LabelExpr::Sigma;
    let alt = || Term::alt(v("x"), v("y"));
    let seq = || Term::seq(v("x"), v("y"));
    p.rules.extend([
        rule("delay", vec![], tr(Term::fun(sym::DELAY, vec![v("x")]), s(), v("x"))),
        rule(
            "alt_delay_l",
            vec![tr(v("x"), s(), v("x'")), Literal::NegTrans(v("y"), s())],
            tr(alt(), s(), v("x'")),
        ),
        rule(
            "alt_delay_r",
            vec![tr(v("y"), s(), v("y'")), Literal::NegTrans(v("x"), s())],
            tr(alt(), s(), v("y'")),
        ),
        rule(
            "alt_delay",
            vec![tr(v("x"), s(), v("x'")), tr(v("y"), s(), v("y'"))],
            tr(alt(), s(), Term::alt(v("x'"), v("y'"))),
        ),
        rule("seq_delay_skip", vec![ok(v("x")), tr(v("y"), s(), v("y'"))], tr(seq(), s(), v("y'"))),
        rule("seq_delay", vec![tr(v("x"), s(), v("x'"))], tr(seq(), s(), Term::seq(v("x'"), v("y")))),
    ]);
    p
}

pub fn de_simone_fix() -> Ptss {
    let mut p = bpa_eps();
    p.name = "de_simone_fix".into();
    p.fix_recursion = true;
    p
}

/// `f -/a-> |- f -a-> f`: no stable model decides the transition.
pub fn self_negation() -> Ptss {
    let mut p = Ptss::new("self_negation", Signature::default().with_function("f", 0));
    let f = || Term::fun("f", vec![]);
    let a = || LabelExpr::Const(Pomset::action("a"));
    p.rules.push(rule("selfneg", vec![Literal::NegTrans(f(), a())], tr(f(), a(), f())));
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_ptss;

    #[test]
    fn shipped_files_match_constructors() {
        for name in NAMES {
            let parsed = parse_ptss(source_text(name).unwrap()).unwrap();
            assert_eq!(parsed, by_name(name).unwrap(), "{name}");
        }
    }

    #[test]
    fn rule_counts() {
        assert_eq!(bpa_eps().rule_count(), 9);
        assert_eq!(aptc().rule_count(), 9 + 4);
        assert_eq!(bpa_eps_dt().rule_count(), 9 + 6);
        assert_eq!(bpa_eps_theta(Priority::default()).rule_count(), 9 + 2);
    }

    #[test]
    fn printed_specs_reparse() {
        for name in NAMES {
            let p = by_name(name).unwrap();
            assert_eq!(parse_ptss(&p.to_string()).unwrap(), p, "{name}");
        }
        let th = bpa_eps_theta_with(&[(Pomset::action("a"), Pomset::action("b"))]).unwrap();
        assert_eq!(parse_ptss(&th.to_string()).unwrap(), th);
    }

    #[test]
    fn cyclic_priority_is_rejected() {
        let (a, b) = (Pomset::action("a"), Pomset::action("b"));
        assert!(matches!(
            bpa_eps_theta_with(&[(a.clone(), b.clone()), (b, a)]),
            Err(AlgebraError::Priority(RuleError::CyclicPriority(_)))
        ));
    }
}
