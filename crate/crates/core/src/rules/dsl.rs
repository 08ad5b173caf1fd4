//! The `.ptss` rule language.
//!
//! ```text
//! algebra bpa_eps;
//! function + : 2;
//! predicate sqrt;
//! pomset-constants;
//! axiom pomset;
//! rule alt_l: x -U-> x' |- x + y -U-> x';
//! ```

use std::fmt;

use super::{Guard, LabelExpr, Literal, Priority, Ptss, Rule};
use crate::pomset::text::{parse_label, parse_pomset_at};
use crate::pomset::Pomset;
use crate::syntax::{Cursor, ParseError, Tok};
use crate::term::parse::TermParser;
use crate::term::{sym, Signature};

/// Parses a specification; `include` resolves against the built-in algebras.
pub fn parse_ptss(src: &str) -> Result<Ptss, ParseError> {
    parse_ptss_with(src, &|name| crate::algebras::by_name(name).ok())
}

/// Parses a specification with a custom resolver for `include name;`.
pub fn parse_ptss_with(src: &str, resolve: &dyn Fn(&str) -> Option<Ptss>) -> Result<Ptss, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut out = Ptss::new("unnamed", Signature::default());
    let mut prio: Vec<(Pomset, Pomset)> = Vec::new();
    while !cur.at_eof() {
        let (l, c) = cur.here();
        let kw = cur.expect_ident()?;
        match kw.as_str() {
            "algebra" => {
                out.name = cur.expect_ident()?;
            }
            "include" => {
                let name = cur.expect_ident()?;
                let inc = resolve(&name)
                    .ok_or_else(|| ParseError::new(l, c, format!("unknown algebra `{name}`")))?;
                let keep = out.name.clone();
                prio.extend(inc.priority.pairs().cloned());
                out = out.combine(&inc).map_err(|e| ParseError::new(l, c, e.to_string()))?;
                out.name = keep;
            }
            "function" => {
                let f = match cur.bump() {
                    Tok::Ident(s) => s,
                    Tok::Sym(s) if [sym::ALT, sym::SEQ, sym::PAR].contains(&s) => s.to_string(),
                    t => return Err(ParseError::new(l, c, format!("expected function symbol, found {t}"))),
                };
                cur.expect_sym(":")?;
                let n = match cur.bump() {
                    Tok::Num(n) => n as usize,
                    t => return Err(cur.error(format!("expected arity, found {t}"))),
                };
                if matches!(out.signature.arity(&f), Some(m) if m != n) {
                    return Err(ParseError::new(l, c, format!("`{f}` redeclared with a different arity")));
                }
                out.signature.functions.insert(f, n);
            }
            "predicate" => loop {
                out.signature.predicates.insert(cur.expect_ident()?);
                if !cur.eat_sym(",") {
                    break;
                }
            },
            "pomset" => {
                cur.expect_sym("-")?;
                if !cur.eat_ident("constants") {
                    return Err(cur.error("expected `pomset-constants`"));
                }
                out.signature.pomset_constants = true;
            }
            "axiom" => {
                if !cur.eat_ident("pomset") {
                    return Err(cur.error("expected `axiom pomset`"));
                }
                out.pomset_axiom = true;
            }
            "fix" => {
                cur.expect_sym("-")?;
                if !cur.eat_ident("recursion") {
                    return Err(cur.error("expected `fix-recursion`"));
                }
                out.fix_recursion = true;
            }
            "priority" => loop {
                let mut prev = parse_const_label(&mut cur)?;
                cur.expect_sym("<")?;
                loop {
                    let next = parse_const_label(&mut cur)?;
                    prio.push((prev, next.clone()));
                    prev = next;
                    if !cur.eat_sym("<") {
                        break;
                    }
                }
                if !cur.eat_sym(",") {
                    break;
                }
            },
            "rule" => {
                let r = rule_body(&mut cur, &out.signature)?;
                if out.rule(&r.name).is_some() {
                    return Err(ParseError::new(l, c, format!("duplicate rule name `{}`", r.name)));
                }
                out.rules.push(r);
            }
            other => return Err(ParseError::new(l, c, format!("unknown directive `{other}`"))),
        }
        cur.expect_sym(";")?;
    }
    let end = cur.here();
    out.priority = Priority::new(prio).map_err(|e| ParseError::new(end.0, end.1, e.to_string()))?;
    out.validate().map_err(|e| ParseError::new(end.0, end.1, e.to_string()))?;
    Ok(out)
}

/// Parses one `rule name: ... |- ...` line (without the trailing `;`).
pub fn parse_rule(src: &str, sig: &Signature) -> Result<Rule, ParseError> {
    let mut cur = Cursor::new(src)?;
    cur.eat_ident("rule");
    let r = rule_body(&mut cur, sig)?;
    cur.eat_sym(";");
    cur.expect_eof()?;
    Ok(r)
}

fn parse_const_label(cur: &mut Cursor) -> Result<Pomset, ParseError> {
    if cur.is_ident("tau") {
        cur.bump();
        return Ok(Pomset::tau());
    }
    if cur.is_ident("sigma") {
        cur.bump();
        return Ok(Pomset::sigma());
    }
    parse_pomset_at(cur)
}

fn rule_body(cur: &mut Cursor, sig: &Signature) -> Result<Rule, ParseError> {
    let name = cur.expect_ident()?;
    cur.expect_sym(":")?;
    let mut premises = Vec::new();
    let mut guards = Vec::new();
    if !cur.is_sym("|-") && !cur.is_sym("|") {
        loop {
            premises.push(literal(cur, sig)?);
            if !cur.eat_sym(",") {
                break;
            }
        }
    }
    if cur.eat_sym("|") {
        loop {
            guards.push(guard(cur)?);
            if !cur.eat_sym(",") {
                break;
            }
        }
    }
    cur.expect_sym("|-")?;
    let (l, c) = cur.here();
    let conclusion = literal(cur, sig)?;
    if !conclusion.is_positive() || matches!(conclusion, Literal::NegTransTo(..)) {
        return Err(ParseError::new(l, c, "conclusion must be a positive literal"));
    }
    Ok(Rule { name, premises, guards, conclusion })
}

fn literal(cur: &mut Cursor, sig: &Signature) -> Result<Literal, ParseError> {
    let subject = TermParser::pattern(sig).term(cur)?;
    if cur.eat_sym("-") {
        let l = label(cur)?;
        cur.expect_sym("->")?;
        let target = TermParser::pattern(sig).term(cur)?;
        return Ok(Literal::PosTrans(subject, l, target));
    }
    if cur.eat_sym("-/") {
        let l = label(cur)?;
        cur.expect_sym("->")?;
        let ends = [",", "|", "|-", ";"];
        if cur.at_eof() || ends.iter().any(|s| cur.is_sym(s)) {
            return Ok(Literal::NegTrans(subject, l));
        }
        let target = TermParser::pattern(sig).term(cur)?;
        return Ok(Literal::NegTransTo(subject, l, target));
    }
    if cur.eat_sym(":") {
        return Ok(Literal::Pred(subject, cur.expect_ident()?));
    }
    if cur.eat_sym("!:") {
        return Ok(Literal::NegPred(subject, cur.expect_ident()?));
    }
    Err(cur.error(format!("expected `-L->`, `-/L->`, `:` or `!:`, found {}", cur.peek())))
}

fn label(cur: &mut Cursor) -> Result<LabelExpr, ParseError> {
    let mut lhs = label_seq(cur)?;
    while cur.eat_sym("||") {
        lhs = LabelExpr::Par(Box::new(lhs), Box::new(label_seq(cur)?));
    }
    Ok(lhs)
}

fn label_seq(cur: &mut Cursor) -> Result<LabelExpr, ParseError> {
    let mut lhs = label_atom(cur)?;
    while cur.eat_sym(".") {
        lhs = LabelExpr::Seq(Box::new(lhs), Box::new(label_atom(cur)?));
    }
    Ok(lhs)
}

fn label_atom(cur: &mut Cursor) -> Result<LabelExpr, ParseError> {
    if cur.eat_sym("(") {
        let l = label(cur)?;
        cur.expect_sym(")")?;
        return Ok(l);
    }
    if cur.is_sym("{") {
        return Ok(LabelExpr::Const(parse_pomset_at(cur)?));
    }
    match cur.peek().clone() {
        Tok::Ident(s) if s == "tau" => {
            cur.bump();
            Ok(LabelExpr::Tau)
        }
        Tok::Ident(s) if s == "sigma" => {
            cur.bump();
            Ok(LabelExpr::Sigma)
        }
        Tok::Ident(s) if s.starts_with(|c: char| c.is_ascii_uppercase()) => {
            cur.bump();
            Ok(LabelExpr::Var(s))
        }
        Tok::Ident(_) => Ok(LabelExpr::Const(Pomset::primitive(parse_label(cur)?))),
        t => Err(cur.error(format!("expected a label, found {t}"))),
    }
}

fn guard(cur: &mut Cursor) -> Result<Guard, ParseError> {
    if cur.is_ident("step") && *cur.peek_at(1) == Tok::Sym("(") {
        cur.bump();
        cur.bump();
        let l = label(cur)?;
        cur.expect_sym(")")?;
        return Ok(Guard::IsStep(l));
    }
    let a = label(cur)?;
    if cur.eat_sym("<p") || (cur.is_sym("<") && *cur.peek_at(1) == Tok::Ident("p".into()) && {
        cur.bump();
        cur.bump();
        true
    }) {
        return Ok(Guard::PriorityLt(a, label(cur)?));
    }
    if cur.eat_sym("=") {
        return Ok(Guard::LabelEq(a, label(cur)?));
    }
    Err(cur.error(format!("expected `<p` or `=` in guard, found {}", cur.peek())))
}

pub(super) fn write_ptss(p: &Ptss, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    writeln!(f, "algebra {};", p.name)?;
    for (g, n) in &p.signature.functions {
        writeln!(f, "function {g} : {n};")?;
    }
    for q in &p.signature.predicates {
        writeln!(f, "predicate {q};")?;
    }
    if p.signature.pomset_constants {
        writeln!(f, "pomset-constants;")?;
    }
    if p.pomset_axiom {
        writeln!(f, "axiom pomset;")?;
    }
    if p.fix_recursion {
        writeln!(f, "fix-recursion;")?;
    }
    for (a, b) in p.priority.covers() {
        writeln!(f, "priority {a} < {b};")?;
    }
    for r in &p.rules {
        writeln!(f, "{r}")?;
    }
    Ok(())
}
