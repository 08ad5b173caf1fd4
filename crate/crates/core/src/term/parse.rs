use super::{hole_name, sym, Context, Signature, Term};
use crate::pomset::text::parse_pomset_at;
use crate::syntax::{Cursor, ParseError, Tok};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Closed,
    Pattern,
    Context,
}

pub(crate) struct TermParser<'a> {
    sig: &'a Signature,
    mode: Mode,
    bound: Vec<String>,
    holes: Vec<String>,
}

/// Parses a term in which bare lowercase actions denote primitive pomsets.
pub fn parse_term(src: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut cur = Cursor::new(src)?;
    let t = TermParser::closed(sig).term(&mut cur)?;
    cur.expect_eof()?;
    Ok(t)
}

/// Parses an open term in which undeclared identifiers are variables.
pub fn parse_pattern(src: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut cur = Cursor::new(src)?;
    let t = TermParser::pattern(sig).term(&mut cur)?;
    cur.expect_eof()?;
    Ok(t)
}

/// Parses a closed term with `[]` holes, numbered left to right.
pub fn parse_context(src: &str, sig: &Signature) -> Result<Context, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut p = TermParser { sig, mode: Mode::Context, bound: Vec::new(), holes: Vec::new() };
    let t = p.term(&mut cur)?;
    cur.expect_eof()?;
    Ok(Context::new(t, p.holes))
}

impl<'a> TermParser<'a> {
    pub(crate) fn closed(sig: &'a Signature) -> Self {
        TermParser { sig, mode: Mode::Closed, bound: Vec::new(), holes: Vec::new() }
    }

    pub(crate) fn pattern(sig: &'a Signature) -> Self {
        TermParser { sig, mode: Mode::Pattern, bound: Vec::new(), holes: Vec::new() }
    }

    pub(crate) fn term(&mut self, cur: &mut Cursor) -> Result<Term, ParseError> {
        self.infix(cur, 0)
    }

    fn check_op(&self, cur: &Cursor, op: &str, arity: usize) -> Result<(), ParseError> {
        match self.sig.arity(op) {
            Some(n) if n == arity => Ok(()),
            Some(n) => Err(cur.error(format!("`{op}` has arity {n}, used with {arity}"))),
            None => Err(cur.error(format!("operator `{op}` is not in the signature"))),
        }
    }

    fn infix(&mut self, cur: &mut Cursor, level: usize) -> Result<Term, ParseError> {
        const OPS: [&str; 3] = [sym::ALT, sym::PAR, sym::SEQ];
        if level == OPS.len() {
            return self.atom(cur);
        }
        let op = OPS[level];
        let mut lhs = self.infix(cur, level + 1)?;
        while cur.is_sym(op) {
            self.check_op(cur, op, 2)?;
            cur.bump();
            let rhs = self.infix(cur, level + 1)?;
            lhs = Term::fun(op, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn atom(&mut self, cur: &mut Cursor) -> Result<Term, ParseError> {
        if cur.eat_sym("(") {
            let t = self.term(cur)?;
            cur.expect_sym(")")?;
            return Ok(t);
        }
        if cur.is_sym("[") {
            if self.mode != Mode::Context {
                return Err(cur.error("holes `[]` are only allowed in contexts"));
            }
            cur.bump();
            cur.expect_sym("]")?;
            let h = hole_name(self.holes.len());
            self.holes.push(h.clone());
            return Ok(Term::Var(h));
        }
        if cur.is_sym("{") {
            let (l, c) = cur.here();
            let p = parse_pomset_at(cur)?;
            if p.is_empty() {
                return Err(ParseError::new(l, c, "the empty pomset is not a process term; use `eps`"));
            }
            if !self.sig.pomset_constants {
                return Err(ParseError::new(l, c, "pomset constants are not enabled"));
            }
            return Ok(Term::Const(p));
        }
        let name = match cur.peek().clone() {
            Tok::Ident(s) => s,
            t => return Err(cur.error(format!("expected a term, found {t}"))),
        };
        if name == "fix" && matches!(cur.peek_at(1), Tok::Ident(_)) && *cur.peek_at(2) == Tok::Sym(".") {
            cur.bump();
            let x = cur.expect_ident()?;
            cur.expect_sym(".")?;
            self.bound.push(x.clone());
            let body = self.term(cur);
            self.bound.pop();
            return Ok(Term::Fix(x, Box::new(body?)));
        }
        let (l, c) = cur.here();
        cur.bump();
        if cur.eat_sym("(") {
            let mut args = Vec::new();
            if !cur.is_sym(")") {
                loop {
                    args.push(self.term(cur)?);
                    if !cur.eat_sym(",") {
                        break;
                    }
                }
            }
            cur.expect_sym(")")?;
            return match self.sig.arity(&name) {
                Some(n) if n == args.len() => Ok(Term::Fun(name, args)),
                Some(n) => Err(ParseError::new(l, c, format!("`{name}` expects {n} arguments, got {}", args.len()))),
                None => Err(ParseError::new(l, c, format!("unknown function symbol `{name}`"))),
            };
        }
        if self.bound.contains(&name) {
            return Ok(Term::Var(name));
        }
        match self.sig.arity(&name) {
            Some(0) => return Ok(Term::Fun(name, vec![])),
            Some(n) => return Err(ParseError::new(l, c, format!("`{name}` expects {n} arguments"))),
            None => {}
        }
        if self.mode == Mode::Pattern || name.starts_with(|ch: char| ch.is_ascii_uppercase()) {
            return Ok(Term::Var(name));
        }
        if name == sym::EPS {
            return Err(ParseError::new(l, c, "`eps` is not in the signature"));
        }
        if !self.sig.pomset_constants {
            return Err(ParseError::new(l, c, format!("unknown constant `{name}`")));
        }
        let a = crate::pomset::ActionLabel::new(name).map_err(|e| ParseError::new(l, c, e.to_string()))?;
        Ok(Term::Const(crate::pomset::Pomset::primitive(a)))
    }
}
