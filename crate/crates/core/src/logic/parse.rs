use super::{Formula, LogicError, Var};
use crate::pomset::ActionLabel;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LAngle2,
    RAngle2,
    LAngle,
    RAngle,
    LParen,
    RParen,
    Comma,
    Tilde,
    Bang,
    Amp,
    Star,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, LogicError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        let two = chars.get(i + 1).copied();
        let (t, n) = match (c, two) {
            ('<', Some('<')) => (Tok::LAngle2, 2),
            ('>', Some('>')) => (Tok::RAngle2, 2),
            ('<', _) => (Tok::LAngle, 1),
            ('>', _) => (Tok::RAngle, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            ('~', _) => (Tok::Tilde, 1),
            ('!', _) => (Tok::Bang, 1),
            ('&', _) => (Tok::Amp, 1),
            ('*', _) => (Tok::Star, 1),
            _ => return Err(LogicError::Parse { column: col, message: format!("unexpected character `{c}`") }),
        };
        out.push((t, col));
        i += n;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    scope: Vec<Var>,
    fresh: usize,
}

/// Parses the text syntax: `true`, `false`, predicates, `!f`, `f & g`,
/// binders `(xs, ~ys < a z) f`, executions `<z> f`, the sugar
/// `<<xs, ~ys < a z>> f` and `(<a x> * <b y>) f`, and `<a> f` for an action
/// `a` that is not a bound variable. Unbound variables are rejected.
pub fn parse_formula(src: &str) -> Result<Formula, LogicError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end: src.chars().count() + 1, scope: Vec::new(), fresh: 0 };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn error(&self, message: &str) -> LogicError {
        LogicError::Parse { column: self.column(), message: message.to_string() }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), LogicError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<String, LogicError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected a name")),
        }
    }

    fn action(&mut self) -> Result<ActionLabel, LogicError> {
        let col = self.column();
        let s = self.ident()?;
        ActionLabel::new(&s).map_err(|e| LogicError::Parse { column: col, message: e.to_string() })
    }

    fn bound(&self, v: &str) -> bool {
        self.scope.iter().any(|s| s == v)
    }

    fn use_var(&mut self) -> Result<Var, LogicError> {
        let col = self.column();
        let v = self.ident()?;
        if !self.bound(&v) {
            return Err(LogicError::Parse { column: col, message: format!("unbound variable `{v}`") });
        }
        Ok(v)
    }

    fn fresh_var(&mut self) -> Var {
        loop {
            let v = format!("z{}", self.fresh);
            self.fresh += 1;
            if !self.bound(&v) {
                return v;
            }
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        let last = parts.pop().expect("one operand");
        Ok(parts.into_iter().rev().fold(last, |acc, f| Formula::and(f, acc)))
    }

    /// Body of a binder with `z` in scope.
    fn scoped(&mut self, z: &Var) -> Result<Formula, LogicError> {
        self.scope.push(z.clone());
        let r = self.unary();
        self.scope.pop();
        r
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        match self.peek().cloned() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(match s.as_str() {
                    "true" => Formula::True,
                    "false" => Formula::not(Formula::True),
                    _ => Formula::Pred(s),
                })
            }
            Some(Tok::LAngle2) => {
                self.pos += 1;
                let (xs, ys, a, z) = self.head()?;
                self.expect(Tok::RAngle2, "`>>`")?;
                let body = self.scoped(&z)?;
                Ok(Formula::diamond(xs, ys, a, z, body))
            }
            Some(Tok::LAngle) => {
                self.pos += 1;
                let col = self.column();
                let name = self.ident()?;
                self.expect(Tok::RAngle, "`>`")?;
                if self.bound(&name) {
                    return Ok(Formula::exec(name, self.unary()?));
                }
                let a = ActionLabel::new(&name).map_err(|e| LogicError::Parse { column: col, message: e.to_string() })?;
                let z = self.fresh_var();
                let body = self.scoped(&z)?;
                Ok(Formula::diamond(vec![], vec![], a, z, body))
            }
            Some(Tok::LParen) => self.paren(),
            _ => Err(self.error("expected a formula")),
        }
    }

    fn paren(&mut self) -> Result<Formula, LogicError> {
        let step = self.peek_at(1) == Some(&Tok::LAngle)
            && matches!(self.peek_at(2), Some(Tok::Ident(_)))
            && matches!(self.peek_at(3), Some(Tok::Ident(_)))
            && self.peek_at(4) == Some(&Tok::RAngle);
        if step {
            self.pos += 1;
            let mut items = Vec::new();
            loop {
                self.expect(Tok::LAngle, "`<`")?;
                let a = self.action()?;
                let x = self.ident()?;
                self.expect(Tok::RAngle, "`>`")?;
                items.push((a, x));
                if self.peek() == Some(&Tok::Star) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            self.expect(Tok::RParen, "`)`")?;
            let n = self.scope.len();
            self.scope.extend(items.iter().map(|(_, x)| x.clone()));
            let body = self.unary();
            self.scope.truncate(n);
            return Ok(Formula::step(items, body?));
        }
        if self.is_binder() {
            self.pos += 1;
            let (xs, ys, a, z) = self.head()?;
            self.expect(Tok::RParen, "`)`")?;
            let body = self.scoped(&z)?;
            return Ok(Formula::bind(xs, ys, a, z, body));
        }
        self.pos += 1;
        let f = self.formula()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(f)
    }

    /// After `(`: names, commas and `~` up to `<` or a closing `a z )`.
    fn is_binder(&self) -> bool {
        let mut k = 1;
        let mut names = 0;
        loop {
            match self.peek_at(k) {
                Some(Tok::Ident(_)) => names += 1,
                Some(Tok::Comma) | Some(Tok::Tilde) => {}
                Some(Tok::LAngle) => {
                    return matches!(self.peek_at(k + 1), Some(Tok::Ident(_)))
                        && matches!(self.peek_at(k + 2), Some(Tok::Ident(_)))
                        && self.peek_at(k + 3) == Some(&Tok::RParen);
                }
                Some(Tok::RParen) => return names == 2 && k == 3,
                _ => return false,
            }
            k += 1;
        }
    }

    /// `[xs] [, ~ys] < a z` or plain `a z`.
    fn head(&mut self) -> Result<(Vec<Var>, Vec<Var>, ActionLabel, Var), LogicError> {
        let plain = matches!(self.peek(), Some(Tok::Ident(_)))
            && matches!(self.peek_at(1), Some(Tok::Ident(_)))
            && matches!(self.peek_at(2), Some(Tok::RParen) | Some(Tok::RAngle2));
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        if !plain {
            loop {
                match self.peek() {
                    Some(Tok::Ident(_)) => xs.push(self.use_var()?),
                    Some(Tok::Tilde) => {
                        self.pos += 1;
                        ys.push(self.use_var()?);
                    }
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::LAngle) => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected `<` in binder")),
                }
            }
        }
        let a = self.action()?;
        let z = self.ident()?;
        Ok((xs, ys, a, z))
    }
}
