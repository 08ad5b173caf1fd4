//! Tokenizer shared by the pomset, term, rule and formula parsers.

use std::fmt;

use thiserror::Error;

/// A parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError { line, col, msg: msg.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    /// Any punctuation, single or multi-character (`||`, `|-`, `->`, `-/`, `!:`, `<<`, `>>`, `<p`).
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const MULTI: &[&str] = &["||", "|-", "->", "-/", "!:", "<<", ">>"];
const SINGLE: &[&str] = &[
    "{", "}", "(", ")", "[", "]", ",", ":", ";", "|", ".", "+", "<", ">", "!", "~", "*", "&", "=",
    "/", "-",
];

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        // `#` starts a line comment
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(s), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let n = s
                .parse::<u64>()
                .map_err(|_| ParseError::new(tl, tc, format!("number `{s}` out of range")))?;
            out.push(Token { tok: Tok::Num(n), line: tl, col: tc });
            continue;
        }
        // `<p` followed by whitespace is the priority operator
        if c == '<'
            && chars.get(i + 1) == Some(&'p')
            && chars.get(i + 2).map_or(true, |c| c.is_whitespace())
        {
            i += 2;
            col += 2;
            out.push(Token { tok: Tok::Sym("<p"), line: tl, col: tc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        if let Some(m) = MULTI.iter().find(|m| rest == **m) {
            i += 2;
            col += 2;
            out.push(Token { tok: Tok::Sym(m), line: tl, col: tc });
            continue;
        }
        let one = c.to_string();
        if let Some(s) = SINGLE.iter().find(|s| one == **s) {
            i += 1;
            col += 1;
            out.push(Token { tok: Tok::Sym(s), line: tl, col: tc });
            continue;
        }
        return Err(ParseError::new(tl, tc, format!("unexpected character `{c}`")));
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Cursor over a token stream with the usual peek/expect helpers.
#[derive(Debug, Clone)]
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Cursor { toks: tokenize(src)?, pos: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_ident(&mut self, s: &str) -> bool {
        if self.is_ident(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", self.peek())))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => Err(self.error(format!("expected identifier, found {t}"))),
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected trailing {}", self.peek())))
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        ParseError::new(l, c, msg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_char_symbols() {
        let toks: Vec<Tok> = tokenize("x -U-> y' || z |- a -/b-> !: <p U2")
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::Ident("x".into()),
                Tok::Sym("-"),
                Tok::Ident("U".into()),
                Tok::Sym("->"),
                Tok::Ident("y'".into()),
                Tok::Sym("||"),
                Tok::Ident("z".into()),
                Tok::Sym("|-"),
                Tok::Ident("a".into()),
                Tok::Sym("-/"),
                Tok::Ident("b".into()),
                Tok::Sym("->"),
                Tok::Sym("!:"),
                Tok::Sym("<p"),
                Tok::Ident("U2".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn less_than_before_identifier_p_is_plain() {
        let toks = tokenize("{x:a, p:b | x<p}").unwrap();
        assert!(toks.iter().any(|t| t.tok == Tok::Sym("<")));
        assert!(!toks.iter().any(|t| t.tok == Tok::Sym("<p")));
    }

    #[test]
    fn positions_and_comments() {
        let err = tokenize("# header\n  a $").unwrap_err();
        assert_eq!((err.line, err.col), (2, 5));
    }
}
