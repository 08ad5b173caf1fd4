//! Pomset literal syntax: `{x:a, y:b | x<y}`, `{}` for ε, bare `a`.

use std::fmt;

use super::{ActionLabel, Pomset, Poset};
use crate::syntax::{Cursor, ParseError, Tok};

pub fn parse_pomset(src: &str) -> Result<Pomset, ParseError> {
    let mut cur = Cursor::new(src)?;
    let p = parse_pomset_at(&mut cur)?;
    cur.expect_eof()?;
    Ok(p)
}

pub(crate) fn parse_label(cur: &mut Cursor) -> Result<ActionLabel, ParseError> {
    let (l, c) = cur.here();
    let name = cur.expect_ident()?;
    ActionLabel::new(name).map_err(|e| ParseError::new(l, c, e.to_string()))
}

/// Parses a braced literal or a bare action at the cursor.
pub(crate) fn parse_pomset_at(cur: &mut Cursor) -> Result<Pomset, ParseError> {
    if !cur.is_sym("{") {
        return Ok(Pomset::primitive(parse_label(cur)?));
    }
    let (l, c) = cur.here();
    cur.bump();
    let mut events: Vec<(String, ActionLabel)> = Vec::new();
    let mut order: Vec<(String, String)> = Vec::new();
    if !cur.is_sym("}") && !cur.is_sym("|") {
        loop {
            let id = event_id(cur)?;
            cur.expect_sym(":")?;
            events.push((id, parse_label(cur)?));
            if !cur.eat_sym(",") {
                break;
            }
        }
    }
    if cur.eat_sym("|") && !cur.is_sym("}") {
        loop {
            // chains `x<y<z` are allowed
            let mut prev = event_id(cur)?;
            if !cur.is_sym("<") && !cur.is_sym("<p") {
                return Err(cur.error(format!("expected `<`, found {}", cur.peek())));
            }
            loop {
                // `x<p ` lexes as the priority symbol; read it back as `<` then `p`
                let next = if cur.eat_sym("<p") {
                    "p".to_string()
                } else if cur.eat_sym("<") {
                    event_id(cur)?
                } else {
                    break;
                };
                order.push((prev, next.clone()));
                prev = next;
            }
            if !cur.eat_sym(",") {
                break;
            }
        }
    }
    cur.expect_sym("}")?;
    let poset = Poset::new(events, order).map_err(|e| ParseError::new(l, c, e.to_string()))?;
    Ok(poset.canonicalize())
}

fn event_id(cur: &mut Cursor) -> Result<String, ParseError> {
    match cur.peek().clone() {
        Tok::Ident(s) => {
            cur.bump();
            Ok(s)
        }
        Tok::Num(n) => {
            cur.bump();
            Ok(n.to_string())
        }
        t => Err(cur.error(format!("expected event id, found {t}"))),
    }
}

pub(super) fn write_pomset(p: &Pomset, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_primitive() {
        return write!(f, "{}", p.label(0));
    }
    if p.is_empty() {
        return f.write_str("{}");
    }
    let heights = p.heights();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&i, &j| (p.label(i), heights[i]).cmp(&(p.label(j), heights[j])));
    let mut name = vec![0usize; p.len()];
    for (k, &i) in order.iter().enumerate() {
        name[i] = k;
    }
    f.write_str("{")?;
    for (k, &i) in order.iter().enumerate() {
        if k > 0 {
            f.write_str(", ")?;
        }
        write!(f, "e{k}:{}", p.label(i))?;
    }
    let mut covers: Vec<(usize, usize)> =
        p.covers().into_iter().map(|(i, j)| (name[i], name[j])).collect();
    covers.sort_unstable();
    if !covers.is_empty() {
        f.write_str(" | ")?;
        for (k, (i, j)) in covers.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "e{i}<e{j}")?;
        }
    }
    f.write_str("}")
}
