use std::path::Path;

use pomsos::algebras;
use pomsos::plts::Plts;
use pomsos::rules::{parse_ptss, parse_ptss_with, Priority};
use pomsos::semantics::{build_plts, ExploreBounds, SemanticsError};
use pomsos::term::parse_term;
use pomsos::{Ptss, Term};

use crate::{Failure, Global, SpecArgs};

pub fn bounds(g: &Global) -> ExploreBounds {
    ExploreBounds::new(g.max_states, g.max_depth)
}

/// A builtin name, a `.ptss` path, or a path whose file stem is a builtin
/// when the file itself does not exist.
pub fn load_ptss(src: &str) -> Result<Ptss, Failure> {
    if let Ok(p) = algebras::by_name(src) {
        return Ok(p);
    }
    let path = Path::new(src);
    if !path.exists() {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        if path.extension().is_some_and(|e| e == "ptss") {
            if let Ok(p) = algebras::by_name(stem) {
                return Ok(p);
            }
        }
        return Err(Failure::Usage(format!(
            "`{src}` is neither a readable file nor a built-in algebra ({})",
            algebras::NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{src}: {e}")))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = move |name: &str| -> Option<Ptss> {
        let sibling = dir.join(format!("{name}.ptss"));
        match std::fs::read_to_string(&sibling) {
            Ok(t) => parse_ptss(&t).ok(),
            Err(_) => algebras::by_name(name).ok(),
        }
    };
    parse_ptss_with(&text, &resolve).map_err(|e| Failure::Usage(format!("{src}:{e}")))
}

pub fn load_spec(s: &SpecArgs) -> Result<Ptss, Failure> {
    let mut p = load_ptss(&s.algebra)?;
    if let Some(pairs) = &s.priority {
        let extra = parse_ptss(&format!("priority {pairs};"))
            .map_err(|e| Failure::Usage(format!("--priority: {}", e.msg)))?
            .priority;
        let all = p.priority.pairs().chain(extra.pairs()).cloned().collect::<Vec<_>>();
        p.priority = Priority::new(all).map_err(|e| Failure::Usage(format!("--priority: {e}")))?;
    }
    Ok(p)
}

pub fn term(p: &Ptss, src: &str, what: &str) -> Result<Term, Failure> {
    let t = parse_term(src, &p.signature).map_err(|e| Failure::Usage(format!("{what} `{src}`: {e}")))?;
    if !t.is_closed() {
        return Err(Failure::Usage(format!("{what} `{src}` is not closed")));
    }
    Ok(t)
}

pub fn semantics(e: SemanticsError) -> Failure {
    match e {
        SemanticsError::BoundExhausted(_) | SemanticsError::Incomplete(_) => Failure::Bounds(e.to_string()),
        SemanticsError::Open(_) | SemanticsError::Unverified(_) => Failure::Usage(e.to_string()),
    }
}

pub fn plts_of(g: &Global, p: &Ptss, t: &Term) -> Result<Plts, Failure> {
    build_plts(p, t, bounds(g)).map_err(semantics)
}

pub fn read_plts(path: &str) -> Result<Plts, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
    Plts::from_json_str(&text).map_err(|e| Failure::Usage(format!("{path}: {e}")))
}

pub fn state_id(p: &Plts, s: &str) -> Result<usize, Failure> {
    let id: usize = s.parse().map_err(|_| Failure::Usage(format!("`{s}` is not a state id")))?;
    if id >= p.len() {
        return Err(Failure::Usage(format!("state {id} is not declared")));
    }
    Ok(id)
}
