use std::fmt::Write as _;

use serde_json::{json, Value};

use pomsos::equiv::{self, EquivOptions, Granularity, RelationKind, Witness};
use pomsos::formats::{self, Conservativity, Format};
use pomsos::gen::Gen;
use pomsos::logic::{self, Formula, Fragment};
use pomsos::plts::{unfold_with_mode, ConfigStructure, Plts};
use pomsos::semantics::{self, check_stratification_with, verify_model, Measure};
use pomsos::Verdict;

use crate::input::{self, bounds, load_spec};
use crate::{Failure, Global, PairArgs, Report, SpecArgs, SystemArgs};

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn verdict_code(v: Verdict) -> u8 {
    v.exit_code() as u8
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn describe_plts(p: &Plts, title: &str) -> String {
    let mut s = format!("{title}: {} states, {} transitions\n", p.len(), p.transition_count());
    for i in 0..p.len() {
        let preds = p.predicates(i);
        let mut line = format!("  {i}  {}", p.state_name(i));
        if !preds.is_empty() {
            let _ = write!(line, "  [{}]", preds.iter().cloned().collect::<Vec<_>>().join(", "));
        }
        if p.is_frontier(i) {
            line.push_str("  (unexplored)");
        }
        let _ = writeln!(s, "{line}");
    }
    for t in p.transitions() {
        let _ = writeln!(s, "  {} -{}-> {}", t.from, t.label, t.to);
    }
    let f = p.finiteness();
    let _ = writeln!(s, "finitely branching: {}, regular: {}, finite: {}", f.finitely_branching, f.regular, f.finite);
    s
}

pub fn derive(g: &Global, spec: &SpecArgs, term: &str, dot: bool) -> Result<Report, Failure> {
    let p = load_spec(spec)?;
    let t = input::term(&p, term, "--term")?;
    let plts = input::plts_of(g, &p, &t)?;
    let code = if plts.truncated() { 2 } else { 0 };
    let text = if dot {
        plts.to_dot()
    } else if g.json {
        pretty(&serde_json::to_value(plts.to_json()).expect("PLTS serializes"))
    } else {
        describe_plts(&plts, &format!("PLTS of `{t}` in {}", p.name))
    };
    Ok(Report { text, code })
}

/// The compared system with both states and their display names.
fn pair_system(g: &Global, a: &PairArgs) -> Result<(Plts, usize, usize, String, String), Failure> {
    if let Some(path) = &a.plts {
        let p = input::read_plts(path)?;
        let (l, r) = (input::state_id(&p, &a.left)?, input::state_id(&p, &a.right)?);
        return Ok((p, l, r, format!("state {l}"), format!("state {r}")));
    }
    let spec = load_spec(&a.spec)?;
    let tl = input::term(&spec, &a.left, "left term")?;
    let tr = input::term(&spec, &a.right, "right term")?;
    let pl = input::plts_of(g, &spec, &tl)?;
    let pr = input::plts_of(g, &spec, &tr)?;
    let (u, off) = pl.disjoint_union(&pr);
    Ok((u, pl.initial(), off + pr.initial(), tl.to_string(), tr.to_string()))
}

/// A logic formula for failed history-preserving bisimilarity.
fn history_formula(p: &Plts, l: usize, r: usize, base: Granularity, depth: usize, g: &Global) -> Option<Formula> {
    let cs = ConfigStructure::from_plts(p, &[l, r], depth, g.mode);
    let (r1, r2) = (cs.roots()[0], cs.roots()[1]);
    logic::distinguishing_formula(&cs, r1, r2, Fragment::for_granularity(base), depth.min(6))
}

fn describe_witness(w: &Witness) -> String {
    match w {
        Witness::None => String::new(),
        Witness::Relation { pairs } => format!("witness: relation of {} state pairs", pairs.len()),
        Witness::Posetal { triples } => format!("witness: posetal relation of {} triples", triples.len()),
        Witness::Trace { items, .. } => format!("counterexample: left has the trace `{}`", items.join(" ")),
        Witness::Formula { formula } => format!("counterexample: `{formula}` holds on the left only"),
    }
}

/// Long relation names accepted next to the short ones.
fn short_name(name: &str) -> String {
    let (prefix, rest) = match name.split_once(':') {
        Some((p, r)) => (format!("{p}:"), r),
        None => (String::new(), name),
    };
    let base = |s: &str| -> Option<&'static str> {
        Some(match s {
            "pomset" => "p",
            "step" => "s",
            "trace" => "t",
            "completed" => "ct",
            "accepting" => "at",
            "readies" => "r",
            "failures" => "f",
            "ready-trace" => "rt",
            "failure-trace" => "ft",
            _ => return None,
        })
    };
    let short = if let Some(b) = base(rest) {
        b.to_string()
    } else if let Some(b) = rest.strip_prefix("ready-").and_then(|r| base(r).or(Some(r))) {
        format!("r{b}")
    } else if let Some(b) = rest.strip_prefix("rooted-branching-").and_then(|r| base(r).or(Some(r))) {
        format!("rb{b}")
    } else if let Some(b) = rest.strip_prefix("branching-").and_then(|r| base(r).or(Some(r))) {
        format!("b{b}")
    } else {
        rest.to_string()
    };
    format!("{prefix}{short}")
}

pub fn compare(g: &Global, a: &PairArgs, preorder: bool) -> Result<Report, Failure> {
    let rel = short_name(&a.rel);
    let kind = if preorder { RelationKind::preorder(&rel) } else { rel.parse() }.map_err(Failure::Usage)?;
    let (p, l, r, ln, rn) = pair_system(g, a)?;
    let opts = EquivOptions { mode: g.mode, depth: a.depth, accept: a.accept.clone() };
    let mut out = if preorder { equiv::relate(&p, l, r, kind, &opts) } else { equiv::equivalent(&p, l, r, kind, &opts) };
    if let (true, Witness::None, RelationKind::Bisim { base }) = (out.verdict.fails(), &out.witness, kind) {
        let depth = a.depth.unwrap_or_else(|| p.len().clamp(1, 12));
        if let Some(f) = history_formula(&p, l, r, base, depth, g) {
            out.witness = Witness::Formula { formula: f.to_string() };
        }
    }
    let text = if g.json {
        pretty(&json!({
            "relation": kind.to_string(),
            "left": ln,
            "right": rn,
            "left_state": l,
            "right_state": r,
            "verdict": out.verdict,
            "witness": out.witness,
        }))
    } else {
        let mut s = format!("{ln} {kind} {rn}: {}\n", out.verdict);
        let w = describe_witness(&out.witness);
        if !w.is_empty() {
            s.push_str(&w);
            s.push('\n');
        }
        s
    };
    Ok(Report { text, code: verdict_code(out.verdict) })
}

fn system(g: &Global, s: &SystemArgs) -> Result<(Plts, String), Failure> {
    match (&s.term, &s.plts) {
        (_, Some(path)) => Ok((input::read_plts(path)?, path.clone())),
        (Some(t), None) => {
            let spec = load_spec(&s.spec)?;
            let t = input::term(&spec, t, "--term")?;
            Ok((input::plts_of(g, &spec, &t)?, t.to_string()))
        }
        (None, None) => Err(Failure::Usage("either --term or --plts is required".into())),
    }
}

fn negation_free(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::Pred(_) => true,
        Formula::Not(_) => false,
        Formula::And(a, b) => negation_free(a) && negation_free(b),
        Formula::Bind { body, .. } | Formula::Exec { body, .. } => negation_free(body),
    }
}

pub fn mc(g: &Global, s: &SystemArgs, depth: Option<usize>, formula: &str) -> Result<Report, Failure> {
    let f = logic::parse_formula(formula).map_err(|e| Failure::Usage(format!("formula: {e}")))?;
    let (p, name) = system(g, s)?;
    let depth = depth.unwrap_or_else(|| p.len().clamp(1, g.max_depth));
    let cs = unfold_with_mode(&p, depth, g.mode);
    let root = cs.root();
    let sat = logic::satisfies(&cs, root, &Default::default(), &f).map_err(|e| Failure::Usage(e.to_string()))?;
    let cut = cs.frontier_below(root);
    let verdict = if !cut || (sat && negation_free(&f)) { Verdict::from_bool(sat) } else { Verdict::Unknown };
    let text = if g.json {
        pretty(&json!({
            "system": name,
            "formula": f,
            "mode": g.mode,
            "depth": depth,
            "truncated": cut,
            "satisfied": sat,
            "verdict": verdict,
        }))
    } else {
        let mut t = format!("{name} |= {f}: {verdict}\n");
        if cut {
            let _ = writeln!(t, "unfolding cut at depth {depth}; evaluated as {sat} on the approximant");
        }
        t
    };
    Ok(Report { text, code: verdict_code(verdict) })
}

fn find_format(name: &str) -> Result<Format, Failure> {
    let norm = |s: &str| s.to_lowercase().replace([' ', '-', '_', '/'], "");
    Format::ALL.into_iter().find(|f| norm(f.name()) == norm(name)).ok_or_else(|| {
        let names: Vec<&str> = Format::ALL.iter().map(|f| f.name()).collect();
        Failure::Usage(format!("unknown format `{name}` (known: {})", names.join(", ")))
    })
}

pub fn formats(g: &Global, spec: &SpecArgs, only: Option<&str>) -> Result<Report, Failure> {
    let only = only.map(find_format).transpose()?;
    let p = load_spec(spec)?;
    if let Some(f) = only {
        let v = formats::classify(&p, f);
        let text = if g.json {
            pretty(&serde_json::to_value(&v).expect("verdict serializes"))
        } else {
            let mut t = format!("{} {}: {}\n", p.name, f, v.verdict);
            if let Some(l) = &v.labelling {
                let _ = writeln!(t, "labelling {l}");
            }
            for d in &v.failures {
                let _ = writeln!(t, "  {}: {}", d.rule, d.reason);
            }
            t
        };
        return Ok(Report { text, code: verdict_code(v.verdict) });
    }
    let report = formats::classify_formats(&p);
    let text = if g.json { pretty(&serde_json::to_value(&report).expect("report serializes")) } else { report.table() };
    Ok(Report { text, code: 0 })
}

pub fn conservative(g: &Global, base: &str, ext: &str, spot: usize, term_depth: usize) -> Result<Report, Failure> {
    let b = input::load_ptss(base)?;
    let e = input::load_ptss(ext)?;
    let result = formats::check_conservative_extension(&b, &e).map_err(|err| Failure::Usage(err.to_string()))?;
    let mut code = if result.certified() { 0 } else { 2 };
    let spot_check = if spot > 0 {
        let mut gen = Gen::new(g.seed);
        let terms: Vec<_> = (0..spot).map(|_| gen.term(&b.signature, term_depth, &["a", "b", "c"])).collect();
        let found = formats::spot_check_extension(&b, &e, &terms, bounds(g)).map_err(input::semantics)?;
        if !found.is_empty() {
            code = 1;
        }
        Some((terms.len(), found))
    } else {
        None
    };
    let text = if g.json {
        let spot_json = spot_check.as_ref().map(|(n, d)| json!({ "terms": n, "discrepancies": d }));
        pretty(&json!({
            "base": b.name,
            "extension": e.name,
            "result": result,
            "spot_check": spot_json,
        }))
    } else {
        let mut t = String::new();
        match &result {
            Conservativity::Certified => {
                let _ = writeln!(t, "{} over {}: certified", e.name, b.name);
            }
            Conservativity::Unknown(reasons) => {
                let _ = writeln!(t, "{} over {}: unknown", e.name, b.name);
                for c in reasons {
                    let _ = writeln!(t, "  {c}");
                }
            }
        }
        if let Some((n, found)) = &spot_check {
            let _ = writeln!(t, "spot check: {n} base terms, {} discrepancies", found.len());
            for d in found {
                let _ = writeln!(t, "  {}: only base {:?}, only extension {:?}", d.term, d.only_base, d.only_extension);
            }
        }
        t
    };
    Ok(Report { text, code })
}

pub fn model(g: &Global, spec: &SpecArgs, terms: &[String]) -> Result<Report, Failure> {
    let p = load_spec(spec)?;
    let roots = terms.iter().map(|t| input::term(&p, t, "--term")).collect::<Result<Vec<_>, _>>()?;
    let m = semantics::stable_model(&p, &roots, bounds(g)).map_err(input::semantics)?;
    let check = verify_model(&p, &m);
    let lits = |s: &std::collections::BTreeSet<pomsos::rules::GroundLiteral>| -> Vec<String> {
        s.iter().map(ToString::to_string).collect()
    };
    let (c, v) = (lits(&m.c), lits(&m.v));
    let text = if g.json {
        pretty(&json!({
            "ptss": p.name,
            "roots": roots.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "true": c,
            "unknown": v,
            "positive_after_reduction": m.positive_after_reduction(),
            "verified": check.ok(),
            "truncated": m.truncated,
        }))
    } else {
        let mut t = format!("stable model of {} from {}\n", p.name, terms.join(", "));
        let _ = writeln!(t, "true ({}):", c.len());
        for l in &c {
            let _ = writeln!(t, "  {l}");
        }
        let _ = writeln!(t, "unknown ({}):", v.len());
        for l in &v {
            let _ = writeln!(t, "  {l}");
        }
        let _ = writeln!(t, "positive after reduction: {}", yes(m.positive_after_reduction()));
        let _ = writeln!(t, "verified: {} ({check})", yes(check.ok()));
        if m.truncated {
            let _ = writeln!(t, "exploration truncated by bounds");
        }
        t
    };
    let code = if !check.ok() {
        1
    } else if m.truncated {
        2
    } else {
        0
    };
    Ok(Report { text, code })
}

pub fn stratify(g: &Global, spec: &SpecArgs, measure: &str, pool_depth: usize) -> Result<Report, Failure> {
    let m = Measure::parse(measure).map_err(Failure::Usage)?;
    let p = load_spec(spec)?;
    let r = check_stratification_with(&p, &m, pool_depth);
    let text = if g.json {
        pretty(&json!({ "ptss": p.name, "certified": r.certified(), "report": r }))
    } else {
        match &r.violation {
            None => format!(
                "{} with {}: certified over {} instances (pool depth {})\n",
                p.name, r.measure, r.instances, r.pool_depth
            ),
            Some(v) => format!("{} with {}: violated\n  {v}\n", p.name, r.measure),
        }
    };
    Ok(Report { text, code: if r.certified() { 0 } else { 1 } })
}

pub fn unfold(g: &Global, s: &SystemArgs, depth: usize) -> Result<Report, Failure> {
    let (p, name) = system(g, s)?;
    let cs = unfold_with_mode(&p, depth, g.mode);
    let code = if p.truncated() { 2 } else { 0 };
    let text = if g.json {
        let events: Vec<Value> = cs
            .events()
            .iter()
            .enumerate()
            .map(|(i, e)| json!({ "id": i, "label": e.label, "preds": e.preds }))
            .collect();
        let nodes: Vec<Value> = cs
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let out: Vec<Value> = n
                    .out
                    .iter()
                    .map(|t| json!({ "label": t.label.to_string(), "events": t.events, "target": t.target }))
                    .collect();
                json!({
                    "id": i,
                    "events": n.events,
                    "pomset": cs.node_pomset(i).to_string(),
                    "state": n.state,
                    "predicates": n.predicates,
                    "frontier": n.frontier,
                    "out": out,
                })
            })
            .collect();
        pretty(&json!({
            "system": name,
            "mode": cs.mode(),
            "depth": depth,
            "truncated": cs.truncated(),
            "events": events,
            "nodes": nodes,
        }))
    } else {
        let mode = serde_json::to_value(cs.mode()).expect("mode serializes");
        let mut t = format!(
            "unfolding of {name} ({} mode, depth {depth}): {} events, {} configurations\n",
            mode.as_str().unwrap_or_default(),
            cs.events().len(),
            cs.nodes().len()
        );
        for (i, e) in cs.events().iter().enumerate() {
            let _ = writeln!(t, "  e{i}: {}  after {:?}", e.label, e.preds);
        }
        for (i, n) in cs.nodes().iter().enumerate() {
            let state = n.state.map_or_else(|| "-".to_string(), |s| s.to_string());
            let mark = if n.frontier { "  (cut)" } else { "" };
            let _ = writeln!(t, "  c{i} = {}  state {state}{mark}", cs.node_pomset(i));
            for tr in &n.out {
                let _ = writeln!(t, "    -{}-> c{}", tr.label, tr.target);
            }
        }
        t
    };
    Ok(Report { text, code })
}
