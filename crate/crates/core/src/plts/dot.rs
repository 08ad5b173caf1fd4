use std::fmt::Write;

use super::Plts;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub(super) fn to_dot(p: &Plts) -> String {
    let mut out = String::from("digraph plts {\n  rankdir=LR;\n  start [shape=point];\n");
    for s in 0..p.len() {
        let mut label = p.state_name(s);
        let preds: Vec<&str> = p.predicates(s).iter().map(String::as_str).collect();
        if !preds.is_empty() {
            label.push_str(&format!("\\n[{}]", preds.join(", ")));
        }
        let shape = if p.is_frontier(s) { "box" } else { "ellipse" };
        writeln!(out, "  s{s} [label=\"{}\", shape={shape}];", escape(&label)).unwrap();
    }
    writeln!(out, "  start -> s{};", p.initial()).unwrap();
    for t in p.transitions() {
        writeln!(out, "  s{} -> s{} [label=\"{}\"];", t.from, t.to, escape(&t.label.to_string())).unwrap();
    }
    out.push_str("}\n");
    out
}
