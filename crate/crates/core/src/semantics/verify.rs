//! Re-checks a three-valued model against the two stable-model conditions by
//! enumerating rule instances afresh, without the derivation engine.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::engine::has_sigma;
use super::ThreeValuedModel;
use crate::pomset::Pomset;
use crate::rules::{denies, GroundLiteral, LabelAssign, LabelExpr, Literal, Priority, Ptss, Rule};
use crate::term::{match_into, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelCheck {
    pub instances: usize,
    /// C and V share no literal.
    pub disjoint: bool,
    /// The universe is closed under every instance read optimistically.
    pub closed: bool,
    /// C is the least set closed under instances whose negative premises
    /// C ∪ V does not deny.
    pub true_part: bool,
    /// C ∪ V is the least set closed under instances whose negative
    /// premises C does not deny.
    pub possible_part: bool,
    pub problems: Vec<String>,
}

impl ModelCheck {
    pub fn ok(&self) -> bool {
        self.disjoint && self.closed && self.true_part && self.possible_part
    }
}

impl fmt::Display for ModelCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} instances; disjoint={} closed={} true-part={} possible-part={}",
            self.instances, self.disjoint, self.closed, self.true_part, self.possible_part
        )?;
        for p in &self.problems {
            write!(f, "; {p}")?;
        }
        Ok(())
    }
}

struct Instance {
    pos: Vec<GroundLiteral>,
    neg: Vec<GroundLiteral>,
    concl: GroundLiteral,
}

pub fn verify_model(ptss: &Ptss, m: &ThreeValuedModel) -> ModelCheck {
    let mut by_subject: HashMap<&Term, Vec<&GroundLiteral>> = HashMap::new();
    for l in &m.universe {
        by_subject.entry(l.subject()).or_default().push(l);
    }
    let labels: Vec<Pomset> = m.labels.iter().filter(|l| !has_sigma(l)).cloned().collect();
    let ctx = Ctx { universe: &by_subject, labels: &labels, prio: &ptss.priority };
    let mut insts = Vec::new();
    for t in &m.subjects {
        instances_for(ptss, t, &ctx, &mut insts);
    }

    let mut problems = Vec::new();
    let disjoint = m.c.is_disjoint(&m.v);
    if !disjoint {
        problems.push("C and V overlap".into());
    }
    let mut closed = true;
    for i in &insts {
        if i.pos.iter().all(|p| m.universe.contains(p)) && !m.universe.contains(&i.concl) {
            closed = false;
            problems.push(format!("universe misses {}", i.concl));
            break;
        }
    }
    let cv: BTreeSet<GroundLiteral> = m.c.union(&m.v).cloned().collect();
    let least_c = closure(&insts, &cv);
    let true_part = least_c == m.c;
    if !true_part {
        problems.push(format!("closure against C∪V has {} literals, C has {}", least_c.len(), m.c.len()));
    }
    let least_cv = closure(&insts, &m.c);
    let possible_part = least_cv == cv;
    if !possible_part {
        problems.push(format!("closure against C has {} literals, C∪V has {}", least_cv.len(), cv.len()));
    }
    ModelCheck { instances: insts.len(), disjoint, closed, true_part, possible_part, problems }
}

/// Least set closed under the instances whose negative premises no literal
/// of `against` denies.
fn closure(insts: &[Instance], against: &BTreeSet<GroundLiteral>) -> BTreeSet<GroundLiteral> {
    let mut by_subject: HashMap<&Term, Vec<&GroundLiteral>> = HashMap::new();
    for l in against {
        by_subject.entry(l.subject()).or_default().push(l);
    }
    let live: Vec<&Instance> = insts
        .iter()
        .filter(|i| {
            i.neg.iter().all(|n| by_subject.get(n.subject()).is_none_or(|ls| ls.iter().all(|l| !denies(l, n))))
        })
        .collect();
    let mut out = BTreeSet::new();
    loop {
        let mut changed = false;
        for i in &live {
            if !out.contains(&i.concl) && i.pos.iter().all(|p| out.contains(p)) {
                out.insert(i.concl.clone());
                changed = true;
            }
        }
        if !changed {
            return out;
        }
    }
}

fn instances_for(ptss: &Ptss, t: &Term, ctx: &Ctx, out: &mut Vec<Instance>) {
    if ptss.pomset_axiom {
        if let Term::Const(u) = t {
            out.push(Instance { pos: vec![], neg: vec![], concl: GroundLiteral::Trans(t.clone(), u.clone(), Term::eps()) });
        }
    }
    if ptss.fix_recursion {
        if let Ok(unf) = t.unfold() {
            for l in ctx.universe.get(&unf).into_iter().flatten() {
                let concl = match l {
                    GroundLiteral::Trans(_, u, y) => GroundLiteral::Trans(t.clone(), u.clone(), y.clone()),
                    GroundLiteral::Pred(_, p) => GroundLiteral::Pred(t.clone(), p.clone()),
                    _ => continue,
                };
                out.push(Instance { pos: vec![(*l).clone()], neg: vec![], concl });
            }
        }
    }
    for r in &ptss.rules {
        let mut s = Substitution::new();
        if match_into(r.source(), t, &mut s) {
            let positives: Vec<&Literal> = r.premises.iter().filter(|p| p.is_positive()).collect();
            premises(r, &positives, s, LabelAssign::new(), vec![], ctx, out);
        }
    }
}

struct Ctx<'a> {
    universe: &'a HashMap<&'a Term, Vec<&'a GroundLiteral>>,
    labels: &'a [Pomset],
    prio: &'a Priority,
}

fn premises(r: &Rule, todo: &[&Literal], s: Substitution, a: LabelAssign, pos: Vec<GroundLiteral>, ctx: &Ctx, out: &mut Vec<Instance>) {
    if todo.is_empty() {
        complete(r, &s, &a, pos, ctx, out);
        return;
    }
    // take the first premise whose subject is closed under `s`
    let Some(k) = todo.iter().position(|p| p.subject().free_vars().iter().all(|x| s.contains_key(x))) else {
        return;
    };
    let prem = todo[k];
    let rest: Vec<&Literal> = todo.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, p)| *p).collect();
    let subj = prem.subject().substitute(&s);
    for &l in ctx.universe.get(&subj).into_iter().flatten() {
        match (prem, l) {
            (Literal::PosTrans(_, e, tgt), GroundLiteral::Trans(_, u, y)) => {
                for a2 in bind_label(e, u, &a, ctx.labels) {
                    let mut s2 = s.clone();
                    if match_into(tgt, y, &mut s2) {
                        let mut p2 = pos.clone();
                        p2.push(l.clone());
                        premises(r, &rest, s2, a2, p2, ctx, out);
                    }
                }
            }
            (Literal::Pred(_, q), GroundLiteral::Pred(_, p)) if p == q => {
                let mut p2 = pos.clone();
                p2.push(l.clone());
                premises(r, &rest, s.clone(), a.clone(), p2, ctx, out);
            }
            _ => {}
        }
    }
}

fn bind_label(e: &LabelExpr, u: &Pomset, a: &LabelAssign, labels: &[Pomset]) -> Vec<LabelAssign> {
    if let LabelExpr::Var(x) = e {
        return match a.get(x) {
            Some(v) if v == u => vec![a.clone()],
            Some(_) => vec![],
            None if has_sigma(u) => vec![],
            None => {
                let mut a2 = a.clone();
                a2.insert(x.clone(), u.clone());
                vec![a2]
            }
        };
    }
    let free: Vec<String> = e.vars().into_iter().filter(|x| !a.contains_key(x)).collect();
    extend(a, &free, labels).into_iter().filter(|a2| e.eval(a2).ok().as_ref() == Some(u)).collect()
}

fn extend(a: &LabelAssign, vars: &[String], labels: &[Pomset]) -> Vec<LabelAssign> {
    match vars.split_first() {
        None => vec![a.clone()],
        Some((x, rest)) => labels
            .iter()
            .flat_map(|l| {
                let mut a2 = a.clone();
                a2.insert(x.clone(), l.clone());
                extend(&a2, rest, labels)
            })
            .collect(),
    }
}

fn complete(r: &Rule, s: &Substitution, a: &LabelAssign, pos: Vec<GroundLiteral>, ctx: &Ctx, out: &mut Vec<Instance>) {
    let (labels, prio) = (ctx.labels, ctx.prio);
    let universal = r.universal_label_vars();
    let mut open: BTreeSet<String> = r.label_vars();
    open.retain(|x| !a.contains_key(x) && !universal.contains(x));
    let open: Vec<String> = open.into_iter().collect();
    for a in extend(a, &open, labels) {
        let guards_ok =
            r.guards.iter().filter(|g| g.vars().is_disjoint(&universal)).all(|g| g.holds(&a, prio).unwrap_or(false));
        if !guards_ok {
            continue;
        }
        let Some(neg) = negatives(r, s, &a, &universal, labels, prio) else { continue };
        let Ok(concl) = r.conclusion.ground(s, &a) else { continue };
        out.push(Instance { pos: pos.clone(), neg, concl });
    }
}

fn negatives(
    r: &Rule,
    s: &Substitution,
    a: &LabelAssign,
    universal: &BTreeSet<String>,
    labels: &[Pomset],
    prio: &Priority,
) -> Option<Vec<GroundLiteral>> {
    let uv: Vec<String> = universal.iter().cloned().collect();
    let mut out = BTreeSet::new();
    for a2 in extend(a, &uv, labels) {
        let active = r
            .guards
            .iter()
            .filter(|g| !g.vars().is_disjoint(universal))
            .all(|g| g.holds(&a2, prio).unwrap_or(false));
        for p in r.premises.iter().filter(|p| !p.is_positive()) {
            let mentions = !p.label_vars().is_disjoint(universal);
            if mentions && !active {
                continue;
            }
            out.insert(p.ground(s, &a2).ok()?);
        }
    }
    Some(out.into_iter().collect())
}
