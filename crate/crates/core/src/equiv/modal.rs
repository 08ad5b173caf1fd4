//! Pomset-labelled Hennessy-Milner formulas, used as counterexamples when
//! two states of a fully explored PLTS are not pomset (step) bisimilar.

use std::collections::BTreeSet;
use std::fmt;

use super::strong::View;
use crate::plts::Plts;
use crate::pomset::Pomset;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Modal {
    True,
    Pred(String),
    Not(Box<Modal>),
    And(Vec<Modal>),
    /// Some transition labelled by the pomset leads to a state satisfying the body.
    Can(Pomset, Box<Modal>),
}

impl Modal {
    fn not(f: Modal) -> Modal {
        match f {
            Modal::Not(g) => *g,
            g => Modal::Not(Box::new(g)),
        }
    }

    fn and(mut fs: Vec<Modal>) -> Modal {
        fs.retain(|f| *f != Modal::True);
        fs.dedup();
        match fs.len() {
            0 => Modal::True,
            1 => fs.pop().expect("one conjunct"),
            _ => Modal::And(fs),
        }
    }

    /// Evaluation straight from the definition; with `step_only` only step
    /// transitions count.
    pub fn holds(&self, p: &Plts, s: usize, step_only: bool) -> bool {
        match self {
            Modal::True => true,
            Modal::Pred(q) => p.has_predicate(s, q),
            Modal::Not(f) => !f.holds(p, s, step_only),
            Modal::And(fs) => fs.iter().all(|f| f.holds(p, s, step_only)),
            Modal::Can(u, f) => {
                (!step_only || u.is_step()) && p.successors(s).any(|(w, t)| w == u && f.holds(p, t, step_only))
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Modal::True | Modal::Pred(_) => 0,
            Modal::Not(f) => f.depth(),
            Modal::And(fs) => fs.iter().map(Modal::depth).max().unwrap_or(0),
            Modal::Can(_, f) => 1 + f.depth(),
        }
    }
}

impl fmt::Display for Modal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modal::True => f.write_str("true"),
            Modal::Pred(q) => f.write_str(q),
            Modal::Not(g) => match **g {
                Modal::And(_) => write!(f, "!({g})"),
                _ => write!(f, "!{g}"),
            },
            Modal::And(gs) => {
                let parts: Vec<String> = gs
                    .iter()
                    .map(|g| if matches!(g, Modal::And(_)) { format!("({g})") } else { g.to_string() })
                    .collect();
                f.write_str(&parts.join(" & "))
            }
            Modal::Can(u, g) => match **g {
                Modal::And(_) => write!(f, "<{u}>({g})"),
                _ => write!(f, "<{u}>{g}"),
            },
        }
    }
}

/// Partitions after each refinement round, starting from the predicate split.
fn levels(v: &View) -> Vec<Vec<usize>> {
    let mut out = vec![super::strong::renumber(v.preds.iter())];
    loop {
        let block = out.last().expect("nonempty");
        let sigs: Vec<(usize, BTreeSet<(usize, usize)>)> = (0..v.len())
            .map(|s| (block[s], v.out[s].iter().map(|&(l, t)| (l, block[t])).collect()))
            .collect();
        let next = super::strong::renumber(sigs.iter());
        let stable = next.iter().max() == block.iter().max();
        out.push(next);
        if stable {
            return out;
        }
    }
}

/// A formula true at `s1` and false at `s2`, or `None` when the two are
/// bisimilar. The view must have no frontier states.
pub(super) fn distinguish(v: &View, s1: usize, s2: usize) -> Option<Modal> {
    let lv = levels(v);
    let last = lv.last().expect("nonempty");
    (last[s1] != last[s2]).then(|| separate(v, &lv, s1, s2))
}

fn separate(v: &View, lv: &[Vec<usize>], x: usize, y: usize) -> Modal {
    let k = lv.iter().position(|b| b[x] != b[y]).expect("states are separated");
    if k == 0 {
        if let Some(q) = v.preds[x].difference(&v.preds[y]).next() {
            return Modal::Pred(q.clone());
        }
        let q = v.preds[y].difference(&v.preds[x]).next().expect("predicates differ");
        return Modal::not(Modal::Pred(q.clone()));
    }
    let prev = &lv[k - 1];
    let succ = |s: usize, l: usize| v.out[s].iter().filter(move |&&(m, _)| m == l).map(|&(_, t)| t);
    for &(l, x2) in &v.out[x] {
        if succ(y, l).all(|y2| prev[x2] != prev[y2]) {
            let body = Modal::and(succ(y, l).map(|y2| separate(v, lv, x2, y2)).collect());
            return Modal::Can(v.labels[l].clone(), Box::new(body));
        }
    }
    for &(l, y2) in &v.out[y] {
        if succ(x, l).all(|x2| prev[x2] != prev[y2]) {
            let body = Modal::and(succ(x, l).map(|x2| separate(v, lv, y2, x2)).collect());
            return Modal::not(Modal::Can(v.labels[l].clone(), Box::new(body)));
        }
    }
    unreachable!("blocks split at level {k} without an unmatched move")
}
