//! Branching and rooted branching pomset/step bisimilarity on a PLTS.
//!
//! A move whose pomset has only τ events may be answered by standing still;
//! any other move `U` is answered by τ moves to an intermediate state still
//! related to the mover, followed by a single `U` move. Every predicate,
//! not only termination, is matched up to τ moves.

use super::strong::View;
use super::{Outcome, Witness};
use crate::plts::Plts;
use crate::verdict::Verdict;

struct Taus {
    /// States reachable through τ-only moves, the state itself first.
    reach: Vec<Vec<usize>>,
    silent: Vec<bool>,
}

fn taus(v: &View) -> Taus {
    let silent: Vec<bool> = v.labels.iter().map(|u| u.is_tau_only()).collect();
    let reach = (0..v.len())
        .map(|s| {
            let mut seen = vec![s];
            let mut k = 0;
            while k < seen.len() {
                for &(l, t) in &v.out[seen[k]] {
                    if silent[l] && !seen.contains(&t) {
                        seen.push(t);
                    }
                }
                k += 1;
            }
            seen
        })
        .collect();
    Taus { reach, silent }
}

/// Largest branching bisimulation, keeping pairs at frontier states.
fn fixpoint(v: &View, tz: &Taus) -> Vec<Vec<bool>> {
    let n = v.len();
    let mut rel = vec![vec![true; n]; n];
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in 0..n {
                if !rel[x][y] || v.frontier[x] || v.frontier[y] {
                    continue;
                }
                if !half(v, tz, &rel, x, y, false) || !half(v, tz, &rel, y, x, true) {
                    rel[x][y] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return rel;
        }
    }
}

/// Clauses where `x` moves or shows a predicate and `y` answers; with
/// `flip` the pair is stored as `(y, x)`.
fn half(v: &View, tz: &Taus, rel: &[Vec<bool>], x: usize, y: usize, flip: bool) -> bool {
    let r = |a: usize, b: usize| if flip { rel[b][a] } else { rel[a][b] };
    let moves_ok = v.out[x].iter().all(|&(l, x2)| {
        (tz.silent[l] && r(x2, y))
            || tz.reach[y]
                .iter()
                .any(|&y0| r(x, y0) && v.out[y0].iter().any(|&(m, y2)| m == l && r(x2, y2)))
    });
    let preds_ok = v.preds[x].iter().all(|q| tz.reach[y].iter().any(|&y0| r(x, y0) && v.preds[y0].contains(q)));
    moves_ok && preds_ok
}

pub(super) fn bisimilar(p: &Plts, s1: usize, s2: usize, step_only: bool, rooted: bool) -> Outcome {
    let v = View::new(p, step_only);
    let tz = taus(&v);
    let rel = fixpoint(&v, &tz);
    let ok = if !rooted || v.frontier[s1] || v.frontier[s2] {
        rel[s1][s2]
    } else {
        let strong = |x: usize, y: usize, flip: bool| {
            v.out[x].iter().all(|&(l, x2)| {
                v.out[y].iter().any(|&(m, y2)| m == l && if flip { rel[y2][x2] } else { rel[x2][y2] })
            })
        };
        v.preds[s1] == v.preds[s2] && strong(s1, s2, false) && strong(s2, s1, true)
    };
    let verdict = Verdict::bounded(ok, !v.reachable_frontier(&[s1, s2]));
    let witness = if ok {
        let mut pairs = vec![(s1, s2)];
        for x in 0..v.len() {
            for y in 0..v.len() {
                if rel[x][y] && (x, y) != (s1, s2) {
                    pairs.push((x, y));
                }
            }
        }
        Witness::Relation { pairs }
    } else {
        Witness::None
    };
    Outcome { verdict, witness }
}
