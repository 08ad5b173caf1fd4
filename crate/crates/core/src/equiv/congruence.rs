//! Sampling harness for congruence: random equivalent pairs are plugged
//! into random contexts and the results compared.

use serde::Serialize;

use super::{equivalent, EquivOptions, RelationKind};
use crate::gen::{equivalent_variant, Gen};
use crate::plts::Plts;
use crate::rules::Ptss;
use crate::semantics::{build_plts, ExploreBounds, SemanticsError};
use crate::term::Term;
use crate::verdict::Verdict;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongruenceSample {
    pub t: String,
    pub u: String,
    pub context: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongruenceReport {
    pub kind: String,
    pub samples: usize,
    /// Samples whose pair was confirmed equivalent and whose plugged terms
    /// got a definite verdict.
    pub checked: usize,
    /// Pairs that the rewriting did not make (provably) equivalent.
    pub skipped: usize,
    /// Samples cut short by exploration bounds.
    pub bounded: usize,
    pub counterexamples: Vec<CongruenceSample>,
}

impl CongruenceReport {
    pub fn ok(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

const ACTIONS: [&str; 3] = ["a", "b", "c"];

fn pair_plts(ptss: &Ptss, l: &Term, r: &Term, bounds: ExploreBounds) -> Result<(Plts, usize, usize), SemanticsError> {
    let pl = build_plts(ptss, l, bounds)?;
    let pr = build_plts(ptss, r, bounds)?;
    let (u, off) = pl.disjoint_union(&pr);
    Ok((u, pl.initial(), off + pr.initial()))
}

fn compare(ptss: &Ptss, l: &Term, r: &Term, kind: RelationKind, bounds: ExploreBounds) -> Option<Verdict> {
    let (p, a, b) = pair_plts(ptss, l, r, bounds).ok()?;
    Some(equivalent(&p, a, b, kind, &EquivOptions::default()).verdict)
}

/// Draws `n` samples `(t, u, C[])` with `u` a rewrite of `t`; pairs not
/// confirmed equivalent are skipped, and every confirmed pair whose
/// plugged terms are told apart is reported.
pub fn check_congruence_samples(ptss: &Ptss, kind: RelationKind, n: usize, seed: u64) -> CongruenceReport {
    let mut g = Gen::new(seed);
    let bounds = ExploreBounds::new(2_000, 32);
    let sig = &ptss.signature;
    let mut report =
        CongruenceReport { kind: kind.to_string(), samples: n, checked: 0, skipped: 0, bounded: 0, counterexamples: vec![] };
    for _ in 0..n {
        let t = g.term(sig, 2, &ACTIONS);
        let u = if g.chance(0.2) { t.clone() } else { equivalent_variant(&mut g, &t, sig) };
        let c = g.context(sig, 2, &ACTIONS);
        match compare(ptss, &t, &u, kind, bounds) {
            Some(Verdict::Holds) => {}
            Some(Verdict::Unknown) | None => {
                report.bounded += 1;
                continue;
            }
            Some(Verdict::Fails) => {
                report.skipped += 1;
                continue;
            }
        }
        let ct = c.plug(std::slice::from_ref(&t)).expect("one hole");
        let cu = c.plug(std::slice::from_ref(&u)).expect("one hole");
        match compare(ptss, &ct, &cu, kind, bounds) {
            Some(Verdict::Holds) => report.checked += 1,
            Some(Verdict::Fails) => {
                report.checked += 1;
                report.counterexamples.push(CongruenceSample {
                    t: t.to_string(),
                    u: u.to_string(),
                    context: c.to_string(),
                });
            }
            _ => report.bounded += 1,
        }
    }
    report
}
