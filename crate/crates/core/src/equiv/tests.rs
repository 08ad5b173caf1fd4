use proptest::prelude::*;

use super::*;
use crate::algebras;
use crate::gen::{Gen, PltsShape};
use crate::plts::PrimeEventStructure;
use crate::pomset::{parse_pomset, ActionLabel, Pomset};
use crate::rules::Ptss;
use crate::semantics::{build_plts, ExploreBounds};
use crate::term::parse_term;

fn p(s: &str) -> Pomset {
    parse_pomset(s).unwrap()
}

/// Disjoint union of the PLTSs of two terms, with both initial states.
fn pair(ptss: &Ptss, l: &str, r: &str) -> (Plts, usize, usize) {
    let b = ExploreBounds::default();
    let pl = build_plts(ptss, &parse_term(l, &ptss.signature).unwrap(), b).unwrap();
    let pr = build_plts(ptss, &parse_term(r, &ptss.signature).unwrap(), b).unwrap();
    let (u, off) = pl.disjoint_union(&pr);
    (u, pl.initial(), off + pr.initial())
}

fn rel(ptss: &Ptss, l: &str, r: &str, kind: &str) -> Verdict {
    let (g, a, b) = pair(ptss, l, r);
    relate(&g, a, b, kind.parse().unwrap(), &EquivOptions::default()).verdict
}

fn pre(ptss: &Ptss, l: &str, r: &str, kind: &str) -> Verdict {
    let (g, a, b) = pair(ptss, l, r);
    relate(&g, a, b, RelationKind::preorder(kind).unwrap(), &EquivOptions::default()).verdict
}

#[test]
fn kind_names_round_trip() {
    for n in ["p", "s", "hp", "hhp", "bp", "bs", "bhp", "bhhp", "rbp", "rbs", "rbhp", "rbhhp"] {
        assert_eq!(RelationKind::equivalence(n).unwrap().short(), n);
    }
    for n in ["p", "s", "hp", "hhp", "rp", "rs", "rhp", "rhhp", "t", "ct", "at", "r", "f", "rt", "ft"] {
        assert_eq!(RelationKind::preorder(n).unwrap().short(), n);
    }
    assert!(RelationKind::preorder("q").is_err());
    assert_eq!("sim:rp".parse::<RelationKind>().unwrap(), RelationKind::Sim { base: Granularity::Pomset, ready: true });
}

#[test]
fn identity_holds_for_every_kind() {
    let aptc = algebras::aptc();
    let t = "(a . b) || (c + eps)";
    for n in ["p", "s", "hp", "hhp", "bp", "rbp", "bhp", "rbhhp"] {
        assert_eq!(rel(&aptc, t, t, n), Verdict::Holds, "{n}");
    }
    for n in ["p", "rp", "hp", "rhhp", "t", "ct", "at", "r", "f", "rt", "ft"] {
        assert_eq!(pre(&aptc, t, t, n), Verdict::Holds, "{n}");
    }
}

#[test]
fn parallel_is_not_interleaving() {
    let aptc = algebras::aptc();
    assert_eq!(rel(&aptc, "a || b", "a . b + b . a", "p"), Verdict::Fails);
    assert_eq!(rel(&aptc, "a || b", "a . b + b . a", "s"), Verdict::Fails);
    let (g, l, r) = pair(&aptc, "a || b", "a . b + b . a");
    let out = relate(&g, l, r, "p".parse().unwrap(), &EquivOptions::default());
    let Witness::Formula { formula } = out.witness else { panic!("formula expected") };
    assert_eq!(formula, "<{e0:a, e1:b}>true");
    let f = distinguishing_modal(&g, r, l, false).unwrap();
    assert!(f.holds(&g, r, false) && !f.holds(&g, l, false));
    assert_eq!(f.to_string(), "<a>true");
}

#[test]
fn branching_time_versus_traces() {
    let bpa = algebras::bpa_eps();
    let (l, r) = ("a . (b + c)", "a . b + a . c");
    assert_eq!(rel(&bpa, l, r, "p"), Verdict::Fails);
    assert_eq!(pre(&bpa, l, r, "t"), Verdict::Holds);
    assert_eq!(pre(&bpa, r, l, "t"), Verdict::Holds);
    assert_eq!(pre(&bpa, r, l, "p"), Verdict::Holds);
    assert_eq!(pre(&bpa, l, r, "p"), Verdict::Fails);
    assert_eq!(pre(&bpa, r, l, "f"), Verdict::Fails, "a.b+a.c can refuse c after a");
}

#[test]
fn simulation_examples() {
    let bpa = algebras::bpa_eps();
    assert_eq!(pre(&bpa, "a", "a + b", "p"), Verdict::Holds);
    assert_eq!(pre(&bpa, "a + b", "a", "p"), Verdict::Fails);
    assert_eq!(pre(&bpa, "a", "a + b", "rp"), Verdict::Fails);
    assert_eq!(pre(&bpa, "a", "a + b", "hp"), Verdict::Holds);
    assert_eq!(pre(&bpa, "a", "a + b", "rhp"), Verdict::Fails);
}

#[test]
fn trace_examples() {
    let bpa = algebras::bpa_eps();
    assert_eq!(pre(&bpa, "a . b", "a . b + a", "t"), Verdict::Holds);
    assert_eq!(pre(&bpa, "a", "a + b", "at"), Verdict::Holds);
    assert_eq!(pre(&bpa, "a . b + a", "a . b", "at"), Verdict::Fails);
    assert_eq!(pre(&bpa, "a . b + a", "a . b", "t"), Verdict::Holds);
    let (g, s, _) = pair(&bpa, "a", "a");
    let out = trace_preorder(&g, s, s, TraceKind::Completed, &EquivOptions::default());
    assert_eq!(out.verdict, Verdict::Holds);
}

#[test]
fn failed_trace_inclusion_names_the_trace() {
    let bpa = algebras::bpa_eps();
    let (g, a, b) = pair(&bpa, "a . c", "a . b");
    let out = trace_preorder(&g, a, b, TraceKind::Trace, &EquivOptions::default());
    assert_eq!(out.verdict, Verdict::Fails);
    match out.witness {
        Witness::Trace { items, path } => {
            assert_eq!(items, vec!["a".to_string(), "c".to_string()]);
            assert_eq!(path.len(), 3);
        }
        w => panic!("unexpected witness {w:?}"),
    }
}

#[test]
fn predicates_separate_failures_from_completed_traces() {
    // a leads to a state with a predicate and no moves against a plain deadlock
    let mut g = Plts::new(4, 0).unwrap();
    g.add_transition(0, p("a"), 1).unwrap();
    g.add_predicate(1, "p").unwrap();
    g.add_transition(2, p("a"), 3).unwrap();
    let o = EquivOptions::default();
    assert_eq!(trace_preorder(&g, 0, 2, TraceKind::Failures, &o).verdict, Verdict::Holds);
    assert_eq!(trace_preorder(&g, 0, 2, TraceKind::Completed, &o).verdict, Verdict::Fails);
}

#[test]
fn tau_laws() {
    let bpa = algebras::bpa_eps();
    assert_eq!(rel(&bpa, "tau . a", "a", "bp"), Verdict::Holds);
    assert_eq!(rel(&bpa, "tau . a", "a", "rbp"), Verdict::Fails);
    assert_eq!(rel(&bpa, "a . tau . b", "a . b", "rbp"), Verdict::Holds);
    assert_eq!(rel(&bpa, "tau . a", "a", "bhp"), Verdict::Holds);
    assert_eq!(rel(&bpa, "tau . a", "a", "rbhp"), Verdict::Fails);
    assert_eq!(rel(&bpa, "a . tau . b", "a . b", "rbhp"), Verdict::Holds);
    assert_eq!(rel(&bpa, "a . tau . b", "a . b", "rbs"), Verdict::Holds);
    assert_eq!(rel(&bpa, "a + tau . b", "a + b", "bp"), Verdict::Fails);
}

/// `a;b` and `b;a` closing into a diamond against the same two orders kept
/// apart.
fn diamond_vs_branches() -> (Plts, usize, usize) {
    let mut g = Plts::new(9, 0).unwrap();
    let (a, b) = (p("a"), p("b"));
    g.add_transition(0, a.clone(), 1).unwrap();
    g.add_transition(0, b.clone(), 2).unwrap();
    g.add_transition(1, b.clone(), 3).unwrap();
    g.add_transition(2, a.clone(), 3).unwrap();
    g.add_transition(4, a.clone(), 5).unwrap();
    g.add_transition(4, b.clone(), 6).unwrap();
    g.add_transition(5, b, 7).unwrap();
    g.add_transition(6, a, 8).unwrap();
    (g, 0, 4)
}

#[test]
fn history_depends_on_unfolding_mode() {
    let (g, x, y) = diamond_vs_branches();
    let strict = EquivOptions::default();
    let granular = EquivOptions { mode: Mode::Granular, ..Default::default() };
    assert_eq!(bisimilar(&g, x, y, Granularity::Pomset, &strict).verdict, Verdict::Holds);
    assert_eq!(bisimilar(&g, x, y, Granularity::Hp, &strict).verdict, Verdict::Holds);
    assert_eq!(bisimilar(&g, x, y, Granularity::Hp, &granular).verdict, Verdict::Fails);
    assert_eq!(bisimilar(&g, x, y, Granularity::Hhp, &granular).verdict, Verdict::Fails);
    assert_eq!(bisimilar(&g, x, x, Granularity::Hhp, &granular).verdict, Verdict::Holds);
}

fn act(s: &str) -> ActionLabel {
    ActionLabel::new(s).unwrap()
}

/// `z.P + z.Q` as one event structure, where each of P and Q is a sum of
/// parallel components given as (labels, causality, conflict) inside the
/// component. Returns the structure and the events of the two `z`s.
fn prefixed_sum(p: &[(&[&str], &[(usize, usize)])], q: &[(&[&str], &[(usize, usize)])]) -> (PrimeEventStructure, usize, usize) {
    let mut labels = vec![act("z"), act("z")];
    let mut causality = vec![];
    let mut conflict = vec![(0, 1)];
    for (side, comps) in [(0usize, p), (1usize, q)] {
        let mut starts = vec![];
        for (ls, cf) in comps {
            let base = labels.len();
            starts.push((base, ls.len()));
            for l in ls.iter() {
                causality.push((side, labels.len()));
                labels.push(act(l));
            }
            for &(i, j) in cf.iter() {
                conflict.push((base + i, base + j));
            }
        }
        // components of a sum exclude each other
        for (i, &(b1, n1)) in starts.iter().enumerate() {
            for &(b2, n2) in &starts[i + 1..] {
                for e in b1..b1 + n1 {
                    for f in b2..b2 + n2 {
                        conflict.push((e, f));
                    }
                }
            }
        }
    }
    (PrimeEventStructure::new(labels, &causality, &conflict).unwrap(), 0, 1)
}

#[test]
fn absorption_separates_hp_from_hhp() {
    // a||(b+c) + a||b + (a+c)||b against a||(b+c) + (a+c)||b
    let abc: (&[&str], &[(usize, usize)]) = (&["a", "b", "c"], &[(1, 2)]);
    let ab: (&[&str], &[(usize, usize)]) = (&["a", "b"], &[]);
    let acb: (&[&str], &[(usize, usize)]) = (&["a", "c", "b"], &[(0, 1)]);
    let (es, x, y) = prefixed_sum(&[abc, ab, acb], &[abc, acb]);
    let cs = es.configurations();
    let nx = cs.lookup(&[x]).unwrap();
    let ny = cs.lookup(&[y]).unwrap();
    let start = Triple { left: nx, right: ny, map: vec![(x, y)] };
    let hp = history_game_from(&cs, &start, Game::bisim(false));
    assert_eq!(hp.verdict, Verdict::Holds);
    if let Witness::Posetal { triples } = &hp.witness {
        assert!(check_posetal_relation(&cs, &start, triples, Game::bisim(false)));
    }
    assert_eq!(history_game_from(&cs, &start, Game::bisim(true)).verdict, Verdict::Fails);
}

#[test]
fn witnesses_recheck() {
    let aptc = algebras::aptc();
    let (g, a, b) = pair(&aptc, "(a || b) + (a || b)", "b || a");
    let out = bisimilar(&g, a, b, Granularity::Pomset, &EquivOptions::default());
    assert_eq!(out.verdict, Verdict::Holds);
    let Witness::Relation { pairs } = out.witness else { panic!("relation expected") };
    assert_eq!(pairs[0], (a, b));
    assert!(is_bisimulation(&g, &pairs, false));
    let bpa = algebras::bpa_eps();
    let (g, a, b) = pair(&bpa, "a . b", "a . b + a . c");
    let out = similar(&g, a, b, Granularity::Pomset, false, &EquivOptions::default());
    let Witness::Relation { pairs } = out.witness else { panic!("relation expected") };
    assert!(is_simulation(&g, &pairs, false, false));
    assert!(!is_bisimulation(&g, &pairs, false));
}

#[test]
fn hierarchy_on_small_systems() {
    let mut chain = Plts::new(3, 0).unwrap();
    chain.add_transition(0, p("a"), 1).unwrap();
    chain.add_transition(1, p("b"), 2).unwrap();
    chain.add_predicate(2, "sqrt").unwrap();
    let r = hierarchy_check(&chain, None, &EquivOptions::default());
    assert!(r.ok(), "{:?}", r.violated());
    assert_eq!(r.pairs, 9);
    let (d, _, _) = diamond_vs_branches();
    assert!(hierarchy_check(&d, None, &EquivOptions::default()).ok());
    assert_eq!(hierarchy_edges().iter().filter(|e| e.figure).count(), 15);
    assert_eq!(hierarchy_edges().len(), 22);
}

#[test]
fn congruence_identity_samples() {
    let bpa = algebras::bpa_eps();
    let r = check_congruence_samples(&bpa, RelationKind::Bisim { base: Granularity::Pomset }, 20, 7);
    assert!(r.ok(), "{:?}", r.counterexamples);
    assert!(r.checked > 0);
}

/// Naive bisimilarity: all pairs, delete until stable.
fn naive_bisim(g: &Plts, step_only: bool) -> Vec<Vec<bool>> {
    let n = g.len();
    let mv = |s: usize| -> Vec<(Pomset, usize)> {
        g.successors(s).filter(|(u, _)| !step_only || u.is_step()).map(|(u, t)| (u.clone(), t)).collect()
    };
    let mut r = vec![vec![true; n]; n];
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in 0..n {
                if !r[x][y] {
                    continue;
                }
                let fwd = mv(x).iter().all(|(u, x2)| mv(y).iter().any(|(w, y2)| u == w && r[*x2][*y2]));
                let bwd = mv(y).iter().all(|(w, y2)| mv(x).iter().any(|(u, x2)| u == w && r[*x2][*y2]));
                if !(fwd && bwd && g.predicates(x) == g.predicates(y)) {
                    r[x][y] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_matches_naive_fixpoint(seed in any::<u64>(), step_only in any::<bool>()) {
        let g = Gen::new(seed).plts(&PltsShape::default());
        let naive = naive_bisim(&g, step_only);
        let base = if step_only { Granularity::Step } else { Granularity::Pomset };
        for x in 0..g.len() {
            for y in 0..g.len() {
                let v = bisimilar(&g, x, y, base, &EquivOptions::default()).verdict;
                prop_assert_eq!(v, Verdict::from_bool(naive[x][y]));
            }
        }
    }

    #[test]
    fn modal_counterexamples_separate(seed in any::<u64>(), step_only in any::<bool>()) {
        let g = Gen::new(seed).plts(&PltsShape::default());
        let naive = naive_bisim(&g, step_only);
        for x in 0..g.len() {
            for y in 0..g.len() {
                match distinguishing_modal(&g, x, y, step_only) {
                    None => prop_assert!(naive[x][y]),
                    Some(f) => {
                        prop_assert!(!naive[x][y]);
                        prop_assert!(f.holds(&g, x, step_only), "{} at {}", f, x);
                        prop_assert!(!f.holds(&g, y, step_only), "{} at {}", f, y);
                    }
                }
            }
        }
    }

    #[test]
    fn kernels_are_equivalences(seed in any::<u64>(), k in 0usize..6) {
        let g = Gen::new(seed).plts(&PltsShape { max_states: 4, ..Default::default() });
        let kind = ["p", "s", "bp", "t", "f", "rt"][k];
        let kind: RelationKind = kind.parse().unwrap();
        let o = EquivOptions::default();
        let eq = |a, b| equivalent(&g, a, b, kind, &o).verdict.holds();
        let n = g.len();
        for x in 0..n {
            prop_assert!(eq(x, x));
            for y in 0..n {
                prop_assert_eq!(eq(x, y), eq(y, x));
                for z in 0..n {
                    if eq(x, y) && eq(y, z) {
                        prop_assert!(eq(x, z));
                    }
                }
            }
        }
    }

    #[test]
    fn step_only_systems_agree_on_pomset_and_step(seed in any::<u64>()) {
        let g = Gen::new(seed).plts(&PltsShape { compound: 0.0, ..Default::default() });
        let o = EquivOptions::default();
        for x in 0..g.len() {
            for y in 0..g.len() {
                prop_assert_eq!(
                    bisimilar(&g, x, y, Granularity::Pomset, &o).verdict,
                    bisimilar(&g, x, y, Granularity::Step, &o).verdict
                );
            }
        }
    }

    #[test]
    fn history_chain_on_acyclic_systems(seed in any::<u64>(), granular in any::<bool>()) {
        let g = Gen::new(seed).acyclic_plts(&PltsShape { max_states: 5, ..Default::default() });
        let o = EquivOptions { mode: if granular { Mode::Granular } else { Mode::Strict }, ..Default::default() };
        for x in 0..g.len() {
            for y in 0..g.len() {
                let hhp = bisimilar(&g, x, y, Granularity::Hhp, &o);
                let hp = bisimilar(&g, x, y, Granularity::Hp, &o).verdict;
                let pm = bisimilar(&g, x, y, Granularity::Pomset, &o).verdict;
                prop_assert_ne!(hhp.verdict, Verdict::Unknown);
                if hhp.verdict.holds() {
                    prop_assert!(hp.holds());
                }
                if hp.holds() {
                    prop_assert!(pm.holds());
                }
                if let Witness::Posetal { triples } = &hhp.witness {
                    let cs = ConfigStructure::from_plts(&g, &[x, y], o.depth_for(&g), o.mode);
                    let start = Triple { left: cs.roots()[0], right: cs.roots()[1], map: vec![] };
                    prop_assert!(check_posetal_relation(&cs, &start, triples, Game::bisim(true)));
                }
            }
        }
    }
}
