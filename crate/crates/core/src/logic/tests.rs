use proptest::prelude::*;

use super::*;
use crate::equiv::{relate_configs, Granularity, RelationKind};
use crate::gen::{FormulaGen, Gen};
use crate::plts::{ConfigStructure, Mode, Plts};
use crate::pomset::{parse_pomset, ActionLabel};
use crate::verdict::Verdict;

fn act(s: &str) -> ActionLabel {
    ActionLabel::new(s).unwrap()
}

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn sat(cs: &ConfigStructure, n: usize, s: &str) -> bool {
    satisfies(cs, n, &Env::new(), &f(s)).unwrap()
}

fn plts(n: usize, edges: &[(usize, &str, usize)]) -> Plts {
    let mut p = Plts::new(n, 0).unwrap();
    for &(s, l, t) in edges {
        p.add_transition(s, parse_pomset(l).unwrap(), t).unwrap();
    }
    p
}

/// A diamond closing on one state (roots 0) against `a.b + b.a` with
/// separate ends (root 4).
fn diamond_vs_interleaving(mode: Mode) -> (ConfigStructure, usize, usize) {
    let p = plts(
        9,
        &[(0, "a", 1), (0, "b", 2), (1, "b", 3), (2, "a", 3), (4, "a", 5), (5, "b", 7), (4, "b", 6), (6, "a", 8)],
    );
    let cs = ConfigStructure::from_plts(&p, &[0, 4], 4, mode);
    let (r1, r2) = (cs.roots()[0], cs.roots()[1]);
    (cs, r1, r2)
}

#[test]
fn parse_and_print_round_trip() {
    for s in [
        "true",
        "P & !Q",
        "<< a z >> << z < b w >> true",
        "<< a z >> << ~z < b w >> true",
        "(<a x> * <b y>) true",
        "(a x) (x < b y) <x> <y> P",
        "!<< a z >> (P & << z < c w >> true)",
        "(< a z) <z> true",
    ] {
        let g = f(s);
        assert_eq!(f(&g.to_string()), g, "{s} printed as {g}");
    }
    assert_eq!(f("(<a x> * <b y>) true"), f("(a x) (~x < b y) <x> <y> true"));
    assert_eq!(f("<<a z>> true"), f("(a z) <z> true"));
    assert_eq!(f("<a> true"), Formula::diamond(vec![], vec![], act("a"), "z0", Formula::True));
    assert_eq!(f("(a x) <x> <z> true"), f("<< a x >> << z z0 >> true"));
    assert!(matches!(parse_formula("(x < a z) true"), Err(LogicError::Parse { .. })));
    assert!(matches!(parse_formula("P &"), Err(LogicError::Parse { .. })));
}

#[test]
fn fragments() {
    use Fragment::*;
    let step = fragment_of(&f("(<a x> * <b y>) true"));
    assert!(step.contains(&Sl) && step.contains(&Bcl));
    assert!(!step.contains(&Pl) && !step.contains(&Hpl));
    let open_neg = fragment_of(&f("<< a z >> !<< z < b w >> true"));
    assert!(open_neg.contains(&Bcl) && open_neg.contains(&Hpl));
    assert!(!open_neg.contains(&Pl) && !open_neg.contains(&Sl));
    let denials = fragment_of(&f("!<a> true & !<b> true"));
    for d in [Dp, Ds, Dhp, Dhhp, Pl, Sl, Hpl, Bcl] {
        assert!(denials.contains(&d), "{d}");
    }
    let chain = fragment_of(&f("<< a z >> << z < b w >> true"));
    assert!(chain.contains(&Pl) && chain.contains(&Hpl) && chain.contains(&Dp));
    assert!(!chain.contains(&Sl));
    let raw = fragment_of(&f("(a x) (~x < b y) <y> true"));
    assert_eq!(raw, [Bcl, Dhhp].into_iter().collect());
    assert!(!fragment_of(&f("!P")).contains(&Dp));
    assert!(fragment_of(&Formula::exec("q", Formula::True)).is_empty());
}

#[test]
fn causality_depends_on_mode() {
    let chain = plts(3, &[(0, "a", 1), (1, "b", 2)]);
    let cs = ConfigStructure::from_plts(&chain, &[0], 4, Mode::Strict);
    assert!(sat(&cs, cs.root(), "true"));
    assert!(sat(&cs, cs.root(), "<< a z >> << z < b w >> true"));
    let (cs, d, i) = diamond_vs_interleaving(Mode::Granular);
    assert!(!sat(&cs, d, "<< a z >> << z < b w >> true"));
    assert!(sat(&cs, d, "<< a z >> << ~z < b w >> true"));
    assert!(sat(&cs, d, "(<a x> * <b y>) true"));
    assert!(!sat(&cs, i, "(<a x> * <b y>) true"));
    assert!(sat(&cs, i, "<< a z >> << z < b w >> true"));
}

#[test]
fn unbound_variables_are_rejected() {
    let (cs, d, _) = diamond_vs_interleaving(Mode::Granular);
    let g = Formula::exec("q", Formula::True);
    assert_eq!(satisfies(&cs, d, &Env::new(), &g), Err(LogicError::Unbound("q".into())));
    let env: Env = [("q".to_string(), 0)].into_iter().collect();
    assert!(satisfies(&cs, d, &env, &g).is_ok());
    assert!(matches!(satisfies(&cs, 999, &env, &g), Err(LogicError::UnknownNode(_))));
}

#[test]
fn step_logic_separates_diamond_from_interleaving() {
    let (cs, d, i) = diamond_vs_interleaving(Mode::Granular);
    assert_eq!(logical_equiv(&cs, d, d, Fragment::Sl, 3), Verdict::Holds);
    assert_eq!(logical_equiv(&cs, d, i, Fragment::Sl, 2), Verdict::Fails);
    assert_eq!(logical_equiv(&cs, d, i, Fragment::Sl, 1), Verdict::Holds);
    let g = distinguishing_formula(&cs, d, i, Fragment::Sl, 2).unwrap();
    assert_eq!(g, f("(<a x0> * <b x1>) true"));
    // strict unfolding orders the diamond too
    let (cs, d, i) = diamond_vs_interleaving(Mode::Strict);
    assert_eq!(logical_equiv(&cs, d, i, Fragment::Sl, 2), Verdict::Holds);
    assert_eq!(distinguishing_formula(&cs, d, i, Fragment::Bcl, 2), None);
}

#[test]
fn denial_formula_for_extra_initial_action() {
    let p = plts(5, &[(0, "a", 1), (2, "a", 3), (2, "b", 4)]);
    let cs = ConfigStructure::from_plts(&p, &[0, 2], 2, Mode::Strict);
    let (x, y) = (cs.roots()[0], cs.roots()[1]);
    let g = distinguishing_formula(&cs, x, y, Fragment::Dp, 2).unwrap();
    assert_eq!(g, Formula::denial(act("b")));
    assert!(fragment_of(&g).contains(&Fragment::Dp));
    assert_eq!(distinguishing_formula(&cs, y, x, Fragment::Dp, 2), Some(f("<< b x0 >> true")));
    assert_eq!(logical_equiv(&cs, x, y, Fragment::Dp, 2), Verdict::Fails);
}

#[test]
fn truncation_is_inconclusive() {
    let p = plts(1, &[(0, "a", 0)]);
    let cs = ConfigStructure::from_plts(&p, &[0], 3, Mode::Strict);
    assert_eq!(logical_equiv(&cs, cs.root(), cs.root(), Fragment::Hpl, 3), Verdict::Unknown);
}

fn check_found(cs: &ConfigStructure, n1: usize, n2: usize, frag: Fragment, depth: usize) -> Result<(), TestCaseError> {
    let g = distinguishing_formula(cs, n1, n2, frag, depth);
    let g = match g {
        Some(g) => g,
        None => distinguishing_formula(cs, n2, n1, frag, depth).expect("some direction"),
    };
    prop_assert!(fragment_of(&g).contains(&frag), "{} not in {}", g, frag);
    prop_assert!(g.depth() <= depth);
    let e = Env::new();
    prop_assert_ne!(satisfies(cs, n1, &e, &g).unwrap(), satisfies(cs, n2, &e, &g).unwrap(), "{}", g);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn logic_matches_bisimilarity_on_event_structures(seed in any::<u64>(), k in 0usize..4) {
        let mut g = Gen::new(seed);
        let es = g.event_structure(4, &["a", "b"]);
        let cs = es.configurations();
        let base = [Granularity::Pomset, Granularity::Step, Granularity::Hp, Granularity::Hhp][k];
        let frag = Fragment::for_granularity(base);
        let depth = es.len();
        let nodes: Vec<usize> = (0..cs.nodes().len()).collect();
        for &n1 in nodes.iter().take(4) {
            for &n2 in &nodes {
                let bis = relate_configs(&cs, n1, n2, RelationKind::Bisim { base }).verdict;
                let log = logical_equiv(&cs, n1, n2, frag, depth);
                prop_assert_eq!(bis, log, "nodes {} {} at {:?}", n1, n2, base);
                if bis.holds() {
                    let mut fg = FormulaGen::new(&mut g, frag, &["a", "b"], &[]);
                    for _ in 0..10 {
                        let phi = fg.closed(depth);
                        let e = Env::new();
                        prop_assert_eq!(satisfies(&cs, n1, &e, &phi).unwrap(), satisfies(&cs, n2, &e, &phi).unwrap(), "{}", phi);
                    }
                } else {
                    check_found(&cs, n1, n2, frag, depth)?;
                }
            }
        }
    }

    #[test]
    fn generated_formulas_belong_to_their_fragment(seed in any::<u64>(), k in 0usize..8, d in 0usize..4) {
        let mut g = Gen::new(seed);
        let frag = Fragment::ALL[k];
        let phi = FormulaGen::new(&mut g, frag, &["a", "b"], &["P"]).closed(d);
        prop_assert!(fragment_of(&phi).contains(&frag), "{} not in {}", phi, frag);
        prop_assert!(phi.depth() <= d);
        prop_assert_eq!(parse_formula(&phi.to_string()).unwrap(), phi);
    }

    #[test]
    fn negation_free_truth_is_monotone_in_depth(seed in any::<u64>(), d in 1usize..4) {
        let mut g = Gen::new(seed);
        let p = g.plts(&crate::gen::PltsShape { compound: 0.0, ..Default::default() });
        let shallow = ConfigStructure::from_plts(&p, &[0], d, Mode::Strict);
        let deep = ConfigStructure::from_plts(&p, &[0], d + 2, Mode::Strict);
        let phi = FormulaGen::new(&mut g, Fragment::Dhp, &["a", "b"], &[]).closed(3);
        if phi.to_string().contains('!') {
            return Ok(());
        }
        let e = Env::new();
        if satisfies(&shallow, shallow.root(), &e, &phi).unwrap() {
            prop_assert!(satisfies(&deep, deep.root(), &e, &phi).unwrap(), "{}", phi);
        }
    }
}
