use proptest::prelude::*;

use super::*;
use crate::pomset::{parse_pomset, ActionLabel};

fn act(a: &str) -> Pomset {
    Pomset::action(a)
}

/// 0 -a-> 1 -b-> 2
fn chain_ab() -> Plts {
    let mut p = Plts::new(3, 0).unwrap();
    p.add_transition(0, act("a"), 1).unwrap();
    p.add_transition(1, act("b"), 2).unwrap();
    p
}

/// 0 -a-> 1 -b-> 3, 0 -b-> 2 -a-> 3
fn diamond() -> Plts {
    let mut p = Plts::new(4, 0).unwrap();
    p.add_transition(0, act("a"), 1).unwrap();
    p.add_transition(1, act("b"), 3).unwrap();
    p.add_transition(0, act("b"), 2).unwrap();
    p.add_transition(2, act("a"), 3).unwrap();
    p
}

#[test]
fn finiteness_of_chain_and_loop() {
    let f = chain_ab().finiteness();
    assert_eq!((f.finitely_branching, f.regular, f.finite), (Verdict::Holds, Verdict::Holds, Verdict::Holds));

    let mut l = Plts::new(1, 0).unwrap();
    l.add_transition(0, act("a"), 0).unwrap();
    assert_eq!(l.finiteness().finite, Verdict::Fails);

    let mut t = chain_ab();
    t.mark_frontier(2).unwrap();
    let f = t.finiteness();
    assert_eq!(f.finite, Verdict::Unknown);
    assert_eq!(f.regular, Verdict::Unknown);
}

#[test]
fn initial_sets() {
    let mut p = Plts::new(3, 0).unwrap();
    p.add_transition(0, act("a"), 1).unwrap();
    p.add_transition(0, act("b"), 2).unwrap();
    p.add_predicate(1, "sqrt").unwrap();
    let i0 = p.initial_set(0).unwrap();
    assert_eq!(i0.pomsets, [act("a"), act("b")].into_iter().collect());
    assert!(i0.predicates.is_empty());
    let i1 = p.initial_set(1).unwrap();
    assert!(i1.pomsets.is_empty());
    assert_eq!(i1.predicates, ["sqrt".to_string()].into_iter().collect());
    assert!(p.initial_set(2).unwrap().is_empty());
    assert_eq!(p.initial_set(7), Err(PltsError::UnknownState(7)));
}

#[test]
fn json_round_trip_and_sparse_ids() {
    let mut p = diamond();
    p.add_transition(3, parse_pomset("{x:a, y:b | x<y}").unwrap(), 0).unwrap();
    p.add_predicate(3, "sqrt").unwrap();
    let back = Plts::from_json_str(&p.to_json_string()).unwrap();
    assert_eq!(back.transitions(), p.transitions());
    assert_eq!(back.predicates(3), p.predicates(3));

    let src = r#"{"states":[{"id":5},{"id":9,"term":"eps"}],"initial":5,
        "transitions":[{"from":5,"pomset":{"events":[{"id":"x","label":"a"}],"order":[]},"to":9}],
        "predicates":[{"state":9,"name":"sqrt"}]}"#;
    let q = Plts::from_json_str(src).unwrap();
    assert_eq!(q.len(), 2);
    assert!(q.has_transition(0, &act("a"), 1));
    assert!(q.has_predicate(1, "sqrt"));
    assert_eq!(q.state_name(1), "eps");

    let bad = r#"{"states":[{"id":0}],"initial":0,"transitions":[{"from":0,"pomset":{"events":[],"order":[]},"to":3}]}"#;
    assert_eq!(Plts::from_json_str(bad), Err(PltsError::UnknownState(3)));
}

#[test]
fn json_output_is_byte_stable() {
    assert_eq!(diamond().to_json_string(), diamond().to_json_string());
    assert!(diamond().to_dot().starts_with("digraph plts {"));
}

#[test]
fn strict_chain_unfolds_to_one_total_order() {
    let cs = unfold(&chain_ab(), 5);
    let max = cs.maximal_configurations();
    assert_eq!(max.len(), 1);
    let (_, pom) = max.into_iter().next().unwrap();
    assert_eq!(pom, parse_pomset("{x:a, y:b | x<y}").unwrap());
    assert!(!cs.truncated());
    let root = cs.node(cs.root());
    assert!(root.events.is_empty());
    assert_eq!(root.state, Some(0));
}

#[test]
fn diamond_modes() {
    let g = unfold_with_mode(&diamond(), 5, Mode::Granular);
    let gmax = g.maximal_configurations();
    assert_eq!(gmax.len(), 1);
    assert_eq!(gmax.into_iter().next().unwrap().1, parse_pomset("{x:a, y:b}").unwrap());
    // both interleavings close into the same node
    assert_eq!(g.maximal_nodes().len(), 1);

    let s = unfold_with_mode(&diamond(), 5, Mode::Strict);
    assert_eq!(s.maximal_nodes().len(), 2);
    let shapes: BTreeSet<Pomset> = s.maximal_configurations().into_iter().map(|(_, p)| p).collect();
    let ab = parse_pomset("{x:a, y:b | x<y}").unwrap();
    let ba = parse_pomset("{x:b, y:a | x<y}").unwrap();
    assert_eq!(shapes, [ab, ba].into_iter().collect());
}

#[test]
fn repeated_label_is_not_a_diamond() {
    let mut p = Plts::new(3, 0).unwrap();
    p.add_transition(0, act("a"), 1).unwrap();
    p.add_transition(1, act("a"), 2).unwrap();
    let g = unfold_with_mode(&p, 5, Mode::Granular);
    let max = g.maximal_configurations();
    assert_eq!(max.into_iter().next().unwrap().1, parse_pomset("{x:a, y:a | x<y}").unwrap());
}

#[test]
fn non_adjacent_commutation() {
    // a, b, c pairwise commuting: the cube gives an antichain
    let mut p = Plts::new(8, 0).unwrap();
    let names = ["a", "b", "c"];
    for s in 0..8usize {
        for (i, n) in names.iter().enumerate() {
            if s >> i & 1 == 0 {
                p.add_transition(s, act(n), s | 1 << i).unwrap();
            }
        }
    }
    let g = unfold_with_mode(&p, 5, Mode::Granular);
    let max = g.maximal_configurations();
    assert_eq!(max.len(), 1);
    assert_eq!(max.into_iter().next().unwrap().1, parse_pomset("{x:a, y:b, z:c}").unwrap());
}

#[test]
fn step_transitions_keep_their_order_and_block_commutation() {
    let mut p = Plts::new(3, 0).unwrap();
    p.add_transition(0, parse_pomset("{x:a, y:b}").unwrap(), 1).unwrap();
    p.add_transition(1, act("c"), 2).unwrap();
    let g = unfold_with_mode(&p, 5, Mode::Granular);
    let pom = g.maximal_configurations().into_iter().next().unwrap().1;
    assert_eq!(pom, parse_pomset("{x:a, y:b, z:c | x<z, y<z}").unwrap());
}

#[test]
fn depth_bound_marks_frontier() {
    let mut l = Plts::new(1, 0).unwrap();
    l.add_transition(0, act("a"), 0).unwrap();
    let cs = unfold(&l, 3);
    assert!(cs.truncated());
    assert_eq!(cs.nodes().len(), 4);
    assert!(cs.maximal_nodes().is_empty());
}

#[test]
fn prime_event_structure_configurations() {
    let a = ActionLabel::new("a").unwrap();
    let b = ActionLabel::new("b").unwrap();
    // a # b, plus a concurrent copy c of b's label
    let es = PrimeEventStructure::new(vec![a.clone(), b.clone(), b.clone()], &[], &[(0, 1)]).unwrap();
    let cs = es.configurations();
    // {}, {0}, {1}, {2}, {0,2}, {1,2}
    assert_eq!(cs.nodes().len(), 6);
    let root = cs.node(cs.root());
    assert_eq!(root.out.len(), 5);
    assert!(PrimeEventStructure::new(vec![a.clone(), b.clone()], &[(0, 1)], &[(0, 1)]).is_err());
    assert!(PrimeEventStructure::new(vec![a, b], &[(0, 1), (1, 0)], &[]).is_err());
}

#[test]
fn conflict_is_inherited() {
    let l = |s: &str| ActionLabel::new(s).unwrap();
    let es = PrimeEventStructure::new(vec![l("a"), l("b"), l("c")], &[(1, 2)], &[(0, 1)]).unwrap();
    assert!(es.conflict(0, 2));
    assert!(es.conflict(2, 0));
}

fn arb_plts() -> impl Strategy<Value = Plts> {
    (1usize..=5, prop::collection::vec((0usize..5, 0usize..3, 0usize..5), 0..8)).prop_map(|(n, ts)| {
        let mut p = Plts::new(n, 0).unwrap();
        for (f, l, t) in ts {
            p.add_transition(f % n, act(["a", "b", "c"][l]), t % n).unwrap();
        }
        p
    })
}

proptest! {
    #[test]
    fn prefix_stability(p in arb_plts(), d in 0usize..4, granular in any::<bool>()) {
        let mode = if granular { Mode::Granular } else { Mode::Strict };
        let small = unfold_with_mode(&p, d, mode);
        let big = unfold_with_mode(&p, d + 1, mode);
        prop_assert_eq!(big.shape(d), small.shape(d));
    }

    #[test]
    fn granular_never_has_more_maximal_configurations(p in arb_plts()) {
        let s = unfold_with_mode(&p, 4, Mode::Strict);
        let g = unfold_with_mode(&p, 4, Mode::Granular);
        prop_assert!(g.maximal_configurations().len() <= s.maximal_configurations().len());
    }

    #[test]
    fn node_orders_extend_their_parents(p in arb_plts(), granular in any::<bool>()) {
        let mode = if granular { Mode::Granular } else { Mode::Strict };
        let cs = unfold_with_mode(&p, 4, mode);
        for n in cs.nodes() {
            for t in &n.out {
                let child = cs.node(t.target);
                prop_assert!(n.events.iter().all(|e| child.events.contains(e)));
                // new events are never below old ones
                for &old in &n.events {
                    for &new in &t.events {
                        prop_assert!(!cs.less(new, old));
                    }
                }
            }
        }
    }

    #[test]
    fn empty_initial_set_iff_dead(p in arb_plts(), s in 0usize..5) {
        let s = s % p.len();
        let i = p.initial_set(s).unwrap();
        prop_assert_eq!(i.is_empty(), p.successors(s).next().is_none() && p.predicates(s).is_empty());
    }

    #[test]
    fn json_round_trip(p in arb_plts()) {
        let back = Plts::from_json_str(&p.to_json_string()).unwrap();
        prop_assert_eq!(back.transitions(), p.transitions());
    }
}
