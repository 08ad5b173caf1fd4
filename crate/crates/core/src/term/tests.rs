use super::*;
use proptest::prelude::*;

fn sig() -> Signature {
    let mut s = Signature::default()
        .with_function(sym::EPS, 0)
        .with_function(sym::ALT, 2)
        .with_function(sym::SEQ, 2)
        .with_function(sym::PAR, 2)
        .with_function(sym::THETA, 1)
        .with_predicate(SQRT);
    s.pomset_constants = true;
    s
}

fn t(src: &str) -> Term {
    parse_term(src, &sig()).unwrap()
}

fn pat(src: &str) -> Term {
    parse_pattern(src, &sig()).unwrap()
}

#[test]
fn precedence_and_printing() {
    let x = t("a + b . c || d");
    assert_eq!(
        x,
        Term::alt(Term::action("a"), Term::par(Term::seq(Term::action("b"), Term::action("c")), Term::action("d")))
    );
    assert_eq!(x.to_string(), "a + b . c || d");
    assert_eq!(t("(a + b) . c").to_string(), "(a + b) . c");
    assert_eq!(t("a . (b . c)").to_string(), "a . (b . c)");
    assert_eq!(t("theta(a + eps)").to_string(), "theta(a + eps)");
    assert_eq!(t("{x:a, y:b | x<y} . c").to_string(), "{e0:a, e1:b | e0<e1} . c");
    let f = t("fix X . a . X");
    assert_eq!(f, Term::fix("X", Term::seq(Term::action("a"), Term::var("X"))));
    assert!(f.is_closed());
    assert_eq!(t("b . (fix X . a . X)").to_string(), "b . (fix X . a . X)");
}

#[test]
fn parse_errors_carry_positions() {
    let e = parse_term("a +\n  sigma_d(b)", &sig()).unwrap_err();
    assert_eq!((e.line, e.col), (2, 3));
    assert!(parse_term("{}", &sig()).is_err());
    assert!(parse_term("theta(a, b)", &sig()).is_err());
    assert!(parse_term("a []", &sig()).is_err());
}

#[test]
fn substitute_examples() {
    let mut s = Substitution::new();
    s.insert("x".into(), t("a"));
    assert_eq!(pat("x + y").substitute(&s), Term::alt(Term::action("a"), Term::var("y")));
    let mut s2 = Substitution::new();
    s2.insert("x".into(), t("c"));
    assert_eq!(t("a . b").substitute(&s2), t("a . b"));
    let f = t("fix X . a . X");
    assert_eq!(f.unfold().unwrap(), Term::seq(Term::action("a"), f.clone()));
}

#[test]
fn substitute_avoids_capture() {
    // fix X . (X + y) with y := X must not bind the substituted X
    let body = Term::fix("X", Term::alt(Term::var("X"), Term::var("y")));
    let mut s = Substitution::new();
    s.insert("y".into(), Term::var("X"));
    let out = body.substitute(&s);
    match &out {
        Term::Fix(z, b) => {
            assert_ne!(z, "X");
            assert_eq!(**b, Term::alt(Term::var(z), Term::var("X")));
        }
        _ => panic!("expected fix"),
    }
    assert_eq!(out.free_vars().into_iter().collect::<Vec<_>>(), vec!["X".to_string()]);
}

#[test]
fn match_examples() {
    let m = match_term(&pat("x + y"), &t("a + b")).unwrap();
    assert_eq!(m["x"], t("a"));
    assert_eq!(m["y"], t("b"));
    assert!(match_term(&pat("x . x"), &t("a . b")).is_none());
    assert!(match_term(&pat("x . x"), &t("a . a")).is_some());
    assert!(match_term(&pat("theta(x)"), &t("a + b")).is_none());
}

#[test]
fn plug_examples() {
    let c = parse_context("[] . b", &sig()).unwrap();
    assert_eq!(c.plug(&[t("a")]).unwrap(), t("a . b"));
    assert_eq!(Context::hole().plug(&[t("a + c")]).unwrap(), t("a + c"));
    let c = parse_context("theta([] + c)", &sig()).unwrap();
    assert_eq!(c.plug(&[t("a")]).unwrap(), t("theta(a + c)"));
    assert_eq!(c.to_string(), "theta([] + c)");
    assert_eq!(
        c.plug(&[]),
        Err(TermError::HoleMismatch { holes: 1, fillers: 0 })
    );
    let c2 = parse_context("[] || []", &sig()).unwrap();
    assert_eq!(c2.holes(), 2);
    assert_eq!(c2.plug(&[t("a"), t("b")]).unwrap(), t("a || b"));
}

fn arb_closed() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::eps()),
        Just(Term::action("a")),
        Just(Term::action("b")),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::alt(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::seq(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::par(l, r)),
            inner.prop_map(|x| Term::fun(sym::THETA, vec![x])),
        ]
    })
}

fn arb_pattern() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::var("x")),
        Just(Term::var("y")),
        Just(Term::eps()),
        Just(Term::action("a")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::alt(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::seq(l, r)),
        ]
    })
}

proptest! {
    #[test]
    fn printing_round_trips(x in arb_closed()) {
        prop_assert_eq!(parse_term(&x.to_string(), &sig()).unwrap(), x);
    }

    #[test]
    fn match_substitute_round_trip(p in arb_pattern(), a in arb_closed(), b in arb_closed()) {
        let mut s = Substitution::new();
        s.insert("x".into(), a);
        s.insert("y".into(), b);
        let subject = p.substitute(&s);
        let m = match_term(&p, &subject).unwrap();
        prop_assert_eq!(p.substitute(&m), subject);
    }

    #[test]
    fn substitution_composes(p in arb_pattern(), a in arb_closed(), b in arb_closed()) {
        // s1 maps x to a term mentioning y, s2 closes y
        let mut s1 = Substitution::new();
        s1.insert("x".into(), Term::seq(a, Term::var("y")));
        let mut s2 = Substitution::new();
        s2.insert("y".into(), b);
        let mut composed: Substitution = s1.iter().map(|(k, v)| (k.clone(), v.substitute(&s2))).collect();
        for (k, v) in &s2 {
            composed.entry(k.clone()).or_insert_with(|| v.clone());
        }
        prop_assert_eq!(p.substitute(&s1).substitute(&s2), p.substitute(&composed));
    }
}
