use super::*;
use crate::algebras;
use crate::term::parse_term;

fn a() -> Pomset {
    Pomset::action("a")
}

fn b() -> Pomset {
    Pomset::action("b")
}

#[test]
fn instantiate_choice_rule() {
    let p = algebras::bpa_eps();
    let r = p.rule("alt_l").unwrap();
    let t = |s: &str| parse_term(s, &p.signature).unwrap();
    let s: Substitution =
        [("x".into(), t("a")), ("y".into(), t("b")), ("x'".into(), t("eps"))].into_iter().collect();
    let asg: LabelAssign = [("U".to_string(), a())].into_iter().collect();
    let inst = r.instantiate(&s, &asg, &p.priority).unwrap();
    assert_eq!(inst.to_string(), "a -a-> eps |- a + b -a-> eps");
    assert_eq!(inst, r.instantiate(&s, &asg, &p.priority).unwrap());
}

#[test]
fn instantiate_theta_guard() {
    let p = algebras::bpa_eps_theta_with(&[(a(), b())]).unwrap();
    let r = p.rule("theta").unwrap();
    let t = |s: &str| parse_term(s, &p.signature).unwrap();
    let s: Substitution = [("x".into(), t("a + b")), ("x'".into(), t("eps"))].into_iter().collect();
    let ok: LabelAssign = [("U1".to_string(), a()), ("U2".to_string(), b())].into_iter().collect();
    assert!(r.instantiate(&s, &ok, &p.priority).is_ok());
    let bad: LabelAssign = [("U1".to_string(), b()), ("U2".to_string(), a())].into_iter().collect();
    assert!(matches!(r.instantiate(&s, &bad, &p.priority), Err(InstantiateError::GuardFailed(_))));
    let partial: LabelAssign = [("U1".to_string(), a())].into_iter().collect();
    assert_eq!(r.instantiate(&s, &partial, &p.priority), Err(InstantiateError::Uncovered("U2".into())));
    let mut short = s.clone();
    short.remove("x'");
    assert_eq!(r.instantiate(&short, &ok, &p.priority), Err(InstantiateError::Uncovered("x'".into())));
}

#[test]
fn universal_label_variables() {
    let p = algebras::bpa_eps_theta(Priority::default());
    let vars: Vec<String> = p.rule("theta").unwrap().universal_label_vars().into_iter().collect();
    assert_eq!(vars, vec!["U2".to_string()]);
    assert!(p.rule("alt_l").unwrap().universal_label_vars().is_empty());
}

#[test]
fn denial_shapes() {
    use GroundLiteral::*;
    let sig = algebras::aptc().signature;
    let t = |s: &str| parse_term(s, &sig).unwrap();
    let tr = Trans(t("a"), a(), t("eps"));
    assert!(denies(&tr, &NegTrans(t("a"), a())));
    assert!(denies(&NegTrans(t("a"), a()), &tr));
    assert!(denies(&Pred(t("eps"), "sqrt".into()), &NegPred(t("eps"), "sqrt".into())));
    assert!(!denies(&tr, &NegTrans(t("b"), a())));
    assert!(denies(&tr, &NegTransTo(t("a"), a(), t("eps"))));
    assert!(!denies(&tr, &NegTransTo(t("a"), a(), t("a"))));
    // a negative premise is about the first step of its label
    assert!(denies(&tr, &NegTrans(t("a"), a().seq(&b()))));
    assert!(!denies(&tr, &NegTrans(t("a"), b().seq(&a()))));
}

#[test]
fn denies_is_symmetric() {
    use GroundLiteral::*;
    let sig = algebras::aptc().signature;
    let t = |s: &str| parse_term(s, &sig).unwrap();
    let lits = vec![
        Trans(t("a"), a(), t("eps")),
        Trans(t("a"), b(), t("eps")),
        NegTrans(t("a"), a()),
        NegTrans(t("a"), a().par(&b())),
        NegTransTo(t("a"), a(), t("eps")),
        Pred(t("eps"), "sqrt".into()),
        NegPred(t("eps"), "sqrt".into()),
        NegPred(t("a"), "sqrt".into()),
    ];
    for x in &lits {
        for y in &lits {
            assert_eq!(denies(x, y), denies(y, x));
        }
    }
}

#[test]
fn dsl_rule_syntax() {
    let sig = algebras::aptc().signature;
    let r = parse_rule("rule r: x -U-> x', y -/a.b->, y !: sqrt | step(U), U = U |- x || y -U-> x'", &sig).unwrap();
    assert_eq!(r.premises.len(), 3);
    assert_eq!(r.guards.len(), 2);
    assert_eq!(r.to_string(), "rule r: x -U-> x', y -/a . b->, y !: sqrt | step(U), U = U |- x || y -U-> x';");
    let r2 = parse_rule(&r.to_string(), &sig).unwrap();
    assert_eq!(r, r2);
    let r3 = parse_rule("rule n: x -/tau-> eps |- x : sqrt", &sig).unwrap();
    assert!(matches!(r3.premises[0], Literal::NegTransTo(_, LabelExpr::Tau, _)));
    assert!(parse_rule("rule bad: |- x -/a->", &sig).is_err());
}

#[test]
fn dsl_errors_have_positions() {
    let e = parse_ptss("algebra x;\nfunction f : 1;\nrule r: |- g(x) -a-> x;\n").unwrap_err();
    assert_eq!(e.line, 3);
    assert!(parse_ptss("algebra x;\nrule r: |- x : done;\n").is_err());
    assert!(parse_ptss("include nowhere;").is_err());
    let e = parse_ptss("algebra x;\nfrobnicate;").unwrap_err();
    assert_eq!((e.line, e.col), (2, 1));
}

#[test]
fn priority_is_closed() {
    let c = Pomset::action("c");
    let p = Priority::new([(a(), b()), (b(), c.clone())]).unwrap();
    assert!(p.less(&a(), &c));
    assert!(!p.less(&c, &a()));
    assert_eq!(p.covers().len(), 2);
    assert!(Priority::new([(a(), a())]).is_err());
}

#[test]
fn combine_keeps_base_rules_first() {
    let base = algebras::bpa_eps();
    let ext = algebras::aptc();
    let both = base.combine(&ext).unwrap();
    assert_eq!(both.rules, ext.rules);
    assert_eq!(ext.rules_beyond(&base).len(), 4);
}
