use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn pomsos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pomsos"))
        .args(args)
        .env_remove("POMSETSOS_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn schema(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(path).expect("schema exists")).expect("schema parses")
}

/// Runs with `--json`, checks the output against the named schema and
/// returns it with the exit code.
fn json_run(schema_name: &str, args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.push("--json");
    let o = pomsos(&all);
    let v: Value = serde_json::from_str(&stdout(&o))
        .unwrap_or_else(|e| panic!("{args:?}: not JSON ({e}): {}", String::from_utf8_lossy(&o.stderr)));
    let validator = jsonschema::validator_for(&schema(schema_name)).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{args:?} against {schema_name}: {errors:?}\n{v:#}");
    (v, code(&o))
}

/// The interleaving diamond of `a` and `b` as explicit PLTS JSON.
fn write_diamond(name: &str) -> String {
    let path = tmp(name);
    std::fs::write(
        &path,
        r#"{"states":[{"id":0},{"id":1},{"id":2},{"id":3}],"initial":0,
            "transitions":[
              {"from":0,"pomset":{"events":[{"id":"x","label":"a"}]},"to":1},
              {"from":1,"pomset":{"events":[{"id":"x","label":"b"}]},"to":3},
              {"from":0,"pomset":{"events":[{"id":"x","label":"b"}]},"to":2},
              {"from":2,"pomset":{"events":[{"id":"x","label":"a"}]},"to":3}]}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn derive_example_gives_three_states() {
    let (v, c) = json_run("plts", &["derive", "--algebra", "bpa_eps", "--term", "a . b"]);
    assert_eq!(c, 0);
    assert_eq!(v["states"].as_array().unwrap().len(), 3);
    assert_eq!(v["transitions"].as_array().unwrap().len(), 2);
    assert_eq!(v["predicates"][0]["name"], "sqrt");
}

#[test]
fn parallel_versus_interleaving_fails_with_counterexample() {
    let o = pomsos(&["equiv", "--algebra", "aptc", "--rel", "pomset", "a || b", "a.b + b.a"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("counterexample: `<{e0:a, e1:b}>true`"), "{}", stdout(&o));
    let (v, c) = json_run("equiv", &["equiv", "--algebra", "aptc", "--rel", "pomset", "a || b", "a.b + b.a"]);
    assert_eq!(c, 1);
    assert_eq!(v["verdict"], "fails");
    assert_eq!(v["witness"]["type"], "formula");
}

#[test]
fn aptc_conservatively_extends_bpa() {
    let o = pomsos(&["conservative", "bpa_eps.ptss", "aptc.ptss"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("certified"));
    let (v, c) = json_run("conservative", &["conservative", "bpa_eps.ptss", "aptc.ptss", "--spot-check", "5"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["verdict"], "certified");
    assert_eq!(v["spot_check"]["discrepancies"].as_array().unwrap().len(), 0);
}

#[test]
fn unknown_extension_exits_two() {
    let spec = tmp("extra.ptss");
    std::fs::write(&spec, "algebra extra;\ninclude bpa_eps;\nrule odd: |- x + y -c-> eps;\n").unwrap();
    let (v, c) = json_run("conservative", &["conservative", "bpa_eps", spec.to_str().unwrap()]);
    assert_eq!(c, 2);
    assert_eq!(v["result"]["reasons"][0]["clause"], "extension_rule");
    let o = pomsos(&["conservative", "bpa_eps", spec.to_str().unwrap(), "--spot-check", "30"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}

#[test]
fn relation_verdicts_and_exit_codes() {
    let run = |args: &[&str]| code(&pomsos(args));
    assert_eq!(run(&["equiv", "--rel", "t", "a . (b + c)", "a . b + a . c"]), 0);
    assert_eq!(run(&["equiv", "--rel", "p", "a . (b + c)", "a . b + a . c"]), 1);
    assert_eq!(run(&["preorder", "--rel", "p", "a", "a + b"]), 0);
    assert_eq!(run(&["preorder", "--rel", "ready-pomset", "a", "a + b"]), 1);
    assert_eq!(run(&["equiv", "--algebra", "aptc", "--rel", "bp", "tau . a", "a"]), 0);
    assert_eq!(run(&["equiv", "--algebra", "aptc", "--rel", "rbp", "tau . a", "a"]), 1);
    assert_eq!(run(&["equiv", "--algebra", "aptc", "--rel", "rbp", "a . tau . b", "a . b"]), 0);
    for rel in ["hp", "hhp"] {
        let (v, c) = json_run("equiv", &["equiv", "--algebra", "aptc", "--rel", rel, "a || b", "a . b + b . a"]);
        assert_eq!(c, 1);
        assert_eq!(v["witness"]["type"], "formula", "{rel}");
        let (v, c) = json_run("equiv", &["equiv", "--algebra", "aptc", "--rel", rel, "a || b", "b || a"]);
        assert_eq!(c, 0);
        assert_eq!(v["witness"]["type"], "posetal");
    }
    let (v, _) = json_run("equiv", &["preorder", "--rel", "t", "a . b", "a"]);
    assert_eq!(v["witness"]["type"], "trace");
}

#[test]
fn usage_and_parse_errors_exit_three() {
    let o = pomsos(&["derive", "--term", "a . "]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:5"));
    assert_eq!(code(&pomsos(&["equiv", "--rel", "zz", "a", "a"])), 3);
    assert_eq!(code(&pomsos(&["derive", "--term", "a", "--mode", "loose"])), 3);
    assert_eq!(code(&pomsos(&["derive", "--algebra", "nowhere.ptss", "--term", "a"])), 3);
    assert_eq!(code(&pomsos(&["frobnicate"])), 3);
    assert_eq!(code(&pomsos(&["--help"])), 0);
    let bad = tmp("bad.ptss");
    std::fs::write(&bad, "algebra bad;\nfunction f : 1;\nrule r: x -a-> y |- f(x) -a-> ;\n").unwrap();
    let o = pomsos(&["formats", "--algebra", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.ptss:3:"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bounds_exhaustion_exits_two() {
    let (v, c) = json_run("plts", &["derive", "--algebra", "aptc", "--term", "a . b . c", "--max-states", "2"]);
    assert_eq!(c, 2);
    assert_eq!(v["truncated"], true);
    let (v, c) = json_run("mc", &["mc", "--algebra", "de_simone_fix", "--term", "fix X . a . X", "--depth", "2", "! << a x >> << b y >> true"]);
    assert_eq!(c, 2);
    assert_eq!(v["verdict"], "unknown");
}

#[test]
fn model_checking() {
    let (v, c) = json_run("mc", &["mc", "--algebra", "aptc", "--term", "a . b", "<< a x >> << x < b y >> true"]);
    assert_eq!((c, v["satisfied"].as_bool()), (0, Some(true)));
    let diamond = write_diamond("mc-diamond.json");
    let step = "(<a x> * <b y>) true";
    let (_, c) = json_run("mc", &["mc", "--plts", &diamond, "--mode", "granular", step]);
    assert_eq!(c, 0);
    let (_, c) = json_run("mc", &["mc", "--plts", &diamond, step]);
    assert_eq!(c, 1);
    // Both interleavings of the sum end in `eps`, so granular mode reads them as a diamond.
    let (_, c) = json_run("mc", &["mc", "--algebra", "aptc", "--term", "a . b + b . a", "--mode", "granular", step]);
    assert_eq!(c, 0);
    let (_, c) = json_run("mc", &["mc", "--algebra", "aptc", "--term", "a . b + b . a", step]);
    assert_eq!(c, 1);
    assert_eq!(code(&pomsos(&["mc", "--term", "a", "<< a x >>"])), 3);
}

#[test]
fn formats_report() {
    let (v, c) = json_run("formats", &["formats", "--algebra", "bpa_eps_theta"]);
    assert_eq!(c, 0);
    let verdict = |name: &str| v["formats"].as_array().unwrap().iter().find(|f| f["format"] == name).unwrap()["verdict"].clone();
    assert_eq!(verdict("panth"), "holds");
    assert_eq!(verdict("positive"), "fails");
    let (v, c) = json_run("format_verdict", &["formats", "--algebra", "bpa_eps", "--format", "rbb-safe"]);
    assert_eq!(c, 0);
    assert_eq!(v["labelling"]["..1"], "wild");
    let (_, c) = json_run("format_verdict", &["formats", "--algebra", "bpa_eps", "--format", "gsos"]);
    assert_eq!(c, 1);
    let text = stdout(&pomsos(&["formats", "--algebra", "de_simone_fix"]));
    assert!(text.contains("schema fix recursion: not classified"));
}

#[test]
fn models_and_stratification() {
    let (v, c) = json_run("model", &["model", "--algebra", "self_negation", "--term", "f"]);
    assert_eq!(c, 0);
    assert_eq!(v["unknown"].as_array().unwrap().len(), 1);
    assert_eq!(v["positive_after_reduction"], false);
    let (v, _) = json_run("model", &["model", "--algebra", "bpa_eps_theta", "--priority", "a < b", "--term", "theta(a + b)"]);
    let truths: Vec<&str> = v["true"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
    assert!(truths.contains(&"theta(a + b) -b-> theta(eps)"));
    assert!(!truths.iter().any(|l| l.starts_with("theta(a + b) -a->")));
    assert_eq!(code(&pomsos(&["model", "--algebra", "bpa_eps_theta", "--priority", "a < b, b < a", "--term", "a"])), 3);
    for alg in ["bpa_eps_theta", "bpa_eps_dt"] {
        let (v, c) = json_run("stratify", &["stratify", "--algebra", alg]);
        assert_eq!((c, v["certified"].as_bool()), (0, Some(true)), "{alg}");
    }
    let (v, c) = json_run("stratify", &["stratify", "--algebra", "self_negation"]);
    assert_eq!(c, 1);
    assert_eq!(v["report"]["violation"]["condition"], 2);
}

#[test]
fn unfolding_modes() {
    let path = &write_diamond("diamond.json");
    let maximal = |v: &Value| v["nodes"].as_array().unwrap().iter().filter(|n| n["out"].as_array().unwrap().is_empty()).count();
    let (strict, c) = json_run("unfold", &["unfold", "--plts", path]);
    assert_eq!(c, 0);
    let (granular, _) = json_run("unfold", &["unfold", "--plts", path, "--mode", "granular"]);
    assert_eq!((maximal(&strict), maximal(&granular)), (2, 1));
    assert_eq!(code(&pomsos(&["equiv", "--plts", path, "--rel", "p", "1", "2"])), 1);
    assert_eq!(code(&pomsos(&["equiv", "--plts", path, "--rel", "p", "3", "3"])), 0);
    assert_eq!(code(&pomsos(&["equiv", "--plts", path, "--rel", "p", "0", "9"])), 3);
    let (v, _) = json_run("unfold", &["unfold", "--algebra", "aptc", "--term", "a || b"]);
    assert_eq!(v["events"].as_array().unwrap().len(), 2);
}

#[test]
fn output_is_byte_stable_and_seeded() {
    let args = ["conservative", "bpa_eps", "bpa_eps_dt", "--spot-check", "10", "--json"];
    let a = pomsos(&[&args[..], &["--seed", "5"]].concat());
    let b = pomsos(&[&args[..], &["--seed", "5"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_pomsos")).args(args).env("POMSETSOS_SEED", "5").output().unwrap();
    assert_eq!(a.stdout, env.stdout);
    let d1 = pomsos(&["derive", "--algebra", "aptc", "--term", "(a . b) || c", "--dot"]);
    let d2 = pomsos(&["derive", "--algebra", "aptc", "--term", "(a . b) || c", "--dot"]);
    assert_eq!(d1.stdout, d2.stdout);
    assert!(stdout(&d1).starts_with("digraph"));
}

#[test]
fn spec_files_include_siblings() {
    let base = tmp("mybase.ptss");
    std::fs::write(&base, "algebra mybase;\ninclude bpa_eps;\n").unwrap();
    let ext = tmp("myext.ptss");
    std::fs::write(&ext, "algebra myext;\ninclude mybase;\nfunction twice : 1;\nrule tw: x -U-> y |- twice(x) -U-> y . x;\n").unwrap();
    let (v, c) = json_run("conservative", &["conservative", base.to_str().unwrap(), ext.to_str().unwrap()]);
    assert_eq!(c, 0);
    assert_eq!(v["extension"], "myext");
    let (v, _) = json_run("plts", &["derive", "--algebra", ext.to_str().unwrap(), "--term", "twice(a)"]);
    assert_eq!(v["states"].as_array().unwrap().len(), 3);
}
