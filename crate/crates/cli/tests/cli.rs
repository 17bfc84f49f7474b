use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delta-forge"))
        .args(args)
        .env_remove("DELTA_FORGE_SEED")
        .output()
        .expect("binary runs")
}

fn doc(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("delta-forge-{}-{name}", std::process::id()))
}

#[test]
fn delta_of_two_is_minus_two_mod_81() {
    let out = run(&["delta-eval", "--p", "3", "--prec", "4", "--m", "1", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let d = doc(&out);
    assert_eq!(d["value"], serde_json::json!([79]));
    assert_eq!(d["prec"], 4);
}

#[test]
fn delta_of_two_at_p5() {
    let d = doc(&run(&["delta-eval", "--ring", r#"{"p":5,"prec":3,"m":1}"#, "2"]));
    // (2 - 32) / 5 = -6
    assert_eq!(d["value"], serde_json::json!([125 - 6]));
}

#[test]
fn generated_cocycle_passes_the_check() {
    let path = scratch("cocycle.json");
    let made = run(&["cocycle-make", "--p", "5", "--prec", "6", "--n", "3", "--degree", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(made.status.code(), Some(0));
    let checked = run(&["cocycle-check", "--p", "5", "--prec", "6", "--samples", "200", path.to_str().unwrap()]);
    assert_eq!(checked.status.code(), Some(0));
    assert_eq!(doc(&checked)["pass"], true);
    let recovered = run(&["cocycle-recover", "--p", "5", "--prec", "6", &format!("@{}", path.display())]);
    assert_eq!(recovered.status.code(), Some(0));
    assert_eq!(doc(&recovered)["roundtrip"]["pass"], true);
    std::fs::remove_file(path).ok();
}

#[test]
fn non_cocycle_exits_one_with_counterexample() {
    let out = run(&["cocycle-check", "--p", "5", "--prec", "6", r#"{"kind":"det-delta","n":2}"#]);
    assert_eq!(out.status.code(), Some(1));
    let d = doc(&out);
    assert_eq!(d["pass"], false);
    assert!(d["counterexample"]["inputs"].as_array().unwrap().len() == 2);
}

#[test]
fn antidiagonal_needs_preconditioning() {
    let out = run(&["decompose", "--p", "5", "--prec", "3", "[[0,1],[1,0]]"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(doc(&out)["error"], "non-unit-minor");

    let path = scratch("word.json");
    let pre = run(&["decompose", "--p", "5", "--prec", "3", "--precondition", "--out", path.to_str().unwrap(), "[[0,1],[1,0]]"]);
    assert_eq!(pre.status.code(), Some(0));
    let back = run(&["reconstruct", "--p", "5", "--prec", "3", path.to_str().unwrap()]);
    assert_eq!(back.status.code(), Some(0));
    assert_eq!(doc(&back)["rows"], serde_json::json!([[[0], [1]], [[1], [0]]]));
    std::fs::remove_file(path).ok();
}

#[test]
fn precision_exhaustion_exits_three() {
    let out = run(&["delta-eval", "--p", "3", "--prec", "2", "--order", "2", "[5]"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(doc(&out)["error"], "precision-exhausted");
}

#[test]
fn input_errors_exit_two() {
    for args in [
        vec!["delta-eval", "--p", "4", "--prec", "2", "1"],
        vec!["delta-eval", "1"],
        vec!["psi", "--trunc", "6", "3"],
        vec!["jet-prolong", "--p", "3", "--prec", "3", "x0 +"],
        vec!["ring-info", "--ring", r#"{"p":3,"prec":4,"m":2,"modulus":[2,0,1]}"#],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(doc(&out)["error"].is_string());
    }
}

#[test]
fn seeds_make_output_reproducible() {
    let args = ["cocycle-make", "--p", "7", "--prec", "4", "--n", "2"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let with_env = Command::new(env!("CARGO_BIN_EXE_delta-forge"))
        .args(args)
        .env("DELTA_FORGE_SEED", "1729")
        .output()
        .unwrap();
    assert_eq!(a.stdout, with_env.stdout);
    let other = Command::new(env!("CARGO_BIN_EXE_delta-forge"))
        .args(args)
        .env("DELTA_FORGE_SEED", "5")
        .output()
        .unwrap();
    assert_ne!(a.stdout, other.stdout);
    let mut flagged = args.to_vec();
    flagged.extend(["--seed", "5"]);
    assert_eq!(run(&flagged).stdout, other.stdout);
}

#[test]
fn jet_commands() {
    let d = doc(&run(&["jet-prolong", "--p", "3", "--prec", "4", "x0"]));
    assert_eq!(d["result"], "x0^(1) (mod 3^3)");
    let d = doc(&run(&["jet-nabla", "--p", "3", "--prec", "4", "[2]", "--eval", "x0'"]));
    assert_eq!(d["value"], serde_json::json!([25]));
    let d = doc(&run(&["jet-prolong", "--trunc", "6", "x0^2", "--order", "2"]));
    assert_eq!(d["result"], "2*x0*x0^(2) + 2*x0^(1)^2 (mod t^4)");
}

#[test]
fn homomorphism_families() {
    let ok = |args: &[&str]| {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        doc(&out)
    };
    assert_eq!(ok(&["hom-check", "--p", "3", "--prec", "6", "--family", "psi", "--samples", "100"])["pass"], true);
    assert_eq!(ok(&["hom-check", "--p", "5", "--prec", "5", "--family", "ga", r#"{"lambda":[1,2,3]}"#])["law"], "additive");
    ok(&["hom-check", "--trunc", "6", "--family", "twisted", r#"{"mu":[1,1],"s":3}"#, "--samples", "50"]);
    let d = ok(&["teich", "--p", "5", "--prec", "4", "--m", "2", "[1,1]"]);
    assert!(d["lift"].is_array());
}

#[test]
fn kolchin_coherence() {
    let ld = r#"{"kind":"log-derivative","n":2}"#;
    for subgroup in ["torus", "sl_n", "borel", "conjugated-torus"] {
        let out = run(&["coherence-check", "--trunc", "6", "--samples", "20", "--subgroup", subgroup, ld]);
        assert_eq!(out.status.code(), Some(0), "{subgroup}");
    }
    let cob = r#"{"kind":"coboundary","v":[[0,1],[0,0]]}"#;
    let out = run(&["coherence-check", "--trunc", "6", "--subgroup", "torus", cob]);
    assert_eq!(out.status.code(), Some(1));
}
