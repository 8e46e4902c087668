use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

struct Run {
    stdout: String,
    stderr: String,
    code: i32,
}

fn qgame(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_qgame"))
        .args(args)
        .output()
        .unwrap();
    Run {
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        code: out.status.code().unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let r = qgame(&full);
    assert_eq!(r.code, 0, "{}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn exported(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let r = qgame(&["export", name, "--output", path.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    path
}

fn close(v: &Value, want: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() < 1e-9
}

#[test]
fn analyze_prisoners_dilemma() {
    let dir = tempfile::tempdir().unwrap();
    let pd = exported(dir.path(), "prisoners_dilemma");
    let v = json(&["analyze", "--game", pd.to_str().unwrap(), "--classical"]);
    let r = &v["results"];
    assert_eq!(r["dominant_strict"], serde_json::json!(["D", "D"]));
    assert_eq!(r["pure_nash"].as_array().unwrap().len(), 1);
    assert_eq!(r["pure_nash"][0]["play"], "DD");
    let optimal: Vec<&str> = r["pareto_optimal"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert!(optimal.contains(&"CC") && !optimal.contains(&"DD"));
}

#[test]
fn verify_nash_certifies_and_refutes() {
    let dir = tempfile::tempdir().unwrap();
    let pd = exported(dir.path(), "prisoners_dilemma");
    let game = pd.to_str().unwrap();
    let v = json(&[
        "verify-nash",
        "--game",
        game,
        "--family",
        "two_param",
        "--profile",
        "0,1.5707963,0,1.5707963",
    ]);
    assert_eq!(v["results"]["certified"], true);
    assert!(v["results"]["payoffs"]
        .as_array()
        .unwrap()
        .iter()
        .all(|x| close(x, -1.0)));

    let r = qgame(&[
        "verify-nash",
        "--game",
        game,
        "--family",
        "three_param",
        "--profile",
        "0,pi/2,0,0,pi/2,0",
    ]);
    assert_eq!(r.code, 1, "{}", r.stdout);
    assert!(r.stdout.contains("refuted: true"));
}

#[test]
fn best_response_to_defection() {
    let dir = tempfile::tempdir().unwrap();
    let pd = exported(dir.path(), "prisoners_dilemma");
    let v = json(&[
        "best-response",
        "--game",
        pd.to_str().unwrap(),
        "--family",
        "two_param",
        "--player",
        "A",
        "--others",
        "pi,0",
    ]);
    let br = &v["results"]["best_response"];
    assert!(
        close(&br[0], 0.0) && close(&br[1], std::f64::consts::FRAC_PI_2),
        "{br}"
    );
    assert!(close(&v["results"]["payoff"], 0.0));
}

#[test]
fn battle_of_sexes_quantum_plays() {
    let dir = tempfile::tempdir().unwrap();
    let bos = exported(dir.path(), "battle_of_sexes");
    let game = bos.to_str().unwrap();
    let v = json(&["payoff", "--game", game, "--ops", "I,I"]);
    assert!(v["results"]["payoffs"]
        .as_array()
        .unwrap()
        .iter()
        .all(|x| close(x, 2.5)));
    let v = json(&["verify-nash", "--game", game, "--mixed", "0.5,0.5;0.5,0.5"]);
    assert_eq!(v["results"]["certified"], true);
    assert!(v["results"]["payoffs"]
        .as_array()
        .unwrap()
        .iter()
        .all(|x| close(x, 1.75)));
    let v = json(&[
        "verify-nash",
        "--game",
        game,
        "--family",
        "game",
        "--profile",
        "X,X",
    ]);
    assert_eq!(v["results"]["certified"], true);
    let v = json(&[
        "pareto",
        "--entry",
        "mixed=5/3,5/3",
        "--entry",
        "II=2.5,2.5",
        "--entry",
        "XX=2.5,2.5",
        "--entry",
        "qmixed=1.75,1.75",
    ]);
    assert_eq!(v["results"]["optimal"], serde_json::json!(["II", "XX"]));
}

#[test]
fn sequential_penny_flip() {
    let dir = tempfile::tempdir().unwrap();
    let penny = exported(dir.path(), "penny_flip");
    for reply in ["F", "N"] {
        let moves = format!("UQstar,{reply},UQstar");
        let v = json(&[
            "play-sequential",
            "--game",
            penny.to_str().unwrap(),
            "--moves",
            &moves,
        ]);
        let pay = &v["results"]["payoffs"];
        assert_eq!(pay[0]["player"], "Q");
        assert!(close(&pay[0]["payoff"], 1.0) && close(&pay[1]["payoff"], -1.0));
    }
}

#[test]
fn quantumize_reports_commuting_operators() {
    let dir = tempfile::tempdir().unwrap();
    let pd = exported(dir.path(), "prisoners_dilemma");
    let v = json(&["quantumize", "--game", pd.to_str().unwrap()]);
    assert!(v["results"]["max_commutator_norm"].as_f64().unwrap() <= 1e-9);
    let spectrum = &v["results"]["payoff_operators"][0]["spectrum"];
    let eig: Vec<f64> = spectrum
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["eigenvalue"].as_f64().unwrap())
        .collect();
    assert_eq!(eig, vec![-1.0, -5.0, 0.0, -3.0]);
}

#[test]
fn demos_pass_and_are_deterministic() {
    for name in ["penny_flip", "prisoners_dilemma", "battle_of_sexes"] {
        let a = qgame(&["demo", name, "--seed", "7"]);
        let b = qgame(&["demo", name, "--seed", "7"]);
        assert_eq!(a.code, 0, "{}{}", a.stdout, a.stderr);
        assert_eq!(a.stdout, b.stdout);
        assert!(a.stdout.contains("all_passed: true"));
    }
    let j1 = qgame(&["demo", "battle_of_sexes", "--format", "json", "--seed", "3"]);
    let j2 = qgame(&["demo", "battle_of_sexes", "--format", "json", "--seed", "3"]);
    assert_eq!(j1.stdout, j2.stdout);
}

#[test]
fn reports_embed_their_configuration() {
    let v = json(&[
        "demo",
        "prisoners_dilemma",
        "--samples",
        "10",
        "--tol",
        "1e-8",
        "--grid",
        "32",
        "--epsilon",
        "1e-5",
        "--seed",
        "4",
    ]);
    let d = &v["diagnostics"];
    assert!(close(&d["tol"], 1e-8));
    assert_eq!(d["grid_resolution"], 32);
    assert!(close(&d["epsilon"], 1e-5));
    assert_eq!(d["seed"], 4);
    assert_eq!(v["command"], "demo");
}

#[test]
fn numbers_have_twelve_significant_digits() {
    let v = qgame(&["demo", "battle_of_sexes", "--samples", "0"]);
    assert!(v.stdout.contains("1.66666666667"), "{}", v.stdout);
    assert!(!v.stdout.contains("1.666666666666"));
}

#[test]
fn exit_codes() {
    assert_eq!(qgame(&["--help"]).code, 0);
    assert_eq!(qgame(&["--version"]).code, 0);
    assert_eq!(qgame(&[]).code, 2);
    assert_eq!(qgame(&["no-such-command"]).code, 2);
    assert_eq!(qgame(&["demo", "stag_hunt"]).code, 2);
    assert_eq!(
        qgame(&["demo", "prisoners_dilemma", "--param", "alpha=1"]).code,
        2
    );
    assert_eq!(qgame(&["demo", "prisoners_dilemma", "--grid", "1"]).code, 2);
    let r = qgame(&["analyze", "--game", "/definitely/missing.json"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.starts_with("error:"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema_version": 1, "classical": {"players": ["A"]}}"#).unwrap();
    let r = qgame(&["analyze", "--game", bad.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("classical"), "{}", r.stderr);

    let pd = exported(dir.path(), "prisoners_dilemma");
    let r = qgame(&[
        "verify-nash",
        "--game",
        pd.to_str().unwrap(),
        "--family",
        "two_param",
        "--profile",
        "0,1",
    ]);
    assert_eq!(r.code, 2);
    // Mutual defection is beaten by U_Q once phases are allowed.
    let r = qgame(&[
        "verify-nash",
        "--game",
        pd.to_str().unwrap(),
        "--family",
        "two_param",
        "--profile",
        "pi,0,pi,0",
    ]);
    assert_eq!(r.code, 1);
}

#[test]
fn export_to_stdout_parses() {
    let r = qgame(&["export", "battle_of_sexes", "--param", "alpha=4"]);
    assert_eq!(r.code, 0);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
}
