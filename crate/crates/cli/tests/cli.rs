use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn collig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collig"))
        .args(args)
        .env_remove("COLLIG_SEED")
        .output()
        .expect("run collig")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(name: &str, out: &Output) -> PathBuf {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, &out.stdout).unwrap();
    path
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn random_is_deterministic_and_valid() {
    let args = ["random", "--alpha", "1", "--m", "2", "--N", "2", "--flavor", "unitary", "--seed", "7", "--mode", "float"];
    let a = collig(&args);
    let b = collig(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["flavor"], "unitary");
    assert_eq!(doc["entries"].as_array().unwrap().len(), 5);
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_collig"));
        cmd.args(["random", "--alpha", "1", "--m", "1", "--N", "2"]).env_remove("COLLIG_SEED");
        if let Some(s) = env {
            cmd.env("COLLIG_SEED", s);
        }
        cmd.output().unwrap().stdout
    };
    let explicit = collig(&["random", "--alpha", "1", "--m", "1", "--N", "2", "--seed", "11"]).stdout;
    assert_eq!(run(Some("11")), explicit);
    assert_ne!(run(None), explicit);
}

#[test]
fn exact_unitary_is_an_input_error() {
    let out = collig(&["random", "--alpha", "1", "--m", "2", "--N", "2", "--flavor", "unitary", "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn product_with_empty_inner_space_is_neutral() {
    let g = write("neutral-g.json", &collig(&["random", "--alpha", "2", "--m", "2", "--N", "1", "--seed", "3"]));
    let e = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("neutral-e.json");
    let neutral = r#"{"N":0,"alpha":2,"entries":[["1","0"],["0","1"]],"m":2,"mode":"exact"}"#;
    std::fs::write(&e, neutral).unwrap();
    let out = collig(&["product", path_str(&g), path_str(&e)]);
    assert!(out.status.success());
    assert_eq!(out.stdout, std::fs::read(&g).unwrap());
}

#[test]
fn product_rejects_mixed_modes() {
    let g = write("mixed-g.json", &collig(&["random", "--alpha", "1", "--m", "1", "--N", "1"]));
    let h = write("mixed-h.json", &collig(&["random", "--alpha", "1", "--m", "1", "--N", "1", "--mode", "float"]));
    assert_eq!(collig(&["product", path_str(&g), path_str(&h)]).status.code(), Some(2));
}

#[test]
fn charfn_of_identity_is_identity() {
    let doc = r#"{"N":1,"alpha":2,"entries":[["1","0","0","0"],["0","1","0","0"],["0","0","1","0"],["0","0","0","1"]],"flavor":"unitary","m":2,"mode":"exact"}"#;
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("identity.json");
    std::fs::write(&path, doc).unwrap();
    let out = collig(&["charfn", path_str(&path), "--seed", "9", "--check-det-identity"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["value"], serde_json::json!([["1/1", "0/1"], ["0/1", "1/1"]]));
    assert_eq!(v["detIdentityResidual"], 0);
}

#[test]
fn charfn_takes_inline_point() {
    let doc = r#"{"N":1,"alpha":1,"entries":[["1","1"],["1","2"]],"m":1,"mode":"exact"}"#;
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("scalar.json");
    std::fs::write(&path, doc).unwrap();
    let v = json(&collig(&["charfn", path_str(&path), "--S", r#"[["3"]]"#]));
    assert_eq!(v["value"], serde_json::json!([["2/5"]]));
    let pole = collig(&["charfn", path_str(&path), "--S", r#"[["1/2"]]"#]);
    assert_eq!(pole.status.code(), Some(2));
}

#[test]
fn conjugate_pair_is_detected() {
    let doc = r#"{"N":2,"alpha":1,"entries":[["1","2","0"],["1","1","3"],["0","2","5"]],"m":1,"mode":"exact"}"#;
    // Conjugated by u = [[1,1],[0,1]].
    let partner = r#"{"N":2,"alpha":1,"entries":[["1","2","-2"],["1","3","5"],["0","2","3"]],"m":1,"mode":"exact"}"#;
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let (g, h) = (dir.join("conj-g.json"), dir.join("conj-h.json"));
    std::fs::write(&g, doc).unwrap();
    std::fs::write(&h, partner).unwrap();
    let v = json(&collig(&["conjtest", path_str(&g), path_str(&h)]));
    assert_eq!(v["verdict"], "conjugate");
    assert!(v["witness"].is_array());
    let a = json(&collig(&["invariants", path_str(&g)]));
    let b = json(&collig(&["invariants", path_str(&h)]));
    assert_eq!(a["traceWords"], b["traceWords"]);
    assert_eq!(a["cwb"], b["cwb"]);
}

#[test]
fn divisor_summary_fields() {
    let g = write("divisor.json", &collig(&["random", "--alpha", "1", "--m", "2", "--N", "1", "--seed", "5"]));
    let v = json(&collig(&["divisor", path_str(&g), "--terms"]));
    assert_eq!(v["degree"], 2);
    assert_eq!(v["detLambdaMult"], 0);
    assert!(v["pTerms"]["terms"].is_array());
    let amplified = json(&collig(&["divisor", path_str(&g), "--amplify", "2"]));
    assert_eq!(amplified["degree"], 4);
}

#[test]
fn verify_suites() {
    let out = collig(&["verify", "multiplicativity", "--trials", "20", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["summary"]["pass"], 20);
    assert_eq!(v["summary"]["fail"], 0);
    assert_eq!(collig(&["verify", "unitarity", "--mode", "exact"]).status.code(), Some(2));
    assert_eq!(collig(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(collig(&["verify", "divisor", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn bad_input_exits_two() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("broken.json");
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(collig(&["divisor", path_str(&path)]).status.code(), Some(2));
    assert_eq!(collig(&["divisor", "/nonexistent/file.json"]).status.code(), Some(2));
}
