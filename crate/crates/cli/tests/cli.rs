use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn lotkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lotkit"))
        .args(args)
        .env_remove("LOTKIT_DATA_DIR")
        .output()
        .expect("run lotkit")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let out = lotkit(&all);
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap(), v)
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compare against a stored report. Set `LOTKIT_BLESS=1` to rewrite it.
fn check_golden(name: &str, args: &[&str]) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let out = lotkit(&all);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let path = golden_path(name);
    if std::env::var_os("LOTKIT_BLESS").is_some() {
        std::fs::write(&path, &out.stdout).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), want, "report for {name} changed");
}

#[test]
fn cable_family_goldens() {
    check_golden("cable_family_3_3.json", &["cable-family", "3", "3"]);
    check_golden("cable_family_3_5.json", &["cable-family", "3", "5"]);
    check_golden("cable_family_5_3.json", &["cable-family", "5", "3"]);
}

#[test]
fn cable_family_numbers() {
    let (code, v) = json(&["cable-family", "3", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], true);
    assert_eq!(v["details"]["zetas"].as_array().unwrap().len(), 5);
    let mid = &v["details"]["zetas"][2];
    assert_eq!((mid["a"].as_u64(), mid["b"].as_u64()), (Some(3), Some(3)));
    let (_, v) = json(&["cable-family", "5", "3"]);
    assert_eq!(v["details"]["zeta_bidegree"], "(-8,-8)");
}

#[test]
fn cable_family_guard() {
    assert_eq!(lotkit(&["cable-family", "4", "3"]).status.code(), Some(1));
    assert_eq!(lotkit(&["cable-family", "3", "11"]).status.code(), Some(1));
}

#[test]
fn reports_are_deterministic() {
    let args = ["--format", "json", "lot", "roundtrip", "builtin:cfk/figure_eight.cfk", "--framing", "0"];
    let a = lotkit(&args);
    let b = lotkit(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v.get("timings_ms").is_none());
    let timed = json(&["--timings", "lot", "roundtrip", "builtin:cfk/figure_eight.cfk", "--framing", "0"]).1;
    assert!(timed["timings_ms"]["cfk_to_cfd"].is_u64());
}

#[test]
fn validate_builtin_c3() {
    let (code, v) = json(&["validate", "cfk", "builtin:cfk/c_n.cfk@3"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], true);
    assert_eq!(v["witness"], "exhaustive check");
    assert_eq!(v["inputs"]["builtin:cfk/c_n.cfk"].as_str().unwrap().len(), 64);
}

#[test]
fn parametric_builtin_needs_parameter() {
    assert_eq!(lotkit(&["validate", "cfk", "builtin:cfk/c_n.cfk"]).status.code(), Some(2));
}

#[test]
fn truncated_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.cfk");
    std::fs::write(&p, "gen a 0 0\ngen b -1\n").unwrap();
    let out = lotkit(&["validate", "cfk", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn invalid_complex_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.cfk");
    std::fs::write(&p, "gen a 0 0\ngen b 0 0\nd a b U\n").unwrap();
    let (code, v) = json(&["validate", "cfk", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], false);
}

#[test]
fn wrong_curvature_names_the_generator() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.d");
    std::fs::write(&p, "variant extended\ncurvature curved\ngen x i0 0 0\n").unwrap();
    let (code, v) = json(&["validate", "d", p.to_str().unwrap()]);
    assert_eq!(code, 1, "{v}");
    let problems = v["details"]["problems"].to_string();
    assert!(problems.contains("x -> x"), "{problems}");
}

#[test]
fn roundtrips() {
    for f in ["unknot", "trefoil", "figure_eight"] {
        for n in ["-1", "0", "7"] {
            let (code, v) = json(&["lot", "roundtrip", &format!("builtin:cfk/{f}.cfk"), "--framing", n]);
            assert_eq!(code, 0, "{f} {n}: {v}");
            assert!(v["witness"].is_string());
        }
    }
}

#[test]
fn lot_to_d_and_back_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = lotkit(&["lot", "to-d", "builtin:cfk/trefoil.cfk", "--framing", "-3"]);
    assert_eq!(d.status.code(), Some(0));
    let text = String::from_utf8(d.stdout).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with("# ")).map(|l| format!("{l}\n")).collect();
    let p = dir.path().join("t.d");
    std::fs::write(&p, body).unwrap();
    let (code, v) = json(&["lot", "to-cfk", p.to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    assert!(v["output"].as_str().unwrap().contains("gen"));
    let (code, v) = json(&["curve", "from-d", p.to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["details"]["axis_intersections"], 3);
}

#[test]
fn az_pieces_box_to_identity_size() {
    let (code, v) =
        json(&["box", "builtin:bimodules/az_bar.da", "builtin:bimodules/az.da", "--target-kind", "da", "--reduce"]);
    assert_eq!(code, 0);
    assert_eq!(v["details"]["generators"], 2);
}

#[test]
fn involution_verbs() {
    let (code, v) = json(&["iota", "validate", "builtin:cfk/c_n.cfk@3", "builtin:iota/c_n.iota@3"]);
    assert_eq!((code, &v["verdict"]), (0, &Value::Bool(true)));
    assert!(v["witness"].is_string());
    let (code, v) = json(&["iota", "hat", "builtin:cfk/trefoil.cfk", "builtin:iota/trefoil.iota"]);
    assert_eq!(code, 0);
    assert_eq!(v["details"]["rank"], 3);
    let (code, v) = json(&["iota", "solve", "builtin:cfk/figure_eight.cfk"]);
    assert_eq!(code, 0, "{v}");
    let (_, v) = json(&["iota", "isolate", "builtin:cfk/c_n.cfk@3", "--parts", "x|a,b,c,d"]);
    assert!(v["details"]["isolated"].as_array().unwrap().contains(&Value::String("x".into())));
}

#[test]
fn split_verbs() {
    let (code, v) = json(&["split", "blocks", "builtin:cfk/c_n.cfk@3", "--parts", "x|a,b,c,d"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["details"]["cfk"], v["details"]["type_d"]);
    let (code, v) =
        json(&["--seed", "11", "split", "random", "builtin:cfk/c_n.cfk@3", "--parts", "x|a,b,c,d", "--trials", "10"]);
    assert_eq!(code, 0, "{v}");
}

#[test]
fn data_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("cfk")).unwrap();
    std::fs::write(dir.path().join("cfk/unknot.cfk"), "# two copies\ngen x 0 0\ngen y 0 0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lotkit"))
        .args(["--format", "json", "reduce", "cfk", "builtin:cfk/unknot.cfk"])
        .env("LOTKIT_DATA_DIR", dir.path())
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["details"]["generators_after"], 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(lotkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lotkit(&["reduce", "curve", "builtin:cfk/unknot.cfk"]).status.code(), Some(2));
}
