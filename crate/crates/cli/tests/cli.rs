use std::path::Path;
use std::process::Command;

use omegagpd::cylinder::contraction_cylinder;
use omegagpd::globset::DimBound;
use serde_json::{json, Value};

fn ogpd(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ogpd"))
        .args(args)
        .env_remove("OGPD_CONFIG")
        .output()
        .expect("run ogpd");
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    let v = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v, String::from_utf8_lossy(&out.stderr).to_string())
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.to_string_lossy().to_string()
}

#[test]
fn check_reports_boundaries() {
    let (code, v, _) = ogpd(&["check", "inv(u1) *1 u1", "--disk", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["dim"], 2);
    assert_eq!(v["src"], "s1_1");
    let (code, _, _) = ogpd(&["check", "u1 *0 u1", "--disk", "1"]);
    assert_eq!(code, 1);
    let (code, _, err) = ogpd(&["check", "a *", "--disk", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("column"));
}

#[test]
fn nf_and_eq_exit_codes() {
    let (code, v, _) = ogpd(&["nf", "(u1 *1 inv(u1)) *1 u1", "--disk", "2", "--trace"]);
    assert_eq!(code, 0);
    assert_eq!(v["nf"], "u1");
    assert!(v["trace"].as_array().unwrap().len() >= 2);

    let ex = ["u1 *0 u2", "(u1 *0 1_t2_1) *1 (1_s1_1 *0 u2)", "--table", "2 2 / 0"];
    let (code, v, _) = ogpd(&[&["eq"][..], &ex[..]].concat());
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "equal");
    let (code, _, _) = ogpd(&[&["--closure-depth", "0", "eq"][..], &ex[..]].concat());
    assert_eq!(code, 4);

    let (code, v, _) = ogpd(&["eq", "u1", "u1 *1 inv(u1) *1 u1", "--disk", "2"]);
    assert_eq!((code, v["verdict"].as_str()), (0, Some("equal")));
    let (code, v, _) = ogpd(&["eq", "u1", "inv(u1)", "--disk", "1"]);
    assert_eq!(code, 3);
    assert_eq!(v["verdict"], "distinct");
}

#[test]
fn config_file_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &json!({"budget": {"closure_depth": 0}}));
    let out = Command::new(env!("CARGO_BIN_EXE_ogpd"))
        .args(["eq", "u1 *0 u2", "(u1 *0 1_t2_1) *1 (1_s1_1 *0 u2)", "--table", "2 2 / 0"])
        .env("OGPD_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let bad = write(dir.path(), "bad.json", &json!({"dim_bound": 1}));
    let (code, _, _) = ogpd(&["--config", &bad, "nf", "u1", "--disk", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn connect_and_pi() {
    let (code, v, _) = ogpd(&["connect", "t1_1", "s1_1", "--disk", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["h"], "inv(u1)");
    let (code, _, _) = ogpd(&["connect", "s1_0", "s1_1", "--disk", "2"]);
    assert_eq!(code, 1);

    let dir = tempfile::tempdir().unwrap();
    let g = write(
        dir.path(),
        "g.json",
        &json!({"cells": [
            {"id": "x", "dim": 0}, {"id": "y", "dim": 0},
            {"id": "f", "dim": 1, "src": "x", "tgt": "y"},
            {"id": "g", "dim": 1, "src": "x", "tgt": "y"}
        ]}),
    );
    let (code, v, _) = ogpd(&["pi", "--level", "1", "--globset", &g]);
    assert_eq!((code, v["rank"].as_i64()), (0, Some(1)));
    let (_, v, _) = ogpd(&["pi", "--level", "0", "--table", "1 1 1 / 0 0"]);
    assert_eq!(v["components"].as_array().unwrap().len(), 1);
}

#[test]
fn theta0_hom() {
    let (code, v, _) = ogpd(&["theta0", "hom", "0", "1 1 / 0"]);
    assert_eq!(code, 0);
    assert_eq!(v["count"], 3);
    let (code, _, _) = ogpd(&["theta0", "hom", "1 1 / 1", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn cylinders() {
    let dir = tempfile::tempdir().unwrap();
    let z = contraction_cylinder(2, DimBound::default()).unwrap();
    let mut spec = serde_json::to_value(&z).unwrap();
    spec["context"] = json!({"disk": 2});
    let good = write(dir.path(), "z.json", &spec);
    let (code, v, _) = ogpd(&["cyl", "verify", &good]);
    assert_eq!(code, 0);
    assert_eq!(v["valid"], true);
    assert_eq!(v["equations"].as_array().unwrap().len(), 10);

    let wrong_dim = spec["sharps"][1].clone();
    spec["from"] = json!("inv(u1)");
    let bad = write(dir.path(), "bad.json", &spec);
    let (code, v, _) = ogpd(&["cyl", "verify", &bad]);
    assert_eq!(code, 1);
    assert_eq!(v["valid"], false);
    spec["from"] = json!("u1");
    spec["top"] = wrong_dim;
    let ill = write(dir.path(), "ill.json", &spec);
    assert_eq!(ogpd(&["cyl", "verify", &ill]).0, 2);

    let (code, v, _) = ogpd(&["cyl", "contract", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["witness"]["const_endpoint"], true);
}

#[test]
fn towers() {
    let dir = tempfile::tempdir().unwrap();
    let stages = write(
        dir.path(),
        "s.json",
        &json!({"stages": [
            [{"name": "h", "n": 1, "target": "2", "f": "s1_1", "g": "t1_1"}],
            [{"name": "k", "n": 2, "target": "2", "f": "h", "g": "u1"}]
        ]}),
    );
    let (code, ext, _) = ogpd(&["tower", "build", "--stages", &stages]);
    assert_eq!(code, 0);
    let built = write(dir.path(), "t.json", &ext);
    let (code, v, _) = ogpd(&["tower", "eval", &built]);
    assert_eq!(code, 0);
    assert_eq!(v["cells"][0]["image"], "u1");
    assert_eq!(v["cells"][1]["image"], "id(u1)");

    let bad = write(
        dir.path(),
        "bad.json",
        &json!({"stages": [[{"n": 0, "target": "2", "f": "s1_0", "g": "t1_0"}]]}),
    );
    let (code, v, _) = ogpd(&["tower", "build", "--stages", &bad]);
    assert_eq!(code, 1);
    assert!(v["error"].as_str().unwrap().contains("dimension 2 > 1"));
}

#[test]
fn corpus_items_file() {
    let dir = tempfile::tempdir().unwrap();
    let items = write(
        dir.path(),
        "items.json",
        &json!([{"kind": "lemma-comp", "n": 2}, {"kind": "dim1", "width": 4}]),
    );
    let (code, v, _) = ogpd(&["corpus", "--items", &items]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["pass"], 2);
    let p = dir.path().join("corrupt.json");
    std::fs::write(&p, "[{\"kind\": \"lemma-comp\"").unwrap();
    let (code, _, _) = ogpd(&["corpus", "--items", &p.to_string_lossy()]);
    assert_eq!(code, 2);
    let (code, _, _) = ogpd(&["--closure-depth", "0", "corpus", "--items", &items]);
    assert_eq!(code, 4);
}
