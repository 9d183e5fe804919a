use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn aot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aot")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn measure(atoms: &[(f64, [f64; 2])]) -> Value {
    let atoms: Vec<Value> = atoms.iter().map(|(w, p)| json!({ "w": w, "path": [[p[0]], [p[1]]] })).collect();
    json!({ "d": 1, "T": 2, "atoms": atoms })
}

fn samples(points: &[[f64; 2]]) -> Value {
    let s: Vec<Value> = points.iter().map(|p| json!([[p[0]], [p[1]]])).collect();
    json!({ "d": 1, "T": 2, "samples": s })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_reports_each_check() {
    let out = aot(&["verify", "--json"]);
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 24);
    let failing: Vec<&str> = rows
        .iter()
        .filter(|r| !r["passed"].as_bool().unwrap())
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    // exit code 0 exactly when every row passes
    assert_eq!(code(&out), if failing.is_empty() { 0 } else { 1 });
    assert!(failing.iter().all(|n| *n == "heavy-conditional AV1"), "{failing:?}");
}

#[test]
fn verify_negative_control() {
    let out = aot(&["verify", "--json", "--eps", "0.1", "--offset", "1e-6"]);
    assert_eq!(code(&out), 1);
    assert!(stdout_json(&out).as_array().unwrap().iter().all(|r| !r["passed"].as_bool().unwrap()));
}

#[test]
fn dist_on_split_pair() {
    let dir = tempfile::tempdir().unwrap();
    let mu = write(dir.path(), "mu.json", &measure(&[(0.5, [0.0, 1.0]), (0.5, [0.0, -1.0])]));
    let nu = write(dir.path(), "nu.json", &measure(&[(0.5, [0.1, 1.0]), (0.5, [-0.1, -1.0])]));
    let value = |a: &Path, b: &Path, metric: &str| {
        let out = aot(&["dist", s(a), s(b), "--metric", metric, "--json"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        stdout_json(&out)["value"].as_f64().unwrap()
    };
    assert!((value(&mu, &nu, "aw1") - 1.1).abs() < 1e-9);
    assert!(value(&mu, &nu, "w1") <= value(&mu, &nu, "aw1") + 1e-12);
    for metric in ["w1", "tv", "tv1", "av1", "aw1"] {
        assert_eq!(value(&mu, &mu, metric), 0.0, "{metric}");
    }
    let coupling = dir.path().join("coupling.json");
    let out = aot(&["dist", s(&mu), s(&nu), "--metric", "aw1", "--coupling", s(&coupling)]);
    assert_eq!(code(&out), 0);
    let c: Value = serde_json::from_str(&std::fs::read_to_string(&coupling).unwrap()).unwrap();
    let mass: f64 = c["entries"].as_array().unwrap().iter().map(|e| e["mass"].as_f64().unwrap()).sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn dist_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let mu = write(dir.path(), "mu.json", &measure(&[(1.0, [0.0, 1.0])]));
    let one_stage = write(dir.path(), "one.json", &json!({ "d": 1, "T": 1, "atoms": [{ "w": 1.0, "path": [[0.0]] }] }));
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ \"d\": 1,").unwrap();
    assert_eq!(code(&aot(&["dist", s(&mu), s(&one_stage), "--metric", "w1"])), 2);
    assert_eq!(code(&aot(&["dist", s(&mu), s(&broken), "--metric", "w1"])), 2);
    assert_eq!(code(&aot(&["dist", s(&mu), s(&mu), "--metric", "av1", "--coupling", "x.json"])), 2);
}

#[test]
fn estimate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let four = write(dir.path(), "four.json", &samples(&[[0.1, 0.2], [0.3, -0.7], [1.2, 0.05], [-0.4, 0.9]]));
    let out_a = dir.path().join("a.json");
    let o = aot(&["estimate", "--samples", s(&four), "--kind", "AEmp", "--delta", "0.5", "--seed", "1", "--out", s(&out_a)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["G"], 2);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&out_a).unwrap()).unwrap();
    for atom in m["atoms"].as_array().unwrap() {
        for stage in atom["path"].as_array().unwrap() {
            let x = stage[0].as_f64().unwrap();
            // midpoints of a grid with G = 2 are odd multiples of 1/4
            assert_eq!((4.0 * x).rem_euclid(2.0), 1.0, "{x}");
        }
    }

    // a tight cluster on a coarse grid
    let cluster: Vec<[f64; 2]> = (0..30).map(|k| [0.01 * k as f64, 0.3 - 0.01 * k as f64]).collect();
    let cluster = write(dir.path(), "cluster.json", &samples(&cluster));
    let atoms = |kind: &str, m: &str, target: &Path| {
        let o = aot(&[
            "estimate", "--samples", s(&cluster), "--kind", kind, "--m", m, "--sigma", "0.5", "--delta", "0.5", "--seed", "3",
            "--out", s(target),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        stdout_json(&o)["atoms"].as_u64().unwrap()
    };
    let a = atoms("AEmp", "1", &dir.path().join("c_a.json"));
    let first = dir.path().join("c_as1.json");
    let second = dir.path().join("c_as2.json");
    assert!(atoms("ASEmp", "5", &first) > a);
    atoms("ASEmp", "5", &second);
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn estimate_rejects_duplicate_translations() {
    let dir = tempfile::tempdir().unwrap();
    let four = write(dir.path(), "four.json", &samples(&[[0.1, 0.2], [0.3, -0.7]]));
    let spec = write(
        dir.path(),
        "spec.json",
        &json!({
            "kind": "ASEmp", "m": 2,
            "sigma": { "rule": "fixed", "value": 0.1 },
            "delta": { "rule": "fixed", "value": 0.5 },
            "zeta": { "scheme": "explicit", "vectors": [[0.1, 0.1], [0.1, 0.1]] }
        }),
    );
    let o = aot(&["estimate", "--samples", s(&four), "--spec", s(&spec), "--seed", "1", "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(code(&o), 2);
}

fn small_config(dir: &Path) -> PathBuf {
    write(
        dir,
        "cfg.json",
        &json!({
            "model": { "mixture": {
                "d": 1, "T": 2,
                "components": [
                    { "w": 0.5, "center": [-1.0, -1.0], "scale": 0.1 },
                    { "w": 0.5, "center": [1.0, 1.0], "scale": 0.1 }
                ]
            }},
            "estimator": { "kind": "AS1Emp" },
            "n_schedule": { "list": [32, 64] },
            "trials": 1,
            "seed": 0,
            "reference_resolution": 65536
        }),
    )
}

#[test]
fn converge_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = aot(&["converge", s(&cfg), "--seed", "17", "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(out.join("trials.csv")).unwrap(), std::fs::read(out.join("report.json")).unwrap())
    };
    let (csv, report) = run("one");
    assert_eq!((csv.clone(), report), run("two"));
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("estimator,N,trial,seed,distance,"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn converge_rejects_malformed_config() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"model\": ").unwrap();
    assert_eq!(code(&aot(&["converge", s(&bad), "--seed", "1"])), 2);
    let missing = write(dir.path(), "missing.json", &json!({ "trials": 3 }));
    assert_eq!(code(&aot(&["converge", s(&missing), "--seed", "1"])), 2);
    // no seed given
    assert_eq!(code(&aot(&["converge", s(&small_config(dir.path()))])), 2);
}

#[test]
fn oracle_check_passes() {
    let o = aot(&["oracle-check", "--seed", "7", "--count", "100"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["passed"], true);
}
