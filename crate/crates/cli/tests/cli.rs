use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn tmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmd"))
        .args(args)
        .env_remove("TMD_THREADS")
        .output()
        .expect("run tmd")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = tmd(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok_stdout(args)).unwrap()
}

fn matrix_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn self_matrix_on_toy_dataset() {
    let csv = ok_stdout(&["dist", "--data", p(&fixture("toy.json")), "--depth", "2", "--weights", "constant:0.5"]);
    assert!(csv.starts_with("# config:"));
    let rows = matrix_rows(&csv);
    assert_eq!(rows.len(), 3);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 3);
        assert_eq!(r[i], 0.0);
        for j in 0..3 {
            assert_eq!(r[j], rows[j][i]);
        }
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let graphs: Vec<Value> = (0..12)
        .map(|i| {
            let n = 3 + i % 5;
            let features: Vec<Vec<f64>> = (0..n).map(|v| vec![((v * 7 + i) % 5) as f64 * 0.3]).collect();
            let edges: Vec<[usize; 2]> = (1..n).map(|v| [v - 1, v]).chain([[0, n - 1]]).collect();
            serde_json::json!({"features": features, "edges": edges})
        })
        .collect();
    let ds = dir.path().join("ds.json");
    std::fs::write(&ds, serde_json::json!({"name": "rings", "graphs": graphs}).to_string()).unwrap();
    let base = ["dist", "--data", p(&ds), "--depth", "3", "--weights", "constant:0.5"];
    let one = ok_stdout(&[&base[..], &["--threads", "1"]].concat());
    let eight = ok_stdout(&[&base[..], &["--threads", "8"]].concat());
    assert_eq!(one, eight);
    let from_env = Command::new(env!("CARGO_BIN_EXE_tmd")).args(base).env("TMD_THREADS", "8").output().unwrap();
    assert_eq!(String::from_utf8(from_env.stdout).unwrap(), one);
}

#[test]
fn mean_mode_at_depth_one_divides_by_size() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("eq.json");
    let g = |xs: [f64; 4]| serde_json::json!({"features": xs.map(|x| [x]), "edges": [[0, 1], [1, 2], [2, 3]]});
    let body = serde_json::json!({"name": "eq", "graphs": [g([0.0, 1.0, 2.0, 5.0]), g([1.5, -1.0, 0.25, 3.0])]});
    std::fs::write(&ds, body.to_string()).unwrap();
    let run = |mode| matrix_rows(&ok_stdout(&["dist", "--data", p(&ds), "--depth", "1", "--mode", mode]));
    let (sum, mean) = (run("sum"), run("mean"));
    assert!(sum[0][1] > 0.0);
    assert!((mean[0][1] - sum[0][1] / 4.0).abs() <= 1e-12 * sum[0][1]);
}

#[test]
fn wl_triangle_versus_path() {
    let v = json(&["wl", "--graph-a", p(&fixture("triangle.json")), "--graph-b", p(&fixture("path3.json"))]);
    assert_eq!(v["distinguishable"], true);
    assert_eq!(v["iteration"], 1);
    let v = json(&["wl", "--graph-a", p(&fixture("c3c3.json")), "--graph-b", p(&fixture("c6.json")), "--weights", "constant:1"]);
    assert_eq!(v["distinguishable"], false);
    assert_eq!(v["tmd"], 0.0);
}

#[test]
fn lipschitz_on_identical_graphs() {
    let g = fixture("c6.json");
    let v = json(&["lipschitz", "--graph-a", p(&g), "--graph-b", p(&g), "--seed", "3"]);
    assert_eq!(v["lhs"], 0.0);
    assert_eq!(v["rhs"], 0.0);
    assert_eq!(v["holds"], true);
    assert_eq!(v["config"]["depth"], 4);
}

#[test]
fn lipschitz_on_sampled_pairs() {
    let toy = fixture("toy.json");
    let args = ["lipschitz", "--data", p(&toy), "--pairs", "10", "--seed", "9", "--layers", "2"];
    let v = json(&args);
    assert_eq!(v["all_hold"], true);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 10);
    assert_eq!(ok_stdout(&args), ok_stdout(&args));
}

#[test]
fn shift_against_itself_is_zero() {
    let toy = fixture("toy.json");
    let v = json(&["shift", "--data", p(&toy), "--test", p(&toy), "--lipschitz", "2"]);
    assert_eq!(v["entries"][0]["w1"], 0.0);
    assert_eq!(v["entries"][0]["risk_gap"], 0.0);
    let v = json(&["shift", "--data", p(&toy), "--bins", "3", "--display-max", "1"]);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert!(entries[0]["w1"].as_f64().unwrap() <= entries[1]["w1"].as_f64().unwrap());
}

#[test]
fn gram_knn_and_cluster_consume_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let toy = fixture("toy.json");
    let m = dir.path().join("m.csv");
    ok_stdout(&["dist", "--data", p(&toy), "--out", p(&m)]);

    let k = matrix_rows(&ok_stdout(&["gram", "--matrix", p(&m), "--gamma", "0.5"]));
    let d = matrix_rows(&std::fs::read_to_string(&m).unwrap());
    for i in 0..3 {
        assert_eq!(k[i][i], 1.0);
        for j in 0..3 {
            assert!((k[i][j] - (-0.5 * d[i][j]).exp()).abs() < 1e-15);
        }
    }

    let v = json(&["knn", "--data", p(&toy), "--matrix", p(&m), "--k", "1"]);
    assert_eq!(v["protocol"], "leave-one-out");
    assert_eq!(v["predictions"].as_array().unwrap().len(), 3);

    let assign = dir.path().join("assign.csv");
    let args = ["cluster", "--data", p(&toy), "--matrix", p(&m), "--k", "2", "--seed", "4", "--assignments", p(&assign)];
    let first = ok_stdout(&args);
    let csv = std::fs::read_to_string(&assign).unwrap();
    assert_eq!(ok_stdout(&args), first);
    assert_eq!(std::fs::read_to_string(&assign).unwrap(), csv);
    assert!(csv.starts_with("graph_id,cluster_id\n"));
    assert_eq!(csv.lines().count(), 4);
    let v: Value = serde_json::from_str(&first).unwrap();
    assert!(v["nmi"].as_f64().is_some());
    assert!(v["completeness"].as_f64().is_some());
}

#[test]
fn perturb_reports_tight_fixtures_and_random_edits() {
    let edge = fixture("edge.json");
    let drop = json(&["perturb", "--graph", p(&edge), "--edit", r#"{"edit":"drop_node","node":1}"#]);
    assert_eq!(drop["edits"][0]["bound"], 3.0);
    assert_eq!(drop["edits"][0]["exact_tmd"], 3.0);
    let cut = json(&["perturb", "--graph", p(&edge), "--edit", r#"{"edit":"drop_edge","u":0,"v":1}"#]);
    assert_eq!(cut["edits"][0]["bound"], 2.0);
    assert_eq!(cut["edits"][0]["exact_tmd"], 2.0);

    let toy = fixture("toy.json");
    let args = ["perturb", "--data", p(&toy), "--index", "2", "--trials", "6", "--seed", "5", "--depth", "3"];
    let out = ok_stdout(&args);
    assert_eq!(out, ok_stdout(&args));
    let v: Value = serde_json::from_str(&out).unwrap();
    for e in v["edits"].as_array().unwrap() {
        assert!(e["exact_tmd"].as_f64().unwrap() <= e["bound"].as_f64().unwrap() + 1e-9);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(tmd(&["dist", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(tmd(&["dist", "--data", p(&fixture("toy.json")), "--mode", "median"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(tmd(&["dist", "--data", p(&bad)]).status.code(), Some(1));
    assert_eq!(tmd(&["dist", "--data", "/nonexistent/ds.json"]).status.code(), Some(2));
    assert_eq!(tmd(&["dist", "--data", "/nonexistent", "--name", "MUTAG"]).status.code(), Some(2));
    let toy = fixture("toy.json");
    assert_eq!(tmd(&["dist", "--data", p(&toy), "--depth", "6", "--weights", "pascal:3"]).status.code(), Some(3));
    assert_eq!(tmd(&["dist", "--data", p(&toy), "--depth", "0"]).status.code(), Some(3));
    assert_eq!(tmd(&["dist", "--data", p(&toy), "--threads", "0"]).status.code(), Some(3));
    assert_eq!(tmd(&["knn", "--data", p(&toy), "--k", "9"]).status.code(), Some(3));
    assert!(tmd(&["--help"]).status.success());
}
