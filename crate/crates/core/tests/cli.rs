mod common;

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use metreal::graph::WeightedGraph;
use metreal::metric::{parse_matrix, MatrixFormat};
use serde_json::Value;

use common::*;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn metreal(args: &[&str], stdin: &str) -> Out {
    let mut child = Command::new(env!("CARGO_BIN_EXE_metreal"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    Out {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn golden_summary_from_file() {
    let path = scratch("six.csv", &genus_one_six().to_csv());
    let out = metreal(&["realize", path.to_str().unwrap()], "");
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "status=genus1 total_weight=12 cycle=[6,11,9,13]\n");
}

#[test]
fn stdin_and_file_agree() {
    let csv = genus_one_nine().to_csv();
    let path = scratch("nine.csv", &csv);
    let a = metreal(&["realize", "--output", "json"], &csv);
    let b = metreal(&["realize", "--output", "json", path.to_str().unwrap()], "");
    let c = metreal(&["realize", "--output", "json", "-"], &csv);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn json_input() {
    let d = genus_one_six();
    let out = metreal(&["realize", "--input-format", "json"], &d.to_json());
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.starts_with("status=genus1 total_weight=12"));
}

#[test]
fn asymmetric_input_is_an_error() {
    let out = metreal(&["realize"], "0,1,2\n2,0,1\n2,1,0\n");
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("Asymmetric(1,2)"), "{}", out.stderr);
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(metreal(&["realize", "--output", "pdf"], "").code, 1);
    assert_eq!(metreal(&["nonsense"], "").code, 1);
    assert_eq!(metreal(&["realize", "/no/such/file.csv"], "").code, 1);
}

#[test]
fn repeated_runs_are_identical() {
    let csv = genus_one_nine().to_csv();
    let args = ["realize", "--output", "json", "--trace"];
    let first = metreal(&args, &csv).stdout;
    for _ in 0..3 {
        assert_eq!(metreal(&args, &csv).stdout, first);
    }
}

fn a_vectors(doc: &Value) -> Vec<Vec<String>> {
    doc["trace"]["iterations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|it| it["a"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect())
        .collect()
}

#[test]
fn json_trace_records_each_iteration() {
    let out = metreal(&["realize", "--output", "json", "--trace"], &genus_one_six().to_csv());
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["status"], "genus1");
    assert_eq!(doc["verified"], true);
    assert_eq!(doc["total_weight"], "12");
    assert_eq!(doc["trace"]["trace_version"], 1);
    assert_eq!(
        a_vectors(&doc),
        vec![vec!["1", "1", "3/2", "1", "2", "0"], vec!["2", "0", "1/2", "0"]]
    );
    assert_eq!(doc["trace"]["terminal"]["kind"], "cycle");

    let out = metreal(&["realize", "--output", "json", "--trace"], &genus_one_nine().to_csv());
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(
        a_vectors(&doc),
        vec![vec!["1"; 9], vec!["1", "0", "1", "0", "0"]]
    );
    assert_eq!(doc["trace"]["iterations"][0]["groups"], serde_json::json!([[1, 3, 7, 8], [4, 6]]));
}

#[test]
fn text_trace() {
    let out = metreal(&["realize", "--trace"], &genus_one_six().to_csv());
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "status=genus1 total_weight=12 cycle=[6,11,9,13]");
    assert_eq!(lines[1], "t=0 labels=[1,2,3,4,5,6] a=(1,1,3/2,1,2,0)");
    assert_eq!(lines[2], "  S=[{1,2},{4,5}] S'=[3,6]");
    assert!(lines.last().unwrap().starts_with("terminal=cycle labels=[11,12,13,14]"));
}

#[test]
fn json_output_round_trips_as_a_graph() {
    let out = metreal(&["realize", "--output", "json"], &genus_one_six().to_csv());
    let g = WeightedGraph::from_json(&out.stdout).unwrap();
    assert_eq!(g.edge_count(), 11);
    assert_eq!(g.cyclomatic(), 1);
}

#[test]
fn dot_output() {
    let out = metreal(&["realize", "--output", "dot"], &genus_one_six().to_csv());
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("graph"));
    assert_eq!(out.stdout.matches(" -- ").count(), 11);
}

#[test]
fn graphml_output() {
    let out = metreal(&["realize", "--output", "graphml"], &genus_one_six().to_csv());
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("<graphml"));
    assert_eq!(out.stdout.matches("<edge ").count(), 11);
    assert_eq!(out.stdout.matches("<node ").count(), 11);
}

#[test]
fn unrealizable_exits_two() {
    // K_{2,3} with unit edges
    let csv = "0,2,1,1,1\n2,0,1,1,1\n1,1,0,2,2\n1,1,2,0,2\n1,1,2,2,0\n";
    let out = metreal(&["realize"], csv);
    assert_eq!(out.code, 2);
    assert!(out.stdout.starts_with("status=unrealizable"));
    assert!(out.stderr.contains("not realizable by this algorithm's criteria"));
}

#[test]
fn check_cycle_exit_codes() {
    let csv = hexagon().to_csv();
    let ok = metreal(&["check-cycle", "--order", "1,4,5,3,2,6"], &csv);
    assert_eq!(ok.code, 0);
    assert_eq!(ok.stdout, "valid order=(1,4,5,3,2,6) weights=(1,2,1,2,1,2) optimal=true total_weight=9\n");

    let bad = metreal(&["check-cycle", "--order", "1,2,3,4,5,6"], &csv);
    assert_eq!(bad.code, 2);
    assert!(bad.stdout.starts_with("invalid order=(1,2,3,4,5,6)"));

    let searched = metreal(&["check-cycle"], &csv);
    assert_eq!(searched.code, 0);
    assert!(searched.stdout.starts_with("valid order=(1,4,5,3,2,6)"));
}

#[test]
fn tropical_exit_codes() {
    let csv = hexagon().to_csv();
    let zero = metreal(&["tropical", "--order", "1,4,5,3,2,6"], &csv);
    assert_eq!(zero.code, 0);
    assert!(zero.stdout.ends_with("tropical_zero=true\n"));
    let nonzero = metreal(&["tropical", "--order", "1,2,3,4,5,6"], &csv);
    assert_eq!(nonzero.code, 2);
    assert!(nonzero.stdout.ends_with("tropical_zero=false\n"));
}

#[test]
fn compact_prints_the_vector() {
    let out = metreal(&["compact"], &genus_one_six().to_csv());
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("(1,1,3/2,1,2,0)"));
}

#[test]
fn generated_instances_feed_back_in() {
    let args = ["gen", "--kind", "genus1", "--n", "8", "--seed", "5", "--cycle-len", "6"];
    let out = metreal(&args, "");
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(metreal(&args, "").stdout, out.stdout);
    let (graph, matrix) = out.stdout.split_once("\n\n").unwrap();
    let g = WeightedGraph::from_json(graph).unwrap();
    let d = parse_matrix(matrix, MatrixFormat::Csv).unwrap();
    assert_eq!(d.order(), 8);
    assert_eq!(g.cyclomatic(), 1);

    let r = metreal(&["realize"], matrix);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("status=genus1"));

    let json = metreal(&["gen", "--kind", "tree", "--n", "6", "--output", "json"], "");
    let doc: Value = serde_json::from_str(&json.stdout).unwrap();
    assert!(doc["graph"]["edges"].is_array());
    assert_eq!(doc["matrix"]["labels"].as_array().unwrap().len(), 6);

    let infeasible = metreal(&["gen", "--kind", "genus1", "--n", "6", "--cycle-len", "3"], "");
    assert_eq!(infeasible.code, 1);
}
