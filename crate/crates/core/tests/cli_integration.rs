mod common;

use std::collections::HashMap;

use common::{data, run_cli, run_cli_env};
use proppkit::cli::{EXIT_ANALYTIC, EXIT_BACKEND, EXIT_INPUT, EXIT_OK};

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.txt", "他出手了。(ZZ)\n");
    assert_eq!(run_cli(&["parse", &bad, "--strict"]).code, EXIT_INPUT);
    assert_eq!(run_cli(&["parse", &bad]).code, EXIT_OK);

    let seqs = write(&dir, "s.seq", "A-B\nC-D\n");
    assert_eq!(run_cli(&["match", &seqs, "--pattern", "(A)->(Qq)"]).code, EXIT_INPUT);
    assert_eq!(run_cli(&["mine", &seqs, "--support", "1", "--max-alt", "1"]).code, EXIT_ANALYTIC);

    let corpus = data("passages.jsonl");
    let corpus = corpus.to_str().unwrap();
    let out = run_cli(&["eval", corpus, "--backend", "mock", "--mock-mode", "unavailable", "--rounds", "1", "--preds", "1"]);
    assert_eq!(out.code, EXIT_BACKEND, "{}", out.stderr);
    assert_eq!(run_cli(&["eval", corpus, "--rounds", "1", "--preds", "1"]).code, EXIT_OK);
}

#[test]
fn reports_are_reproducible() {
    let corpus = data("passages.jsonl");
    let args = ["--seed", "5", "eval", corpus.to_str().unwrap(), "--mock-mode", "noisy:0.3"];
    let a = run_cli(&args);
    let b = run_cli(&args);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.starts_with("# proppkit"));
    let mut json = vec!["-o", "json"];
    json.extend(args);
    let j: serde_json::Value = serde_json::from_str(&run_cli(&json).stdout).unwrap();
    assert!(j["provenance"].is_object());
    assert!(j["result"].is_object());
}

#[test]
fn stats_mean_on_fixed_total() {
    let dir = tempfile::tempdir().unwrap();
    // 33 rows of ten symbols plus one of two
    let mut body: String = (0..33).map(|_| "A-K-E-F-B-C-D-G-H-I\n").collect();
    body.push_str("J-L\n");
    let seqs = write(&dir, "p.seq", &body);
    let out = run_cli(&["stats", &seqs]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("total: 332"));
    assert!(out.stdout.contains("mean: 9.76"));
    let csv = run_cli(&["-o", "csv", "stats", &seqs]);
    assert!(csv.stdout.lines().any(|l| l == "A,33,common"));
    assert!(csv.stdout.lines().any(|l| l == "J,1,rare"));
}

#[test]
fn empty_corpus_warns() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(&dir, "empty.txt", "没有标记的一段文字。\n");
    let out = run_cli(&["stats", &empty]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stderr.contains("no annotations"));
}

#[test]
fn mining_and_matching_builtin_plots() {
    let battle = data("plots/battle.seq");
    let out = run_cli(&["mine", battle.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("(A)->(K)->(Q)->{O/S}"));
    let out = run_cli(&["match", battle.to_str().unwrap(), "--pattern", "battle"]);
    assert!(out.stdout.contains("40/60"));
}

#[test]
fn api_key_never_printed() {
    let env = HashMap::from([("NARR_API_KEY".to_string(), "sk-secret-123".to_string())]);
    let out = run_cli_env(&["-o", "json", "registry"], &env);
    assert_eq!(out.code, EXIT_OK);
    assert!(!out.stdout.contains("sk-secret-123"));
    assert!(out.stdout.contains("api_key_set"));
}

#[test]
fn homog_from_sequences() {
    let seqs = data("continuations/doubao_pro.seq");
    let out = run_cli(&["homog", seqs.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("0.914"), "{}", out.stdout);
}
