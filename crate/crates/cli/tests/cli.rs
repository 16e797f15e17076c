//! End-to-end tests of the `queryseg` binary: exit codes, JSON reports and
//! pipeline determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_queryseg"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

const TRAIN: &str = "airforce B-product_name\n1 I-product_name\nwomen B-department\nshoes B-core_product_type\nwhite B-color\n\nnike B-creator\nrunning B-modifier\nshoes B-core_product_type\ngreen B-color\n\nred B-color\nmug B-core_product_type\n\n";

#[test]
fn score_of_identical_corpora_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.conll"), TRAIN).unwrap();
    let output = run(
        &["score", "--pred", "g.conll", "--gold", "g.conll"],
        dir.path(),
    );
    let json = stdout_json(&output);
    assert_eq!(json["micro"]["f1"], 100.0);
    assert_eq!(json["micro"]["precision"], 100.0);
    assert_eq!(json["token_accuracy"], 100.0);
}

#[test]
fn score_aggregates_multiple_runs_and_compares_baselines() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("gold.conll"), TRAIN).unwrap();
    fs::write(dir.path().join("p1.conll"), TRAIN).unwrap();
    fs::write(dir.path().join("p2.conll"), TRAIN).unwrap();
    // A weaker baseline: everything outside.
    let all_outside = TRAIN
        .lines()
        .map(|line| {
            if line.is_empty() {
                String::new()
            } else {
                format!("{} O", line.split_whitespace().next().unwrap())
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    fs::write(dir.path().join("b1.conll"), &all_outside).unwrap();
    fs::write(dir.path().join("b2.conll"), &all_outside).unwrap();

    let output = run(
        &[
            "score",
            "--pred", "p1.conll",
            "--pred", "p2.conll",
            "--gold", "gold.conll",
            "--baseline", "b1.conll",
            "--baseline", "b2.conll",
        ],
        dir.path(),
    );
    let json = stdout_json(&output);
    assert_eq!(json["runs"].as_array().unwrap().len(), 2);
    let aggregate = json["aggregate"].as_array().unwrap();
    let f1 = aggregate.iter().find(|s| s["metric"] == "f1").unwrap();
    assert_eq!(f1["mean"], 100.0);
    assert_eq!(f1["stddev"], 0.0);
    assert!(json["rank_sum_p_value_f1"].is_number());
}

#[test]
fn validate_reports_violations_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.conll"), "x I-color\n\n").unwrap();
    let output = run(&["validate", "--in", "bad.conll"], dir.path());
    let json = stdout_json(&output);
    assert_eq!(json["count"], 1);
    assert_eq!(json["violations"][0]["position"], 0);

    let strict = run(&["validate", "--in", "bad.conll", "--strict"], dir.path());
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn repair_then_validate_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.conll"), "x I-color\ny I-shape\n\n").unwrap();
    let output = run(
        &["repair", "--in", "bad.conll", "--out", "fixed.conll"],
        dir.path(),
    );
    assert_eq!(stdout_json(&output)["repaired_labels"], 2);
    let check = run(
        &["validate", "--in", "fixed.conll", "--strict"],
        dir.path(),
    );
    assert_eq!(stdout_json(&check)["count"], 0);
}

#[test]
fn augment_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("train.conll"), TRAIN).unwrap();
    let lexicon = run(
        &["lexicon", "--in", "train.conll", "--out", "lex.jsonl"],
        dir.path(),
    );
    assert!(lexicon.status.success());
    for out in ["a.conll", "b.conll"] {
        let output = run(
            &[
                "augment",
                "--in", "train.conll",
                "--transform", "all",
                "--seed", "7",
                "--lexicon", "lex.jsonl",
                "--out", out,
                "--log", &format!("{out}.log.jsonl"),
            ],
            dir.path(),
        );
        assert!(output.status.success());
    }
    let a = fs::read(dir.path().join("a.conll")).unwrap();
    let b = fs::read(dir.path().join("b.conll")).unwrap();
    assert_eq!(a, b);
    let log_a = fs::read(dir.path().join("a.conll.log.jsonl")).unwrap();
    let log_b = fs::read(dir.path().join("b.conll.log.jsonl")).unwrap();
    assert_eq!(log_a, log_b);
}

#[test]
fn relax_index_simulate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("train.conll"), TRAIN).unwrap();
    let relax = run(
        &[
            "relax",
            "--in", "train.conll",
            "--seed", "3",
            "--out", "variants.jsonl",
        ],
        dir.path(),
    );
    let relax_json = stdout_json(&relax);
    assert!(relax_json["variants"].as_u64().unwrap() >= 4);

    fs::write(
        dir.path().join("titles.tsv"),
        "p1\tairforce 1 women shoes white\np2\tnike running shoes green\np3\tred ceramic mug\n",
    )
    .unwrap();
    let index = run(
        &["index", "--titles", "titles.tsv", "--out", "index.jsonl"],
        dir.path(),
    );
    assert_eq!(stdout_json(&index)["items"], 3);

    fs::write(
        dir.path().join("queries.tsv"),
        "0\tairforce 1 women shoes white\n1\tnike running shoes green\n2\tred mug\n",
    )
    .unwrap();
    let simulate = run(
        &[
            "simulate",
            "--index", "index.jsonl",
            "--queries", "queries.tsv",
            "--variants", "variants.jsonl",
            "--out", "bins.csv",
        ],
        dir.path(),
    );
    let json = stdout_json(&simulate);
    assert_eq!(json["originals"], 3);
    let csv = fs::read_to_string(dir.path().join("bins.csv")).unwrap();
    assert!(csv.starts_with("metric,bin_low,bin_high,count\n"));
    assert_eq!(csv.lines().count(), 1 + 14);
}

#[test]
fn adjudicate_merges_majority_and_exports_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a1.conll"), "red B-color\nmug B-core_product_type\n\n").unwrap();
    fs::write(dir.path().join("a2.conll"), "red B-color\nmug B-core_product_type\n\n").unwrap();
    fs::write(dir.path().join("a3.conll"), "red B-shape\nmug B-core_product_type\n\n").unwrap();
    let output = run(
        &[
            "adjudicate",
            "--in", "a1.conll",
            "--in", "a2.conll",
            "--in", "a3.conll",
            "--out", "gold.conll",
            "--conflicts", "conflicts.csv",
        ],
        dir.path(),
    );
    let json = stdout_json(&output);
    assert_eq!(json["conflicts"], 1);
    let gold = fs::read_to_string(dir.path().join("gold.conll")).unwrap();
    assert!(gold.contains("red B-color"));
    let conflicts = fs::read_to_string(dir.path().join("conflicts.csv")).unwrap();
    assert!(conflicts.contains("color|color|shape"));
}

#[test]
fn ingest_materializes_offsets() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("off.tsv"), "q1\t0\t3\tB-color\nq1\t4\t7\tB-core_product_type\n")
        .unwrap();
    fs::write(dir.path().join("raw.tsv"), "q1\tred mug\n").unwrap();
    let output = run(
        &[
            "ingest",
            "--offsets", "off.tsv",
            "--raw", "raw.tsv",
            "--out", "corpus.conll",
        ],
        dir.path(),
    );
    assert_eq!(stdout_json(&output)["queries"], 1);
    let conll = fs::read_to_string(dir.path().join("corpus.conll")).unwrap();
    assert_eq!(conll, "# id: q1\nred B-color\nmug B-core_product_type\n\n");
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    // Usage error: unknown subcommand.
    let usage = run(&["frobnicate"], dir.path());
    assert_eq!(usage.status.code(), Some(2));
    // Usage error: missing required flag.
    let missing = run(&["augment", "--in", "x.conll"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
    // Domain error: nonexistent input file.
    let domain = run(&["validate", "--in", "nope.conll"], dir.path());
    assert_eq!(domain.status.code(), Some(1));
    assert!(!domain.stderr.is_empty());
    // Domain error: unknown type, with file and line context on stderr.
    fs::write(dir.path().join("bad.conll"), "x B-foo\n\n").unwrap();
    let parse = run(&["validate", "--in", "bad.conll"], dir.path());
    assert_eq!(parse.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&parse.stderr);
    assert!(stderr.contains("bad.conll"), "stderr: {stderr}");
    assert!(stderr.contains("line 1"), "stderr: {stderr}");
}

#[test]
fn custom_ontology_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ont.txt"), "gadget\n").unwrap();
    fs::write(dir.path().join("c.conll"), "x B-gadget\n\n").unwrap();
    let ok = run(
        &["validate", "--in", "c.conll", "--ontology", "ont.txt"],
        dir.path(),
    );
    assert_eq!(stdout_json(&ok)["count"], 0);
    // The same file fails against the default ontology.
    let bad = run(&["validate", "--in", "c.conll"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
}
