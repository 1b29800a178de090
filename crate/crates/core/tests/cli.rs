use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn subjects() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("subjects")
}

fn optinfer(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optinfer"))
        .args(args)
        .env("OPTINFER_CACHE_DIR", cache)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn infer_prints_seed_and_six_interactions() {
    let tmp = tempfile::tempdir().unwrap();
    let fig1 = subjects().join("fig1.subject");
    let out = optinfer(
        &["infer", path(&fig1), "--seed", "7", "--format", "json"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("seed: 7"));
    let doc = json(&out);
    assert_eq!(doc["seed"], 7);
    let keys: Vec<&String> = doc["interactions"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["L0", "L1", "L2", "L3", "L4", "L5"]);
}

#[test]
fn generated_seed_is_printed_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let fig1 = subjects().join("fig1.subject");
    let first = optinfer(&["infer", path(&fig1)], tmp.path());
    let err = stderr(&first);
    let seed = err
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .expect("seed line");
    let second = optinfer(&["infer", path(&fig1), "--seed", seed], tmp.path());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn empty_subject_gives_empty_map() {
    let tmp = tempfile::tempdir().unwrap();
    let out = optinfer(
        &["infer", path(&subjects().join("empty.subject"))],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["interactions"], serde_json::json!({}));
}

#[test]
fn repeats_report_medians() {
    let tmp = tempfile::tempdir().unwrap();
    let fig1 = subjects().join("fig1.subject");
    let out = optinfer(
        &["infer", path(&fig1), "--repeats", "21", "--seed", "0"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["repeats"], 21);
    assert_eq!(doc["runs"].as_array().unwrap().len(), 21);
    let used: Vec<f64> = doc["runs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["configs_used"].as_f64().unwrap())
        .collect();
    let mut sorted = used.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(doc["configs_used"]["median"].as_f64().unwrap(), sorted[10]);
    assert_eq!(doc["locations"]["median"].as_f64().unwrap(), 6.0);
}

#[test]
fn repeats_must_be_positive() {
    let tmp = tempfile::tempdir().unwrap();
    let fig1 = subjects().join("fig1.subject");
    let out = optinfer(&["infer", path(&fig1), "--repeats", "0"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_outcomes() {
    let tmp = tempfile::tempdir().unwrap();
    let fig1 = subjects().join("fig1.subject");
    let inferred = tmp.path().join("inferred.json");
    let exact = tmp.path().join("exact.json");
    assert!(optinfer(
        &["infer", path(&fig1), "--seed", "3", "-o", path(&inferred)],
        tmp.path()
    )
    .status
    .success());
    assert!(
        optinfer(&["exhaustive", path(&fig1), "-o", path(&exact)], tmp.path())
            .status
            .success()
    );

    let selfcmp = json(&optinfer(
        &["compare", path(&inferred), path(&inferred)],
        tmp.path(),
    ));
    assert_eq!(selfcmp["f_score"], 1.0);
    assert_eq!(selfcmp["delta_cov"], 0);

    let vs_exact = json(&optinfer(
        &["compare", path(&inferred), path(&exact)],
        tmp.path(),
    ));
    assert_eq!(vs_exact["f_score"], 1.0);

    let broken = tmp.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"seed\": 1,\n  \"iterations\": oops\n}").unwrap();
    let out = optinfer(&["compare", path(&broken), path(&exact)], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let other = tmp.path().join("other.json");
    let empty = subjects().join("empty.subject");
    assert!(optinfer(
        &["exhaustive", path(&empty), "-o", path(&other)],
        tmp.path()
    )
    .status
    .success());
    let out = optinfer(&["compare", path(&other), path(&exact)], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("different spaces"));
}

#[test]
fn demo_narrative() {
    let tmp = tempfile::tempdir().unwrap();
    let a = optinfer(&["demo", "--seed", "3"], tmp.path());
    let b = optinfer(&["demo", "--seed", "5"], tmp.path());
    assert_eq!(a.status.code(), Some(0));
    let (a, b) = (stdout(&a), stdout(&b));
    assert!(a.contains("L1: x ∧ y ∧ z∈{0,3,4}"), "{a}");
    assert!(a.contains("f-score: 1.000"));
    let finals = |s: &str| -> String {
        let start = s.find("Final interactions").unwrap();
        let body = &s[start..];
        body[body.find('\n').unwrap()..body.find("\n\n").unwrap()].to_string()
    };
    assert_eq!(finals(&a), finals(&b));
    let header = |s: &str| {
        s.lines()
            .find(|l| l.starts_with("Final interactions"))
            .unwrap()
            .to_string()
    };
    assert_ne!(header(&a), header(&b));
}

#[test]
fn mincover_and_histogram() {
    let tmp = tempfile::tempdir().unwrap();
    let fig1 = subjects().join("fig1.subject");
    let inferred = tmp.path().join("inferred.json");
    assert!(optinfer(
        &["infer", path(&fig1), "--seed", "3", "-o", path(&inferred)],
        tmp.path()
    )
    .status
    .success());

    let cover = json(&optinfer(
        &["mincover", path(&inferred), "--seed", "1"],
        tmp.path(),
    ));
    assert_eq!(cover["configs"].as_array().unwrap().len(), 2);
    assert_eq!(cover["covered"].as_array().unwrap().len(), 6);

    let csv = stdout(&optinfer(
        &[
            "mincover",
            path(&inferred),
            "--seed",
            "1",
            "--format",
            "csv",
        ],
        tmp.path(),
    ));
    assert!(csv.starts_with("s,t,u,v,x,y,z\n"));
    assert_eq!(csv.lines().count(), 3);

    let hist = stdout(&optinfer(
        &["histogram", path(&inferred), "--format", "csv"],
        tmp.path(),
    ));
    assert!(
        hist.starts_with("length,interactions,locations\n0,1,1\n"),
        "{hist}"
    );
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let fig1 = subjects().join("fig1.subject");

    let missing = optinfer(
        &["infer", path(&tmp.path().join("nope.subject"))],
        tmp.path(),
    );
    assert_eq!(missing.status.code(), Some(2));

    let bad = tmp.path().join("bad.subject");
    std::fs::write(&bad, r#"{"name":"b","space":{"options":[{"name":"a","values":["0","1"]}]},"locations":[{"id":"L","guard":"q"}]}"#).unwrap();
    let out = optinfer(&["infer", path(&bad)], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains('q'), "{}", stderr(&out));

    let wrong_format = optinfer(&["infer", path(&fig1), "--format", "csv"], tmp.path());
    assert_eq!(wrong_format.status.code(), Some(2));

    let silent = tmp.path().join("silent.runner");
    std::fs::write(
        &silent,
        r#"{"space":{"options":[{"name":"a","values":["0","1"]}]},"render":{"a":{"0":[],"1":["-a"]}},
            "tests":["true {OPTS}"],"coverage_sink":"cov-{HASH}.txt","timeout_sec":5}"#,
    )
    .unwrap();
    let out = optinfer(&["infer", path(&silent), "--seed", "1"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("coverage sink"), "{}", stderr(&out));
}

#[test]
fn runner_cache_lives_in_cache_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let prog = subjects().join("prog/prog.runner");
    let out = optinfer(&["exhaustive", path(&prog), "--jobs", "4"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let cache = std::fs::read_to_string(tmp.path().join("prog.jsonl")).unwrap();
    assert_eq!(cache.lines().count(), 36);
    let doc = json(&out);
    assert_eq!(
        doc["interactions"]["slow.c:7"],
        "mode in {slow} && level in {1,2}"
    );
}

#[test]
fn trajectory_csv_is_written() {
    let tmp = tempfile::tempdir().unwrap();
    let fig1 = subjects().join("fig1.subject");
    let exact = tmp.path().join("exact.json");
    let csv = tmp.path().join("traj.csv");
    assert!(
        optinfer(&["exhaustive", path(&fig1), "-o", path(&exact)], tmp.path())
            .status
            .success()
    );
    let out = optinfer(
        &[
            "infer",
            path(&fig1),
            "--seed",
            "3",
            "--exact",
            path(&exact),
            "--trajectory",
            path(&csv),
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("iteration,normalized_x,f_score\n"));
    assert!(text.trim_end().ends_with(",1.000000,1.000000"), "{text}");
}
