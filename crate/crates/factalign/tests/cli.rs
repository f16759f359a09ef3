mod common;

use std::path::Path;
use std::process::{Command, Output};

fn factalign(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_factalign"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn full_run(workers: &str) -> std::collections::BTreeMap<String, Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    common::copy_fixture(dir.path());
    ok(&factalign(dir.path(), &["run", "--config", "config.toml", "--workers", workers]));
    ok(&factalign(dir.path(), &["build-distant", "--config", "config.toml", "--workers", workers]));
    common::snapshot(&dir.path().join("out"))
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let one = full_run("1");
    let again = full_run("1");
    let four = full_run("4");
    assert_eq!(one, again);
    assert_eq!(one, four);
    for name in [
        "sentences.en.jsonl",
        "sentences.hi.jsonl",
        "rejected.en.jsonl",
        "facts.jsonl",
        "candidates.en.jsonl",
        "candidates.hi.jsonl",
        "aligned.en.jsonl",
        "aligned.hi.jsonl",
        "manifest.stage2.json",
        "distant/train.jsonl",
        "distant/validation.jsonl",
        "distant/manifest.json",
    ] {
        assert!(one.contains_key(name), "{name} missing");
    }
    assert!(!one.keys().any(|k| k.starts_with("errors.")));
}

#[test]
fn missing_config_or_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = factalign(dir.path(), &["ingest", "--config", "nope.toml"]);
    assert_eq!(out.status.code(), Some(2));
    common::copy_fixture(dir.path());
    std::fs::remove_file(dir.path().join("hiwiki.xml")).unwrap();
    let out = factalign(dir.path(), &["ingest", "--config", "config.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let out = factalign(dir.path(), &["stage1", "--config", "config.toml"]);
    assert_eq!(out.status.code(), Some(2), "stage1 before extract-facts");
    let out = factalign(dir.path(), &["ingest", "--config", "config.toml", "--weights", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_entity_is_logged_and_skipped() {
    let dir = tempfile::tempdir().unwrap();
    common::copy_fixture(dir.path());
    let path = dir.path().join("entities.jsonl");
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str(concat!(
        r#"{"id":"Q1099","sitelinks":{"enwiki":{"title":"Nobody"}},"#,
        r#""claims":{"P569":[{"mainsnak":{"snaktype":"value","datatype":"time","datavalue":{"value":{"time":"+2000"}}}}]}}"#,
        "\n"
    ));
    std::fs::write(&path, text).unwrap();
    let out = factalign(dir.path(), &["extract-facts", "--config", "config.toml"]);
    assert_eq!(out.status.code(), Some(1));
    let errors = std::fs::read_to_string(dir.path().join("out/errors.extract-facts.jsonl")).unwrap();
    assert_eq!(errors.lines().count(), 1);
    assert!(errors.contains("Q1099"), "{errors}");
    let facts = std::fs::read_to_string(dir.path().join("out/facts.jsonl")).unwrap();
    assert_eq!(facts.lines().count(), 59);
}

#[test]
fn seed_changes_only_sampled_parts() {
    let dir = tempfile::tempdir().unwrap();
    common::copy_fixture(dir.path());
    ok(&factalign(dir.path(), &["run", "--config", "config.toml"]));
    let read = |name: &str| std::fs::read_to_string(dir.path().join("out/distant").join(name)).unwrap();
    ok(&factalign(dir.path(), &["build-distant", "--config", "config.toml", "--seed", "1"]));
    let (t1, v1) = (read("train.jsonl"), read("validation.jsonl"));
    ok(&factalign(dir.path(), &["build-distant", "--config", "config.toml", "--seed", "1"]));
    assert_eq!((read("train.jsonl"), read("validation.jsonl")), (t1.clone(), v1.clone()));
    ok(&factalign(dir.path(), &["build-distant", "--config", "config.toml", "--seed", "2"]));
    let (t2, v2) = (read("train.jsonl"), read("validation.jsonl"));
    let positives = |t: &str, v: &str| {
        let mut p: Vec<String> = t.lines().chain(v.lines()).filter(|l| l.contains("\"positive\"")).map(String::from).collect();
        p.sort();
        p
    };
    let p1 = positives(&t1, &v1);
    assert!(!p1.is_empty());
    assert_eq!(p1, positives(&t2, &v2));
    assert_eq!(t1.lines().count(), t2.lines().count());
    assert_eq!(v1.lines().count(), v2.lines().count());
    assert_ne!((t1, v1), (t2, v2));
}

#[test]
fn tasks_from_candidates() {
    let dir = tempfile::tempdir().unwrap();
    common::copy_fixture(dir.path());
    ok(&factalign(dir.path(), &["run", "--config", "config.toml"]));
    let sents = std::fs::read_to_string(dir.path().join("out/sentences.hi.jsonl")).unwrap();
    let mut tr = String::new();
    for line in sents.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        tr.push_str(&serde_json::json!({
            "page_id": v["page_id"], "ordinal": v["ordinal"], "translation": format!("EN: {}", v["text"].as_str().unwrap()),
        }).to_string());
        tr.push('\n');
    }
    std::fs::write(dir.path().join("tr.jsonl"), tr).unwrap();
    ok(&factalign(dir.path(), &["create-tasks", "--config", "config.toml", "--language", "hi", "--translations", "tr.jsonl"]));
    let tasks = std::fs::read_to_string(dir.path().join("out/tasks.hi.jsonl")).unwrap();
    let cands = std::fs::read_to_string(dir.path().join("out/candidates.hi.jsonl")).unwrap();
    assert_eq!(tasks.lines().count(), cands.lines().count());
    assert!(tasks.contains("EN: "));
}

#[test]
fn eval_commands() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("marks.json"),
        r#"{"a": [1,1,1,1,1,0,0,0,0,0], "b": [1,1,1,1,0,1,0,0,0,0]}"#,
    )
    .unwrap();
    let out = ok(&factalign(p, &["eval", "kappa", "marks.json"]));
    assert!(out.contains("0.600000"), "{out}");
    let out = ok(&factalign(p, &["eval", "kappa", "marks.json", "--json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["average_kappa"].as_f64().unwrap() - 0.6).abs() < 1e-9);
    assert!(v["pairwise_kappa"]["a/b"].is_number());

    std::fs::write(p.join("pred.jsonl"), "{\"id\":\"s1\",\"language\":\"hi\",\"facts\":[\"P19=Q1\",\"P27=Q2\"]}\n").unwrap();
    std::fs::write(p.join("gold.jsonl"), "{\"id\":\"s1\",\"language\":\"hi\",\"facts\":[\"P27=Q2\",\"P106=Q3\"]}\n").unwrap();
    let out = ok(&factalign(p, &["eval", "f1", "--predicted", "pred.jsonl", "--gold", "gold.jsonl", "--reference"]));
    assert!(out.contains("0.500"), "{out}");
    let published = out.lines().find(|l| l.contains("published")).expect(&out);
    for v in ["0.902", "0.831", "0.841", "0.886", "0.845", "0.851", "0.751", "0.785", "0.837"] {
        assert!(published.contains(v), "{published}");
    }
    let header = out.lines().next().unwrap();
    let order: Vec<usize> = ["hi", "mr", "te", "ta", "en", "gu", "bn", "kn"]
        .iter()
        .map(|c| header.find(&format!(" {c} ")).expect(header))
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]), "{header}");

    std::fs::write(p.join("h.txt"), "the cat sat on the mat\nhe was born in Delhi\n").unwrap();
    let out = ok(&factalign(p, &["eval", "bleu", "--hypotheses", "h.txt", "--references", "h.txt", "--json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["bleu"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let out = factalign(p, &["eval", "kappa", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
}
