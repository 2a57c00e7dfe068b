use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chart2text::corpus::{generate_synthetic_corpus, SynthSpec};
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chart2text"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/liverpool.jsonl")
}

fn synth(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let out = run(&["synth", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", p(&path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

fn read_jsonl(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn synth_is_deterministic_and_validates() {
    let dir = TempDir::new().unwrap();
    let a = synth(dir.path(), "a.jsonl", 1000, 11);
    let b = synth(dir.path(), "b.jsonl", 1000, 11);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);

    let report = dir.path().join("report.json");
    let out = run(&["ingest", "--input", p(&a), "--validate", "--report", p(&report)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let report: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["valid_samples"], 1000);
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);

    let mut want: BTreeMap<String, usize> = BTreeMap::new();
    for s in generate_synthetic_corpus(&SynthSpec::new(1000), 11).samples {
        *want.entry(s.chart_type.as_str().to_string()).or_default() += 1;
    }
    assert_eq!(report["chart_types"], json!(want));
}

#[test]
fn zero_samples_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = run(&["synth", "--n", "0", "--out", p(&dir.path().join("x.jsonl"))]);
    assert_eq!(code(&out), 3);
    assert_eq!(code(&run(&["frobnicate"])), 3);
    assert_eq!(code(&run(&["synth", "--out"])), 3);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn ingest_valid_and_ragged() {
    let out = run(&["ingest", "--input", p(&fixture()), "--validate"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("valid samples: 1"));

    let dir = TempDir::new().unwrap();
    let mut bad: Value = read_jsonl(&fixture()).remove(0);
    bad["id"] = json!("ragged-one");
    bad["table"]["rows"][1] = json!(["2015/16", "75.3"]);
    let good = read_jsonl(&fixture()).remove(0);
    let path = dir.path().join("ragged.jsonl");
    fs::write(&path, format!("{good}\n{bad}\n")).unwrap();

    let out = run(&["ingest", "--input", p(&path), "--validate"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("ragged-one"), "{text}");
    assert!(text.contains(":2"), "{text}");
    assert_eq!(code(&run(&["ingest", "--input", p(&path)])), 1);

    let out = run(&["ingest", "--input", p(&dir.path().join("missing.jsonl"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn templatize_roundtrip_and_fixture() {
    let dir = TempDir::new().unwrap();
    let src = synth(dir.path(), "s.jsonl", 200, 4);
    let t = dir.path().join("t.jsonl");
    let r = dir.path().join("r.jsonl");
    assert_eq!(code(&run(&["templatize", "--input", p(&src), "--out", p(&t)])), 0);
    assert_ne!(fs::read(&src).unwrap(), fs::read(&t).unwrap());
    let out = run(&["templatize", "--input", p(&t), "--out", p(&r), "--reverse"]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&src).unwrap(), fs::read(&r).unwrap());

    let lf = dir.path().join("lf.jsonl");
    assert_eq!(code(&run(&["templatize", "--input", p(&fixture()), "--out", p(&lf)])), 0);
    let summary = read_jsonl(&lf)[0]["summary"].as_str().unwrap().to_string();
    assert!(summary.starts_with("templateLabel[2][0] is the largest"), "{summary}");

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let eo = dir.path().join("eo.jsonl");
    assert_eq!(code(&run(&["templatize", "--input", p(&empty), "--out", p(&eo)])), 0);
    assert_eq!(fs::read_to_string(&eo).unwrap(), "");
}

#[test]
fn reverse_with_bad_indices_reports_but_succeeds() {
    let dir = TempDir::new().unwrap();
    let mut s = read_jsonl(&fixture()).remove(0);
    s["summary"] = json!("templateLabel[9][0] and templateValue[1][40] were high .");
    let path = dir.path().join("bad.jsonl");
    fs::write(&path, format!("{s}\n")).unwrap();
    let out_path = dir.path().join("out.jsonl");
    let out = run(&["templatize", "--input", p(&path), "--out", p(&out_path), "--reverse"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("unresolved variables: 2"), "{}", stdout(&out));
    let summary = read_jsonl(&out_path)[0]["summary"].as_str().unwrap().to_string();
    assert!(summary.contains("[UNK-REF]"));
    let report = read_jsonl(&dir.path().join("out.jsonl.report.jsonl"));
    assert_eq!(report[0]["unresolved"]["unresolved"].as_array().unwrap().len(), 2);
}

fn write_config(dir: &Path, name: &str, cfg: Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn history(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("history.json")).unwrap()).unwrap()
}

#[test]
fn train_is_reproducible_and_lr_zero_is_flat() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "s.jsonl", 30, 2);
    let base = json!({
        "profile": "desk", "corpus": "s.jsonl", "seed": 5,
        "train": {"epochs": 2, "updates_per_epoch": 3}
    });
    let cfg = write_config(dir.path(), "c.json", base.clone());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&["train", "--config", p(&cfg), "--out-dir", p(out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(fs::read(a.join("history.json")).unwrap(), fs::read(b.join("history.json")).unwrap());
    assert_eq!(fs::read(a.join("checkpoint.bin")).unwrap(), fs::read(b.join("checkpoint.bin")).unwrap());
    for f in ["checkpoint.bin", "vocab.json", "manifest.json", "train.jsonl", "validation.jsonl", "test.jsonl"] {
        assert!(a.join(f).exists(), "{f}");
    }
    let manifest: Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["config"]["profile"], "desk");
    assert_eq!(manifest["config"]["pipeline"]["train"]["epochs"], 2);
    let h = history(&a);
    assert_eq!(h["epochs"].as_array().unwrap().len(), 2);
    assert_eq!(h["updates"], 6);

    let flat = dir.path().join("flat");
    let o = run(&["train", "--config", p(&cfg), "--out-dir", p(&flat), "--lr", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let h = history(&flat);
    assert_eq!(h["initial_loss"], h["final_loss"]);
}

#[test]
fn train_errors_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "s.jsonl", 20, 2);
    let diverge = write_config(
        dir.path(),
        "d.json",
        json!({
            "profile": "desk", "corpus": "s.jsonl", "output_dir": "d",
            "train": {"epochs": 1, "updates_per_epoch": 3, "learning_rate": 1e300}
        }),
    );
    let out = run(&["train", "--config", p(&diverge)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("epoch 1, step 1"), "{}", stderr(&out));

    let unknown = write_config(dir.path(), "u.json", json!({"profile": "desk", "corpus": "s.jsonl", "wat": 1}));
    assert_eq!(code(&run(&["train", "--config", p(&unknown), "--out-dir", p(dir.path())])), 3);
    let no_out = write_config(dir.path(), "n.json", json!({"profile": "desk", "corpus": "s.jsonl"}));
    assert_eq!(code(&run(&["train", "--config", p(&no_out)])), 3);
    let bad_heads = write_config(
        dir.path(),
        "h.json",
        json!({"profile": "desk", "corpus": "s.jsonl", "output_dir": "h", "model": {"n_heads": 3}}),
    );
    assert_eq!(code(&run(&["train", "--config", p(&bad_heads)])), 3);
}

/// Trains a short run and returns its output directory.
fn quick_run(dir: &Path) -> PathBuf {
    synth(dir, "s.jsonl", 30, 8);
    let cfg = write_config(
        dir,
        "c.json",
        json!({
            "profile": "desk", "corpus": "s.jsonl", "output_dir": "run", "seed": 1,
            "train": {"epochs": 1, "updates_per_epoch": 20}
        }),
    );
    let out = run(&["train", "--config", p(&cfg)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir.join("run")
}

#[test]
fn generate_beam_one_equals_greedy_and_checks_inputs() {
    let dir = TempDir::new().unwrap();
    let runp = quick_run(dir.path());
    let ckpt = runp.join("checkpoint.bin");
    let test = runp.join("test.jsonl");
    let g1 = dir.path().join("g1.jsonl");
    let g2 = dir.path().join("g2.jsonl");
    assert_eq!(code(&run(&["generate", "--checkpoint", p(&ckpt), "--input", p(&test), "--out", p(&g1), "--beam", "1"])), 0);
    assert_eq!(code(&run(&["generate", "--checkpoint", p(&ckpt), "--input", p(&test), "--out", p(&g2), "--greedy"])), 0);
    assert_eq!(fs::read(&g1).unwrap(), fs::read(&g2).unwrap());
    let rows = read_jsonl(&g1);
    assert_eq!(rows.len(), read_jsonl(&test).len());
    for key in ["id", "text", "tokens", "report"] {
        assert!(rows[0].get(key).is_some(), "{key}");
    }

    let mut bytes = fs::read(&ckpt).unwrap();
    bytes[0] = b'X';
    let bad = dir.path().join("bad.bin");
    fs::write(&bad, &bytes).unwrap();
    let vocab = runp.join("vocab.json");
    let out = run(&["generate", "--checkpoint", p(&bad), "--vocab", p(&vocab), "--input", p(&test), "--out", p(&g1)]);
    assert_ne!(code(&out), 0);
    assert!(stderr(&out).contains("version"), "{}", stderr(&out));

    // A vocabulary from another run does not match the checkpoint.
    let other = TempDir::new().unwrap();
    synth(other.path(), "s.jsonl", 30, 99);
    let cfg = write_config(
        other.path(),
        "c.json",
        json!({"profile": "desk", "corpus": "s.jsonl", "output_dir": "run", "train": {"epochs": 1, "updates_per_epoch": 1}}),
    );
    assert_eq!(code(&run(&["train", "--config", p(&cfg)])), 0);
    let foreign = other.path().join("run/vocab.json");
    let out = run(&["generate", "--checkpoint", p(&ckpt), "--vocab", p(&foreign), "--input", p(&test), "--out", p(&g1)]);
    assert_ne!(code(&out), 0);
    assert!(stderr(&out).contains("hash mismatch"), "{}", stderr(&out));
}

#[test]
fn evaluate_identity_disjoint_and_mismatch() {
    let dir = TempDir::new().unwrap();
    let corpus = synth(dir.path(), "s.jsonl", 20, 6);
    let out_json = dir.path().join("eval.json");
    let out = run(&["evaluate", "--generated", p(&corpus), "--gold", p(&corpus), "--corpus", p(&corpus), "--out", p(&out_json)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: Value = serde_json::from_str(&fs::read_to_string(&out_json).unwrap()).unwrap();
    for s in report["samples"].as_array().unwrap() {
        if s["mentions_gen"].as_u64().unwrap() > 0 {
            assert_eq!(s["cs"], 100.0);
        }
    }
    assert!(dir.path().join("eval.txt").exists());
    assert!(dir.path().join("eval.json.manifest.json").exists());

    let rows = read_jsonl(&corpus);
    let disjoint: String = rows
        .iter()
        .map(|r| format!("{}\n", json!({"id": r["id"], "text": "zzz qqq www"})))
        .collect();
    let gen = dir.path().join("gen.jsonl");
    fs::write(&gen, disjoint).unwrap();
    let out = run(&["evaluate", "--generated", p(&gen), "--gold", p(&corpus), "--corpus", p(&corpus), "--out", p(&out_json)]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&fs::read_to_string(&out_json).unwrap()).unwrap();
    assert_eq!(report["bleu_mean"], 0.0);

    let partial: String = rows[..5]
        .iter()
        .map(|r| format!("{}\n", json!({"id": r["id"], "text": "x"})))
        .chain(std::iter::once(format!("{}\n", json!({"id": "stranger", "text": "x"}))))
        .collect();
    fs::write(&gen, partial).unwrap();
    let out = run(&["evaluate", "--generated", p(&gen), "--gold", p(&corpus), "--corpus", p(&corpus), "--out", p(&out_json)]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("stranger"), "{err}");
    assert!(err.contains(rows[5]["id"].as_str().unwrap()), "{err}");
}

#[test]
fn stats_reports_layout() {
    let dir = TempDir::new().unwrap();
    let corpus = synth(dir.path(), "s.jsonl", 100, 3);
    let json_out = dir.path().join("stats.json");
    let out = run(&["stats", "--input", p(&corpus), "--out", p(&json_out)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("Simple"));
    let v: Value = serde_json::from_str(&fs::read_to_string(&json_out).unwrap()).unwrap();
    assert_eq!(v["n_samples"], 100);
}

#[test]
fn pipeline_composes_end_to_end() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let corpus = synth(d, "s.jsonl", 40, 13);
    assert_eq!(code(&run(&["ingest", "--input", p(&corpus), "--validate"])), 0);
    let t = d.join("t.jsonl");
    assert_eq!(code(&run(&["templatize", "--input", p(&corpus), "--out", p(&t)])), 0);
    let cfg = write_config(
        d,
        "c.json",
        json!({"profile": "desk", "corpus": "s.jsonl", "output_dir": "run", "train": {"epochs": 2, "updates_per_epoch": 10}}),
    );
    assert_eq!(code(&run(&["train", "--config", p(&cfg)])), 0);
    let test = d.join("run/test.jsonl");
    let gen = d.join("gen.jsonl");
    let out = run(&["generate", "--checkpoint", p(&d.join("run/checkpoint.bin")), "--input", p(&test), "--out", p(&gen)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let eval = d.join("eval.json");
    let out = run(&["evaluate", "--generated", p(&gen), "--gold", p(&test), "--corpus", p(&test), "--out", p(&eval), "--tag", "templated"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: Value = serde_json::from_str(&fs::read_to_string(&eval).unwrap()).unwrap();
    assert_eq!(report["config"]["tag"], "templated");
}

#[test]
fn desk_overfit_reproduces_training_summaries() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let corpus = synth(d, "s.jsonl", 32, 4);
    let cfg = write_config(
        d,
        "c.json",
        json!({"profile": "desk", "train_corpus": "s.jsonl", "output_dir": "run", "seed": 0}),
    );
    let out = run(&["train", "--config", p(&cfg)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let h = history(&d.join("run"));
    let ratio = h["final_loss"].as_f64().unwrap() / h["initial_loss"].as_f64().unwrap();
    assert!(ratio < 0.1, "{ratio}");

    let gen = d.join("gen.jsonl");
    let out = run(&["generate", "--checkpoint", p(&d.join("run/checkpoint.bin")), "--input", p(&corpus), "--out", p(&gen)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let gold = read_jsonl(&corpus);
    let exact = read_jsonl(&gen)
        .iter()
        .zip(&gold)
        .filter(|(g, s)| g["text"] == s["summary"])
        .count();
    assert!(exact * 10 >= gold.len() * 9, "{exact}/{}", gold.len());
}
