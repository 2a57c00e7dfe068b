mod config;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use chart2text::corpus::{
    corpus_stats, generate_synthetic_corpus, load_corpus, scan_corpus, split_corpus, ChartSample, Corpus, SynthSpec,
};
use chart2text::encoding::SummaryMode;
use chart2text::metrics::{evaluate_corpus, EvalInput};
use chart2text::pipeline::System;
use chart2text::template::{detemplatize, parse_templated, templatize, DetempReport};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use config::RunConfig;

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "chart2text", version, about = "Chart summarization with data-variable templates")]
struct Cli {
    /// More log output on standard error (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a dataset and report its samples and any schema violations.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Check every record and list all violations instead of stopping at the first.
        #[arg(long)]
        validate: bool,
        /// Also write the report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a synthetic corpus.
    Synth {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        min_rows: Option<usize>,
        #[arg(long)]
        max_rows: Option<usize>,
        #[arg(long)]
        max_series: Option<usize>,
    },
    /// Rewrite summaries into data-variable form, or back with --reverse.
    Templatize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        reverse: bool,
    },
    /// Train a model from a JSON run configuration.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<SummaryMode>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        updates_per_epoch: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
    },
    /// Generate summaries for every chart of a dataset.
    Generate {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Defaults to vocab.json next to the checkpoint.
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the beam size stored with the model.
        #[arg(long, conflicts_with = "greedy", value_parser = clap::value_parser!(u64).range(1..))]
        beam: Option<u64>,
        #[arg(long)]
        greedy: bool,
    },
    /// Score generated summaries with BLEU and content selection.
    Evaluate {
        /// JSON Lines with `id` and `text` (or `summary`).
        #[arg(long)]
        generated: PathBuf,
        /// JSON Lines with `id` and `summary` (or `text`); a dataset file works.
        #[arg(long)]
        gold: PathBuf,
        /// Dataset holding the charts.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tag: Option<String>,
    },
    /// Chart-type distribution and summary statistics of a dataset.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<SummaryMode, String> {
    match s {
        "templated" => Ok(SummaryMode::Templated),
        "raw" => Ok(SummaryMode::Raw),
        _ => Err(format!("unknown mode `{s}` (templated, raw)")),
    }
}

/// A failure that is the input's fault rather than the tool's.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

/// Bad flags or configuration.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use chart2text::Error as E;
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return EXIT_VALIDATION;
        }
        if cause.is::<Usage>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Schema { .. } | E::InvalidSample { .. } | E::DuplicateId(_) | E::EmptyCorpus | E::OutOfBounds { .. } => {
                    EXIT_VALIDATION
                }
                E::Config(_) | E::SplitRatios { .. } => EXIT_USAGE,
                _ => EXIT_RUNTIME,
            };
        }
    }
    EXIT_RUNTIME
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Ingest { input, validate, report } => ingest(&input, validate, report.as_deref()),
        Command::Synth { n, seed, out, min_rows, max_rows, max_series } => {
            let mut spec = SynthSpec::new(n as usize);
            spec.min_rows = min_rows.unwrap_or(spec.min_rows);
            spec.max_rows = max_rows.unwrap_or(spec.max_rows);
            spec.max_series = max_series.unwrap_or(spec.max_series);
            if spec.min_rows == 0 || spec.min_rows > spec.max_rows || spec.max_series < 2 {
                return Err(Usage(format!(
                    "need 1 <= min_rows <= max_rows and max_series >= 2, got {}, {}, {}",
                    spec.min_rows, spec.max_rows, spec.max_series
                ))
                .into());
            }
            let corpus = generate_synthetic_corpus(&spec, seed);
            corpus.save(&out)?;
            write_manifest(&out, "synth", Some(seed), serde_json::to_value(&spec)?)?;
            log::info!("wrote {} samples to {}", corpus.len(), out.display());
            Ok(0)
        }
        Command::Templatize { input, out, reverse } => templatize_cmd(&input, &out, reverse),
        Command::Train { config, out_dir, corpus, mode, seed, epochs, updates_per_epoch, lr } => {
            let mut rc = RunConfig::load(&config).map_err(|e| Usage(format!("{e:#}")))?;
            if let Some(c) = corpus {
                rc.corpus = Some(c);
                rc.train_corpus = None;
                rc.validation_corpus = None;
            }
            if out_dir.is_some() {
                rc.output_dir = out_dir;
            }
            rc.mode = mode.unwrap_or(rc.mode);
            rc.seed = seed.unwrap_or(rc.seed);
            let mut train_patch = rc.train.take().unwrap_or_else(|| json!({}));
            for (k, v) in [
                ("epochs", epochs.map(Value::from)),
                ("updates_per_epoch", updates_per_epoch.map(Value::from)),
                ("learning_rate", lr.map(Value::from)),
            ] {
                if let (Some(v), Some(obj)) = (v, train_patch.as_object_mut()) {
                    obj.insert(k.into(), v);
                }
            }
            rc.train = Some(train_patch);
            train_cmd(&rc)
        }
        Command::Generate { checkpoint, vocab, input, out, beam, greedy } => {
            let vocab = vocab.unwrap_or_else(|| checkpoint.with_file_name("vocab.json"));
            generate_cmd(&checkpoint, &vocab, &input, &out, if greedy { Some(1) } else { beam.map(|b| b as usize) })
        }
        Command::Evaluate { generated, gold, corpus, out, tag } => {
            evaluate_cmd(&generated, &gold, &corpus, &out, tag.as_deref())
        }
        Command::Stats { input, out } => {
            let corpus = load_corpus(&input)?;
            let report = corpus_stats(&corpus)?;
            print!("{}", report.to_text());
            if let Some(out) = out {
                write_json(&out, &report)?;
                write_manifest(&out, "stats", None, json!({ "input": input }))?;
            }
            Ok(0)
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    seed: Option<u64>,
    config: Value,
}

fn manifest_value(command: &str, seed: Option<u64>, config: Value) -> Value {
    serde_json::to_value(Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        config,
    })
    .expect("manifest serializes")
}

/// `<artifact>.manifest.json` next to an artifact.
fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

fn write_manifest(artifact: &Path, command: &str, seed: Option<u64>, config: Value) -> anyhow::Result<()> {
    write_json(&manifest_path(artifact), &manifest_value(command, seed, config))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path).with_context(|| format!("writing {}", path.display()))?);
    for r in rows {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

fn ingest(input: &Path, validate: bool, report_path: Option<&Path>) -> anyhow::Result<u8> {
    let (samples, violations) = if validate {
        scan_corpus(input)?
    } else {
        (load_corpus(input)?.samples, Vec::new())
    };
    let mut by_type: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &samples {
        *by_type.entry(s.chart_type.as_str()).or_default() += 1;
    }
    println!("valid samples: {}", samples.len());
    for (t, n) in &by_type {
        println!("  {t:<14} {n}");
    }
    println!("violations: {}", violations.len());
    for v in &violations {
        println!("  {v}");
    }
    if let Some(p) = report_path {
        write_json(
            p,
            &json!({ "valid_samples": samples.len(), "chart_types": by_type, "violations": violations }),
        )?;
        write_manifest(p, "ingest", None, json!({ "input": input, "validate": validate }))?;
    }
    Ok(if violations.is_empty() { 0 } else { EXIT_VALIDATION })
}

#[derive(Serialize)]
struct ReverseReport<'a> {
    id: &'a str,
    unresolved: &'a DetempReport,
}

fn templatize_cmd(input: &Path, out: &Path, reverse: bool) -> anyhow::Result<u8> {
    let corpus = load_corpus(input)?;
    let mut samples = corpus.samples;
    let mut reports = Vec::new();
    for s in &mut samples {
        if reverse {
            let d = detemplatize(&parse_templated(&s.summary), s);
            s.summary = d.text;
            reports.push((s.id.clone(), d.report));
        } else {
            s.summary = templatize(&s.summary, s).to_text();
        }
    }
    Corpus { samples, split_tag: None }.save(out)?;
    let config = json!({ "input": input, "reverse": reverse });
    write_manifest(out, "templatize", None, config)?;
    if reverse {
        let rows: Vec<ReverseReport<'_>> =
            reports.iter().map(|(id, r)| ReverseReport { id, unresolved: r }).collect();
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".report.jsonl");
        write_jsonl(&out.with_file_name(name), &rows)?;
        let bad = reports.iter().filter(|(_, r)| !r.is_empty()).count();
        let vars: usize = reports.iter().map(|(_, r)| r.len()).sum();
        if vars > 0 {
            log::warn!("{vars} out-of-range variables in {bad} samples rendered as placeholders");
        }
        println!("samples: {}, with unresolved variables: {bad}, unresolved variables: {vars}", reports.len());
    }
    Ok(0)
}

fn train_cmd(rc: &RunConfig) -> anyhow::Result<u8> {
    let cfg = rc.pipeline().map_err(|e| Usage(format!("{e:#}")))?;
    let Some(out_dir) = rc.output_dir.clone() else {
        return Err(Usage("no output directory: set `output_dir` or pass --out-dir".into()).into());
    };
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let (train, validation) = match (&rc.corpus, &rc.train_corpus) {
        (Some(path), None) => {
            let corpus = load_corpus(path)?;
            let (tr, va, te) = split_corpus(&corpus, rc.split, rc.seed)?;
            tr.save(out_dir.join("train.jsonl"))?;
            va.save(out_dir.join("validation.jsonl"))?;
            te.save(out_dir.join("test.jsonl"))?;
            (tr.samples, va.samples)
        }
        (None, Some(path)) => {
            let val = match &rc.validation_corpus {
                Some(v) => load_corpus(v)?.samples,
                None => Vec::new(),
            };
            (load_corpus(path)?.samples, val)
        }
        _ => return Err(Usage("set exactly one of `corpus` and `train_corpus`".into()).into()),
    };

    let mut system = System::init(&train, &cfg)?;
    let (train, skipped_train) = encodable(&system, train);
    let (validation, skipped_val) = encodable(&system, validation);
    if train.is_empty() {
        return Err(Invalid("no training sample fits the encoding bounds".into()).into());
    }
    log::info!(
        "training on {} samples ({} validation), vocabulary {} tokens, {} parameters",
        train.len(),
        validation.len(),
        system.vocab.len(),
        system.model.params.n_scalars()
    );
    let history = system.train(&train, &validation, &cfg.train)?;
    system.save(out_dir.join("checkpoint.bin"), out_dir.join("vocab.json"))?;
    write_json(&out_dir.join("history.json"), &history)?;

    let manifest = manifest_value(
        "train",
        Some(rc.seed),
        json!({
            "profile": rc.profile,
            "pipeline": cfg,
            "split": rc.split,
            "data": {
                "corpus": rc.corpus, "train_corpus": rc.train_corpus, "validation_corpus": rc.validation_corpus,
                "train_samples": train.len(), "validation_samples": validation.len(),
                "skipped_out_of_bounds": skipped_train + skipped_val,
            },
            "vocab_hash": system.vocab.hash(),
            "interpretation": {
                "epoch": "updates_per_epoch optimizer updates per epoch",
                "loss": "token cross-entropy plus cs_loss_weight times content-selection binary cross-entropy",
                "raw_mode": "raw-mode output tokens are taken literally, no variable resolution",
            },
        }),
    );
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    println!(
        "initial loss {:.4}, final loss {:.4}, {} updates",
        history.initial_loss, history.final_loss, history.updates
    );
    Ok(0)
}

/// Drops samples the system cannot encode within its bounds.
fn encodable(system: &System, samples: Vec<ChartSample>) -> (Vec<ChartSample>, usize) {
    let n = samples.len();
    let kept: Vec<ChartSample> = samples
        .into_iter()
        .filter(|s| match system.example(s) {
            Ok(_) => true,
            Err(e) => {
                log::warn!("skipping {}: {e}", s.id);
                false
            }
        })
        .collect();
    let skipped = n - kept.len();
    (kept, skipped)
}

fn generate_cmd(checkpoint: &Path, vocab: &Path, input: &Path, out: &Path, beam: Option<usize>) -> anyhow::Result<u8> {
    let system = System::load(checkpoint, vocab)?;
    let beam = beam.unwrap_or(system.model.config.beam_size);
    let corpus = load_corpus(input)?;
    let mut rows = Vec::with_capacity(corpus.len());
    for chart in &corpus.samples {
        rows.push(system.generate(chart, beam).with_context(|| format!("generating for `{}`", chart.id))?);
    }
    write_jsonl(out, &rows)?;
    let unresolved: usize = rows.iter().map(|g| g.report.len()).sum();
    if unresolved > 0 {
        log::warn!("{unresolved} generated variables referenced cells outside their chart");
    }
    write_manifest(
        out,
        "generate",
        None,
        json!({ "checkpoint": checkpoint, "vocab": vocab, "input": input, "beam_size": beam, "mode": system.mode }),
    )?;
    Ok(0)
}

/// Reads `id` → text from JSON Lines, taking the first of `fields` present.
fn read_texts(path: &Path, fields: &[&str]) -> anyhow::Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line)
            .map_err(|e| Invalid(format!("{}:{}: {e}", path.display(), i + 1)))?;
        let id = v.get("id").and_then(Value::as_str);
        let body = fields.iter().find_map(|f| v.get(*f).and_then(Value::as_str));
        match (id, body) {
            (Some(id), Some(body)) => out.push((id.to_string(), body.to_string())),
            _ => bail!(Invalid(format!(
                "{}:{}: expected string fields `id` and one of {fields:?}",
                path.display(),
                i + 1
            ))),
        }
    }
    Ok(out)
}

fn evaluate_cmd(generated: &Path, gold: &Path, corpus: &Path, out: &Path, tag: Option<&str>) -> anyhow::Result<u8> {
    let generated_rows = read_texts(generated, &["text", "summary"])?;
    let gold_rows: BTreeMap<String, String> = read_texts(gold, &["summary", "text"])?.into_iter().collect();
    let charts = load_corpus(corpus)?;
    let gen_ids: HashSet<&str> = generated_rows.iter().map(|(id, _)| id.as_str()).collect();

    let mut problems = Vec::new();
    let missing_gold: Vec<&str> = generated_rows
        .iter()
        .map(|(id, _)| id.as_str())
        .filter(|id| !gold_rows.contains_key(*id))
        .collect();
    if !missing_gold.is_empty() {
        problems.push(format!("missing from gold: {}", missing_gold.join(", ")));
    }
    let missing_gen: Vec<&str> = gold_rows.keys().map(String::as_str).filter(|id| !gen_ids.contains(id)).collect();
    if !missing_gen.is_empty() {
        problems.push(format!("missing from generated: {}", missing_gen.join(", ")));
    }
    let missing_chart: Vec<&str> = generated_rows
        .iter()
        .map(|(id, _)| id.as_str())
        .filter(|id| charts.get(id).is_none())
        .collect();
    if !missing_chart.is_empty() {
        problems.push(format!("missing from corpus: {}", missing_chart.join(", ")));
    }
    if !problems.is_empty() {
        bail!(Invalid(format!("id mismatch; {}", problems.join("; "))));
    }
    if generated_rows.is_empty() {
        bail!(Invalid("no generated summaries".into()));
    }

    let inputs: Vec<EvalInput<'_>> = generated_rows
        .iter()
        .map(|(id, text)| EvalInput {
            id,
            generated: text,
            gold: &gold_rows[id],
            chart: charts.get(id).expect("checked above"),
        })
        .collect();
    let report = evaluate_corpus(&inputs, tag)?;
    write_json(out, &report)?;
    let table = report.to_text();
    fs::write(out.with_extension("txt"), &table).with_context(|| format!("writing table next to {}", out.display()))?;
    write_manifest(
        out,
        "evaluate",
        None,
        json!({ "generated": generated, "gold": gold, "corpus": corpus, "tag": tag }),
    )?;
    print!("{table}");
    Ok(0)
}
