#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BTreeSet;

use chart2text::corpus::ChartSample;
use chart2text::encoding::{EncodedRecord, BOS, EOS, PAD};
use chart2text::model::{Encoded, Example, Model, ModelConfig, ModelDims};
use chart2text::text::tokenize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn tiny_config(d_model: usize) -> ModelConfig {
    ModelConfig {
        d_model,
        n_heads: 2,
        encoder_layers: 1,
        decoder_layers: 1,
        ff_dim: 2 * d_model,
        dropout: 0.0,
        use_positional_embeddings: true,
        max_records: 64,
        max_target_len: 32,
        beam_size: 4,
        cs_loss_weight: 1.0,
    }
}

pub fn tiny_dims(target_vocab: usize) -> ModelDims {
    ModelDims { target_vocab, header_vocab: 7, value_vocab: 9, columns: 4, chart_types: 4 }
}

pub fn tiny_model(d_model: usize, target_vocab: usize, seed: u64) -> Model {
    Model::new(tiny_config(d_model), tiny_dims(target_vocab), seed).unwrap()
}

pub fn random_records(rng: &mut ChaCha8Rng, dims: &ModelDims, n: usize) -> Vec<EncodedRecord> {
    (0..n)
        .map(|_| EncodedRecord {
            header: rng.gen_range(4..dims.header_vocab as u32),
            value: rng.gen_range(4..dims.value_vocab as u32),
            column: rng.gen_range(0..dims.columns as u32),
            chart_type: rng.gen_range(0..dims.chart_types as u32),
        })
        .collect()
}

pub fn random_example(rng: &mut ChaCha8Rng, dims: &ModelDims, n_records: usize, len: usize) -> Example {
    let records = random_records(rng, dims, n_records);
    let record_labels = (0..n_records).map(|_| rng.gen_range(0..2)).collect();
    let mut target_ids = vec![BOS];
    target_ids.extend((0..len).map(|_| rng.gen_range(3..dims.target_vocab as u32)));
    target_ids.push(EOS);
    Example { records, record_labels, target_ids }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A model whose parameters are all drawn i.i.d. from the standard normal
/// distribution (rounded to f32).
pub fn standard_normal_model(d_model: usize, target_vocab: usize, seed: u64) -> Model {
    use rand_distr::{Distribution, StandardNormal};
    let mut model = tiny_model(d_model, target_vocab, seed);
    let mut r = rng(seed ^ 0x5eed);
    for t in model.params.tensors_mut() {
        t.mapv_inplace(|_| {
            let x: f64 = StandardNormal.sample(&mut r);
            x as f32 as f64
        });
    }
    model
}

pub fn max_abs_diff(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Central differences over every scalar. Returns, per tensor, the analytic
/// gradient and the numeric one.
pub fn finite_differences(model: &Model, batch: &[Example], h: f64) -> Vec<(String, Vec<f64>, Vec<f64>)> {
    let (_, grads) = model.loss_and_grad(batch, None).unwrap();
    let analytic: Vec<(String, Vec<f64>)> =
        grads.named().into_iter().map(|(n, t)| (n, t.iter().copied().collect())).collect();
    let mut probe = model.clone();
    let mut out = Vec::new();
    for (k, (name, a)) in analytic.into_iter().enumerate() {
        let mut numeric = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let orig = probe.params.tensors_mut()[k].as_slice_mut().unwrap()[i];
            probe.params.tensors_mut()[k].as_slice_mut().unwrap()[i] = orig + h;
            let plus = probe.loss(batch).unwrap();
            probe.params.tensors_mut()[k].as_slice_mut().unwrap()[i] = orig - h;
            let minus = probe.loss(batch).unwrap();
            probe.params.tensors_mut()[k].as_slice_mut().unwrap()[i] = orig;
            numeric.push((plus - minus) / (2.0 * h));
        }
        out.push((name, a, numeric));
    }
    out
}

/// Elementwise relative error. The denominator is floored at 1e-6 so that
/// gradients which are zero analytically (the key bias cancels in the
/// softmax) are compared on an absolute scale.
pub fn max_relative_error(a: &[f64], n: &[f64]) -> f64 {
    a.iter()
        .zip(n)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

/// Best sequence over every hypothesis beam search could return: all
/// EOS-terminated sequences of length <= max_len and all EOS-free sequences of
/// length exactly max_len.
pub fn exhaustive(model: &Model, enc: &Encoded, max_len: usize) -> (Vec<u32>, f64) {
    fn walk(model: &Model, enc: &Encoded, ids: &mut Vec<u32>, sum: f64, max_len: usize, best: &mut Option<(Vec<u32>, f64)>) {
        let consider = |ids: &[u32], sum: f64, best: &mut Option<(Vec<u32>, f64)>| {
            let score = sum / ids.len() as f64;
            let better = match best {
                None => true,
                Some((b, bs)) => {
                    let bscore = *bs / b.len() as f64;
                    score > bscore || (score == bscore && ids.cmp(b.as_slice()) == Ordering::Less)
                }
            };
            if better {
                *best = Some((ids.to_vec(), sum));
            }
        };
        let prefix: Vec<u32> = std::iter::once(BOS).chain(ids.iter().copied()).collect();
        let lp = model.next_log_probs(enc, &prefix).unwrap();
        for (id, &l) in lp.iter().enumerate() {
            let id = id as u32;
            if id == PAD || id == BOS {
                continue;
            }
            ids.push(id);
            if id == EOS || ids.len() == max_len {
                consider(ids, sum + l, best);
            } else {
                walk(model, enc, ids, sum + l, max_len, best);
            }
            ids.pop();
        }
    }
    let mut best = None;
    walk(model, enc, &mut Vec::new(), 0.0, max_len, &mut best);
    best.unwrap()
}

/// Cells mentioned in `text`, decided independently of the library matcher:
/// numeric cells by value equality with any comma-stripped numeric token,
/// text cells by a case-insensitive contiguous token match.
pub fn oracle_mentions(text: &str, chart: &ChartSample) -> BTreeSet<(usize, usize)> {
    let tokens = tokenize(text);
    let numbers: Vec<f64> = tokens
        .iter()
        .filter_map(|t| t.replace(',', "").replace('\u{2212}', "-").parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .collect();
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let mut out = BTreeSet::new();
    for (r, row) in chart.table.rows.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            let hit = match cell.value {
                Some(v) => numbers.iter().any(|&x| (x - v).abs() <= 1e-9 * x.abs().max(v.abs())),
                None => {
                    let needle: Vec<String> = tokenize(&cell.raw).iter().map(|t| t.to_lowercase()).collect();
                    (0..lower.len()).any(|i| lower[i..].starts_with(&needle))
                }
            };
            if hit {
                out.insert((c, r));
            }
        }
    }
    out
}

pub fn oracle_cs(generated: &str, gold: &str, chart: &ChartSample) -> f64 {
    let g = oracle_mentions(generated, chart);
    let r = oracle_mentions(gold, chart);
    if g.is_empty() {
        0.0
    } else {
        100.0 * g.intersection(&r).count() as f64 / g.len() as f64
    }
}

/// A sentence mentioning a random subset of the chart's cells.
pub fn random_mentions(rng: &mut ChaCha8Rng, chart: &ChartSample) -> String {
    let mut words = vec!["The".to_string(), "chart".to_string(), "shows".to_string()];
    for row in &chart.table.rows {
        for cell in row {
            if rng.gen_bool(0.25) {
                words.push(cell.raw.clone());
                words.push(["and", "then", "with"][rng.gen_range(0..3)].to_string());
            }
        }
    }
    words.push(".".into());
    words.join(" ")
}
