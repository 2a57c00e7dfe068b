use std::cmp::Ordering;

use super::network::{Encoded, Model};
use crate::encoding::{EncodedRecord, BOS, EOS, PAD};
use crate::error::Result;

/// Tokens that may be generated: everything except PAD and BOS.
fn generable(id: usize) -> bool {
    id != PAD as usize && id != BOS as usize
}

/// Length-normalized score of a hypothesis: mean log-probability per
/// generated token.
pub fn mean_log_prob(sum: f64, len: usize) -> f64 {
    sum / len as f64
}

/// Orders by score (higher first), then token ids ascending.
pub fn compare_hypotheses(a: (&[u32], f64), b: (&[u32], f64)) -> Ordering {
    let sa = mean_log_prob(a.1, a.0.len());
    let sb = mean_log_prob(b.1, b.0.len());
    sb.partial_cmp(&sa).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(b.0))
}

fn prefixed(ids: &[u32]) -> Vec<u32> {
    std::iter::once(BOS).chain(ids.iter().copied()).collect()
}

fn clamp_len(model: &Model, max_len: usize) -> usize {
    max_len.min(model.config.max_target_len)
}

/// Argmax decoding; ties go to the lowest id. The output holds the generated
/// ids without BOS, ending in EOS unless `max_len` was reached first.
pub fn greedy_decode(model: &Model, records: &[EncodedRecord], max_len: usize) -> Result<Vec<u32>> {
    let enc = model.encode(records)?;
    greedy_from(model, &enc, max_len)
}

pub fn greedy_from(model: &Model, enc: &Encoded, max_len: usize) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for _ in 0..clamp_len(model, max_len) {
        let lp = model.next_log_probs(enc, &prefixed(&out))?;
        let mut best = None;
        for (id, &l) in lp.iter().enumerate() {
            if generable(id) && best.is_none_or(|(_, b)| l > b) {
                best = Some((id as u32, l));
            }
        }
        let (id, _) = best.expect("vocabulary has generable tokens");
        out.push(id);
        if id == EOS {
            break;
        }
    }
    Ok(out)
}

/// Beam search under [`mean_log_prob`]. Each step keeps the `beam_size`
/// best expansions of all live hypotheses; expansions ending in EOS are
/// set aside as finished. The best finished or length-capped hypothesis is
/// returned.
pub fn beam_decode(model: &Model, records: &[EncodedRecord], beam_size: usize, max_len: usize) -> Result<Vec<u32>> {
    let enc = model.encode(records)?;
    beam_from(model, &enc, beam_size, max_len)
}

pub fn beam_from(model: &Model, enc: &Encoded, beam_size: usize, max_len: usize) -> Result<Vec<u32>> {
    let beam_size = beam_size.max(1);
    let max_len = clamp_len(model, max_len);
    let mut live: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), 0.0)];
    let mut finished: Vec<(Vec<u32>, f64)> = Vec::new();
    for _ in 0..max_len {
        let mut expansions = Vec::new();
        for (ids, sum) in &live {
            let lp = model.next_log_probs(enc, &prefixed(ids))?;
            for (id, &l) in lp.iter().enumerate() {
                if generable(id) {
                    let mut next = ids.clone();
                    next.push(id as u32);
                    expansions.push((next, sum + l));
                }
            }
        }
        expansions.sort_by(|a, b| compare_hypotheses((&a.0, a.1), (&b.0, b.1)));
        expansions.truncate(beam_size);
        live.clear();
        for h in expansions {
            if h.0.last() == Some(&EOS) {
                finished.push(h);
            } else {
                live.push(h);
            }
        }
        if live.is_empty() {
            break;
        }
    }
    finished.extend(live);
    finished.sort_by(|a, b| compare_hypotheses((&a.0, a.1), (&b.0, b.1)));
    Ok(finished.into_iter().next().map(|h| h.0).unwrap_or_default())
}
