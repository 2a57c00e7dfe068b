use std::collections::HashMap;
use std::hash::Hash;

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_default() += 1;
        }
    }
    m
}

/// Clipped n-gram matches and candidate n-gram total.
fn modified_precision<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let matches = cand
        .iter()
        .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
        .sum();
    (matches, candidate.len().saturating_sub(n - 1))
}

fn brevity_penalty(c: usize, r: usize) -> f64 {
    if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

/// Sentence BLEU with orders `1..=max_n`.
///
/// Unigram precision is unsmoothed; higher orders use add-one smoothing.
/// Candidates shorter than `max_n` use only the orders they have. An empty
/// candidate scores 0.
pub fn bleu<T: Eq + Hash>(candidate: &[T], reference: &[T], max_n: usize) -> f64 {
    if candidate.is_empty() || reference.is_empty() || max_n == 0 {
        return 0.0;
    }
    let orders = max_n.min(candidate.len());
    let mut log_sum = 0.0;
    for n in 1..=orders {
        let (m, total) = modified_precision(candidate, reference, n);
        let p = if n == 1 {
            m as f64 / total as f64
        } else {
            (m + 1) as f64 / (total + 1) as f64
        };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
    }
    brevity_penalty(candidate.len(), reference.len()) * (log_sum / orders as f64).exp()
}

/// Corpus-level BLEU: clipped counts and lengths are summed over all pairs
/// before the precisions are taken. No smoothing.
pub fn corpus_bleu<T: Eq + Hash>(pairs: &[(Vec<T>, Vec<T>)], max_n: usize) -> f64 {
    let c: usize = pairs.iter().map(|(c, _)| c.len()).sum();
    let r: usize = pairs.iter().map(|(_, r)| r.len()).sum();
    if c == 0 || max_n == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let (m, t) = pairs
            .iter()
            .map(|(c, r)| modified_precision(c, r, n))
            .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        if m == 0 || t == 0 {
            return 0.0;
        }
        log_sum += (m as f64 / t as f64).ln();
    }
    brevity_penalty(c, r) * (log_sum / max_n as f64).exp()
}
