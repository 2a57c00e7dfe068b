use ndarray::Array2;

use crate::encoding::PAD;
use crate::error::{Error, Result};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub fn log_softmax_row(row: &[f64]) -> Vec<f64> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    row.iter().map(|x| x - lse).collect()
}

/// Joint objective: mean next-token cross-entropy over non-PAD targets plus
/// `lambda` times the mean binary cross-entropy of the content-selection
/// probabilities.
///
/// Row `t` of `logits` predicts `target_ids[t + 1]`. `cs_probs` and
/// `record_labels` cover the non-padding records only.
pub fn loss(
    logits: &Array2<f64>,
    cs_probs: &[f64],
    target_ids: &[u32],
    record_labels: &[u8],
    lambda: f64,
) -> Result<f64> {
    if target_ids.len() != logits.nrows() + 1 {
        return Err(Error::Shape(format!(
            "{} logit rows for {} target ids",
            logits.nrows(),
            target_ids.len()
        )));
    }
    if cs_probs.len() != record_labels.len() {
        return Err(Error::Shape(format!(
            "{} probabilities for {} labels",
            cs_probs.len(),
            record_labels.len()
        )));
    }
    let mut tok = 0.0;
    let mut n = 0usize;
    for (t, &y) in target_ids[1..].iter().enumerate() {
        if y == PAD {
            continue;
        }
        let row = logits.row(t);
        let y = y as usize;
        if y >= row.len() {
            return Err(Error::TokenOutOfVocab { id: y, size: row.len() });
        }
        tok -= log_softmax_row(row.as_slice().expect("contiguous row"))[y];
        n += 1;
    }
    let tok = if n > 0 { tok / n as f64 } else { 0.0 };
    let bce = if cs_probs.is_empty() {
        0.0
    } else {
        cs_probs
            .iter()
            .zip(record_labels)
            .map(|(&p, &l)| if l == 1 { -p.ln() } else { -(1.0 - p).ln() })
            .sum::<f64>()
            / cs_probs.len() as f64
    };
    let total = tok + lambda * bce;
    if total.is_nan() {
        return Err(Error::NonFinite("loss is NaN".into()));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_primitives() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        let lp = log_softmax_row(&[1.0, 2.0, 3.0]);
        assert!((lp.iter().map(|x| x.exp()).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_prediction_is_zero() {
        let mut logits = Array2::zeros((2, 6));
        logits[[0, 4]] = 1000.0;
        logits[[1, 2]] = 1000.0;
        let l = loss(&logits, &[1.0, 0.0], &[1, 4, 2], &[1, 0], 1.0).unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn uniform_logits_cost_ln_v() {
        let logits = Array2::zeros((3, 9));
        let l = loss(&logits, &[], &[1, 5, 6, 2], &[], 1.0).unwrap();
        assert!((l - 9f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn pad_targets_are_ignored() {
        let mut logits = Array2::zeros((3, 5));
        logits[[2, 1]] = 7.0;
        let a = loss(&logits, &[], &[1, 4, 2, 0], &[], 1.0).unwrap();
        let b = loss(&logits.slice(ndarray::s![..2, ..]).to_owned(), &[], &[1, 4, 2], &[], 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        assert!(loss(&Array2::zeros((2, 5)), &[], &[1, 2], &[], 1.0).is_err());
        assert!(loss(&Array2::zeros((1, 5)), &[0.5], &[1, 2], &[], 1.0).is_err());
    }
}
