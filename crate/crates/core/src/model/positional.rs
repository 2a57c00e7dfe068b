use ndarray::Array2;

use crate::error::{Error, Result};

/// Sinusoidal encoding: dimensions `(2i, 2i+1)` hold
/// `(sin, cos)(position / 10000^(2i / d_model))`.
pub fn positional_encoding(position: usize, d_model: usize) -> Result<Vec<f64>> {
    if !d_model.is_multiple_of(2) {
        return Err(Error::Config(format!("positional encoding needs an even width, got {d_model}")));
    }
    let mut pe = vec![0.0; d_model];
    for i in 0..d_model / 2 {
        let angle = position as f64 / 10000f64.powf(2.0 * i as f64 / d_model as f64);
        pe[2 * i] = angle.sin();
        pe[2 * i + 1] = angle.cos();
    }
    Ok(pe)
}

/// Encodings of positions `0..len` as rows.
pub(crate) fn positional_table(len: usize, d_model: usize) -> Array2<f64> {
    let mut t = Array2::zeros((len, d_model));
    for p in 0..len {
        let pe = positional_encoding(p, d_model).expect("width validated by config");
        for (j, v) in pe.into_iter().enumerate() {
            t[[p, j]] = v;
        }
    }
    t
}
