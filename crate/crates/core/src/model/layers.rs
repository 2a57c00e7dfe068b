//! Layer primitives with explicit backward passes. Every `backward`
//! accumulates parameter gradients into a structure of the same shape and
//! returns the gradient with respect to its input.

use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type A2 = Array2<f64>;

/// Rounds to the nearest f32 so checkpoints store parameters exactly.
pub(crate) fn to_f32_grid(a: &mut A2) {
    a.mapv_inplace(|x| x as f32 as f64);
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, limit: f64) -> A2 {
    let mut a = A2::from_shape_fn((rows, cols), |_| rng.gen_range(-limit..=limit));
    to_f32_grid(&mut a);
    a
}

/// Table of `rows` vectors drawn uniformly from [-1, 1].
pub(crate) fn embedding(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> A2 {
    uniform(rng, rows, cols, 1.0)
}

/// Rows of `table` selected by `ids`.
pub(crate) fn gather(table: &A2, ids: &[u32]) -> A2 {
    let mut out = A2::zeros((ids.len(), table.ncols()));
    for (i, &id) in ids.iter().enumerate() {
        out.row_mut(i).assign(&table.row(id as usize));
    }
    out
}

pub(crate) fn scatter_add(grad: &mut A2, ids: &[u32], d: &A2) {
    for (i, &id) in ids.iter().enumerate() {
        let mut row = grad.row_mut(id as usize);
        row += &d.row(i);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub w: A2,
    pub b: A2,
}

impl Linear {
    pub(crate) fn new(rng: &mut ChaCha8Rng, inputs: usize, outputs: usize) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        Linear {
            w: uniform(rng, inputs, outputs, limit),
            b: A2::zeros((1, outputs)),
        }
    }

    pub(crate) fn forward(&self, x: &A2) -> A2 {
        x.dot(&self.w) + &self.b
    }

    pub(crate) fn backward(&self, x: &A2, dy: &A2, grad: &mut Linear) -> A2 {
        grad.w += &x.t().dot(dy);
        grad.b += &dy.sum_axis(Axis(0)).insert_axis(Axis(0));
        dy.dot(&self.w.t())
    }
}

pub const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm {
    pub g: A2,
    pub b: A2,
}

pub(crate) struct LnCache {
    xhat: A2,
    inv_std: Array1<f64>,
}

impl LayerNorm {
    pub(crate) fn new(d: usize) -> Self {
        LayerNorm {
            g: A2::ones((1, d)),
            b: A2::zeros((1, d)),
        }
    }

    pub(crate) fn forward(&self, x: &A2) -> (A2, LnCache) {
        let d = x.ncols() as f64;
        let mean = x.sum_axis(Axis(1)) / d;
        let centered = x - &mean.insert_axis(Axis(1));
        let var = centered.mapv(|v| v * v).sum_axis(Axis(1)) / d;
        let inv_std = var.mapv(|v| 1.0 / (v + LN_EPS).sqrt());
        let xhat = centered * inv_std.view().insert_axis(Axis(1));
        let y = &xhat * &self.g + &self.b;
        (y, LnCache { xhat, inv_std })
    }

    pub(crate) fn backward(&self, cache: &LnCache, dy: &A2, grad: &mut LayerNorm) -> A2 {
        let d = dy.ncols() as f64;
        grad.g += &(dy * &cache.xhat).sum_axis(Axis(0)).insert_axis(Axis(0));
        grad.b += &dy.sum_axis(Axis(0)).insert_axis(Axis(0));
        let dxhat = dy * &self.g;
        let mean_d = dxhat.sum_axis(Axis(1)) / d;
        let mean_dx = (&dxhat * &cache.xhat).sum_axis(Axis(1)) / d;
        let dx = dxhat - &mean_d.insert_axis(Axis(1)) - &cache.xhat * &mean_dx.insert_axis(Axis(1));
        dx * cache.inv_std.view().insert_axis(Axis(1))
    }
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)
const GELU_A: f64 = 0.044_715;

/// GELU, tanh approximation.
pub(crate) fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

pub(crate) fn gelu_grad(x: f64) -> f64 {
    let t = (GELU_C * (x + GELU_A * x * x * x)).tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

/// Inverted dropout mask, or `None` when inactive.
pub(crate) fn dropout_mask(
    rng: Option<&mut ChaCha8Rng>,
    rate: f64,
    shape: (usize, usize),
) -> Option<A2> {
    let rng = rng?;
    if rate <= 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - rate);
    Some(A2::from_shape_fn(shape, |_| if rng.gen::<f64>() < rate { 0.0 } else { keep }))
}

pub(crate) fn apply_mask(x: A2, mask: &Option<A2>) -> A2 {
    match mask {
        Some(m) => x * m,
        None => x,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedForward {
    pub l1: Linear,
    pub l2: Linear,
}

pub(crate) struct FfCache {
    x: A2,
    pre: A2,
    act: A2,
}

impl FeedForward {
    pub(crate) fn new(rng: &mut ChaCha8Rng, d: usize, ff: usize) -> Self {
        FeedForward {
            l1: Linear::new(rng, d, ff),
            l2: Linear::new(rng, ff, d),
        }
    }

    pub(crate) fn forward(&self, x: &A2) -> (A2, FfCache) {
        let pre = self.l1.forward(x);
        let act = pre.mapv(gelu);
        let y = self.l2.forward(&act);
        (y, FfCache { x: x.clone(), pre, act })
    }

    pub(crate) fn backward(&self, c: &FfCache, dy: &A2, grad: &mut FeedForward) -> A2 {
        let dact = self.l2.backward(&c.act, dy, &mut grad.l2);
        let dpre = dact * &c.pre.mapv(gelu_grad);
        self.l1.backward(&c.x, &dpre, &mut grad.l1)
    }
}

/// Which keys each query may attend to.
#[derive(Debug, Clone)]
pub(crate) struct Mask {
    pub key_valid: Vec<bool>,
    pub causal: bool,
}

impl Mask {
    fn allowed(&self, q: usize, k: usize) -> bool {
        self.key_valid[k] && (!self.causal || k <= q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attention {
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub o: Linear,
}

pub(crate) struct AttnCache {
    xq: A2,
    xkv: A2,
    q: A2,
    k: A2,
    v: A2,
    probs: Vec<A2>,
    concat: A2,
}

impl Attention {
    pub(crate) fn new(rng: &mut ChaCha8Rng, d: usize) -> Self {
        Attention {
            q: Linear::new(rng, d, d),
            k: Linear::new(rng, d, d),
            v: Linear::new(rng, d, d),
            o: Linear::new(rng, d, d),
        }
    }

    pub(crate) fn forward(&self, xq: &A2, xkv: &A2, heads: usize, mask: &Mask) -> (A2, AttnCache) {
        let q = self.q.forward(xq);
        let k = self.k.forward(xkv);
        let v = self.v.forward(xkv);
        let (tq, tk, d) = (q.nrows(), k.nrows(), q.ncols());
        let dk = d / heads;
        let scale = 1.0 / (dk as f64).sqrt();
        let mut concat = A2::zeros((tq, d));
        let mut probs = Vec::with_capacity(heads);
        for h in 0..heads {
            let cols = s![.., h * dk..(h + 1) * dk];
            let scores = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            let mut p = A2::zeros((tq, tk));
            for i in 0..tq {
                let mut max = f64::NEG_INFINITY;
                for j in 0..tk {
                    if mask.allowed(i, j) {
                        max = max.max(scores[[i, j]]);
                    }
                }
                if max == f64::NEG_INFINITY {
                    continue;
                }
                let mut sum = 0.0;
                for j in 0..tk {
                    if mask.allowed(i, j) {
                        let e = (scores[[i, j]] - max).exp();
                        p[[i, j]] = e;
                        sum += e;
                    }
                }
                p.row_mut(i).mapv_inplace(|x| x / sum);
            }
            concat.slice_mut(cols).assign(&p.dot(&v.slice(cols)));
            probs.push(p);
        }
        let out = self.o.forward(&concat);
        let cache = AttnCache {
            xq: xq.clone(),
            xkv: xkv.clone(),
            q,
            k,
            v,
            probs,
            concat,
        };
        (out, cache)
    }

    /// Returns the gradients with respect to the query input and the
    /// key/value input.
    pub(crate) fn backward(&self, c: &AttnCache, dy: &A2, heads: usize, grad: &mut Attention) -> (A2, A2) {
        let dconcat = self.o.backward(&c.concat, dy, &mut grad.o);
        let d = c.q.ncols();
        let dk = d / heads;
        let scale = 1.0 / (dk as f64).sqrt();
        let mut dq = A2::zeros(c.q.raw_dim());
        let mut dkm = A2::zeros(c.k.raw_dim());
        let mut dv = A2::zeros(c.v.raw_dim());
        for h in 0..heads {
            let cols = s![.., h * dk..(h + 1) * dk];
            let p = &c.probs[h];
            let dout = dconcat.slice(cols);
            dv.slice_mut(cols).assign(&p.t().dot(&dout));
            let dp = dout.dot(&c.v.slice(cols).t());
            let row_dot = (&dp * p).sum_axis(Axis(1)).insert_axis(Axis(1));
            let ds = (dp - &row_dot) * p * scale;
            dq.slice_mut(cols).assign(&ds.dot(&c.k.slice(cols)));
            dkm.slice_mut(cols).assign(&ds.t().dot(&c.q.slice(cols)));
        }
        let dxq = self.q.backward(&c.xq, &dq, &mut grad.q);
        let dxkv = self.k.backward(&c.xkv, &dkm, &mut grad.k) + self.v.backward(&c.xkv, &dv, &mut grad.v);
        (dxq, dxkv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn gelu_derivative_matches_difference() {
        for &x in &[-3.0, -0.5, 0.0, 0.7, 2.5] {
            let h = 1e-6;
            let fd = (gelu(x + h) - gelu(x - h)) / (2.0 * h);
            assert!((fd - gelu_grad(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn layer_norm_normalizes_rows() {
        let ln = LayerNorm::new(4);
        let x = A2::from_shape_vec((2, 4), vec![1.0, 2.0, 3.0, 4.0, -1.0, 0.0, 5.0, 9.0]).unwrap();
        let (y, _) = ln.forward(&x);
        for row in y.rows() {
            assert!(row.sum().abs() < 1e-9);
            assert!((row.mapv(|v| v * v).sum() / 4.0 - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn fully_masked_query_attends_nowhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let att = Attention::new(&mut rng, 4);
        let x = embedding(&mut rng, 3, 4);
        let mask = Mask { key_valid: vec![false, false, false], causal: false };
        let (y, _) = att.forward(&x, &x, 2, &mask);
        for row in y.rows() {
            assert_eq!(row.to_vec(), att.o.b.row(0).to_vec());
        }
    }
}
