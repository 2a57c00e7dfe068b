use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ModelConfig, ModelDims};
use super::layers::{embedding, Attention, FeedForward, LayerNorm, Linear, A2};

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderLayer {
    pub ln1: LayerNorm,
    pub attn: Attention,
    pub ln2: LayerNorm,
    pub ff: FeedForward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderLayer {
    pub ln1: LayerNorm,
    pub self_attn: Attention,
    pub ln2: LayerNorm,
    pub cross_attn: Attention,
    pub ln3: LayerNorm,
    pub ff: FeedForward,
}

/// All trainable weights. Gradients use the same structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub header_emb: A2,
    pub value_emb: A2,
    pub column_emb: A2,
    pub chart_emb: A2,
    pub encoder: Vec<EncoderLayer>,
    pub encoder_ln: LayerNorm,
    pub cs_head: Linear,
    pub token_emb: A2,
    pub decoder: Vec<DecoderLayer>,
    pub decoder_ln: LayerNorm,
    pub output: Linear,
}

trait Visit {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a A2)>);
    fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut A2>);
}

impl Visit for Linear {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a A2)>) {
        out.push((format!("{prefix}.w"), &self.w));
        out.push((format!("{prefix}.b"), &self.b));
    }
    fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut A2>) {
        out.push(&mut self.w);
        out.push(&mut self.b);
    }
}

impl Visit for LayerNorm {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a A2)>) {
        out.push((format!("{prefix}.g"), &self.g));
        out.push((format!("{prefix}.b"), &self.b));
    }
    fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut A2>) {
        out.push(&mut self.g);
        out.push(&mut self.b);
    }
}

impl Visit for Attention {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a A2)>) {
        self.q.visit(&format!("{prefix}.q"), out);
        self.k.visit(&format!("{prefix}.k"), out);
        self.v.visit(&format!("{prefix}.v"), out);
        self.o.visit(&format!("{prefix}.o"), out);
    }
    fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut A2>) {
        self.q.visit_mut(out);
        self.k.visit_mut(out);
        self.v.visit_mut(out);
        self.o.visit_mut(out);
    }
}

impl Visit for FeedForward {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a A2)>) {
        self.l1.visit(&format!("{prefix}.l1"), out);
        self.l2.visit(&format!("{prefix}.l2"), out);
    }
    fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut A2>) {
        self.l1.visit_mut(out);
        self.l2.visit_mut(out);
    }
}

impl Visit for EncoderLayer {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a A2)>) {
        self.ln1.visit(&format!("{prefix}.ln1"), out);
        self.attn.visit(&format!("{prefix}.attn"), out);
        self.ln2.visit(&format!("{prefix}.ln2"), out);
        self.ff.visit(&format!("{prefix}.ff"), out);
    }
    fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut A2>) {
        self.ln1.visit_mut(out);
        self.attn.visit_mut(out);
        self.ln2.visit_mut(out);
        self.ff.visit_mut(out);
    }
}

impl Visit for DecoderLayer {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a A2)>) {
        self.ln1.visit(&format!("{prefix}.ln1"), out);
        self.self_attn.visit(&format!("{prefix}.self_attn"), out);
        self.ln2.visit(&format!("{prefix}.ln2"), out);
        self.cross_attn.visit(&format!("{prefix}.cross_attn"), out);
        self.ln3.visit(&format!("{prefix}.ln3"), out);
        self.ff.visit(&format!("{prefix}.ff"), out);
    }
    fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut A2>) {
        self.ln1.visit_mut(out);
        self.self_attn.visit_mut(out);
        self.ln2.visit_mut(out);
        self.cross_attn.visit_mut(out);
        self.ln3.visit_mut(out);
        self.ff.visit_mut(out);
    }
}

impl Params {
    pub fn init(config: &ModelConfig, dims: &ModelDims, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.d_model;
        let q = d / 4;
        Params {
            header_emb: embedding(&mut rng, dims.header_vocab, q),
            value_emb: embedding(&mut rng, dims.value_vocab, q),
            column_emb: embedding(&mut rng, dims.columns, q),
            chart_emb: embedding(&mut rng, dims.chart_types, q),
            encoder: (0..config.encoder_layers)
                .map(|_| EncoderLayer {
                    ln1: LayerNorm::new(d),
                    attn: Attention::new(&mut rng, d),
                    ln2: LayerNorm::new(d),
                    ff: FeedForward::new(&mut rng, d, config.ff_dim),
                })
                .collect(),
            encoder_ln: LayerNorm::new(d),
            cs_head: Linear::new(&mut rng, d, 1),
            token_emb: embedding(&mut rng, dims.target_vocab, d),
            decoder: (0..config.decoder_layers)
                .map(|_| DecoderLayer {
                    ln1: LayerNorm::new(d),
                    self_attn: Attention::new(&mut rng, d),
                    ln2: LayerNorm::new(d),
                    cross_attn: Attention::new(&mut rng, d),
                    ln3: LayerNorm::new(d),
                    ff: FeedForward::new(&mut rng, d, config.ff_dim),
                })
                .collect(),
            decoder_ln: LayerNorm::new(d),
            output: Linear::new(&mut rng, d, dims.target_vocab),
        }
    }

    /// Every tensor with a dotted name, in a fixed order.
    pub fn named(&self) -> Vec<(String, &A2)> {
        let mut out = vec![
            ("header_emb".to_string(), &self.header_emb),
            ("value_emb".to_string(), &self.value_emb),
            ("column_emb".to_string(), &self.column_emb),
            ("chart_emb".to_string(), &self.chart_emb),
        ];
        for (i, l) in self.encoder.iter().enumerate() {
            l.visit(&format!("encoder.{i}"), &mut out);
        }
        self.encoder_ln.visit("encoder_ln", &mut out);
        self.cs_head.visit("cs_head", &mut out);
        out.push(("token_emb".to_string(), &self.token_emb));
        for (i, l) in self.decoder.iter().enumerate() {
            l.visit(&format!("decoder.{i}"), &mut out);
        }
        self.decoder_ln.visit("decoder_ln", &mut out);
        self.output.visit("output", &mut out);
        out
    }

    /// Same order as [`Params::named`].
    pub fn tensors_mut(&mut self) -> Vec<&mut A2> {
        let mut out = vec![
            &mut self.header_emb,
            &mut self.value_emb,
            &mut self.column_emb,
            &mut self.chart_emb,
        ];
        for l in &mut self.encoder {
            l.visit_mut(&mut out);
        }
        self.encoder_ln.visit_mut(&mut out);
        self.cs_head.visit_mut(&mut out);
        out.push(&mut self.token_emb);
        for l in &mut self.decoder {
            l.visit_mut(&mut out);
        }
        self.decoder_ln.visit_mut(&mut out);
        self.output.visit_mut(&mut out);
        out
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    pub fn n_scalars(&self) -> usize {
        self.named().iter().map(|(_, t)| t.len()).sum()
    }

    /// `self += other * scale`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &Params, scale: f64) {
        let others: Vec<&A2> = other.named().into_iter().map(|(_, t)| t).collect();
        for (t, o) in self.tensors_mut().into_iter().zip(others) {
            t.scaled_add(scale, o);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for t in self.tensors_mut() {
            t.mapv_inplace(|x| x * s);
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.named()
            .iter()
            .map(|(_, t)| t.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.named().iter().all(|(_, t)| t.iter().all(|x| x.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> ModelDims {
        ModelDims { target_vocab: 10, header_vocab: 6, value_vocab: 7, columns: 3, chart_types: 4 }
    }

    #[test]
    fn names_and_mut_views_align() {
        let c = ModelConfig { d_model: 8, ff_dim: 16, ..ModelConfig::desk() };
        let mut p = Params::init(&c, &dims(), 1);
        let shapes: Vec<Vec<usize>> = p.named().iter().map(|(_, t)| t.shape().to_vec()).collect();
        let shapes_mut: Vec<Vec<usize>> = p.tensors_mut().iter().map(|t| t.shape().to_vec()).collect();
        assert_eq!(shapes, shapes_mut);
        let names: Vec<String> = p.named().into_iter().map(|(n, _)| n).collect();
        let unique: std::collections::HashSet<_> = names.iter().collect();
        assert_eq!(unique.len(), names.len());
        assert!(names.contains(&"decoder.1.cross_attn.v.w".to_string()));
    }

    #[test]
    fn init_is_seeded_and_f32_exact() {
        let c = ModelConfig { d_model: 8, ff_dim: 16, ..ModelConfig::desk() };
        let a = Params::init(&c, &dims(), 5);
        assert_eq!(a, Params::init(&c, &dims(), 5));
        assert_ne!(a, Params::init(&c, &dims(), 6));
        assert!(a.named().iter().all(|(_, t)| t.iter().all(|&x| x as f32 as f64 == x)));
        assert_eq!(a.header_emb.ncols() * 4, 8);
    }
}
