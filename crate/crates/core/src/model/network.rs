use ndarray::{concatenate, s, Array1, Axis};
use rand_chacha::ChaCha8Rng;

use super::config::{ModelConfig, ModelDims};
use super::layers::{
    apply_mask, dropout_mask, gather, scatter_add, AttnCache, FfCache, LnCache, Mask, A2,
};
use super::loss::{log_softmax_row, sigmoid, softplus};
use super::params::Params;
use super::positional::positional_table;
use crate::encoding::{EncodedRecord, PAD};
use crate::error::{Error, Result};

/// One training instance in embedding-index form.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub records: Vec<EncodedRecord>,
    pub record_labels: Vec<u8>,
    /// `BOS … EOS`.
    pub target_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub dims: ModelDims,
    pub params: Params,
}

/// Decoder logits per prefix position and content-selection probabilities per
/// record.
#[derive(Debug, Clone)]
pub struct ForwardOutput {
    pub logits: A2,
    pub cs_probs: Array1<f64>,
}

/// Encoder result reused across decoding steps.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub states: A2,
    pub cs_logits: Array1<f64>,
    key_valid: Vec<bool>,
}

struct EncLayerCache {
    ln1: LnCache,
    attn: AttnCache,
    drop1: Option<A2>,
    ln2: LnCache,
    ff: FfCache,
    drop2: Option<A2>,
}

struct DecLayerCache {
    ln1: LnCache,
    self_attn: AttnCache,
    drop1: Option<A2>,
    ln2: LnCache,
    cross_attn: AttnCache,
    drop2: Option<A2>,
    ln3: LnCache,
    ff: FfCache,
    drop3: Option<A2>,
}

struct Cache {
    feature_ids: [Vec<u32>; 4],
    enc_drop: Option<A2>,
    enc_layers: Vec<EncLayerCache>,
    enc_ln: LnCache,
    enc_out: A2,
    prefix: Vec<u32>,
    dec_drop: Option<A2>,
    dec_layers: Vec<DecLayerCache>,
    dec_ln: LnCache,
    dec_out: A2,
}

fn masked(x: &A2, mask: &Option<A2>) -> A2 {
    match mask {
        Some(m) => x * m,
        None => x.clone(),
    }
}

impl Model {
    pub fn new(config: ModelConfig, dims: ModelDims, seed: u64) -> Result<Self> {
        config.validate()?;
        if dims.target_vocab <= 4 || dims.header_vocab == 0 || dims.value_vocab == 0 || dims.columns == 0 || dims.chart_types == 0 {
            return Err(Error::Config(format!("degenerate model dimensions {dims:?}")));
        }
        let params = Params::init(&config, &dims, seed);
        Ok(Model { config, dims, params })
    }

    fn check_records(&self, records: &[EncodedRecord]) -> Result<()> {
        if records.len() > self.config.max_records {
            return Err(Error::LengthOverflow {
                what: "records",
                len: records.len(),
                max: self.config.max_records,
            });
        }
        for r in records {
            for (id, size) in [
                (r.header, self.dims.header_vocab),
                (r.value, self.dims.value_vocab),
                (r.column, self.dims.columns),
                (r.chart_type, self.dims.chart_types),
            ] {
                if id as usize >= size {
                    return Err(Error::TokenOutOfVocab { id: id as usize, size });
                }
            }
        }
        Ok(())
    }

    fn check_prefix(&self, prefix: &[u32]) -> Result<()> {
        if prefix.len() > self.config.max_target_len {
            return Err(Error::LengthOverflow {
                what: "target",
                len: prefix.len(),
                max: self.config.max_target_len,
            });
        }
        if prefix.is_empty() {
            return Err(Error::Shape("empty target prefix".into()));
        }
        if let Some(&id) = prefix.iter().find(|&&id| id as usize >= self.dims.target_vocab) {
            return Err(Error::TokenOutOfVocab { id: id as usize, size: self.dims.target_vocab });
        }
        Ok(())
    }

    fn embed_records(&self, ids: &[Vec<u32>; 4]) -> A2 {
        let p = &self.params;
        let parts = [
            gather(&p.header_emb, &ids[0]),
            gather(&p.value_emb, &ids[1]),
            gather(&p.column_emb, &ids[2]),
            gather(&p.chart_emb, &ids[3]),
        ];
        let mut x = concatenate(Axis(1), &[parts[0].view(), parts[1].view(), parts[2].view(), parts[3].view()])
            .expect("equal row counts");
        if self.config.use_positional_embeddings {
            x += &positional_table(x.nrows(), self.config.d_model);
        }
        x
    }

    fn run_encoder(
        &self,
        records: &[EncodedRecord],
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> (Encoded, [Vec<u32>; 4], Option<A2>, Vec<EncLayerCache>, LnCache) {
        let ids = [
            records.iter().map(|r| r.header).collect::<Vec<_>>(),
            records.iter().map(|r| r.value).collect(),
            records.iter().map(|r| r.column).collect(),
            records.iter().map(|r| r.chart_type).collect(),
        ];
        let heads = self.config.n_heads;
        let rate = self.config.dropout;
        let x0 = self.embed_records(&ids);
        let enc_drop = dropout_mask(rng.as_deref_mut(), rate, x0.dim());
        let mut x = apply_mask(x0, &enc_drop);
        let key_valid: Vec<bool> = records.iter().map(|r| !r.is_pad()).collect();
        let mask = Mask { key_valid: key_valid.clone(), causal: false };
        let mut caches = Vec::with_capacity(self.params.encoder.len());
        for layer in &self.params.encoder {
            let (a, ln1) = layer.ln1.forward(&x);
            let (att, attn) = layer.attn.forward(&a, &a, heads, &mask);
            let drop1 = dropout_mask(rng.as_deref_mut(), rate, att.dim());
            let h = &x + &apply_mask(att, &drop1);
            let (b, ln2) = layer.ln2.forward(&h);
            let (f, ff) = layer.ff.forward(&b);
            let drop2 = dropout_mask(rng.as_deref_mut(), rate, f.dim());
            x = h + &apply_mask(f, &drop2);
            caches.push(EncLayerCache { ln1, attn, drop1, ln2, ff, drop2 });
        }
        let (states, enc_ln) = self.params.encoder_ln.forward(&x);
        let cs_logits = self.params.cs_head.forward(&states).column(0).to_owned();
        (Encoded { states, cs_logits, key_valid }, ids, enc_drop, caches, enc_ln)
    }

    fn run_decoder(
        &self,
        enc: &Encoded,
        prefix: &[u32],
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> (A2, Option<A2>, Vec<DecLayerCache>, LnCache) {
        let heads = self.config.n_heads;
        let rate = self.config.dropout;
        let y0 = gather(&self.params.token_emb, prefix) + &positional_table(prefix.len(), self.config.d_model);
        let dec_drop = dropout_mask(rng.as_deref_mut(), rate, y0.dim());
        let mut y = apply_mask(y0, &dec_drop);
        let self_mask = Mask { key_valid: prefix.iter().map(|&t| t != PAD).collect(), causal: true };
        let cross_mask = Mask { key_valid: enc.key_valid.clone(), causal: false };
        let mut caches = Vec::with_capacity(self.params.decoder.len());
        for layer in &self.params.decoder {
            let (a, ln1) = layer.ln1.forward(&y);
            let (sa, self_attn) = layer.self_attn.forward(&a, &a, heads, &self_mask);
            let drop1 = dropout_mask(rng.as_deref_mut(), rate, sa.dim());
            let y1 = &y + &apply_mask(sa, &drop1);
            let (b, ln2) = layer.ln2.forward(&y1);
            let (ca, cross_attn) = layer.cross_attn.forward(&b, &enc.states, heads, &cross_mask);
            let drop2 = dropout_mask(rng.as_deref_mut(), rate, ca.dim());
            let y2 = &y1 + &apply_mask(ca, &drop2);
            let (c, ln3) = layer.ln3.forward(&y2);
            let (f, ff) = layer.ff.forward(&c);
            let drop3 = dropout_mask(rng.as_deref_mut(), rate, f.dim());
            y = y2 + &apply_mask(f, &drop3);
            caches.push(DecLayerCache { ln1, self_attn, drop1, ln2, cross_attn, drop2, ln3, ff, drop3 });
        }
        let (out, dec_ln) = self.params.decoder_ln.forward(&y);
        (out, dec_drop, caches, dec_ln)
    }

    /// Encodes records without dropout.
    pub fn encode(&self, records: &[EncodedRecord]) -> Result<Encoded> {
        self.check_records(records)?;
        Ok(self.run_encoder(records, None).0)
    }

    /// Content-selection probabilities of the records.
    pub fn cs_probs(&self, enc: &Encoded) -> Array1<f64> {
        enc.cs_logits.mapv(sigmoid)
    }

    /// Log-probabilities of the token following `prefix`.
    pub fn next_log_probs(&self, enc: &Encoded, prefix: &[u32]) -> Result<Vec<f64>> {
        self.check_prefix(prefix)?;
        let (h, ..) = self.run_decoder(enc, prefix, None);
        let last = h.slice(s![h.nrows() - 1.., ..]).to_owned();
        let logits = self.params.output.forward(&last);
        Ok(log_softmax_row(logits.row(0).as_slice().expect("contiguous row")))
    }

    /// Logits for every prefix position and content-selection probabilities.
    pub fn forward(&self, records: &[EncodedRecord], prefix: &[u32]) -> Result<ForwardOutput> {
        self.check_records(records)?;
        self.check_prefix(prefix)?;
        let enc = self.run_encoder(records, None).0;
        let (h, ..) = self.run_decoder(&enc, prefix, None);
        Ok(ForwardOutput { logits: self.params.output.forward(&h), cs_probs: self.cs_probs(&enc) })
    }

    pub fn forward_batch(&self, batch: &[(&[EncodedRecord], &[u32])]) -> Result<Vec<ForwardOutput>> {
        batch.iter().map(|(r, p)| self.forward(r, p)).collect()
    }

    fn run(&self, ex: &Example, mut rng: Option<&mut ChaCha8Rng>) -> Result<(A2, Array1<f64>, Cache)> {
        self.check_records(&ex.records)?;
        if ex.record_labels.len() != ex.records.len() {
            return Err(Error::Shape(format!(
                "{} record labels for {} records",
                ex.record_labels.len(),
                ex.records.len()
            )));
        }
        if ex.target_ids.len() < 2 {
            return Err(Error::Shape("target needs at least BOS and one more token".into()));
        }
        let prefix = &ex.target_ids[..ex.target_ids.len() - 1];
        self.check_prefix(prefix)?;
        if let Some(&id) = ex.target_ids.last().filter(|&&id| id as usize >= self.dims.target_vocab) {
            return Err(Error::TokenOutOfVocab { id: id as usize, size: self.dims.target_vocab });
        }
        let (enc, feature_ids, enc_drop, enc_layers, enc_ln) = self.run_encoder(&ex.records, rng.as_deref_mut());
        let (dec_out, dec_drop, dec_layers, dec_ln) = self.run_decoder(&enc, prefix, rng);
        let logits = self.params.output.forward(&dec_out);
        let cache = Cache {
            feature_ids,
            enc_drop,
            enc_layers,
            enc_ln,
            enc_out: enc.states,
            prefix: prefix.to_vec(),
            dec_drop,
            dec_layers,
            dec_ln,
            dec_out,
        };
        Ok((logits, enc.cs_logits, cache))
    }

    fn backward(&self, c: &Cache, dlogits: &A2, dcs: &A2, g: &mut Params) {
        let p = &self.params;
        let heads = self.config.n_heads;
        let dz = p.output.backward(&c.dec_out, dlogits, &mut g.output);
        let mut dy = p.decoder_ln.backward(&c.dec_ln, &dz, &mut g.decoder_ln);
        let mut d_enc = A2::zeros(c.enc_out.raw_dim());
        for (i, lc) in c.dec_layers.iter().enumerate().rev() {
            let (layer, gl) = (&p.decoder[i], &mut g.decoder[i]);
            let dc = layer.ff.backward(&lc.ff, &masked(&dy, &lc.drop3), &mut gl.ff);
            let dy2 = &dy + &layer.ln3.backward(&lc.ln3, &dc, &mut gl.ln3);
            let (db, dmem) = layer.cross_attn.backward(&lc.cross_attn, &masked(&dy2, &lc.drop2), heads, &mut gl.cross_attn);
            d_enc += &dmem;
            let dy1 = &dy2 + &layer.ln2.backward(&lc.ln2, &db, &mut gl.ln2);
            let (dq, dkv) = layer.self_attn.backward(&lc.self_attn, &masked(&dy1, &lc.drop1), heads, &mut gl.self_attn);
            dy = dy1 + &layer.ln1.backward(&lc.ln1, &(dq + &dkv), &mut gl.ln1);
        }
        let dy = masked(&dy, &c.dec_drop);
        scatter_add(&mut g.token_emb, &c.prefix, &dy);

        d_enc += &p.cs_head.backward(&c.enc_out, dcs, &mut g.cs_head);
        let mut dx = p.encoder_ln.backward(&c.enc_ln, &d_enc, &mut g.encoder_ln);
        for (i, lc) in c.enc_layers.iter().enumerate().rev() {
            let (layer, gl) = (&p.encoder[i], &mut g.encoder[i]);
            let db = layer.ff.backward(&lc.ff, &masked(&dx, &lc.drop2), &mut gl.ff);
            let dh = &dx + &layer.ln2.backward(&lc.ln2, &db, &mut gl.ln2);
            let (dq, dkv) = layer.attn.backward(&lc.attn, &masked(&dh, &lc.drop1), heads, &mut gl.attn);
            dx = dh + &layer.ln1.backward(&lc.ln1, &(dq + &dkv), &mut gl.ln1);
        }
        let dx = masked(&dx, &c.enc_drop);
        let q = self.config.d_model / 4;
        let tables = [&mut g.header_emb, &mut g.value_emb, &mut g.column_emb, &mut g.chart_emb];
        for (k, table) in tables.into_iter().enumerate() {
            let part = dx.slice(s![.., k * q..(k + 1) * q]).to_owned();
            scatter_add(table, &c.feature_ids[k], &part);
        }
    }

    /// Loss of one example and, when `grads` is given, its gradient scaled
    /// by `scale` accumulated into `grads`. Dropout is active iff `rng` is.
    pub(crate) fn example_loss(
        &self,
        ex: &Example,
        rng: Option<&mut ChaCha8Rng>,
        grads: Option<(&mut Params, f64)>,
    ) -> Result<f64> {
        let (logits, cs_logits, cache) = self.run(ex, rng)?;
        let gold = &ex.target_ids[1..];
        let n_tok = gold.iter().filter(|&&t| t != PAD).count().max(1) as f64;
        let mut dlogits = A2::zeros(logits.raw_dim());
        let mut tok_loss = 0.0;
        for (t, &y) in gold.iter().enumerate() {
            if y == PAD {
                continue;
            }
            let lp = log_softmax_row(logits.row(t).as_slice().expect("contiguous row"));
            tok_loss -= lp[y as usize];
            for (v, l) in lp.iter().enumerate() {
                dlogits[[t, v]] = l.exp() / n_tok;
            }
            dlogits[[t, y as usize]] -= 1.0 / n_tok;
        }
        tok_loss /= n_tok;

        let lambda = self.config.cs_loss_weight;
        let n_rec = ex.records.iter().filter(|r| !r.is_pad()).count();
        let mut dcs = A2::zeros((ex.records.len(), 1));
        let mut cs_loss = 0.0;
        if n_rec > 0 {
            for (i, r) in ex.records.iter().enumerate() {
                if r.is_pad() {
                    continue;
                }
                let z = cs_logits[i];
                let l = f64::from(ex.record_labels[i]);
                cs_loss += softplus(z) - l * z;
                dcs[[i, 0]] = lambda * (sigmoid(z) - l) / n_rec as f64;
            }
            cs_loss /= n_rec as f64;
        }
        let loss = tok_loss + lambda * cs_loss;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("loss {loss}")));
        }
        if let Some((g, scale)) = grads {
            if scale != 1.0 {
                dlogits *= scale;
                dcs *= scale;
            }
            self.backward(&cache, &dlogits, &dcs, g);
        }
        Ok(loss)
    }

    /// Mean loss over a batch, without dropout.
    pub fn loss(&self, batch: &[Example]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Shape("empty batch".into()));
        }
        let mut total = 0.0;
        for ex in batch {
            total += self.example_loss(ex, None, None)?;
        }
        Ok(total / batch.len() as f64)
    }

    /// Mean loss over a batch and its gradient. Dropout is applied when `rng`
    /// is given.
    pub fn loss_and_grad(&self, batch: &[Example], mut rng: Option<&mut ChaCha8Rng>) -> Result<(f64, Params)> {
        if batch.is_empty() {
            return Err(Error::Shape("empty batch".into()));
        }
        let mut grads = self.params.zeros_like();
        let scale = 1.0 / batch.len() as f64;
        let mut total = 0.0;
        for ex in batch {
            total += self.example_loss(ex, rng.as_deref_mut(), Some((&mut grads, scale)))?;
        }
        if !grads.all_finite() {
            return Err(Error::NonFinite("gradient".into()));
        }
        Ok((total * scale, grads))
    }
}
