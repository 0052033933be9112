//! Parameters and the forward/backward passes of the encoder-decoder.
//!
//! The encoder is a bidirectional LSTM over character embeddings; its
//! summary (final forward state ++ final backward state) conditions every
//! decoder step. At step `t` the decoder sees the embedding of the previous
//! output character, the embedding of the `t`-th lemma character (zero past
//! the end of the lemma), the summary and the morphological feature vector.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lstm::{self, LstmParams, StepCache};
use super::tensor::{log_sum_exp, Matrix};
use super::vocab::{CharVocab, BOS, EOS, PAD};
use super::ReinflectError;

/// Architecture settings that are fixed once a model is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden: usize,
    pub embed_dim: usize,
    /// Longest output the decoder will produce (and longest accepted target).
    pub max_len: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: 128,
            embed_dim: 64,
            max_len: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoderParams {
    pub w_prev: Matrix,
    pub w_root: Matrix,
    pub w_ctx: Matrix,
    pub w_morph: Matrix,
    pub w_h: Matrix,
    pub b: Matrix,
}

/// All trainable tensors. Also used as the gradient container.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub embedding: Matrix,
    pub enc_fwd: LstmParams,
    pub enc_bwd: LstmParams,
    pub dec: DecoderParams,
    pub out_w: Matrix,
    pub out_b: Matrix,
}

pub const BLOCK_NAMES: [&str; 15] = [
    "embedding",
    "enc_fwd.w_x",
    "enc_fwd.w_h",
    "enc_fwd.b",
    "enc_bwd.w_x",
    "enc_bwd.w_h",
    "enc_bwd.b",
    "dec.w_prev",
    "dec.w_root",
    "dec.w_ctx",
    "dec.w_morph",
    "dec.w_h",
    "dec.b",
    "out.w",
    "out.b",
];

impl Params {
    pub fn zeros(vocab: usize, features: usize, cfg: &ModelConfig) -> Self {
        let (e, h) = (cfg.embed_dim, cfg.hidden);
        Params {
            embedding: Matrix::zeros(vocab, e),
            enc_fwd: LstmParams::zeros(e, h),
            enc_bwd: LstmParams::zeros(e, h),
            dec: DecoderParams {
                w_prev: Matrix::zeros(4 * h, e),
                w_root: Matrix::zeros(4 * h, e),
                w_ctx: Matrix::zeros(4 * h, 2 * h),
                w_morph: Matrix::zeros(4 * h, features),
                w_h: Matrix::zeros(4 * h, h),
                b: Matrix::zeros(4 * h, 1),
            },
            out_w: Matrix::zeros(vocab, h),
            out_b: Matrix::zeros(vocab, 1),
        }
    }

    pub fn init(vocab: usize, features: usize, cfg: &ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e, h) = (cfg.embed_dim, cfg.hidden);
        let s = 1.0 / (h as f64).sqrt();
        let mut embedding = Matrix::uniform(vocab, e, 1.0, &mut rng);
        embedding.row_mut(PAD).fill(0.0);
        let enc_fwd = LstmParams::init(e, h, &mut rng);
        let enc_bwd = LstmParams::init(e, h, &mut rng);
        let mut b = Matrix::uniform(4 * h, 1, s, &mut rng);
        lstm::forget_bias(&mut b.data, h);
        let dec = DecoderParams {
            w_prev: Matrix::uniform(4 * h, e, s, &mut rng),
            w_root: Matrix::uniform(4 * h, e, s, &mut rng),
            w_ctx: Matrix::uniform(4 * h, 2 * h, s, &mut rng),
            w_morph: Matrix::uniform(4 * h, features, s, &mut rng),
            w_h: Matrix::uniform(4 * h, h, s, &mut rng),
            b,
        };
        Params {
            embedding,
            enc_fwd,
            enc_bwd,
            dec,
            out_w: Matrix::uniform(vocab, h, s, &mut rng),
            out_b: Matrix::zeros(vocab, 1),
        }
    }

    /// Tensors in [`BLOCK_NAMES`] order.
    pub fn blocks(&self) -> [&Matrix; 15] {
        [
            &self.embedding,
            &self.enc_fwd.w_x,
            &self.enc_fwd.w_h,
            &self.enc_fwd.b,
            &self.enc_bwd.w_x,
            &self.enc_bwd.w_h,
            &self.enc_bwd.b,
            &self.dec.w_prev,
            &self.dec.w_root,
            &self.dec.w_ctx,
            &self.dec.w_morph,
            &self.dec.w_h,
            &self.dec.b,
            &self.out_w,
            &self.out_b,
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut Matrix; 15] {
        [
            &mut self.embedding,
            &mut self.enc_fwd.w_x,
            &mut self.enc_fwd.w_h,
            &mut self.enc_fwd.b,
            &mut self.enc_bwd.w_x,
            &mut self.enc_bwd.w_h,
            &mut self.enc_bwd.b,
            &mut self.dec.w_prev,
            &mut self.dec.w_root,
            &mut self.dec.w_ctx,
            &mut self.dec.w_morph,
            &mut self.dec.w_h,
            &mut self.dec.b,
            &mut self.out_w,
            &mut self.out_b,
        ]
    }

    pub fn num_scalars(&self) -> usize {
        self.blocks().iter().map(|m| m.data.len()).sum()
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for m in z.blocks_mut() {
            m.fill(0.0);
        }
        z
    }
}

/// A training or scoring example already mapped to indices.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedExample {
    pub lemma: Vec<usize>,
    /// Gold output characters followed by EOS.
    pub target: Vec<usize>,
    pub morph: Vec<f64>,
}

/// Per-position encoder output and the summary vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Encoding {
    /// One `2H` vector per lemma position: forward state ++ backward state.
    pub context: Vec<Vec<f64>>,
    /// Final forward state ++ final backward state.
    pub summary: Vec<f64>,
}

/// Recurrent state carried between decoder steps.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl DecoderState {
    pub fn zeros(hidden: usize) -> Self {
        DecoderState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

pub(crate) struct EncoderTrace {
    pub fwd: Vec<StepCache>,
    /// `bwd[k]` processed lemma position `n - 1 - k`.
    pub bwd: Vec<StepCache>,
    pub summary: Vec<f64>,
}

pub(crate) struct ExampleTrace {
    pub enc: EncoderTrace,
    /// Decoder input character indices per step.
    pub prev: Vec<usize>,
    pub root: Vec<usize>,
    pub steps: Vec<StepCache>,
    pub probs: Vec<Vec<f64>>,
    pub loss: f64,
}

fn embed<'a>(params: &'a Params, idx: usize, zero: &'a [f64]) -> &'a [f64] {
    if idx == PAD {
        zero
    } else {
        params.embedding.row(idx)
    }
}

pub(crate) fn check_indices(params: &Params, ids: &[usize]) -> Result<(), ReinflectError> {
    match ids.iter().find(|&&i| i >= params.embedding.rows) {
        Some(&i) => Err(ReinflectError::BadIndex(i)),
        None => Ok(()),
    }
}

pub(crate) fn encode_trace(params: &Params, lemma: &[usize]) -> Result<EncoderTrace, ReinflectError> {
    if lemma.is_empty() {
        return Err(ReinflectError::EmptyInput);
    }
    check_indices(params, lemma)?;
    let hid = params.enc_fwd.hidden();
    let zero = vec![0.0; params.embedding.cols];
    let run = |p: &LstmParams, order: &mut dyn Iterator<Item = usize>| {
        let mut h = vec![0.0; hid];
        let mut c = vec![0.0; hid];
        let mut caches = Vec::with_capacity(lemma.len());
        for pos in order {
            let mut z = p.b.data.clone();
            p.w_x.mul_vec_add(embed(params, lemma[pos], &zero), &mut z);
            let cache = lstm::step(z, &p.w_h, &h, &c);
            h.clone_from(&cache.h);
            c.clone_from(&cache.c);
            caches.push(cache);
        }
        caches
    };
    let n = lemma.len();
    let fwd = run(&params.enc_fwd, &mut (0..n));
    let bwd = run(&params.enc_bwd, &mut (0..n).rev());
    let mut summary = fwd[n - 1].h.clone();
    summary.extend_from_slice(&bwd[n - 1].h);
    Ok(EncoderTrace { fwd, bwd, summary })
}

pub(crate) fn encode(params: &Params, lemma: &[usize]) -> Result<Encoding, ReinflectError> {
    let tr = encode_trace(params, lemma)?;
    let n = lemma.len();
    let context = (0..n)
        .map(|pos| {
            let mut v = tr.fwd[pos].h.clone();
            v.extend_from_slice(&tr.bwd[n - 1 - pos].h);
            v
        })
        .collect();
    Ok(Encoding {
        context,
        summary: tr.summary,
    })
}

/// Pre-activation contribution of the inputs that are constant over an
/// output sequence: bias, summary and morphological features.
pub(crate) fn decoder_const(params: &Params, summary: &[f64], morph: &[f64]) -> Vec<f64> {
    let mut z = params.dec.b.data.clone();
    params.dec.w_ctx.mul_vec_add(summary, &mut z);
    params.dec.w_morph.mul_vec_add(morph, &mut z);
    z
}

pub(crate) fn decoder_step(
    params: &Params,
    z_const: &[f64],
    prev_emb: &[f64],
    root_emb: &[f64],
    h: &[f64],
    c: &[f64],
) -> (StepCache, Vec<f64>) {
    let mut z = z_const.to_vec();
    params.dec.w_prev.mul_vec_add(prev_emb, &mut z);
    params.dec.w_root.mul_vec_add(root_emb, &mut z);
    let cache = lstm::step(z, &params.dec.w_h, h, c);
    let mut logits = params.out_b.data.clone();
    params.out_w.mul_vec_add(&cache.h, &mut logits);
    (cache, logits)
}

pub(crate) fn forward(params: &Params, ex: &EncodedExample) -> Result<ExampleTrace, ReinflectError> {
    check_indices(params, &ex.target)?;
    if ex.morph.len() != params.dec.w_morph.cols {
        return Err(ReinflectError::Width {
            what: "morphological feature vector",
            expected: params.dec.w_morph.cols,
            got: ex.morph.len(),
        });
    }
    let enc = encode_trace(params, &ex.lemma)?;
    let hid = params.dec.w_h.cols;
    let zero = vec![0.0; params.embedding.cols];
    let z_const = decoder_const(params, &enc.summary, &ex.morph);

    let steps_n = ex.target.len();
    let mut prev = Vec::with_capacity(steps_n);
    let mut root = Vec::with_capacity(steps_n);
    let mut steps = Vec::with_capacity(steps_n);
    let mut probs = Vec::with_capacity(steps_n);
    let mut loss = 0.0;
    let mut h = vec![0.0; hid];
    let mut c = vec![0.0; hid];
    for t in 0..steps_n {
        let p = if t == 0 { BOS } else { ex.target[t - 1] };
        let r = ex.lemma.get(t).copied().unwrap_or(PAD);
        let (cache, logits) = decoder_step(
            params,
            &z_const,
            embed(params, p, &zero),
            embed(params, r, &zero),
            &h,
            &c,
        );
        let lse = log_sum_exp(&logits);
        loss += lse - logits[ex.target[t]];
        probs.push(logits.iter().map(|&l| (l - lse).exp()).collect());
        h.clone_from(&cache.h);
        c.clone_from(&cache.c);
        prev.push(p);
        root.push(r);
        steps.push(cache);
    }
    Ok(ExampleTrace {
        enc,
        prev,
        root,
        steps,
        probs,
        loss: loss / steps_n as f64,
    })
}

/// Accumulates `scale · ∂loss/∂params` for one example into `grads`.
pub(crate) fn backward(
    params: &Params,
    ex: &EncodedExample,
    tr: &ExampleTrace,
    scale: f64,
    grads: &mut Params,
) {
    let hid = params.dec.w_h.cols;
    let zero = vec![0.0; params.embedding.cols];
    let steps_n = tr.steps.len();
    let per_step = scale / steps_n as f64;

    let mut dh_next = vec![0.0; hid];
    let mut dc_next = vec![0.0; hid];
    let mut dz_sum = vec![0.0; 4 * hid];
    let mut demb = vec![0.0; params.embedding.cols];
    for t in (0..steps_n).rev() {
        let cache = &tr.steps[t];
        let mut dlogits: Vec<f64> = tr.probs[t].iter().map(|p| p * per_step).collect();
        dlogits[ex.target[t]] -= per_step;
        grads.out_w.outer_add(&dlogits, &cache.h);
        for (g, d) in grads.out_b.data.iter_mut().zip(&dlogits) {
            *g += d;
        }
        let mut dh = dh_next;
        params.out_w.mul_t_vec_add(&dlogits, &mut dh);
        let (dz, dc_prev) = lstm::step_backward(cache, &dh, &dc_next);

        let (p, r) = (tr.prev[t], tr.root[t]);
        grads.dec.w_prev.outer_add(&dz, embed(params, p, &zero));
        grads.dec.w_root.outer_add(&dz, embed(params, r, &zero));
        grads.dec.w_h.outer_add(&dz, &cache.h_prev);
        if p != PAD {
            demb.iter_mut().for_each(|x| *x = 0.0);
            params.dec.w_prev.mul_t_vec_add(&dz, &mut demb);
            super::tensor::axpy(1.0, &demb, grads.embedding.row_mut(p));
        }
        if r != PAD {
            demb.iter_mut().for_each(|x| *x = 0.0);
            params.dec.w_root.mul_t_vec_add(&dz, &mut demb);
            super::tensor::axpy(1.0, &demb, grads.embedding.row_mut(r));
        }
        dh_next = vec![0.0; hid];
        params.dec.w_h.mul_t_vec_add(&dz, &mut dh_next);
        dc_next = dc_prev;
        super::tensor::axpy(1.0, &dz, &mut dz_sum);
    }
    super::tensor::axpy(1.0, &dz_sum, &mut grads.dec.b.data);
    grads.dec.w_ctx.outer_add(&dz_sum, &tr.enc.summary);
    grads.dec.w_morph.outer_add(&dz_sum, &ex.morph);
    let mut dsummary = vec![0.0; 2 * hid];
    params.dec.w_ctx.mul_t_vec_add(&dz_sum, &mut dsummary);

    let n = ex.lemma.len();
    encoder_backward(
        &params.enc_fwd,
        &mut grads.enc_fwd,
        &tr.enc.fwd,
        (0..n).map(|k| ex.lemma[k]),
        &dsummary[..hid],
        params,
        &mut grads.embedding,
    );
    encoder_backward(
        &params.enc_bwd,
        &mut grads.enc_bwd,
        &tr.enc.bwd,
        (0..n).map(|k| ex.lemma[n - 1 - k]),
        &dsummary[hid..],
        params,
        &mut grads.embedding,
    );
}

/// Backprop through one encoder direction whose only loss-connected output
/// is its final hidden state. `inputs` yields the character fed at each
/// processing step, in processing order.
fn encoder_backward<I: Iterator<Item = usize>>(
    p: &LstmParams,
    g: &mut LstmParams,
    caches: &[StepCache],
    inputs: I,
    dh_final: &[f64],
    params: &Params,
    g_emb: &mut Matrix,
) {
    let hid = p.hidden();
    let zero = vec![0.0; params.embedding.cols];
    let inputs: Vec<usize> = inputs.collect();
    let mut dh = dh_final.to_vec();
    let mut dc = vec![0.0; hid];
    let mut demb = vec![0.0; params.embedding.cols];
    for k in (0..caches.len()).rev() {
        let cache = &caches[k];
        let (dz, dc_prev) = lstm::step_backward(cache, &dh, &dc);
        let x = inputs[k];
        g.w_x.outer_add(&dz, embed(params, x, &zero));
        g.w_h.outer_add(&dz, &cache.h_prev);
        super::tensor::axpy(1.0, &dz, &mut g.b.data);
        if x != PAD {
            demb.iter_mut().for_each(|v| *v = 0.0);
            p.w_x.mul_t_vec_add(&dz, &mut demb);
            super::tensor::axpy(1.0, &demb, g_emb.row_mut(x));
        }
        dh = vec![0.0; hid];
        p.w_h.mul_t_vec_add(&dz, &mut dh);
        dc = dc_prev;
    }
}

/// Greedy decoding. Reserved symbols other than EOS are never emitted.
pub(crate) fn greedy(
    params: &Params,
    vocab: &CharVocab,
    lemma: &[usize],
    morph: &[f64],
    max_len: usize,
) -> Result<String, ReinflectError> {
    let enc = encode_trace(params, lemma)?;
    let hid = params.dec.w_h.cols;
    let zero = vec![0.0; params.embedding.cols];
    let z_const = decoder_const(params, &enc.summary, morph);
    let mut h = vec![0.0; hid];
    let mut c = vec![0.0; hid];
    let mut prev = BOS;
    let mut out = String::new();
    for t in 0..max_len {
        let r = lemma.get(t).copied().unwrap_or(PAD);
        let (cache, logits) = decoder_step(
            params,
            &z_const,
            embed(params, prev, &zero),
            embed(params, r, &zero),
            &h,
            &c,
        );
        let mut best = EOS;
        for (i, &l) in logits.iter().enumerate().skip(super::vocab::RESERVED) {
            if l > logits[best] {
                best = i;
            }
        }
        if best == EOS {
            break;
        }
        if let Some(ch) = vocab.char_at(best) {
            out.push(ch);
        }
        prev = best;
        h = cache.h;
        c = cache.c;
    }
    Ok(out)
}
