//! Character-level encoder-decoder for lemma reinflection.
//!
//! A lemma is embedded character by character (64 dimensions by default),
//! encoded by a bidirectional LSTM, and decoded into the inflected form by an
//! LSTM conditioned on the encoder summary and a binary vector of
//! morphological tags. Everything runs on a small hand-written f64 kernel
//! ([`tensor`], [`lstm`]) with explicit backpropagation.

mod checkpoint;
pub mod lstm;
mod model;
pub mod synth;
pub mod tensor;
mod train;
mod vocab;

use std::fmt;

use thiserror::Error;

use crate::diag::Diagnostic;
use crate::morphmap::{build_inventory, feature_vector, MorphTag};

pub use checkpoint::CheckpointError;
pub use model::{
    DecoderParams, DecoderState, EncodedExample, Encoding, ModelConfig, Params, BLOCK_NAMES,
};
pub use train::{TrainConfig, Trained};
pub use vocab::{CharVocab, BOS, EOS, PAD, RESERVED, UNK};

#[derive(Debug, Error)]
pub enum ReinflectError {
    #[error("empty input")]
    EmptyInput,
    #[error("character index {0} is outside the vocabulary")]
    BadIndex(usize),
    #[error("{what} has width {got}, expected {expected}")]
    Width {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("empty batch")]
    EmptyBatch,
    #[error("non-finite gradient in parameter block {0}")]
    NonFiniteGradient(&'static str),
    #[error("invalid training example {index}: {reason}")]
    InvalidExample { index: usize, reason: String },
    #[error("no training data")]
    NoData,
    #[error("training diverged in epoch {epoch}")]
    Diverged {
        epoch: usize,
        /// Model as it was at the end of the last finite epoch.
        last_good: Box<Seq2SeqModel>,
    },
}

/// One `(lemma, tag) → target` supervision triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainExample {
    pub lemma: String,
    pub tag: MorphTag,
    pub target: String,
}

impl TrainExample {
    pub fn new(lemma: &str, tag: MorphTag, target: &str) -> Self {
        TrainExample {
            lemma: lemma.to_string(),
            tag,
            target: target.to_string(),
        }
    }
}

impl fmt::Display for TrainExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.lemma, self.tag, self.target)
    }
}

/// Lenient reader for `lemma<TAB>TAG<TAB>target` lines. Blank lines and `#`
/// comments are ignored; malformed lines are skipped with a diagnostic.
pub fn parse_training_data(text: &str) -> (Vec<TrainExample>, Vec<Diagnostic>) {
    let mut out = Vec::new();
    let mut diags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let parsed = match cols.as_slice() {
            [lemma, tag, target] if !lemma.is_empty() && !target.is_empty() => tag
                .parse::<MorphTag>()
                .map(|t| TrainExample::new(lemma, t, target))
                .map_err(|e| e.to_string()),
            _ => Err("expected lemma<TAB>TAG<TAB>target".to_string()),
        };
        match parsed {
            Ok(ex) => out.push(ex),
            Err(msg) => diags.push(Diagnostic::at_line(i + 1, msg)),
        }
    }
    (out, diags)
}

/// The trained reinflection network together with its character vocabulary
/// and tag inventory.
#[derive(Clone, Debug, PartialEq)]
pub struct Seq2SeqModel {
    pub vocab: CharVocab,
    /// Sorted tag strings; position `i` of a feature vector is tag `i`.
    pub inventory: Vec<String>,
    pub config: ModelConfig,
    pub params: Params,
}

impl Seq2SeqModel {
    /// Randomly initialized model.
    pub fn new(vocab: CharVocab, inventory: Vec<String>, config: ModelConfig, seed: u64) -> Self {
        let params = Params::init(vocab.len(), inventory.len(), &config, seed);
        Seq2SeqModel {
            vocab,
            inventory,
            config,
            params,
        }
    }

    /// Builds vocabulary and inventory from `data`, then initializes.
    pub fn for_data(data: &[TrainExample], config: ModelConfig, seed: u64) -> Self {
        let vocab = CharVocab::from_words(
            data.iter()
                .flat_map(|e| [e.lemma.as_str(), e.target.as_str()]),
        );
        let inventory = build_inventory(data.iter().map(|e| &e.tag));
        Self::new(vocab, inventory, config, seed)
    }

    pub fn hidden(&self) -> usize {
        self.config.hidden
    }

    pub fn embed_dim(&self) -> usize {
        self.config.embed_dim
    }

    pub fn features(&self) -> usize {
        self.inventory.len()
    }

    /// Total decoder input width: previous-character embedding, aligned
    /// lemma-character embedding, encoder summary and feature vector.
    pub fn decoder_input_width(&self) -> usize {
        2 * self.embed_dim() + 2 * self.hidden() + self.features()
    }

    /// Feature vector for `tag` over this model's inventory.
    pub fn morph_vector(&self, tag: &MorphTag) -> Vec<f64> {
        feature_vector(tag, &self.inventory).0
    }

    /// Embedding row for a character index; the PAD embedding is all zeros.
    pub fn embedding_of(&self, idx: usize) -> Vec<f64> {
        if idx == PAD {
            vec![0.0; self.embed_dim()]
        } else {
            self.params.embedding.row(idx).to_vec()
        }
    }

    /// Maps an example to indices. Out-of-vocabulary characters become UNK;
    /// the number of substitutions is returned alongside.
    pub fn encode_example(&self, ex: &TrainExample) -> (EncodedExample, usize) {
        let (lemma, u1) = self.vocab.encode(&ex.lemma);
        let (mut target, u2) = self.vocab.encode(&ex.target);
        target.push(EOS);
        let morph = self.morph_vector(&ex.tag);
        (EncodedExample { lemma, target, morph }, u1 + u2)
    }

    /// Runs the bidirectional encoder.
    pub fn encode(&self, lemma: &[usize]) -> Result<Encoding, ReinflectError> {
        model::encode(&self.params, lemma)
    }

    /// One decoder step: LSTM update on the concatenated inputs, then the
    /// output projection. Returns unnormalized logits and the new state.
    pub fn decode_step(
        &self,
        prev_char_embedding: &[f64],
        root_char_embedding: &[f64],
        encoder_summary: &[f64],
        morph_vec: &[f64],
        state: &DecoderState,
    ) -> Result<(Vec<f64>, DecoderState), ReinflectError> {
        let h = self.hidden();
        let checks: [(&'static str, usize, usize); 6] = [
            ("previous character embedding", self.embed_dim(), prev_char_embedding.len()),
            ("lemma character embedding", self.embed_dim(), root_char_embedding.len()),
            ("encoder summary", 2 * h, encoder_summary.len()),
            ("morphological feature vector", self.features(), morph_vec.len()),
            ("decoder hidden state", h, state.h.len()),
            ("decoder cell state", h, state.c.len()),
        ];
        for (what, expected, got) in checks {
            if expected != got {
                return Err(ReinflectError::Width { what, expected, got });
            }
        }
        let z_const = model::decoder_const(&self.params, encoder_summary, morph_vec);
        let (cache, logits) = model::decoder_step(
            &self.params,
            &z_const,
            prev_char_embedding,
            root_char_embedding,
            &state.h,
            &state.c,
        );
        Ok((
            logits,
            DecoderState {
                h: cache.h,
                c: cache.c,
            },
        ))
    }

    /// Mean per-position cross-entropy (natural log) of the gold target plus
    /// EOS under teacher forcing.
    pub fn loss(&self, ex: &TrainExample) -> Result<f64, ReinflectError> {
        let (enc, _) = self.encode_example(ex);
        self.loss_encoded(&enc)
    }

    pub fn loss_encoded(&self, ex: &EncodedExample) -> Result<f64, ReinflectError> {
        Ok(model::forward(&self.params, ex)?.loss)
    }

    /// Mean loss over a batch.
    pub fn batch_loss(&self, batch: &[EncodedExample]) -> Result<f64, ReinflectError> {
        if batch.is_empty() {
            return Err(ReinflectError::EmptyBatch);
        }
        let mut total = 0.0;
        for ex in batch {
            total += self.loss_encoded(ex)?;
        }
        Ok(total / batch.len() as f64)
    }

    /// Gradient of [`Seq2SeqModel::batch_loss`] with respect to every
    /// parameter, returned together with the loss.
    pub fn grad(&self, batch: &[EncodedExample]) -> Result<(f64, Params), ReinflectError> {
        if batch.is_empty() {
            return Err(ReinflectError::EmptyBatch);
        }
        let mut grads = self.params.zeros_like();
        let scale = 1.0 / batch.len() as f64;
        let mut total = 0.0;
        for ex in batch {
            let tr = model::forward(&self.params, ex)?;
            total += tr.loss;
            model::backward(&self.params, ex, &tr, scale, &mut grads);
        }
        for (name, block) in BLOCK_NAMES.iter().zip(grads.blocks()) {
            if block.data.iter().any(|v| !v.is_finite()) {
                return Err(ReinflectError::NonFiniteGradient(name));
            }
        }
        Ok((total * scale, grads))
    }

    /// Greedy decoding until EOS or `max_len` characters.
    pub fn predict(&self, lemma: &str, tag: &MorphTag) -> Result<String, ReinflectError> {
        let (ids, _) = self.vocab.encode(lemma);
        let morph = self.morph_vector(tag);
        model::greedy(&self.params, &self.vocab, &ids, &morph, self.config.max_len)
    }

    /// Serializes to the versioned checkpoint container.
    pub fn to_bytes(&self) -> Vec<u8> {
        checkpoint::write(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        checkpoint::read(bytes)
    }
}

/// Fraction of examples whose prediction equals the target exactly.
pub fn exact_match(model: &Seq2SeqModel, data: &[TrainExample]) -> Result<f64, ReinflectError> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for ex in data {
        if model.predict(&ex.lemma, &ex.tag)? == ex.target {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

pub use train::train;
