use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::Params;
use super::{EncodedExample, ReinflectError, Seq2SeqModel, TrainExample};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Global gradient-norm clipping threshold.
    pub clip_norm: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            lr: 1e-3,
            batch_size: 32,
            seed: 1,
            clip_norm: 5.0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trained {
    pub model: Seq2SeqModel,
    /// Mean training loss of each epoch.
    pub loss_trace: Vec<f64>,
    /// Characters that had to be mapped to UNK while encoding the data.
    pub unk_chars: usize,
}

struct Adam {
    m: Params,
    v: Params,
    t: i32,
}

impl Adam {
    fn new(p: &Params) -> Self {
        Adam {
            m: p.zeros_like(),
            v: p.zeros_like(),
            t: 0,
        }
    }

    fn step(&mut self, params: &mut Params, grads: &Params, cfg: &TrainConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t);
        let bc2 = 1.0 - cfg.beta2.powi(self.t);
        let blocks = params.blocks_mut().into_iter();
        let ms = self.m.blocks_mut().into_iter();
        let vs = self.v.blocks_mut().into_iter();
        for (((p, g), m), v) in blocks.zip(grads.blocks()).zip(ms).zip(vs) {
            for i in 0..p.data.len() {
                let gi = g.data[i];
                m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * gi;
                v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * gi * gi;
                let mh = m.data[i] / bc1;
                let vh = v.data[i] / bc2;
                p.data[i] -= cfg.lr * mh / (vh.sqrt() + cfg.eps);
            }
        }
        // PAD embedding stays zero.
        params.embedding.row_mut(super::PAD).fill(0.0);
    }
}

fn clip(grads: &mut Params, max_norm: f64) -> f64 {
    let norm = grads
        .blocks()
        .iter()
        .flat_map(|m| m.data.iter())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        for m in grads.blocks_mut() {
            m.data.iter_mut().for_each(|g| *g *= s);
        }
    }
    norm
}

fn validate(model: &Seq2SeqModel, data: &[TrainExample]) -> Result<(), ReinflectError> {
    for (index, ex) in data.iter().enumerate() {
        let reason = if ex.lemma.is_empty() || ex.target.is_empty() {
            "empty lemma or target"
        } else if ex.lemma.chars().count() > model.config.max_len
            || ex.target.chars().count() > model.config.max_len
        {
            "longer than max_len"
        } else {
            continue;
        };
        return Err(ReinflectError::InvalidExample {
            index,
            reason: reason.to_string(),
        });
    }
    Ok(())
}

/// Trains with Adam and teacher forcing. Deterministic for a fixed seed:
/// the seed drives only the per-epoch shuffle.
pub fn train(
    mut model: Seq2SeqModel,
    data: &[TrainExample],
    cfg: &TrainConfig,
) -> Result<Trained, ReinflectError> {
    if data.is_empty() {
        return Err(ReinflectError::NoData);
    }
    validate(&model, data)?;
    let mut unk_chars = 0;
    let encoded: Vec<EncodedExample> = data
        .iter()
        .map(|ex| {
            let (e, u) = model.encode_example(ex);
            unk_chars += u;
            e
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(&model.params);
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut last_good = model.clone();
    let batch_size = cfg.batch_size.max(1);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch_size) {
            let batch: Vec<EncodedExample> = chunk.iter().map(|&i| encoded[i].clone()).collect();
            let (loss, mut grads) = match model.grad(&batch) {
                Ok(r) => r,
                Err(ReinflectError::NonFiniteGradient(_)) => {
                    return Err(ReinflectError::Diverged {
                        epoch,
                        last_good: Box::new(last_good),
                    })
                }
                Err(e) => return Err(e),
            };
            if !loss.is_finite() {
                return Err(ReinflectError::Diverged {
                    epoch,
                    last_good: Box::new(last_good),
                });
            }
            epoch_loss += loss * chunk.len() as f64;
            let norm = clip(&mut grads, cfg.clip_norm);
            debug!("epoch {} batch loss {:.5} grad norm {:.3}", epoch + 1, loss, norm);
            adam.step(&mut model.params, &grads, cfg);
        }
        let mean = epoch_loss / encoded.len() as f64;
        let params_finite = model
            .params
            .blocks()
            .iter()
            .all(|m| m.data.iter().all(|v| v.is_finite()));
        if !mean.is_finite() || !params_finite {
            return Err(ReinflectError::Diverged {
                epoch,
                last_good: Box::new(last_good),
            });
        }
        info!("epoch {} mean loss {:.6}", epoch + 1, mean);
        loss_trace.push(mean);
        last_good = model.clone();
    }
    Ok(Trained {
        model,
        loss_trace,
        unk_chars,
    })
}
