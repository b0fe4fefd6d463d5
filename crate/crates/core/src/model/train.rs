use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encoder::{backward, forward, logits_from_hidden};
use super::params::{Parameters, EMBEDDING, OUTPUT_BIAS};
use crate::corpus::{Lexicon, Stimulus, TokenId};
use crate::error::{Error, Result};
use crate::nn::ops::{axpy, softmax_cross_entropy};
use crate::nn::{optimizer_step, Gradients, OptimizerKind, OptimizerState, TrainableFilter};
use crate::rng;

/// A sequence with one or more masked positions and the tokens expected there.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedExample {
    pub tokens: Vec<TokenId>,
    pub targets: Vec<(usize, TokenId)>,
}

impl From<&Stimulus> for MaskedExample {
    fn from(s: &Stimulus) -> Self {
        MaskedExample { tokens: s.tokens.clone(), targets: vec![(s.mask_position, s.target)] }
    }
}

/// Examples per parallel work unit. Fixed so the reduction order, and hence
/// every bit of the result, is independent of the thread count.
const CHUNK: usize = 8;

fn example_grads(params: &Parameters, ex: &MaskedExample, grads: &mut Gradients) -> f64 {
    let d = params.config.d_model;
    let fwd = forward(params, &ex.tokens);
    let mut dhidden = vec![0.0; fwd.hidden.len()];
    let mut loss = 0.0;
    for &(pos, target) in &ex.targets {
        let h = &fwd.hidden[pos * d..(pos + 1) * d];
        let logits = logits_from_hidden(params, h);
        let (l, dlogits) = softmax_cross_entropy(&logits, target);
        loss += l;
        let emb = params.tensors.get(EMBEDDING);
        let dh = &mut dhidden[pos * d..(pos + 1) * d];
        for (r, &g) in dlogits.iter().enumerate() {
            axpy(g, emb.row(r), dh);
        }
        let de = grads.get_mut(EMBEDDING);
        for (r, &g) in dlogits.iter().enumerate() {
            axpy(g, h, de.row_mut(r));
        }
        axpy(1.0, &dlogits, grads.get_mut(OUTPUT_BIAS).data_mut());
    }
    backward(params, &ex.tokens, &fwd, dhidden, grads);
    loss
}

/// Summed loss, summed gradients, and the number of predictions.
fn accumulate(params: &Parameters, examples: &[MaskedExample]) -> (f64, Gradients, usize) {
    let parts: Vec<(f64, Gradients)> = examples
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut g = params.tensors.zeros_like();
            let loss = chunk.iter().map(|ex| example_grads(params, ex, &mut g)).sum();
            (loss, g)
        })
        .collect();
    let mut parts = parts.into_iter();
    let (mut loss, mut grads) = parts.next().unwrap_or_else(|| (0.0, params.tensors.zeros_like()));
    for (l, g) in parts {
        loss += l;
        grads.add_assign(&g);
    }
    let n = examples.iter().map(|e| e.targets.len()).sum();
    (loss, grads, n)
}

/// Mean masked-position cross-entropy over the batch and its exact gradient.
pub fn loss_and_grads(params: &Parameters, batch: &[Stimulus]) -> (f64, Gradients) {
    assert!(!batch.is_empty(), "empty batch");
    let examples: Vec<MaskedExample> = batch.iter().map(MaskedExample::from).collect();
    mean_loss_and_grads(params, &examples)
}

/// Summed (not averaged) loss over the batch and its gradient.
pub fn loss_and_grads_sum(params: &Parameters, batch: &[Stimulus]) -> (f64, Gradients) {
    let examples: Vec<MaskedExample> = batch.iter().map(MaskedExample::from).collect();
    let (loss, grads, _) = accumulate(params, &examples);
    (loss, grads)
}

pub(crate) fn mean_loss_and_grads(params: &Parameters, examples: &[MaskedExample]) -> (f64, Gradients) {
    let (loss, mut grads, n) = accumulate(params, examples);
    assert!(n > 0, "batch has no masked predictions");
    let k = 1.0 / n as f64;
    grads.scale(k);
    (loss * k, grads)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Probability of masking each content-word position; every sentence
    /// gets at least one mask.
    pub mask_prob: f64,
    pub optimizer: OptimizerKind,
}

impl Default for BaseTrainConfig {
    fn default() -> Self {
        BaseTrainConfig {
            epochs: 5,
            batch_size: 32,
            learning_rate: 1e-3,
            mask_prob: 0.15,
            optimizer: OptimizerKind::adam(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
    /// `None` when no held-out items were supplied.
    pub heldout_accuracy: Option<f64>,
    pub seconds: f64,
}

fn mask_sentence(sentence: &[TokenId], lexicon: &Lexicon, mask_prob: f64, rng: &mut crate::rng::Rng) -> MaskedExample {
    let content: Vec<usize> = (0..sentence.len()).filter(|&i| lexicon.category_of_id(sentence[i]).is_some()).collect();
    let mut chosen: Vec<usize> = content.iter().copied().filter(|_| rng.random_bool(mask_prob)).collect();
    if chosen.is_empty() && !content.is_empty() {
        chosen.push(content[rng.random_range(0..content.len())]);
    }
    let mut tokens = sentence.to_vec();
    let targets = chosen
        .into_iter()
        .map(|i| {
            tokens[i] = lexicon.mask_id();
            (i, sentence[i])
        })
        .collect();
    MaskedExample { tokens, targets }
}

/// Masked-LM training of every parameter on `corpus`. Masks are redrawn each
/// epoch; sentence order is reshuffled each epoch. Deterministic per seed.
pub fn train_base(
    params: &Parameters,
    corpus: &[Vec<TokenId>],
    lexicon: &Lexicon,
    heldout: &[Stimulus],
    hyper: &BaseTrainConfig,
    seed: u64,
) -> Result<(Parameters, TrainReport)> {
    assert!(!corpus.is_empty(), "empty corpus");
    assert!(hyper.batch_size > 0, "batch_size must be positive");
    let start = Instant::now();
    let mut params = params.clone();
    let mut state = OptimizerState::new(hyper.optimizer, hyper.learning_rate);
    let filter = TrainableFilter::all(&params.tensors);
    let mut rng = rng::stream(seed, "base-training");
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut epoch_losses = Vec::with_capacity(hyper.epochs);
    let mut step = 0;
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for idx in order.chunks(hyper.batch_size) {
            let batch: Vec<MaskedExample> = idx
                .iter()
                .map(|&i| mask_sentence(&corpus[i], lexicon, hyper.mask_prob, &mut rng))
                .filter(|e| !e.targets.is_empty())
                .collect();
            if batch.is_empty() {
                continue;
            }
            let (loss, grads) = mean_loss_and_grads(&params, &batch);
            if !loss.is_finite() || !grads.is_finite() {
                return Err(Error::Divergence { context: format!("base training epoch {epoch}"), step });
            }
            optimizer_step(&mut params.tensors, &grads, &mut state, &filter);
            total += loss;
            batches += 1;
            step += 1;
        }
        let mean = total / batches.max(1) as f64;
        log::info!("base epoch {}/{}: mean loss {mean:.4}", epoch + 1, hyper.epochs);
        epoch_losses.push(mean);
    }
    let heldout_accuracy = (!heldout.is_empty()).then(|| masked_accuracy(&params, lexicon, heldout));
    let report = TrainReport { epoch_losses, heldout_accuracy, seconds: start.elapsed().as_secs_f64() };
    Ok((params, report))
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Fraction of items whose arg-max prediction at the mask is any word of
/// the item's category.
pub fn masked_accuracy(params: &Parameters, lexicon: &Lexicon, heldout: &[Stimulus]) -> f64 {
    assert!(!heldout.is_empty(), "empty held-out set");
    let hits: usize = heldout
        .par_iter()
        .map(|s| {
            let logits = super::mlm_logits(params, &s.tokens, s.mask_position);
            usize::from(lexicon.category_of_id(argmax(logits.data())) == Some(s.category))
        })
        .sum();
    hits as f64 / heldout.len() as f64
}
