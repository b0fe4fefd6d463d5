use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{Lexicon, MAX_SENTENCE_LEN};
use crate::error::{Error, Result};
use crate::nn::{NamedTensors, Tensor};
use crate::rng;

pub const EMBEDDING: &str = "embedding";
pub const POSITIONAL: &str = "positional";
pub const OUTPUT_BIAS: &str = "output_bias";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    pub ffn_multiplier: usize,
    pub max_seq_len: usize,
    pub mask_token_id: usize,
    pub pad_token_id: usize,
    /// Standard deviation of the normal initializer for every weight matrix.
    pub init_std: f64,
}

impl ModelConfig {
    /// Toy defaults sized for `lexicon`: width 64, two layers, four heads.
    pub fn for_lexicon(lexicon: &Lexicon) -> Self {
        ModelConfig {
            vocab_size: lexicon.vocab_size(),
            d_model: 64,
            n_layers: 2,
            n_heads: 4,
            ffn_multiplier: 4,
            max_seq_len: 16,
            mask_token_id: lexicon.mask_id(),
            pad_token_id: lexicon.pad_id(),
            init_std: 0.02,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.d_model == 0 || self.n_heads == 0 || !self.d_model.is_multiple_of(self.n_heads) {
            return bad(format!("d_model {} must be a positive multiple of n_heads {}", self.d_model, self.n_heads));
        }
        if self.ffn_multiplier == 0 || self.max_seq_len == 0 {
            return bad("ffn_multiplier and max_seq_len must be positive".into());
        }
        if self.mask_token_id >= self.vocab_size || self.pad_token_id >= self.vocab_size {
            return bad("mask/pad token ids must lie inside the vocabulary".into());
        }
        if !(self.init_std.is_finite() && self.init_std > 0.0) {
            return bad(format!("init_std must be positive, got {}", self.init_std));
        }
        Ok(())
    }

    /// Also checks the vocabulary and sequence length cover `lexicon`.
    pub fn validate_for(&self, lexicon: &Lexicon) -> Result<()> {
        self.validate()?;
        if self.vocab_size != lexicon.vocab_size() {
            return Err(Error::Config(format!(
                "vocab_size {} does not match the lexicon's {} tokens",
                self.vocab_size,
                lexicon.vocab_size()
            )));
        }
        if self.max_seq_len < MAX_SENTENCE_LEN {
            return Err(Error::Config(format!(
                "max_seq_len {} is shorter than the longest sentence ({MAX_SENTENCE_LEN})",
                self.max_seq_len
            )));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    pub fn ffn_dim(&self) -> usize {
        self.d_model * self.ffn_multiplier
    }
}

/// Per-layer parameter names.
pub(crate) struct LayerNames {
    pub wq: String,
    pub bq: String,
    pub wk: String,
    pub wv: String,
    pub bv: String,
    pub wo: String,
    pub bo: String,
    pub ln1_gamma: String,
    pub ln1_beta: String,
    pub w1: String,
    pub b1: String,
    pub w2: String,
    pub b2: String,
    pub ln2_gamma: String,
    pub ln2_beta: String,
}

impl LayerNames {
    pub fn new(i: usize) -> Self {
        let n = |s: &str| format!("layers.{i}.{s}");
        // Keys get no bias: a shared shift of every score in a softmax row
        // has identically zero gradient.
        LayerNames {
            wq: n("attention.query.weight"),
            bq: n("attention.query.bias"),
            wk: n("attention.key.weight"),
            wv: n("attention.value.weight"),
            bv: n("attention.value.bias"),
            wo: n("attention.output.weight"),
            bo: n("attention.output.bias"),
            ln1_gamma: n("attention_norm.gamma"),
            ln1_beta: n("attention_norm.beta"),
            w1: n("ffn.inner.weight"),
            b1: n("ffn.inner.bias"),
            w2: n("ffn.outer.weight"),
            b2: n("ffn.outer.bias"),
            ln2_gamma: n("ffn_norm.gamma"),
            ln2_beta: n("ffn_norm.beta"),
        }
    }
}

pub(crate) const EMB_LN_GAMMA: &str = "embedding_norm.gamma";
pub(crate) const EMB_LN_BETA: &str = "embedding_norm.beta";

/// Model weights plus the configuration that shapes them.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    pub config: ModelConfig,
    pub tensors: NamedTensors,
}

impl Parameters {
    pub fn embedding(&self) -> &Tensor {
        self.tensors.get(EMBEDDING)
    }

    pub fn embedding_row(&self, token: usize) -> &[f64] {
        self.embedding().row(token)
    }

    pub fn output_bias(&self) -> &Tensor {
        self.tensors.get(OUTPUT_BIAS)
    }

    pub fn bit_eq(&self, other: &Parameters) -> bool {
        self.config == other.config && self.tensors.bit_eq(&other.tensors)
    }

    /// Every tensor element as raw bits, excluding the embedding rows and
    /// output-bias entries of `tokens`; used for freeze assertions.
    pub fn fingerprint_excluding_tokens(&self, tokens: &[usize]) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.tensors.n_scalars());
        for (name, t) in self.tensors.iter() {
            if name == EMBEDDING {
                for r in 0..t.shape()[0] {
                    if !tokens.contains(&r) {
                        out.extend(t.row(r).iter().map(|x| x.to_bits()));
                    }
                }
            } else if name == OUTPUT_BIAS {
                let kept = t.data().iter().enumerate().filter(|(i, _)| !tokens.contains(i));
                out.extend(kept.map(|(_, x)| x.to_bits()));
            } else {
                out.extend(t.data().iter().map(|x| x.to_bits()));
            }
        }
        out
    }

    /// Expected name → shape layout for `config`.
    pub fn layout(config: &ModelConfig) -> Vec<(String, Vec<usize>)> {
        let (v, d, f) = (config.vocab_size, config.d_model, config.ffn_dim());
        let mut out = vec![
            (EMBEDDING.to_string(), vec![v, d]),
            (POSITIONAL.to_string(), vec![config.max_seq_len, d]),
            (EMB_LN_GAMMA.to_string(), vec![d]),
            (EMB_LN_BETA.to_string(), vec![d]),
            (OUTPUT_BIAS.to_string(), vec![v]),
        ];
        for i in 0..config.n_layers {
            let n = LayerNames::new(i);
            out.extend([
                (n.wq, vec![d, d]),
                (n.bq, vec![d]),
                (n.wk, vec![d, d]),
                (n.wv, vec![d, d]),
                (n.bv, vec![d]),
                (n.wo, vec![d, d]),
                (n.bo, vec![d]),
                (n.ln1_gamma, vec![d]),
                (n.ln1_beta, vec![d]),
                (n.w1, vec![d, f]),
                (n.b1, vec![f]),
                (n.w2, vec![f, d]),
                (n.b2, vec![d]),
                (n.ln2_gamma, vec![d]),
                (n.ln2_beta, vec![d]),
            ]);
        }
        out
    }

    /// Checks names, shapes and finiteness against the config.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let layout = Self::layout(&self.config);
        if layout.len() != self.tensors.len() {
            return Err(Error::Config(format!(
                "expected {} parameter tensors, found {}",
                layout.len(),
                self.tensors.len()
            )));
        }
        for (name, shape) in layout {
            match self.tensors.try_get(&name) {
                Some(t) if t.shape() == shape.as_slice() => {
                    if !t.is_finite() {
                        return Err(Error::Config(format!("parameter {name} has non-finite entries")));
                    }
                }
                Some(t) => {
                    return Err(Error::Config(format!(
                        "parameter {name} has shape {:?}, expected {shape:?}",
                        t.shape()
                    )))
                }
                None => return Err(Error::Config(format!("missing parameter {name}"))),
            }
        }
        Ok(())
    }
}

/// Normal(0, init_std) weights, unit layer-norm gains, zero biases.
pub fn init_model(config: &ModelConfig, seed: u64) -> Parameters {
    config.validate().expect("invalid model config");
    let mut rng = rng::stream(seed, "init");
    let normal = Normal::new(0.0, config.init_std).expect("positive std");
    let mut tensors = NamedTensors::new();
    for (name, shape) in Parameters::layout(config) {
        let t = if name.ends_with(".gamma") {
            Tensor::filled(&shape, 1.0)
        } else if shape.len() == 1 {
            Tensor::zeros(&shape)
        } else {
            let n = shape.iter().product();
            Tensor::from_vec(&shape, (0..n).map(|_| normal.sample(&mut rng)).collect())
        };
        tensors.insert(name, t);
    }
    Parameters { config: config.clone(), tensors }
}
