use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{CategoryPair, Lexicon};
use crate::error::{Error, Result};
use crate::geometry::{ExemplarConfig, PcaScope, ProjectionConfig};
use crate::model::{BaseTrainConfig, ModelConfig};
use crate::nn::OptimizerKind;
use crate::protocol::{Exposure, KsConfig, NovelTrainConfig};

/// Every tunable of a pipeline run, as one flat TOML table. Missing keys take
/// their default; unknown keys are rejected.
///
/// ```toml
/// seeds = [1, 2, 3, 4, 5]
/// pairs = ["noun-verb", "adj-adverb"]
/// n_sentences = 20000
/// novel_learning_rate = 0.002
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds for the novel-word and projection runs.
    pub seeds: Vec<u64>,
    /// Category pairs to run; empty means all six.
    pub pairs: Vec<CategoryPair>,
    pub out_dir: PathBuf,

    pub words_per_category: usize,
    pub lexicon_seed: u64,
    pub n_sentences: usize,
    pub corpus_seed: u64,
    pub heldout_items: usize,
    pub heldout_seed: u64,

    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    pub ffn_multiplier: usize,
    pub max_seq_len: usize,
    pub init_std: f64,
    pub model_seed: u64,

    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub mask_prob: f64,
    pub train_seed: u64,

    pub novel_init_std: f64,
    pub novel_learning_rate: f64,
    pub novel_steps: usize,
    pub snapshot_interval: usize,
    pub exposure: Exposure,
    pub stop_when_predicted: bool,
    pub test_items_per_category: usize,

    /// Exemplars per category for the PCA plane; absent means all.
    pub exemplars_per_category: Option<usize>,
    pub pca_scope: PcaScope,
    pub n_novel_per_category: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = BaseTrainConfig::default();
        let ks = KsConfig::default();
        RunConfig {
            seeds: vec![1, 2, 3, 4, 5],
            pairs: Vec::new(),
            out_dir: PathBuf::from("out"),
            words_per_category: 60,
            lexicon_seed: 1,
            n_sentences: 20_000,
            corpus_seed: 7,
            heldout_items: 1000,
            heldout_seed: 11,
            d_model: 64,
            n_layers: 2,
            n_heads: 4,
            ffn_multiplier: 4,
            max_seq_len: 16,
            init_std: 0.02,
            model_seed: 1,
            epochs: train.epochs,
            batch_size: train.batch_size,
            learning_rate: train.learning_rate,
            mask_prob: train.mask_prob,
            train_seed: 1,
            novel_init_std: ks.novel_init_std,
            novel_learning_rate: ks.train.learning_rate,
            novel_steps: ks.train.steps,
            snapshot_interval: ks.train.snapshot_interval,
            exposure: ks.train.exposure,
            stop_when_predicted: ks.train.stop_when_predicted,
            test_items_per_category: ks.test_items_per_category,
            exemplars_per_category: None,
            pca_scope: PcaScope::Pair,
            n_novel_per_category: ProjectionConfig::default().n_novel_per_category,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// `default` selects the built-in configuration; anything else is a path.
    pub fn load(source: &str) -> Result<Self> {
        if source == "default" {
            return Ok(RunConfig::default());
        }
        let path = Path::new(source);
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.seeds.is_empty() {
            return bad("seeds must not be empty");
        }
        let counts = [
            ("words_per_category", self.words_per_category),
            ("n_sentences", self.n_sentences),
            ("heldout_items", self.heldout_items),
            ("d_model", self.d_model),
            ("n_layers", self.n_layers),
            ("n_heads", self.n_heads),
            ("ffn_multiplier", self.ffn_multiplier),
            ("max_seq_len", self.max_seq_len),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("test_items_per_category", self.test_items_per_category),
            ("n_novel_per_category", self.n_novel_per_category),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.words_per_category < 10 {
            return bad("words_per_category must be at least 10");
        }
        if self.exemplars_per_category == Some(0) {
            return bad("exemplars_per_category must be positive");
        }
        if !(self.mask_prob > 0.0 && self.mask_prob <= 1.0) {
            return bad("mask_prob must lie in (0, 1]");
        }
        for (name, v) in [
            ("init_std", self.init_std),
            ("learning_rate", self.learning_rate),
            ("novel_init_std", self.novel_init_std),
            ("novel_learning_rate", self.novel_learning_rate),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Requested pairs in canonical order, defaulting to all six.
    pub fn pair_list(&self) -> Vec<CategoryPair> {
        let mut pairs = if self.pairs.is_empty() { CategoryPair::all() } else { self.pairs.clone() };
        pairs.sort();
        pairs.dedup();
        pairs
    }

    pub fn model_config(&self, lexicon: &Lexicon) -> ModelConfig {
        ModelConfig {
            d_model: self.d_model,
            n_layers: self.n_layers,
            n_heads: self.n_heads,
            ffn_multiplier: self.ffn_multiplier,
            max_seq_len: self.max_seq_len,
            init_std: self.init_std,
            ..ModelConfig::for_lexicon(lexicon)
        }
    }

    pub fn base_train(&self) -> BaseTrainConfig {
        BaseTrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            mask_prob: self.mask_prob,
            optimizer: OptimizerKind::adam(),
        }
    }

    pub fn ks(&self) -> KsConfig {
        KsConfig {
            novel_init_std: self.novel_init_std,
            train: NovelTrainConfig {
                learning_rate: self.novel_learning_rate,
                steps: self.novel_steps,
                snapshot_interval: self.snapshot_interval,
                exposure: self.exposure,
                stop_when_predicted: self.stop_when_predicted,
            },
            test_items_per_category: self.test_items_per_category,
        }
    }

    pub fn exemplars(&self) -> ExemplarConfig {
        ExemplarConfig { n_per_category: self.exemplars_per_category }
    }

    pub fn projection(&self, seed: u64) -> ProjectionConfig {
        ProjectionConfig { n_novel_per_category: self.n_novel_per_category, seed }
    }
}
