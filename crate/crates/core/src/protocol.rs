//! Novel-word learning: register novel tokens, train only their embedding
//! rows on one disambiguating stimulus per category, and score the model's
//! two-way choice between the novel tokens on held-out frames.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    make_test_set, make_training_stimuli, CategoryPair, LexicalCategory, Lexicon, Stimulus, TestSet, TokenId,
};
use crate::error::{Error, Result};
use crate::model::{argmax, loss_and_grads_sum, mlm_hidden, mlm_logits, Parameters, EMBEDDING, OUTPUT_BIAS};
use crate::nn::ops::dot;
use crate::nn::{optimizer_step, OptimizerState, TrainableFilter};
use crate::rng;

/// Two-way chance level.
pub const CHANCE: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NovelToken {
    pub name: String,
    pub token_id: TokenId,
    pub category: LexicalCategory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub embedding: Vec<f64>,
}

/// A novel token's embedding row over the course of learning. The first
/// snapshot is the initial row, the last the final one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub token: NovelToken,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn initial(&self) -> &[f64] {
        &self.snapshots.first().expect("trajectory has an initial snapshot").embedding
    }

    pub fn last(&self) -> &[f64] {
        &self.snapshots.last().expect("trajectory has an initial snapshot").embedding
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub pair: CategoryPair,
    pub accuracy: f64,
    pub ci95: f64,
    pub n_items: usize,
    pub chance: f64,
}

impl PairResult {
    pub fn lower(&self) -> f64 {
        self.accuracy - self.ci95
    }
}

/// Mean and normal-approximation 95% half-width `1.96 * s / sqrt(n)` with the
/// sample (n - 1) standard deviation; the half-width is 0 for n < 2.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty(), "mean of nothing");
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * var.sqrt() / n.sqrt())
}

/// Re-initializes the next `categories.len()` reserved slots as novel tokens:
/// fresh Normal(0, `init_std`) embedding rows and zero output bias. Nothing
/// else changes.
pub fn add_novel_tokens(
    params: &Parameters,
    lexicon: &Lexicon,
    categories: &[LexicalCategory],
    init_std: f64,
    seed: u64,
) -> Result<(Parameters, Vec<NovelToken>)> {
    let slots = lexicon.reserved_ids();
    if categories.len() > slots.len() {
        return Err(Error::CapacityExhausted { requested: categories.len(), available: slots.len() });
    }
    let normal = Normal::new(0.0, init_std).map_err(|e| Error::Config(format!("novel init std: {e}")))?;
    let mut rng = rng::stream(seed, "novel-init");
    let mut out = params.clone();
    let tokens: Vec<NovelToken> = categories
        .iter()
        .zip(slots)
        .map(|(&category, token_id)| {
            for x in out.tensors.get_mut(EMBEDDING).row_mut(token_id) {
                *x = normal.sample(&mut rng);
            }
            out.tensors.get_mut(OUTPUT_BIAS).data_mut()[token_id] = 0.0;
            NovelToken { name: lexicon.token(token_id).to_string(), token_id, category }
        })
        .collect();
    Ok((out, tokens))
}

/// Whether both exposures drive every step or they take turns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exposure {
    #[default]
    Joint,
    Alternating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NovelTrainConfig {
    pub learning_rate: f64,
    /// Step budget; training ends earlier under `stop_when_predicted`.
    pub steps: usize,
    pub snapshot_interval: usize,
    pub exposure: Exposure,
    /// Stop once each stimulus's target is the top prediction at its mask.
    pub stop_when_predicted: bool,
}

impl Default for NovelTrainConfig {
    fn default() -> Self {
        NovelTrainConfig {
            learning_rate: 0.002,
            steps: 200,
            snapshot_interval: 10,
            exposure: Exposure::Joint,
            stop_when_predicted: true,
        }
    }
}

/// Whether every stimulus's target wins the argmax at its mask.
pub fn predicts_targets(params: &Parameters, stimuli: &[Stimulus]) -> bool {
    stimuli.iter().all(|s| argmax(mlm_logits(params, &s.tokens, s.mask_position).data()) == s.target)
}

#[derive(Clone, Debug)]
pub struct Learned {
    pub params: Parameters,
    pub trajectories: Vec<Trajectory>,
    /// Summed loss on both stimuli before training and after every step.
    pub losses: Vec<f64>,
    pub steps_taken: usize,
}

/// Plain gradient descent on the summed loss of the two stimuli, updating
/// only the embedding rows of `tokens`.
pub fn learn_novel_embeddings(
    params: &Parameters,
    stimuli: &(Stimulus, Stimulus),
    tokens: &[NovelToken],
    hyper: &NovelTrainConfig,
) -> Result<Learned> {
    for s in [&stimuli.0, &stimuli.1] {
        if !tokens.iter().any(|t| t.token_id == s.target) {
            return Err(Error::NotNovel(s.target));
        }
    }
    let both = [stimuli.0.clone(), stimuli.1.clone()];
    let rows: Vec<TokenId> = tokens.iter().map(|t| t.token_id).collect();
    let filter = TrainableFilter::rows(EMBEDDING, rows.iter().copied());
    let mut state = OptimizerState::sgd(hyper.learning_rate);
    let mut params = params.clone();
    let snap = |p: &Parameters, step: usize| -> Vec<Snapshot> {
        rows.iter().map(|&r| Snapshot { step, embedding: p.embedding_row(r).to_vec() }).collect()
    };
    let mut snapshots: Vec<Vec<Snapshot>> = vec![Vec::new(); rows.len()];
    let push = |snapshots: &mut Vec<Vec<Snapshot>>, p: &Parameters, step: usize| {
        for (traj, s) in snapshots.iter_mut().zip(snap(p, step)) {
            traj.push(s);
        }
    };
    push(&mut snapshots, &params, 0);
    let mut losses = Vec::with_capacity(hyper.steps + 1);
    let mut steps_taken = 0;
    for step in 0..hyper.steps {
        if hyper.stop_when_predicted && predicts_targets(&params, &both) {
            break;
        }
        let batch: &[Stimulus] = match hyper.exposure {
            Exposure::Joint => &both,
            Exposure::Alternating => std::slice::from_ref(&both[step % 2]),
        };
        let (loss, grads) = loss_and_grads_sum(&params, batch);
        if !loss.is_finite() {
            return Err(Error::Divergence { context: "novel-embedding learning".into(), step });
        }
        if step == 0 {
            losses.push(loss_and_grads_sum(&params, &both).0);
        }
        optimizer_step(&mut params.tensors, &grads, &mut state, &filter);
        let done = step + 1;
        steps_taken = done;
        losses.push(loss_and_grads_sum(&params, &both).0);
        if hyper.snapshot_interval > 0 && done % hyper.snapshot_interval == 0 {
            push(&mut snapshots, &params, done);
        }
    }
    if snapshots[0].last().is_some_and(|s| s.step != steps_taken) {
        push(&mut snapshots, &params, steps_taken);
    }
    if losses.is_empty() {
        losses.push(loss_and_grads_sum(&params, &both).0);
    }
    let trajectories =
        tokens.iter().cloned().zip(snapshots).map(|(token, snapshots)| Trajectory { token, snapshots }).collect();
    Ok(Learned { params, trajectories, losses, steps_taken })
}

/// 1 if the correct novel token's logit is higher, 0.5 on an exact tie, 0 otherwise.
fn score(params: &Parameters, h: &[f64], right: TokenId, wrong: TokenId) -> f64 {
    let bias = params.output_bias().data();
    let lr = dot(params.embedding_row(right), h) + bias[right];
    let lw = dot(params.embedding_row(wrong), h) + bias[wrong];
    if lr > lw {
        1.0
    } else if lr == lw {
        0.5
    } else {
        0.0
    }
}

fn check_tokens(test: &TestSet, a: &NovelToken, b: &NovelToken) {
    assert!(
        CategoryPair::new(a.category, b.category) == Some(test.pair),
        "tokens ({}, {}) do not match test pair {}",
        a.category,
        b.category,
        test.pair
    );
}

fn result_from_scores(pair: CategoryPair, scores: &[f64]) -> PairResult {
    let (accuracy, ci95) = mean_ci95(scores);
    PairResult { pair, accuracy, ci95, n_items: scores.len(), chance: CHANCE }
}

/// Accuracy of choosing the category-appropriate novel token at each test
/// item's mask.
pub fn evaluate_pair(params: &Parameters, test: &TestSet, token_a: &NovelToken, token_b: &NovelToken) -> PairResult {
    PreparedTestSet::new(params, test).evaluate(params, token_a, token_b)
}

/// A test set with the mask-position hidden states precomputed. Valid for
/// any parameters that differ from the preparing ones only in rows of tokens
/// absent from every test input, which holds for novel tokens.
pub struct PreparedTestSet {
    test: TestSet,
    hidden: Vec<Vec<f64>>,
}

impl PreparedTestSet {
    pub fn new(params: &Parameters, test: &TestSet) -> Self {
        let hidden = test.items.par_iter().map(|s| mlm_hidden(params, &s.tokens, s.mask_position)).collect();
        PreparedTestSet { test: test.clone(), hidden }
    }

    pub fn test(&self) -> &TestSet {
        &self.test
    }

    pub fn evaluate(&self, params: &Parameters, token_a: &NovelToken, token_b: &NovelToken) -> PairResult {
        check_tokens(&self.test, token_a, token_b);
        for item in &self.test.items {
            assert!(
                !item.tokens.contains(&token_a.token_id) && !item.tokens.contains(&token_b.token_id),
                "novel tokens must not occur in test inputs"
            );
        }
        let scores: Vec<f64> = self
            .test
            .items
            .iter()
            .zip(&self.hidden)
            .map(|(item, h)| {
                let (right, wrong) =
                    if item.category == token_a.category { (token_a, token_b) } else { (token_b, token_a) };
                score(params, h, right.token_id, wrong.token_id)
            })
            .collect();
        result_from_scores(self.test.pair, &scores)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsConfig {
    pub novel_init_std: f64,
    pub train: NovelTrainConfig,
    pub test_items_per_category: usize,
}

impl Default for KsConfig {
    fn default() -> Self {
        KsConfig { novel_init_std: 0.02, train: NovelTrainConfig::default(), test_items_per_category: 100 }
    }
}

/// Everything one novel-word learning run produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsRecord {
    pub pair: CategoryPair,
    pub seed: u64,
    pub tokens: Vec<NovelToken>,
    pub training_stimuli: (Stimulus, Stimulus),
    /// Training stimuli rendered as text lines.
    pub training_lines: Vec<String>,
    pub test_set: TestSet,
    pub trajectories: Vec<Trajectory>,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub steps_taken: usize,
    pub result: PairResult,
}

/// Name lookup that resolves novel slots to their registered names.
pub fn token_namer<'a>(lexicon: &'a Lexicon, tokens: &'a [NovelToken]) -> impl Fn(TokenId) -> String + 'a {
    move |id| tokens.iter().find(|t| t.token_id == id).map_or_else(|| lexicon.token(id).to_string(), |t| t.name.clone())
}

/// The test set [`run_ks_experiment`] builds for `pair` and `seed`,
/// reconstructed without training anything.
pub fn ks_test_set(lexicon: &Lexicon, pair: CategoryPair, n_per_category: usize, seed: u64) -> Result<TestSet> {
    let first = lexicon.reserved_ids().start;
    if lexicon.reserved() < 2 {
        return Err(Error::CapacityExhausted { requested: 2, available: lexicon.reserved() });
    }
    let stimuli = make_training_stimuli(pair, lexicon, first, first + 1, seed)?;
    make_test_set(pair, lexicon, n_per_category, &stimuli, seed)
}

/// Registers two novel tokens, teaches them from one stimulus each, and
/// evaluates them on a lexically disjoint test set.
pub fn run_ks_experiment(
    base: &Parameters,
    lexicon: &Lexicon,
    pair: CategoryPair,
    config: &KsConfig,
    seed: u64,
) -> Result<KsRecord> {
    let (params, tokens) =
        add_novel_tokens(base, lexicon, &pair.categories(), config.novel_init_std, seed ^ pair_salt(pair))?;
    let stimuli = make_training_stimuli(pair, lexicon, tokens[0].token_id, tokens[1].token_id, seed)?;
    let learned = learn_novel_embeddings(&params, &stimuli, &tokens, &config.train)?;
    let test_set = make_test_set(pair, lexicon, config.test_items_per_category, &stimuli, seed)?;
    let result = evaluate_pair(&learned.params, &test_set, &tokens[0], &tokens[1]);
    let training_lines = {
        let namer = token_namer(lexicon, &tokens);
        vec![stimuli.0.to_line(&namer), stimuli.1.to_line(&namer)]
    };
    Ok(KsRecord {
        pair,
        seed,
        tokens,
        training_stimuli: stimuli,
        training_lines,
        test_set,
        trajectories: learned.trajectories,
        initial_loss: learned.losses[0],
        final_loss: *learned.losses.last().expect("at least one loss"),
        steps_taken: learned.steps_taken,
        result,
    })
}

fn pair_salt(pair: CategoryPair) -> u64 {
    (pair.first().index() as u64) << 8 | pair.second().index() as u64
}
