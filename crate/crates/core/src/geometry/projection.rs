use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{fit_pca, fit_region, inverse_project, project, sample_region, PcaBasis, Point2, Region2};
use crate::corpus::{CategoryPair, LexicalCategory, Lexicon, TestSet};
use crate::error::{Error, Result};
use crate::model::{Parameters, EMBEDDING, OUTPUT_BIAS};
use crate::protocol::{add_novel_tokens, mean_ci95, NovelToken, PairResult, PreparedTestSet, CHANCE};

/// How many known words per category anchor the geometry. `None` uses every
/// lexicon word of the category; the original large-vocabulary setting used 500.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExemplarConfig {
    pub n_per_category: Option<usize>,
}

/// Which exemplars the PCA plane is fit on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PcaScope {
    /// The two categories of the pair under study.
    #[default]
    Pair,
    /// All four categories.
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    pub n_novel_per_category: usize,
    pub seed: u64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig { n_novel_per_category: 20, seed: 1 }
    }
}

/// Input-embedding rows of a category's first `n` words.
pub fn exemplar_embeddings(
    params: &Parameters,
    lexicon: &Lexicon,
    category: LexicalCategory,
    config: &ExemplarConfig,
) -> Result<Vec<Vec<f64>>> {
    let ids = lexicon.category_ids(category);
    let n = config.n_per_category.unwrap_or(ids.len());
    if n > ids.len() {
        return Err(Error::InsufficientLexicon(format!(
            "{n} {category} exemplars requested, lexicon has {}",
            ids.len()
        )));
    }
    Ok(ids[..n].iter().map(|&id| params.embedding_row(id).to_vec()).collect())
}

/// PCA plane, projected exemplars, and fitted regions for one pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry {
    pub pair: CategoryPair,
    pub basis: PcaBasis,
    pub exemplar_points: BTreeMap<LexicalCategory, Vec<Point2>>,
    pub regions: BTreeMap<LexicalCategory, Region2>,
}

pub fn fit_pair_geometry(
    params: &Parameters,
    lexicon: &Lexicon,
    pair: CategoryPair,
    exemplars: &ExemplarConfig,
    scope: PcaScope,
) -> Result<PairGeometry> {
    let mut vectors = BTreeMap::new();
    for c in LexicalCategory::ALL {
        if scope == PcaScope::Global || pair.contains(c) {
            vectors.insert(c, exemplar_embeddings(params, lexicon, c, exemplars)?);
        }
    }
    let fit_set: Vec<Vec<f64>> = vectors.values().flatten().cloned().collect();
    let mut basis = fit_pca(&fit_set)?;
    let cats: Vec<&str> = vectors.keys().map(|c| c.as_str()).collect();
    basis.fit_set_description = format!("input embeddings of {} exemplars ({})", fit_set.len(), cats.join(", "));
    let mut exemplar_points = BTreeMap::new();
    let mut regions = BTreeMap::new();
    for c in pair.categories() {
        let pts: Vec<Point2> = vectors[&c].iter().map(|v| project(&basis, v)).collect();
        regions.insert(c, fit_region(c, &pts)?);
        exemplar_points.insert(c, pts);
    }
    Ok(PairGeometry { pair, basis, exemplar_points, regions })
}

/// Copies of `params` with the two novel rows set to the inverse projections
/// of `a` and `b` and their output biases zeroed. Nothing is trained.
pub fn install_pairing(
    params: &Parameters,
    basis: &PcaBasis,
    tokens: &[NovelToken; 2],
    a: Point2,
    b: Point2,
) -> Parameters {
    let mut out = params.clone();
    for (t, p) in tokens.iter().zip([a, b]) {
        let row = inverse_project(basis, p);
        out.tensors.get_mut(EMBEDDING).row_mut(t.token_id).copy_from_slice(&row);
        out.tensors.get_mut(OUTPUT_BIAS).data_mut()[t.token_id] = 0.0;
    }
    out
}

/// Evaluates sample `i` of the first category against sample `i` of the second.
pub fn evaluate_sample_pairs(
    params: &Parameters,
    prepared: &PreparedTestSet,
    basis: &PcaBasis,
    tokens: &[NovelToken; 2],
    samples_a: &[Point2],
    samples_b: &[Point2],
) -> Vec<PairResult> {
    assert_eq!(samples_a.len(), samples_b.len(), "unequal sample counts");
    samples_a
        .iter()
        .zip(samples_b)
        .map(|(&a, &b)| {
            let installed = install_pairing(params, basis, tokens, a, b);
            prepared.evaluate(&installed, &tokens[0], &tokens[1])
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub pair: CategoryPair,
    pub seed: u64,
    /// Mean over pairings, with the 95% half-width across pairings.
    pub result: PairResult,
    pub per_pairing: Vec<f64>,
    pub samples: BTreeMap<LexicalCategory, Vec<Point2>>,
}

/// Samples novel embeddings from each category's 2-D region, projects them
/// into embedding space, and scores them on `test` with no gradient steps.
pub fn run_projection_experiment(
    base: &Parameters,
    lexicon: &Lexicon,
    geometry: &PairGeometry,
    test: &TestSet,
    config: &ProjectionConfig,
) -> Result<ProjectionResult> {
    let pair = geometry.pair;
    if test.pair != pair {
        return Err(Error::Config(format!("test set is for {}, geometry for {pair}", test.pair)));
    }
    if config.n_novel_per_category == 0 {
        return Err(Error::Config("n_novel_per_category must be at least 1".into()));
    }
    let (params, tokens) = add_novel_tokens(base, lexicon, &pair.categories(), 0.02, config.seed)?;
    let tokens: [NovelToken; 2] = tokens.try_into().expect("two categories");
    let mut samples = BTreeMap::new();
    for c in pair.categories() {
        samples.insert(c, sample_region(&geometry.regions[&c], config.n_novel_per_category, config.seed));
    }
    let prepared = PreparedTestSet::new(&params, test);
    let results = evaluate_sample_pairs(
        &params,
        &prepared,
        &geometry.basis,
        &tokens,
        &samples[&pair.first()],
        &samples[&pair.second()],
    );
    let per_pairing: Vec<f64> = results.iter().map(|r| r.accuracy).collect();
    let (accuracy, ci95) = mean_ci95(&per_pairing);
    Ok(ProjectionResult {
        pair,
        seed: config.seed,
        result: PairResult { pair, accuracy, ci95, n_items: per_pairing.len(), chance: CHANCE },
        per_pairing,
        samples,
    })
}
