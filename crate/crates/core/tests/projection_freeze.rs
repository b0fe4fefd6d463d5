//! The projection experiment installs inverse-projected rows and trains
//! nothing.

use lexcat::corpus::{build_lexicon, CategoryPair, LexicalCategory, Lexicon};
use lexcat::geometry::{
    evaluate_sample_pairs, fit_pair_geometry, install_pairing, inverse_project, run_projection_experiment,
    ExemplarConfig, PcaScope, Point2, ProjectionConfig,
};
use lexcat::model::{init_model, ModelConfig, Parameters, OUTPUT_BIAS};
use lexcat::protocol::{add_novel_tokens, ks_test_set, NovelToken, PreparedTestSet};

fn setup() -> (Lexicon, Parameters) {
    let lexicon = build_lexicon(12, 2);
    let mut cfg = ModelConfig::for_lexicon(&lexicon);
    cfg.d_model = 16;
    cfg.n_layers = 1;
    cfg.n_heads = 2;
    let mut p = init_model(&cfg, 5);
    // Nonzero output biases make the bias-reset check meaningful.
    for (i, b) in p.tensors.get_mut(OUTPUT_BIAS).data_mut().iter_mut().enumerate() {
        *b = 0.01 * i as f64;
    }
    (lexicon, p)
}

fn pair() -> CategoryPair {
    CategoryPair::new(LexicalCategory::Noun, LexicalCategory::Verb).unwrap()
}

#[test]
fn installed_rows_are_inverse_projections_and_nothing_else_changes() {
    let (lexicon, base) = setup();
    let geometry = fit_pair_geometry(&base, &lexicon, pair(), &ExemplarConfig::default(), PcaScope::Pair).unwrap();
    let (with_novel, tokens) = add_novel_tokens(&base, &lexicon, &pair().categories(), 0.02, 1).unwrap();
    let tokens: [NovelToken; 2] = tokens.try_into().unwrap();
    let (a, b) = (Point2::new(0.3, -0.1), Point2::new(-0.2, 0.05));
    let installed = install_pairing(&with_novel, &geometry.basis, &tokens, a, b);
    for (t, p) in tokens.iter().zip([a, b]) {
        let expected = inverse_project(&geometry.basis, p);
        let got = installed.embedding_row(t.token_id);
        assert!(expected.iter().zip(got).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(installed.output_bias().data()[t.token_id].to_bits(), 0.0f64.to_bits());
    }
    let ids = [tokens[0].token_id, tokens[1].token_id];
    assert_eq!(installed.fingerprint_excluding_tokens(&ids), base.fingerprint_excluding_tokens(&ids));
}

#[test]
fn experiment_is_pure_evaluation() {
    let (lexicon, base) = setup();
    let before = base.clone();
    let geometry = fit_pair_geometry(&base, &lexicon, pair(), &ExemplarConfig::default(), PcaScope::Pair).unwrap();
    let test = ks_test_set(&lexicon, pair(), 10, 3).unwrap();
    let config = ProjectionConfig { n_novel_per_category: 5, seed: 9 };
    let result = run_projection_experiment(&base, &lexicon, &geometry, &test, &config).unwrap();
    assert!(base.bit_eq(&before));
    assert_eq!(result.per_pairing.len(), 5);
    assert_eq!(result.result.n_items, 5);

    // Recompute every pairing by hand from the reported samples.
    let (with_novel, tokens) = add_novel_tokens(&base, &lexicon, &pair().categories(), 0.02, 9).unwrap();
    let tokens: [NovelToken; 2] = tokens.try_into().unwrap();
    let prepared = PreparedTestSet::new(&with_novel, &test);
    let manual = evaluate_sample_pairs(
        &with_novel,
        &prepared,
        &geometry.basis,
        &tokens,
        &result.samples[&LexicalCategory::Noun],
        &result.samples[&LexicalCategory::Verb],
    );
    let accs: Vec<f64> = manual.iter().map(|r| r.accuracy).collect();
    assert_eq!(accs, result.per_pairing);
    assert_eq!(run_projection_experiment(&base, &lexicon, &geometry, &test, &config).unwrap(), result);
}

#[test]
fn one_shared_point_is_chance() {
    let (lexicon, base) = setup();
    let geometry = fit_pair_geometry(&base, &lexicon, pair(), &ExemplarConfig::default(), PcaScope::Pair).unwrap();
    let test = ks_test_set(&lexicon, pair(), 10, 3).unwrap();
    let (with_novel, tokens) = add_novel_tokens(&base, &lexicon, &pair().categories(), 0.02, 1).unwrap();
    let tokens: [NovelToken; 2] = tokens.try_into().unwrap();
    let prepared = PreparedTestSet::new(&with_novel, &test);
    let p = [Point2::new(0.1, 0.2)];
    let r = evaluate_sample_pairs(&with_novel, &prepared, &geometry.basis, &tokens, &p, &p);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].accuracy, 0.5);
}

#[test]
fn global_scope_uses_all_categories() {
    let (lexicon, base) = setup();
    let pair_scope = fit_pair_geometry(&base, &lexicon, pair(), &ExemplarConfig::default(), PcaScope::Pair).unwrap();
    let global = fit_pair_geometry(&base, &lexicon, pair(), &ExemplarConfig::default(), PcaScope::Global).unwrap();
    assert_ne!(pair_scope.basis, global.basis);
    assert_eq!(global.regions.len(), 2);
    let few = fit_pair_geometry(&base, &lexicon, pair(), &ExemplarConfig { n_per_category: Some(5) }, PcaScope::Pair)
        .unwrap();
    assert_eq!(few.exemplar_points[&LexicalCategory::Noun].len(), 5);
    assert!(fit_pair_geometry(&base, &lexicon, pair(), &ExemplarConfig { n_per_category: Some(13) }, PcaScope::Pair)
        .is_err());
}
