//! Acceptance suite: one pass/fail line per criterion. Runs the full default
//! pipeline once through the `lexcat` binary and reuses its artifacts.
//!
//! ```text
//! cargo test --test acceptance
//! ```

use std::process::Command;
use std::time::{Duration, Instant};

use lexcat::corpus::{make_training_stimuli, CategoryPair, LexicalCategory, Stimulus};
use lexcat::geometry::{
    fit_pair_geometry, fit_pca, install_pairing, inverse_project, movement_analysis, project,
    run_projection_experiment, ExemplarConfig, PcaBasis, PcaScope, Point2, ProjectionConfig,
};
use lexcat::harness::{
    decode_checkpoint, encode_checkpoint, ExperimentKind, KsRun, Pipeline, RunConfig, REFERENCE_PROJECTION_ACCURACY,
};
use lexcat::model::{init_model, loss_and_grads, ModelConfig, Parameters, TrainReport};
use lexcat::nn::finite_diff_check;
use lexcat::protocol::{add_novel_tokens, ks_test_set, learn_novel_embeddings, NovelToken, Snapshot, Trajectory};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Line {
    id: u32,
    pass: bool,
    text: String,
}

fn line(id: u32, pass: bool, text: impl Into<String>) -> Line {
    Line { id, pass, text: text.into() }
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let config = ModelConfig {
        vocab_size: 20,
        d_model: 8,
        n_layers: 1,
        n_heads: 2,
        ffn_multiplier: 4,
        max_seq_len: 6,
        mask_token_id: 2,
        pad_token_id: 3,
        init_std: 0.3,
    };
    let s = |tokens: Vec<usize>, m: usize, target: usize| Stimulus {
        tokens,
        mask_position: m,
        target,
        category: LexicalCategory::Noun,
    };
    let batch = vec![s(vec![0, 2, 7, 1], 1, 5), s(vec![0, 9, 2, 0, 11, 1], 2, 14), s(vec![0, 2, 6, 1, 3, 3], 1, 19)];
    let mut worst: f64 = 0.0;
    for seed in [17, 18, 19] {
        let params = init_model(&config, seed);
        let (_, grads) = loss_and_grads(&params, &batch);
        let err = finite_diff_check(
            |t| loss_and_grads(&Parameters { config: config.clone(), tensors: t.clone() }, &batch).0,
            &params.tensors,
            &grads,
            1e-5,
        );
        worst = worst.max(err);
    }
    let secs = start.elapsed().as_secs_f64();
    line(
        1,
        worst < 1e-4 && secs < 60.0,
        format!("gradient check: max relative error {worst:.2e} (< 1e-4), {secs:.1}s (< 60s)"),
    )
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn canonical(mut v: Vec<f64>) -> Vec<f64> {
    let i = (0..v.len()).fold(0, |b, i| if v[i].abs() > v[b].abs() { i } else { b });
    if v[i] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

fn oracle_components(points: &[Vec<f64>]) -> (Vec<f64>, [Vec<f64>; 2]) {
    let (n, d) = (points.len(), points[0].len());
    let mean: Vec<f64> = (0..d).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
    let x = DMatrix::from_fn(n, d, |i, j| points[i][j] - mean[j]);
    let eig = SymmetricEigen::new(x.transpose() * &x / (n - 1) as f64);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vec = |k: usize| canonical(eig.eigenvectors.column(order[k]).iter().copied().collect());
    (values, [vec(0), vec(1)])
}

fn criterion_2() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut ortho, mut origin, mut round, mut rank2, mut oracle) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut compared = 0;
    for _ in 0..500 {
        let pts: Vec<Vec<f64>> = (0..5).map(|_| (0..4).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let b = fit_pca(&pts).expect("random points are not degenerate");
        let [c1, c2] = &b.components;
        ortho = ortho.max((dot(c1, c1) - 1.0).abs()).max((dot(c2, c2) - 1.0).abs()).max(dot(c1, c2).abs());
        let o = project(&b, &b.mean);
        origin = origin.max(o.x.abs()).max(o.y.abs());
        let p = Point2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let q = project(&b, &inverse_project(&b, p));
        round = round.max((q.x - p.x).abs()).max((q.y - p.y).abs());
        let (values, vectors): (Vec<f64>, _) = oracle_components(&pts);
        let gap = 1e-3 * values[0];
        if values[0] - values[1] > gap && values[1] - values[2] > gap {
            compared += 1;
            oracle = oracle.max(max_diff(c1, &vectors[0])).max(max_diff(c2, &vectors[1]));
        }
        let rank2_pts = rank_two(&mut rng);
        let rb = fit_pca(&rank2_pts).expect("rank-two data");
        for v in &rank2_pts {
            rank2 = rank2.max(max_diff(v, &inverse_project(&rb, project(&rb, v))));
        }
    }
    let pass = ortho <= 1e-10 && origin <= 1e-10 && round <= 1e-10 && rank2 <= 1e-8 && oracle <= 1e-8 && compared > 400;
    line(
        2,
        pass,
        format!(
            "PCA algebra: orthonormality {ortho:.1e}, mean->origin {origin:.1e}, round trip {round:.1e} (<= 1e-10); \
             rank-2 reconstruction {rank2:.1e}, eigen oracle {oracle:.1e} on {compared} 5x4 instances (<= 1e-8)"
        ),
    )
}

fn rank_two(rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let d = 6;
    let mut v = || -> Vec<f64> { (0..d).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let (origin, a, b) = (v(), v(), v());
    (0..8)
        .map(|i| {
            let (s, t) = ((i as f64 * 1.3).sin() * 3.0, (i as f64 * 0.7).cos() * 2.0);
            (0..d).map(|j| origin[j] + s * a[j] + t * b[j]).collect()
        })
        .collect()
}

fn criterion_3(base: &Parameters, pipeline: &Pipeline) -> Line {
    let lexicon = pipeline.load_lexicon().expect("lexicon");
    let config = &pipeline.config;
    let mut learning_ok = true;
    for pair in CategoryPair::all() {
        let (params, tokens) = add_novel_tokens(base, &lexicon, &pair.categories(), 0.02, 1).expect("slots");
        let stimuli =
            make_training_stimuli(pair, &lexicon, tokens[0].token_id, tokens[1].token_id, 1).expect("stimuli");
        let learned = learn_novel_embeddings(&params, &stimuli, &tokens, &config.ks().train).expect("learning");
        let ids = [tokens[0].token_id, tokens[1].token_id];
        learning_ok &= learned.params.fingerprint_excluding_tokens(&ids) == params.fingerprint_excluding_tokens(&ids)
            && learned.params.output_bias().data()[ids[0]] == 0.0
            && learned.params.output_bias().data()[ids[1]] == 0.0;
    }
    let pair = CategoryPair::new(LexicalCategory::Noun, LexicalCategory::Adj).unwrap();
    let before = base.clone();
    let geometry =
        fit_pair_geometry(base, &lexicon, pair, &ExemplarConfig::default(), PcaScope::Pair).expect("geometry");
    let test = ks_test_set(&lexicon, pair, 100, 1).expect("test set");
    let result = run_projection_experiment(
        base,
        &lexicon,
        &geometry,
        &test,
        &ProjectionConfig { n_novel_per_category: 20, seed: 1 },
    )
    .expect("projection");
    let (with_novel, tokens) = add_novel_tokens(base, &lexicon, &pair.categories(), 0.02, 1).expect("slots");
    let tokens: [NovelToken; 2] = tokens.try_into().unwrap();
    let ids = [tokens[0].token_id, tokens[1].token_id];
    let mut install_ok = base.bit_eq(&before);
    let samples_a = &result.samples[&pair.first()];
    let samples_b = &result.samples[&pair.second()];
    for (&a, &b) in samples_a.iter().zip(samples_b) {
        let installed = install_pairing(&with_novel, &geometry.basis, &tokens, a, b);
        for (id, p) in ids.iter().zip([a, b]) {
            let expected = inverse_project(&geometry.basis, p);
            install_ok &= installed.embedding_row(*id).iter().zip(&expected).all(|(x, y)| x.to_bits() == y.to_bits());
        }
        install_ok &= installed.fingerprint_excluding_tokens(&ids) == base.fingerprint_excluding_tokens(&ids);
    }
    line(
        3,
        learning_ok && install_ok,
        format!(
            "freeze: (a) non-novel parameters bit-identical after learning on all 6 pairs: {learning_ok}; \
             (b) projection rows == inverse projections bitwise, nothing else touched: {install_ok}"
        ),
    )
}

fn main() {
    let mut lines = vec![criterion_1(), criterion_2()];

    let dir = tempfile::tempdir().expect("temp dir");
    let out = dir.path().join("full");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_lexcat"))
        .args(["all", "--config", "default", "--seed", "1,2,3,4,5", "--out", out.to_str().unwrap()])
        .env("RUST_LOG", "warn")
        .status()
        .expect("run lexcat");
    let elapsed = start.elapsed();
    if !status.success() {
        println!("FAIL  pipeline run exited with {status}; criteria 3-9 cannot be evaluated");
        std::process::exit(1);
    }
    let pipeline = Pipeline::new(RunConfig { out_dir: out.clone(), ..RunConfig::default() }, &out);
    let base = pipeline.load_model().expect("checkpoint");
    lines.push(criterion_3(&base, &pipeline));

    let train: TrainReport =
        serde_json::from_str(&std::fs::read_to_string(out.join("train_report.json")).unwrap()).unwrap();
    let acc = train.heldout_accuracy.unwrap_or(0.0);
    lines.push(line(
        4,
        acc >= 0.90 && train.seconds <= 300.0,
        format!("base model: held-out category accuracy {acc:.3} (>= 0.90) after {:.1}s (<= 300s)", train.seconds),
    ));

    let report = pipeline.report().expect("report");
    let ks: Vec<_> = report.summaries.iter().filter(|s| s.kind == ExperimentKind::Ks).collect();
    let mut text = String::new();
    for s in &ks {
        text.push_str(&format!(" {} {:.3}±{:.3};", s.pair, s.accuracy, s.ci95));
    }
    let ks_pass = ks.len() == 6 && ks.iter().all(|s| s.n_seeds == 5 && s.lower() > 0.5);
    lines.push(line(
        5,
        ks_pass,
        format!("novel-word learning, lower 95% CI over 5 seeds > 0.50 (N=100/category):{text} BERT-base reference range 0.70-0.93"),
    ));

    let stationary = {
        let token = NovelToken { name: "wug".into(), token_id: 0, category: LexicalCategory::Noun };
        let e = vec![0.5, -0.25, 1.0];
        let traj = Trajectory {
            token,
            snapshots: vec![Snapshot { step: 0, embedding: e.clone() }, Snapshot { step: 10, embedding: e }],
        };
        let basis = PcaBasis {
            mean: vec![0.0; 3],
            components: [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            explained_variance: [1.0, 0.5],
            fit_set_description: "axes".into(),
        };
        let points =
            [(LexicalCategory::Noun, vec![Point2::new(2.0, 1.0), Point2::new(3.0, 0.0), Point2::new(2.5, 2.0)])]
                .into_iter()
                .collect();
        movement_analysis(&traj, &basis, &points).relative_movement
    };
    let mut movement_text = String::new();
    let mut movement_pass = stationary == Some(0.0);
    for s in &ks {
        let runs: Vec<KsRun> = pipeline
            .config
            .seeds
            .iter()
            .map(|&seed| {
                serde_json::from_str(&std::fs::read_to_string(pipeline.ks_path(s.pair, seed)).unwrap()).unwrap()
            })
            .collect();
        let cats: Vec<LexicalCategory> = runs[0].record.tokens.iter().map(|t| t.category).collect();
        for (i, c) in cats.iter().enumerate() {
            let m = s.movement_by_token[i];
            movement_pass &= m > 0.0;
            movement_text.push_str(&format!(" {}/{c} {m:.3};", s.pair));
        }
    }
    lines.push(line(
        6,
        movement_pass,
        format!("mean relative movement toward own-category centroid > 0 over 5 seeds:{movement_text} stationary case = {stationary:?}"),
    ));

    let proj: Vec<_> = report.summaries.iter().filter(|s| s.kind == ExperimentKind::Projection).collect();
    let rows_ok = report.table.of_kind(ExperimentKind::Projection).all(|r| r.accuracy - r.ci95 > 0.5);
    let mut text = String::new();
    for s in &proj {
        let reference = REFERENCE_PROJECTION_ACCURACY.iter().find(|r| r.0 == s.pair.name()).unwrap();
        text.push_str(&format!(
            " {} {:.3}±{:.3} (ref {:.2}±{:.2});",
            s.pair, s.accuracy, s.ci95, reference.1, reference.2
        ));
    }
    let proj_pass = proj.len() == 6 && proj.iter().all(|s| s.lower() > 0.5) && rows_ok;
    lines.push(line(
        7,
        proj_pass,
        format!("region projection, N=20/category, no training, lower 95% CI > 0.50 per pair and per seed:{text}"),
    ));

    let bytes = std::fs::read(out.join("model.ckpt")).unwrap();
    let ckpt_ok = decode_checkpoint(&bytes).map(|p| p.bit_eq(&base) && encode_checkpoint(&p) == bytes).unwrap_or(false);
    let small = |name: &str| {
        let dir = dir.path().join(name);
        let config = RunConfig::from_toml_str("seeds = [1, 2]\nn_sentences = 2000\nepochs = 1\n").unwrap();
        Pipeline::new(config, &dir).all().expect("small pipeline");
        std::fs::read(dir.join("results.csv")).unwrap()
    };
    let csv_ok = small("det_a") == small("det_b");
    lines.push(line(
        8,
        ckpt_ok && csv_ok,
        format!("determinism: repeated run CSV byte-identical {csv_ok}; checkpoint bitwise round trip {ckpt_ok}"),
    ));

    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    lines.push(line(
        9,
        elapsed <= Duration::from_secs(15 * 60),
        format!(
            "full `all` pipeline (6 pairs x 5 seeds) in {:.1}s on {threads} thread(s) (<= 900s)",
            elapsed.as_secs_f64()
        ),
    ));

    let mut failed = 0;
    for l in &lines {
        println!("{} criterion {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.text);
        failed += usize::from(!l.pass);
    }
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
