//! Pipeline stages. Each stage reads its inputs from the output directory,
//! writes its products there, and is a pure function of those inputs plus the
//! run configuration.
//!
//! ```text
//! out/
//!   config.toml  lexicon.json  corpus.txt  heldout.tsv
//!   model.ckpt  train_report.json
//!   geometry/<pair>.json
//!   ks/<pair>__seed<k>.json  projection/<pair>__seed<k>.json
//!   results.csv  summary.md  figures/*.svg
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::checkpoint::{load_checkpoint, save_checkpoint};
use super::config::RunConfig;
use super::results::{write_results_csv, ExperimentKind, ResultRow, ResultsTable};
use super::svg::{render_movement_svg, render_region_svg};
use crate::corpus::{
    build_lexicon, generate_corpus, make_heldout, write_stimuli, CategoryPair, Lexicon, Stimulus, TokenId,
};
use crate::error::{Error, Result};
use crate::geometry::{
    fit_pair_geometry, movement_analysis, project_trajectory, run_projection_experiment, MovementRecord, PairGeometry,
    Point2, ProjectionResult,
};
use crate::model::{init_model, train_base, Parameters, TrainReport};
use crate::protocol::{ks_test_set, mean_ci95, run_ks_experiment, KsRecord};

/// Region-projection accuracies measured with BERT-base (mean, 95%
/// half-width), printed next to the toy results.
pub const REFERENCE_PROJECTION_ACCURACY: [(&str, f64, f64); 6] = [
    ("noun-adj", 0.80, 0.08),
    ("noun-adverb", 0.89, 0.04),
    ("noun-verb", 0.81, 0.08),
    ("adj-adverb", 0.93, 0.03),
    ("adj-verb", 0.70, 0.06),
    ("adverb-verb", 0.87, 0.05),
];

/// One novel-word learning run with its movement analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsRun {
    pub record: KsRecord,
    pub movement: Vec<MovementRecord>,
    /// Each token's snapshots projected into the pair's PCA plane.
    pub projected: Vec<Vec<Point2>>,
}

impl KsRun {
    /// Mean relative movement over tokens where it is defined.
    pub fn mean_movement(&self) -> Option<f64> {
        let xs: Vec<f64> = self.movement.iter().filter_map(|m| m.relative_movement).collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Aggregate over seeds for one (kind, pair).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub kind: ExperimentKind,
    pub pair: CategoryPair,
    pub n_seeds: usize,
    /// Mean of per-seed accuracies with the 95% half-width across seeds.
    pub accuracy: f64,
    pub ci95: f64,
    /// Per token category, movement averaged over seeds.
    pub movement_by_token: Vec<f64>,
}

impl PairSummary {
    pub fn lower(&self) -> f64 {
        self.accuracy - self.ci95
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub table: ResultsTable,
    pub summaries: Vec<PairSummary>,
}

/// Artifact layout of one output directory.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub config: RunConfig,
    pub out: PathBuf,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

impl Pipeline {
    pub fn new(config: RunConfig, out: impl Into<PathBuf>) -> Self {
        Pipeline { config, out: out.into() }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    pub fn ks_path(&self, pair: CategoryPair, seed: u64) -> PathBuf {
        self.out.join(format!("ks/{pair}__seed{seed}.json"))
    }

    pub fn projection_path(&self, pair: CategoryPair, seed: u64) -> PathBuf {
        self.out.join(format!("projection/{pair}__seed{seed}.json"))
    }

    pub fn geometry_path(&self, pair: CategoryPair) -> PathBuf {
        self.out.join(format!("geometry/{pair}.json"))
    }

    fn runs(&self) -> Vec<(CategoryPair, u64)> {
        let pairs = self.config.pair_list();
        pairs.iter().flat_map(|&p| self.config.seeds.iter().map(move |&s| (p, s))).collect()
    }

    /// Lexicon, training corpus and held-out items.
    pub fn gen(&self) -> Result<()> {
        let c = &self.config;
        let lexicon = build_lexicon(c.words_per_category, c.lexicon_seed);
        let corpus = generate_corpus(&lexicon, c.n_sentences, c.corpus_seed);
        let heldout = make_heldout(&lexicon, c.heldout_items, c.heldout_seed);
        write_text(&self.path("config.toml"), &c.to_toml_string())?;
        write_json(&self.path("lexicon.json"), &lexicon)?;
        let mut text = String::new();
        for s in &corpus {
            let words: Vec<&str> = s.iter().map(|&t| lexicon.token(t)).collect();
            text.push_str(&words.join(" "));
            text.push('\n');
        }
        write_text(&self.path("corpus.txt"), &text)?;
        write_text(&self.path("heldout.tsv"), &write_stimuli(&heldout, |t| lexicon.token(t).to_string()))?;
        log::info!("wrote {} sentences, {} held-out items to {}", corpus.len(), heldout.len(), self.out.display());
        Ok(())
    }

    pub fn load_lexicon(&self) -> Result<Lexicon> {
        read_json(&self.path("lexicon.json"))
    }

    pub fn load_corpus(&self, lexicon: &Lexicon) -> Result<Vec<Vec<TokenId>>> {
        let path = self.path("corpus.txt");
        read_text(&path)?
            .lines()
            .enumerate()
            .map(|(i, line)| {
                line.split(' ')
                    .map(|w| {
                        lexicon
                            .id(w)
                            .ok_or_else(|| Error::Parse(format!("{}:{}: unknown word {w:?}", path.display(), i + 1)))
                    })
                    .collect()
            })
            .collect()
    }

    pub fn load_heldout(&self, lexicon: &Lexicon) -> Result<Vec<Stimulus>> {
        let path = self.path("heldout.tsv");
        read_text(&path)?.lines().map(|l| Stimulus::from_line(l, |w| lexicon.id(w), lexicon.mask_id())).collect()
    }

    pub fn load_model(&self) -> Result<Parameters> {
        load_checkpoint(&self.path("model.ckpt"))
    }

    /// Base model from the generated corpus.
    pub fn train(&self) -> Result<TrainReport> {
        let c = &self.config;
        let lexicon = self.load_lexicon()?;
        let corpus = self.load_corpus(&lexicon)?;
        let heldout = self.load_heldout(&lexicon)?;
        let config = c.model_config(&lexicon);
        config.validate_for(&lexicon)?;
        let init = init_model(&config, c.model_seed);
        let (params, report) = train_base(&init, &corpus, &lexicon, &heldout, &c.base_train(), c.train_seed)?;
        save_checkpoint(&params, &self.path("model.ckpt"))?;
        write_json(&self.path("train_report.json"), &report)?;
        log::info!(
            "base model: held-out category accuracy {:.3} after {:.1}s",
            report.heldout_accuracy.unwrap_or(f64::NAN),
            report.seconds
        );
        Ok(report)
    }

    fn geometries(&self, params: &Parameters, lexicon: &Lexicon) -> Result<BTreeMap<CategoryPair, PairGeometry>> {
        let mut out = BTreeMap::new();
        for pair in self.config.pair_list() {
            let g = fit_pair_geometry(params, lexicon, pair, &self.config.exemplars(), self.config.pca_scope)?;
            write_json(&self.geometry_path(pair), &g)?;
            out.insert(pair, g);
        }
        Ok(out)
    }

    /// Novel-word learning for every pair and seed, with movement analysis.
    pub fn ks(&self) -> Result<Vec<KsRun>> {
        let lexicon = self.load_lexicon()?;
        let params = self.load_model()?;
        let geometry = self.geometries(&params, &lexicon)?;
        let ks = self.config.ks();
        let runs = self
            .runs()
            .into_par_iter()
            .map(|(pair, seed)| {
                let record = run_ks_experiment(&params, &lexicon, pair, &ks, seed)?;
                let g = &geometry[&pair];
                let movement =
                    record.trajectories.iter().map(|t| movement_analysis(t, &g.basis, &g.exemplar_points)).collect();
                let projected = record.trajectories.iter().map(|t| project_trajectory(t, &g.basis)).collect();
                Ok(KsRun { record, movement, projected })
            })
            .collect::<Result<Vec<_>>>()?;
        for run in &runs {
            write_json(&self.ks_path(run.record.pair, run.record.seed), run)?;
            log::info!(
                "ks {} seed {}: accuracy {:.3}, {} steps",
                run.record.pair,
                run.record.seed,
                run.record.result.accuracy,
                run.record.steps_taken
            );
        }
        Ok(runs)
    }

    /// Region sampling and inverse projection for every pair and seed.
    pub fn project(&self) -> Result<Vec<ProjectionResult>> {
        let c = &self.config;
        let lexicon = self.load_lexicon()?;
        let params = self.load_model()?;
        let geometry = self.geometries(&params, &lexicon)?;
        let results = self
            .runs()
            .into_par_iter()
            .map(|(pair, seed)| {
                let test = ks_test_set(&lexicon, pair, c.test_items_per_category, seed)?;
                run_projection_experiment(&params, &lexicon, &geometry[&pair], &test, &c.projection(seed))
            })
            .collect::<Result<Vec<_>>>()?;
        for r in &results {
            write_json(&self.projection_path(r.pair, r.seed), r)?;
            log::info!("projection {} seed {}: accuracy {:.3}", r.pair, r.seed, r.result.accuracy);
        }
        Ok(results)
    }

    /// Results table, summary and figures from the records on disk.
    pub fn report(&self) -> Result<Report> {
        let mut table = ResultsTable::new();
        let mut ks_runs: BTreeMap<CategoryPair, Vec<KsRun>> = BTreeMap::new();
        let mut projections: BTreeMap<CategoryPair, Vec<ProjectionResult>> = BTreeMap::new();
        for (pair, seed) in self.runs() {
            let run: KsRun = read_json(&self.ks_path(pair, seed))?;
            let proj: ProjectionResult = read_json(&self.projection_path(pair, seed))?;
            table.insert(ResultRow {
                kind: ExperimentKind::Ks,
                pair,
                seed,
                accuracy: run.record.result.accuracy,
                ci95: run.record.result.ci95,
                rel_movement_mean: run.mean_movement(),
            })?;
            table.insert(ResultRow {
                kind: ExperimentKind::Projection,
                pair,
                seed,
                accuracy: proj.result.accuracy,
                ci95: proj.result.ci95,
                rel_movement_mean: None,
            })?;
            ks_runs.entry(pair).or_default().push(run);
            projections.entry(pair).or_default().push(proj);
        }
        let mut summaries = Vec::new();
        for (pair, runs) in &ks_runs {
            let accs: Vec<f64> = runs.iter().map(|r| r.record.result.accuracy).collect();
            let (accuracy, ci95) = mean_ci95(&accs);
            let n_tokens = runs[0].movement.len();
            let movement_by_token = (0..n_tokens)
                .map(|i| {
                    let xs: Vec<f64> = runs.iter().filter_map(|r| r.movement[i].relative_movement).collect();
                    if xs.is_empty() {
                        f64::NAN
                    } else {
                        xs.iter().sum::<f64>() / xs.len() as f64
                    }
                })
                .collect();
            summaries.push(PairSummary {
                kind: ExperimentKind::Ks,
                pair: *pair,
                n_seeds: runs.len(),
                accuracy,
                ci95,
                movement_by_token,
            });
        }
        for (pair, results) in &projections {
            let accs: Vec<f64> = results.iter().map(|r| r.result.accuracy).collect();
            let (accuracy, ci95) = mean_ci95(&accs);
            summaries.push(PairSummary {
                kind: ExperimentKind::Projection,
                pair: *pair,
                n_seeds: results.len(),
                accuracy,
                ci95,
                movement_by_token: Vec::new(),
            });
        }
        write_results_csv(&table, &self.path("results.csv"))?;
        write_text(&self.path("summary.md"), &self.summary_markdown(&summaries, &projections))?;
        self.figures(&ks_runs, &projections)?;
        Ok(Report { table, summaries })
    }

    fn summary_markdown(
        &self,
        summaries: &[PairSummary],
        projections: &BTreeMap<CategoryPair, Vec<ProjectionResult>>,
    ) -> String {
        let mut s = String::new();
        let base = read_json::<TrainReport>(&self.path("train_report.json")).ok();
        if let Some(acc) = base.and_then(|r| r.heldout_accuracy) {
            let _ = writeln!(s, "Base model held-out category accuracy: {acc:.3}\n");
        }
        let _ = writeln!(s, "## Novel-word learning (accuracy over seeds, relative movement per token)\n");
        let _ = writeln!(s, "| pair | seeds | accuracy | 95% CI | movement (first) | movement (second) |");
        let _ = writeln!(s, "|---|---|---|---|---|---|");
        for p in summaries.iter().filter(|p| p.kind == ExperimentKind::Ks) {
            let m = |i: usize| p.movement_by_token.get(i).map_or("-".into(), |x| format!("{x:.3}"));
            let _ = writeln!(
                s,
                "| {} | {} | {:.3} | ±{:.3} | {} | {} |",
                p.pair,
                p.n_seeds,
                p.accuracy,
                p.ci95,
                m(0),
                m(1)
            );
        }
        let _ = writeln!(s, "\n## Region projection, no training (accuracy over seeds)\n");
        let _ = writeln!(s, "| pair | seeds | accuracy | 95% CI | pairings per seed | BERT-base reference |");
        let _ = writeln!(s, "|---|---|---|---|---|---|");
        for p in summaries.iter().filter(|p| p.kind == ExperimentKind::Projection) {
            let name = p.pair.name();
            let reference = REFERENCE_PROJECTION_ACCURACY
                .iter()
                .find(|r| r.0 == name)
                .map_or("-".into(), |r| format!("{:.2} ± {:.2}", r.1, r.2));
            let n = projections[&p.pair][0].per_pairing.len();
            let _ = writeln!(s, "| {name} | {} | {:.3} | ±{:.3} | {n} | {reference} |", p.n_seeds, p.accuracy, p.ci95);
        }
        s
    }

    fn figures(
        &self,
        ks_runs: &BTreeMap<CategoryPair, Vec<KsRun>>,
        projections: &BTreeMap<CategoryPair, Vec<ProjectionResult>>,
    ) -> Result<()> {
        let dir = self.path("figures");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (pair, runs) in ks_runs {
            let geometry: PairGeometry = read_json(&self.geometry_path(*pair))?;
            let run = &runs[0];
            for (token, points) in run.record.tokens.iter().zip(&run.projected) {
                let title =
                    format!("{} ({}) in the {} plane, seed {}", token.name, token.category, pair, run.record.seed);
                let path = dir.join(format!("movement_{pair}_{}.svg", token.category));
                render_movement_svg(&title, &geometry.exemplar_points, points, &path)?;
            }
            let proj = &projections[pair][0];
            let title = format!("{pair} regions and sampled points, seed {}", proj.seed);
            render_region_svg(
                &title,
                &geometry.exemplar_points,
                &geometry.regions,
                &proj.samples,
                &dir.join(format!("regions_{pair}.svg")),
            )?;
        }
        Ok(())
    }

    pub fn all(&self) -> Result<Report> {
        self.gen()?;
        self.train()?;
        self.ks()?;
        self.project()?;
        self.report()
    }
}
