//! Projects novel-word embeddings into the PCA plane of known category
//! exemplars and measures how far learning moved them toward their own
//! category. Writes one SVG per token.
//!
//! ```text
//! cargo run --release --example movement -- [pair] [out_dir]
//! ```

use std::path::PathBuf;

use lexcat::corpus::{build_lexicon, generate_corpus, make_heldout, CategoryPair};
use lexcat::geometry::{fit_pair_geometry, movement_analysis, project_trajectory, ExemplarConfig, PcaScope};
use lexcat::harness::render_movement_svg;
use lexcat::model::{init_model, train_base, BaseTrainConfig, ModelConfig};
use lexcat::protocol::{run_ks_experiment, KsConfig};

fn main() -> lexcat::Result<()> {
    let mut args = std::env::args().skip(1);
    let pair: CategoryPair = args.next().as_deref().unwrap_or("noun-adj").parse()?;
    let out = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));

    let lexicon = build_lexicon(60, 1);
    let corpus = generate_corpus(&lexicon, 4000, 7);
    let heldout = make_heldout(&lexicon, 500, 11);
    let init = init_model(&ModelConfig::for_lexicon(&lexicon), 1);
    let (base, _) =
        train_base(&init, &corpus, &lexicon, &heldout, &BaseTrainConfig { epochs: 1, ..Default::default() }, 1)?;

    let geometry = fit_pair_geometry(&base, &lexicon, pair, &ExemplarConfig::default(), PcaScope::Pair)?;
    println!(
        "PCA on {}: explained variance {:.4}, {:.4}",
        geometry.basis.fit_set_description, geometry.basis.explained_variance[0], geometry.basis.explained_variance[1]
    );
    let record = run_ks_experiment(&base, &lexicon, pair, &KsConfig::default(), 1)?;
    for t in &record.trajectories {
        let m = movement_analysis(t, &geometry.basis, &geometry.exemplar_points);
        println!(
            "{} ({}): distance to centroid {:.3} -> {:.3}, relative movement {}",
            t.token.name,
            t.token.category,
            m.initial_distance,
            m.final_distance,
            m.relative_movement.map_or("undefined".into(), |x| format!("{x:.3}"))
        );
        let path = out.join(format!("movement_{pair}_{}.svg", t.token.category));
        let title = format!("{} ({})", t.token.name, t.token.category);
        render_movement_svg(&title, &geometry.exemplar_points, &project_trajectory(t, &geometry.basis), &path)?;
        println!("  wrote {}", path.display());
    }
    Ok(())
}
