//! Samples novel embeddings from the 2-D regions occupied by each category's
//! exemplars, maps them back into embedding space, and evaluates them with no
//! training at all.
//!
//! ```text
//! cargo run --release --example region_projection -- [pair] [n_per_category]
//! ```

use lexcat::corpus::{build_lexicon, generate_corpus, make_heldout, CategoryPair};
use lexcat::geometry::{fit_pair_geometry, run_projection_experiment, ExemplarConfig, PcaScope, ProjectionConfig};
use lexcat::model::{init_model, train_base, BaseTrainConfig, ModelConfig};
use lexcat::protocol::ks_test_set;

fn main() -> lexcat::Result<()> {
    let mut args = std::env::args().skip(1);
    let pair: CategoryPair = args.next().as_deref().unwrap_or("adj-verb").parse()?;
    let n: usize = args.next().map_or(20, |s| s.parse().expect("n_per_category"));

    let lexicon = build_lexicon(60, 1);
    let corpus = generate_corpus(&lexicon, 4000, 7);
    let heldout = make_heldout(&lexicon, 500, 11);
    let init = init_model(&ModelConfig::for_lexicon(&lexicon), 1);
    let (base, _) =
        train_base(&init, &corpus, &lexicon, &heldout, &BaseTrainConfig { epochs: 1, ..Default::default() }, 1)?;

    let geometry = fit_pair_geometry(&base, &lexicon, pair, &ExemplarConfig::default(), PcaScope::Pair)?;
    for (c, r) in &geometry.regions {
        println!("{c} region: mean ({:.3}, {:.3}), covariance {:?}", r.mean.x, r.mean.y, r.covariance);
    }
    let test = ks_test_set(&lexicon, pair, 100, 1)?;
    for seed in 1..=3 {
        let config = ProjectionConfig { n_novel_per_category: n, seed };
        let result = run_projection_experiment(&base, &lexicon, &geometry, &test, &config)?;
        println!(
            "seed {seed}: accuracy {:.3} ± {:.3} over {} sampled pairs",
            result.result.accuracy, result.result.ci95, result.result.n_items
        );
    }
    Ok(())
}
