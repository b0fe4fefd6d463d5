//! Teaches two novel words from one sentence each, updating only their
//! embedding rows, and tests whether the model places them by category in
//! sentences it has never seen them in.
//!
//! ```text
//! cargo run --release --example novel_word -- [pair] [seed]
//! ```

use lexcat::corpus::{build_lexicon, generate_corpus, make_heldout, CategoryPair};
use lexcat::model::{init_model, train_base, BaseTrainConfig, ModelConfig};
use lexcat::protocol::{run_ks_experiment, KsConfig};

fn main() -> lexcat::Result<()> {
    let mut args = std::env::args().skip(1);
    let pair: CategoryPair = args.next().as_deref().unwrap_or("noun-verb").parse()?;
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let lexicon = build_lexicon(60, 1);
    let corpus = generate_corpus(&lexicon, 4000, 7);
    let heldout = make_heldout(&lexicon, 500, 11);
    let init = init_model(&ModelConfig::for_lexicon(&lexicon), 1);
    let hyper = BaseTrainConfig { epochs: 1, ..Default::default() };
    let (base, report) = train_base(&init, &corpus, &lexicon, &heldout, &hyper, 1)?;
    println!("base model held-out accuracy {:.3}", report.heldout_accuracy.unwrap_or(f64::NAN));

    let record = run_ks_experiment(&base, &lexicon, pair, &KsConfig::default(), seed)?;
    println!("\ntraining stimuli:");
    for line in &record.training_lines {
        println!("  {line}");
    }
    println!("\nloss {:.4} -> {:.4} after {} steps", record.initial_loss, record.final_loss, record.steps_taken);
    let r = &record.result;
    println!("{pair}: accuracy {:.3} ± {:.3} on {} unseen items (chance {})", r.accuracy, r.ci95, r.n_items, r.chance);
    Ok(())
}
