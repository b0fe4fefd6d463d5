//! Trains the toy masked language model on the synthetic corpus and reports
//! held-out category-level accuracy.
//!
//! ```text
//! cargo run --release --example train_base -- [n_sentences] [epochs]
//! ```

use lexcat::corpus::{build_lexicon, generate_corpus, make_heldout};
use lexcat::model::{init_model, train_base, BaseTrainConfig, ModelConfig};

fn main() -> lexcat::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let n_sentences: usize = args.next().map_or(20_000, |s| s.parse().expect("n_sentences"));
    let epochs: usize = args.next().map_or(5, |s| s.parse().expect("epochs"));

    let lexicon = build_lexicon(60, 1);
    let corpus = generate_corpus(&lexicon, n_sentences, 7);
    let heldout = make_heldout(&lexicon, 1000, 11);
    let config = ModelConfig::for_lexicon(&lexicon);
    let params = init_model(&config, 1);
    let hyper = BaseTrainConfig { epochs, ..Default::default() };
    let (_, report) = train_base(&params, &corpus, &lexicon, &heldout, &hyper, 1)?;
    for (i, l) in report.epoch_losses.iter().enumerate() {
        println!("epoch {}: loss {l:.4}", i + 1);
    }
    println!("held-out category accuracy {:.3} in {:.1}s", report.heldout_accuracy.unwrap_or(f64::NAN), report.seconds);
    Ok(())
}
