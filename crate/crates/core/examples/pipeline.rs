//! Runs every pipeline stage on a reduced configuration and prints the
//! results table. The same stages are available from the `lexcat` binary.
//!
//! ```text
//! cargo run --release --example pipeline -- [out_dir]
//! ```

use lexcat::harness::{Pipeline, RunConfig};

fn main() -> lexcat::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let out = std::env::args().nth(1).unwrap_or_else(|| "pipeline-out".into());
    let config = RunConfig::from_toml_str(
        r#"
        seeds = [1, 2, 3]
        n_sentences = 4000
        epochs = 1
        "#,
    )?;
    let report = Pipeline::new(config, &out).all()?;
    print!("{}", report.table.to_csv_string());
    for s in &report.summaries {
        println!("{} {}: {:.3} ± {:.3} over {} seeds", s.kind, s.pair, s.accuracy, s.ci95, s.n_seeds);
    }
    println!("artifacts in {out}/");
    Ok(())
}
