//! Configuration, persistence, result tables, figures, the staged pipeline
//! and the command-line front end.

mod checkpoint;
mod cli;
mod config;
mod pipeline;
mod results;
mod svg;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use cli::cli_main;
pub use config::RunConfig;
pub use pipeline::{KsRun, PairSummary, Pipeline, Report, REFERENCE_PROJECTION_ACCURACY};
pub use results::{read_results_csv, write_results_csv, ExperimentKind, ResultRow, ResultsTable, RESULTS_HEADER};
pub use svg::{movement_svg, region_svg, render_movement_svg, render_region_svg};
