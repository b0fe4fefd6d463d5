//! Embedding-space geometry: a 2-D PCA plane fit on category exemplars,
//! movement of novel tokens within it, and category regions sampled and
//! projected back into embedding space.

mod movement;
mod pca;
mod projection;
mod region;

pub use movement::{movement_analysis, project_trajectory, MovementRecord};
pub use pca::{fit_pca, inverse_project, project, PcaBasis, Point2};
pub use projection::{
    evaluate_sample_pairs, exemplar_embeddings, fit_pair_geometry, install_pairing, run_projection_experiment,
    ExemplarConfig, PairGeometry, PcaScope, ProjectionConfig, ProjectionResult,
};
pub use region::{fit_region, sample_region, Region2};
