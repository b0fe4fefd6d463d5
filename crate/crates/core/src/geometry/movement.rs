use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{project, PcaBasis, Point2};
use crate::corpus::LexicalCategory;
use crate::protocol::{NovelToken, Trajectory};

/// How far a novel token travelled toward its category's exemplar centroid
/// in the PCA plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MovementRecord {
    pub token: NovelToken,
    pub initial_distance: f64,
    pub final_distance: f64,
    /// `(initial - final) / initial`; absent when the token starts exactly
    /// on the centroid. 0.0 means no movement, 1.0 arrival at the centroid.
    pub relative_movement: Option<f64>,
}

pub fn project_trajectory(trajectory: &Trajectory, basis: &PcaBasis) -> Vec<Point2> {
    trajectory.snapshots.iter().map(|s| project(basis, &s.embedding)).collect()
}

pub fn movement_analysis(
    trajectory: &Trajectory,
    basis: &PcaBasis,
    exemplar_points: &BTreeMap<LexicalCategory, Vec<Point2>>,
) -> MovementRecord {
    assert!(!trajectory.snapshots.is_empty(), "empty trajectory");
    let cat = trajectory.token.category;
    let points =
        exemplar_points.get(&cat).filter(|p| !p.is_empty()).unwrap_or_else(|| panic!("no exemplar points for {cat}"));
    let centroid = Point2::centroid(points);
    let initial_distance = project(basis, trajectory.initial()).distance(centroid);
    let final_distance = project(basis, trajectory.last()).distance(centroid);
    let relative_movement = (initial_distance > 0.0).then(|| (initial_distance - final_distance) / initial_distance);
    MovementRecord { token: trajectory.token.clone(), initial_distance, final_distance, relative_movement }
}
