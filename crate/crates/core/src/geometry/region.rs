use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Point2;
use crate::corpus::LexicalCategory;
use crate::error::{Error, Result};
use crate::rng;

/// A 2-D normal density over one category's exemplar points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region2 {
    pub category: LexicalCategory,
    pub mean: Point2,
    /// Symmetric positive semi-definite `[[sxx, sxy], [sxy, syy]]`.
    pub covariance: [[f64; 2]; 2],
}

impl Region2 {
    /// Covariance eigenvalues (descending) and the unit eigenvector of the
    /// larger one.
    pub fn principal_axes(&self) -> ([f64; 2], [f64; 2]) {
        sym_eigen(self.covariance)
    }
}

/// Eigenvalues (descending) and the unit eigenvector of the larger one.
fn sym_eigen(c: [[f64; 2]; 2]) -> ([f64; 2], [f64; 2]) {
    let (a, b, d) = (c[0][0], c[0][1], c[1][1]);
    let half_tr = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (l1, l2) = (half_tr + disc, half_tr - disc);
    let v = if b != 0.0 {
        let (x, y) = (l1 - d, b);
        let n = x.hypot(y);
        [x / n, y / n]
    } else if a >= d {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    ([l1, l2], v)
}

/// Maximum-likelihood fit (covariance normalized by `n`). Negative
/// eigenvalues from round-off are clamped to zero; rank-deficient input is
/// accepted with a warning.
pub fn fit_region(category: LexicalCategory, points: &[Point2]) -> Result<Region2> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!("region fit needs at least 3 points, got {}", points.len())));
    }
    let n = points.len() as f64;
    let mean = Point2::centroid(points);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.x - mean.x, p.y - mean.y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let mut cov = [[sxx / n, sxy / n], [sxy / n, syy / n]];
    let (lambda, v) = sym_eigen(cov);
    if lambda[1] <= 1e-12 * lambda[0].abs().max(1e-300) {
        log::warn!("{category} region covariance is rank-deficient (eigenvalues {lambda:?}); clamping");
        let l1 = lambda[0].max(0.0);
        cov = [[l1 * v[0] * v[0], l1 * v[0] * v[1]], [l1 * v[0] * v[1], l1 * v[1] * v[1]]];
    }
    Ok(Region2 { category, mean, covariance: cov })
}

/// Lower-triangular `L` with `L·Lᵀ = cov`, tolerating zero pivots.
fn cholesky(cov: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let l11 = cov[0][0].max(0.0).sqrt();
    let l21 = if l11 > 0.0 { cov[1][0] / l11 } else { 0.0 };
    let l22 = (cov[1][1] - l21 * l21).max(0.0).sqrt();
    [[l11, 0.0], [l21, l22]]
}

/// `n` i.i.d. draws `mean + L·z`, deterministic per seed.
pub fn sample_region(region: &Region2, n: usize, seed: u64) -> Vec<Point2> {
    let l = cholesky(region.covariance);
    let mut rng = rng::stream(seed, &format!("region/{}", region.category));
    (0..n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            Point2 { x: region.mean.x + l[0][0] * z1, y: region.mean.y + l[1][0] * z1 + l[1][1] * z2 }
        })
        .collect()
}
