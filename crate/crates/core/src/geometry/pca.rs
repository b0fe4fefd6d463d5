use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::ops::dot;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn centroid(points: &[Point2]) -> Point2 {
        let n = points.len() as f64;
        Point2 { x: points.iter().map(|p| p.x).sum::<f64>() / n, y: points.iter().map(|p| p.y).sum::<f64>() / n }
    }
}

/// Mean plus the top two principal directions of a set of vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaBasis {
    pub mean: Vec<f64>,
    pub components: [Vec<f64>; 2],
    pub explained_variance: [f64; 2],
    /// What the basis was fit on.
    pub fit_set_description: String,
}

const MAX_SWEEPS: usize = 80;

/// One-sided Jacobi SVD of an `n × d` matrix given as `d` columns. Returns
/// the singular values and right singular vectors (as columns), unsorted.
fn jacobi_svd(mut cols: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = cols.len();
    let mut v: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..d {
            for q in p + 1..d {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut cols, &mut v] {
                    let (lo, hi) = m.split_at_mut(q);
                    for (a, b) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let (x, y) = (*a, *b);
                        *a = c * x - s * y;
                        *b = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    (sigma, v)
}

/// Flips `v` so its largest-magnitude coordinate (first on ties) is positive.
fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let mut k = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[k].abs() {
            k = i;
        }
    }
    if v[k] < 0.0 {
        for x in &mut v {
            *x = -*x;
        }
    }
    v
}

/// Mean-centred SVD; components are the top-2 right singular vectors,
/// explained variance is `σ² / (n - 1)`.
pub fn fit_pca(vectors: &[Vec<f64>]) -> Result<PcaBasis> {
    if vectors.len() < 3 {
        return Err(Error::Degenerate(format!("PCA needs at least 3 vectors, got {}", vectors.len())));
    }
    let d = vectors[0].len();
    if d < 2 || vectors.iter().any(|v| v.len() != d) {
        return Err(Error::Degenerate("PCA needs equal-length vectors of dimension >= 2".into()));
    }
    let n = vectors.len();
    let mut mean = vec![0.0; d];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let cols: Vec<Vec<f64>> = (0..d).map(|j| vectors.iter().map(|v| v[j] - mean[j]).collect()).collect();
    let scale = vectors.iter().flat_map(|v| v.iter()).fold(0.0f64, |a, x| a.max(x.abs()));
    let (sigma, v) = jacobi_svd(cols);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    if sigma[order[0]] <= 1e-12 * (1.0 + scale) * (n as f64).sqrt() {
        return Err(Error::Degenerate("all vectors are identical".into()));
    }
    let var = |k: usize| sigma[order[k]].powi(2) / (n - 1) as f64;
    Ok(PcaBasis {
        components: [canonical_sign(v[order[0]].clone()), canonical_sign(v[order[1]].clone())],
        explained_variance: [var(0), var(1)],
        mean,
        fit_set_description: format!("{n} vectors of dimension {d}"),
    })
}

/// Coordinates of `v - mean` along the two components.
pub fn project(basis: &PcaBasis, v: &[f64]) -> Point2 {
    assert_eq!(v.len(), basis.mean.len(), "dimension mismatch");
    let centred: Vec<f64> = v.iter().zip(&basis.mean).map(|(a, m)| a - m).collect();
    Point2 { x: dot(&centred, &basis.components[0]), y: dot(&centred, &basis.components[1]) }
}

/// `mean + x·PC1 + y·PC2`: residual directions stay at the fit-set mean.
pub fn inverse_project(basis: &PcaBasis, p: Point2) -> Vec<f64> {
    basis
        .mean
        .iter()
        .zip(basis.components[0].iter().zip(&basis.components[1]))
        .map(|(m, (c1, c2))| m + p.x * c1 + p.y * c2)
        .collect()
}
