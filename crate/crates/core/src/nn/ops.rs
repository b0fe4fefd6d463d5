//! Differentiable primitives on row-major slices.
//!
//! Each forward function has a matching `*_backward` that maps the output
//! gradient to input gradients and accumulates (`+=`) parameter gradients.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += k * x`
#[inline]
pub fn axpy(k: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += k * xi;
    }
}

/// `x · w + b` for `x: rows × d_in`, `w: d_in × d_out`.
pub fn linear(x: &[f64], w: &[f64], b: Option<&[f64]>, rows: usize, d_in: usize, d_out: usize) -> Vec<f64> {
    assert_eq!(x.len(), rows * d_in, "linear: input shape");
    assert_eq!(w.len(), d_in * d_out, "linear: weight shape");
    let mut y = vec![0.0; rows * d_out];
    for r in 0..rows {
        let yr = &mut y[r * d_out..(r + 1) * d_out];
        if let Some(b) = b {
            yr.copy_from_slice(b);
        }
        for (i, &xi) in x[r * d_in..(r + 1) * d_in].iter().enumerate() {
            axpy(xi, &w[i * d_out..(i + 1) * d_out], yr);
        }
    }
    y
}

/// Returns `dx`; accumulates `dw` and `db`.
#[allow(clippy::too_many_arguments)]
pub fn linear_backward(
    x: &[f64],
    w: &[f64],
    dy: &[f64],
    rows: usize,
    d_in: usize,
    d_out: usize,
    dw: &mut [f64],
    db: Option<&mut [f64]>,
) -> Vec<f64> {
    assert_eq!(dy.len(), rows * d_out, "linear_backward: output-gradient shape");
    assert_eq!(dw.len(), w.len(), "linear_backward: weight-gradient shape");
    let mut dx = vec![0.0; rows * d_in];
    for r in 0..rows {
        let dyr = &dy[r * d_out..(r + 1) * d_out];
        let xr = &x[r * d_in..(r + 1) * d_in];
        for i in 0..d_in {
            let wi = &w[i * d_out..(i + 1) * d_out];
            dx[r * d_in + i] = dot(dyr, wi);
            axpy(xr[i], dyr, &mut dw[i * d_out..(i + 1) * d_out]);
        }
    }
    if let Some(db) = db {
        for r in 0..rows {
            axpy(1.0, &dy[r * d_out..(r + 1) * d_out], db);
        }
    }
    dx
}

pub const LAYER_NORM_EPS: f64 = 1e-12;

/// Saved normalized activations for the layer-norm backward pass.
#[derive(Clone, Debug)]
pub struct LayerNormCache {
    pub xhat: Vec<f64>,
    pub inv_std: Vec<f64>,
}

/// Row-wise `gamma * (x - mean) / sqrt(var + eps) + beta`, biased variance.
pub fn layer_norm(x: &[f64], gamma: &[f64], beta: &[f64], dim: usize) -> (Vec<f64>, LayerNormCache) {
    assert_eq!(x.len() % dim, 0, "layer_norm: input shape");
    let rows = x.len() / dim;
    let mut y = vec![0.0; x.len()];
    let mut xhat = vec![0.0; x.len()];
    let mut inv_std = vec![0.0; rows];
    for r in 0..rows {
        let xr = &x[r * dim..(r + 1) * dim];
        let mean = xr.iter().sum::<f64>() / dim as f64;
        let var = xr.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / dim as f64;
        let s = 1.0 / (var + LAYER_NORM_EPS).sqrt();
        inv_std[r] = s;
        for i in 0..dim {
            let h = (xr[i] - mean) * s;
            xhat[r * dim + i] = h;
            y[r * dim + i] = gamma[i] * h + beta[i];
        }
    }
    (y, LayerNormCache { xhat, inv_std })
}

pub fn layer_norm_backward(
    dy: &[f64],
    gamma: &[f64],
    cache: &LayerNormCache,
    dgamma: &mut [f64],
    dbeta: &mut [f64],
) -> Vec<f64> {
    let dim = gamma.len();
    let n = dim as f64;
    let mut dx = vec![0.0; dy.len()];
    let mut dxhat = vec![0.0; dim];
    for (r, &s) in cache.inv_std.iter().enumerate() {
        let dyr = &dy[r * dim..(r + 1) * dim];
        let xh = &cache.xhat[r * dim..(r + 1) * dim];
        for i in 0..dim {
            dxhat[i] = dyr[i] * gamma[i];
            dgamma[i] += dyr[i] * xh[i];
            dbeta[i] += dyr[i];
        }
        let sum = dxhat.iter().sum::<f64>();
        let sum_x = dot(&dxhat, xh);
        for i in 0..dim {
            dx[r * dim + i] = s / n * (n * dxhat[i] - sum - xh[i] * sum_x);
        }
    }
    dx
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

/// Tanh-approximated GELU.
pub fn gelu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| 0.5 * v * (1.0 + (GELU_C * (v + GELU_A * v * v * v)).tanh())).collect()
}

pub fn gelu_backward(x: &[f64], dy: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(dy)
        .map(|(&v, &g)| {
            let t = (GELU_C * (v + GELU_A * v * v * v)).tanh();
            let d = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * v * v);
            g * d
        })
        .collect()
}

/// In-place max-subtracted softmax over each row of width `cols`.
pub fn softmax_rows(x: &mut [f64], cols: usize) {
    for row in x.chunks_mut(cols) {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            z += *v;
        }
        for v in row.iter_mut() {
            *v /= z;
        }
    }
}

/// Gradient through a row softmax given its output `p`.
pub fn softmax_rows_backward(p: &[f64], dp: &[f64], cols: usize) -> Vec<f64> {
    let mut dx = vec![0.0; p.len()];
    for ((pr, dpr), dxr) in p.chunks(cols).zip(dp.chunks(cols)).zip(dx.chunks_mut(cols)) {
        let s = dot(pr, dpr);
        for i in 0..cols {
            dxr[i] = pr[i] * (dpr[i] - s);
        }
    }
    dx
}

/// `-log softmax(logits)[target]` and its gradient `softmax - onehot`.
pub fn softmax_cross_entropy(logits: &[f64], target: usize) -> (f64, Vec<f64>) {
    assert!(target < logits.len(), "target {target} out of range for {} logits", logits.len());
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logits.iter().map(|&l| (l - m).exp()).sum();
    let log_z = m + z.ln();
    let loss = log_z - logits[target];
    let mut grad: Vec<f64> = logits.iter().map(|&l| (l - log_z).exp()).collect();
    grad[target] -= 1.0;
    (loss, grad)
}
