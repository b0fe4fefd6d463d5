use super::{Gradients, NamedTensors};

/// `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares `analytic` against central differences of `loss_fn` for every
/// coordinate of every parameter and returns the largest relative error.
/// Parameters missing from `analytic` are treated as having zero gradient.
pub fn finite_diff_check(
    loss_fn: impl Fn(&NamedTensors) -> f64,
    params: &NamedTensors,
    analytic: &Gradients,
    epsilon: f64,
) -> f64 {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let mut probe = params.clone();
    let names: Vec<String> = params.names().map(str::to_string).collect();
    let mut worst: f64 = 0.0;
    for name in &names {
        for i in 0..params.get(name).len() {
            let orig = params.get(name).data()[i];
            probe.get_mut(name).data_mut()[i] = orig + epsilon;
            let up = loss_fn(&probe);
            probe.get_mut(name).data_mut()[i] = orig - epsilon;
            let down = loss_fn(&probe);
            probe.get_mut(name).data_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * epsilon);
            let a = analytic.try_get(name).map_or(0.0, |g| g.data()[i]);
            worst = worst.max(relative_error(a, numeric));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Tensor;

    fn one(name: &str, v: Vec<f64>) -> NamedTensors {
        let mut m = NamedTensors::new();
        let n = v.len();
        m.insert(name, Tensor::from_vec(&[n], v));
        m
    }

    #[test]
    fn linear_loss_is_exact() {
        let c = [0.5, -2.0, 3.25];
        let theta = one("t", vec![1.0, 2.0, -1.0]);
        let grad = one("t", c.to_vec());
        let err =
            finite_diff_check(|p| p.get("t").data().iter().zip(&c).map(|(a, b)| a * b).sum(), &theta, &grad, 1e-5);
        assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn quadratic_recovers_derivative() {
        let theta = one("t", vec![3.0]);
        let grad = one("t", vec![6.0]);
        let err = finite_diff_check(|p| p.get("t").data()[0].powi(2), &theta, &grad, 1e-5);
        assert!(err * 6.0 <= 1e-9, "{err}");
    }

    #[test]
    fn wrong_gradient_is_flagged() {
        let theta = one("t", vec![3.0]);
        let grad = one("t", vec![5.0]);
        let err = finite_diff_check(|p| p.get("t").data()[0].powi(2), &theta, &grad, 1e-5);
        assert!((err - 1.0 / 6.0).abs() < 1e-6);
    }
}
