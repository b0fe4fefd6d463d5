use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Gradients, NamedTensors};

/// Which elements of one parameter may change.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selection {
    All,
    /// Rows of a 2-D parameter (rows are contiguous along the last axis).
    Rows(BTreeSet<usize>),
}

/// The set of trainable parameter elements. Anything not selected is never
/// written by [`optimizer_step`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrainableFilter {
    entries: BTreeMap<String, Selection>,
}

impl TrainableFilter {
    /// Freezes everything.
    pub fn none() -> Self {
        TrainableFilter::default()
    }

    pub fn all(params: &NamedTensors) -> Self {
        Self::matching(params, |_| true)
    }

    /// Whole tensors whose name satisfies `pred`.
    pub fn matching(params: &NamedTensors, pred: impl Fn(&str) -> bool) -> Self {
        TrainableFilter {
            entries: params.names().filter(|n| pred(n)).map(|n| (n.to_string(), Selection::All)).collect(),
        }
    }

    /// Only the listed rows of one tensor.
    pub fn rows(name: &str, rows: impl IntoIterator<Item = usize>) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(name.to_string(), Selection::Rows(rows.into_iter().collect()));
        TrainableFilter { entries }
    }

    pub fn selection(&self, name: &str) -> Option<&Selection> {
        self.entries.get(name)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimizerKind {
    pub fn adam() -> Self {
        OptimizerKind::Adam { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub step: u64,
    first_moment: Option<NamedTensors>,
    second_moment: Option<NamedTensors>,
}

impl OptimizerState {
    pub fn sgd(learning_rate: f64) -> Self {
        Self::new(OptimizerKind::Sgd, learning_rate)
    }

    pub fn adam(learning_rate: f64) -> Self {
        Self::new(OptimizerKind::adam(), learning_rate)
    }

    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        OptimizerState { kind, learning_rate, step: 0, first_moment: None, second_moment: None }
    }
}

fn selected_ranges(sel: &Selection, len: usize, row_len: usize) -> Vec<std::ops::Range<usize>> {
    match sel {
        Selection::All => std::iter::once(0..len).collect(),
        Selection::Rows(rows) => rows
            .iter()
            .map(|&r| {
                assert!((r + 1) * row_len <= len, "selected row {r} out of range");
                r * row_len..(r + 1) * row_len
            })
            .collect(),
    }
}

/// Applies one update to the elements selected by `filter`.
///
/// SGD: `p -= lr * g`. Adam: bias-corrected moments, `p -= lr * m̂ / (sqrt(v̂) + eps)`.
/// Parameters without a gradient entry are left alone. Panics if a gradient's
/// shape differs from its parameter.
pub fn optimizer_step(
    params: &mut NamedTensors,
    grads: &Gradients,
    state: &mut OptimizerState,
    filter: &TrainableFilter,
) {
    for (name, g) in grads.iter() {
        assert_eq!(params.get(name).shape(), g.shape(), "gradient shape mismatch for {name}");
    }
    state.step += 1;
    let lr = state.learning_rate;
    match state.kind {
        OptimizerKind::Sgd => {
            for (name, p) in params.iter_mut() {
                let (Some(sel), Some(g)) = (filter.selection(name), grads.try_get(name)) else {
                    continue;
                };
                let row_len = p.row_len();
                let len = p.len();
                let pd = p.data_mut();
                for r in selected_ranges(sel, len, row_len) {
                    for i in r {
                        pd[i] -= lr * g.data()[i];
                    }
                }
            }
        }
        OptimizerKind::Adam { beta1, beta2, epsilon } => {
            let m = state.first_moment.get_or_insert_with(|| params.zeros_like());
            let v = state.second_moment.get_or_insert_with(|| params.zeros_like());
            let t = state.step as i32;
            let c1 = 1.0 - beta1.powi(t);
            let c2 = 1.0 - beta2.powi(t);
            for (name, p) in params.iter_mut() {
                let (Some(sel), Some(g)) = (filter.selection(name), grads.try_get(name)) else {
                    continue;
                };
                let row_len = p.row_len();
                let len = p.len();
                let pd = p.data_mut();
                let md = m.get_mut(name).data_mut();
                let vd = v.get_mut(name).data_mut();
                let gd = g.data();
                for r in selected_ranges(sel, len, row_len) {
                    for i in r {
                        md[i] = beta1 * md[i] + (1.0 - beta1) * gd[i];
                        vd[i] = beta2 * vd[i] + (1.0 - beta2) * gd[i] * gd[i];
                        let mhat = md[i] / c1;
                        let vhat = vd[i] / c2;
                        pd[i] -= lr * mhat / (vhat.sqrt() + epsilon);
                    }
                }
            }
        }
    }
}
