//! Numeric core: row-major `f64` tensors, differentiable primitives with
//! hand-derived backward passes, optimizers, and a central-difference
//! gradient checker.

mod gradcheck;
pub mod ops;
mod optim;
mod tensor;

pub use gradcheck::{finite_diff_check, relative_error};
pub use optim::{optimizer_step, OptimizerKind, OptimizerState, Selection, TrainableFilter};
pub use tensor::{Gradients, NamedTensors, Tensor};
