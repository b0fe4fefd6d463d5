//! A small post-layer-norm transformer encoder with a tied-embedding
//! masked-LM head, trained from scratch on the synthetic corpus.

mod encoder;
mod params;
mod train;

pub use encoder::{hidden_states, mlm_hidden, mlm_logits};
pub use params::{init_model, ModelConfig, Parameters, EMBEDDING, OUTPUT_BIAS, POSITIONAL};
pub use train::{
    argmax, loss_and_grads, loss_and_grads_sum, masked_accuracy, train_base, BaseTrainConfig, MaskedExample,
    TrainReport,
};
