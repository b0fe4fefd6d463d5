//! Compares the hand-written backward pass of the whole encoder against
//! central finite differences on a miniature model.
//!
//! ```text
//! cargo run --example gradient_check
//! ```

use lexcat::corpus::{build_lexicon, make_heldout};
use lexcat::model::{init_model, loss_and_grads, ModelConfig, Parameters};
use lexcat::nn::finite_diff_check;

fn main() {
    let lexicon = build_lexicon(10, 1);
    let config =
        ModelConfig { d_model: 8, n_layers: 1, n_heads: 2, init_std: 0.3, ..ModelConfig::for_lexicon(&lexicon) };
    let params = init_model(&config, 17);
    let batch = make_heldout(&lexicon, 4, 2);
    let (loss, grads) = loss_and_grads(&params, &batch);
    println!("{} parameters, loss {loss:.6}", params.tensors.n_scalars());
    for eps in [1e-3, 1e-4, 1e-5, 1e-6] {
        let err = finite_diff_check(
            |t| loss_and_grads(&Parameters { config: params.config.clone(), tensors: t.clone() }, &batch).0,
            &params.tensors,
            &grads,
            eps,
        );
        println!("epsilon {eps:e}: max relative error {err:.3e}");
    }
}
