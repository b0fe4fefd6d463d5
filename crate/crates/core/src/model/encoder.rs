use super::params::{LayerNames, Parameters, EMBEDDING, EMB_LN_BETA, EMB_LN_GAMMA, OUTPUT_BIAS, POSITIONAL};
use crate::nn::ops::{
    axpy, dot, gelu, gelu_backward, layer_norm, layer_norm_backward, linear, linear_backward, softmax_rows,
    softmax_rows_backward, LayerNormCache,
};
use crate::nn::{NamedTensors, Tensor};

/// Additive score for attention to a padding key.
const PAD_SCORE: f64 = -1e9;

struct LayerCache {
    input: Vec<f64>,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    /// `n_heads × len × len` attention weights.
    probs: Vec<f64>,
    ctx: Vec<f64>,
    ln1: LayerNormCache,
    y: Vec<f64>,
    u: Vec<f64>,
    g: Vec<f64>,
    ln2: LayerNormCache,
}

pub(crate) struct Forward {
    pub hidden: Vec<f64>,
    len: usize,
    emb_ln: LayerNormCache,
    layers: Vec<LayerCache>,
}

fn check_input(params: &Parameters, tokens: &[usize]) {
    let cfg = &params.config;
    assert!(!tokens.is_empty(), "empty input sequence");
    assert!(
        tokens.len() <= cfg.max_seq_len,
        "input of length {} exceeds max_seq_len {}",
        tokens.len(),
        cfg.max_seq_len
    );
    assert!(tokens.iter().all(|&t| t < cfg.vocab_size), "token id outside the vocabulary");
}

pub(crate) fn forward(params: &Parameters, tokens: &[usize]) -> Forward {
    check_input(params, tokens);
    let cfg = &params.config;
    let p = &params.tensors;
    let (len, d, f) = (tokens.len(), cfg.d_model, cfg.ffn_dim());
    let (n_heads, dh) = (cfg.n_heads, cfg.head_dim());
    let scale = 1.0 / (dh as f64).sqrt();

    let emb = p.get(EMBEDDING);
    let pos = p.get(POSITIONAL);
    let mut x = vec![0.0; len * d];
    for (t, &tok) in tokens.iter().enumerate() {
        let xt = &mut x[t * d..(t + 1) * d];
        xt.copy_from_slice(emb.row(tok));
        axpy(1.0, pos.row(t), xt);
    }
    let (mut h, emb_ln) = layer_norm(&x, p.get(EMB_LN_GAMMA).data(), p.get(EMB_LN_BETA).data(), d);
    let key_bias: Vec<f64> = tokens.iter().map(|&t| if t == cfg.pad_token_id { PAD_SCORE } else { 0.0 }).collect();

    let mut layers = Vec::with_capacity(cfg.n_layers);
    for l in 0..cfg.n_layers {
        let n = LayerNames::new(l);
        let w = |name: &str| p.get(name).data();
        let q = linear(&h, w(&n.wq), Some(w(&n.bq)), len, d, d);
        let k = linear(&h, w(&n.wk), None, len, d, d);
        let v = linear(&h, w(&n.wv), Some(w(&n.bv)), len, d, d);

        let mut probs = vec![0.0; n_heads * len * len];
        let mut ctx = vec![0.0; len * d];
        for hd in 0..n_heads {
            let off = hd * dh;
            let ph = &mut probs[hd * len * len..(hd + 1) * len * len];
            for i in 0..len {
                let qi = &q[i * d + off..i * d + off + dh];
                for j in 0..len {
                    ph[i * len + j] = scale * dot(qi, &k[j * d + off..j * d + off + dh]) + key_bias[j];
                }
            }
            softmax_rows(ph, len);
            for i in 0..len {
                for j in 0..len {
                    let a = ph[i * len + j];
                    axpy(a, &v[j * d + off..j * d + off + dh], &mut ctx[i * d + off..i * d + off + dh]);
                }
            }
        }
        let attn = linear(&ctx, w(&n.wo), Some(w(&n.bo)), len, d, d);
        let r1: Vec<f64> = h.iter().zip(&attn).map(|(a, b)| a + b).collect();
        let (y, ln1) = layer_norm(&r1, w(&n.ln1_gamma), w(&n.ln1_beta), d);
        let u = linear(&y, w(&n.w1), Some(w(&n.b1)), len, d, f);
        let g = gelu(&u);
        let ff = linear(&g, w(&n.w2), Some(w(&n.b2)), len, f, d);
        let r2: Vec<f64> = y.iter().zip(&ff).map(|(a, b)| a + b).collect();
        let (out, ln2) = layer_norm(&r2, w(&n.ln2_gamma), w(&n.ln2_beta), d);
        let input = std::mem::replace(&mut h, out);
        layers.push(LayerCache { input, q, k, v, probs, ctx, ln1, y, u, g, ln2 });
    }
    Forward { hidden: h, len, emb_ln, layers }
}

/// Backpropagates `dhidden` (gradient w.r.t. the final hidden states) into
/// `grads`, which must share the parameter layout.
pub(crate) fn backward(
    params: &Parameters,
    tokens: &[usize],
    fwd: &Forward,
    dhidden: Vec<f64>,
    grads: &mut NamedTensors,
) {
    let cfg = &params.config;
    let p = &params.tensors;
    let (len, d, f) = (fwd.len, cfg.d_model, cfg.ffn_dim());
    let (n_heads, dh) = (cfg.n_heads, cfg.head_dim());
    let scale = 1.0 / (dh as f64).sqrt();
    let mut dh_out = dhidden;

    for l in (0..cfg.n_layers).rev() {
        let c = &fwd.layers[l];
        let n = LayerNames::new(l);
        let w = |name: &str| p.get(name).data();

        let dr2 = {
            let (dg, db) = two_mut(grads, &n.ln2_gamma, &n.ln2_beta);
            layer_norm_backward(&dh_out, w(&n.ln2_gamma), &c.ln2, dg, db)
        };
        let dg_act = {
            let (dw, db) = two_mut(grads, &n.w2, &n.b2);
            linear_backward(&c.g, w(&n.w2), &dr2, len, f, d, dw, Some(db))
        };
        let du = gelu_backward(&c.u, &dg_act);
        let mut dy = {
            let (dw, db) = two_mut(grads, &n.w1, &n.b1);
            linear_backward(&c.y, w(&n.w1), &du, len, d, f, dw, Some(db))
        };
        axpy(1.0, &dr2, &mut dy);

        let dr1 = {
            let (dg, db) = two_mut(grads, &n.ln1_gamma, &n.ln1_beta);
            layer_norm_backward(&dy, w(&n.ln1_gamma), &c.ln1, dg, db)
        };
        let dctx = {
            let (dw, db) = two_mut(grads, &n.wo, &n.bo);
            linear_backward(&c.ctx, w(&n.wo), &dr1, len, d, d, dw, Some(db))
        };

        let mut dq = vec![0.0; len * d];
        let mut dk = vec![0.0; len * d];
        let mut dv = vec![0.0; len * d];
        let mut dprobs = vec![0.0; len * len];
        for hd in 0..n_heads {
            let off = hd * dh;
            let ph = &c.probs[hd * len * len..(hd + 1) * len * len];
            for i in 0..len {
                let dci = &dctx[i * d + off..i * d + off + dh];
                for j in 0..len {
                    dprobs[i * len + j] = dot(dci, &c.v[j * d + off..j * d + off + dh]);
                    axpy(ph[i * len + j], dci, &mut dv[j * d + off..j * d + off + dh]);
                }
            }
            let dscores = softmax_rows_backward(ph, &dprobs, len);
            for i in 0..len {
                for j in 0..len {
                    let s = scale * dscores[i * len + j];
                    axpy(s, &c.k[j * d + off..j * d + off + dh], &mut dq[i * d + off..i * d + off + dh]);
                    axpy(s, &c.q[i * d + off..i * d + off + dh], &mut dk[j * d + off..j * d + off + dh]);
                }
            }
        }

        let mut dinput = dr1;
        let dx_q = {
            let (dw, db) = two_mut(grads, &n.wq, &n.bq);
            linear_backward(&c.input, w(&n.wq), &dq, len, d, d, dw, Some(db))
        };
        let dx_k = linear_backward(&c.input, w(&n.wk), &dk, len, d, d, grads.get_mut(&n.wk).data_mut(), None);
        let dx_v = {
            let (dw, db) = two_mut(grads, &n.wv, &n.bv);
            linear_backward(&c.input, w(&n.wv), &dv, len, d, d, dw, Some(db))
        };
        for part in [&dx_q, &dx_k, &dx_v] {
            axpy(1.0, part, &mut dinput);
        }
        dh_out = dinput;
    }

    let dx = {
        let (dg, db) = two_mut(grads, EMB_LN_GAMMA, EMB_LN_BETA);
        layer_norm_backward(&dh_out, p.get(EMB_LN_GAMMA).data(), &fwd.emb_ln, dg, db)
    };
    {
        let de = grads.get_mut(EMBEDDING);
        for (t, &tok) in tokens.iter().enumerate() {
            axpy(1.0, &dx[t * d..(t + 1) * d], de.row_mut(tok));
        }
    }
    let dp = grads.get_mut(POSITIONAL);
    for t in 0..len {
        axpy(1.0, &dx[t * d..(t + 1) * d], dp.row_mut(t));
    }
}

/// Two distinct gradient buffers borrowed mutably at once.
fn two_mut<'a>(grads: &'a mut NamedTensors, a: &str, b: &str) -> (&'a mut [f64], &'a mut [f64]) {
    let mut first = None;
    let mut second = None;
    for (name, t) in grads.iter_mut() {
        if name == a {
            first = Some(t.data_mut());
        } else if name == b {
            second = Some(t.data_mut());
        }
    }
    (
        first.unwrap_or_else(|| panic!("no gradient buffer {a:?}")),
        second.unwrap_or_else(|| panic!("no gradient buffer {b:?}")),
    )
}

/// Final-layer hidden states, `len × d_model`.
pub fn hidden_states(params: &Parameters, tokens: &[usize]) -> Tensor {
    let fwd = forward(params, tokens);
    Tensor::from_vec(&[fwd.len, params.config.d_model], fwd.hidden)
}

/// Final hidden state at the masked position.
pub fn mlm_hidden(params: &Parameters, tokens: &[usize], mask_position: usize) -> Vec<f64> {
    assert_eq!(tokens.get(mask_position), Some(&params.config.mask_token_id), "mask_position must hold the mask token");
    let d = params.config.d_model;
    let fwd = forward(params, tokens);
    fwd.hidden[mask_position * d..(mask_position + 1) * d].to_vec()
}

pub(crate) fn logits_from_hidden(params: &Parameters, h: &[f64]) -> Vec<f64> {
    let emb = params.tensors.get(EMBEDDING);
    let bias = params.tensors.get(OUTPUT_BIAS).data();
    (0..params.config.vocab_size).map(|r| dot(emb.row(r), h) + bias[r]).collect()
}

/// Vocabulary logits at the masked position: `hidden · embeddingᵀ + output_bias`.
pub fn mlm_logits(params: &Parameters, tokens: &[usize], mask_position: usize) -> Tensor {
    let h = mlm_hidden(params, tokens, mask_position);
    Tensor::from_vec(&[params.config.vocab_size], logits_from_hidden(params, &h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_lexicon;
    use crate::model::{init_model, ModelConfig};

    fn setup() -> (crate::corpus::Lexicon, Parameters) {
        let lex = build_lexicon(10, 1);
        let mut cfg = ModelConfig::for_lexicon(&lex);
        cfg.d_model = 16;
        cfg.init_std = 0.3;
        let p = init_model(&cfg, 5);
        (lex, p)
    }

    #[test]
    fn untrained_logits_are_finite() {
        let (lex, p) = setup();
        let toks = [lex.the_id(), lex.mask_id(), 10, lex.period_id()];
        let l = mlm_logits(&p, &toks, 1);
        assert_eq!(l.len(), lex.vocab_size());
        assert!(l.is_finite());
    }

    #[test]
    fn symmetric_permutation_gives_identical_logits() {
        let (lex, p) = setup();
        let a = [lex.the_id(), lex.mask_id(), 10, 10, lex.period_id()];
        let mut b = a;
        b.swap(2, 3);
        assert!(mlm_logits(&p, &a, 1).bit_eq(&mlm_logits(&p, &b, 1)));
    }

    #[test]
    fn padding_does_not_change_logits() {
        let (lex, p) = setup();
        let base = vec![lex.the_id(), 12, lex.mask_id(), 30, lex.period_id()];
        let mut padded = base.clone();
        padded.extend([lex.pad_id(); 4]);
        let a = mlm_logits(&p, &base, 2);
        let b = mlm_logits(&p, &padded, 2);
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    #[should_panic(expected = "exceeds max_seq_len")]
    fn over_length_input_is_a_contract_violation() {
        let (lex, p) = setup();
        let mut toks = vec![lex.the_id(); 17];
        toks[0] = lex.mask_id();
        mlm_logits(&p, &toks, 0);
    }

    #[test]
    fn tied_head_row_affects_input_and_output() {
        let (lex, p) = setup();
        let word = 12;
        let toks = [lex.the_id(), lex.mask_id(), word, lex.period_id()];
        let before = mlm_logits(&p, &toks, 1);
        let mut q = p.clone();
        for x in q.tensors.get_mut(EMBEDDING).row_mut(word) {
            *x += 0.5;
        }
        let after = mlm_logits(&q, &toks, 1);
        // Reading: another token's logit moves because the input changed.
        assert_ne!(before.data()[20], after.data()[20]);
        // Predicting: with the input untouched, only this token's logit moves.
        let toks2 = [lex.the_id(), lex.mask_id(), 13, lex.period_id()];
        let b2 = mlm_logits(&p, &toks2, 1);
        let a2 = mlm_logits(&q, &toks2, 1);
        for r in 0..lex.vocab_size() {
            if r == word {
                assert_ne!(b2.data()[r], a2.data()[r]);
            } else {
                assert_eq!(b2.data()[r], a2.data()[r]);
            }
        }
    }
}
