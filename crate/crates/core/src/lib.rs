//! Lexical category inference for novel tokens in a small masked language model.
//!
//! The crate trains a toy transformer encoder on a synthetic four-category
//! grammar (nouns, adjectives, adverbs, verbs), then teaches it novel words
//! from a single disambiguating fill-in-the-blank exposure while every
//! parameter except the novel embedding rows stays frozen. Two analyses
//! relate the learned embeddings to known category exemplars:
//!
//! * movement tracking in a 2D PCA plane fit on exemplar embeddings, and
//! * sampling novel embeddings from 2D category regions, projecting them
//!   back into embedding space, and evaluating with no training at all.
//!
//! Modules, bottom-up:
//!
//! | module | contents |
//! |---|---|
//! | [`corpus`] | lexicon, grammar, corpus and stimulus generation |
//! | [`nn`] | tensors, differentiable primitives, optimizers, gradient checking |
//! | [`model`] | the encoder, its masked-LM head, base training |
//! | [`protocol`] | novel-token registration, embedding-only learning, pairwise evaluation |
//! | [`geometry`] | PCA, movement, 2D regions, the projection experiment |
//! | [`harness`] | configuration, persistence, CSV and SVG output, the pipeline |
//!
//! See `examples/` for one runnable program per capability.

pub mod corpus;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod model;
pub mod nn;
pub mod protocol;
pub(crate) mod rng;

pub use error::{Error, Result};
