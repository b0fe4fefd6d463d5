//! Synthetic four-category grammar, base corpus, and fill-in-the-blank stimuli.

mod category;
mod grammar;
mod lexicon;
mod stimulus;

pub use category::{CategoryPair, LexicalCategory};
pub use grammar::MAX_SENTENCE_LEN;
pub use grammar::{generate_corpus, grammar_templates, test_frames, training_frame, Frame, Slot, Template};
pub use lexicon::{build_lexicon, Lexicon, TokenId, MASK, NOVEL_NAMES, PAD, PERIOD, THE};
pub use stimulus::{make_heldout, make_test_set, make_training_stimuli, write_stimuli, Stimulus, TestSet};
