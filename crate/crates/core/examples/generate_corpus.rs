//! Builds a lexicon, samples sentences from the category grammar, and shows
//! the single-exposure training stimuli and test items for one category pair.
//!
//! ```text
//! cargo run --example generate_corpus -- [pair]
//! ```

use lexcat::corpus::{
    build_lexicon, generate_corpus, grammar_templates, make_test_set, make_training_stimuli, CategoryPair,
};
use lexcat::protocol::{token_namer, NovelToken};

fn main() -> lexcat::Result<()> {
    let pair: CategoryPair = std::env::args().nth(1).as_deref().unwrap_or("noun-adj").parse()?;
    let lexicon = build_lexicon(60, 1);
    println!("vocabulary: {} tokens, {} reserved for novel words", lexicon.vocab_size(), lexicon.reserved());
    for t in grammar_templates() {
        println!("template {}: {}", t.index(), t.pattern());
    }

    println!("\nsample sentences:");
    for s in generate_corpus(&lexicon, 6, 7) {
        let words: Vec<&str> = s.iter().map(|&t| lexicon.token(t)).collect();
        println!("  {}", words.join(" "));
    }

    let first = lexicon.reserved_ids().start;
    let tokens: Vec<NovelToken> = pair
        .categories()
        .iter()
        .enumerate()
        .map(|(i, &category)| NovelToken { name: lexicon.token(first + i).to_string(), token_id: first + i, category })
        .collect();
    let name = token_namer(&lexicon, &tokens);
    let train = make_training_stimuli(pair, &lexicon, first, first + 1, 1)?;
    println!("\n{pair} training stimuli (sentence, mask position, target, category):");
    for s in [&train.0, &train.1] {
        println!("  {}", s.to_line(&name));
    }
    let test = make_test_set(pair, &lexicon, 100, &train, 1)?;
    println!("\n{} test items, e.g.:", test.items.len());
    for s in test.items.iter().step_by(50) {
        println!("  {}", s.to_line(&name));
    }
    Ok(())
}
