//! Generated text checked against an independent template matcher.

use std::collections::HashSet;

use lexcat::corpus::{
    build_lexicon, generate_corpus, make_heldout, make_test_set, make_training_stimuli, CategoryPair, LexicalCategory,
    Lexicon, Stimulus, TokenId,
};
use proptest::prelude::*;

const PATTERNS: [&str; 5] = ["the N V .", "the N V the N .", "the A N V .", "the N V R .", "the A N V the N R ."];

fn symbol(lexicon: &Lexicon, id: TokenId) -> String {
    match lexicon.token(id) {
        "the" => "the".into(),
        "." => ".".into(),
        w => match lexicon.category_of(w) {
            Some(LexicalCategory::Noun) => "N".into(),
            Some(LexicalCategory::Verb) => "V".into(),
            Some(LexicalCategory::Adj) => "A".into(),
            Some(LexicalCategory::Adverb) => "R".into(),
            None => format!("<{w}>"),
        },
    }
}

fn pattern(lexicon: &Lexicon, sentence: &[TokenId]) -> String {
    sentence.iter().map(|&t| symbol(lexicon, t)).collect::<Vec<_>>().join(" ")
}

fn symbol_of(c: LexicalCategory) -> &'static str {
    match c {
        LexicalCategory::Noun => "N",
        LexicalCategory::Verb => "V",
        LexicalCategory::Adj => "A",
        LexicalCategory::Adverb => "R",
    }
}

/// The item's frame with its mask read as the item's category.
fn licensed(lexicon: &Lexicon, item: &Stimulus) -> bool {
    let mut syms: Vec<String> = item.tokens.iter().map(|&t| symbol(lexicon, t)).collect();
    syms[item.mask_position] = symbol_of(item.category).into();
    PATTERNS.contains(&syms.join(" ").as_str())
}

#[test]
fn twenty_thousand_sentences_parse() {
    let lexicon = build_lexicon(60, 1);
    let corpus = generate_corpus(&lexicon, 20_000, 7);
    assert_eq!(corpus.len(), 20_000);
    let mut seen = HashSet::new();
    for s in &corpus {
        let p = pattern(&lexicon, s);
        assert!(PATTERNS.contains(&p.as_str()), "unparseable: {p}");
        seen.insert(p);
    }
    assert_eq!(seen.len(), PATTERNS.len(), "every template occurs");
    assert_eq!(corpus, generate_corpus(&lexicon, 20_000, 7));
    assert_ne!(corpus, generate_corpus(&lexicon, 20_000, 8));
}

#[test]
fn every_content_word_is_used() {
    let lexicon = build_lexicon(60, 1);
    let corpus = generate_corpus(&lexicon, 20_000, 7);
    let used: HashSet<TokenId> = corpus.iter().flatten().copied().collect();
    for c in LexicalCategory::ALL {
        for id in lexicon.category_ids(c) {
            assert!(used.contains(&id), "{} never generated", lexicon.token(id));
        }
    }
    assert!(!lexicon.reserved_ids().any(|id| used.contains(&id)));
}

#[test]
fn heldout_items_are_licensed() {
    let lexicon = build_lexicon(60, 1);
    for item in make_heldout(&lexicon, 500, 3) {
        assert!(licensed(&lexicon, &item));
        assert_eq!(lexicon.category_of_id(item.target), Some(item.category));
    }
}

#[test]
fn test_sets_are_lexically_disjoint_for_all_pairs() {
    let lexicon = build_lexicon(60, 1);
    let a = lexicon.reserved_ids().start;
    for pair in CategoryPair::all() {
        for seed in 1..=3 {
            let train = make_training_stimuli(pair, &lexicon, a, a + 1, seed).unwrap();
            for s in [&train.0, &train.1] {
                assert!(licensed(&lexicon, s));
            }
            let train_words: HashSet<TokenId> =
                train.0.content_words(&lexicon).chain(train.1.content_words(&lexicon)).collect();
            let test = make_test_set(pair, &lexicon, 100, &train, seed).unwrap();
            assert_eq!(test.items.len(), 200);
            for c in pair.categories() {
                assert_eq!(test.items.iter().filter(|i| i.category == c).count(), 100);
            }
            for item in &test.items {
                assert!(licensed(&lexicon, item), "{pair}: {}", pattern(&lexicon, &item.tokens));
                assert!(item.content_words(&lexicon).all(|w| !train_words.contains(&w)));
                assert!(!item.tokens.contains(&a) && !item.tokens.contains(&(a + 1)));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn any_seed_parses(lex_seed in 0u64..1000, seed in any::<u64>(), n in 10usize..40) {
        let lexicon = build_lexicon(n, lex_seed);
        for s in generate_corpus(&lexicon, 200, seed) {
            let p = pattern(&lexicon, &s);
            prop_assert!(PATTERNS.contains(&p.as_str()), "{}", p);
        }
    }
}
