use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::LexicalCategory;
use crate::error::{Error, Result};
use crate::rng;

/// Index into the model vocabulary.
pub type TokenId = usize;

pub const THE: &str = "the";
pub const PERIOD: &str = ".";
pub const MASK: &str = "[MASK]";
pub const PAD: &str = "[PAD]";

const FUNCTION_WORDS: [&str; 4] = [THE, PERIOD, MASK, PAD];

/// Display names handed out to reserved novel-token slots, in slot order.
/// Generated lexicon words never take one of these shapes.
pub const NOVEL_NAMES: [&str; 16] = [
    "wug", "dax", "blick", "fep", "toma", "zav", "kiki", "gorp", "mipen", "tulver", "wozzle", "pilk", "zorb", "nefa",
    "quim", "jeb",
];

const CONSONANTS: &[u8] = b"bcdfghjklmnprstvwz";
const VOWELS: &[u8] = b"aeiou";

/// Content words by category plus the function words, with a fixed token-id
/// layout: function words first, then each category's words in canonical
/// category order, then `reserved` slots for novel tokens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LexiconFile", into = "LexiconFile")]
pub struct Lexicon {
    words: BTreeMap<LexicalCategory, Vec<String>>,
    category_of: HashMap<String, LexicalCategory>,
    tokens: Vec<String>,
    ids: HashMap<String, TokenId>,
    reserved: usize,
}

#[derive(Serialize, Deserialize)]
struct LexiconFile {
    reserved: usize,
    words: BTreeMap<LexicalCategory, Vec<String>>,
}

impl TryFrom<LexiconFile> for Lexicon {
    type Error = Error;

    fn try_from(f: LexiconFile) -> Result<Self> {
        Lexicon::new(f.words, f.reserved)
    }
}

impl From<Lexicon> for LexiconFile {
    fn from(l: Lexicon) -> Self {
        LexiconFile { reserved: l.reserved, words: l.words }
    }
}

impl Lexicon {
    /// Builds a lexicon from explicit word lists. Every category needs at
    /// least one word; words must be unique, whitespace-free, and distinct
    /// from the function words and reserved novel names.
    pub fn new(words: BTreeMap<LexicalCategory, Vec<String>>, reserved: usize) -> Result<Self> {
        if reserved > NOVEL_NAMES.len() {
            return Err(Error::InvalidLexicon(format!(
                "at most {} reserved novel slots are supported, got {reserved}",
                NOVEL_NAMES.len()
            )));
        }
        let mut tokens: Vec<String> = FUNCTION_WORDS.iter().map(|s| s.to_string()).collect();
        let mut category_of = HashMap::new();
        for cat in LexicalCategory::ALL {
            let list = words.get(&cat).map(Vec::as_slice).unwrap_or(&[]);
            if list.is_empty() {
                return Err(Error::InvalidLexicon(format!("category {cat} has no words")));
            }
            for w in list {
                if w.is_empty() || w.chars().any(char::is_whitespace) {
                    return Err(Error::InvalidLexicon(format!("malformed word {w:?}")));
                }
                if FUNCTION_WORDS.contains(&w.as_str()) || NOVEL_NAMES.contains(&w.as_str()) {
                    return Err(Error::InvalidLexicon(format!("word {w:?} collides with a reserved token")));
                }
                if let Some(prev) = category_of.insert(w.clone(), cat) {
                    return Err(Error::InvalidLexicon(format!("word {w:?} appears in both {prev} and {cat}")));
                }
                tokens.push(w.clone());
            }
        }
        for name in &NOVEL_NAMES[..reserved] {
            tokens.push(name.to_string());
        }
        let ids = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let words = LexicalCategory::ALL.iter().map(|&c| (c, words[&c].clone())).collect();
        Ok(Lexicon { words, category_of, tokens, ids, reserved })
    }

    pub fn words(&self, cat: LexicalCategory) -> &[String] {
        &self.words[&cat]
    }

    pub fn function_words(&self) -> &[&'static str] {
        &FUNCTION_WORDS
    }

    pub fn category_of(&self, word: &str) -> Option<LexicalCategory> {
        self.category_of.get(word).copied()
    }

    /// Category of a content-word token id.
    pub fn category_of_id(&self, id: TokenId) -> Option<LexicalCategory> {
        self.tokens.get(id).and_then(|t| self.category_of(t))
    }

    pub fn n_content_words(&self) -> usize {
        self.category_of.len()
    }

    /// Vocabulary size including reserved novel slots.
    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    pub fn reserved(&self) -> usize {
        self.reserved
    }

    /// Token ids of the reserved novel-token slots.
    pub fn reserved_ids(&self) -> std::ops::Range<TokenId> {
        let start = self.tokens.len() - self.reserved;
        start..self.tokens.len()
    }

    pub fn is_reserved(&self, id: TokenId) -> bool {
        self.reserved_ids().contains(&id)
    }

    pub fn the_id(&self) -> TokenId {
        0
    }

    pub fn period_id(&self) -> TokenId {
        1
    }

    pub fn mask_id(&self) -> TokenId {
        2
    }

    pub fn pad_id(&self) -> TokenId {
        3
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id]
    }

    /// Token ids of one category's words, in lexicon order.
    pub fn category_ids(&self, cat: LexicalCategory) -> Vec<TokenId> {
        self.words(cat).iter().map(|w| self.ids[w]).collect()
    }

    /// Membership table indexed by token id.
    pub fn category_table(&self) -> Vec<Option<LexicalCategory>> {
        (0..self.tokens.len()).map(|id| self.category_of_id(id)).collect()
    }
}

/// Generates `n_per_category` pronounceable consonant-vowel words per
/// category, deterministic per seed.
pub fn build_lexicon(n_per_category: usize, seed: u64) -> Lexicon {
    build_lexicon_with_reserved(n_per_category, NOVEL_NAMES.len(), seed)
}

fn build_lexicon_with_reserved(n_per_category: usize, reserved: usize, seed: u64) -> Lexicon {
    assert!(n_per_category >= 10, "lexicon needs at least 10 words per category");
    let mut rng = rng::stream(seed, "lexicon");
    let mut seen: HashSet<String> = FUNCTION_WORDS.iter().chain(NOVEL_NAMES.iter()).map(|s| s.to_string()).collect();
    let mut words = BTreeMap::new();
    for cat in LexicalCategory::ALL {
        let mut list = Vec::with_capacity(n_per_category);
        while list.len() < n_per_category {
            let len = rng.random_range(3..=6);
            let w: String = (0..len)
                .map(|i| {
                    let pool = if i % 2 == 0 { CONSONANTS } else { VOWELS };
                    pool[rng.random_range(0..pool.len())] as char
                })
                .collect();
            if seen.insert(w.clone()) {
                list.push(w);
            }
        }
        words.insert(cat, list);
    }
    Lexicon::new(words, reserved).expect("generated lexicon is valid by construction")
}
