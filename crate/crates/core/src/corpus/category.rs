use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Word class. Declaration order is the canonical order used to name pairs
/// (`noun-adj`, `adj-adverb`, ..., `adverb-verb`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexicalCategory {
    Noun,
    Adj,
    Adverb,
    Verb,
}

impl LexicalCategory {
    pub const ALL: [LexicalCategory; 4] =
        [LexicalCategory::Noun, LexicalCategory::Adj, LexicalCategory::Adverb, LexicalCategory::Verb];

    pub fn as_str(self) -> &'static str {
        match self {
            LexicalCategory::Noun => "noun",
            LexicalCategory::Adj => "adj",
            LexicalCategory::Adverb => "adverb",
            LexicalCategory::Verb => "verb",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for LexicalCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LexicalCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "noun" | "n" => Ok(LexicalCategory::Noun),
            "adj" | "adjective" => Ok(LexicalCategory::Adj),
            "adverb" | "adv" => Ok(LexicalCategory::Adverb),
            "verb" | "v" => Ok(LexicalCategory::Verb),
            other => Err(Error::Parse(format!("unknown lexical category {other:?}"))),
        }
    }
}

/// Two distinct categories, always stored in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CategoryPair {
    first: LexicalCategory,
    second: LexicalCategory,
}

impl CategoryPair {
    /// Returns `None` when both categories are the same.
    pub fn new(a: LexicalCategory, b: LexicalCategory) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(CategoryPair { first: a, second: b }),
            std::cmp::Ordering::Greater => Some(CategoryPair { first: b, second: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// The six pairs in canonical order.
    pub fn all() -> Vec<CategoryPair> {
        let mut out = Vec::with_capacity(6);
        for (i, &a) in LexicalCategory::ALL.iter().enumerate() {
            for &b in &LexicalCategory::ALL[i + 1..] {
                out.push(CategoryPair { first: a, second: b });
            }
        }
        out
    }

    pub fn first(self) -> LexicalCategory {
        self.first
    }

    pub fn second(self) -> LexicalCategory {
        self.second
    }

    pub fn categories(self) -> [LexicalCategory; 2] {
        [self.first, self.second]
    }

    pub fn contains(self, c: LexicalCategory) -> bool {
        self.first == c || self.second == c
    }

    /// Slug such as `noun-verb`.
    pub fn name(self) -> String {
        format!("{}-{}", self.first, self.second)
    }
}

impl fmt::Display for CategoryPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.first, self.second)
    }
}

impl FromStr for CategoryPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (a, b) = s
            .split_once(['-', '_'])
            .ok_or_else(|| Error::Parse(format!("category pair {s:?} is not of the form a-b")))?;
        CategoryPair::new(a.parse()?, b.parse()?)
            .ok_or_else(|| Error::Parse(format!("category pair {s:?} repeats a category")))
    }
}

impl TryFrom<String> for CategoryPair {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<CategoryPair> for String {
    fn from(p: CategoryPair) -> String {
        p.name()
    }
}
