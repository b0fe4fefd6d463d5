use rand::Rng as _;

use super::lexicon::{TokenId, PERIOD, THE};
use super::{LexicalCategory, Lexicon};
use crate::rng;

/// One position of a sentence template.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Word(&'static str),
    Cat(LexicalCategory),
}

use LexicalCategory::{Adj as A, Adverb as R, Noun as N, Verb as V};
use Slot::{Cat as C, Word as W};

const TEMPLATES: [&[Slot]; 5] = [
    &[W(THE), C(N), C(V), W(PERIOD)],
    &[W(THE), C(N), C(V), W(THE), C(N), W(PERIOD)],
    &[W(THE), C(A), C(N), C(V), W(PERIOD)],
    &[W(THE), C(N), C(V), C(R), W(PERIOD)],
    &[W(THE), C(A), C(N), C(V), W(THE), C(N), C(R), W(PERIOD)],
];

/// Longest sentence the grammar produces.
pub const MAX_SENTENCE_LEN: usize = 8;

/// A sentence template of the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Template {
    index: usize,
}

impl Template {
    pub fn index(self) -> usize {
        self.index
    }

    pub fn slots(self) -> &'static [Slot] {
        TEMPLATES[self.index]
    }

    pub fn len(self) -> usize {
        self.slots().len()
    }

    pub fn is_empty(self) -> bool {
        false
    }

    /// Space-separated pattern such as `the N V .`.
    pub fn pattern(self) -> String {
        self.slots()
            .iter()
            .map(|s| match s {
                Slot::Word(w) => (*w).to_string(),
                Slot::Cat(c) => match c {
                    N => "N".into(),
                    V => "V".into(),
                    A => "ADJ".into(),
                    R => "ADV".into(),
                },
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// The five sentence templates, in a fixed order.
pub fn grammar_templates() -> Vec<Template> {
    (0..TEMPLATES.len()).map(|index| Template { index }).collect()
}

/// A template with one category slot singled out as the blank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frame {
    pub template: Template,
    pub target_slot: usize,
}

impl Frame {
    fn new(template: usize, target_slot: usize) -> Self {
        let template = Template { index: template };
        assert!(matches!(template.slots()[target_slot], Slot::Cat(_)));
        Frame { template, target_slot }
    }

    pub fn category(self) -> LexicalCategory {
        match self.template.slots()[self.target_slot] {
            Slot::Cat(c) => c,
            Slot::Word(_) => unreachable!("frame target is always a category slot"),
        }
    }

    /// How many words of each category the non-target slots consume.
    pub fn demand(self) -> [usize; 4] {
        let mut d = [0; 4];
        for (i, s) in self.template.slots().iter().enumerate() {
            if let (Slot::Cat(c), true) = (s, i != self.target_slot) {
                d[c.index()] += 1;
            }
        }
        d
    }
}

/// The single disambiguating frame used to teach a novel word of `cat`.
pub fn training_frame(cat: LexicalCategory) -> Frame {
    match cat {
        N => Frame::new(0, 1),
        V => Frame::new(1, 2),
        A => Frame::new(2, 1),
        R => Frame::new(3, 3),
    }
}

/// Every (template, slot) position whose blank is licensed for `cat`.
pub fn test_frames(cat: LexicalCategory) -> Vec<Frame> {
    let mut out = Vec::new();
    for (t, slots) in TEMPLATES.iter().enumerate() {
        for (i, s) in slots.iter().enumerate() {
            if *s == Slot::Cat(cat) {
                out.push(Frame::new(t, i));
            }
        }
    }
    out
}

/// Fills a template, asking `pick` for a word of each category slot.
pub(crate) fn instantiate(
    template: Template,
    lexicon: &Lexicon,
    mut pick: impl FnMut(usize, LexicalCategory) -> TokenId,
) -> Vec<TokenId> {
    template
        .slots()
        .iter()
        .enumerate()
        .map(|(i, s)| match s {
            Slot::Word(w) => lexicon.id(w).expect("function word in vocabulary"),
            Slot::Cat(c) => pick(i, *c),
        })
        .collect()
}

/// Samples `n_sentences` grammatical sentences: a uniform template, then a
/// uniform word per category slot.
pub fn generate_corpus(lexicon: &Lexicon, n_sentences: usize, seed: u64) -> Vec<Vec<TokenId>> {
    let mut rng = rng::stream(seed, "corpus");
    let ids: Vec<Vec<TokenId>> = LexicalCategory::ALL.iter().map(|&c| lexicon.category_ids(c)).collect();
    (0..n_sentences)
        .map(|_| {
            let t = Template { index: rng.random_range(0..TEMPLATES.len()) };
            instantiate(t, lexicon, |_, c| {
                let pool = &ids[c.index()];
                pool[rng.random_range(0..pool.len())]
            })
        })
        .collect()
}
