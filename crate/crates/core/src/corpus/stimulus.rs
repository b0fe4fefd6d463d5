use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::grammar::{instantiate, test_frames, training_frame, Frame};
use super::lexicon::TokenId;
use super::{generate_corpus, CategoryPair, LexicalCategory, Lexicon};
use crate::error::{Error, Result};
use crate::rng;

/// A fill-in-the-blank item: a sentence with exactly one mask and the token
/// expected there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stimulus {
    pub tokens: Vec<TokenId>,
    pub mask_position: usize,
    pub target: TokenId,
    pub category: LexicalCategory,
}

impl Stimulus {
    /// `tok tok ... tok<TAB>mask_position<TAB>target<TAB>category`
    pub fn to_line(&self, name_of: impl Fn(TokenId) -> String) -> String {
        let toks: Vec<String> = self.tokens.iter().map(|&t| name_of(t)).collect();
        format!("{}\t{}\t{}\t{}", toks.join(" "), self.mask_position, name_of(self.target), self.category)
    }

    pub fn from_line(line: &str, id_of: impl Fn(&str) -> Option<TokenId>, mask_id: TokenId) -> Result<Self> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [toks, pos, target, cat] = fields[..] else {
            return Err(Error::Parse(format!("expected 4 tab-separated fields in {line:?}")));
        };
        let lookup = |t: &str| id_of(t).ok_or_else(|| Error::Parse(format!("unknown token {t:?}")));
        let tokens = toks.split(' ').map(lookup).collect::<Result<Vec<_>>>()?;
        let mask_position: usize = pos.parse().map_err(|_| Error::Parse(format!("bad mask position {pos:?}")))?;
        let masks = tokens.iter().filter(|&&t| t == mask_id).count();
        if masks != 1 || tokens.get(mask_position) != Some(&mask_id) {
            return Err(Error::Parse(format!("stimulus must have exactly one mask at {mask_position}: {line:?}")));
        }
        Ok(Stimulus { tokens, mask_position, target: lookup(target)?, category: cat.parse()? })
    }

    /// Content words (non-function, non-mask) occurring in the frame.
    pub fn content_words<'a>(&'a self, lexicon: &'a Lexicon) -> impl Iterator<Item = TokenId> + 'a {
        self.tokens.iter().copied().filter(move |&t| lexicon.category_of_id(t).is_some())
    }
}

/// Renders stimuli one per line.
pub fn write_stimuli<'a>(items: impl IntoIterator<Item = &'a Stimulus>, name_of: impl Fn(TokenId) -> String) -> String {
    let mut out = String::new();
    for s in items {
        out.push_str(&s.to_line(&name_of));
        out.push('\n');
    }
    out
}

/// Lexically disjoint evaluation items for one category pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestSet {
    pub pair: CategoryPair,
    pub items: Vec<Stimulus>,
    pub n_per_category: usize,
}

fn fill_frame(
    frame: Frame,
    lexicon: &Lexicon,
    target: TokenId,
    mut pick: impl FnMut(LexicalCategory) -> TokenId,
) -> Stimulus {
    let mask = lexicon.mask_id();
    let tokens = instantiate(frame.template, lexicon, |i, c| if i == frame.target_slot { mask } else { pick(c) });
    Stimulus { tokens, mask_position: frame.target_slot, target, category: frame.category() }
}

/// One disambiguating exposure per category of `pair`: `novel_a` is taught
/// in the first category's training frame, `novel_b` in the second's. The
/// two frames share no content word.
pub fn make_training_stimuli(
    pair: CategoryPair,
    lexicon: &Lexicon,
    novel_a: TokenId,
    novel_b: TokenId,
    seed: u64,
) -> Result<(Stimulus, Stimulus)> {
    for id in [novel_a, novel_b] {
        if !lexicon.is_reserved(id) {
            return Err(Error::NotNovel(id));
        }
    }
    if novel_a == novel_b {
        return Err(Error::InvalidLexicon("the two novel tokens must differ".into()));
    }
    let frames = [training_frame(pair.first()), training_frame(pair.second())];
    let mut rng = rng::stream(seed, &format!("train-stimuli/{pair}"));
    // Drawing every slot of both frames without replacement keeps them disjoint.
    let mut pools: Vec<Vec<TokenId>> = LexicalCategory::ALL
        .iter()
        .map(|&c| {
            let mut ids = lexicon.category_ids(c);
            ids.shuffle(&mut rng);
            ids
        })
        .collect();
    for c in LexicalCategory::ALL {
        let need: usize = frames.iter().map(|f| f.demand()[c.index()]).sum();
        if need > pools[c.index()].len() {
            return Err(Error::InsufficientLexicon(format!(
                "training frames for {pair} need {need} distinct {c} words, lexicon has {}",
                pools[c.index()].len()
            )));
        }
    }
    let mut take = |c: LexicalCategory| pools[c.index()].pop().expect("demand checked");
    let a = fill_frame(frames[0], lexicon, novel_a, &mut take);
    let b = fill_frame(frames[1], lexicon, novel_b, &mut take);
    Ok((a, b))
}

/// `n_per_category` test items per category of `pair`, drawn from every
/// frame position licensing that category, using only content words absent
/// from both training frames. Targets are the training stimuli's targets.
pub fn make_test_set(
    pair: CategoryPair,
    lexicon: &Lexicon,
    n_per_category: usize,
    train: &(Stimulus, Stimulus),
    seed: u64,
) -> Result<TestSet> {
    if train.0.category != pair.first() || train.1.category != pair.second() {
        return Err(Error::InvalidLexicon(format!(
            "training stimuli ({}, {}) do not match pair {pair}",
            train.0.category, train.1.category
        )));
    }
    let used: HashSet<TokenId> = train.0.content_words(lexicon).chain(train.1.content_words(lexicon)).collect();
    let pools: Vec<Vec<TokenId>> = LexicalCategory::ALL
        .iter()
        .map(|&c| lexicon.category_ids(c).into_iter().filter(|t| !used.contains(t)).collect())
        .collect();
    for c in LexicalCategory::ALL {
        if pools[c.index()].is_empty() {
            return Err(Error::InsufficientLexicon(format!(
                "no {c} words left for {pair} test frames after excluding the training frames"
            )));
        }
    }
    let mut rng = rng::stream(seed, &format!("test-set/{pair}"));
    let mut items = Vec::with_capacity(2 * n_per_category);
    for (cat, target) in [(pair.first(), train.0.target), (pair.second(), train.1.target)] {
        let frames = test_frames(cat);
        for _ in 0..n_per_category {
            let frame = frames[rng.random_range(0..frames.len())];
            let item = fill_frame(frame, lexicon, target, |c| {
                let pool = &pools[c.index()];
                pool[rng.random_range(0..pool.len())]
            });
            items.push(item);
        }
    }
    Ok(TestSet { pair, items, n_per_category })
}

/// Held-out base-model items: fresh grammatical sentences with one content
/// position masked; the target is the original word.
pub fn make_heldout(lexicon: &Lexicon, n: usize, seed: u64) -> Vec<Stimulus> {
    let mut rng = rng::stream(seed, "heldout");
    let sentences = generate_corpus(lexicon, n, rng.random());
    sentences
        .into_iter()
        .map(|mut tokens| {
            let content: Vec<usize> =
                (0..tokens.len()).filter(|&i| lexicon.category_of_id(tokens[i]).is_some()).collect();
            let pos = content[rng.random_range(0..content.len())];
            let target = tokens[pos];
            tokens[pos] = lexicon.mask_id();
            let category = lexicon.category_of_id(target).expect("content word");
            Stimulus { tokens, mask_position: pos, target, category }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::corpus::build_lexicon;
    use LexicalCategory::*;

    fn novel(lex: &Lexicon) -> (TokenId, TokenId) {
        let r = lex.reserved_ids();
        (r.start, r.start + 1)
    }

    fn name(lex: &Lexicon) -> impl Fn(TokenId) -> String + '_ {
        |t| lex.token(t).to_string()
    }

    #[test]
    fn noun_adj_training_shapes() {
        let lex = build_lexicon(60, 1);
        let (a, b) = novel(&lex);
        let pair = CategoryPair::new(Noun, Adj).unwrap();
        let (s1, s2) = make_training_stimuli(pair, &lex, a, b, 3).unwrap();
        let line1 = s1.to_line(name(&lex));
        let line2 = s2.to_line(name(&lex));
        assert!(line1.starts_with("the [MASK] "), "{line1}");
        assert!(line1.ends_with(" .\t1\twug\tnoun"), "{line1}");
        assert!(line2.starts_with("the [MASK] "), "{line2}");
        assert!(line2.ends_with(" .\t1\tdax\tadj"), "{line2}");
        assert_eq!(s1.tokens.len(), 4);
        assert_eq!(lex.category_of_id(s1.tokens[2]), Some(Verb));
        assert_eq!(lex.category_of_id(s2.tokens[2]), Some(Noun));
        assert_eq!(lex.category_of_id(s2.tokens[3]), Some(Verb));
        let w1: HashSet<_> = s1.content_words(&lex).collect();
        let w2: HashSet<_> = s2.content_words(&lex).collect();
        assert!(w1.is_disjoint(&w2));
        assert_eq!(make_training_stimuli(pair, &lex, a, b, 3).unwrap(), (s1, s2));
    }

    #[test]
    fn training_frames_disjoint_for_all_pairs() {
        let lex = build_lexicon(10, 2);
        let (a, b) = novel(&lex);
        for pair in CategoryPair::all() {
            for seed in 0..20 {
                let (s1, s2) = make_training_stimuli(pair, &lex, a, b, seed).unwrap();
                let w1: HashSet<_> = s1.content_words(&lex).collect();
                assert!(s2.content_words(&lex).all(|w| !w1.contains(&w)));
                for s in [&s1, &s2] {
                    assert_eq!(s.tokens.iter().filter(|&&t| t == lex.mask_id()).count(), 1);
                    assert_eq!(s.tokens[s.mask_position], lex.mask_id());
                }
            }
        }
    }

    #[test]
    fn rejects_non_novel_targets() {
        let lex = build_lexicon(10, 2);
        let pair = CategoryPair::new(Noun, Verb).unwrap();
        assert!(matches!(make_training_stimuli(pair, &lex, 5, 44, 0), Err(Error::NotNovel(5))));
    }

    #[test]
    fn test_set_size_and_disjointness() {
        let lex = build_lexicon(60, 1);
        let (a, b) = novel(&lex);
        for pair in CategoryPair::all() {
            let train = make_training_stimuli(pair, &lex, a, b, 9).unwrap();
            let ts = make_test_set(pair, &lex, 100, &train, 9).unwrap();
            assert_eq!(ts.items.len(), 200);
            let used: HashSet<_> = train.0.content_words(&lex).chain(train.1.content_words(&lex)).collect();
            for (i, item) in ts.items.iter().enumerate() {
                let want = if i < 100 { (pair.first(), a) } else { (pair.second(), b) };
                assert_eq!((item.category, item.target), want);
                assert!(item.content_words(&lex).all(|w| !used.contains(&w)));
                assert_eq!(item.tokens[item.mask_position], lex.mask_id());
            }
        }
    }

    fn tiny_lexicon(counts: [usize; 4]) -> Lexicon {
        let mut words = BTreeMap::new();
        for c in LexicalCategory::ALL {
            words.insert(c, (0..counts[c.index()]).map(|i| format!("{c}{i}")).collect());
        }
        Lexicon::new(words, 2).unwrap()
    }

    #[test]
    fn boundary_lexicon() {
        // noun-adj training uses one verb in the noun frame, a noun and a
        // second verb in the adj frame; the test pool needs one word of every
        // category beyond those.
        let pair = CategoryPair::new(Noun, Adj).unwrap();
        let enough = tiny_lexicon([2, 1, 1, 3]);
        let (a, b) = novel(&enough);
        let train = make_training_stimuli(pair, &enough, a, b, 0).unwrap();
        let ts = make_test_set(pair, &enough, 1, &train, 0).unwrap();
        assert_eq!(ts.items.len(), 2);

        let short = tiny_lexicon([1, 1, 1, 3]);
        let (a, b) = novel(&short);
        let train = make_training_stimuli(pair, &short, a, b, 0).unwrap();
        assert!(matches!(make_test_set(pair, &short, 1, &train, 0), Err(Error::InsufficientLexicon(_))));

        let no_verbs = tiny_lexicon([2, 1, 1, 1]);
        let (a, b) = novel(&no_verbs);
        assert!(matches!(make_training_stimuli(pair, &no_verbs, a, b, 0), Err(Error::InsufficientLexicon(_))));
    }

    #[test]
    fn line_round_trip() {
        let lex = build_lexicon(10, 4);
        for s in make_heldout(&lex, 50, 1) {
            let line = s.to_line(name(&lex));
            let back = Stimulus::from_line(&line, |t| lex.id(t), lex.mask_id()).unwrap();
            assert_eq!(back, s);
        }
        assert!(Stimulus::from_line("the . \t0\tthe\tnoun", |t| lex.id(t), lex.mask_id()).is_err());
    }

    #[test]
    fn heldout_targets_match_category() {
        let lex = build_lexicon(10, 4);
        for s in make_heldout(&lex, 200, 2) {
            assert_eq!(lex.category_of_id(s.target), Some(s.category));
        }
    }
}
