//! Function-word change and non-cognate content-word replacement.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus_io::{is_punctuation, Corpus, FunctionWordList};
use crate::error::{check_probability, Error, Result};
use crate::phonology::{noise_until_changed, PhonologyTables};
use crate::rng::{unit_rng, Stream};

/// Sound-change level used to rewrite a selected function word.
pub const FUNCTION_NOISE_THETA: f64 = 0.5;
const FUNCTION_ATTEMPTS: usize = 10;
const NONWORD_RETRIES: usize = 50;

/// A position in a padded word: `Bow` before the first character, `Eow` after
/// the last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sym {
    Bow,
    Char(char),
    Eow,
}

type Table = BTreeMap<Sym, u64>;

/// Character 3-gram model over padded words, with bigram and unigram tables
/// kept for backoff when a length constraint empties a context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharNgramModel {
    pub order: usize,
    trigram: BTreeMap<(Sym, Sym), Table>,
    bigram: BTreeMap<Sym, Table>,
    unigram: Table,
    pub vocabulary: BTreeSet<String>,
}

fn total(t: &Table) -> u64 {
    t.values().sum()
}

fn draw<R: Rng + ?Sized>(candidates: &[(Sym, u64)], rng: &mut R) -> Option<Sym> {
    let sum: u64 = candidates.iter().map(|(_, n)| n).sum();
    if sum == 0 {
        return None;
    }
    let mut x = rng.random_range(0..sum);
    for &(s, n) in candidates {
        if x < n {
            return Some(s);
        }
        x -= n;
    }
    None
}

pub fn train_char_lm(corpus: &Corpus) -> Result<CharNgramModel> {
    let mut lm = CharNgramModel {
        order: 3,
        trigram: BTreeMap::new(),
        bigram: BTreeMap::new(),
        unigram: Table::new(),
        vocabulary: BTreeSet::new(),
    };
    for word in corpus.word_tokens() {
        lm.vocabulary.insert(word.to_owned());
        let mut padded = vec![Sym::Bow, Sym::Bow];
        padded.extend(word.chars().map(Sym::Char));
        padded.push(Sym::Eow);
        for w in padded.windows(3) {
            *lm.trigram.entry((w[0], w[1])).or_default().entry(w[2]).or_default() += 1;
            *lm.bigram.entry(w[1]).or_default().entry(w[2]).or_default() += 1;
            *lm.unigram.entry(w[2]).or_default() += 1;
        }
    }
    if lm.vocabulary.is_empty() {
        return Err(Error::EmptyInput {
            what: "language-model training corpus",
        });
    }
    Ok(lm)
}

impl CharNgramModel {
    /// Maximum-likelihood `P(next | a, b)`.
    pub fn prob(&self, a: Sym, b: Sym, next: Sym) -> f64 {
        match self.trigram.get(&(a, b)) {
            Some(t) => *t.get(&next).unwrap_or(&0) as f64 / total(t) as f64,
            None => 0.0,
        }
    }

    /// Characters seen in training.
    pub fn alphabet(&self) -> BTreeSet<char> {
        self.unigram
            .keys()
            .filter_map(|s| match s {
                Sym::Char(c) => Some(*c),
                _ => None,
            })
            .collect()
    }

    /// Interpolated probability, never zero for a seen or unseen character.
    fn smoothed(&self, a: Sym, b: Sym, next: Sym) -> f64 {
        let bi = self
            .bigram
            .get(&b)
            .map(|t| *t.get(&next).unwrap_or(&0) as f64 / total(t) as f64)
            .unwrap_or(0.0);
        // add-one over the alphabet plus the end symbol
        let v = self.unigram.len() as f64 + 1.0;
        let uni = (*self.unigram.get(&next).unwrap_or(&0) as f64 + 1.0) / (total(&self.unigram) as f64 + v);
        0.8 * self.prob(a, b, next) + 0.15 * bi + 0.05 * uni
    }

    /// Natural-log probability of `word` including the end symbol.
    pub fn log_prob(&self, word: &str) -> f64 {
        let mut padded = vec![Sym::Bow, Sym::Bow];
        padded.extend(word.chars().map(Sym::Char));
        padded.push(Sym::Eow);
        padded.windows(3).map(|w| self.smoothed(w[0], w[1], w[2]).ln()).sum()
    }

    /// Per-symbol perplexity over the word tokens of `corpus`.
    pub fn perplexity(&self, corpus: &Corpus) -> f64 {
        let (mut lp, mut n) = (0.0, 0usize);
        for w in corpus.word_tokens() {
            lp += self.log_prob(w);
            n += w.chars().count() + 1;
        }
        if n == 0 {
            return f64::NAN;
        }
        (-lp / n as f64).exp()
    }

    /// Candidate next characters, backing off until one survives `keep`.
    fn candidates(&self, a: Sym, b: Sym, keep: impl Fn(char) -> bool) -> Vec<(Sym, u64)> {
        let filter = |t: &Table| -> Vec<(Sym, u64)> {
            t.iter()
                .filter(|(s, _)| matches!(s, Sym::Char(c) if keep(*c)))
                .map(|(s, n)| (*s, *n))
                .collect()
        };
        for t in [self.trigram.get(&(a, b)), self.bigram.get(&b), Some(&self.unigram)]
            .into_iter()
            .flatten()
        {
            let c = filter(t);
            if !c.is_empty() {
                return c;
            }
        }
        // nothing passes the filter anywhere; fall back to any character
        self.unigram
            .iter()
            .filter(|(s, _)| matches!(s, Sym::Char(_)))
            .map(|(s, n)| (*s, *n))
            .collect()
    }

    /// Samples exactly `len` characters. The end symbol is suppressed before
    /// the last position and implied after it. The first and last characters
    /// avoid punctuation so the result survives re-tokenization.
    pub fn sample_of_length<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> String {
        let (mut a, mut b) = (Sym::Bow, Sym::Bow);
        let mut out = String::new();
        for i in 0..len {
            let edge = i == 0 || i + 1 == len;
            let cands = self.candidates(a, b, |c| !(edge && is_punctuation(c)));
            let next = draw(&cands, rng).expect("trained model has characters");
            if let Sym::Char(c) = next {
                out.push(c);
            }
            a = b;
            b = next;
        }
        out
    }
}

/// Zero-truncated Poisson draw with mean parameter `l`.
pub fn sample_length<R: Rng + ?Sized>(l: usize, rng: &mut R) -> usize {
    let poisson = Poisson::new(l.max(1) as f64).expect("positive rate");
    loop {
        let n = poisson.sample(rng) as usize;
        if n >= 1 {
            return n;
        }
    }
}

/// A non-word of `target_len` characters that is neither in the model's
/// vocabulary nor in `taken`. After repeated collisions the length grows by one.
pub fn gen_nonword<R: Rng + ?Sized>(
    target_len: usize,
    lm: &CharNgramModel,
    taken: &BTreeSet<String>,
    rng: &mut R,
) -> String {
    let mut len = target_len.max(1);
    loop {
        for _ in 0..NONWORD_RETRIES {
            let w = lm.sample_of_length(len, rng);
            if !lm.vocabulary.contains(&w) && !taken.contains(&w) {
                return w;
            }
        }
        log::debug!("no fresh non-word of length {len}; extending");
        len += 1;
    }
}

/// Global word replacements from the two lexical noisers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LexicalMaps {
    #[serde(rename = "function")]
    pub function_map: BTreeMap<String, String>,
    #[serde(rename = "content")]
    pub content_map: BTreeMap<String, String>,
    pub theta_f: f64,
    pub theta_c: f64,
    pub seed: u64,
}

impl LexicalMaps {
    pub fn get(&self, word: &str) -> Option<&str> {
        self.function_map
            .get(word)
            .or_else(|| self.content_map.get(word))
            .map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.function_map.is_empty() && self.content_map.is_empty()
    }
}

pub fn build_lexical_maps(
    corpus: &Corpus,
    function_words: &FunctionWordList,
    theta_f: f64,
    theta_c: f64,
    tables: &PhonologyTables,
    lm: &CharNgramModel,
    seed: u64,
) -> Result<LexicalMaps> {
    check_probability("theta_f", theta_f)?;
    check_probability("theta_c", theta_c)?;
    let mut maps = LexicalMaps {
        theta_f,
        theta_c,
        seed,
        ..LexicalMaps::default()
    };
    let types = corpus.word_types();
    let mut taken = BTreeSet::new();

    for &w in types.iter().filter(|w| function_words.contains(w)) {
        let mut rng = unit_rng(seed, Stream::FunctionWord, w);
        if rng.random::<f64>() >= theta_f {
            continue;
        }
        match noise_until_changed(w, FUNCTION_NOISE_THETA, tables, &mut rng, FUNCTION_ATTEMPTS) {
            Some(r) => {
                taken.insert(r.clone());
                maps.function_map.insert(w.to_owned(), r);
            }
            None => log::warn!("function word {w:?} selected but could not be changed; skipped"),
        }
    }

    for &w in types.iter().filter(|w| !function_words.contains(w)) {
        let mut rng = unit_rng(seed, Stream::ContentWord, w);
        if rng.random::<f64>() >= theta_c {
            continue;
        }
        let len = sample_length(w.chars().count(), &mut rng);
        let r = gen_nonword(len, lm, &taken, &mut rng);
        taken.insert(r.clone());
        maps.content_map.insert(w.to_owned(), r);
    }
    Ok(maps)
}

pub fn apply_lexical(corpus: &Corpus, maps: &LexicalMaps) -> Corpus {
    corpus.map_words(|w| maps.get(w).map(str::to_owned))
}
