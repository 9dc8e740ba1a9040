//! Concatenative suffix change.
//!
//! The `k` most frequent string suffixes of content words stand in for the
//! language's affixes. Each is swapped, with probability `theta_m`, for a
//! heavily sound-changed version of itself, and the swap applies to every
//! content word ending in it.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus_io::{Corpus, FunctionWordList};
use crate::error::{check_probability, Error, Result};
use crate::phonology::{noise_until_changed, PhonologyTables};
use crate::rng::{unit_rng, Stream};

pub const DEFAULT_K: usize = 100;
pub const DEFAULT_MAX_LEN: usize = 5;

/// Sound-change level used to corrupt a selected suffix.
pub const SUFFIX_NOISE_THETA: f64 = 0.5;
const SUFFIX_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuffixCount {
    pub suffix: String,
    pub count: u64,
}

/// Most frequent suffixes, ranked by count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuffixInventory {
    pub suffixes: Vec<SuffixCount>,
    pub k: usize,
    pub max_len: usize,
}

impl SuffixInventory {
    pub fn len(&self) -> usize {
        self.suffixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.suffixes.is_empty()
    }

    pub fn contains(&self, suffix: &str) -> bool {
        self.suffixes.iter().any(|s| s.suffix == suffix)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.suffixes.iter().map(|s| s.suffix.as_str())
    }

    /// Inventory suffixes of `word` that leave a non-empty stem, shortest first.
    pub fn suffixes_of<'a>(&'a self, word: &'a str) -> Vec<&'a str> {
        let n = word.chars().count();
        let mut out: Vec<&str> = self
            .iter()
            .filter(|s| word.ends_with(s) && s.chars().count() < n)
            .collect();
        out.sort_by_key(|s| s.len());
        out
    }
}

/// Counts every proper suffix of length `1..=max_len` over content-word
/// tokens and keeps the top `k`. Ties go to the longer suffix, then the
/// lexicographically smaller one.
pub fn extract_suffixes(
    corpus: &Corpus,
    function_words: &FunctionWordList,
    k: usize,
    max_len: usize,
) -> Result<SuffixInventory> {
    if k == 0 || max_len == 0 {
        return Err(Error::InvalidArgument("k and max_len must be at least 1".into()));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    let mut content_tokens = 0usize;
    for token in corpus.word_tokens().filter(|t| !function_words.contains(t)) {
        content_tokens += 1;
        let starts: Vec<usize> = token.char_indices().map(|(i, _)| i).collect();
        let n = starts.len();
        for len in 1..=max_len.min(n.saturating_sub(1)) {
            *counts.entry(&token[starts[n - len]..]).or_default() += 1;
        }
    }
    if content_tokens == 0 {
        log::warn!("no content words found; suffix inventory is empty");
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| b.0.chars().count().cmp(&a.0.chars().count()))
            .then_with(|| a.0.cmp(b.0))
    });
    ranked.truncate(k);
    Ok(SuffixInventory {
        suffixes: ranked
            .into_iter()
            .map(|(s, count)| SuffixCount {
                suffix: s.to_owned(),
                count,
            })
            .collect(),
        k,
        max_len,
    })
}

/// Global suffix replacements.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuffixMap {
    pub replacements: BTreeMap<String, String>,
    pub theta_m: f64,
    pub seed: u64,
    /// Selected suffixes for which no differing rewrite was found.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}

impl SuffixMap {
    pub fn len(&self) -> usize {
        self.replacements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replacements.is_empty()
    }

    /// Longest mapped suffix of `word` that leaves a non-empty stem.
    pub fn longest_match<'a>(&'a self, word: &str) -> Option<(&'a str, &'a str)> {
        let n = word.chars().count();
        self.replacements
            .iter()
            .filter(|(s, _)| word.ends_with(s.as_str()) && s.chars().count() < n)
            .max_by_key(|(s, _)| s.len())
            .map(|(s, r)| (s.as_str(), r.as_str()))
    }

    /// `stem + new suffix`, or `None` if no mapped suffix applies.
    pub fn rewrite(&self, word: &str) -> Option<String> {
        let (suffix, replacement) = self.longest_match(word)?;
        let stem = &word[..word.len() - suffix.len()];
        Some(format!("{stem}{replacement}"))
    }
}

pub fn build_suffix_map(
    inventory: &SuffixInventory,
    theta_m: f64,
    tables: &PhonologyTables,
    seed: u64,
) -> Result<SuffixMap> {
    check_probability("theta_m", theta_m)?;
    let mut map = SuffixMap {
        theta_m,
        seed,
        ..SuffixMap::default()
    };
    for suffix in inventory.iter() {
        let mut rng = unit_rng(seed, Stream::Morphological, suffix);
        if rng.random::<f64>() >= theta_m {
            continue;
        }
        match noise_until_changed(suffix, SUFFIX_NOISE_THETA, tables, &mut rng, SUFFIX_ATTEMPTS) {
            Some(r) => {
                map.replacements.insert(suffix.to_owned(), r);
            }
            None => {
                log::warn!("suffix {suffix:?} selected but could not be changed; skipped");
                map.skipped.push(suffix.to_owned());
            }
        }
    }
    Ok(map)
}

/// Applies the suffix map to content words. Returns the noised corpus and the
/// induced word-to-word map.
pub fn apply_morph(
    corpus: &Corpus,
    map: &SuffixMap,
    function_words: &FunctionWordList,
) -> (Corpus, BTreeMap<String, String>) {
    let mut induced = BTreeMap::new();
    let out = corpus.map_words(|w| {
        if function_words.contains(w) {
            return None;
        }
        let r = map.rewrite(w)?;
        induced.insert(w.to_owned(), r.clone());
        Some(r)
    });
    (out, induced)
}
