//! Word-translation lexicons from sentence-aligned bitext, via IBM Model 1.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus_io::{Corpus, Lexicon};
use crate::error::{Error, Result};

/// Source-side token that absorbs target words with no counterpart.
pub const NULL_TOKEN: &str = "<NULL>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignConfig {
    pub iterations: usize,
    pub min_prob: f64,
    pub min_count: usize,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            iterations: 10,
            min_prob: 0.3,
            min_count: 2,
        }
    }
}

/// `t(target | source)`, normalized per source word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationTable {
    pub probs: BTreeMap<String, BTreeMap<String, f64>>,
    pub iterations: usize,
    /// Corpus log-likelihood before each update and after the last one.
    pub log_likelihoods: Vec<f64>,
    pub final_log_likelihood: f64,
}

impl TranslationTable {
    pub fn prob(&self, source: &str, target: &str) -> f64 {
        self.probs
            .get(source)
            .and_then(|t| t.get(target))
            .copied()
            .unwrap_or(0.0)
    }
}

struct Interner {
    ids: HashMap<String, u32>,
    words: Vec<String>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            ids: HashMap::new(),
            words: Vec::new(),
        }
    }

    fn id(&mut self, w: &str) -> u32 {
        if let Some(&i) = self.ids.get(w) {
            return i;
        }
        let i = self.words.len() as u32;
        self.ids.insert(w.to_owned(), i);
        self.words.push(w.to_owned());
        i
    }
}

fn sentence_words(corpus: &Corpus) -> Vec<Vec<&str>> {
    corpus
        .sentences()
        .iter()
        .map(|s| {
            s.iter()
                .map(String::as_str)
                .filter(|t| !crate::corpus_io::is_punct_token(t))
                .collect()
        })
        .collect()
}

/// Runs `iterations` EM steps from a uniform table.
pub fn ibm1_train(source: &Corpus, target: &Corpus, iterations: usize) -> Result<TranslationTable> {
    if source.len() != target.len() {
        return Err(Error::Alignment(format!(
            "bitext sides differ in length: {} vs {} sentences",
            source.len(),
            target.len()
        )));
    }
    if iterations == 0 {
        return Err(Error::Alignment("at least one iteration is required".into()));
    }
    let mut src_ids = Interner::new();
    let mut tgt_ids = Interner::new();
    let null = src_ids.id(NULL_TOKEN);
    let pairs: Vec<(Vec<u32>, Vec<u32>)> = sentence_words(source)
        .into_iter()
        .zip(sentence_words(target))
        .filter(|(_, t)| !t.is_empty())
        .map(|(s, t)| {
            let mut src = vec![null];
            src.extend(s.iter().map(|w| src_ids.id(w)));
            (src, t.iter().map(|w| tgt_ids.id(w)).collect())
        })
        .collect();
    if pairs.is_empty() {
        return Err(Error::Alignment("bitext has no words".into()));
    }

    let uniform = 1.0 / tgt_ids.words.len() as f64;
    let mut t: HashMap<(u32, u32), f64> = HashMap::new();
    for (src, tgt) in &pairs {
        for &e in src {
            for &f in tgt {
                t.insert((e, f), uniform);
            }
        }
    }

    let e_step = |t: &HashMap<(u32, u32), f64>, counts: Option<&mut HashMap<(u32, u32), f64>>| -> f64 {
        let mut ll = 0.0;
        let mut counts = counts;
        for (src, tgt) in &pairs {
            let norm = (src.len() as f64).ln();
            for &f in tgt {
                let denom: f64 = src.iter().map(|&e| t[&(e, f)]).sum();
                ll += denom.ln() - norm;
                if let Some(c) = counts.as_deref_mut() {
                    for &e in src {
                        *c.entry((e, f)).or_default() += t[&(e, f)] / denom;
                    }
                }
            }
        }
        ll
    };

    let mut log_likelihoods = Vec::with_capacity(iterations + 1);
    for _ in 0..iterations {
        let mut counts: HashMap<(u32, u32), f64> = HashMap::new();
        log_likelihoods.push(e_step(&t, Some(&mut counts)));
        let mut totals: HashMap<u32, f64> = HashMap::new();
        for (&(e, _), c) in &counts {
            *totals.entry(e).or_default() += c;
        }
        for (key, p) in t.iter_mut() {
            *p = counts.get(key).copied().unwrap_or(0.0) / totals[&key.0];
        }
    }
    let final_log_likelihood = e_step(&t, None);
    log_likelihoods.push(final_log_likelihood);

    let mut probs: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (&(e, f), &p) in &t {
        probs
            .entry(src_ids.words[e as usize].clone())
            .or_default()
            .insert(tgt_ids.words[f as usize].clone(), p);
    }
    Ok(TranslationTable {
        probs,
        iterations,
        log_likelihoods,
        final_log_likelihood,
    })
}

/// For every source word seen at least `min_count` times, the most probable
/// target if its probability reaches `min_prob`. Ties go to the pair that
/// co-occurs in more sentences, then to a target spelled like the source, then
/// to the lexicographically smaller target.
pub fn extract_lexicon(
    table: &TranslationTable,
    source: &Corpus,
    target: &Corpus,
    min_prob: f64,
    min_count: usize,
) -> Result<Lexicon> {
    let src_sents = sentence_words(source);
    let tgt_sents = sentence_words(target);
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut cooc: HashMap<(&str, &str), usize> = HashMap::new();
    for (s, t) in src_sents.iter().zip(&tgt_sents) {
        let s_types: HashSet<&str> = s.iter().copied().collect();
        let t_types: HashSet<&str> = t.iter().copied().collect();
        for w in s {
            *counts.entry(w).or_default() += 1;
        }
        for &e in &s_types {
            for &f in &t_types {
                *cooc.entry((e, f)).or_default() += 1;
            }
        }
    }
    let mut pairs = Vec::new();
    for (source_word, targets) in &table.probs {
        if source_word == NULL_TOKEN || counts.get(source_word.as_str()).copied().unwrap_or(0) < min_count {
            continue;
        }
        let best = targets.iter().max_by(|a, b| {
            a.1.total_cmp(b.1)
                .then_with(|| {
                    let ca = cooc.get(&(source_word.as_str(), a.0.as_str())).unwrap_or(&0);
                    let cb = cooc.get(&(source_word.as_str(), b.0.as_str())).unwrap_or(&0);
                    ca.cmp(cb)
                })
                .then_with(|| (a.0 == source_word).cmp(&(b.0 == source_word)))
                .then_with(|| b.0.cmp(a.0))
        });
        if let Some((target_word, &p)) = best {
            if p >= min_prob {
                pairs.push((source_word.clone(), target_word.clone(), None));
            }
        }
    }
    Lexicon::from_pairs(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bitext(pairs: &[(&str, &str)]) -> (Corpus, Corpus) {
        let s: Vec<&str> = pairs.iter().map(|p| p.0).collect();
        let t: Vec<&str> = pairs.iter().map(|p| p.1).collect();
        (Corpus::from_lines(&s), Corpus::from_lines(&t))
    }

    #[test]
    fn rows_are_normalized_and_likelihood_rises() {
        let (s, t) = bitext(&[("a b", "x y"), ("a", "x"), ("b c", "y z"), ("c a", "z x")]);
        let table = ibm1_train(&s, &t, 8).unwrap();
        for row in table.probs.values() {
            let sum: f64 = row.values().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
        assert_eq!(table.log_likelihoods.len(), 9);
        assert!(table.log_likelihoods.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn unidentifiable_pair_stays_symmetric() {
        let (s, t) = bitext(&[("a b", "x y"); 4]);
        let table = ibm1_train(&s, &t, 6).unwrap();
        let (ax, ay) = (table.prob("a", "x"), table.prob("a", "y"));
        assert!((ax + ay - 1.0).abs() < 1e-9);
        assert!((ax - ay).abs() < 1e-12);
        assert!((table.prob("b", "x") - table.prob("b", "y")).abs() < 1e-12);
    }

    #[test]
    fn evidence_resolves_ambiguity() {
        let (s, t) = bitext(&[("a", "x"), ("a b", "x y")]);
        let p5 = ibm1_train(&s, &t, 5).unwrap().prob("a", "x");
        let p30 = ibm1_train(&s, &t, 30).unwrap().prob("a", "x");
        assert!(p30 > p5);
        assert!(p30 > 0.9, "{p30}");
    }

    #[test]
    fn mismatched_or_empty_bitext_rejected() {
        let (s, _) = bitext(&[("a", "x"), ("b", "y")]);
        let (_, t) = bitext(&[("a", "x")]);
        assert!(ibm1_train(&s, &t, 3).is_err());
        let (s, t) = bitext(&[(".", ".")]);
        assert!(ibm1_train(&s, &t, 3).is_err());
    }

    #[test]
    fn thresholds_filter_entries() {
        let (s, t) = bitext(&[("a b", "x y"); 3]);
        let table = ibm1_train(&s, &t, 5).unwrap();
        assert!(extract_lexicon(&table, &s, &t, 1.0, 1).unwrap().is_empty());

        let (s, t) = bitext(&[("a", "x"), ("a b", "x y"), ("a c", "x z")]);
        let table = ibm1_train(&s, &t, 20).unwrap();
        let lex = extract_lexicon(&table, &s, &t, 0.3, 2).unwrap();
        let sources: Vec<&str> = lex.entries().iter().map(|e| e.source.as_str()).collect();
        assert_eq!(sources, ["a"]);
        assert_eq!(lex.entries()[0].target, "x");
    }

    #[test]
    fn tie_prefers_identical_spelling() {
        let (s, t) = bitext(&[("b a", "a b"); 2]);
        let table = ibm1_train(&s, &t, 3).unwrap();
        let lex = extract_lexicon(&table, &s, &t, 0.3, 1).unwrap();
        assert!(lex.entries().iter().all(|e| e.target == e.source));
    }

    #[test]
    fn tie_goes_to_smaller_target() {
        let (s, t) = bitext(&[("a b", "y x"); 2]);
        let table = ibm1_train(&s, &t, 3).unwrap();
        let lex = extract_lexicon(&table, &s, &t, 0.3, 1).unwrap();
        assert!(lex.entries().iter().all(|e| e.target == "x"));
    }
}
