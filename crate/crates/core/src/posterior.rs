//! Noise parameters from a bilingual lexicon.
//!
//! Each noiser has units (trigram contexts, suffixes, function-word types,
//! content-word types). Every lexicon pair yields affected or unaffected
//! occurrences of some units, and a noiser's estimate is the mean over its
//! units of the affected fraction.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::alignment::{extract_lexicon, ibm1_train, AlignConfig};
use crate::compose::ThetaParams;
use crate::corpus_io::{Corpus, FunctionWordList, Lexicon};
use crate::error::{Error, Result};
use crate::morphology::{SuffixInventory, DEFAULT_K, DEFAULT_MAX_LEN};
use crate::phonology::{trigrams_of, Trigram};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PosteriorConfig {
    /// Pairs at or above this normalized edit distance whose target is not a
    /// source word count as lexical replacements.
    pub ned_threshold: f64,
    pub k: usize,
    pub max_len: usize,
    /// Below this many pairs the estimate carries a low-support warning.
    pub min_pairs: usize,
}

impl Default for PosteriorConfig {
    fn default() -> Self {
        PosteriorConfig {
            ned_threshold: 0.5,
            k: DEFAULT_K,
            max_len: DEFAULT_MAX_LEN,
            min_pairs: 20,
        }
    }
}

impl PosteriorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ned_threshold > 0.0 && self.ned_threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "ned_threshold must lie strictly between 0 and 1, got {}",
                self.ned_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UnitCount {
    pub affected_units: usize,
    pub total_units: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UnitCounts {
    pub p: UnitCount,
    pub m: UnitCount,
    pub f: UnitCount,
    pub c: UnitCount,
}

/// Affected and total occurrence weight of one unit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub affected: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerUnit {
    pub p: BTreeMap<String, Tally>,
    pub m: BTreeMap<String, Tally>,
    pub f: BTreeMap<String, Tally>,
    pub c: BTreeMap<String, Tally>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub theta_p: f64,
    pub theta_m: f64,
    pub theta_f: f64,
    pub theta_c: f64,
    #[serde(default)]
    pub unit_counts: UnitCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_unit: Option<PerUnit>,
    #[serde(default)]
    pub pairs: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ThetaEstimate {
    pub fn params(&self) -> Result<ThetaParams> {
        ThetaParams::new(self.theta_p, self.theta_m, self.theta_f, self.theta_c)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let e: ThetaEstimate = serde_json::from_str(text)?;
        e.params()?;
        Ok(e)
    }

    /// Per-unit audit table: noiser, unit, affected, total.
    pub fn per_unit_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["noiser", "unit", "affected", "total"])?;
        if let Some(pu) = &self.per_unit {
            for (label, map) in [("p", &pu.p), ("m", &pu.m), ("f", &pu.f), ("c", &pu.c)] {
                for (unit, t) in map {
                    w.write_record([label, unit.as_str(), &t.affected.to_string(), &t.total.to_string()])?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Levenshtein distance over characters.
fn levenshtein(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance divided by the longer length.
pub fn ned(a: &str, b: &str) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("edit distance of an empty string".into()));
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    Ok(levenshtein(&a, &b) as f64 / a.len().max(b.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Sub,
    Ins,
    Del,
}

/// One edit with its source-side context. For an insertion `focus` is `None`
/// and `position` is the source index the new character precedes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub position: usize,
    pub kind: EditKind,
    pub left: Option<char>,
    pub focus: Option<char>,
    pub right: Option<char>,
    pub replacement: Option<char>,
}

impl Edit {
    pub fn trigram(&self) -> Option<Trigram> {
        self.focus.map(|f| Trigram::new(self.left, f, self.right))
    }
}

/// One optimal alignment from `src` to `tgt`, in source order. The backtrace
/// takes a diagonal step whenever it is optimal, then a deletion, then an
/// insertion.
pub fn minimal_edits(src: &str, tgt: &str) -> Vec<Edit> {
    let a: Vec<char> = src.chars().collect();
    let b: Vec<char> = tgt.chars().collect();
    let (n, m) = (a.len(), b.len());
    let mut dp = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in dp[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = dp[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            dp[i][j] = sub.min(dp[i - 1][j] + 1).min(dp[i][j - 1] + 1);
        }
    }
    let at = |i: usize| a.get(i).copied();
    let left = |i: usize| if i == 0 { None } else { at(i - 1) };
    let mut edits = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]) {
            if a[i - 1] != b[j - 1] {
                edits.push(Edit {
                    position: i - 1,
                    kind: EditKind::Sub,
                    left: left(i - 1),
                    focus: Some(a[i - 1]),
                    right: at(i),
                    replacement: Some(b[j - 1]),
                });
            }
            i -= 1;
            j -= 1;
        } else if i > 0 && dp[i][j] == dp[i - 1][j] + 1 {
            edits.push(Edit {
                position: i - 1,
                kind: EditKind::Del,
                left: left(i - 1),
                focus: Some(a[i - 1]),
                right: at(i),
                replacement: None,
            });
            i -= 1;
        } else {
            edits.push(Edit {
                position: i,
                kind: EditKind::Ins,
                left: left(i),
                focus: None,
                right: at(i),
                replacement: Some(b[j - 1]),
            });
            j -= 1;
        }
    }
    edits.reverse();
    edits
}

/// Source positions whose character changed. Equal-length pairs are compared
/// position by position, the way sound change produces them; other pairs go
/// through the edit alignment, where insertions touch no source position.
fn changed_positions(src: &[char], tgt: &[char], src_str: &str, tgt_str: &str) -> Vec<(usize, Option<char>)> {
    if src.len() == tgt.len() {
        src.iter()
            .zip(tgt)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (_, b))| (i, Some(*b)))
            .collect()
    } else {
        minimal_edits(src_str, tgt_str)
            .into_iter()
            .filter(|e| e.kind != EditKind::Ins)
            .map(|e| (e.position, e.replacement))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Lexical,
    Morph,
    Phon,
}

struct Pair<'a> {
    src: &'a str,
    tgt: &'a str,
    weight: f64,
    function: bool,
    src_chars: Vec<char>,
    tgt_chars: Vec<char>,
    trigrams: Vec<Trigram>,
}

impl Pair<'_> {
    fn identical(&self) -> bool {
        self.src == self.tgt
    }

    fn equal_length(&self) -> bool {
        self.src_chars.len() == self.tgt_chars.len()
    }
}

/// Suffix-change hypothesis: which suffix of the source was replaced by what.
type Hypothesis = (String, String);

/// Inventory suffixes `s` of `src` with a non-empty stem such that `tgt`
/// keeps the stem and ends in something other than `s`.
fn morph_candidates(pair: &Pair<'_>, inventory: &SuffixInventory) -> Vec<Hypothesis> {
    inventory
        .suffixes_of(pair.src)
        .into_iter()
        .filter_map(|s| {
            let stem = &pair.src[..pair.src.len() - s.len()];
            let rest = pair.tgt.strip_prefix(stem)?;
            (!rest.is_empty() && rest != s).then(|| (s.to_owned(), rest.to_owned()))
        })
        .collect()
}

#[derive(Default)]
struct Accumulator {
    p: BTreeMap<String, Tally>,
    m: BTreeMap<String, Tally>,
    f: BTreeMap<String, Tally>,
    c: BTreeMap<String, Tally>,
}

fn add(map: &mut BTreeMap<String, Tally>, unit: &str, weight: f64, affected: bool) {
    let t = map.entry(unit.to_owned()).or_default();
    t.total += weight;
    if affected {
        t.affected += weight;
    }
}

fn summarize(map: &BTreeMap<String, Tally>) -> (f64, UnitCount) {
    let units: Vec<&Tally> = map.values().filter(|t| t.total > 0.0).collect();
    let count = UnitCount {
        affected_units: units.iter().filter(|t| t.affected > 0.0).count(),
        total_units: units.len(),
    };
    if units.is_empty() {
        return (0.0, count);
    }
    let sum: f64 = units.iter().map(|t| (t.affected / t.total).clamp(0.0, 1.0)).sum();
    (sum / units.len() as f64, count)
}

/// Estimates all four parameters, taking the lexicon's source side as the
/// source vocabulary.
pub fn estimate_thetas(
    lexicon: &Lexicon,
    function_words: &FunctionWordList,
    inventory: &SuffixInventory,
    config: &PosteriorConfig,
) -> Result<ThetaEstimate> {
    let vocabulary: BTreeSet<String> = lexicon.source_words().into_iter().map(str::to_owned).collect();
    estimate_thetas_with_vocabulary(lexicon, &vocabulary, function_words, inventory, config)
}

/// As [`estimate_thetas`], with an explicit source vocabulary for the
/// non-word test of lexical replacement.
pub fn estimate_thetas_with_vocabulary(
    lexicon: &Lexicon,
    vocabulary: &BTreeSet<String>,
    function_words: &FunctionWordList,
    inventory: &SuffixInventory,
    config: &PosteriorConfig,
) -> Result<ThetaEstimate> {
    config.validate()?;
    if lexicon.is_empty() {
        return Err(Error::EmptyInput { what: "lexicon" });
    }
    let mut warnings = Vec::new();
    if function_words.is_empty() {
        warnings.push("function-word list is empty; every word is treated as a content word".into());
    }
    if lexicon.len() < config.min_pairs {
        warnings.push(format!(
            "low support: {} pairs, fewer than {}",
            lexicon.len(),
            config.min_pairs
        ));
    }

    let pairs: Vec<Pair> = lexicon
        .entries()
        .iter()
        .filter(|e| !e.source.is_empty() && !e.target.is_empty())
        .map(|e| {
            let src_chars: Vec<char> = e.source.chars().collect();
            Pair {
                src: &e.source,
                tgt: &e.target,
                weight: e.effective_weight(),
                function: function_words.contains(&e.source),
                trigrams: trigrams_of(&src_chars),
                src_chars,
                tgt_chars: e.target.chars().collect(),
            }
        })
        .collect();

    // Lexicon-wide evidence: trigrams seen unchanged, the characters each
    // trigram was seen changing into, and suffix-change support.
    let mut unchanged: HashMap<Trigram, f64> = HashMap::new();
    let mut changed_to: HashMap<Trigram, BTreeSet<char>> = HashMap::new();
    let mut support: HashMap<Hypothesis, f64> = HashMap::new();
    let mut contra: HashMap<String, f64> = HashMap::new();
    let mut candidates: Vec<Vec<Hypothesis>> = Vec::with_capacity(pairs.len());

    for pair in &pairs {
        if pair.identical() {
            for t in &pair.trigrams {
                *unchanged.entry(*t).or_default() += pair.weight;
            }
        } else if pair.equal_length() {
            for (i, t) in pair.trigrams.iter().enumerate() {
                if pair.src_chars[i] == pair.tgt_chars[i] {
                    *unchanged.entry(*t).or_default() += pair.weight;
                } else {
                    changed_to.entry(*t).or_default().insert(pair.tgt_chars[i]);
                }
            }
        }
        let cands = if pair.function || pair.identical() {
            Vec::new()
        } else {
            morph_candidates(pair, inventory)
        };
        for h in &cands {
            *support.entry(h.clone()).or_default() += pair.weight;
        }
        // an unchanged content word shows none of its suffixes is replaced; a
        // changed word says nothing about suffixes a longer one may have masked
        if !pair.function && pair.identical() {
            for s in inventory.suffixes_of(pair.src) {
                *contra.entry(s.to_owned()).or_default() += pair.weight;
            }
        }
        candidates.push(cands);
    }

    let phon_regular = |pair: &Pair| -> bool {
        pair.equal_length()
            && pair.trigrams.iter().enumerate().all(|(i, t)| {
                pair.src_chars[i] == pair.tgt_chars[i]
                    || (unchanged.get(t).copied().unwrap_or(0.0) == 0.0
                        && changed_to.get(t).is_some_and(|c| c.len() == 1))
            })
    };
    let contra_of = |s: &str| contra.get(s).copied().unwrap_or(0.0);
    // a suffix has a single replacement, so pairs showing the same suffix
    // turning into something else count against a hypothesis too
    let mut suffix_support: HashMap<&str, f64> = HashMap::new();
    for ((s, _), w) in &support {
        *suffix_support.entry(s.as_str()).or_default() += w;
    }
    let score = |h: &Hypothesis| -> f64 {
        let own = support[h];
        own - (suffix_support[h.0.as_str()] - own) - contra_of(&h.0)
    };
    let best_candidate = |cands: &[Hypothesis]| -> Option<Hypothesis> {
        cands
            .iter()
            .max_by(|a, b| score(a).total_cmp(&score(b)).then(a.0.len().cmp(&b.0.len())))
            .cloned()
    };

    // First pass over changed content pairs: regular sound change, regular
    // suffix change, both, or neither.
    let mut regular: Vec<(bool, bool, Option<Hypothesis>)> = Vec::with_capacity(pairs.len());
    let (mut phon_only, mut morph_only) = (0.0, 0.0);
    for (pair, cands) in pairs.iter().zip(&candidates) {
        if pair.function || pair.identical() {
            regular.push((false, false, None));
            continue;
        }
        let best = best_candidate(cands);
        let p = phon_regular(pair);
        let m = best
            .as_ref()
            .is_some_and(|h| contra_of(&h.0) == 0.0 && support[h] >= 2.0);
        match (p, m) {
            (true, false) => phon_only += pair.weight,
            (false, true) => morph_only += pair.weight,
            _ => {}
        }
        regular.push((p, m, best));
    }
    // A pair explained equally well by both is given to whichever noiser has
    // more unambiguous pairs; on a tie the suffix change, which needs one unit
    // where sound change needs one per affected word, wins.
    let ambiguous_to_phon = phon_only > morph_only;

    let mut acc = Accumulator::default();
    for (pair, (p_reg, m_reg, best)) in pairs.iter().zip(regular) {
        let w = pair.weight;
        if pair.function {
            add(&mut acc.f, pair.src, w, !pair.identical());
            if pair.identical() || phon_regular(pair) {
                add_phon(&mut acc.p, pair, w);
            }
            continue;
        }
        if pair.identical() {
            add(&mut acc.c, pair.src, w, false);
            for s in inventory.suffixes_of(pair.src) {
                add(&mut acc.m, s, w, false);
            }
            add_phon(&mut acc.p, pair, w);
            continue;
        }

        let class = match (p_reg, m_reg) {
            (true, true) => {
                if ambiguous_to_phon {
                    Class::Phon
                } else {
                    Class::Morph
                }
            }
            (true, false) => Class::Phon,
            (false, true) => Class::Morph,
            (false, false) => {
                let d = ned(pair.src, pair.tgt)?;
                if d >= config.ned_threshold && !vocabulary.contains(pair.tgt) {
                    Class::Lexical
                } else {
                    let phon_contra: f64 = changed_positions(&pair.src_chars, &pair.tgt_chars, pair.src, pair.tgt)
                        .iter()
                        .map(|(i, _)| unchanged.get(&pair.trigrams[*i]).copied().unwrap_or(0.0))
                        .sum();
                    match &best {
                        Some(h) if contra_of(&h.0) < phon_contra => Class::Morph,
                        _ => Class::Phon,
                    }
                }
            }
        };

        add(&mut acc.c, pair.src, w, class == Class::Lexical);
        match class {
            Class::Lexical => {}
            Class::Morph => {
                let (suffix, _) = best.expect("morph class implies a candidate");
                for s in inventory.suffixes_of(pair.src) {
                    if s.len() >= suffix.len() {
                        add(&mut acc.m, s, w, s == suffix);
                    }
                }
                let stem_len = pair.src_chars.len() - suffix.chars().count();
                for t in &pair.trigrams[..stem_len] {
                    add_trigram(&mut acc.p, t, w, false);
                }
            }
            Class::Phon => {
                let changed: BTreeSet<usize> =
                    changed_positions(&pair.src_chars, &pair.tgt_chars, pair.src, pair.tgt)
                        .into_iter()
                        .map(|(i, _)| i)
                        .collect();
                for (i, t) in pair.trigrams.iter().enumerate() {
                    add_trigram(&mut acc.p, t, w, changed.contains(&i));
                }
            }
        }
    }

    let (theta_p, p) = summarize(&acc.p);
    let (theta_m, m) = summarize(&acc.m);
    let (theta_f, f) = summarize(&acc.f);
    let (theta_c, c) = summarize(&acc.c);
    for (name, count) in [("theta_p", p), ("theta_m", m), ("theta_f", f), ("theta_c", c)] {
        if count.total_units == 0 {
            warnings.push(format!("{name}: no units observed; reported as 0"));
        }
    }
    Ok(ThetaEstimate {
        theta_p,
        theta_m,
        theta_f,
        theta_c,
        unit_counts: UnitCounts { p, m, f, c },
        per_unit: Some(PerUnit {
            p: acc.p,
            m: acc.m,
            f: acc.f,
            c: acc.c,
        }),
        pairs: pairs.len(),
        warnings,
    })
}

/// Only letters take part in sound change; trigrams centred on punctuation,
/// digits or symbols are not units.
fn add_trigram(map: &mut BTreeMap<String, Tally>, t: &Trigram, w: f64, affected: bool) {
    if t.focus.is_alphabetic() {
        add(map, &t.key(), w, affected);
    }
}

/// Trigram occurrences of an identical or regularly sound-changed pair.
fn add_phon(map: &mut BTreeMap<String, Tally>, pair: &Pair<'_>, w: f64) {
    for (i, t) in pair.trigrams.iter().enumerate() {
        let affected = pair.tgt_chars.get(i) != Some(&pair.src_chars[i]);
        add_trigram(map, t, w, affected);
    }
}

/// Aligns the bitext, extracts a lexicon and estimates from it. The source
/// vocabulary is taken from the source corpus.
pub fn estimate_from_bitext(
    source: &Corpus,
    target: &Corpus,
    function_words: &FunctionWordList,
    inventory: &SuffixInventory,
    config: &PosteriorConfig,
    align: &AlignConfig,
) -> Result<(ThetaEstimate, Lexicon)> {
    let table = ibm1_train(source, target, align.iterations)?;
    let lexicon = extract_lexicon(&table, source, target, align.min_prob, align.min_count)?;
    if lexicon.is_empty() {
        return Err(Error::Alignment("no lexicon entries survived extraction".into()));
    }
    let vocabulary: BTreeSet<String> = source.word_types().into_iter().map(str::to_owned).collect();
    let mut est = estimate_thetas_with_vocabulary(&lexicon, &vocabulary, function_words, inventory, config)?;
    if source.len() < config.min_pairs && !est.warnings.iter().any(|w| w.starts_with("low support")) {
        est.warnings.push(format!(
            "low support: {} sentence pairs, fewer than {}",
            source.len(),
            config.min_pairs
        ));
    }
    est.warnings.push(
        "theta_c comes from an aligned lexicon and tends to be over-estimated when alignments are noisy".into(),
    );
    Ok((est, lexicon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphology::SuffixCount;

    /// Full-matrix Levenshtein written independently of the rolling version.
    fn oracle_distance(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0; b.len() + 1]; a.len() + 1];
        for i in 0..=a.len() {
            for j in 0..=b.len() {
                d[i][j] = if i == 0 {
                    j
                } else if j == 0 {
                    i
                } else {
                    let c = if a[i - 1] == b[j - 1] { 0 } else { 1 };
                    (d[i - 1][j - 1] + c).min(d[i - 1][j] + 1).min(d[i][j - 1] + 1)
                };
            }
        }
        d[a.len()][b.len()]
    }

    fn inventory(suffixes: &[&str]) -> SuffixInventory {
        SuffixInventory {
            suffixes: suffixes
                .iter()
                .map(|s| SuffixCount {
                    suffix: s.to_string(),
                    count: 1,
                })
                .collect(),
            k: suffixes.len(),
            max_len: 5,
        }
    }

    fn lexicon(pairs: &[(&str, &str)]) -> Lexicon {
        Lexicon::from_pairs(pairs.iter().map(|(a, b)| (a.to_string(), b.to_string(), None))).unwrap()
    }

    #[test]
    fn ned_examples() {
        assert_eq!(ned("abc", "abc").unwrap(), 0.0);
        assert_eq!(ned("abc", "xyz").unwrap(), 1.0);
        assert_eq!(oracle_distance("kitten", "sitting"), 3);
        assert!((ned("kitten", "sitting").unwrap() - 3.0 / 7.0).abs() < 1e-12);
        assert!(ned("", "a").is_err());
    }

    #[test]
    fn single_substitution_with_boundary() {
        let e = minimal_edits("da", "ta");
        assert_eq!(
            e,
            vec![Edit {
                position: 0,
                kind: EditKind::Sub,
                left: None,
                focus: Some('d'),
                right: Some('a'),
                replacement: Some('t'),
            }]
        );
        assert!(minimal_edits("abc", "abc").is_empty());
    }

    #[test]
    fn kitten_to_sitting() {
        let e = minimal_edits("kitten", "sitting");
        let kinds: Vec<EditKind> = e.iter().map(|x| x.kind).collect();
        assert_eq!(kinds, [EditKind::Sub, EditKind::Sub, EditKind::Ins]);
        assert_eq!(e.len(), oracle_distance("kitten", "sitting"));
        assert_eq!((e[0].focus, e[0].replacement), (Some('k'), Some('s')));
        assert_eq!((e[1].focus, e[1].replacement), (Some('e'), Some('i')));
        assert_eq!((e[2].position, e[2].replacement), (6, Some('g')));
    }

    #[test]
    fn identical_lexicon_gives_zero() {
        let lex = lexicon(&[("casa", "casa"), ("de", "de"), ("perros", "perros")]);
        let fw = FunctionWordList::new(["de"], "t");
        let est = estimate_thetas(&lex, &fw, &inventory(&["a", "s", "os"]), &PosteriorConfig::default()).unwrap();
        assert_eq!(
            (est.theta_p, est.theta_m, est.theta_f, est.theta_c),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn function_changes_count_per_type() {
        let lex = lexicon(&[("de", "di"), ("la", "la"), ("el", "il"), ("en", "en")]);
        let fw = FunctionWordList::new(["de", "la", "el", "en"], "t");
        let est = estimate_thetas(&lex, &fw, &inventory(&[]), &PosteriorConfig::default()).unwrap();
        assert_eq!(est.theta_f, 0.5);
        assert_eq!(
            est.unit_counts.f,
            UnitCount {
                affected_units: 2,
                total_units: 4
            }
        );
    }

    #[test]
    fn dissimilar_non_word_is_lexical() {
        let lex = lexicon(&[("satellite", "devasalv"), ("house", "house"), ("tree", "tree")]);
        let est = estimate_thetas(
            &lex,
            &FunctionWordList::default(),
            &inventory(&[]),
            &PosteriorConfig::default(),
        )
        .unwrap();
        assert!((est.theta_c - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn shared_suffix_change_is_morphological() {
        let lex = lexicon(&[
            ("cantando", "cantendo"),
            ("mirando", "mirendo"),
            ("hablando", "hablendo"),
            ("casas", "casas"),
            ("perros", "perros"),
        ]);
        let inv = inventory(&["o", "do", "ndo", "ando", "s", "as", "os"]);
        let est = estimate_thetas(&lex, &FunctionWordList::default(), &inv, &PosteriorConfig::default()).unwrap();
        let pu = est.per_unit.as_ref().unwrap();
        assert_eq!(pu.m["ando"].affected, 3.0);
        assert_eq!(est.theta_c, 0.0);
        // "ando" affected; "s", "as", "os" unaffected
        assert!((est.theta_m - 0.25).abs() < 1e-12, "{}", est.theta_m);
    }

    #[test]
    fn consistent_sound_change_is_phonological() {
        // d -> t word-finally after a; "da" keeps its d elsewhere
        let lex = lexicon(&[("bad", "bat"), ("sad", "sat"), ("dad", "dat"), ("dab", "dab")]);
        let est = estimate_thetas(
            &lex,
            &FunctionWordList::default(),
            &inventory(&[]),
            &PosteriorConfig::default(),
        )
        .unwrap();
        let pu = est.per_unit.as_ref().unwrap();
        let key = Trigram::new(Some('a'), 'd', None).key();
        assert_eq!(pu.p[&key].affected, 3.0);
        assert_eq!(pu.p[&key].total, 3.0);
        assert_eq!(est.theta_c, 0.0);
        assert!(est.theta_p > 0.0 && est.theta_p < 1.0);
    }

    #[test]
    fn low_support_warning() {
        let lex = lexicon(&[("a", "a")]);
        let est = estimate_thetas(
            &lex,
            &FunctionWordList::default(),
            &inventory(&[]),
            &PosteriorConfig::default(),
        )
        .unwrap();
        assert!(est.warnings.iter().any(|w| w.starts_with("low support")));
    }

    #[test]
    fn bad_threshold_rejected() {
        let lex = lexicon(&[("a", "a")]);
        let cfg = PosteriorConfig {
            ned_threshold: 1.0,
            ..PosteriorConfig::default()
        };
        assert!(estimate_thetas(&lex, &FunctionWordList::default(), &inventory(&[]), &cfg).is_err());
    }

    #[test]
    fn estimate_json_round_trip() {
        let text = r#"{"theta_p":0.05,"theta_m":0.26,"theta_f":0.67,"theta_c":0.15}"#;
        let e = ThetaEstimate::from_json(text).unwrap();
        let p = e.params().unwrap();
        assert_eq!((p.theta_p, p.theta_m, p.theta_f, p.theta_c), (0.05, 0.26, 0.67, 0.15));
        assert!(ThetaEstimate::from_json(r#"{"theta_p":2}"#).is_err());
    }
}
