//! Regular, context-conditioned sound change mediated by IPA.
//!
//! A unit of change is a character trigram `(left, focus, right)` where the
//! contexts may be word boundaries. A selected trigram gets one replacement
//! character, chosen by mapping the focus into IPA, moving to a phoneme in one
//! of its plausibility sets, and mapping back into the script. The rule then
//! applies to every occurrence of that trigram in the corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus_io::{is_punct_token, Corpus};
use crate::error::{check_probability, Error, Result};
use crate::rng::{unit_rng, Stream};

const BUILTIN_LATIN: &str = include_str!("../data/latin.json");

/// Attempts at finding a replacement that differs from the focus character.
const REPLACEMENT_ATTEMPTS: usize = 8;

/// `left`/`right` are `None` at a word boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Trigram {
    pub left: Option<char>,
    pub focus: char,
    pub right: Option<char>,
}

impl Trigram {
    pub fn new(left: Option<char>, focus: char, right: Option<char>) -> Self {
        Trigram { left, focus, right }
    }

    /// Stable string key used to seed the trigram's random stream.
    pub fn key(&self) -> String {
        let side = |c: Option<char>| c.map_or_else(|| "\u{0}".to_owned(), String::from);
        format!("{}\u{1}{}\u{1}{}", side(self.left), self.focus, side(self.right))
    }
}

impl fmt::Display for Trigram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let left = self.left.map_or_else(|| "BOW".to_owned(), String::from);
        let right = self.right.map_or_else(|| "EOW".to_owned(), String::from);
        write!(f, "({} |{}_,_{})", self.focus, left, right)
    }
}

/// Trigrams of a word, one per character position.
pub fn word_trigrams(word: &str) -> Vec<Trigram> {
    let chars: Vec<char> = word.chars().collect();
    trigrams_of(&chars)
}

pub(crate) fn trigrams_of(chars: &[char]) -> Vec<Trigram> {
    (0..chars.len())
        .map(|i| Trigram::new(i.checked_sub(1).map(|j| chars[j]), chars[i], chars.get(i + 1).copied()))
        .collect()
}

pub fn collect_trigrams(corpus: &Corpus) -> BTreeSet<Trigram> {
    let mut out = BTreeSet::new();
    for word in corpus.word_types() {
        out.extend(word_trigrams(word));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawTables {
    char_to_ipa: BTreeMap<String, Vec<String>>,
    ipa_to_char: BTreeMap<String, Vec<String>>,
    plausibility_sets: Vec<Vec<String>>,
}

/// Script-to-IPA maps plus the sets of mutually reachable phonemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTables", into = "RawTables")]
pub struct PhonologyTables {
    char_to_ipa: BTreeMap<char, Vec<String>>,
    ipa_to_char: BTreeMap<String, Vec<char>>,
    plausibility_sets: Vec<Vec<String>>,
    neighbours: BTreeMap<String, Vec<String>>,
    unreachable: BTreeSet<String>,
}

impl TryFrom<RawTables> for PhonologyTables {
    type Error = Error;

    fn try_from(raw: RawTables) -> Result<Self> {
        let single_char = |s: &str, what: &str| -> Result<char> {
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(Error::Tables(format!("{what} {s:?} must be a single character"))),
            }
        };

        let mut char_to_ipa = BTreeMap::new();
        for (ch, ipas) in raw.char_to_ipa {
            let c = single_char(&ch, "char_to_ipa key")?;
            if ipas.is_empty() {
                return Err(Error::Tables(format!("char_to_ipa[{ch:?}] is empty")));
            }
            char_to_ipa.insert(c, ipas);
        }

        let mut ipa_to_char = BTreeMap::new();
        for (ipa, chars) in raw.ipa_to_char {
            if chars.is_empty() {
                return Err(Error::Tables(format!("ipa_to_char[{ipa:?}] is empty")));
            }
            let chars = chars
                .iter()
                .map(|c| single_char(c, "ipa_to_char value"))
                .collect::<Result<Vec<_>>>()?;
            ipa_to_char.insert(ipa, chars);
        }

        let mut unreachable = BTreeSet::new();
        let mut neighbours: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (i, set) in raw.plausibility_sets.iter().enumerate() {
            let distinct: BTreeSet<&String> = set.iter().collect();
            if distinct.len() < 2 {
                return Err(Error::Tables(format!(
                    "plausibility set {i} has fewer than two members"
                )));
            }
            for p in &distinct {
                if !ipa_to_char.contains_key(p.as_str()) {
                    unreachable.insert((*p).clone());
                }
            }
            for p in &distinct {
                let entry = neighbours.entry((*p).clone()).or_default();
                for q in &distinct {
                    if q != p && ipa_to_char.contains_key(q.as_str()) {
                        entry.insert((*q).clone());
                    }
                }
            }
        }
        for p in &unreachable {
            log::warn!("phoneme {p:?} appears in a plausibility set but has no script mapping");
        }

        Ok(PhonologyTables {
            char_to_ipa,
            ipa_to_char,
            plausibility_sets: raw.plausibility_sets,
            neighbours: neighbours
                .into_iter()
                .filter(|(_, n)| !n.is_empty())
                .map(|(p, n)| (p, n.into_iter().collect()))
                .collect(),
            unreachable,
        })
    }
}

impl From<PhonologyTables> for RawTables {
    fn from(t: PhonologyTables) -> Self {
        RawTables {
            char_to_ipa: t.char_to_ipa.into_iter().map(|(c, v)| (c.to_string(), v)).collect(),
            ipa_to_char: t
                .ipa_to_char
                .into_iter()
                .map(|(p, v)| (p, v.into_iter().map(String::from).collect()))
                .collect(),
            plausibility_sets: t.plausibility_sets,
        }
    }
}

impl PhonologyTables {
    pub fn new(
        char_to_ipa: BTreeMap<String, Vec<String>>,
        ipa_to_char: BTreeMap<String, Vec<String>>,
        plausibility_sets: Vec<Vec<String>>,
    ) -> Result<Self> {
        RawTables {
            char_to_ipa,
            ipa_to_char,
            plausibility_sets,
        }
        .try_into()
    }

    /// Small Latin-script table shipped with the crate.
    pub fn builtin_latin() -> Self {
        Self::from_json(BUILTIN_LATIN).expect("built-in table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawTables = serde_json::from_str(text)?;
        raw.try_into()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    /// Phonemes that appear in a plausibility set but cannot be written back.
    pub fn unreachable(&self) -> &BTreeSet<String> {
        &self.unreachable
    }

    pub fn plausibility_sets(&self) -> &[Vec<String>] {
        &self.plausibility_sets
    }

    /// Candidate phonemes for a script character. Upper-case characters fall
    /// back to their lower-case entry; the flag asks the caller to restore case.
    pub fn ipa_for(&self, c: char) -> Option<(&[String], bool)> {
        if let Some(v) = self.char_to_ipa.get(&c) {
            return Some((v, false));
        }
        let mut lower = c.to_lowercase();
        match (lower.next(), lower.next()) {
            (Some(l), None) if l != c => self.char_to_ipa.get(&l).map(|v| (v.as_slice(), true)),
            _ => None,
        }
    }

    pub fn chars_for(&self, ipa: &str) -> Option<&[char]> {
        self.ipa_to_char.get(ipa).map(Vec::as_slice)
    }

    /// Every reachable phoneme sharing a plausibility set with `ipa`.
    pub fn neighbours(&self, ipa: &str) -> &[String] {
        self.neighbours.get(ipa).map_or(&[], Vec::as_slice)
    }
}

impl Default for PhonologyTables {
    fn default() -> Self {
        Self::builtin_latin()
    }
}

/// Uniform draw from the union of the focus's plausibility sets, excluding
/// the focus itself.
pub fn sample_replacement<R: Rng + ?Sized>(
    focus_ipa: &str,
    tables: &PhonologyTables,
    rng: &mut R,
) -> Result<String> {
    tables
        .neighbours(focus_ipa)
        .choose(rng)
        .cloned()
        .ok_or_else(|| Error::NoReplacement(focus_ipa.to_owned()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Skip {
    NoIpa,
    NoPlausibilitySet,
    Unchanged,
}

fn restore_case(c: char, upper: bool) -> char {
    if !upper {
        return c;
    }
    let mut up = c.to_uppercase();
    match (up.next(), up.next()) {
        (Some(u), None) => u,
        _ => c,
    }
}

/// Script-level replacement for one focus character.
fn replace_char<R: Rng + ?Sized>(
    focus: char,
    tables: &PhonologyTables,
    rng: &mut R,
) -> std::result::Result<char, Skip> {
    let (ipas, upper) = tables.ipa_for(focus).ok_or(Skip::NoIpa)?;
    if ipas.iter().all(|p| tables.neighbours(p).is_empty()) {
        return Err(Skip::NoPlausibilitySet);
    }
    for _ in 0..REPLACEMENT_ATTEMPTS {
        let ipa = ipas.choose(rng).expect("non-empty candidate list");
        let Ok(target) = sample_replacement(ipa, tables, rng) else {
            continue;
        };
        let chars = tables.chars_for(&target).expect("neighbours are always reachable");
        let c = restore_case(*chars.choose(rng).expect("non-empty"), upper);
        if c != focus {
            return Ok(c);
        }
    }
    Err(Skip::Unchanged)
}

/// Counters for selected trigrams that produced no rule.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipReport {
    pub trigrams: usize,
    pub selected: usize,
    pub no_ipa: usize,
    pub no_plausibility_set: usize,
    pub unchanged_after_retries: usize,
    pub unmapped_chars: BTreeSet<char>,
}

impl SkipReport {
    fn record(&mut self, skip: Skip, focus: char) {
        match skip {
            Skip::NoIpa => {
                self.no_ipa += 1;
                self.unmapped_chars.insert(focus);
            }
            Skip::NoPlausibilitySet => self.no_plausibility_set += 1,
            Skip::Unchanged => self.unchanged_after_retries += 1,
        }
    }

    pub fn skipped(&self) -> usize {
        self.no_ipa + self.no_plausibility_set + self.unchanged_after_retries
    }
}

/// Trigram-to-character sound changes, applied globally.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SoundChangeRuleSet {
    #[serde(with = "rule_list")]
    pub rules: BTreeMap<Trigram, char>,
    pub theta_p: f64,
    pub seed: u64,
}

mod rule_list {
    use super::Trigram;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Rule {
        left: Option<char>,
        focus: char,
        right: Option<char>,
        to: char,
    }

    pub fn serialize<S: Serializer>(rules: &BTreeMap<Trigram, char>, s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<Rule> = rules
            .iter()
            .map(|(t, &to)| Rule {
                left: t.left,
                focus: t.focus,
                right: t.right,
                to,
            })
            .collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Trigram, char>, D::Error> {
        let list = Vec::<Rule>::deserialize(d)?;
        let mut out = BTreeMap::new();
        for r in list {
            if r.to == r.focus {
                return Err(serde::de::Error::custom(format!(
                    "rule for {:?} maps a character to itself",
                    r.focus
                )));
            }
            let key = Trigram::new(r.left, r.focus, r.right);
            if out.insert(key, r.to).is_some() {
                return Err(serde::de::Error::custom(format!("duplicate rule for {key}")));
            }
        }
        Ok(out)
    }
}

impl SoundChangeRuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rewrites one word. Every position is matched against the original
    /// word's trigrams, so rules never feed each other within a pass.
    /// Returns `None` when nothing changed.
    pub fn rewrite(&self, word: &str) -> Option<String> {
        if self.rules.is_empty() || is_punct_token(word) {
            return None;
        }
        let chars: Vec<char> = word.chars().collect();
        let mut changed = false;
        let out: String = trigrams_of(&chars)
            .iter()
            .map(|t| match self.rules.get(t) {
                Some(&to) => {
                    changed = true;
                    to
                }
                None => t.focus,
            })
            .collect();
        changed.then_some(out)
    }
}

/// Selects each trigram of the corpus with probability `theta_p` and samples
/// its replacement.
pub fn build_phon_rules(
    corpus: &Corpus,
    theta_p: f64,
    tables: &PhonologyTables,
    seed: u64,
) -> Result<(SoundChangeRuleSet, SkipReport)> {
    check_probability("theta_p", theta_p)?;
    let trigrams = collect_trigrams(corpus);
    let mut report = SkipReport {
        trigrams: trigrams.len(),
        ..SkipReport::default()
    };
    let mut rules = BTreeMap::new();
    for tri in trigrams {
        let mut rng = unit_rng(seed, Stream::Phonological, &tri.key());
        if rng.random::<f64>() >= theta_p {
            continue;
        }
        report.selected += 1;
        match replace_char(tri.focus, tables, &mut rng) {
            Ok(to) => {
                rules.insert(tri, to);
            }
            Err(skip) => report.record(skip, tri.focus),
        }
    }
    if report.skipped() > 0 {
        log::info!(
            "phonological noiser: {} of {} selected trigrams skipped",
            report.skipped(),
            report.selected
        );
    }
    Ok((SoundChangeRuleSet { rules, theta_p, seed }, report))
}

pub fn apply_phon(corpus: &Corpus, rules: &SoundChangeRuleSet) -> Corpus {
    corpus.map_words(|w| rules.rewrite(w))
}

/// Phonological noise over a single standalone string (a suffix or a function
/// word), with word boundaries at both ends. Draws come from `rng`.
pub fn noise_string<R: Rng + ?Sized>(text: &str, theta_p: f64, tables: &PhonologyTables, rng: &mut R) -> String {
    let trigrams: BTreeSet<Trigram> = word_trigrams(text).into_iter().collect();
    let mut rules = BTreeMap::new();
    for tri in trigrams {
        if rng.random::<f64>() < theta_p {
            if let Ok(to) = replace_char(tri.focus, tables, rng) {
                rules.insert(tri, to);
            }
        }
    }
    let set = SoundChangeRuleSet {
        rules,
        theta_p,
        seed: 0,
    };
    set.rewrite(text).unwrap_or_else(|| text.to_owned())
}

/// Repeats [`noise_string`] until the output differs from the input, giving up
/// after `attempts` tries.
pub fn noise_until_changed<R: Rng + ?Sized>(
    text: &str,
    theta_p: f64,
    tables: &PhonologyTables,
    rng: &mut R,
    attempts: usize,
) -> Option<String> {
    (0..attempts)
        .map(|_| noise_string(text, theta_p, tables, rng))
        .find(|out| out != text)
}
