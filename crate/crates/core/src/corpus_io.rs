//! Corpora, bilingual lexicons and function-word lists.
//!
//! A corpus file holds one sentence per line. Lines are split on whitespace
//! and leading/trailing punctuation (Unicode general category `P*`) is
//! detached into its own token, so `"El gato."` becomes `["El", "gato", "."]`.
//! Punctuation inside a word (`daisy-chain`, `don't`) stays in the word.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    None,
    #[default]
    CanonicalCompose,
}

impl Normalization {
    pub fn apply(self, text: &str) -> String {
        match self {
            Normalization::None => text.to_owned(),
            Normalization::CanonicalCompose => text.nfc().collect(),
        }
    }
}

pub fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// A token made only of punctuation. Such tokens are never noised.
pub fn is_punct_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_punctuation)
}

/// Splits one line into tokens.
pub fn tokenize(line: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in line.split_whitespace() {
        if is_punct_token(chunk) {
            tokens.push(chunk.to_owned());
            continue;
        }
        let start = chunk
            .char_indices()
            .find(|&(_, c)| !is_punctuation(c))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let end = chunk
            .char_indices()
            .rev()
            .find(|&(_, c)| !is_punctuation(c))
            .map(|(i, c)| i + c.len_utf8())
            .unwrap_or(chunk.len());
        if start > 0 {
            tokens.push(chunk[..start].to_owned());
        }
        tokens.push(chunk[start..end].to_owned());
        if end < chunk.len() {
            tokens.push(chunk[end..].to_owned());
        }
    }
    tokens
}

/// The whitespace around and between the tokens of `line`, one more entry
/// than there are tokens.
fn separators(line: &str, tokens: &[String]) -> Vec<String> {
    let mut seps = Vec::with_capacity(tokens.len() + 1);
    let mut pos = 0;
    for t in tokens {
        let start = pos + line[pos..].find(t.as_str()).expect("token comes from this line");
        seps.push(line[pos..start].to_owned());
        pos = start + t.len();
    }
    seps.push(line[pos..].to_owned());
    seps
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    sentences: Vec<Vec<String>>,
    /// Original spacing of parsed text, so serialization can restore it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layout: Option<Vec<Vec<String>>>,
    pub language_tag: String,
    pub source_path: Option<String>,
}

impl Corpus {
    /// Builds a corpus from pre-tokenized sentences. Empty tokens and empty
    /// sentences are dropped.
    pub fn new(sentences: Vec<Vec<String>>, language_tag: impl Into<String>) -> Self {
        let sentences = sentences
            .into_iter()
            .map(|s| s.into_iter().filter(|t| !t.is_empty()).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        Corpus {
            sentences,
            layout: None,
            language_tag: language_tag.into(),
            source_path: None,
        }
    }

    /// Convenience constructor: each string is tokenized as one sentence.
    pub fn from_lines<S: AsRef<str>>(lines: &[S]) -> Self {
        Corpus::new(lines.iter().map(|l| tokenize(l.as_ref())).collect(), "und")
    }

    /// Tokenizes each non-blank line as a sentence, remembering its spacing.
    pub fn parse(text: &str, normalization: Normalization) -> Result<Self> {
        let mut sentences = Vec::new();
        let mut layout = Vec::new();
        for line in text.lines() {
            let line = normalization.apply(line);
            let tokens = tokenize(&line);
            if tokens.is_empty() {
                continue;
            }
            layout.push(separators(&line, &tokens));
            sentences.push(tokens);
        }
        if sentences.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Corpus {
            sentences,
            layout: Some(layout),
            language_tag: "und".into(),
            source_path: None,
        })
    }

    /// One sentence per line. Parsed text keeps its original spacing; other
    /// corpora join tokens with a single space.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, sentence) in self.sentences.iter().enumerate() {
            match self.layout.as_ref().map(|l| &l[i]) {
                Some(seps) => {
                    for (sep, tok) in seps.iter().zip(sentence) {
                        out.push_str(sep);
                        out.push_str(tok);
                    }
                    out.push_str(&seps[sentence.len()]);
                }
                None => out.push_str(&sentence.join(" ")),
            }
            out.push('\n');
        }
        out
    }

    /// The same tokens, serialized with single spaces.
    pub fn without_layout(&self) -> Corpus {
        Corpus {
            layout: None,
            ..self.clone()
        }
    }

    pub fn sentences(&self) -> &[Vec<String>] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(String::as_str)
    }

    /// Tokens that are not pure punctuation.
    pub fn word_tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens().filter(|t| !is_punct_token(t))
    }

    pub fn word_types(&self) -> BTreeSet<&str> {
        self.word_tokens().collect()
    }

    /// Rewrites word tokens through `f`; punctuation tokens are kept as is.
    /// `f` returning `None` keeps the token.
    pub fn map_words<F>(&self, mut f: F) -> Corpus
    where
        F: FnMut(&str) -> Option<String>,
    {
        let sentences = self
            .sentences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|t| {
                        if is_punct_token(t) {
                            t.clone()
                        } else {
                            f(t).unwrap_or_else(|| t.clone())
                        }
                    })
                    .collect()
            })
            .collect();
        Corpus {
            sentences,
            layout: self.layout.clone(),
            language_tag: self.language_tag.clone(),
            source_path: self.source_path.clone(),
        }
    }

    /// Applies a word-to-word map to every word token.
    pub fn translate(&self, map: &BTreeMap<String, String>) -> Corpus {
        self.map_words(|w| map.get(w).cloned())
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    bytes
        .split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, raw)| {
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            std::str::from_utf8(raw).map(str::to_owned).map_err(|_| Error::Decode {
                path: path.to_path_buf(),
                line: i + 1,
            })
        })
        .collect()
}

pub fn load_corpus(path: impl AsRef<Path>, normalization: Normalization) -> Result<Corpus> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let mut corpus = Corpus::parse(&lines.join("\n"), normalization)?;
    corpus.source_path = Some(path.display().to_string());
    Ok(corpus)
}

pub fn write_corpus(path: impl AsRef<Path>, corpus: &Corpus) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, corpus.to_text()).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub source: String,
    pub target: String,
    /// Per-source normalized score; `None` for unweighted lexicons.
    pub weight: Option<f64>,
}

impl LexiconEntry {
    pub fn effective_weight(&self) -> f64 {
        self.weight.unwrap_or(1.0)
    }
}

/// A bilingual word list. Duplicate pairs are collapsed on construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
}

impl Lexicon {
    /// Collapses duplicate `(source, target)` pairs, summing their weights and
    /// renormalizing per source word. If any pair carries a weight, pairs
    /// without one count as weight 1.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, Option<f64>)>,
    {
        let mut order: Vec<(String, String)> = Vec::new();
        let mut sums: HashMap<(String, String), f64> = HashMap::new();
        let mut weighted = false;
        for (i, (source, target, weight)) in pairs.into_iter().enumerate() {
            if source.is_empty() || target.is_empty() {
                return Err(Error::LexiconParse {
                    row: i + 1,
                    message: "empty word".into(),
                });
            }
            if let Some(w) = weight {
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::WeightRange { row: i + 1, value: w });
                }
                weighted = true;
            }
            let key = (source, target);
            match sums.get_mut(&key) {
                Some(total) => *total += weight.unwrap_or(1.0),
                None => {
                    sums.insert(key.clone(), weight.unwrap_or(1.0));
                    order.push(key);
                }
            }
        }
        let mut per_source: HashMap<&str, f64> = HashMap::new();
        for ((source, _), w) in &sums {
            *per_source.entry(source.as_str()).or_default() += w;
        }
        let entries = order
            .iter()
            .map(|key| {
                let weight = weighted.then(|| {
                    let total = per_source[key.0.as_str()];
                    if total > 0.0 {
                        sums[key] / total
                    } else {
                        0.0
                    }
                });
                LexiconEntry {
                    source: key.0.clone(),
                    target: key.1.clone(),
                    weight,
                }
            })
            .collect();
        Ok(Lexicon { entries })
    }

    pub fn parse(text: &str, normalization: Normalization) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let row = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() < 2 || cols.len() > 3 {
                return Err(Error::LexiconParse {
                    row,
                    message: format!("expected 2 or 3 tab-separated columns, found {}", cols.len()),
                });
            }
            if cols[0].is_empty() || cols[1].is_empty() {
                return Err(Error::LexiconParse {
                    row,
                    message: "empty word".into(),
                });
            }
            let weight = match cols.get(2) {
                Some(raw) => {
                    let w: f64 = raw.parse().map_err(|_| Error::LexiconParse {
                        row,
                        message: format!("weight {raw:?} is not a number"),
                    })?;
                    if !(0.0..=1.0).contains(&w) {
                        return Err(Error::WeightRange { row, value: w });
                    }
                    Some(w)
                }
                None => None,
            };
            rows.push((normalization.apply(cols[0]), normalization.apply(cols[1]), weight));
        }
        Lexicon::from_pairs(rows)
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_words(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|e| e.source.as_str()).collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            match e.weight {
                Some(w) => writeln!(out, "{}\t{}\t{}", e.source, e.target, w),
                None => writeln!(out, "{}\t{}", e.source, e.target),
            }
            .expect("writing to a String cannot fail");
        }
        out
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    Lexicon::parse(&lines.join("\n"), Normalization::CanonicalCompose)
}

pub fn write_lexicon(path: impl AsRef<Path>, lexicon: &Lexicon) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, lexicon.to_tsv()).map_err(|e| Error::io(path, e))
}

/// Closed-class words. Anything not listed is a content word.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionWordList {
    pub words: BTreeSet<String>,
    pub provenance: String,
}

impl FunctionWordList {
    pub fn new<I, S>(words: I, provenance: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        FunctionWordList {
            words: words.into_iter().map(Into::into).collect(),
            provenance: provenance.into(),
        }
    }

    /// Parses one word per line. Returns the list and any warnings.
    pub fn parse(text: &str, provenance: impl Into<String>, normalization: Normalization) -> (Self, Vec<String>) {
        let provenance = provenance.into();
        let words: BTreeSet<String> = text
            .lines()
            .map(|l| normalization.apply(l.trim()))
            .filter(|w| !w.is_empty())
            .collect();
        let mut warnings = Vec::new();
        if words.is_empty() {
            let msg =
                format!("function word list {provenance:?} is empty; every word is treated as a content word");
            log::warn!("{msg}");
            warnings.push(msg);
        }
        (FunctionWordList { words, provenance }, warnings)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// A content word is any non-punctuation token outside the list.
    pub fn is_content(&self, token: &str) -> bool {
        !is_punct_token(token) && !self.contains(token)
    }
}

pub fn load_function_words(path: impl AsRef<Path>) -> Result<(FunctionWordList, Vec<String>)> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    Ok(FunctionWordList::parse(
        &lines.join("\n"),
        path.display().to_string(),
        Normalization::CanonicalCompose,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_file(bytes: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(bytes).unwrap();
        f
    }

    #[test]
    fn detaches_trailing_punctuation() {
        assert_eq!(tokenize("El gato."), vec!["El", "gato", "."]);
    }

    #[test]
    fn keeps_inner_punctuation_and_groups_runs() {
        assert_eq!(
            tokenize("('daisy-chain,' she said...)"),
            vec!["('", "daisy-chain", ",'", "she", "said", "...)"]
        );
        assert_eq!(tokenize("-- don't"), vec!["--", "don't"]);
    }

    #[test]
    fn spacing_survives_serialization() {
        let text = "  El gato,  come.\tY (bebe)\nOtra  línea !\n";
        let c = Corpus::parse(text, Normalization::None).unwrap();
        assert_eq!(c.to_text(), text);
        let shouted = c.map_words(|w| Some(w.to_uppercase()));
        assert_eq!(shouted.to_text(), "  EL GATO,  COME.\tY (BEBE)\nOTRA  LÍNEA !\n");
        assert_eq!(
            c.without_layout().to_text(),
            "El gato , come . Y ( bebe )\nOtra línea !\n"
        );
        let again = Corpus::parse(&c.without_layout().to_text(), Normalization::None).unwrap();
        assert_eq!(again.sentences(), c.sentences());
    }

    #[test]
    fn empty_file_is_an_error() {
        let f = temp_file(b"");
        assert!(matches!(
            load_corpus(f.path(), Normalization::None),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn blank_lines_are_dropped() {
        let f = temp_file("uno dos\n\ntres.\n".as_bytes());
        let c = load_corpus(f.path(), Normalization::None).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.source_path.as_deref(), Some(f.path().to_str().unwrap()));
    }

    #[test]
    fn invalid_utf8_reports_line() {
        let f = temp_file(b"ok\nbad \xff\n");
        match load_corpus(f.path(), Normalization::None) {
            Err(Error::Decode { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn canonical_composition_merges_combining_marks() {
        let decomposed = "cafe\u{301}";
        let c = Corpus::parse(decomposed, Normalization::CanonicalCompose).unwrap();
        assert_eq!(c.sentences()[0][0], "caf\u{e9}");
        let raw = Corpus::parse(decomposed, Normalization::None).unwrap();
        assert_eq!(raw.sentences()[0][0], decomposed);
    }

    #[test]
    fn lexicon_single_row() {
        let lex = Lexicon::parse("perro\tcão\n", Normalization::CanonicalCompose).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.entries()[0].source, "perro");
        assert_eq!(lex.entries()[0].target, "cão");
        assert_eq!(lex.entries()[0].weight, None);
    }

    #[test]
    fn lexicon_duplicates_collapse_and_renormalize() {
        let lex = Lexicon::parse("perro\tcão\t0.3\nperro\tcão\t0.3\n", Normalization::None).unwrap();
        assert_eq!(lex.len(), 1);
        assert!((lex.entries()[0].weight.unwrap() - 1.0).abs() < 1e-12);

        let lex = Lexicon::parse("a\tx\t0.2\na\ty\t0.6\nb\tz\t0.5\n", Normalization::None).unwrap();
        let w: Vec<f64> = lex.entries().iter().map(|e| e.weight.unwrap()).collect();
        assert!((w[0] - 0.25).abs() < 1e-12);
        assert!((w[1] - 0.75).abs() < 1e-12);
        assert!((w[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lexicon_malformed_row() {
        match Lexicon::parse("perro\n", Normalization::None) {
            Err(Error::LexiconParse { row, .. }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
        match Lexicon::parse("a\tb\n\tc\n", Normalization::None) {
            Err(Error::LexiconParse { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lexicon_weight_out_of_range() {
        assert!(matches!(
            Lexicon::parse("a\tb\t1.5\n", Normalization::None),
            Err(Error::WeightRange { row: 1, .. })
        ));
    }

    #[test]
    fn function_words_dedup_and_trim() {
        let (list, warnings) = FunctionWordList::parse("de\nla\nla\n", "t", Normalization::None);
        assert_eq!(list.words.iter().collect::<Vec<_>>(), vec!["de", "la"]);
        assert!(warnings.is_empty());

        let (list, _) = FunctionWordList::parse("el  \n  y\t\n", "t", Normalization::None);
        assert!(list.contains("el"));
        assert!(list.contains("y"));
    }

    #[test]
    fn empty_function_word_file_warns() {
        let f = temp_file(b"");
        let (list, warnings) = load_function_words(f.path()).unwrap();
        assert!(list.is_empty());
        assert_eq!(warnings.len(), 1);
        assert!(list.is_content("anything"));
    }
}
