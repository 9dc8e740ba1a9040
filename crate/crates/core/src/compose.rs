//! The composite noiser and its replayable manifest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{Corpus, FunctionWordList};
use crate::error::{check_probability, Error, Result};
use crate::lexical::{build_lexical_maps, train_char_lm, LexicalMaps};
use crate::morphology::{build_suffix_map, extract_suffixes, SuffixMap, DEFAULT_K, DEFAULT_MAX_LEN};
use crate::phonology::{build_phon_rules, PhonologyTables, SkipReport, SoundChangeRuleSet};
use crate::posterior::ThetaEstimate;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ThetaParams {
    #[serde(default)]
    pub theta_p: f64,
    #[serde(default)]
    pub theta_m: f64,
    #[serde(default)]
    pub theta_f: f64,
    #[serde(default)]
    pub theta_c: f64,
}

impl ThetaParams {
    pub fn new(theta_p: f64, theta_m: f64, theta_f: f64, theta_c: f64) -> Result<Self> {
        let p = ThetaParams {
            theta_p,
            theta_m,
            theta_f,
            theta_c,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("theta_p", self.theta_p)?;
        check_probability("theta_m", self.theta_m)?;
        check_probability("theta_f", self.theta_f)?;
        check_probability("theta_c", self.theta_c)?;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.theta_p == 0.0 && self.theta_m == 0.0 && self.theta_f == 0.0 && self.theta_c == 0.0
    }
}

/// Inputs shared by every noising run.
#[derive(Debug, Clone)]
pub struct Resources {
    pub tables: PhonologyTables,
    pub function_words: FunctionWordList,
    pub k: usize,
    pub max_len: usize,
}

impl Default for Resources {
    fn default() -> Self {
        Resources {
            tables: PhonologyTables::builtin_latin(),
            function_words: FunctionWordList::default(),
            k: DEFAULT_K,
            max_len: DEFAULT_MAX_LEN,
        }
    }
}

/// Everything needed to replay one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseManifest {
    pub params: ThetaParams,
    pub seed: u64,
    pub k: usize,
    pub max_len: usize,
    pub function_words: FunctionWordList,
    pub phon_rules: SoundChangeRuleSet,
    pub suffix_map: SuffixMap,
    pub lexical_maps: LexicalMaps,
    /// Every source word type that changed, with its final form.
    pub word_translation: BTreeMap<String, String>,
    pub skip_report: SkipReport,
}

impl NoiseManifest {
    /// Final form of one word. Lexical replacement overrides everything;
    /// otherwise the sound-changed word gets the new suffix of the original
    /// word attached to its stem. `None` means unchanged.
    pub fn translate_word(&self, word: &str) -> Option<String> {
        if let Some(r) = self.lexical_maps.get(word) {
            return Some(r.to_owned());
        }
        let phon = self.phon_rules.rewrite(word);
        let morph = if self.function_words.contains(word) {
            None
        } else {
            self.suffix_map.longest_match(word)
        };
        match (phon, morph) {
            (None, None) => None,
            (Some(p), None) => Some(p),
            (p, Some((suffix, replacement))) => {
                let base = p.as_deref().unwrap_or(word);
                // sound change keeps the character count, so the stem length carries over
                let stem_len = word.chars().count() - suffix.chars().count();
                let stem: String = base.chars().take(stem_len).collect();
                Some(stem + replacement)
            }
        }
        .filter(|out| out != word)
    }

    /// Replays the manifest on a corpus.
    pub fn apply(&self, corpus: &Corpus) -> Corpus {
        corpus.map_words(|w| self.translate_word(w))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: NoiseManifest = serde_json::from_str(text)?;
        m.params.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Builds all maps from `corpus` and applies phonological, morphological and
/// lexical noise in that order.
pub fn compose(
    corpus: &Corpus,
    params: ThetaParams,
    resources: &Resources,
    seed: u64,
) -> Result<(Corpus, NoiseManifest)> {
    params.validate()?;
    let fw = &resources.function_words;
    let (phon_rules, skip_report) = build_phon_rules(corpus, params.theta_p, &resources.tables, seed)?;
    let inventory = extract_suffixes(corpus, fw, resources.k, resources.max_len)?;
    let suffix_map = build_suffix_map(&inventory, params.theta_m, &resources.tables, seed)?;
    let lexical_maps = if params.theta_f == 0.0 && params.theta_c == 0.0 {
        LexicalMaps {
            seed,
            ..LexicalMaps::default()
        }
    } else {
        let lm = train_char_lm(corpus)?;
        build_lexical_maps(corpus, fw, params.theta_f, params.theta_c, &resources.tables, &lm, seed)?
    };

    let mut manifest = NoiseManifest {
        params,
        seed,
        k: resources.k,
        max_len: resources.max_len,
        function_words: fw.clone(),
        phon_rules,
        suffix_map,
        lexical_maps,
        word_translation: BTreeMap::new(),
        skip_report,
    };
    manifest.word_translation = corpus
        .word_types()
        .into_iter()
        .filter_map(|w| manifest.translate_word(w).map(|t| (w.to_owned(), t)))
        .collect();
    let out = corpus.translate(&manifest.word_translation);
    Ok((out, manifest))
}

/// An artificial language at the parameters estimated for a real pair.
pub fn pseudo_crl(
    corpus: &Corpus,
    posteriors: &ThetaEstimate,
    resources: &Resources,
    seed: u64,
) -> Result<(Corpus, NoiseManifest)> {
    compose(corpus, posteriors.params()?, resources, seed)
}
