//! Acceptance checks. Runs as a plain program and prints one PASS or FAIL line
//! per criterion; the process fails if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Zipf};

use dialect_noise::alignment::{extract_lexicon, ibm1_train};
use dialect_noise::analytics::{
    fit_trend, pd, stabilized_sweep, NoiserLabel, Param, ScorePoint, SweepAxis, TokenOverlapScorer,
};
use dialect_noise::corpus_io::{load_corpus, load_function_words, Normalization};
use dialect_noise::morphology::extract_suffixes;
use dialect_noise::phonology::word_trigrams;
use dialect_noise::rng::DEFAULT_SEED;
use dialect_noise::{
    compose, estimate_thetas, Corpus, FunctionWordList, Lexicon, PosteriorConfig, Resources, ThetaParams,
};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn english() -> (Corpus, FunctionWordList) {
    let corpus = load_corpus(format!("{DATA}/canterbury_en.txt"), Normalization::CanonicalCompose).unwrap();
    let (fw, _) = load_function_words(format!("{DATA}/function_words_en.txt")).unwrap();
    (corpus, fw)
}

/// (CRL, clean BLEU, noised BLEU, printed PD) for every row of the reference
/// posterior table, with the random baseline at 0.
const POSTERIOR_TABLE: &[(&str, f64, f64, f64)] = &[
    ("hin", 56.44, 56.44, 0.0),
    ("awa", 56.44, 37.03, 34.39),
    ("bho", 56.44, 32.38, 42.63),
    ("hne", 56.44, 33.24, 41.11),
    ("mag", 56.44, 41.47, 26.52),
    ("mai", 56.44, 28.4, 49.68),
    ("ind", 60.0, 60.0, 0.0),
    ("zsm", 60.0, 53.01, 11.65),
    ("spa", 42.91, 42.91, 0.0),
    ("glg", 42.91, 47.01, -9.55),
    ("fra", 57.34, 57.34, 0.0),
    ("oci", 57.34, 38.4, 33.03),
    ("deu", 41.25, 41.25, 0.0),
    ("dan", 41.25, 16.37, 60.32),
    ("isl", 41.25, 4.11, 90.04),
    ("swe", 41.25, 16.7, 59.52),
    ("arb", 55.32, 55.32, 0.0),
    ("acm", 55.32, 24.17, 56.31),
    ("acq", 55.32, 46.76, 15.47),
    ("aeb", 55.32, 43.55, 21.28),
    ("ajp", 55.32, 38.25, 30.86),
    ("apc", 55.32, 44.41, 19.72),
    ("ars", 55.32, 48.36, 12.58),
    ("ary", 55.32, 50.16, 9.33),
    ("arz", 55.32, 33.05, 40.26),
];

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for &(lang, b, s, printed) in POSTERIOR_TABLE {
        let err = (pd(s, b, 0.0).unwrap() - printed).abs();
        worst = worst.max(err);
        if err > 0.02 {
            bad.push(lang);
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!(
            "{} rows, max |error| {worst:.4}, off rows {bad:?}",
            POSTERIOR_TABLE.len()
        ),
    }
}

fn criterion_2() -> Outcome {
    let baselines = [0.0, 33.34, 45.0, 50.0, 60.33, 72.5, 88.8, 99.99, 100.0, 20.0];
    let bad: Vec<f64> = baselines
        .iter()
        .copied()
        .filter(|&b| pd(33.33, b, 33.33).unwrap() != 100.0)
        .collect();
    Outcome {
        pass: bad.is_empty(),
        detail: format!("{} baselines, inexact for {bad:?}", baselines.len()),
    }
}

fn criterion_3() -> Outcome {
    let (corpus, fw) = english();
    // a large inventory keeps the realized share of changed suffixes close to theta
    let k = 1000;
    let resources = Resources {
        function_words: fw.clone(),
        k,
        ..Resources::default()
    };
    let inventory = extract_suffixes(&corpus, &fw, k, resources.max_len).unwrap();
    let config = PosteriorConfig {
        k,
        ..PosteriorConfig::default()
    };
    let mut worst: BTreeMap<Param, f64> = BTreeMap::new();
    let mut failures = Vec::new();
    for param in [Param::P, Param::M, Param::F, Param::C] {
        let tolerance = if param == Param::C { 0.08 } else { 0.05 };
        for theta in [0.1, 0.3, 0.5, 0.7] {
            let mut params = ThetaParams::default();
            param.set(&mut params, theta);
            let (_, manifest) = compose(&corpus, params, &resources, DEFAULT_SEED).unwrap();
            let lexicon = Lexicon::from_pairs(corpus.word_types().into_iter().map(|w| {
                let t = manifest.translate_word(w).unwrap_or_else(|| w.to_owned());
                (w.to_owned(), t, None)
            }))
            .unwrap();
            let est = estimate_thetas(&lexicon, &fw, &inventory, &config).unwrap();
            let err = param.get(&est.params().unwrap()) - theta;
            let w = worst.entry(param).or_default();
            if err.abs() > w.abs() {
                *w = err;
            }
            if err.abs() > tolerance {
                failures.push(format!("{param:?}@{theta}: {err:+.3}"));
            }
        }
    }
    let worst: Vec<String> = worst.iter().map(|(p, e)| format!("{p:?} {e:+.3}")).collect();
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{} sentences, worst error per noiser [{}], failures {failures:?}",
            corpus.len(),
            worst.join(", ")
        ),
    }
}

/// Every word ends in one of a few letters and the inventory holds only final
/// letters, so each content type carries exactly one inventory suffix.
fn one_suffix_corpus(rng: &mut ChaCha8Rng) -> Corpus {
    let onsets = ["b", "d", "f", "g", "k", "l", "m", "p", "r", "t", "v", "z"];
    let nuclei = ["a", "e", "i", "o", "u"];
    let finals = ["a", "e", "o", "s", "n", "l", "r", "t"];
    let mut types = BTreeSet::new();
    while types.len() < 400 {
        let syllables = rng.random_range(1..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(onsets[rng.random_range(0..onsets.len())]);
            w.push_str(nuclei[rng.random_range(0..nuclei.len())]);
        }
        w.push_str(finals[rng.random_range(0..finals.len())]);
        types.insert(w);
    }
    let types: Vec<String> = types.into_iter().collect();
    let lines: Vec<String> = types.chunks(8).map(|c| c.join(" ")).collect();
    Corpus::from_lines(&lines)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let corpus = one_suffix_corpus(&mut rng);
    let resources = Resources {
        k: 100,
        max_len: 1,
        ..Resources::default()
    };
    let params = ThetaParams::new(0.0, 0.5, 0.0, 0.5).unwrap();
    let types = corpus.word_types().len() as f64;
    let seeds = 200;
    let fractions: Vec<f64> = (0..seeds)
        .map(|seed| {
            let (_, m) = compose(&corpus, params, &resources, seed).unwrap();
            1.0 - m.word_translation.len() as f64 / types
        })
        .collect();
    let mean = fractions.iter().sum::<f64>() / seeds as f64;
    let var = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64;
    let se = (var / seeds as f64).sqrt();
    let expected = (1.0 - 0.5) * (1.0 - 0.5);
    Outcome {
        pass: (mean - expected).abs() <= 3.0 * se,
        detail: format!(
            "{seeds} seeds, {types} types: unchanged fraction {mean:.4} vs {expected}, 3 SE = {:.4}",
            3.0 * se
        ),
    }
}

fn criterion_5() -> Outcome {
    let (fw, _) = load_function_words(format!("{DATA}/function_words_en.txt")).unwrap();
    let text: String = std::fs::read_to_string(format!("{DATA}/canterbury_en.txt"))
        .unwrap()
        .lines()
        .skip(900)
        .take(150)
        .map(|l| format!("{l}\n"))
        .collect();
    let sample = Corpus::parse(&text, Normalization::CanonicalCompose).unwrap();
    let resources = Resources {
        function_words: fw,
        ..Resources::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let configs = 60;
    let mut violations = BTreeMap::<&str, usize>::new();
    for _ in 0..configs {
        let mut draw = || match rng.random_range(0..4) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random::<f64>(),
        };
        let params = ThetaParams::new(draw(), draw(), draw(), draw()).unwrap();
        let seed: u64 = rng.random();
        let (out, manifest) = compose(&sample, params, &resources, seed).unwrap();

        let mut image: BTreeMap<&str, &str> = BTreeMap::new();
        for (a, b) in sample
            .sentences()
            .iter()
            .flatten()
            .zip(out.sentences().iter().flatten())
        {
            if image.insert(a, b).is_some_and(|prev| prev != b) {
                *violations.entry("word").or_default() += 1;
            }
        }

        let phon_only = ThetaParams::new(params.theta_p, 0.0, 0.0, 0.0).unwrap();
        let (phon_out, _) = compose(&sample, phon_only, &resources, seed).unwrap();
        let mut rewrites = BTreeMap::new();
        for (a, b) in sample
            .sentences()
            .iter()
            .flatten()
            .zip(phon_out.sentences().iter().flatten())
        {
            for (t, c) in word_trigrams(a).into_iter().zip(b.chars()) {
                if rewrites.insert(t, c).is_some_and(|prev| prev != c) {
                    *violations.entry("trigram").or_default() += 1;
                }
            }
        }

        let (identity, _) = compose(&sample, ThetaParams::default(), &resources, seed).unwrap();
        if identity.to_text() != text {
            *violations.entry("identity").or_default() += 1;
        }

        let (again, again_manifest) = compose(&sample, params, &resources, seed).unwrap();
        if again != out || again_manifest != manifest || manifest.apply(&sample) != out {
            *violations.entry("determinism").or_default() += 1;
        }
    }
    Outcome {
        pass: violations.is_empty(),
        detail: format!("{configs} random configurations, violations {violations:?}"),
    }
}

fn criterion_6() -> Outcome {
    let (slope, intercept) = (60.0, 5.0);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let thetas: Vec<f64> = (0..8).map(|i| i as f64 / 7.0).collect();
    let trials = 100;
    let mut recovered = 0;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + trial);
        let mut points = Vec::new();
        for &theta in &thetas {
            for r in 0..10 {
                let value = slope * theta + intercept + noise.sample(&mut rng);
                let params = ThetaParams::new(0.0, 0.0, 0.0, theta).unwrap();
                points.push(ScorePoint::new(NoiserLabel::C, params, r, 100.0 - value, 100.0, 0.0).unwrap());
            }
        }
        let t = fit_trend(&points, NoiserLabel::C).unwrap();
        if (t.slope - slope).abs() <= 0.1 * slope && (t.intercept - intercept).abs() <= 3.0 {
            recovered += 1;
        }
    }
    Outcome {
        pass: recovered >= 95,
        detail: format!("{recovered}/{trials} trials within slope +-10% and intercept +-3"),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let vocab = 500;
    let source_words: Vec<String> = (0..vocab).map(|i| format!("s{i}")).collect();
    let dictionary: Vec<String> = (0..vocab).map(|i| format!("t{}", (i * 7919 + 13) % vocab)).collect();
    let zipf = Zipf::new(vocab as f64, 1.0).unwrap();
    let (mut src_lines, mut tgt_lines) = (Vec::new(), Vec::new());
    for _ in 0..2000 {
        let len = rng.random_range(5..=15);
        let ids: Vec<usize> = (0..len).map(|_| zipf.sample(&mut rng) as usize - 1).collect();
        src_lines.push(
            ids.iter()
                .map(|&i| source_words[i].as_str())
                .collect::<Vec<_>>()
                .join(" "),
        );
        tgt_lines.push(
            ids.iter()
                .map(|&i| dictionary[i].as_str())
                .collect::<Vec<_>>()
                .join(" "),
        );
    }
    let (src, tgt) = (Corpus::from_lines(&src_lines), Corpus::from_lines(&tgt_lines));
    let table = ibm1_train(&src, &tgt, 10).unwrap();
    let monotone = table
        .log_likelihoods
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-9 * w[0].abs());
    let lexicon = extract_lexicon(&table, &src, &tgt, 0.3, 2).unwrap();
    let correct = lexicon
        .entries()
        .iter()
        .filter(|e| {
            let i: usize = e.source[1..].parse().unwrap();
            e.target == dictionary[i]
        })
        .count();
    let precision = correct as f64 / lexicon.len().max(1) as f64;
    Outcome {
        pass: precision >= 0.9 && monotone && !lexicon.is_empty(),
        detail: format!(
            "precision {precision:.3} over {} entries, log-likelihood non-decreasing: {monotone}",
            lexicon.len()
        ),
    }
}

fn criterion_8() -> Outcome {
    let (corpus, fw) = english();
    let sample = Corpus::new(corpus.sentences()[..600].to_vec(), "en");
    let resources = Resources {
        function_words: fw,
        ..Resources::default()
    };
    let grid: Vec<f64> = (0..=5).map(|i| i as f64 * 0.2).collect();
    let mut details = Vec::new();
    let mut pass = true;
    for param in [Param::P, Param::M, Param::F, Param::C] {
        let mut scorer = TokenOverlapScorer::new(sample.clone());
        let result = stabilized_sweep(
            &sample,
            &SweepAxis::single(param),
            &grid,
            5,
            &resources,
            &mut scorer,
            0.0,
            DEFAULT_SEED,
        )
        .unwrap();
        let means: Vec<f64> = result.summary().iter().map(|s| s.mean_pd).collect();
        let monotone = means.len() == grid.len() && means.windows(2).all(|w| w[1] >= w[0]);
        pass &= monotone && result.failures.is_empty();
        details.push(format!(
            "{param:?} [{}]",
            means.iter().map(|m| format!("{m:.1}")).collect::<Vec<_>>().join(" ")
        ));
    }
    Outcome {
        pass,
        detail: format!("mean PD by theta: {}", details.join("; ")),
    }
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("PD reproduces the related-language reference table", criterion_1),
        ("PD calibration at the XNLI random baseline", criterion_2),
        ("posterior round trip on a public-domain corpus", criterion_3),
        ("composition overwrite law", criterion_4),
        ("regularity, identity and determinism", criterion_5),
        ("trend recovery from a known generator", criterion_6),
        ("aligner precision and EM monotonicity", criterion_7),
        ("mock-scorer monotonicity of sweeps", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {} {verdict}: {name}: {} ({:.1}s)",
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
