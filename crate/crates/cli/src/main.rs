//! Command-line entry point.
//!
//! Flags override values from `--config`, which override built-in defaults.
//! `DIALECT_NOISE_RESOURCES` names a directory searched for `phonology.json`
//! and `function_words.txt` when the matching flags are absent.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use dialect_noise::alignment::{extract_lexicon, ibm1_train, AlignConfig};
use dialect_noise::analytics::{
    compare_composite, fit_trend, sd_table, stabilized_sweep, write_sweep, CommandScorer, DirectoryScorer, Param,
    Scorer, SweepAxis, TokenOverlapScorer, TrendModel,
};
use dialect_noise::corpus_io::{load_corpus, load_function_words, load_lexicon, write_corpus, write_lexicon};
use dialect_noise::morphology::{extract_suffixes, DEFAULT_K, DEFAULT_MAX_LEN};
use dialect_noise::posterior::{estimate_from_bitext, estimate_thetas_with_vocabulary};
use dialect_noise::rng::DEFAULT_SEED;
use dialect_noise::{
    compose, pseudo_crl, Corpus, FunctionWordList, NoiseManifest, Normalization, PhonologyTables, PosteriorConfig,
    Resources, ThetaEstimate, ThetaParams,
};

const RESOURCE_ENV: &str = "DIALECT_NOISE_RESOURCES";

#[derive(Parser)]
#[command(
    name = "dialect-noise",
    version,
    about = "Generate and measure artificial related languages"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON file with default values for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory holding phonology.json and function_words.txt
    #[arg(long, global = true, env = RESOURCE_ENV)]
    resource_dir: Option<PathBuf>,
    /// Phonology table JSON, or `builtin-latin`
    #[arg(long, global = true)]
    phon_table: Option<String>,
    #[arg(long, global = true)]
    function_words: Option<PathBuf>,
    /// Number of suffixes in the inventory
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    max_len: Option<usize>,
    #[arg(long, global = true, value_enum)]
    normalization: Option<NormArg>,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum NormArg {
    None,
    Nfc,
}

#[derive(Args, Clone, Default)]
struct ThetaArgs {
    #[arg(long)]
    theta_p: Option<f64>,
    #[arg(long)]
    theta_m: Option<f64>,
    #[arg(long)]
    theta_f: Option<f64>,
    #[arg(long)]
    theta_c: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct AlignArgs {
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    min_prob: Option<f64>,
    #[arg(long)]
    min_count: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Noise a corpus and write the manifest
    Noise {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        theta: ThetaArgs,
        /// Permit a run where every theta is zero
        #[arg(long)]
        allow_identity: bool,
    },
    /// Replay a manifest on a corpus
    Apply {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Estimate noise parameters from a lexicon or a bitext
    Posteriors {
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, requires = "bitext_tgt")]
        bitext_src: Option<PathBuf>,
        #[arg(long, requires = "bitext_src")]
        bitext_tgt: Option<PathBuf>,
        /// Source-language corpus for the suffix inventory and vocabulary
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        ned_threshold: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Per-unit audit CSV
        #[arg(long)]
        per_unit: Option<PathBuf>,
        /// Where to write the lexicon induced from a bitext
        #[arg(long)]
        lexicon_out: Option<PathBuf>,
        #[command(flatten)]
        align: AlignArgs,
    },
    /// Induce a word-translation lexicon from a bitext
    Align {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        tgt: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Translation table and per-iteration log-likelihoods as JSON
        #[arg(long)]
        table: Option<PathBuf>,
        #[command(flatten)]
        align: AlignArgs,
    },
    /// Score noised corpora over a theta grid and fit a trend
    Sweep {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Parameters that take the grid value, e.g. `c` or `f,c`
        #[arg(long, value_delimiter = ',')]
        vary: Vec<ParamArg>,
        /// Comma-separated theta values
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        #[arg(long)]
        replicates: Option<u32>,
        /// `overlap`, `cmd:<program> [args..]` or `dir:<path>`
        #[arg(long)]
        scorer: Option<String>,
        /// Seconds a directory scorer waits for each score file
        #[arg(long)]
        scorer_timeout: Option<u64>,
        /// Random-baseline score
        #[arg(long)]
        s_rand: Option<f64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Values for the parameters that do not vary
        #[command(flatten)]
        theta: ThetaArgs,
    },
    /// Compose an artificial language at estimated parameters
    PseudoCrl {
        #[arg(long)]
        posteriors: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Compare a composite trend with its lexical and morphological parts
    Compare {
        #[arg(long)]
        lexical: PathBuf,
        #[arg(long)]
        morphological: PathBuf,
        #[arg(long)]
        composite: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Tabulate per-theta PD standard deviations from sweep summaries
    SdTable {
        /// `task:label=summary.csv`, repeatable
        #[arg(long = "entry", required = true)]
        entries: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ParamArg {
    P,
    M,
    F,
    C,
}

impl From<ParamArg> for Param {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::P => Param::P,
            ParamArg::M => Param::M,
            ParamArg::F => Param::F,
            ParamArg::C => Param::C,
        }
    }
}

/// Values a `--config` file may supply. Every field is optional.
#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    resource_dir: Option<PathBuf>,
    phon_table: Option<String>,
    function_words: Option<PathBuf>,
    k: Option<usize>,
    max_len: Option<usize>,
    normalization: Option<NormArg>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    manifest: Option<PathBuf>,
    corpus: Option<PathBuf>,
    theta_p: Option<f64>,
    theta_m: Option<f64>,
    theta_f: Option<f64>,
    theta_c: Option<f64>,
    ned_threshold: Option<f64>,
    iterations: Option<usize>,
    min_prob: Option<f64>,
    min_count: Option<usize>,
    vary: Option<Vec<ParamArg>>,
    grid: Option<Vec<f64>>,
    replicates: Option<u32>,
    scorer: Option<String>,
    scorer_timeout: Option<u64>,
    s_rand: Option<f64>,
    out_dir: Option<PathBuf>,
}

struct Ctx {
    file: FileConfig,
    seed: u64,
    resource_dir: Option<PathBuf>,
    phon_table: Option<String>,
    function_words: Option<PathBuf>,
    k: usize,
    max_len: usize,
    normalization: Normalization,
}

impl Ctx {
    fn new(common: CommonArgs) -> Result<Self> {
        let file = match &common.config {
            Some(p) => {
                let text =
                    std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => FileConfig::default(),
        };
        let normalization = match common.normalization.or(file.normalization) {
            Some(NormArg::None) => Normalization::None,
            Some(NormArg::Nfc) | None => Normalization::CanonicalCompose,
        };
        Ok(Ctx {
            seed: common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            resource_dir: common.resource_dir.or_else(|| file.resource_dir.clone()),
            phon_table: common.phon_table.or_else(|| file.phon_table.clone()),
            function_words: common.function_words.or_else(|| file.function_words.clone()),
            k: common.k.or(file.k).unwrap_or(DEFAULT_K),
            max_len: common.max_len.or(file.max_len).unwrap_or(DEFAULT_MAX_LEN),
            normalization,
            file,
        })
    }

    fn announce_seed(&self) {
        eprintln!("seed: {}", self.seed);
    }

    fn theta(&self, t: &ThetaArgs) -> Result<ThetaParams> {
        let f = &self.file;
        Ok(ThetaParams::new(
            t.theta_p.or(f.theta_p).unwrap_or(0.0),
            t.theta_m.or(f.theta_m).unwrap_or(0.0),
            t.theta_f.or(f.theta_f).unwrap_or(0.0),
            t.theta_c.or(f.theta_c).unwrap_or(0.0),
        )?)
    }

    fn align(&self, a: &AlignArgs) -> AlignConfig {
        let d = AlignConfig::default();
        AlignConfig {
            iterations: a.iterations.or(self.file.iterations).unwrap_or(d.iterations),
            min_prob: a.min_prob.or(self.file.min_prob).unwrap_or(d.min_prob),
            min_count: a.min_count.or(self.file.min_count).unwrap_or(d.min_count),
        }
    }

    fn path(&self, flag: Option<PathBuf>, file: Option<&PathBuf>, what: &str) -> Result<PathBuf> {
        match flag.or_else(|| file.cloned()) {
            Some(p) => Ok(p),
            None => bail!("missing --{what}"),
        }
    }

    fn corpus(&self, path: &Path) -> Result<Corpus> {
        load_corpus(path, self.normalization).with_context(|| format!("loading corpus {}", path.display()))
    }

    fn resource(&self, name: &str) -> Option<PathBuf> {
        self.resource_dir.as_ref().map(|d| d.join(name)).filter(|p| p.is_file())
    }

    fn tables(&self) -> Result<Option<PhonologyTables>> {
        match self.phon_table.as_deref() {
            Some("builtin-latin") => Ok(Some(PhonologyTables::builtin_latin())),
            Some(p) => PhonologyTables::load(p)
                .map(Some)
                .with_context(|| format!("loading phonology table {p}")),
            None => match self.resource("phonology.json") {
                Some(p) => PhonologyTables::load(&p)
                    .map(Some)
                    .with_context(|| format!("loading phonology table {}", p.display())),
                None => Ok(None),
            },
        }
    }

    fn function_word_list(&self) -> Result<FunctionWordList> {
        let path = self
            .function_words
            .clone()
            .or_else(|| self.resource("function_words.txt"));
        match path {
            Some(p) => {
                let (fw, warnings) =
                    load_function_words(&p).with_context(|| format!("loading function words {}", p.display()))?;
                for w in warnings {
                    eprintln!("warning: {w}");
                }
                Ok(fw)
            }
            None => {
                eprintln!("warning: no function word list given; every word is treated as a content word");
                Ok(FunctionWordList::default())
            }
        }
    }

    /// Sound change, suffix noise and function-word change all draw on the
    /// phonology table.
    fn resources(&self, params: &ThetaParams) -> Result<Resources> {
        let needs_tables = params.theta_p > 0.0 || params.theta_m > 0.0 || params.theta_f > 0.0;
        let tables = match self.tables()? {
            Some(t) => t,
            None if needs_tables => bail!(
                "a phonology table is required for theta_p, theta_m or theta_f above zero; \
                 pass --phon-table or set {RESOURCE_ENV}"
            ),
            None => PhonologyTables::builtin_latin(),
        };
        Ok(Resources {
            tables,
            function_words: self.function_word_list()?,
            k: self.k,
            max_len: self.max_len,
        })
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn write_output_corpus(path: Option<&Path>, corpus: &Corpus) -> Result<()> {
    match path {
        Some(p) => write_corpus(p, corpus).with_context(|| format!("writing {}", p.display())),
        None => write_text(None, &corpus.to_text()),
    }
}

fn write_manifest(path: Option<&Path>, manifest: &NoiseManifest) -> Result<()> {
    if let Some(p) = path {
        manifest
            .write(p)
            .with_context(|| format!("writing manifest {}", p.display()))?;
    }
    Ok(())
}

fn report_manifest(m: &NoiseManifest) {
    let s = &m.skip_report;
    eprintln!(
        "phonological rules: {} of {} trigrams selected; skipped: {} no IPA, {} no plausibility set, {} unchanged after retries",
        s.selected,
        s.trigrams,
        s.no_ipa,
        s.no_plausibility_set,
        s.unchanged_after_retries
    );
    if !s.unmapped_chars.is_empty() {
        let chars: String = s.unmapped_chars.iter().collect();
        eprintln!("characters without an IPA entry: {chars}");
    }
    eprintln!(
        "suffix replacements: {}; function words replaced: {}; content words replaced: {}; word types changed: {}",
        m.suffix_map.replacements.len(),
        m.lexical_maps.function_map.len(),
        m.lexical_maps.content_map.len(),
        m.word_translation.len()
    );
}

fn build_scorer(
    scorer_desc: &str,
    reference: &Corpus,
    work_dir: &Path,
    timeout: Duration,
) -> Result<Box<dyn Scorer>> {
    if scorer_desc == "overlap" {
        return Ok(Box::new(TokenOverlapScorer::new(reference.clone())));
    }
    if let Some(cmd) = scorer_desc.strip_prefix("cmd:") {
        let mut parts = cmd.split_whitespace().map(str::to_owned);
        let Some(program) = parts.next() else {
            bail!("scorer command is empty");
        };
        return Ok(Box::new(CommandScorer {
            program,
            args: parts.collect(),
            work_dir: work_dir.join("corpora"),
        }));
    }
    if let Some(dir) = scorer_desc.strip_prefix("dir:") {
        return Ok(Box::new(DirectoryScorer::new(dir, timeout)));
    }
    bail!("unknown scorer {scorer_desc:?}; expected overlap, cmd:<program> or dir:<path>")
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx::new(cli.common)?;
    match cli.command {
        Command::Noise {
            input,
            output,
            manifest,
            theta,
            allow_identity,
        } => {
            let params = ctx.theta(&theta)?;
            if params.is_zero() && !allow_identity {
                bail!("every theta is zero; pass --allow-identity to copy the corpus unchanged");
            }
            let input = ctx.path(input, ctx.file.input.as_ref(), "input")?;
            let corpus = ctx.corpus(&input)?;
            let resources = ctx.resources(&params)?;
            ctx.announce_seed();
            let (out, m) = compose(&corpus, params, &resources, ctx.seed)?;
            report_manifest(&m);
            write_output_corpus(output.or_else(|| ctx.file.output.clone()).as_deref(), &out)?;
            write_manifest(manifest.or_else(|| ctx.file.manifest.clone()).as_deref(), &m)?;
        }
        Command::Apply {
            manifest,
            input,
            output,
        } => {
            let m = NoiseManifest::load(&manifest)
                .with_context(|| format!("loading manifest {}", manifest.display()))?;
            let input = ctx.path(input, ctx.file.input.as_ref(), "input")?;
            let out = m.apply(&ctx.corpus(&input)?);
            write_output_corpus(output.or_else(|| ctx.file.output.clone()).as_deref(), &out)?;
        }
        Command::Posteriors {
            lexicon,
            bitext_src,
            bitext_tgt,
            corpus,
            ned_threshold,
            output,
            per_unit,
            lexicon_out,
            align,
        } => {
            let config = PosteriorConfig {
                ned_threshold: ned_threshold
                    .or(ctx.file.ned_threshold)
                    .unwrap_or(PosteriorConfig::default().ned_threshold),
                k: ctx.k,
                max_len: ctx.max_len,
                ..PosteriorConfig::default()
            };
            config.validate()?;
            let fw = ctx.function_word_list()?;
            let corpus = match corpus.or_else(|| ctx.file.corpus.clone()) {
                Some(p) => Some(ctx.corpus(&p)?),
                None => None,
            };
            let estimate = match (lexicon, bitext_src, bitext_tgt) {
                (Some(lex_path), None, None) => {
                    let lex = load_lexicon(&lex_path)
                        .with_context(|| format!("loading lexicon {}", lex_path.display()))?;
                    // without a corpus, the lexicon's source words stand in for it
                    let reference = corpus.unwrap_or_else(|| {
                        let words: Vec<String> = lex.source_words().into_iter().map(str::to_owned).collect();
                        Corpus::from_lines(&words)
                    });
                    let inventory = extract_suffixes(&reference, &fw, ctx.k, ctx.max_len)?;
                    let vocabulary = reference.word_types().into_iter().map(str::to_owned).collect();
                    estimate_thetas_with_vocabulary(&lex, &vocabulary, &fw, &inventory, &config)?
                }
                (None, Some(src), Some(tgt)) => {
                    let (s, t) = (ctx.corpus(&src)?, ctx.corpus(&tgt)?);
                    let inventory = extract_suffixes(corpus.as_ref().unwrap_or(&s), &fw, ctx.k, ctx.max_len)?;
                    let (est, lex) = estimate_from_bitext(&s, &t, &fw, &inventory, &config, &ctx.align(&align))?;
                    if let Some(p) = lexicon_out {
                        write_lexicon(&p, &lex).with_context(|| format!("writing {}", p.display()))?;
                    }
                    est
                }
                (None, None, None) => bail!("give either --lexicon or --bitext-src with --bitext-tgt"),
                _ => bail!("--lexicon and --bitext-src/--bitext-tgt are mutually exclusive"),
            };
            for w in &estimate.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(p) = per_unit {
                write_text(Some(&p), &estimate.per_unit_csv()?)?;
            }
            let mut shown = estimate.clone();
            shown.per_unit = None;
            write_json(output.or_else(|| ctx.file.output.clone()).as_deref(), &shown)?;
        }
        Command::Align {
            src,
            tgt,
            output,
            table,
            align,
        } => {
            let cfg = ctx.align(&align);
            let (s, t) = (ctx.corpus(&src)?, ctx.corpus(&tgt)?);
            let tt = ibm1_train(&s, &t, cfg.iterations)?;
            eprintln!(
                "log-likelihood: {:.3} -> {:.3} over {} iterations",
                tt.log_likelihoods[0], tt.final_log_likelihood, tt.iterations
            );
            let lex = extract_lexicon(&tt, &s, &t, cfg.min_prob, cfg.min_count)?;
            eprintln!("lexicon entries: {}", lex.len());
            if let Some(p) = table {
                write_json(Some(&p), &tt)?;
            }
            write_text(output.or_else(|| ctx.file.output.clone()).as_deref(), &lex.to_tsv())?;
        }
        Command::Sweep {
            input,
            vary,
            grid,
            replicates,
            scorer,
            scorer_timeout,
            s_rand,
            out_dir,
            theta,
        } => {
            let f = &ctx.file;
            let vary: Vec<Param> = if vary.is_empty() {
                f.vary.clone().unwrap_or_default()
            } else {
                vary
            }
            .into_iter()
            .map(Param::from)
            .collect();
            if vary.is_empty() {
                bail!("missing --vary");
            }
            let grid = if grid.is_empty() {
                f.grid.clone().unwrap_or_default()
            } else {
                grid
            };
            let axis = SweepAxis {
                vary,
                base: ctx.theta(&theta)?,
            };
            let input = ctx.path(input, f.input.as_ref(), "input")?;
            let out_dir = ctx.path(out_dir, f.out_dir.as_ref(), "out-dir")?;
            let corpus = ctx.corpus(&input)?;
            let mut all = axis.base;
            for v in &axis.vary {
                v.set(&mut all, 1.0);
            }
            let resources = ctx.resources(&all)?;
            let scorer_desc = scorer.or_else(|| f.scorer.clone()).unwrap_or_else(|| "overlap".into());
            let timeout = Duration::from_secs(scorer_timeout.or(f.scorer_timeout).unwrap_or(3600));
            let mut scorer = build_scorer(&scorer_desc, &corpus, &out_dir, timeout)?;
            ctx.announce_seed();
            let result = stabilized_sweep(
                &corpus,
                &axis,
                &grid,
                replicates.or(f.replicates).unwrap_or(1),
                &resources,
                scorer.as_mut(),
                s_rand.or(f.s_rand).unwrap_or(0.0),
                ctx.seed,
            )?;
            write_sweep(&out_dir, &result)?;
            eprintln!(
                "{} points written to {}, {} failed",
                result.points.len(),
                out_dir.display(),
                result.failures.len()
            );
            for fail in &result.failures {
                eprintln!(
                    "failed: theta {} replicate {}: {}",
                    fail.theta, fail.replicate, fail.error
                );
            }
            let trend = fit_trend(&result.points, result.noiser)?;
            eprintln!("trend: PD = {:.3} * theta + {:.3}", trend.slope, trend.intercept);
            write_json(Some(&out_dir.join("trend.json")), &trend)?;
        }
        Command::PseudoCrl {
            posteriors,
            input,
            output,
            manifest,
        } => {
            let text = std::fs::read_to_string(&posteriors)
                .with_context(|| format!("reading {}", posteriors.display()))?;
            let estimate = ThetaEstimate::from_json(&text)
                .with_context(|| format!("parsing posteriors {}", posteriors.display()))?;
            let input = ctx.path(input, ctx.file.input.as_ref(), "input")?;
            let corpus = ctx.corpus(&input)?;
            let resources = ctx.resources(&estimate.params()?)?;
            ctx.announce_seed();
            let (out, m) = pseudo_crl(&corpus, &estimate, &resources, ctx.seed)?;
            report_manifest(&m);
            write_output_corpus(output.or_else(|| ctx.file.output.clone()).as_deref(), &out)?;
            write_manifest(manifest.or_else(|| ctx.file.manifest.clone()).as_deref(), &m)?;
        }
        Command::Compare {
            lexical,
            morphological,
            composite,
            output,
        } => {
            let load = |p: &Path| -> Result<TrendModel> {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing trend {}", p.display()))
            };
            let report = compare_composite(&load(&lexical)?, &load(&morphological)?, &load(&composite)?)?;
            write_json(output.as_deref(), &report)?;
        }
        Command::SdTable { entries, output } => {
            let mut rows: Vec<(String, Vec<(String, f64)>)> = Vec::new();
            for e in &entries {
                let Some((key, path)) = e.split_once('=') else {
                    bail!("entry {e:?} is not task:label=summary.csv");
                };
                let Some((task, label)) = key.split_once(':') else {
                    bail!("entry {e:?} is not task:label=summary.csv");
                };
                let sd = mean_sd(Path::new(path))?;
                match rows.iter_mut().find(|(t, _)| t == task) {
                    Some((_, cells)) => cells.push((label.to_owned(), sd)),
                    None => rows.push((task.to_owned(), vec![(label.to_owned(), sd)])),
                }
            }
            write_text(output.as_deref(), &sd_table(&rows)?)?;
        }
    }
    Ok(())
}

/// Average of the per-theta SD column of a sweep summary.
fn mean_sd(path: &Path) -> Result<f64> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut sds = Vec::new();
    for row in r.records() {
        let row = row?;
        if let Some(v) = row.get(2).filter(|s| !s.is_empty()) {
            sds.push(
                v.parse::<f64>()
                    .with_context(|| format!("bad sd {v:?} in {}", path.display()))?,
            );
        }
    }
    if sds.is_empty() {
        bail!(
            "{} has no standard deviations; run the sweep with at least two replicates",
            path.display()
        );
    }
    Ok(sds.iter().sum::<f64>() / sds.len() as f64)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
