//! Performance degradation, trend fitting and score sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::compose::{compose, Resources, ThetaParams};
use crate::corpus_io::{write_corpus, Corpus};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Stream};

/// Percentage drop from the clean score `b` towards the random baseline
/// `s_rand`. Positive means degradation; 100 means random performance.
pub fn pd(s_theta: f64, b: f64, s_rand: f64) -> Result<f64> {
    if b == s_rand {
        return Err(Error::UndefinedPd(b));
    }
    Ok(100.0 * (b - s_theta) / (b - s_rand))
}

/// A noise parameter that a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    P,
    M,
    F,
    C,
}

impl Param {
    pub fn get(self, t: &ThetaParams) -> f64 {
        match self {
            Param::P => t.theta_p,
            Param::M => t.theta_m,
            Param::F => t.theta_f,
            Param::C => t.theta_c,
        }
    }

    pub fn set(self, t: &mut ThetaParams, v: f64) {
        match self {
            Param::P => t.theta_p = v,
            Param::M => t.theta_m = v,
            Param::F => t.theta_f = v,
            Param::C => t.theta_c = v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiserLabel {
    P,
    M,
    F,
    C,
    Composite,
}

impl NoiserLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiserLabel::P => "p",
            NoiserLabel::M => "m",
            NoiserLabel::F => "f",
            NoiserLabel::C => "c",
            NoiserLabel::Composite => "composite",
        }
    }

    /// The x coordinate of a point in this noiser's trend. A composite point
    /// uses its largest parameter.
    pub fn theta_of(self, t: &ThetaParams) -> f64 {
        match self {
            NoiserLabel::P => t.theta_p,
            NoiserLabel::M => t.theta_m,
            NoiserLabel::F => t.theta_f,
            NoiserLabel::C => t.theta_c,
            NoiserLabel::Composite => t.theta_p.max(t.theta_m).max(t.theta_f).max(t.theta_c),
        }
    }
}

impl fmt::Display for NoiserLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiserLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(NoiserLabel::P),
            "m" => Ok(NoiserLabel::M),
            "f" => Ok(NoiserLabel::F),
            "c" => Ok(NoiserLabel::C),
            "composite" => Ok(NoiserLabel::Composite),
            other => Err(Error::InvalidArgument(format!("unknown noiser label {other:?}"))),
        }
    }
}

/// Parameters held fixed at `base` except those in `vary`, which all take the
/// grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub vary: Vec<Param>,
    #[serde(default)]
    pub base: ThetaParams,
}

impl SweepAxis {
    pub fn single(param: Param) -> Self {
        SweepAxis {
            vary: vec![param],
            base: ThetaParams::default(),
        }
    }

    pub fn label(&self) -> NoiserLabel {
        match self.vary.as_slice() {
            [Param::P] => NoiserLabel::P,
            [Param::M] => NoiserLabel::M,
            [Param::F] => NoiserLabel::F,
            [Param::C] => NoiserLabel::C,
            _ => NoiserLabel::Composite,
        }
    }

    pub fn params_at(&self, theta: f64) -> ThetaParams {
        let mut p = self.base;
        for v in &self.vary {
            v.set(&mut p, theta);
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorePoint {
    pub noiser: NoiserLabel,
    pub theta_p: f64,
    pub theta_m: f64,
    pub theta_f: f64,
    pub theta_c: f64,
    pub replicate: u32,
    pub s_theta: f64,
    pub b: f64,
    pub s_rand: f64,
    pub pd: f64,
}

impl ScorePoint {
    pub fn new(
        noiser: NoiserLabel,
        params: ThetaParams,
        replicate: u32,
        s_theta: f64,
        b: f64,
        s_rand: f64,
    ) -> Result<Self> {
        Ok(ScorePoint {
            noiser,
            theta_p: params.theta_p,
            theta_m: params.theta_m,
            theta_f: params.theta_f,
            theta_c: params.theta_c,
            replicate,
            s_theta,
            b,
            s_rand,
            pd: pd(s_theta, b, s_rand)?,
        })
    }

    pub fn params(&self) -> ThetaParams {
        ThetaParams {
            theta_p: self.theta_p,
            theta_m: self.theta_m,
            theta_f: self.theta_f,
            theta_c: self.theta_c,
        }
    }

    pub fn theta(&self) -> f64 {
        self.noiser.theta_of(&self.params())
    }
}

pub fn points_to_csv(points: &[ScorePoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p)?;
    }
    if points.is_empty() {
        w.write_record([
            "noiser",
            "theta_p",
            "theta_m",
            "theta_f",
            "theta_c",
            "replicate",
            "s_theta",
            "b",
            "s_rand",
            "pd",
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Reads score points; a row whose clean score equals its random baseline is
/// rejected.
pub fn points_from_csv(text: &str) -> Result<Vec<ScorePoint>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in r.deserialize() {
        let p: ScorePoint = row?;
        ScorePoint::new(p.noiser, p.params(), p.replicate, p.s_theta, p.b, p.s_rand)?;
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSummary {
    pub theta: f64,
    pub mean_pd: f64,
    /// Sample standard deviation; absent with a single replicate.
    pub sd_pd: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendModel {
    pub noiser: NoiserLabel,
    pub slope: f64,
    pub intercept: f64,
    /// Mean PD minus fitted PD, one per grid value.
    pub residuals: Vec<f64>,
    pub per_theta: Vec<ThetaSummary>,
    pub points: usize,
}

impl TrendModel {
    pub fn predict(&self, theta: f64) -> f64 {
        self.slope * theta + self.intercept
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

/// Grid values are compared after rounding to nine decimals.
fn theta_key(theta: f64) -> i64 {
    (theta * 1e9).round() as i64
}

/// Per-grid-value PD means and sample SDs for one noiser.
pub fn summarize_by_theta(points: &[ScorePoint], noiser: NoiserLabel) -> Vec<ThetaSummary> {
    let mut groups: BTreeMap<i64, (f64, Vec<f64>)> = BTreeMap::new();
    for p in points.iter().filter(|p| p.noiser == noiser) {
        let theta = p.theta();
        groups
            .entry(theta_key(theta))
            .or_insert((theta, Vec::new()))
            .1
            .push(p.pd);
    }
    groups
        .into_values()
        .map(|(theta, pds)| ThetaSummary {
            theta,
            mean_pd: mean(&pds),
            sd_pd: sample_sd(&pds),
            n: pds.len(),
        })
        .collect()
}

/// Averages replicates per grid value, then fits mean PD on theta by
/// ordinary least squares.
pub fn fit_trend(points: &[ScorePoint], noiser: NoiserLabel) -> Result<TrendModel> {
    let per_theta = summarize_by_theta(points, noiser);
    if per_theta.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least two distinct theta values for noiser {noiser}, found {}",
            per_theta.len()
        )));
    }
    let xs: Vec<f64> = per_theta.iter().map(|s| s.theta).collect();
    let ys: Vec<f64> = per_theta.iter().map(|s| s.mean_pd).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    Ok(TrendModel {
        noiser,
        slope,
        intercept,
        residuals,
        per_theta,
        points: points.iter().filter(|p| p.noiser == noiser).count(),
    })
}

/// Per-grid-value summary as CSV: theta, mean_pd, sd_pd, n.
pub fn summary_to_csv(summary: &[ThetaSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theta", "mean_pd", "sd_pd", "n"])?;
    for s in summary {
        w.write_record([
            s.theta.to_string(),
            s.mean_pd.to_string(),
            s.sd_pd.map(|v| v.to_string()).unwrap_or_default(),
            s.n.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// PD standard deviations with one row per task and one column per noiser
/// setting, plus a row average column and a column average row.
pub fn sd_table(rows: &[(String, Vec<(String, f64)>)]) -> Result<String> {
    let mut columns: Vec<String> = Vec::new();
    for (_, cells) in rows {
        for (c, _) in cells {
            if !columns.contains(c) {
                columns.push(c.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["task".to_string()];
    header.extend(columns.iter().cloned());
    header.push("task_avg".into());
    w.write_record(&header)?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.1}")).unwrap_or_default();
    let mut by_column: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    for (task, cells) in rows {
        let mut record = vec![task.clone()];
        let mut present = Vec::new();
        for (i, c) in columns.iter().enumerate() {
            let v = cells.iter().find(|(k, _)| k == c).map(|(_, v)| *v);
            if let Some(v) = v {
                present.push(v);
                by_column[i].push(v);
            }
            record.push(fmt(v));
        }
        record.push(fmt((!present.is_empty()).then(|| mean(&present))));
        w.write_record(&record)?;
    }
    let mut avg = vec!["noiser_avg".to_string()];
    avg.extend(by_column.iter().map(|v| fmt((!v.is_empty()).then(|| mean(v)))));
    avg.push("-".into());
    w.write_record(&avg)?;
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Something that assigns a task score to a corpus.
pub trait Scorer {
    /// `name` identifies the corpus within a sweep and is safe to use in a
    /// file name.
    fn score(&mut self, corpus: &Corpus, name: &str) -> Result<f64>;
}

/// 100 times the fraction of tokens identical, position by position, to a
/// reference corpus.
#[derive(Debug, Clone)]
pub struct TokenOverlapScorer {
    reference: Corpus,
}

impl TokenOverlapScorer {
    pub fn new(reference: Corpus) -> Self {
        TokenOverlapScorer { reference }
    }
}

impl Scorer for TokenOverlapScorer {
    fn score(&mut self, corpus: &Corpus, _name: &str) -> Result<f64> {
        let (mut same, mut total) = (0usize, 0usize);
        for (a, b) in self.reference.sentences().iter().zip(corpus.sentences()) {
            total += a.len().max(b.len());
            same += a.iter().zip(b).filter(|(x, y)| x == y).count();
        }
        if total == 0 {
            return Err(Error::Scorer("no tokens to compare".into()));
        }
        Ok(100.0 * same as f64 / total as f64)
    }
}

/// Wraps a closure.
pub struct FnScorer<F>(pub F);

impl<F: FnMut(&Corpus) -> Result<f64>> Scorer for FnScorer<F> {
    fn score(&mut self, corpus: &Corpus, _name: &str) -> Result<f64> {
        (self.0)(corpus)
    }
}

fn parse_score(text: &str, source: &str) -> Result<f64> {
    text.split_whitespace()
        .find_map(|t| t.parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Scorer(format!("{source} produced no number: {:?}", text.trim())))
}

/// Runs `program args.. <corpus path>` and reads the first number it prints.
#[derive(Debug, Clone)]
pub struct CommandScorer {
    pub program: String,
    pub args: Vec<String>,
    pub work_dir: PathBuf,
}

impl Scorer for CommandScorer {
    fn score(&mut self, corpus: &Corpus, name: &str) -> Result<f64> {
        std::fs::create_dir_all(&self.work_dir).map_err(|e| Error::io(&self.work_dir, e))?;
        let path = self.work_dir.join(format!("{name}.txt"));
        write_corpus(&path, corpus)?;
        let out = Command::new(&self.program)
            .args(&self.args)
            .arg(&path)
            .output()
            .map_err(|e| Error::Scorer(format!("cannot run {}: {e}", self.program)))?;
        if !out.status.success() {
            return Err(Error::Scorer(format!(
                "{} exited with {}: {}",
                self.program,
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        parse_score(&String::from_utf8_lossy(&out.stdout), &self.program)
    }
}

/// Writes `<dir>/<name>.txt` and waits for an outside process to write a
/// number to `<dir>/<name>.score`.
#[derive(Debug, Clone)]
pub struct DirectoryScorer {
    pub dir: PathBuf,
    pub timeout: Duration,
    pub poll: Duration,
}

impl DirectoryScorer {
    pub fn new(dir: impl Into<PathBuf>, timeout: Duration) -> Self {
        DirectoryScorer {
            dir: dir.into(),
            timeout,
            poll: Duration::from_millis(100),
        }
    }
}

impl Scorer for DirectoryScorer {
    fn score(&mut self, corpus: &Corpus, name: &str) -> Result<f64> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let score_path = self.dir.join(format!("{name}.score"));
        let _ = std::fs::remove_file(&score_path);
        write_corpus(self.dir.join(format!("{name}.txt")), corpus)?;
        let start = Instant::now();
        loop {
            if let Ok(text) = std::fs::read_to_string(&score_path) {
                if !text.trim().is_empty() {
                    return parse_score(&text, &score_path.display().to_string());
                }
            }
            if start.elapsed() >= self.timeout {
                return Err(Error::Scorer(format!("timed out waiting for {}", score_path.display())));
            }
            std::thread::sleep(self.poll);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub theta: f64,
    pub replicate: u32,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub noiser: NoiserLabel,
    pub b: f64,
    pub s_rand: f64,
    pub points: Vec<ScorePoint>,
    pub failures: Vec<SweepFailure>,
}

impl SweepResult {
    pub fn summary(&self) -> Vec<ThetaSummary> {
        summarize_by_theta(&self.points, self.noiser)
    }
}

/// Seed of one replicate. It does not depend on theta, so each replicate is a
/// single language whose affected units grow along the grid.
pub fn replicate_seed(base_seed: u64, replicate: u32) -> u64 {
    derive_seed(base_seed, Stream::Replicate, &replicate.to_string())
}

/// Scores the clean corpus once, then every (theta, replicate) language.
/// A failed point is recorded and the sweep continues.
#[allow(clippy::too_many_arguments)]
pub fn stabilized_sweep(
    corpus: &Corpus,
    axis: &SweepAxis,
    grid: &[f64],
    replicates: u32,
    resources: &Resources,
    scorer: &mut dyn Scorer,
    s_rand: f64,
    base_seed: u64,
) -> Result<SweepResult> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be at least 1".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("theta grid is empty".into()));
    }
    let b = scorer.score(corpus, "clean")?;
    if b == s_rand {
        return Err(Error::UndefinedPd(b));
    }
    let noiser = axis.label();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for &theta in grid {
        let params = axis.params_at(theta);
        params.validate()?;
        for r in 0..replicates {
            let seed = replicate_seed(base_seed, r);
            let name = format!("{noiser}_{theta}_{r}");
            let outcome = compose(corpus, params, resources, seed)
                .and_then(|(noised, _)| scorer.score(&noised, &name))
                .and_then(|s| ScorePoint::new(noiser, params, r, s, b, s_rand));
            match outcome {
                Ok(p) => points.push(p),
                Err(e) => {
                    log::warn!("sweep point theta={theta} replicate={r} failed: {e}");
                    failures.push(SweepFailure {
                        theta,
                        replicate: r,
                        error: e.to_string(),
                    });
                }
            }
        }
    }
    Ok(SweepResult {
        noiser,
        b,
        s_rand,
        points,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompositeBehaviour {
    Max,
    Additive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeRow {
    pub theta: f64,
    pub composite: f64,
    pub max: f64,
    pub sum: f64,
    pub delta_max: f64,
    pub delta_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeReport {
    pub rows: Vec<CompositeRow>,
    pub tracks: CompositeBehaviour,
    pub mean_abs_delta_max: f64,
    pub mean_abs_delta_sum: f64,
}

/// Compares a composite trend with the max and the sum of its parts, grid
/// value by grid value.
pub fn compare_composite(
    lexical: &TrendModel,
    morphological: &TrendModel,
    composite: &TrendModel,
) -> Result<CompositeReport> {
    let grid = |t: &TrendModel| t.per_theta.iter().map(|s| theta_key(s.theta)).collect::<Vec<_>>();
    if grid(lexical) != grid(composite) || grid(morphological) != grid(composite) {
        return Err(Error::GridMismatch(format!(
            "{} / {} / {} grid values",
            lexical.per_theta.len(),
            morphological.per_theta.len(),
            composite.per_theta.len()
        )));
    }
    let rows: Vec<CompositeRow> = composite
        .per_theta
        .iter()
        .zip(&lexical.per_theta)
        .zip(&morphological.per_theta)
        .map(|((c, l), m)| {
            let max = l.mean_pd.max(m.mean_pd);
            let sum = l.mean_pd + m.mean_pd;
            CompositeRow {
                theta: c.theta,
                composite: c.mean_pd,
                max,
                sum,
                delta_max: c.mean_pd - max,
                delta_sum: c.mean_pd - sum,
            }
        })
        .collect();
    let mad = |f: fn(&CompositeRow) -> f64| mean(&rows.iter().map(|r| f(r).abs()).collect::<Vec<_>>());
    let mean_abs_delta_max = mad(|r| r.delta_max);
    let mean_abs_delta_sum = mad(|r| r.delta_sum);
    Ok(CompositeReport {
        tracks: if mean_abs_delta_max <= mean_abs_delta_sum {
            CompositeBehaviour::Max
        } else {
            CompositeBehaviour::Additive
        },
        rows,
        mean_abs_delta_max,
        mean_abs_delta_sum,
    })
}

/// Writes a sweep's points CSV, per-theta summary CSV and JSON record into
/// `dir`.
pub fn write_sweep(dir: &Path, result: &SweepResult) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let put = |name: &str, text: String| {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    put("points.csv", points_to_csv(&result.points)?)?;
    put("summary.csv", summary_to_csv(&result.summary())?)?;
    put("sweep.json", serde_json::to_string_pretty(result)? + "\n")?;
    Ok(())
}
