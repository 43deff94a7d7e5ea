//! Experiment drivers: hyperparameter sweeps, Elo permutation studies and
//! cross-algorithm comparison, all producing serializable reports.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bradley_terry::{bt_fit, BtConfig};
use crate::dataset::{split_dataset, Dataset};
use crate::elo::{elo_rank, EloConfig};
use crate::error::{Error, Result};
use crate::glicko::{glicko_rank, GlickoConfig};
use crate::markov::{markov_rank, MarkovConfig};
use crate::metrics::{predict_f1, spearman, transitivity, Prf};
use crate::report::{fmt6, Table};
use crate::types::{Algorithm, CompetitorId, RankingResult};
use crate::winrate::win_rate_ranking;

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.75;

/// A rating system together with its settings.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmConfig {
    Elo(EloConfig),
    BradleyTerry(BtConfig),
    Glicko(GlickoConfig),
    /// Optional smoothing blends that much of the uniform matrix into the chain.
    Markov(MarkovConfig, Option<f64>),
    WinRate,
}

impl AlgorithmConfig {
    pub fn default_for(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Elo => AlgorithmConfig::Elo(EloConfig::default()),
            Algorithm::BradleyTerry => AlgorithmConfig::BradleyTerry(BtConfig::default()),
            Algorithm::Glicko => AlgorithmConfig::Glicko(GlickoConfig::default()),
            Algorithm::Markov => AlgorithmConfig::Markov(MarkovConfig::default(), None),
            Algorithm::WinRate => AlgorithmConfig::WinRate,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            AlgorithmConfig::Elo(_) => Algorithm::Elo,
            AlgorithmConfig::BradleyTerry(_) => Algorithm::BradleyTerry,
            AlgorithmConfig::Glicko(_) => Algorithm::Glicko,
            AlgorithmConfig::Markov(..) => Algorithm::Markov,
            AlgorithmConfig::WinRate => Algorithm::WinRate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AlgorithmConfig::Elo(c) => c.validate(),
            AlgorithmConfig::BradleyTerry(c) => c.validate(),
            AlgorithmConfig::Glicko(c) => c.validate(),
            AlgorithmConfig::Markov(c, smoothing) => {
                c.validate()?;
                match smoothing {
                    Some(eps) if !(0.0..1.0).contains(eps) => {
                        Err(Error::validation(format!("smoothing must lie in [0, 1), got {eps}")))
                    }
                    _ => Ok(()),
                }
            }
            AlgorithmConfig::WinRate => Ok(()),
        }
    }

    pub fn fit(&self, d: &Dataset) -> Result<RankingResult> {
        match self {
            AlgorithmConfig::Elo(c) => elo_rank(d, c),
            AlgorithmConfig::BradleyTerry(c) => bt_fit(d, c),
            AlgorithmConfig::Glicko(c) => glicko_rank(d, c),
            AlgorithmConfig::Markov(c, smoothing) => markov_rank(d, c, *smoothing),
            AlgorithmConfig::WinRate => Ok(win_rate_ranking(d)),
        }
    }

    /// Names accepted by [`AlgorithmConfig::with_parameter`].
    pub fn parameters(&self) -> &'static [&'static str] {
        match self {
            AlgorithmConfig::Elo(_) => &["k", "initial_rating", "permutations"],
            AlgorithmConfig::BradleyTerry(_) => &["regularization", "tolerance", "max_iters"],
            AlgorithmConfig::Glicko(_) => &["initial_rd", "initial_rating", "min_rd"],
            AlgorithmConfig::Markov(..) => &["p", "smoothing"],
            AlgorithmConfig::WinRate => &[],
        }
    }

    /// Copy with one named hyperparameter replaced, validated.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let mut out = self.clone();
        let unknown = || {
            Error::validation(format!(
                "{} has no sweepable parameter `{name}` (available: {})",
                self.algorithm(),
                self.parameters().join(", ")
            ))
        };
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::validation(format!("`{name}` must be a non-negative integer, got {v}")))
            }
        };
        match &mut out {
            AlgorithmConfig::Elo(c) => match name {
                "k" => c.k = value,
                "initial_rating" => c.initial_rating = value,
                "permutations" => c.permutations = count(value)?,
                _ => return Err(unknown()),
            },
            AlgorithmConfig::BradleyTerry(c) => match name {
                "regularization" => c.regularization = value,
                "tolerance" => c.tolerance = value,
                "max_iters" => c.max_iters = count(value)?,
                _ => return Err(unknown()),
            },
            AlgorithmConfig::Glicko(c) => match name {
                "initial_rd" => {
                    c.initial_rd = value;
                    c.min_rd = c.min_rd.min(value);
                }
                "initial_rating" => c.initial_rating = value,
                "min_rd" => c.min_rd = value,
                _ => return Err(unknown()),
            },
            AlgorithmConfig::Markov(c, smoothing) => match name {
                "p" => c.p = value,
                "smoothing" => *smoothing = Some(value),
                _ => return Err(unknown()),
            },
            AlgorithmConfig::WinRate => return Err(unknown()),
        }
        out.validate()?;
        Ok(out)
    }

    /// Reseeds the algorithm's internal randomness, if it has any.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            AlgorithmConfig::Elo(c) => AlgorithmConfig::Elo(EloConfig { seed, ..c.clone() }),
            other => other.clone(),
        }
    }
}

/// Values to sweep: an explicit list or an inclusive linear grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepValues {
    List(Vec<f64>),
    Grid { min: f64, max: f64, count: usize },
}

impl SweepValues {
    pub fn points(&self) -> Vec<f64> {
        match self {
            SweepValues::List(v) => v.clone(),
            SweepValues::Grid { min, max, count } => match count {
                0 => Vec::new(),
                1 => vec![*min],
                _ => (0..*count).map(|i| min + (max - min) * i as f64 / (*count - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Settings for every parameter not being swept.
    pub base: AlgorithmConfig,
    pub parameter: String,
    pub values: SweepValues,
    pub repeats: usize,
    pub split_seed: u64,
    pub train_fraction: f64,
}

impl SweepSpec {
    /// The standard 100-point sweep for an algorithm's main knob: Elo `k`
    /// over [1, 100], Markov `p` over [0.51, 0.99], Glicko `initial_rd` over
    /// [30, 350].
    pub fn default_for(algorithm: Algorithm, split_seed: u64) -> Result<Self> {
        let (parameter, min, max) = match algorithm {
            Algorithm::Elo => ("k", 1.0, 100.0),
            Algorithm::Markov => ("p", 0.51, 0.99),
            Algorithm::Glicko => ("initial_rd", 30.0, 350.0),
            other => return Err(Error::validation(format!("no default sweep for {other}"))),
        };
        Ok(Self {
            base: AlgorithmConfig::default_for(algorithm),
            parameter: parameter.to_owned(),
            values: SweepValues::Grid { min, max, count: 100 },
            repeats: 1,
            split_seed,
            train_fraction: DEFAULT_TRAIN_FRACTION,
        })
    }

    pub fn validate(&self) -> Result<Vec<AlgorithmConfig>> {
        if self.repeats == 0 {
            return Err(Error::validation("sweep repeats must be at least 1"));
        }
        if let SweepValues::Grid { min, max, count } = self.values {
            if count == 0 {
                return Err(Error::validation("sweep grid count must be at least 1"));
            }
            if min > max {
                return Err(Error::validation(format!("sweep grid min {min} exceeds max {max}")));
            }
        }
        let points = self.values.points();
        if points.is_empty() {
            return Err(Error::validation("sweep has no values"));
        }
        points.iter().map(|&v| self.base.with_parameter(&self.parameter, v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub repeat: usize,
    pub overall_f1: Option<f64>,
    pub competitor_f1_mean: Option<f64>,
    pub competitor_f1_min: Option<f64>,
    pub competitor_f1_max: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub algorithm: Algorithm,
    pub parameter: String,
    pub split_seed: u64,
    pub points: Vec<SweepPoint>,
    /// Population standard deviation of overall F1 over successful points.
    pub dispersion: f64,
    pub mean_f1: Option<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fits the algorithm at every sweep value on one shared train split and
/// scores each fit by prediction F1 on the held-out matches.
pub fn run_sweep(d: &Dataset, spec: &SweepSpec) -> Result<SweepReport> {
    let configs = spec.validate()?;
    let (train, test) = split_dataset(d, spec.train_fraction, spec.split_seed)?;
    let values = spec.values.points();
    let jobs: Vec<(usize, usize)> =
        (0..configs.len()).flat_map(|i| (0..spec.repeats).map(move |r| (i, r))).collect();

    let points: Vec<SweepPoint> = jobs
        .into_par_iter()
        .enumerate()
        .map(|(index, (vi, repeat))| {
            let cfg = configs[vi].with_seed(spec.split_seed.wrapping_add(repeat as u64));
            let mut point = SweepPoint {
                index,
                value: values[vi],
                repeat,
                overall_f1: None,
                competitor_f1_mean: None,
                competitor_f1_min: None,
                competitor_f1_max: None,
                error: None,
            };
            match cfg.fit(&train).and_then(|r| predict_f1(&test, &r)) {
                Ok(f1) => {
                    let per: Vec<f64> = f1.per_competitor.values().map(|p| p.f1).collect();
                    point.overall_f1 = Some(f1.overall_f1);
                    point.competitor_f1_mean = Some(mean_std(&per).0);
                    point.competitor_f1_min = per.iter().copied().reduce(f64::min);
                    point.competitor_f1_max = per.iter().copied().reduce(f64::max);
                }
                Err(e) => point.error = Some(e.to_string()),
            }
            point
        })
        .collect();

    let f1s: Vec<f64> = points.iter().filter_map(|p| p.overall_f1).collect();
    let (mean, dispersion) = mean_std(&f1s);
    Ok(SweepReport {
        algorithm: spec.base.algorithm(),
        parameter: spec.parameter.clone(),
        split_seed: spec.split_seed,
        points,
        dispersion,
        mean_f1: (!f1s.is_empty()).then_some(mean),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationEntry {
    pub competitor: CompetitorId,
    /// Mean theta over the passes.
    pub mean: f64,
    /// Standard deviation of theta across individual passes.
    pub spread: f64,
    /// Standard deviation of the reported mean, `spread / sqrt(P)`.
    pub std: f64,
    /// 1-based position in the cell's ranking.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationCell {
    pub k: f64,
    pub permutations: usize,
    pub entries: Vec<PermutationEntry>,
}

impl PermutationCell {
    pub fn mean_std(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().map(|e| e.std).sum::<f64>() / self.entries.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationReport {
    pub seed: u64,
    pub cells: Vec<PermutationCell>,
    /// True when a competitor's rank differs between two cells sharing a k.
    pub unstable: BTreeMap<CompetitorId, bool>,
}

/// Elo over every `(k, P)` cell. All cells share `seed`, so a larger P
/// extends the passes of a smaller one.
pub fn run_permutation_study(
    d: &Dataset,
    k_values: &[f64],
    permutation_counts: &[usize],
    seed: u64,
) -> Result<PermutationReport> {
    if k_values.is_empty() || permutation_counts.is_empty() {
        return Err(Error::validation("permutation study needs at least one k and one permutation count"));
    }
    let jobs: Vec<(f64, usize)> =
        k_values.iter().flat_map(|&k| permutation_counts.iter().map(move |&p| (k, p))).collect();
    let cells: Vec<PermutationCell> = jobs
        .iter()
        .map(|&(k, permutations)| {
            let cfg = EloConfig { k, permutations, seed, ..EloConfig::default() };
            let r = elo_rank(d, &cfg)?;
            let ranks = r.rank_map();
            let entries = d
                .roster()
                .iter()
                .map(|id| {
                    let spread = r.metadata.rating_std.get(id).copied().unwrap_or(0.0);
                    PermutationEntry {
                        competitor: id.clone(),
                        mean: r.ratings[id].theta,
                        spread,
                        std: spread / (permutations.max(1) as f64).sqrt(),
                        rank: ranks[id] + 1,
                    }
                })
                .collect();
            Ok(PermutationCell { k, permutations, entries })
        })
        .collect::<Result<_>>()?;

    let mut unstable: BTreeMap<CompetitorId, bool> = d.roster().iter().map(|id| (id.clone(), false)).collect();
    for (a, ca) in cells.iter().enumerate() {
        for cb in &cells[a + 1..] {
            if ca.k != cb.k {
                continue;
            }
            for (ea, eb) in ca.entries.iter().zip(&cb.entries) {
                if ea.rank != eb.rank {
                    unstable.insert(ea.competitor.clone(), true);
                }
            }
        }
    }
    Ok(PermutationReport { seed, cells, unstable })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitivityRow {
    pub algorithm: Algorithm,
    pub triples: usize,
    pub preserved: usize,
    /// Absent when the dataset has no majority triples.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Row {
    pub algorithm: Algorithm,
    pub overall_f1: f64,
    pub per_competitor: BTreeMap<CompetitorId, Prf>,
    pub excluded_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<Algorithm>,
    /// Row-major Spearman values; `None` where either fit failed.
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: Algorithm, b: Algorithm) -> Option<f64> {
        let i = self.labels.iter().position(|&x| x == a)?;
        let j = self.labels.iter().position(|&x| x == b)?;
        self.values[i][j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmFailure {
    pub algorithm: Algorithm,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub split_seed: u64,
    pub train_fraction: f64,
    pub transitivity: Vec<TransitivityRow>,
    pub f1: Vec<F1Row>,
    pub correlations: CorrelationMatrix,
    pub failures: Vec<AlgorithmFailure>,
}

/// Transitivity and F1 for a single algorithm.
pub fn evaluate_algorithm(
    d: &Dataset,
    cfg: &AlgorithmConfig,
    train_fraction: f64,
    split_seed: u64,
) -> Result<(TransitivityRow, F1Row)> {
    cfg.validate()?;
    let (train, test) = split_dataset(d, train_fraction, split_seed)?;
    let full = cfg.fit(d)?;
    let t = transitivity(d, &full)?;
    let f1 = predict_f1(&test, &cfg.fit(&train)?)?;
    Ok((
        TransitivityRow { algorithm: cfg.algorithm(), triples: t.triples, preserved: t.preserved, score: t.score() },
        F1Row {
            algorithm: cfg.algorithm(),
            overall_f1: f1.overall_f1,
            per_competitor: f1.per_competitor,
            excluded_pairs: f1.excluded_pairs,
        },
    ))
}

/// Runs each algorithm (plus the win-rate baseline) and tabulates
/// transitivity on the full dataset, held-out F1 on a shared split, and
/// pairwise Spearman correlations of the full-dataset rankings.
pub fn compare_algorithms(
    d: &Dataset,
    algorithms: &[AlgorithmConfig],
    train_fraction: f64,
    split_seed: u64,
) -> Result<CompareReport> {
    if algorithms.is_empty() {
        return Err(Error::validation("compare needs at least one algorithm"));
    }
    let mut configs = algorithms.to_vec();
    for (i, c) in configs.iter().enumerate() {
        c.validate()?;
        if configs[..i].iter().any(|o| o.algorithm() == c.algorithm()) {
            return Err(Error::validation(format!("algorithm {} listed twice", c.algorithm())));
        }
    }
    if !configs.iter().any(|c| c.algorithm() == Algorithm::WinRate) {
        configs.push(AlgorithmConfig::WinRate);
    }
    let (train, test) = split_dataset(d, train_fraction, split_seed)?;

    struct Outcome {
        full: Result<RankingResult>,
        heldout: Result<crate::metrics::F1Report>,
    }
    let outcomes: Vec<Outcome> = configs
        .par_iter()
        .map(|c| Outcome { full: c.fit(d), heldout: c.fit(&train).and_then(|r| predict_f1(&test, &r)) })
        .collect();

    let mut failures = Vec::new();
    let mut transitivity_rows = Vec::new();
    let mut f1_rows = Vec::new();
    for (c, o) in configs.iter().zip(&outcomes) {
        let algorithm = c.algorithm();
        let fail = |stage: &str, e: &Error| AlgorithmFailure {
            algorithm,
            stage: stage.to_owned(),
            message: e.to_string(),
        };
        match &o.full {
            Ok(r) => {
                let t = transitivity(d, r)?;
                transitivity_rows.push(TransitivityRow {
                    algorithm,
                    triples: t.triples,
                    preserved: t.preserved,
                    score: t.score(),
                });
            }
            Err(e) => failures.push(fail("full", e)),
        }
        match &o.heldout {
            Ok(f1) => f1_rows.push(F1Row {
                algorithm,
                overall_f1: f1.overall_f1,
                per_competitor: f1.per_competitor.clone(),
                excluded_pairs: f1.excluded_pairs,
            }),
            Err(e) => failures.push(fail("train", e)),
        }
    }

    let labels: Vec<Algorithm> = configs.iter().map(|c| c.algorithm()).collect();
    let mut values = vec![vec![None; labels.len()]; labels.len()];
    for a in 0..labels.len() {
        for b in 0..labels.len() {
            if let (Ok(ra), Ok(rb)) = (&outcomes[a].full, &outcomes[b].full) {
                values[a][b] = Some(if a == b { 1.0 } else { spearman(ra, rb)? });
            }
        }
    }

    Ok(CompareReport {
        split_seed,
        train_fraction,
        transitivity: transitivity_rows,
        f1: f1_rows,
        correlations: CorrelationMatrix { labels, values },
        failures,
    })
}

/// Top-level report document. Sections an experiment does not produce are null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub meta: BTreeMap<String, serde_json::Value>,
    pub transitivity: Option<Vec<TransitivityRow>>,
    pub f1: Option<Vec<F1Row>>,
    pub correlations: Option<CorrelationMatrix>,
    pub sweep: Option<SweepReport>,
    pub permutation: Option<PermutationReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<AlgorithmFailure>,
}

impl ExperimentReport {
    pub fn new(meta: BTreeMap<String, serde_json::Value>) -> Self {
        Self {
            meta,
            transitivity: None,
            f1: None,
            correlations: None,
            sweep: None,
            permutation: None,
            failures: Vec::new(),
        }
    }

    pub fn with_compare(mut self, c: CompareReport) -> Self {
        self.transitivity = Some(c.transitivity);
        self.f1 = Some(c.f1);
        self.correlations = Some(c.correlations);
        self.failures = c.failures;
        self
    }

    /// Flat tables for the companion CSV files, one per populated section.
    pub fn tables(&self) -> Vec<Table> {
        let opt = |x: Option<f64>| x.map(fmt6).unwrap_or_default();
        let mut out = Vec::new();
        if let Some(rows) = &self.transitivity {
            let mut t = Table::new("transitivity", &["algorithm", "triples", "preserved", "score"]);
            for r in rows {
                t.push(vec![r.algorithm.to_string(), r.triples.to_string(), r.preserved.to_string(), opt(r.score)]);
            }
            out.push(t);
        }
        if let Some(rows) = &self.f1 {
            let mut t = Table::new("f1", &["algorithm", "competitor", "precision", "recall", "f1"]);
            for r in rows {
                t.push(vec![r.algorithm.to_string(), "overall".into(), String::new(), String::new(), fmt6(r.overall_f1)]);
                for (id, p) in &r.per_competitor {
                    t.push(vec![r.algorithm.to_string(), id.to_string(), fmt6(p.precision), fmt6(p.recall), fmt6(p.f1)]);
                }
            }
            out.push(t);
        }
        if let Some(m) = &self.correlations {
            let header: Vec<String> =
                std::iter::once("algorithm".to_owned()).chain(m.labels.iter().map(|a| a.to_string())).collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut t = Table::new("correlations", &header);
            for (label, row) in m.labels.iter().zip(&m.values) {
                t.push(std::iter::once(label.to_string()).chain(row.iter().map(|v| opt(*v))).collect());
            }
            out.push(t);
        }
        if let Some(s) = &self.sweep {
            let mut t = Table::new("sweep", &["index", "value", "repeat", "overall_f1", "error"]);
            for p in &s.points {
                t.push(vec![
                    p.index.to_string(),
                    fmt6(p.value),
                    p.repeat.to_string(),
                    opt(p.overall_f1),
                    p.error.clone().unwrap_or_default(),
                ]);
            }
            out.push(t);
        }
        if let Some(p) = &self.permutation {
            let mut t =
                Table::new("permutation", &["k", "permutations", "competitor", "mean", "spread", "std", "rank"]);
            for c in &p.cells {
                for e in &c.entries {
                    t.push(vec![
                        fmt6(c.k),
                        c.permutations.to_string(),
                        e.competitor.to_string(),
                        fmt6(e.mean),
                        fmt6(e.spread),
                        fmt6(e.std),
                        e.rank.to_string(),
                    ]);
                }
            }
            out.push(t);
        }
        out
    }
}
