//! Evaluation metrics: transitivity preservation, prediction F1 and rank
//! correlation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bradley_terry::bt_probability;
use crate::dataset::Dataset;
use crate::elo::elo_expected;
use crate::error::{Error, Result};
use crate::glicko::glicko_expected;
use crate::types::{Algorithm, CompetitorId, RankingResult};

/// Ordered trio where `i` majority-beats `j` and `j` majority-beats `k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub i: CompetitorId,
    pub j: CompetitorId,
    pub k: CompetitorId,
}

/// `a` strictly out-wins `b` head to head. Ties count for neither side.
fn majority(d: &Dataset, a: usize, b: usize) -> bool {
    let t = d.tally(a, b);
    t.wins > t.losses
}

pub fn enumerate_triples(d: &Dataset) -> Vec<Triple> {
    let n = d.n_competitors();
    let beats: Vec<Vec<usize>> =
        (0..n).map(|a| (0..n).filter(|&b| b != a && majority(d, a, b)).collect()).collect();
    let roster = d.roster();
    let mut out = Vec::new();
    for i in 0..n {
        for &j in &beats[i] {
            for &k in &beats[j] {
                if k != i {
                    out.push(Triple { i: roster[i].clone(), j: roster[j].clone(), k: roster[k].clone() });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transitivity {
    pub triples: usize,
    pub preserved: usize,
}

impl Transitivity {
    /// Preserved fraction; `None` when the dataset yields no triples.
    pub fn score(&self) -> Option<f64> {
        (self.triples > 0).then(|| self.preserved as f64 / self.triples as f64)
    }
}

pub fn transitivity(d: &Dataset, r: &RankingResult) -> Result<Transitivity> {
    let ranks = r.rank_map();
    if let Some(missing) = d.roster().iter().find(|id| !ranks.contains_key(id)) {
        return Err(Error::UnknownCompetitor(missing.clone()));
    }
    let triples = enumerate_triples(d);
    let preserved = triples.iter().filter(|t| ranks[&t.i] < ranks[&t.j] && ranks[&t.j] < ranks[&t.k]).count();
    Ok(Transitivity { triples: triples.len(), preserved })
}

/// Fraction of majority triples the ranking orders correctly, or `None` if
/// there are no triples.
pub fn transitivity_score(d: &Dataset, r: &RankingResult) -> Result<Option<f64>> {
    transitivity(d, r).map(|t| t.score())
}

/// Win probability of `i` over `j` under the model that produced `r`.
pub fn probability_from_result(r: &RankingResult, i: &CompetitorId, j: &CompetitorId) -> Result<f64> {
    // Evaluate in canonical id order so p(i, j) and p(j, i) are exact complements.
    if i > j {
        return probability_from_result(r, j, i).map(|p| 1.0 - p);
    }
    let (ri, rj) = (r.rating(i)?, r.rating(j)?);
    Ok(match r.algorithm {
        Algorithm::Elo => elo_expected(ri.theta, rj.theta),
        Algorithm::Glicko => glicko_expected(ri.theta, rj.theta, rj.sigma_or_zero()),
        Algorithm::BradleyTerry => bt_probability(ri.theta, rj.theta),
        Algorithm::Markov | Algorithm::WinRate => {
            let total = ri.theta + rj.theta;
            if total == 0.0 {
                0.5
            } else {
                ri.theta / total
            }
        }
    })
}

/// Precision, recall and F1 of one directed prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Scores `expected` predicted wins against `actual` wins, reading the
/// overlap as `min(expected, actual)`. Both zero scores 1; a single zero
/// denominator makes that ratio 0.
pub fn count_prf(expected: u64, actual: u64) -> Prf {
    if expected == 0 && actual == 0 {
        return Prf { precision: 1.0, recall: 1.0, f1: 1.0 };
    }
    let overlap = expected.min(actual) as f64;
    let ratio = |den: u64| if den == 0 { 0.0 } else { overlap / den as f64 };
    let (precision, recall) = (ratio(expected), ratio(actual));
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Prf { precision, recall, f1 }
}

/// Evaluation of one unordered test pair, from both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairF1 {
    pub i: CompetitorId,
    pub j: CompetitorId,
    pub matches: u64,
    /// Model probability that `i` beats `j`.
    pub p_ij: f64,
    pub expected_i: u64,
    pub actual_i: u64,
    pub expected_j: u64,
    pub actual_j: u64,
    pub from_i: Prf,
    pub from_j: Prf,
    /// Mean of the two directed F1 scores.
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    /// Mean precision, recall and F1 over each competitor's test pairs, scored from its side.
    pub per_competitor: BTreeMap<CompetitorId, Prf>,
    /// Mean of the per-pair F1 over all evaluated pairs.
    pub overall_f1: f64,
    pub pairs: Vec<PairF1>,
    /// Test pairs skipped because a competitor is missing from the ranking.
    pub excluded_pairs: usize,
}

/// Predicts each test pair's win counts from `r` and scores them against
/// the observed counts.
///
/// For a pair with `M` matches, `i` is expected to win `floor(M * p_ij)` and
/// actually won `floor(w + t/2)`; `j` symmetrically. The per-pair score is
/// the mean of the two directed F1 values.
pub fn predict_f1(test: &Dataset, r: &RankingResult) -> Result<F1Report> {
    let roster = test.roster();
    let n = roster.len();
    let mut pairs = Vec::new();
    let mut excluded_pairs = 0;
    for a in 0..n {
        for b in (a + 1)..n {
            let tally = test.tally(a, b);
            let m = tally.total();
            if m == 0 {
                continue;
            }
            let (i, j) = (&roster[a], &roster[b]);
            if !r.ratings.contains_key(i) || !r.ratings.contains_key(j) {
                excluded_pairs += 1;
                continue;
            }
            let p_ij = probability_from_result(r, i, j)?;
            let p_ji = probability_from_result(r, j, i)?;
            let expected_i = (m as f64 * p_ij).floor() as u64;
            let expected_j = (m as f64 * p_ji).floor() as u64;
            let actual_i = tally.half_credit_wins().floor() as u64;
            let actual_j = tally.half_credit_losses().floor() as u64;
            let from_i = count_prf(expected_i, actual_i);
            let from_j = count_prf(expected_j, actual_j);
            pairs.push(PairF1 {
                i: i.clone(),
                j: j.clone(),
                matches: m,
                p_ij,
                expected_i,
                actual_i,
                expected_j,
                actual_j,
                from_i,
                from_j,
                f1: 0.5 * (from_i.f1 + from_j.f1),
            });
        }
    }
    if pairs.is_empty() {
        return Err(Error::validation("test set has no evaluable pairs"));
    }

    let mut acc: BTreeMap<CompetitorId, (Prf, usize)> = BTreeMap::new();
    for pair in &pairs {
        for (id, prf) in [(&pair.i, pair.from_i), (&pair.j, pair.from_j)] {
            let entry = acc.entry(id.clone()).or_insert((Prf { precision: 0.0, recall: 0.0, f1: 0.0 }, 0));
            entry.0.precision += prf.precision;
            entry.0.recall += prf.recall;
            entry.0.f1 += prf.f1;
            entry.1 += 1;
        }
    }
    let per_competitor = acc
        .into_iter()
        .map(|(id, (sum, count))| {
            let c = count as f64;
            (id, Prf { precision: sum.precision / c, recall: sum.recall / c, f1: sum.f1 / c })
        })
        .collect();
    let overall_f1 = pairs.iter().map(|p| p.f1).sum::<f64>() / pairs.len() as f64;
    Ok(F1Report { per_competitor, overall_f1, pairs, excluded_pairs })
}

/// 1-based ranks with ties sharing the average of the positions they span.
/// Higher values rank first.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman correlation of two score vectors: Pearson correlation of their
/// average ranks. A constant input correlates 1 with an identical ranking
/// and 0 otherwise.
pub fn spearman_scores(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::validation(format!("score vectors differ in length ({} vs {})", a.len(), b.len())));
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = ra.len() as f64;
    if ra == rb {
        return Ok(1.0);
    }
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(if ra == rb { 1.0 } else { 0.0 });
    }
    Ok((cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman correlation between two rankings over the same roster.
pub fn spearman(r1: &RankingResult, r2: &RankingResult) -> Result<f64> {
    if r1.ratings.len() != r2.ratings.len() || r1.ratings.keys().ne(r2.ratings.keys()) {
        return Err(Error::validation("rankings cover different rosters"));
    }
    let a: Vec<f64> = r1.ratings.values().map(|r| r.theta).collect();
    let b: Vec<f64> = r2.ratings.values().map(|r| r.theta).collect();
    spearman_scores(&a, &b)
}
