//! Bradley-Terry strengths by maximum likelihood.
//!
//! Fitting uses the minorization-maximization fixed point
//! `s_i <- W_i / sum_j n_ij / (s_i + s_j)` on positive strengths `s = exp(theta)`,
//! re-centred after every sweep so the logits sum to zero. Ties count as half
//! a win for each side, and every ordered pair receives `regularization`
//! pseudo-wins so undefeated competitors stay finite.

use std::collections::BTreeMap;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::types::{Algorithm, CompetitorId, RankingMetadata, RankingResult, Rating};

#[derive(Debug, Clone, PartialEq)]
pub struct BtConfig {
    pub max_iters: usize,
    /// Stop once the largest per-sweep logit change falls below this.
    pub tolerance: f64,
    /// Scale each pair by the inverse of its match count (weights average 1).
    pub weighted: bool,
    /// Pseudo-count added to every ordered pair's win total.
    pub regularization: f64,
}

impl Default for BtConfig {
    fn default() -> Self {
        Self { max_iters: 1000, tolerance: 1e-8, weighted: false, regularization: 1e-6 }
    }
}

impl BtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::validation("bradley-terry max_iters must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::validation(format!("bradley-terry tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(Error::validation(format!(
                "bradley-terry regularization must be non-negative, got {}",
                self.regularization
            )));
        }
        Ok(())
    }
}

/// Logistic win probability for logits `theta_i`, `theta_j`.
pub fn bt_probability(theta_i: f64, theta_j: f64) -> f64 {
    1.0 / (1.0 + (-(theta_i - theta_j)).exp())
}

/// `sum_{i != j} y_ij * ln p_ij` with `y_ij = w_ij + t_ij / 2`.
pub fn bt_log_likelihood(d: &Dataset, thetas: &BTreeMap<CompetitorId, f64>) -> Result<f64> {
    let theta = thetas_by_index(d, thetas)?;
    let y = half_credit_matrix(d);
    Ok(log_likelihood(&y, &theta))
}

/// Analytic gradient of [`bt_log_likelihood`]: `sum_j [y_ij - (y_ij + y_ji) p_ij]`.
pub fn bt_gradient(d: &Dataset, thetas: &BTreeMap<CompetitorId, f64>) -> Result<BTreeMap<CompetitorId, f64>> {
    let theta = thetas_by_index(d, thetas)?;
    let y = half_credit_matrix(d);
    Ok(d.roster().iter().cloned().zip(gradient(&y, &theta)).collect())
}

fn thetas_by_index(d: &Dataset, thetas: &BTreeMap<CompetitorId, f64>) -> Result<Vec<f64>> {
    d.roster()
        .iter()
        .map(|id| thetas.get(id).copied().ok_or_else(|| Error::UnknownCompetitor(id.clone())))
        .collect()
}

/// Dense `n x n` matrix, row-major.
#[derive(Debug, Clone)]
struct Square {
    n: usize,
    data: Vec<f64>,
}

impl Square {
    fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }
}

fn half_credit_matrix(d: &Dataset) -> Square {
    let n = d.n_competitors();
    let mut y = Square::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                y.set(i, j, d.tally(i, j).half_credit_wins());
            }
        }
    }
    y
}

fn log_likelihood(y: &Square, theta: &[f64]) -> f64 {
    let mut ll = 0.0;
    for i in 0..y.n {
        for j in 0..y.n {
            let yij = y.get(i, j);
            if i != j && yij > 0.0 {
                ll += yij * bt_probability(theta[i], theta[j]).ln();
            }
        }
    }
    ll
}

fn gradient(y: &Square, theta: &[f64]) -> Vec<f64> {
    (0..y.n)
        .map(|i| {
            (0..y.n)
                .filter(|&j| j != i)
                .map(|j| {
                    let (yij, yji) = (y.get(i, j), y.get(j, i));
                    yij - (yij + yji) * bt_probability(theta[i], theta[j])
                })
                .sum()
        })
        .collect()
}

/// Effective win counts the optimizer sees: weighted data plus pseudo-counts.
fn objective_counts(d: &Dataset, cfg: &BtConfig, players: &[usize]) -> Square {
    let m = players.len();
    let mut y = Square::zeros(m);
    let mut weights = Square::zeros(m);
    if cfg.weighted {
        let mut sum = 0.0;
        let mut count = 0usize;
        for a in 0..m {
            for b in (a + 1)..m {
                let total = d.tally(players[a], players[b]).total();
                if total > 0 {
                    sum += 1.0 / total as f64;
                    count += 1;
                }
            }
        }
        let mean = if count > 0 { sum / count as f64 } else { 1.0 };
        for a in 0..m {
            for b in 0..m {
                let total = d.tally(players[a], players[b]).total();
                weights.set(a, b, if a != b && total > 0 { (1.0 / total as f64) / mean } else { 1.0 });
            }
        }
    }
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            let w = if cfg.weighted { weights.get(a, b) } else { 1.0 };
            y.set(a, b, w * d.tally(players[a], players[b]).half_credit_wins() + cfg.regularization);
        }
    }
    y
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

fn center(theta: &mut [f64]) {
    if theta.is_empty() {
        return;
    }
    let mean = theta.iter().sum::<f64>() / theta.len() as f64;
    theta.iter_mut().for_each(|t| *t -= mean);
}

/// Fits from all-zero logits.
pub fn bt_fit(d: &Dataset, cfg: &BtConfig) -> Result<RankingResult> {
    bt_fit_with_init(d, cfg, &vec![0.0; d.n_competitors()])
}

/// Fits from the given starting logits (indexed like `d.roster()`).
pub fn bt_fit_with_init(d: &Dataset, cfg: &BtConfig, init: &[f64]) -> Result<RankingResult> {
    cfg.validate()?;
    if init.len() != d.n_competitors() || init.iter().any(|t| !t.is_finite()) {
        return Err(Error::validation("initial logits must be finite and cover the roster"));
    }
    let unrated = d.unplayed();
    let players: Vec<usize> = (0..d.n_competitors()).filter(|&i| d.totals(i).played() > 0).collect();
    let y = objective_counts(d, cfg, &players);
    let m = players.len();

    let mut theta: Vec<f64> = players.iter().map(|&i| init[i]).collect();
    center(&mut theta);

    let best_of = |theta: &[f64]| -> Vec<(CompetitorId, f64)> {
        let mut full = vec![0.0; d.n_competitors()];
        for (a, &i) in players.iter().enumerate() {
            full[i] = theta[a];
        }
        d.roster().iter().cloned().zip(full).collect()
    };

    let wins: Vec<f64> = (0..m).map(|a| (0..m).filter(|&b| b != a).map(|b| y.get(a, b)).sum()).collect();
    let losses: Vec<f64> = (0..m).map(|a| (0..m).filter(|&b| b != a).map(|b| y.get(b, a)).sum()).collect();
    if wins.iter().chain(&losses).any(|&w| w <= 0.0) {
        // A competitor without wins (or without losses) has no finite maximizer.
        return Err(Error::BtNonConvergence {
            iterations: 0,
            last_change: f64::INFINITY,
            gradient_norm: max_abs(&gradient(&y, &theta)),
            best: best_of(&theta),
        });
    }

    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    let mut strength: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
    while iterations < cfg.max_iters {
        iterations += 1;
        for a in 0..m {
            let denom: f64 = (0..m)
                .filter(|&b| b != a)
                .map(|b| (y.get(a, b) + y.get(b, a)) / (strength[a] + strength[b]))
                .sum();
            strength[a] = wins[a] / denom;
        }
        let mut next: Vec<f64> = strength.iter().map(|s| s.ln()).collect();
        center(&mut next);
        last_change = theta.iter().zip(&next).fold(0.0f64, |acc, (o, n)| acc.max((o - n).abs()));
        theta = next;
        strength = theta.iter().map(|t| t.exp()).collect();
        if !last_change.is_finite() {
            break;
        }
        if last_change < cfg.tolerance {
            break;
        }
    }

    let gradient_norm = max_abs(&gradient(&y, &theta));
    if !(last_change < cfg.tolerance) {
        return Err(Error::BtNonConvergence { iterations, last_change, gradient_norm, best: best_of(&theta) });
    }

    let ratings = best_of(&theta).into_iter().map(|(id, t)| (id, Rating::new(t))).collect();
    let mut hp = BTreeMap::new();
    hp.insert("max_iters".to_owned(), cfg.max_iters as f64);
    hp.insert("tolerance".to_owned(), cfg.tolerance);
    hp.insert("weighted".to_owned(), if cfg.weighted { 1.0 } else { 0.0 });
    hp.insert("regularization".to_owned(), cfg.regularization);
    let metadata = RankingMetadata {
        unrated,
        iterations: Some(iterations),
        gradient_norm: Some(gradient_norm),
        ..Default::default()
    };
    Ok(RankingResult::new(Algorithm::BradleyTerry, ratings, hp, None).with_metadata(metadata))
}
