//! Sequential Elo ratings.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::types::{Algorithm, RankingMetadata, RankingResult, Rating};

#[derive(Debug, Clone, PartialEq)]
pub struct EloConfig {
    pub k: f64,
    pub initial_rating: f64,
    /// Number of shuffled passes to average; 0 replays the given order once.
    pub permutations: usize,
    pub seed: u64,
}

impl Default for EloConfig {
    fn default() -> Self {
        Self { k: 4.0, initial_rating: 1000.0, permutations: 0, seed: 0 }
    }
}

impl EloConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::validation(format!("elo k must be positive, got {}", self.k)));
        }
        if !self.initial_rating.is_finite() {
            return Err(Error::validation("elo initial rating must be finite"));
        }
        Ok(())
    }
}

/// Probability that a player rated `theta_i` beats one rated `theta_j`.
pub fn elo_expected(theta_i: f64, theta_j: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((theta_j - theta_i) / 400.0))
}

/// New rating of `i` after scoring `score` (1, 0.5 or 0) against `j`.
pub fn elo_update(theta_i: f64, theta_j: f64, score: f64, k: f64) -> f64 {
    theta_i + k * (score - elo_expected(theta_i, theta_j))
}

/// One pass over `order` (indices into `d.matches()`), returning thetas by roster index.
fn single_pass(d: &Dataset, order: impl Iterator<Item = usize>, cfg: &EloConfig) -> Vec<f64> {
    let mut theta = vec![cfg.initial_rating; d.n_competitors()];
    let idx: Vec<(usize, usize, f64)> = d
        .matches()
        .iter()
        .map(|m| {
            let a = d.index_of(&m.first).expect("match competitor in roster");
            let b = d.index_of(&m.second).expect("match competitor in roster");
            (a, b, m.outcome.score())
        })
        .collect();
    for i in order {
        let (a, b, s) = idx[i];
        let (ta, tb) = (theta[a], theta[b]);
        theta[a] = elo_update(ta, tb, s, cfg.k);
        theta[b] = elo_update(tb, ta, 1.0 - s, cfg.k);
    }
    theta
}

/// Deterministic RNG for permutation pass `pass` under `seed`.
pub(crate) fn pass_rng(seed: u64, pass: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pass);
    rng
}

/// Rates every competitor by replaying the matches in sequence order, or by
/// averaging `cfg.permutations` passes over shuffled orders.
pub fn elo_rank(d: &Dataset, cfg: &EloConfig) -> Result<RankingResult> {
    cfg.validate()?;
    let n = d.n_competitors();
    let mut metadata = RankingMetadata { unrated: d.unplayed(), ..Default::default() };

    let thetas = if cfg.permutations == 0 {
        single_pass(d, 0..d.len(), cfg)
    } else {
        let passes: Vec<Vec<f64>> = (0..cfg.permutations)
            .into_par_iter()
            .map(|p| {
                let mut order: Vec<usize> = (0..d.len()).collect();
                order.shuffle(&mut pass_rng(cfg.seed, p as u64));
                single_pass(d, order.into_iter(), cfg)
            })
            .collect();
        let count = passes.len() as f64;
        let mut mean = vec![0.0; n];
        for pass in &passes {
            for (m, t) in mean.iter_mut().zip(pass) {
                *m += t;
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);
        let mut var = vec![0.0; n];
        for pass in &passes {
            for ((v, t), m) in var.iter_mut().zip(pass).zip(&mean) {
                *v += (t - m).powi(2);
            }
        }
        metadata.rating_std = d
            .roster()
            .iter()
            .zip(&var)
            .map(|(id, v)| (id.clone(), (v / count).sqrt()))
            .collect();
        mean
    };

    let ratings = d.roster().iter().cloned().zip(thetas.into_iter().map(Rating::new)).collect();
    let mut hp = BTreeMap::new();
    hp.insert("k".to_owned(), cfg.k);
    hp.insert("initial_rating".to_owned(), cfg.initial_rating);
    hp.insert("permutations".to_owned(), cfg.permutations as f64);
    let seed = (cfg.permutations > 0).then_some(cfg.seed);
    Ok(RankingResult::new(Algorithm::Elo, ratings, hp, seed).with_metadata(metadata))
}
