//! Glicko-1 ratings updated after every match.
//!
//! Each match is treated as a one-game rating period for both participants,
//! and deviations never inflate between periods: the rated subjects are
//! assumed static.

use std::collections::BTreeMap;
use std::f64::consts::{LN_10, PI};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::types::{Algorithm, RankingMetadata, RankingResult, Rating};

/// `ln(10) / 400`.
pub const Q: f64 = LN_10 / 400.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GlickoConfig {
    pub initial_rating: f64,
    pub initial_rd: f64,
    /// Floor applied to every updated deviation.
    pub min_rd: f64,
}

impl Default for GlickoConfig {
    fn default() -> Self {
        Self { initial_rating: 1500.0, initial_rd: 350.0, min_rd: 30.0 }
    }
}

impl GlickoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_rd > 0.0 && self.initial_rd.is_finite()) {
            return Err(Error::validation(format!("glicko initial_rd must be positive, got {}", self.initial_rd)));
        }
        if !(self.min_rd >= 0.0) {
            return Err(Error::validation(format!("glicko min_rd must be non-negative, got {}", self.min_rd)));
        }
        if self.min_rd > self.initial_rd {
            return Err(Error::validation(format!(
                "glicko min_rd ({}) exceeds initial_rd ({})",
                self.min_rd, self.initial_rd
            )));
        }
        if !self.initial_rating.is_finite() {
            return Err(Error::validation("glicko initial rating must be finite"));
        }
        Ok(())
    }
}

/// Attenuation factor for an opponent with deviation `sigma`.
pub fn glicko_g(sigma: f64) -> f64 {
    1.0 / (1.0 + 3.0 * Q * Q * sigma * sigma / (PI * PI)).sqrt()
}

/// Probability that `i` beats `j`, discounted by `j`'s deviation.
/// With `sigma_j == 0` this is bit-for-bit the Elo expectation.
pub fn glicko_expected(theta_i: f64, theta_j: f64, sigma_j: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(glicko_g(sigma_j) * (theta_j - theta_i) / 400.0))
}

/// Updates `rating` against a set of `(opponent, score)` results.
pub fn glicko_update(rating: Rating, opponents: &[(Rating, f64)], min_rd: f64) -> Rating {
    let sigma = rating.sigma_or_zero();
    if opponents.is_empty() {
        return rating;
    }
    let mut info = 0.0;
    let mut innovation = 0.0;
    for (opp, score) in opponents {
        let g = glicko_g(opp.sigma_or_zero());
        let p = glicko_expected(rating.theta, opp.theta, opp.sigma_or_zero());
        info += g * g * p * (1.0 - p);
        innovation += g * (score - p);
    }
    // 1/d^2
    let inv_d2 = Q * Q * info;
    let variance = 1.0 / (1.0 / (sigma * sigma) + inv_d2);
    Rating::with_sigma(rating.theta + Q * variance * innovation, variance.sqrt().max(min_rd))
}

pub fn glicko_rank(d: &Dataset, cfg: &GlickoConfig) -> Result<RankingResult> {
    cfg.validate()?;
    let mut ratings = vec![Rating::with_sigma(cfg.initial_rating, cfg.initial_rd); d.n_competitors()];
    for m in d.matches() {
        let a = d.require_index(&m.first)?;
        let b = d.require_index(&m.second)?;
        let s = m.outcome.score();
        let (ra, rb) = (ratings[a], ratings[b]);
        ratings[a] = glicko_update(ra, &[(rb, s)], cfg.min_rd);
        ratings[b] = glicko_update(rb, &[(ra, 1.0 - s)], cfg.min_rd);
    }
    let mut hp = BTreeMap::new();
    hp.insert("initial_rating".to_owned(), cfg.initial_rating);
    hp.insert("initial_rd".to_owned(), cfg.initial_rd);
    hp.insert("min_rd".to_owned(), cfg.min_rd);
    let map = d.roster().iter().cloned().zip(ratings).collect();
    Ok(RankingResult::new(Algorithm::Glicko, map, hp, None)
        .with_metadata(RankingMetadata { unrated: d.unplayed(), ..Default::default() }))
}
