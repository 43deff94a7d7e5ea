//! Win-rate baseline ranking.

use std::collections::BTreeMap;

use crate::dataset::Dataset;
use crate::types::{Algorithm, RankingMetadata, RankingResult, Rating};

/// Ranks by `(wins + ties / 2) / played`. Competitors without matches score
/// zero and are listed in `metadata.unrated`.
pub fn win_rate_ranking(d: &Dataset) -> RankingResult {
    let mut ratings = BTreeMap::new();
    let mut unrated = Vec::new();
    for (i, id) in d.roster().iter().enumerate() {
        let t = d.totals(i);
        let theta = if t.played() == 0 {
            unrated.push(id.clone());
            0.0
        } else {
            (t.wins as f64 + 0.5 * t.ties as f64) / t.played() as f64
        };
        ratings.insert(id.clone(), Rating::new(theta));
    }
    RankingResult::new(Algorithm::WinRate, ratings, BTreeMap::new(), None)
        .with_metadata(RankingMetadata { unrated, ..Default::default() })
}
