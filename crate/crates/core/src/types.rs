//! Domain types shared by every rating system and metric.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque competitor identifier, e.g. a model name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompetitorId(String);

impl CompetitorId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::validation("competitor id must be non-empty"));
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CompetitorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CompetitorId {
    /// Panics on an empty string; use [`CompetitorId::new`] for untrusted input.
    fn from(s: &str) -> Self {
        Self::new(s).expect("empty competitor id")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    FirstWins,
    SecondWins,
    Tie,
}

impl Outcome {
    /// Score of the first competitor: 1, 0 or 0.5.
    pub fn score(self) -> f64 {
        match self {
            Outcome::FirstWins => 1.0,
            Outcome::SecondWins => 0.0,
            Outcome::Tie => 0.5,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Outcome::FirstWins => "first",
            Outcome::SecondWins => "second",
            Outcome::Tie => "tie",
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Outcome::FirstWins => Outcome::SecondWins,
            Outcome::SecondWins => Outcome::FirstWins,
            Outcome::Tie => Outcome::Tie,
        }
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "first" => Ok(Outcome::FirstWins),
            "second" => Ok(Outcome::SecondWins),
            "tie" => Ok(Outcome::Tie),
            other => Err(format!("unknown outcome token `{other}` (expected first, second or tie)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchRecord {
    pub first: CompetitorId,
    pub second: CompetitorId,
    pub outcome: Outcome,
    /// Position in the original match stream.
    pub sequence: u64,
}

impl MatchRecord {
    pub fn new(first: CompetitorId, second: CompetitorId, outcome: Outcome, sequence: u64) -> Result<Self> {
        if first == second {
            return Err(Error::validation(format!("self-match for competitor `{first}`")));
        }
        Ok(Self { first, second, outcome, sequence })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl Rating {
    pub fn new(theta: f64) -> Self {
        Self { theta, sigma: None }
    }

    pub fn with_sigma(theta: f64, sigma: f64) -> Self {
        Self { theta, sigma: Some(sigma) }
    }

    /// Deviation, treating a missing one as zero.
    pub fn sigma_or_zero(&self) -> f64 {
        self.sigma.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Elo,
    BradleyTerry,
    Glicko,
    Markov,
    WinRate,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Elo,
        Algorithm::BradleyTerry,
        Algorithm::Glicko,
        Algorithm::Markov,
        Algorithm::WinRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Elo => "elo",
            Algorithm::BradleyTerry => "bradley-terry",
            Algorithm::Glicko => "glicko",
            Algorithm::Markov => "markov",
            Algorithm::WinRate => "win-rate",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "elo" => Ok(Algorithm::Elo),
            "bradley-terry" | "bradley_terry" | "bt" => Ok(Algorithm::BradleyTerry),
            "glicko" => Ok(Algorithm::Glicko),
            "markov" => Ok(Algorithm::Markov),
            "win-rate" | "win_rate" | "winrate" => Ok(Algorithm::WinRate),
            other => Err(Error::validation(format!(
                "unknown algorithm `{other}` (expected elo, bradley-terry, glicko, markov or win-rate)"
            ))),
        }
    }
}

/// Run diagnostics attached to a [`RankingResult`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankingMetadata {
    /// Roster members that took part in no match; they keep their initial rating.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unrated: Vec<CompetitorId>,
    /// Elo: per-competitor standard deviation of theta across permutation passes.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rating_std: BTreeMap<CompetitorId, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

/// Output of a rating system: scores plus a deterministic total order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    pub algorithm: Algorithm,
    pub ratings: BTreeMap<CompetitorId, Rating>,
    /// Descending theta, ties broken by ascending id.
    pub order: Vec<CompetitorId>,
    pub hyperparameters: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub metadata: RankingMetadata,
}

impl RankingResult {
    pub fn new(
        algorithm: Algorithm,
        ratings: BTreeMap<CompetitorId, Rating>,
        hyperparameters: BTreeMap<String, f64>,
        seed: Option<u64>,
    ) -> Self {
        let order = order_by_theta(&ratings);
        Self { algorithm, ratings, order, hyperparameters, seed, metadata: RankingMetadata::default() }
    }

    pub fn with_metadata(mut self, metadata: RankingMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn rating(&self, id: &CompetitorId) -> Result<&Rating> {
        self.ratings.get(id).ok_or_else(|| Error::UnknownCompetitor(id.clone()))
    }

    pub fn theta(&self, id: &CompetitorId) -> Result<f64> {
        self.rating(id).map(|r| r.theta)
    }

    /// Zero-based position in `order` (0 is the best).
    pub fn rank_of(&self, id: &CompetitorId) -> Option<usize> {
        self.order.iter().position(|c| c == id)
    }

    /// Map from competitor to zero-based rank.
    pub fn rank_map(&self) -> BTreeMap<&CompetitorId, usize> {
        self.order.iter().enumerate().map(|(rank, id)| (id, rank)).collect()
    }
}

fn order_by_theta(ratings: &BTreeMap<CompetitorId, Rating>) -> Vec<CompetitorId> {
    let mut order: Vec<(&CompetitorId, f64)> = ratings.iter().map(|(id, r)| (id, r.theta)).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    order.into_iter().map(|(id, _)| id.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_scores() {
        assert_eq!(Outcome::FirstWins.score(), 1.0);
        assert_eq!(Outcome::SecondWins.score(), 0.0);
        assert_eq!(Outcome::Tie.score(), 0.5);
        assert!("First".parse::<Outcome>().is_err());
    }

    #[test]
    fn empty_id_rejected() {
        assert!(CompetitorId::new("").is_err());
    }

    #[test]
    fn order_breaks_ties_lexicographically() {
        let ratings: BTreeMap<_, _> = [("b", 1.0), ("a", 1.0), ("c", 2.0)]
            .into_iter()
            .map(|(id, t)| (CompetitorId::from(id), Rating::new(t)))
            .collect();
        let r = RankingResult::new(Algorithm::WinRate, ratings, BTreeMap::new(), None);
        let ids: Vec<_> = r.order.iter().map(|c| c.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
        assert_eq!(r.rank_of(&"b".into()), Some(2));
    }
}
