//! Synthetic tournaments with known Bradley-Terry strengths.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bradley_terry::bt_probability;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::types::{CompetitorId, MatchRecord, Outcome};

/// How match-ups are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// Heavy-tailed popularity: a few competitors play most matches.
    Arena,
    /// Every unordered pair equally likely.
    Controlled,
}

impl FromStr for Style {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arena" => Ok(Style::Arena),
            "controlled" => Ok(Style::Controlled),
            other => Err(Error::validation(format!("unknown style `{other}` (expected arena or controlled)"))),
        }
    }
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Style::Arena => "arena",
            Style::Controlled => "controlled",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_competitors: usize,
    /// Defaults to evenly spaced values over [-2, 2].
    pub true_logits: Option<Vec<f64>>,
    pub n_matches: usize,
    pub style: Style,
    /// Zipf exponent of arena popularity.
    pub skew_alpha: f64,
    pub tie_rate: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_competitors: 10,
            true_logits: None,
            n_matches: 1000,
            style: Style::Controlled,
            skew_alpha: 1.2,
            tie_rate: 0.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_competitors < 2 {
            return Err(Error::validation(format!("need at least 2 competitors, got {}", self.n_competitors)));
        }
        if self.n_matches == 0 {
            return Err(Error::validation("n_matches must be positive"));
        }
        if let Some(l) = &self.true_logits {
            if l.len() != self.n_competitors {
                return Err(Error::validation(format!(
                    "{} true logits given for {} competitors",
                    l.len(),
                    self.n_competitors
                )));
            }
            if l.iter().any(|x| !x.is_finite()) {
                return Err(Error::validation("true logits must be finite"));
            }
        }
        if !(self.skew_alpha > 0.0 && self.skew_alpha.is_finite()) {
            return Err(Error::validation(format!("skew_alpha must be positive, got {}", self.skew_alpha)));
        }
        if !(0.0..1.0).contains(&self.tie_rate) {
            return Err(Error::validation(format!("tie_rate must lie in [0, 1), got {}", self.tie_rate)));
        }
        Ok(())
    }

    pub fn logits(&self) -> Vec<f64> {
        match &self.true_logits {
            Some(l) => l.clone(),
            None => {
                let n = self.n_competitors;
                (0..n).map(|i| -2.0 + 4.0 * i as f64 / (n - 1) as f64).collect()
            }
        }
    }
}

/// Competitor names `m00`, `m01`, ... padded so lexicographic order matches index order.
pub fn competitor_names(n: usize) -> Vec<CompetitorId> {
    let width = (n.saturating_sub(1)).to_string().len().max(2);
    (0..n).map(|i| CompetitorId::from(format!("m{i:0width$}").as_str())).collect()
}

/// Generates a match log and the logits it was drawn from.
pub fn generate(cfg: &SimConfig) -> Result<(Dataset, BTreeMap<CompetitorId, f64>)> {
    cfg.validate()?;
    let n = cfg.n_competitors;
    let names = competitor_names(n);
    let logits = cfg.logits();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
    let weights: Vec<f64> = match cfg.style {
        Style::Controlled => vec![1.0; pairs.len()],
        Style::Arena => {
            // Popularity ranks are shuffled so they carry no information about strength.
            let mut rank: Vec<usize> = (0..n).collect();
            rank.shuffle(&mut rng);
            let pop: Vec<f64> = rank.iter().map(|&r| ((r + 1) as f64).powf(-cfg.skew_alpha)).collect();
            pairs.iter().map(|&(a, b)| pop[a] * pop[b]).collect()
        }
    };
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::validation(e.to_string()))?;

    let mut matches = Vec::with_capacity(cfg.n_matches);
    for seq in 0..cfg.n_matches {
        let (mut a, mut b) = pairs[pick.sample(&mut rng)];
        if rng.random_bool(0.5) {
            std::mem::swap(&mut a, &mut b);
        }
        let outcome = if cfg.tie_rate > 0.0 && rng.random::<f64>() < cfg.tie_rate {
            Outcome::Tie
        } else if rng.random::<f64>() < bt_probability(logits[a], logits[b]) {
            Outcome::FirstWins
        } else {
            Outcome::SecondWins
        };
        matches.push(MatchRecord::new(names[a].clone(), names[b].clone(), outcome, seq as u64)?);
    }
    let dataset = Dataset::with_roster(names.iter().cloned(), matches)?;
    Ok((dataset, names.into_iter().zip(logits).collect()))
}

/// Writes the `competitor,logit` sidecar.
pub fn write_ground_truth<W: Write>(truth: &BTreeMap<CompetitorId, f64>, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["competitor", "logit"]).map_err(io)?;
    for (id, logit) in truth {
        w.write_record([id.as_str(), &format!("{logit:.6}")]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_logits_evenly_spaced() {
        let cfg = SimConfig { n_competitors: 5, ..Default::default() };
        assert_eq!(cfg.logits(), [-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn names_sort_in_index_order() {
        let names = competitor_names(12);
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert_eq!(names[3].as_str(), "m03");
    }

    #[test]
    fn validation() {
        assert!(generate(&SimConfig { n_competitors: 1, ..Default::default() }).is_err());
        assert!(generate(&SimConfig { true_logits: Some(vec![0.0; 3]), ..Default::default() }).is_err());
        assert!(generate(&SimConfig { tie_rate: 1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SimConfig { n_matches: 300, style: Style::Arena, ..Default::default() };
        let (a, _) = generate(&cfg).unwrap();
        let (b, _) = generate(&cfg).unwrap();
        assert_eq!(a, b);
        let (c, _) = generate(&SimConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.matches(), c.matches());
    }

    #[test]
    fn tie_rate_applies() {
        let cfg = SimConfig { n_matches: 4000, tie_rate: 0.25, ..Default::default() };
        let (d, _) = generate(&cfg).unwrap();
        let ties = d.matches().iter().filter(|m| m.outcome == Outcome::Tie).count() as f64;
        // binomial sd ~ 27
        assert!((ties - 1000.0).abs() < 100.0, "{ties}");
    }

    #[test]
    fn ground_truth_sidecar() {
        let (_, truth) = generate(&SimConfig { n_competitors: 3, n_matches: 5, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        write_ground_truth(&truth, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "competitor,logit\nm00,-2.000000\nm01,0.000000\nm02,2.000000\n");
    }
}
