#![allow(dead_code)]

use duelrank_core::{CompetitorId, Dataset, MatchRecord, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn csv(text: &str) -> Dataset {
    Dataset::read(text.as_bytes(), duelrank_core::DataFormat::Csv).unwrap()
}

pub fn name(i: usize) -> CompetitorId {
    CompetitorId::from(format!("c{i}").as_str())
}

/// Uniformly random matches among `n` competitors (ties with probability `tie`).
pub fn random_matches(n: usize, count: usize, tie: f64, seed: u64) -> Vec<MatchRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|s| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let outcome = if rng.random::<f64>() < tie {
                Outcome::Tie
            } else if rng.random_bool(0.5) {
                Outcome::FirstWins
            } else {
                Outcome::SecondWins
            };
            MatchRecord::new(name(a), name(b), outcome, s as u64).unwrap()
        })
        .collect()
}

pub fn random_dataset(n: usize, count: usize, tie: f64, seed: u64) -> Dataset {
    Dataset::from_matches(random_matches(n, count, tie, seed)).unwrap()
}

/// Every ordered pair gets between 1 and `max` wins, so every competitor
/// beats and loses to every other: the likelihood has a finite maximizer.
pub fn strongly_connected(n: usize, max: u64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matches = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            for _ in 0..rng.random_range(1..=max) {
                let seq = matches.len() as u64;
                matches.push(MatchRecord::new(name(a), name(b), Outcome::FirstWins, seq).unwrap());
            }
        }
    }
    Dataset::from_matches(matches).unwrap()
}
