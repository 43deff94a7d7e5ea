//! Pairwise-comparison rating systems (Elo, Bradley-Terry, Glicko, Markov
//! chain) and the harness used to evaluate them: transitivity preservation,
//! prediction F1, rank correlation, hyperparameter sweeps and Elo
//! permutation studies.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bradley_terry;
pub mod dataset;
pub mod elo;
pub mod error;
pub mod experiments;
pub mod glicko;
pub mod markov;
pub mod metrics;
pub mod report;
pub mod simulator;
pub mod types;
pub mod winrate;

pub use bradley_terry::{bt_fit, bt_log_likelihood, bt_probability, BtConfig};
pub use dataset::{split_dataset, DataFormat, Dataset, PairTally};
pub use elo::{elo_expected, elo_rank, elo_update, EloConfig};
pub use error::{Error, Result};
pub use glicko::{glicko_expected, glicko_g, glicko_rank, glicko_update, GlickoConfig};
pub use markov::{build_transition, markov_rank, stationary, MarkovConfig, TransitionMatrix};
pub use metrics::{
    enumerate_triples, predict_f1, probability_from_result, spearman, transitivity_score, F1Report, Triple,
};
pub use simulator::{generate, SimConfig, Style};
pub use types::{Algorithm, CompetitorId, MatchRecord, Outcome, RankingMetadata, RankingResult, Rating};
pub use winrate::win_rate_ranking;
