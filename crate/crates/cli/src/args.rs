use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use duelrank_core::experiments::DEFAULT_TRAIN_FRACTION;
use duelrank_core::simulator::Style;
use duelrank_core::{Algorithm, DataFormat};

#[derive(Debug, Parser)]
#[command(name = "duelrank", version, about = "Rank competitors from pairwise match outcomes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one rating system and print the ranking.
    Rank {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        algo: AlgoArgs,
        /// Write the Markov transition matrix to this file (markov only).
        #[arg(long, value_name = "PATH")]
        dump_matrix: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Transitivity on the full data and held-out F1 for one rating system.
    Evaluate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        algo: AlgoArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Held-out F1 across a range of values for one hyperparameter.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        algo: AlgoArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Elo rating spread over shuffled match orders.
    Permute {
        #[command(flatten)]
        input: InputArgs,
        /// K-factors to study.
        #[arg(long, value_delimiter = ',', default_values_t = [3.0, 5.0])]
        k_values: Vec<f64>,
        /// Numbers of shuffled passes to average.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 10, 100, 1000])]
        permutation_counts: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Generate a synthetic match dataset with known strengths.
    Simulate {
        #[arg(long, default_value = "controlled")]
        style: Style,
        #[arg(long, default_value_t = 10)]
        n_competitors: usize,
        #[arg(long, default_value_t = 1000)]
        n_matches: usize,
        /// Comma-separated strengths; evenly spaced over [-2, 2] when omitted.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        true_logits: Option<Vec<f64>>,
        /// Zipf exponent of competitor popularity (arena style).
        #[arg(long, default_value_t = 1.2)]
        skew_alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        tie_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output encoding; inferred from --out when omitted.
        #[arg(long)]
        format: Option<DataFormat>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Side-by-side transitivity, F1 and rank correlation for several systems.
    Compare {
        #[command(flatten)]
        input: InputArgs,
        /// Systems to compare; the win-rate baseline is always added.
        #[arg(long, value_delimiter = ',', default_values_t = [
            Algorithm::Elo, Algorithm::BradleyTerry, Algorithm::Glicko, Algorithm::Markov,
        ])]
        algorithms: Vec<Algorithm>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Match file with columns first, second, outcome.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Input encoding; inferred from the file extension when omitted.
    #[arg(long)]
    pub format: Option<DataFormat>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Report destination; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AlgoArgs {
    #[arg(long, default_value = "elo")]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub params: ParamArgs,
}

/// Per-algorithm settings. A flag that does not apply to the chosen
/// algorithm is rejected.
#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    /// Seeds the split and any shuffled Elo passes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Elo K-factor.
    #[arg(long, help_heading = "Elo")]
    pub k: Option<f64>,
    /// Starting rating (Elo and Glicko).
    #[arg(long, help_heading = "Elo")]
    pub initial_rating: Option<f64>,
    /// Shuffled passes to average; 0 keeps file order.
    #[arg(long, help_heading = "Elo")]
    pub permutations: Option<usize>,

    #[arg(long, help_heading = "Bradley-Terry")]
    pub max_iters: Option<usize>,
    /// Stop once no logit moves more than this.
    #[arg(long, help_heading = "Bradley-Terry")]
    pub tolerance: Option<f64>,
    /// Down-weight frequently played pairs.
    #[arg(long, help_heading = "Bradley-Terry")]
    pub weighted: bool,
    /// Pseudo-count added to every ordered pair.
    #[arg(long, help_heading = "Bradley-Terry")]
    pub regularization: Option<f64>,

    /// Starting rating deviation.
    #[arg(long, help_heading = "Glicko")]
    pub initial_rd: Option<f64>,
    /// Floor on the rating deviation.
    #[arg(long, help_heading = "Glicko")]
    pub min_rd: Option<f64>,

    /// Probability the walk moves toward the match winner.
    #[arg(long, help_heading = "Markov")]
    pub p: Option<f64>,
    #[arg(long, help_heading = "Markov")]
    pub power_tol: Option<f64>,
    #[arg(long, help_heading = "Markov")]
    pub max_power_iters: Option<usize>,
    /// Blend this much of the uniform chain in (rescues disconnected data).
    #[arg(long, help_heading = "Markov")]
    pub smoothing: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Share of matches used for fitting; the rest are held out.
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    pub train_fraction: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Hyperparameter to vary; defaults to the algorithm's main knob.
    #[arg(long)]
    pub parameter: Option<String>,
    #[arg(long, requires = "max")]
    pub min: Option<f64>,
    #[arg(long, requires = "min")]
    pub max: Option<f64>,
    /// Grid points between --min and --max.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Explicit comma-separated values instead of a grid.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["min", "max"])]
    pub values: Option<Vec<f64>>,
    /// Fits per value, each with a different algorithm seed.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
}
