//! Random-walker ranking: a Markov chain whose walker drifts toward match
//! winners with probability `p`, ranked by its stationary distribution.

use std::collections::BTreeMap;
use std::io::Write;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::types::{Algorithm, CompetitorId, RankingMetadata, RankingResult, Rating};

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovConfig {
    /// Probability the walker moves to the winner of a sampled match.
    pub p: f64,
    /// Convergence threshold on the L1 change between iterates.
    pub power_tol: f64,
    pub max_power_iters: usize,
}

impl Default for MarkovConfig {
    fn default() -> Self {
        Self { p: 0.8, power_tol: 1e-12, max_power_iters: 100_000 }
    }
}

impl MarkovConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.5 && self.p < 1.0) {
            return Err(Error::validation(format!("markov p must lie in (0.5, 1), got {}", self.p)));
        }
        if !(self.power_tol > 0.0) {
            return Err(Error::validation(format!("markov power_tol must be positive, got {}", self.power_tol)));
        }
        if self.max_power_iters == 0 {
            return Err(Error::validation("markov max_power_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Dense row-stochastic matrix over the dataset roster.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    roster: Vec<CompetitorId>,
    entries: Vec<f64>,
    /// States whose competitor played no match; their rows are uniform.
    isolated: Vec<bool>,
    p: f64,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.roster.len()
    }

    pub fn roster(&self) -> &[CompetitorId] {
        &self.roster
    }

    pub fn roster_index(&self, id: &CompetitorId) -> Option<usize> {
        self.roster.binary_search(id).ok()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn isolated(&self) -> Vec<CompetitorId> {
        self.roster.iter().zip(&self.isolated).filter(|(_, &iso)| iso).map(|(id, _)| id.clone()).collect()
    }

    /// Blends `eps` of the uniform matrix into every row, making the chain
    /// irreducible at the cost of a slight bias toward uniform.
    pub fn smoothed(&self, eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::validation(format!("smoothing must lie in [0, 1), got {eps}")));
        }
        let n = self.n() as f64;
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|t| *t = (1.0 - eps) * *t + eps / n);
        Ok(out)
    }

    /// Writes one row per line, entries separated by single spaces.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.n() {
            let row: Vec<String> = self.row(i).iter().map(|t| format!("{t:.15}")).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    /// Number of components among non-isolated states, linking `i` and `j`
    /// whenever both `t_ij` and `t_ji` are positive.
    fn components(&self) -> usize {
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if self.isolated[i] || self.isolated[j] {
                    continue;
                }
                if self.get(i, j) > 0.0 && self.get(j, i) > 0.0 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut roots: Vec<usize> = (0..n).filter(|&i| !self.isolated[i]).map(|i| find(&mut parent, i)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

/// Builds the walker's transition matrix from the dataset tallies.
///
/// Off-diagonal: `t_ij = (w_ij (1 - p) + l_ij p) / N_i`; diagonal:
/// `t_ii = (W_i p + L_i (1 - p)) / N_i`, with ties counted as half a win and
/// half a loss and `N_i` the matches played by `i`.
pub fn build_transition(d: &Dataset, cfg: &MarkovConfig) -> Result<TransitionMatrix> {
    cfg.validate()?;
    let n = d.n_competitors();
    let p = cfg.p;
    let mut entries = vec![0.0; n * n];
    let mut isolated = vec![false; n];
    for i in 0..n {
        let played = d.totals(i).played();
        let row = &mut entries[i * n..(i + 1) * n];
        if played == 0 {
            isolated[i] = true;
            row.iter_mut().for_each(|t| *t = 1.0 / n as f64);
            continue;
        }
        let played = played as f64;
        let (mut won, mut lost) = (0.0, 0.0);
        for (j, t) in row.iter_mut().enumerate() {
            if j == i {
                continue;
            }
            let pair = d.tally(i, j);
            let (w, l) = (pair.half_credit_wins(), pair.half_credit_losses());
            won += w;
            lost += l;
            *t = (w * (1.0 - p) + l * p) / played;
        }
        row[i] = (won * p + lost * (1.0 - p)) / played;
    }
    Ok(TransitionMatrix { roster: d.roster().to_vec(), entries, isolated, p })
}

fn step(t: &TransitionMatrix, pi: &[f64], out: &mut [f64]) {
    let n = t.n();
    out.iter_mut().for_each(|x| *x = 0.0);
    for (i, &mass) in pi.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        for (o, tij) in out.iter_mut().zip(&t.entries[i * n..(i + 1) * n]) {
            *o += mass * tij;
        }
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `||pi T - pi||_1`.
pub fn stationary_residual(t: &TransitionMatrix, pi: &[f64]) -> f64 {
    let mut next = vec![0.0; t.n()];
    step(t, pi, &mut next);
    l1(&next, pi)
}

/// Stationary distribution by power iteration from the uniform vector.
pub fn stationary(t: &TransitionMatrix, cfg: &MarkovConfig) -> Result<RankingResult> {
    cfg.validate()?;
    let n = t.n();
    let components = t.components();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let mut pi = vec![if n > 0 { 1.0 / n as f64 } else { 0.0 }; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut change = if n == 0 { 0.0 } else { f64::INFINITY };
    while n > 0 && iterations < cfg.max_power_iters {
        iterations += 1;
        step(t, &pi, &mut next);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        change = l1(&next, &pi);
        std::mem::swap(&mut pi, &mut next);
        if change < cfg.power_tol {
            break;
        }
    }
    if !(change < cfg.power_tol) && n > 0 {
        return Err(Error::MarkovNonConvergence { iterations, residual: change });
    }
    let residual = stationary_residual(t, &pi);
    let ratings = t.roster.iter().cloned().zip(pi.into_iter().map(Rating::new)).collect();
    let mut hp = BTreeMap::new();
    hp.insert("p".to_owned(), t.p);
    hp.insert("power_tol".to_owned(), cfg.power_tol);
    hp.insert("max_power_iters".to_owned(), cfg.max_power_iters as f64);
    let metadata = RankingMetadata {
        unrated: t.isolated(),
        iterations: Some(iterations),
        residual: Some(residual),
        ..Default::default()
    };
    Ok(RankingResult::new(Algorithm::Markov, ratings, hp, None).with_metadata(metadata))
}

/// Builds the chain, optionally smooths it, and ranks by its stationary distribution.
pub fn markov_rank(d: &Dataset, cfg: &MarkovConfig, smoothing: Option<f64>) -> Result<RankingResult> {
    let mut t = build_transition(d, cfg)?;
    if let Some(eps) = smoothing {
        t = t.smoothed(eps)?;
    }
    let mut r = stationary(&t, cfg)?;
    if let Some(eps) = smoothing {
        r.hyperparameters.insert("smoothing".to_owned(), eps);
    }
    Ok(r)
}
