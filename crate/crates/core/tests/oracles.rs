//! Implementations checked against independent reference computations.

mod common;

use std::collections::BTreeMap;

use common::*;
use duelrank_core::bradley_terry::{bt_fit_with_init, bt_gradient};
use duelrank_core::markov::stationary_residual;
use duelrank_core::metrics::{predict_f1, spearman_scores};
use duelrank_core::simulator::Style;
use duelrank_core::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn win_rate_matches_raw_recount() {
    for seed in 0..5 {
        let matches = random_matches(3, 50, 0.2, seed);
        let d = Dataset::from_matches(matches.clone()).unwrap();
        let r = win_rate_ranking(&d);
        for id in d.roster() {
            let (mut points, mut played) = (0.0, 0.0);
            for m in &matches {
                if &m.first == id {
                    played += 1.0;
                    points += m.outcome.score();
                } else if &m.second == id {
                    played += 1.0;
                    points += 1.0 - m.outcome.score();
                }
            }
            assert_eq!(r.theta(id).unwrap(), points / played);
        }
    }
}

#[test]
fn bt_log_likelihood_matches_per_match_sum() {
    let matches = random_matches(3, 40, 0.25, 11);
    let d = Dataset::from_matches(matches.clone()).unwrap();
    let thetas: BTreeMap<CompetitorId, f64> =
        d.roster().iter().cloned().zip([0.4, -1.1, 0.9]).collect();
    let logistic = |x: f64| 1.0 / (1.0 + (-x).exp());
    let expected: f64 = matches
        .iter()
        .map(|m| {
            let p = logistic(thetas[&m.first] - thetas[&m.second]);
            match m.outcome {
                Outcome::FirstWins => p.ln(),
                Outcome::SecondWins => (1.0 - p).ln(),
                Outcome::Tie => 0.5 * p.ln() + 0.5 * (1.0 - p).ln(),
            }
        })
        .sum();
    assert!((bt_log_likelihood(&d, &thetas).unwrap() - expected).abs() < 1e-10);
}

/// Maximizes `wins * ln s(x) + losses * ln s(-x)` over the logit gap by
/// repeatedly refining a uniform grid around the best point.
fn grid_search_gap(wins: f64, losses: f64) -> f64 {
    let objective = |x: f64| {
        let p = 1.0 / (1.0 + (-x).exp());
        wins * p.ln() + losses * (1.0 - p).ln()
    };
    let (mut lo, mut hi) = (-10.0f64, 10.0f64);
    for _ in 0..12 {
        let step = (hi - lo) / 200.0;
        let best = (0..=200)
            .map(|i| lo + step * i as f64)
            .max_by(|a, b| objective(*a).total_cmp(&objective(*b)))
            .unwrap();
        lo = best - step;
        hi = best + step;
    }
    0.5 * (lo + hi)
}

#[test]
fn bt_two_player_matches_grid_search() {
    let d = csv("first,second,outcome\nA,B,first\nB,A,second\nA,B,first\nA,B,second\n");
    let r = bt_fit(&d, &BtConfig { regularization: 0.0, ..Default::default() }).unwrap();
    let gap = r.theta(&"A".into()).unwrap() - r.theta(&"B".into()).unwrap();
    let oracle = grid_search_gap(3.0, 1.0);
    let p_fit = bt_probability(gap, 0.0);
    let p_grid = bt_probability(oracle, 0.0);
    assert!((p_fit - p_grid).abs() < 1e-6, "{p_fit} vs {p_grid}");
    assert!((p_fit - 0.75).abs() < 1e-6);
}

#[test]
fn bt_gradient_vanishes_and_matches_finite_differences() {
    for seed in 0..4 {
        let d = strongly_connected(4, 6, seed);
        let r = bt_fit(&d, &BtConfig { regularization: 0.0, ..Default::default() }).unwrap();
        let thetas: BTreeMap<CompetitorId, f64> = r.ratings.iter().map(|(k, v)| (k.clone(), v.theta)).collect();
        let grad = bt_gradient(&d, &thetas).unwrap();
        assert!(grad.values().all(|g| g.abs() < 1e-6), "{grad:?}");

        // Away from the optimum the gradient is non-trivial: compare there too.
        let probe: BTreeMap<CompetitorId, f64> =
            thetas.iter().enumerate().map(|(i, (k, v))| (k.clone(), v + 0.3 * i as f64 - 0.2)).collect();
        let analytic = bt_gradient(&d, &probe).unwrap();
        let h = 1e-5;
        for id in d.roster() {
            let mut up = probe.clone();
            let mut down = probe.clone();
            *up.get_mut(id).unwrap() += h;
            *down.get_mut(id).unwrap() -= h;
            let fd = (bt_log_likelihood(&d, &up).unwrap() - bt_log_likelihood(&d, &down).unwrap()) / (2.0 * h);
            let a = analytic[id];
            assert!((fd - a).abs() <= 1e-4 * a.abs().max(1e-3), "{id}: fd {fd} vs analytic {a}");
        }
    }
}

#[test]
fn bt_independent_of_initialization() {
    let d = strongly_connected(5, 8, 21);
    let cfg = BtConfig::default();
    let zero = bt_fit(&d, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let init: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
    let random = bt_fit_with_init(&d, &cfg, &init).unwrap();
    for id in d.roster() {
        let diff = (zero.theta(id).unwrap() - random.theta(id).unwrap()).abs();
        assert!(diff < 10.0 * cfg.tolerance, "{id}: {diff}");
    }
    let sum: f64 = zero.ratings.values().map(|r| r.theta).sum();
    assert!(sum.abs() < 1e-9);
}

#[test]
fn bt_gap_monotone_in_wins() {
    let mut last = f64::NEG_INFINITY;
    for wins in 1..12 {
        let mut text = String::from("first,second,outcome\n");
        text += &"A,B,first\n".repeat(wins);
        text += &"A,B,second\n".repeat(3);
        let r = bt_fit(&csv(&text), &BtConfig::default()).unwrap();
        let gap = r.theta(&"A".into()).unwrap() - r.theta(&"B".into()).unwrap();
        assert!(gap >= last);
        last = gap;
    }
}

#[test]
fn glicko_update_matches_scripted_oracle() {
    // Values produced by evaluating the expectation, d^2, rating and
    // deviation formulas one at a time in a separate script.
    let p = glicko_expected(1500.0, 1700.0, 30.0);
    assert!((p - 0.241_200_428_045_669_43).abs() < 1e-12);
    let next = glicko_update(Rating::with_sigma(1500.0, 200.0), &[(Rating::with_sigma(1700.0, 30.0), 1.0)], 0.0);
    assert!((next.theta - 1_640.222_262_976_991_3).abs() < 1e-9, "{}", next.theta);
    assert!((next.sigma.unwrap() - 179.575_424_317_606_15).abs() < 1e-9);
}

#[test]
fn glicko_small_deviation_reproduces_elo_order() {
    let (d, _) = generate(&SimConfig { n_competitors: 5, n_matches: 400, seed: 8, ..Default::default() }).unwrap();
    let rd = 1.0;
    let glicko = glicko_rank(&d, &GlickoConfig { initial_rating: 1000.0, initial_rd: rd, min_rd: 0.0 }).unwrap();
    // Degenerate gain: q * sigma^2 rating points per unit surprise.
    let k = glicko::Q * rd * rd;
    let elo = elo_rank(&d, &EloConfig { k, ..Default::default() }).unwrap();
    assert_eq!(glicko.order, elo.order);
}

#[test]
fn glicko_more_matches_smaller_deviation() {
    let mut text = String::from("first,second,outcome\n");
    for i in 0..50 {
        text += if i % 2 == 0 { "busy,anchor,first\n" } else { "busy,anchor,second\n" };
    }
    for i in 0..5 {
        text += if i % 2 == 0 { "rare,anchor2,first\n" } else { "rare,anchor2,second\n" };
    }
    let r = glicko_rank(&csv(&text), &GlickoConfig::default()).unwrap();
    let busy = r.rating(&"busy".into()).unwrap().sigma.unwrap();
    let rare = r.rating(&"rare".into()).unwrap().sigma.unwrap();
    assert!(busy < rare, "{busy} vs {rare}");
}

/// Solves the balance equations `pi (T - I) = 0`, `sum pi = 1` directly.
fn dense_stationary(t: &TransitionMatrix) -> Vec<f64> {
    let n = t.n();
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(j, i)] = t.get(i, j) - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

#[test]
fn markov_matches_dense_solver() {
    let cfg = MarkovConfig::default();
    for seed in 0..10 {
        let d = random_dataset(5, 60, 0.1, seed);
        let t = build_transition(&d, &cfg).unwrap();
        let r = stationary(&t, &cfg).unwrap();
        let oracle = dense_stationary(&t);
        let pi: Vec<f64> = d.roster().iter().map(|id| r.theta(id).unwrap()).collect();
        let l1: f64 = pi.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).sum();
        assert!(l1 < 1e-8, "seed {seed}: {l1}");
        assert!(stationary_residual(&t, &pi) < 1e-10);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        for i in 0..t.n() {
            assert!((t.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn markov_majority_mass_increases_with_p() {
    let d = csv("first,second,outcome\nA,B,first\nA,B,first\nA,B,first\nB,A,first\n");
    let mut last = 0.0;
    for step in 1..20 {
        let p = 0.5 + 0.025 * step as f64;
        let r = markov_rank(&d, &MarkovConfig { p, ..Default::default() }, None).unwrap();
        let a = r.theta(&"A".into()).unwrap();
        assert!(a > last, "p={p}: {a} <= {last}");
        last = a;
    }
}

#[test]
fn markov_ratio_probability() {
    let d = csv("first,second,outcome\nA,B,first\nA,B,first\n");
    let r = markov_rank(&d, &MarkovConfig::default(), None).unwrap();
    let p = probability_from_result(&r, &"A".into(), &"B".into()).unwrap();
    assert!((p - 0.8).abs() < 1e-10);
}

/// Triple count straight from the raw match rows.
pub fn brute_force_transitivity(matches: &[MatchRecord], r: &RankingResult) -> (usize, usize) {
    let mut wins: BTreeMap<(&str, &str), i64> = BTreeMap::new();
    for m in matches {
        match m.outcome {
            Outcome::FirstWins => *wins.entry((m.first.as_str(), m.second.as_str())).or_default() += 1,
            Outcome::SecondWins => *wins.entry((m.second.as_str(), m.first.as_str())).or_default() += 1,
            Outcome::Tie => {}
        }
    }
    let beats = |a: &str, b: &str| wins.get(&(a, b)).copied().unwrap_or(0) > wins.get(&(b, a)).copied().unwrap_or(0);
    let ids: Vec<&str> = r.order.iter().map(|c| c.as_str()).collect();
    let pos = |x: &str| ids.iter().position(|&y| y == x).unwrap();
    let (mut total, mut kept) = (0, 0);
    for &i in &ids {
        for &j in &ids {
            for &k in &ids {
                if i == j || j == k || i == k {
                    continue;
                }
                if beats(i, j) && beats(j, k) {
                    total += 1;
                    if pos(i) < pos(j) && pos(j) < pos(k) {
                        kept += 1;
                    }
                }
            }
        }
    }
    (total, kept)
}

#[test]
fn transitivity_matches_brute_force() {
    for seed in 0..50 {
        let matches = random_matches(6, 40, 0.15, 100 + seed);
        let d = Dataset::from_matches(matches.clone()).unwrap();
        let r = elo_rank(&d, &EloConfig { k: 16.0, ..Default::default() }).unwrap();
        let (total, kept) = brute_force_transitivity(&matches, &r);
        let score = transitivity_score(&d, &r).unwrap();
        assert_eq!(enumerate_triples(&d).len(), total);
        match score {
            None => assert_eq!(total, 0),
            Some(s) => assert_eq!(s, kept as f64 / total as f64),
        }
    }
}

#[test]
fn cycle_preserves_at_most_one_third_under_any_order() {
    let d = csv("first,second,outcome\nA,B,first\nA,B,first\nB,C,first\nB,C,first\nC,A,first\nC,A,first\n");
    let ids = ["A", "B", "C"];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for perm in perms {
        let ratings = perm.iter().enumerate().map(|(rank, &i)| (ids[i].into(), Rating::new(-(rank as f64)))).collect();
        let r = RankingResult::new(Algorithm::WinRate, ratings, BTreeMap::new(), None);
        let s = transitivity_score(&d, &r).unwrap().unwrap();
        assert!(s <= 1.0 / 3.0 + 1e-15);
    }
}

#[test]
fn spearman_matches_rank_difference_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let mut a: Vec<f64> = (0..10).map(|x| x as f64).collect();
        let mut b = a.clone();
        a.shuffle(&mut rng);
        b.shuffle(&mut rng);
        // Ranks: descending value -> rank 1. With distinct values, rank = 10 - value.
        let d2: f64 = a.iter().zip(&b).map(|(x, y)| ((10.0 - x) - (10.0 - y)).powi(2)).sum();
        let oracle = 1.0 - 6.0 * d2 / (10.0 * (100.0 - 1.0));
        assert!((spearman_scores(&a, &b).unwrap() - oracle).abs() < 1e-12);
    }
}

#[test]
fn spearman_ignores_monotone_transforms() {
    let a = [0.3, 1.2, -0.5, 2.2, 0.0];
    let b: Vec<f64> = a.iter().map(|x: &f64| x.exp() * 3.0 + 1.0).collect();
    assert_eq!(spearman_scores(&a, &b).unwrap(), 1.0);
}

#[test]
fn f1_matches_hand_stepped_example() {
    let test = csv(
        "first,second,outcome\n\
         A,B,first\nA,B,first\nB,A,second\nB,A,first\nA,B,tie\n\
         A,C,first\nA,C,first\nC,A,second\nA,C,first\n\
         B,C,second\nC,B,first\nB,C,tie\n",
    );
    let ratings = [("A", 1100.0), ("B", 1000.0), ("C", 900.0)].map(|(id, t)| (id.into(), Rating::new(t))).into();
    let r = RankingResult::new(Algorithm::Elo, ratings, BTreeMap::new(), None);
    let report = predict_f1(&test, &r).unwrap();
    // Frozen from an independent floor/min/harmonic-mean evaluation.
    assert!((report.overall_f1 - 0.753_968_253_968_254).abs() < 1e-9);
    let a = report.per_competitor[&CompetitorId::from("A")];
    assert!((a.f1 - 0.928_571_428_571_428_6).abs() < 1e-9);
    assert!((a.recall - 0.875).abs() < 1e-9);
    assert!((report.per_competitor[&CompetitorId::from("B")].f1 - 0.5).abs() < 1e-9);
    assert!((report.per_competitor[&CompetitorId::from("C")].f1 - 0.833_333_333_333_333_3).abs() < 1e-9);
    let bc = report.pairs.iter().find(|p| p.i.as_str() == "B").unwrap();
    assert_eq!((bc.expected_i, bc.actual_i, bc.expected_j, bc.actual_j), (1, 0, 1, 2));
}

#[test]
fn simulator_two_player_win_rate() {
    let cfg = SimConfig {
        n_competitors: 2,
        true_logits: Some(vec![3f64.ln(), 0.0]),
        n_matches: 10_000,
        seed: 13,
        ..Default::default()
    };
    let (d, truth) = generate(&cfg).unwrap();
    assert_eq!(truth.len(), 2);
    let r = win_rate_ranking(&d);
    let strong = r.theta(&d.roster()[0]).unwrap();
    assert!((strong - 0.75).abs() < 0.02, "{strong}");
}

#[test]
fn simulator_controlled_counts_near_uniform() {
    let (d, _) = generate(&SimConfig { n_competitors: 10, n_matches: 4500, seed: 4, ..Default::default() }).unwrap();
    // Multinomial with 45 cells: mean 100, sd sqrt(4500 * 1/45 * 44/45).
    let sd = (4500.0f64 / 45.0 * 44.0 / 45.0).sqrt();
    let mut counts = Vec::new();
    for a in 0..10 {
        for b in (a + 1)..10 {
            let c = d.tally(a, b).total() as f64;
            assert!((c - 100.0).abs() <= 3.0 * sd, "pair ({a},{b}) count {c}");
            counts.push(c);
        }
    }
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let cv = (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / counts.len() as f64).sqrt() / mean;
    assert!(cv < 0.15, "{cv}");
}

#[test]
fn simulator_arena_is_skewed() {
    let cfg = SimConfig { n_competitors: 10, n_matches: 10_000, style: Style::Arena, seed: 2, ..Default::default() };
    let (d, _) = generate(&cfg).unwrap();
    let played: Vec<u64> = (0..10).map(|i| d.totals(i).played()).collect();
    let (max, min) = (*played.iter().max().unwrap(), *played.iter().min().unwrap());
    assert!(max >= 5 * min, "{played:?}");
}

#[test]
fn simulator_win_fractions_follow_logistic() {
    let logits = vec![1.0, 0.0, -0.5];
    let cfg = SimConfig { n_competitors: 3, true_logits: Some(logits.clone()), n_matches: 45_000, seed: 31, ..Default::default() };
    let (d, _) = generate(&cfg).unwrap();
    for a in 0..3 {
        for b in (a + 1)..3 {
            let t = d.tally(a, b);
            let n = t.total() as f64;
            let p = bt_probability(logits[a], logits[b]);
            let se = (p * (1.0 - p) / n).sqrt();
            assert!((t.wins as f64 / n - p).abs() < 3.0 * se, "pair ({a},{b})");
        }
    }
}
