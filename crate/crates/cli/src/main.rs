mod args;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use duelrank_core::experiments::{
    compare_algorithms, evaluate_algorithm, run_permutation_study, run_sweep, AlgorithmConfig, ExperimentReport,
    SweepSpec, SweepValues,
};
use duelrank_core::markov::build_transition;
use duelrank_core::report::{fmt6, to_json_string, Table};
use duelrank_core::simulator::write_ground_truth;
use duelrank_core::{
    generate, Algorithm, BtConfig, DataFormat, Dataset, EloConfig, Error, GlickoConfig, MarkovConfig, RankingResult,
    Result, SimConfig,
};
use serde_json::{json, Value};

use args::{AlgoArgs, Cli, Command, InputArgs, ParamArgs, SweepArgs};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("duelrank: {e}");
            ExitCode::from(if e.is_computational() { 2 } else { 1 })
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Rank { input, algo, dump_matrix, out } => {
            let cfg = algorithm_config(algo.algorithm, &algo.params, true)?;
            if dump_matrix.is_some() && algo.algorithm != Algorithm::Markov {
                return Err(usage("--dump-matrix applies only to --algorithm markov"));
            }
            let (d, _) = load(&input)?;
            if let (Some(path), AlgorithmConfig::Markov(m, smoothing)) = (&dump_matrix, &cfg) {
                let mut t = build_transition(&d, m)?;
                if let Some(eps) = smoothing {
                    t = t.smoothed(*eps)?;
                }
                let mut w = BufWriter::new(File::create(path)?);
                t.write_dump(&mut w)?;
                w.flush()?;
            }
            let r = cfg.fit(&d)?;
            emit(&to_json_string(&r)?, &[ratings_table(&r)], out.out.as_deref())
        }
        Command::Evaluate { input, algo, split, out } => {
            let cfg = algorithm_config(algo.algorithm, &algo.params, true)?;
            let (d, mut meta) = load(&input)?;
            let (t, f1) = evaluate_algorithm(&d, &cfg, split.train_fraction, algo.params.seed)?;
            meta.insert("command".into(), json!("evaluate"));
            meta.insert("algorithm".into(), json!(cfg.algorithm()));
            meta.insert("seed".into(), json!(algo.params.seed));
            meta.insert("train_fraction".into(), json!(split.train_fraction));
            let mut report = ExperimentReport::new(meta);
            report.transitivity = Some(vec![t]);
            report.f1 = Some(vec![f1]);
            write_report(&report, out.out.as_deref())
        }
        Command::Sweep { input, algo, split, sweep, out } => {
            let spec = sweep_spec(&algo, &sweep, split.train_fraction)?;
            let (d, mut meta) = load(&input)?;
            let report = run_sweep(&d, &spec)?;
            meta.insert("command".into(), json!("sweep"));
            meta.insert("algorithm".into(), json!(report.algorithm));
            meta.insert("parameter".into(), json!(report.parameter));
            meta.insert("seed".into(), json!(spec.split_seed));
            meta.insert("repeats".into(), json!(spec.repeats));
            meta.insert("train_fraction".into(), json!(spec.train_fraction));
            let mut doc = ExperimentReport::new(meta);
            doc.sweep = Some(report);
            write_report(&doc, out.out.as_deref())
        }
        Command::Permute { input, k_values, permutation_counts, seed, out } => {
            let (d, mut meta) = load(&input)?;
            let report = run_permutation_study(&d, &k_values, &permutation_counts, seed)?;
            meta.insert("command".into(), json!("permute"));
            meta.insert("seed".into(), json!(seed));
            meta.insert("k_values".into(), json!(k_values));
            meta.insert("permutation_counts".into(), json!(permutation_counts));
            let mut doc = ExperimentReport::new(meta);
            doc.permutation = Some(report);
            write_report(&doc, out.out.as_deref())
        }
        Command::Simulate { style, n_competitors, n_matches, true_logits, skew_alpha, tie_rate, seed, format, out } => {
            let cfg = SimConfig { n_competitors, true_logits, n_matches, style, skew_alpha, tie_rate, seed };
            cfg.validate()?;
            let (d, truth) = generate(&cfg)?;
            match out.out {
                Some(path) => {
                    let format = format.unwrap_or_else(|| DataFormat::from_path(&path));
                    d.save(&path, format)?;
                    let sidecar = sibling(&path, "ground_truth.csv");
                    let mut w = BufWriter::new(File::create(&sidecar)?);
                    write_ground_truth(&truth, &mut w)?;
                    w.flush()?;
                    eprintln!("wrote {} matches to {} and strengths to {}", d.len(), path.display(), sidecar.display());
                }
                None => {
                    let stdout = io::stdout();
                    d.write(stdout.lock(), format.unwrap_or(DataFormat::Csv))?;
                }
            }
            Ok(())
        }
        Command::Compare { input, algorithms, params, split, out } => {
            let configs =
                algorithms.iter().map(|&a| algorithm_config(a, &params, false)).collect::<Result<Vec<_>>>()?;
            let (d, mut meta) = load(&input)?;
            let report = compare_algorithms(&d, &configs, split.train_fraction, params.seed)?;
            for f in &report.failures {
                eprintln!("duelrank: {} failed during {}: {}", f.algorithm, f.stage, f.message);
            }
            meta.insert("command".into(), json!("compare"));
            meta.insert("algorithms".into(), json!(algorithms));
            meta.insert("seed".into(), json!(params.seed));
            meta.insert("train_fraction".into(), json!(split.train_fraction));
            write_report(&ExperimentReport::new(meta).with_compare(report), out.out.as_deref())
        }
    }
}

/// Reads the match file and starts the report's meta section.
fn load(input: &InputArgs) -> Result<(Dataset, BTreeMap<String, Value>)> {
    let path = input.input.as_ref().ok_or_else(|| usage("missing required flag --input"))?;
    let format = input.format.unwrap_or_else(|| DataFormat::from_path(path));
    let d = Dataset::load(path, format)?;
    let meta = BTreeMap::from([
        ("input".to_owned(), json!(path.display().to_string())),
        ("matches".to_owned(), json!(d.len())),
        ("competitors".to_owned(), json!(d.n_competitors())),
    ]);
    Ok((d, meta))
}

/// Builds the settings for one algorithm from the flags. With `strict`, a
/// flag the algorithm does not use is an error; otherwise it is ignored, so
/// `compare` can share one flag set across systems.
fn algorithm_config(algorithm: Algorithm, p: &ParamArgs, strict: bool) -> Result<AlgorithmConfig> {
    let given: [(&str, bool, &[Algorithm]); 13] = [
        ("--k", p.k.is_some(), &[Algorithm::Elo]),
        ("--initial-rating", p.initial_rating.is_some(), &[Algorithm::Elo, Algorithm::Glicko]),
        ("--permutations", p.permutations.is_some(), &[Algorithm::Elo]),
        ("--max-iters", p.max_iters.is_some(), &[Algorithm::BradleyTerry]),
        ("--tolerance", p.tolerance.is_some(), &[Algorithm::BradleyTerry]),
        ("--weighted", p.weighted, &[Algorithm::BradleyTerry]),
        ("--regularization", p.regularization.is_some(), &[Algorithm::BradleyTerry]),
        ("--initial-rd", p.initial_rd.is_some(), &[Algorithm::Glicko]),
        ("--min-rd", p.min_rd.is_some(), &[Algorithm::Glicko]),
        ("--p", p.p.is_some(), &[Algorithm::Markov]),
        ("--power-tol", p.power_tol.is_some(), &[Algorithm::Markov]),
        ("--max-power-iters", p.max_power_iters.is_some(), &[Algorithm::Markov]),
        ("--smoothing", p.smoothing.is_some(), &[Algorithm::Markov]),
    ];
    if strict {
        if let Some((flag, ..)) = given.iter().find(|(_, set, algs)| *set && !algs.contains(&algorithm)) {
            return Err(usage(format!("{flag} does not apply to --algorithm {algorithm}")));
        }
    }

    let cfg = match algorithm {
        Algorithm::Elo => {
            let d = EloConfig::default();
            AlgorithmConfig::Elo(EloConfig {
                k: p.k.unwrap_or(d.k),
                initial_rating: p.initial_rating.unwrap_or(d.initial_rating),
                permutations: p.permutations.unwrap_or(d.permutations),
                seed: p.seed,
            })
        }
        Algorithm::BradleyTerry => {
            let d = BtConfig::default();
            AlgorithmConfig::BradleyTerry(BtConfig {
                max_iters: p.max_iters.unwrap_or(d.max_iters),
                tolerance: p.tolerance.unwrap_or(d.tolerance),
                weighted: p.weighted,
                regularization: p.regularization.unwrap_or(d.regularization),
            })
        }
        Algorithm::Glicko => {
            let d = GlickoConfig::default();
            AlgorithmConfig::Glicko(GlickoConfig {
                initial_rating: p.initial_rating.unwrap_or(d.initial_rating),
                initial_rd: p.initial_rd.unwrap_or(d.initial_rd),
                min_rd: p.min_rd.unwrap_or(d.min_rd),
            })
        }
        Algorithm::Markov => {
            let d = MarkovConfig::default();
            AlgorithmConfig::Markov(
                MarkovConfig {
                    p: p.p.unwrap_or(d.p),
                    power_tol: p.power_tol.unwrap_or(d.power_tol),
                    max_power_iters: p.max_power_iters.unwrap_or(d.max_power_iters),
                },
                p.smoothing,
            )
        }
        Algorithm::WinRate => AlgorithmConfig::WinRate,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn sweep_spec(algo: &AlgoArgs, s: &SweepArgs, train_fraction: f64) -> Result<SweepSpec> {
    let base = algorithm_config(algo.algorithm, &algo.params, true)?;
    let default = SweepSpec::default_for(algo.algorithm, algo.params.seed).ok();
    let parameter = match (&s.parameter, &default) {
        (Some(p), _) => p.replace('-', "_"),
        (None, Some(d)) => d.parameter.clone(),
        (None, None) => return Err(usage(format!("--parameter is required for --algorithm {}", algo.algorithm))),
    };
    let values = match (&s.values, s.min.zip(s.max), &default) {
        (Some(v), ..) => SweepValues::List(v.clone()),
        (None, Some((min, max)), _) => SweepValues::Grid { min, max, count: s.count },
        (None, None, Some(d)) if d.parameter == parameter => match d.values {
            SweepValues::Grid { min, max, .. } => SweepValues::Grid { min, max, count: s.count },
            ref other => other.clone(),
        },
        _ => return Err(usage(format!("sweeping {parameter} needs --min and --max, or --values"))),
    };
    let spec = SweepSpec { base, parameter, values, repeats: s.repeats, split_seed: algo.params.seed, train_fraction };
    spec.validate()?;
    Ok(spec)
}

fn ratings_table(r: &RankingResult) -> Table {
    let mut t = Table::new("ratings", &["rank", "competitor", "theta", "sigma"]);
    for (i, id) in r.order.iter().enumerate() {
        let rating = &r.ratings[id];
        t.push(vec![(i + 1).to_string(), id.to_string(), fmt6(rating.theta), rating.sigma.map(fmt6).unwrap_or_default()]);
    }
    t
}

fn write_report(report: &ExperimentReport, out: Option<&Path>) -> Result<()> {
    emit(&to_json_string(report)?, &report.tables(), out)
}

/// Writes the JSON document to `out` (or stdout) and, when writing to a
/// file, one `<stem>.<table>.csv` beside it per table.
fn emit(json: &str, tables: &[Table], out: Option<&Path>) -> Result<()> {
    let Some(path) = out else {
        let mut stdout = io::stdout().lock();
        stdout.write_all(json.as_bytes())?;
        return Ok(stdout.flush()?);
    };
    std::fs::write(path, json)?;
    for t in tables {
        let mut w = BufWriter::new(File::create(sibling(path, &format!("{}.csv", t.name)))?);
        t.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

/// `dir/report.json` + `f1.csv` -> `dir/report.f1.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}
