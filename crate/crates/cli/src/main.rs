//! `fundlim` command-line tool.
//!
//! Exit codes: 0 success, 1 invalid arguments or input, 2 runtime failure.
//! Results go to stdout as CSV or a single number; diagnostics go to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fundlim::envelope::redundancy_bounds;
use fundlim::estimate::{
    compression_entropy_from_counts, optimal_bayes_error, optimal_entropy_estimator, optimal_l1_estimator,
    plugin_bayes_error, plugin_entropy, plugin_l1,
};
use fundlim::experiments::{
    emit_csv, enlargement_check, fit_rate_slope, load_config, load_csv, preset, run_experiment, summarize,
    write_warnings, ExperimentConfig, RunOptions,
};
use fundlim::oracle::{verify_poisson_difference, verify_poisson_tail, LemmaGrid};
use fundlim::{CodingScheme, EmpiricalCounts, Error, EstimatorParams, FiniteDistribution};

#[derive(Parser, Debug)]
#[command(name = "fundlim", version, about = "Estimate and achieve Bayes error and entropy on finite alphabets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte Carlo experiment and write per-trial records as CSV.
    Simulate {
        /// TOML experiment config.
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_parser = ["fig1", "fig2", "entropy", "enlargement"])]
        preset: Option<String>,
        /// Output CSV; warnings go to `<out>.warnings.csv`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        /// Master seed, overriding the config.
        #[arg(long)]
        seed: u64,
        /// Fill the wallclock_ms column.
        #[arg(long)]
        wallclock: bool,
    },
    /// Fit log-log error slopes from a results CSV.
    Rates {
        #[arg(long)]
        csv: PathBuf,
        /// Methods to fit; all methods when omitted.
        #[arg(long)]
        method: Vec<String>,
        /// Instead of slopes, compare `--optimal` at these n with `--plugin` at round(n ln n).
        #[arg(long, value_delimiter = ',')]
        enlargement: Vec<u64>,
        #[arg(long, default_value = "optimal")]
        optimal: String,
        #[arg(long, default_value = "plugin")]
        plugin: String,
    },
    /// Redundancy bounds for alphabets proportional to the sample size.
    Bounds {
        #[arg(long, conflicts_with = "alpha_grid", required_unless_present = "alpha_grid")]
        alpha: Option<f64>,
        /// Inclusive grid `A:B:STEP`.
        #[arg(long)]
        alpha_grid: Option<String>,
    },
    /// Numerically check a Poisson tail lemma.
    Verify {
        /// 6 (Poisson tails) or 8 (difference of Poissons).
        #[arg(long)]
        lemma: u8,
        /// `lambda=..;n=..;delta=..` with comma-separated values.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Estimate a limit from a count file.
    Estimate {
        #[arg(long, value_enum)]
        task: TaskArg,
        /// One non-negative integer per line.
        #[arg(long)]
        counts: PathBuf,
        /// One probability per line; required for bayes-error and l1.
        #[arg(long)]
        q: Option<PathBuf>,
        #[arg(long)]
        method: String,
        #[arg(long)]
        truth: Option<f64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TaskArg {
    Entropy,
    BayesError,
    L1,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Csv(_) | Error::BudgetExceeded(_) | Error::RemezNonConvergence { .. } => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Simulate {
            config,
            preset: name,
            out,
            threads,
            seed,
            wallclock,
        } => {
            let mut cfg = match (config, name) {
                (Some(path), None) => load_config(&path).map_err(|e| match e {
                    Error::Io(io) => Failure::usage(format!("{}: {io}", path.display())),
                    other => Failure::from(other),
                })?,
                (None, Some(name)) => preset(&name)?,
                _ => return Err(Failure::usage("exactly one of --config and --preset is required")),
            };
            cfg.master_seed = seed;
            simulate(&cfg, &out, threads, wallclock)
        }
        Command::Rates {
            csv,
            method,
            enlargement,
            optimal,
            plugin,
        } => rates(&csv, method, &enlargement, &optimal, &plugin),
        Command::Bounds { alpha, alpha_grid } => {
            let alphas = match (alpha, alpha_grid) {
                (Some(a), None) => vec![a],
                (None, Some(g)) => parse_grid(&g)?,
                _ => return Err(Failure::usage("exactly one of --alpha and --alpha-grid is required")),
            };
            let rows = alphas
                .iter()
                .map(|&a| redundancy_bounds(a))
                .collect::<Result<Vec<_>, _>>()?;
            println!("alpha,lower_bits,upper_bits");
            for b in rows {
                println!("{},{:.6},{:.6}", b.alpha, b.lower_bits, b.upper_bits);
            }
            Ok(())
        }
        Command::Verify { lemma, grid } => {
            let grid = match grid {
                Some(g) => LemmaGrid::parse(&g)?,
                None => LemmaGrid::default(),
            };
            let rep = match lemma {
                6 => verify_poisson_tail(&grid)?,
                8 => verify_poisson_difference(&grid)?,
                other => return Err(Failure::usage(format!("unknown lemma {other}; expected 6 or 8"))),
            };
            println!("lemma,points,max_ratio_m1,max_ratio_m2,guard,pass");
            println!(
                "{},{},{:.6},{:.6},{},{}",
                rep.lemma, rep.points, rep.max_ratio_m1, rep.max_ratio_m2, rep.guard, rep.pass
            );
            eprintln!("grid: {}", rep.grid);
            eprintln!("worst m1: {}", rep.worst_m1);
            eprintln!("worst m2: {}", rep.worst_m2);
            if rep.pass {
                Ok(())
            } else {
                Err(Failure::runtime(format!("lemma {lemma} check failed")))
            }
        }
        Command::Estimate {
            task,
            counts,
            q,
            method,
            truth,
        } => estimate(task, &counts, q.as_deref(), &method, truth),
    }
}

fn simulate(cfg: &ExperimentConfig, out: &Path, threads: Option<usize>, wallclock: bool) -> CliResult {
    if threads == Some(0) {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    let opts = RunOptions {
        threads,
        record_wallclock: wallclock,
    };
    let res = run_experiment(cfg, &opts)?;
    emit_csv(&res.records, out).map_err(|e| Failure::runtime(format!("{}: {e}", out.display())))?;
    if !res.warnings.is_empty() {
        let mut side = out.as_os_str().to_owned();
        side.push(".warnings.csv");
        let side = PathBuf::from(side);
        let file = fs::File::create(&side).map_err(|e| Failure::runtime(format!("{}: {e}", side.display())))?;
        write_warnings(&res.warnings, file)?;
        eprintln!("{} warnings written to {}", res.warnings.len(), side.display());
    }
    println!("n,method,trials,mean_error,stderr");
    for s in summarize(&res.records) {
        println!("{},{},{},{:.6e},{:.6e}", s.n, s.method, s.trials, s.mean_error, s.stderr);
    }
    Ok(())
}

fn rates(csv: &Path, methods: Vec<String>, enlargement: &[u64], optimal: &str, plugin: &str) -> CliResult {
    let records = load_csv(csv).map_err(|e| Failure::usage(format!("{}: {e}", csv.display())))?;
    if !enlargement.is_empty() {
        let rep = enlargement_check(&records, optimal, plugin, enlargement)?;
        println!("n,m,optimal_error,plugin_error,ratio,interpolated");
        for r in rep.rows {
            println!(
                "{},{},{:.6e},{:.6e},{:.6},{}",
                r.n, r.m, r.optimal_error, r.plugin_error, r.ratio, r.interpolated
            );
        }
        return Ok(());
    }
    let methods = if methods.is_empty() {
        let mut seen: Vec<String> = Vec::new();
        for r in &records {
            if !seen.contains(&r.method) {
                seen.push(r.method.clone());
            }
        }
        seen
    } else {
        methods
    };
    println!("method,slope,intercept,r_squared,points");
    for m in methods {
        let f = fit_rate_slope(&records, &m)?;
        println!("{},{:.6},{:.6},{:.6},{}", f.method, f.slope, f.intercept, f.r_squared, f.points);
    }
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Failure::usage(format!("alpha grid `{spec}` must be A:B:STEP with A <= B and STEP > 0"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let (a, b, step) = (v[0], v[1], v[2]);
    if !(a.is_finite() && b.is_finite() && step > 0.0 && a <= b) {
        return Err(bad());
    }
    let k = ((b - a) / step + 1e-9).floor() as usize;
    if k >= 1_000_000 {
        return Err(Failure::usage("alpha grid has more than a million points"));
    }
    Ok((0..=k).map(|i| a + i as f64 * step).collect())
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty())
        .collect())
}

fn read_counts(path: &Path) -> Result<EmpiricalCounts, Failure> {
    let counts = read_lines(path)?
        .into_iter()
        .map(|(i, l)| {
            l.parse::<u64>().map_err(|_| {
                Failure::usage(format!("{}:{i}: `{l}` is not a non-negative integer", path.display()))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if counts.is_empty() {
        return Err(Failure::usage(format!("{}: no counts", path.display())));
    }
    Ok(EmpiricalCounts::multinomial(counts)?)
}

fn read_probs(path: &Path) -> Result<FiniteDistribution, Failure> {
    let probs = read_lines(path)?
        .into_iter()
        .map(|(i, l)| match l.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
            _ => Err(Failure::usage(format!("{}:{i}: `{l}` is not a probability", path.display()))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let total: f64 = probs.iter().sum();
    if probs.is_empty() || (total - 1.0).abs() > 1e-9 {
        return Err(Failure::usage(format!(
            "{}: probabilities sum to {total}, expected 1 within 1e-9",
            path.display()
        )));
    }
    Ok(FiniteDistribution::new(probs.iter().map(|p| p / total).collect())?)
}

fn estimate(task: TaskArg, counts: &Path, q: Option<&Path>, method: &str, truth: Option<f64>) -> CliResult {
    let counts = read_counts(counts)?;
    let load_q = || -> Result<FiniteDistribution, Failure> {
        read_probs(q.ok_or_else(|| Failure::usage("--q is required for this task"))?)
    };
    let rep = match (task, method) {
        (TaskArg::Entropy, "plugin") => plugin_entropy(&counts)?,
        (TaskArg::Entropy, "optimal") => optimal_entropy_estimator(&counts, &EstimatorParams::default())?,
        (TaskArg::Entropy, "compression") => compression_entropy_from_counts(&counts, CodingScheme::default())?,
        (TaskArg::BayesError, "plugin") => plugin_bayes_error(&counts, &load_q()?)?,
        (TaskArg::BayesError, "optimal") => optimal_bayes_error(&counts, &load_q()?, &EstimatorParams::l1())?,
        (TaskArg::L1, "plugin") => plugin_l1(&counts, &load_q()?)?,
        (TaskArg::L1, "optimal") => optimal_l1_estimator(&counts, &load_q()?, &EstimatorParams::l1())?,
        (_, other) => {
            return Err(Failure::usage(format!(
                "unknown method `{other}` for this task (entropy: plugin, optimal, compression; bayes-error and l1: plugin, optimal)"
            )))
        }
    };
    match truth {
        Some(t) => {
            let rep = rep.with_truth(t);
            println!("estimate,truth,abs_error");
            println!("{},{},{}", rep.estimate, t, rep.abs_error.unwrap_or(f64::NAN));
        }
        None => println!("{}", rep.estimate),
    }
    Ok(())
}
