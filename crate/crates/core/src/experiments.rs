//! Monte Carlo harness: declarative configs, parallel trials, CSV output and
//! log-log rate fits.
//!
//! Trial `t` draws from stream `t` of the master seed, so results do not
//! depend on scheduling. Within a trial the sample grows along the `n` grid:
//! the sample at each grid point extends the one before it. Records come out
//! sorted by `(n, trial, method)`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{expected_regret_exact, rate_bound, regime_condition_warning, ThresholdRule};
use crate::dist::{make_uniform, make_zipf, CategoricalSampler, EmpiricalCounts, FiniteDistribution, RngSeed};
use crate::envelope::{bayes_error, envelope_regret, shannon_entropy, LabeledDistribution};
use crate::error::{Error, Result};
use crate::estimate::{
    compression_entropy_from_counts, optimal_bayes_error, optimal_entropy_estimator, plugin_bayes_error,
    plugin_entropy, two_sample_optimal, two_sample_plugin_l1, two_sample_regime, CodingScheme, EstimatorParams,
};
use crate::oracle::mean_stderr;

/// Exact CSV header.
pub const CSV_HEADER: &str = "experiment_id,n,trial,seed,method,value,truth,abs_error,regret,rate_bound,wallclock_ms";

/// A distribution family over `{1..S}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Uniform,
    Zipf { beta: f64 },
    Explicit { probs: Vec<f64> },
}

impl Family {
    pub fn build(&self, s: usize) -> Result<FiniteDistribution> {
        match self {
            Family::Uniform => make_uniform(s),
            Family::Zipf { beta } => make_zipf(s, *beta),
            Family::Explicit { probs } => {
                if probs.len() != s {
                    return Err(Error::Config(format!(
                        "explicit distribution has {} entries, support_size is {s}",
                        probs.len()
                    )));
                }
                FiniteDistribution::new(probs.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    BayesError,
    Entropy,
}

/// Declarative Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub task: Task,
    pub support_size: usize,
    pub p_family: Family,
    /// Required for the Bayes-error task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_family: Option<Family>,
    #[serde(default = "yes")]
    pub q_known: bool,
    pub n_grid: Vec<u64>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub estimators: Vec<String>,
    #[serde(default)]
    pub classifiers: Vec<String>,
    #[serde(default = "EstimatorParams::l1")]
    pub l1_params: EstimatorParams,
    #[serde(default)]
    pub entropy_params: EstimatorParams,
    #[serde(default = "half")]
    pub coding_beta: f64,
}

fn yes() -> bool {
    true
}

fn half() -> f64 {
    0.5
}

const KNOWN_Q_ESTIMATORS: &[&str] = &["plugin", "optimal"];
const KNOWN_Q_CLASSIFIERS: &[&str] = &["mle", "tq", "mle_mc", "tq_mc"];
const TWO_SAMPLE_ESTIMATORS: &[&str] = &["two_sample_plugin", "two_sample_optimal"];
const TWO_SAMPLE_CLASSIFIERS: &[&str] = &["scheffe"];
const ENTROPY_ESTIMATORS: &[&str] = &["plugin", "optimal", "compression"];

impl ExperimentConfig {
    /// Checks the invariants and the method tags.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.experiment_id.is_empty() || self.experiment_id.contains([',', '"', '\n']) {
            return bad("experiment_id must be non-empty and free of commas, quotes and newlines".into());
        }
        if self.support_size == 0 {
            return bad("support_size must be at least 1".into());
        }
        if self.n_grid.is_empty() {
            return bad("n_grid must be non-empty".into());
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_grid must be positive and strictly increasing".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.coding_beta > 0.0) {
            return bad("coding_beta must be positive".into());
        }
        if self.estimators.is_empty() && self.classifiers.is_empty() {
            return bad("at least one estimator or classifier is required".into());
        }
        self.p_family
            .build(self.support_size)
            .map_err(|e| Error::Config(format!("p_family: {e}")))?;
        let (est, cls): (&[&str], &[&str]) = match (self.task, self.q_known) {
            (Task::Entropy, _) => (ENTROPY_ESTIMATORS, &[]),
            (Task::BayesError, true) => (KNOWN_Q_ESTIMATORS, KNOWN_Q_CLASSIFIERS),
            (Task::BayesError, false) => (TWO_SAMPLE_ESTIMATORS, TWO_SAMPLE_CLASSIFIERS),
        };
        if self.task == Task::BayesError {
            let q = self
                .q_family
                .as_ref()
                .ok_or_else(|| Error::Config("q_family is required for the bayes_error task".into()))?;
            q.build(self.support_size)
                .map_err(|e| Error::Config(format!("q_family: {e}")))?;
        }
        for m in &self.estimators {
            if !est.contains(&m.as_str()) {
                return Err(Error::UnknownMethod(format!("estimator `{m}` (expected one of {est:?})")));
            }
        }
        for m in &self.classifiers {
            if !cls.contains(&m.as_str()) {
                return Err(Error::UnknownMethod(format!("classifier `{m}` (expected one of {cls:?})")));
            }
        }
        Ok(())
    }

    /// Method ids in record order.
    pub fn method_ids(&self) -> Vec<String> {
        self.estimators
            .iter()
            .cloned()
            .chain(self.classifiers.iter().map(|c| match c.as_str() {
                "mle" => "mle_regret".to_string(),
                "tq" => "tq_regret".to_string(),
                "mle_mc" => "mle_regret_mc".to_string(),
                "tq_mc" => "tq_regret_mc".to_string(),
                "scheffe" => "scheffe_regret".to_string(),
                other => other.to_string(),
            }))
            .collect()
    }
}

/// Zipf(0.3) against a known uniform `q`, `S = 1000`, `n` from 10k to 100k.
pub fn fig1_config() -> ExperimentConfig {
    ExperimentConfig {
        experiment_id: "fig1".into(),
        task: Task::BayesError,
        support_size: 1000,
        p_family: Family::Zipf { beta: 0.3 },
        q_family: Some(Family::Uniform),
        q_known: true,
        n_grid: (1..=10).map(|k| k * 10_000).collect(),
        trials: 20,
        master_seed: 7,
        estimators: vec!["plugin".into(), "optimal".into()],
        classifiers: vec!["tq".into(), "mle".into()],
        l1_params: EstimatorParams::l1(),
        entropy_params: EstimatorParams::default(),
        coding_beta: 0.5,
    }
}

/// As [`fig1_config`] with `q` sampled too.
pub fn fig2_config() -> ExperimentConfig {
    ExperimentConfig {
        experiment_id: "fig2".into(),
        q_known: false,
        estimators: vec!["two_sample_plugin".into(), "two_sample_optimal".into()],
        classifiers: vec!["scheffe".into()],
        ..fig1_config()
    }
}

/// Entropy of a uniform source over 1000 symbols, `n` doubling from 500.
pub fn entropy_config() -> ExperimentConfig {
    ExperimentConfig {
        experiment_id: "entropy".into(),
        task: Task::Entropy,
        support_size: 1000,
        p_family: Family::Uniform,
        q_family: None,
        q_known: true,
        n_grid: vec![500, 1000, 2000, 4000, 8000, 16000],
        trials: 50,
        master_seed: 7,
        estimators: vec!["plugin".into(), "optimal".into(), "compression".into()],
        classifiers: vec![],
        l1_params: EstimatorParams::l1(),
        entropy_params: EstimatorParams::default(),
        coding_beta: 0.5,
    }
}

/// Optimal estimator at `n ∈ {2000, 4000, 8000}` and plug-in at
/// `round(n ln n)`, Zipf(0.3) against uniform `q`, `S = 1000`.
pub fn enlargement_config() -> ExperimentConfig {
    let base = [2000u64, 4000, 8000];
    let mut grid: Vec<u64> = base.iter().copied().chain(base.iter().map(|&n| n_ln_n(n))).collect();
    grid.sort_unstable();
    ExperimentConfig {
        experiment_id: "enlargement".into(),
        n_grid: grid,
        trials: 50,
        classifiers: vec![],
        ..fig1_config()
    }
}

/// `round(n ln n)`.
pub fn n_ln_n(n: u64) -> u64 {
    (n as f64 * (n as f64).ln()).round() as u64
}

/// Preset by name.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "fig1" => Ok(fig1_config()),
        "fig2" => Ok(fig2_config()),
        "entropy" => Ok(entropy_config()),
        "enlargement" => Ok(enlargement_config()),
        other => Err(Error::Config(format!(
            "unknown preset `{other}` (expected fig1, fig2, entropy or enlargement)"
        ))),
    }
}

/// Reads and validates a TOML config.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn config_to_toml(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))
}

pub fn save_config(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    fs::write(path, config_to_toml(cfg)?)?;
    Ok(())
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub experiment_id: String,
    pub n: u64,
    pub trial: usize,
    /// Stream index under the master seed.
    pub seed: u64,
    pub method: String,
    pub value: Option<f64>,
    pub truth: Option<f64>,
    pub abs_error: Option<f64>,
    pub regret: Option<f64>,
    pub rate_bound: Option<f64>,
    pub wallclock_ms: Option<f64>,
}

/// A non-fatal condition noticed during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunWarning {
    pub n: u64,
    pub trial: Option<usize>,
    pub method: Option<String>,
    pub kind: String,
    pub message: String,
}

/// Execution knobs that do not change the results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Fill the `wallclock_ms` column. Makes output non-reproducible.
    pub record_wallclock: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<ResultRecord>,
    pub warnings: Vec<RunWarning>,
}

struct Prepared {
    p: FiniteDistribution,
    q: Option<FiniteDistribution>,
    ld: Option<LabeledDistribution>,
    truth: f64,
    /// Exact expected regrets keyed by `(n, method id)`.
    exact: BTreeMap<(u64, String), (f64, f64)>,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let p = cfg.p_family.build(cfg.support_size)?;
    match cfg.task {
        Task::Entropy => {
            let truth = shannon_entropy(&p)?;
            Ok(Prepared {
                p,
                q: None,
                ld: None,
                truth,
                exact: BTreeMap::new(),
            })
        }
        Task::BayesError => {
            let q = cfg
                .q_family
                .as_ref()
                .ok_or_else(|| Error::Config("q_family is required".into()))?
                .build(cfg.support_size)?;
            let ld = LabeledDistribution::balanced(p.clone(), q.clone())?;
            let truth = bayes_error(&ld);
            let mut exact = BTreeMap::new();
            for &n in &cfg.n_grid {
                for c in &cfg.classifiers {
                    let rule = match c.as_str() {
                        "mle" => ThresholdRule::mle(),
                        "tq" => ThresholdRule::tq(),
                        _ => continue,
                    };
                    let rep = expected_regret_exact(&rule, &ld, n)?;
                    exact.insert((n, format!("{c}_regret")), (rep.regret, rep.rate_bound));
                }
            }
            Ok(Prepared {
                p,
                q: Some(q),
                ld: Some(ld),
                truth,
                exact,
            })
        }
    }
}

struct TrialOut {
    records: Vec<ResultRecord>,
    warnings: Vec<RunWarning>,
}

/// Draws one growing sample per trial and evaluates every method at each
/// grid point, so the sample at `n` is a prefix of the sample at the next
/// grid point.
fn run_trial(cfg: &ExperimentConfig, prep: &Prepared, trial: usize, opts: &RunOptions) -> Result<TrialOut> {
    let stream = trial as u64;
    let mut rng = RngSeed::new(cfg.master_seed, stream).rng();
    let s = cfg.support_size;
    let p_sampler = CategoricalSampler::new(&prep.p);
    let q_sampler = match (cfg.task, cfg.q_known, &prep.q) {
        (Task::BayesError, false, Some(q)) => Some(CategoricalSampler::new(q)),
        _ => None,
    };
    let mut p_counts = vec![0u64; s];
    let mut q_counts = vec![0u64; s];
    let mut drawn = 0u64;
    let mut out = TrialOut {
        records: Vec::new(),
        warnings: Vec::new(),
    };
    for &n in &cfg.n_grid {
        for _ in drawn..n {
            p_counts[p_sampler.sample(&mut rng)] += 1;
        }
        if let Some(qs) = &q_sampler {
            for _ in drawn..n {
                q_counts[qs.sample(&mut rng)] += 1;
            }
        }
        drawn = n;
        let counts = EmpiricalCounts::multinomial(p_counts.clone())?;
        let qc = match q_sampler {
            Some(_) => Some(EmpiricalCounts::multinomial(q_counts.clone())?),
            None => None,
        };
        let point = eval_point(cfg, prep, n, trial, &counts, qc.as_ref(), opts)?;
        out.records.extend(point.records);
        out.warnings.extend(point.warnings);
    }
    Ok(out)
}

fn eval_point(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    n: u64,
    trial: usize,
    counts: &EmpiricalCounts,
    q_counts: Option<&EmpiricalCounts>,
    opts: &RunOptions,
) -> Result<TrialOut> {
    let stream = trial as u64;
    let mut out = TrialOut {
        records: Vec::new(),
        warnings: Vec::new(),
    };
    let base = |method: &str| ResultRecord {
        experiment_id: cfg.experiment_id.clone(),
        n,
        trial,
        seed: stream,
        method: method.to_string(),
        value: None,
        truth: None,
        abs_error: None,
        regret: None,
        rate_bound: None,
        wallclock_ms: None,
    };
    for m in &cfg.estimators {
        let start = Instant::now();
        let rep = match (cfg.task, m.as_str()) {
            (Task::Entropy, "plugin") => plugin_entropy(counts)?,
            (Task::Entropy, "optimal") => optimal_entropy_estimator(counts, &cfg.entropy_params)?,
            (Task::Entropy, "compression") => {
                compression_entropy_from_counts(counts, CodingScheme::AddBeta(cfg.coding_beta))?
            }
            (Task::BayesError, "plugin") => plugin_bayes_error(counts, prep.q.as_ref().expect("q prepared"))?,
            (Task::BayesError, "optimal") => {
                optimal_bayes_error(counts, prep.q.as_ref().expect("q prepared"), &cfg.l1_params)?
            }
            (Task::BayesError, "two_sample_plugin" | "two_sample_optimal") => {
                let qc = q_counts.expect("q sample drawn");
                let l = if m == "two_sample_plugin" {
                    two_sample_plugin_l1(counts, qc)?
                } else {
                    two_sample_optimal(counts, qc, &cfg.l1_params)?
                };
                let raw = 0.5 - l.pre_clamp / 4.0;
                crate::estimate::EstimateReport {
                    estimator_id: l.estimator_id,
                    estimate: raw.clamp(0.0, 0.5),
                    pre_clamp: raw,
                    truth: None,
                    abs_error: None,
                }
            }
            (_, other) => return Err(Error::UnknownMethod(other.to_string())),
        };
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let rep = rep.with_truth(prep.truth);
        if rep.was_clamped() {
            out.warnings.push(RunWarning {
                n,
                trial: Some(trial),
                method: Some(m.clone()),
                kind: "clamp".into(),
                message: format!("estimate {:.6e} clamped to {:.6e}", rep.pre_clamp, rep.estimate),
            });
        }
        out.records.push(ResultRecord {
            value: Some(rep.estimate),
            truth: rep.truth,
            abs_error: rep.abs_error,
            wallclock_ms: opts.record_wallclock.then_some(elapsed),
            ..base(m)
        });
    }
    for c in &cfg.classifiers {
        let start = Instant::now();
        let q = prep.q.as_ref().expect("q prepared");
        let ld = prep.ld.as_ref().expect("labeled distribution prepared");
        let (id, regret, rate) = match c.as_str() {
            "mle" | "tq" => {
                let id = format!("{c}_regret");
                let (r, b) = prep.exact[&(n, id.clone())];
                (id, r, b)
            }
            "mle_mc" | "tq_mc" => {
                let rule = if c == "mle_mc" { ThresholdRule::mle() } else { ThresholdRule::tq() };
                let regime = rule.regime(counts, q)?;
                (
                    format!("{}_regret_mc", &c[..c.len() - 3]),
                    envelope_regret(&regime, ld)?,
                    rate_bound(q, n),
                )
            }
            "scheffe" => {
                let regime = two_sample_regime(counts, q_counts.expect("q sample drawn"))?;
                (
                    "scheffe_regret".to_string(),
                    envelope_regret(&regime, ld)?,
                    rate_bound(q, n),
                )
            }
            other => return Err(Error::UnknownMethod(other.to_string())),
        };
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        out.records.push(ResultRecord {
            value: Some(regret),
            regret: Some(regret),
            rate_bound: Some(rate),
            wallclock_ms: opts.record_wallclock.then_some(elapsed),
            ..base(&id)
        });
    }
    Ok(out)
}

/// Runs every `(n, trial)` pair of the config.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    let prep = prepare(cfg)?;
    let work = || -> Result<Vec<TrialOut>> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, &prep, t, opts))
            .collect()
    };
    let outs = match opts.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let mut warnings = Vec::new();
    if let (Task::BayesError, Some(q)) = (cfg.task, &prep.q) {
        for &n in &cfg.n_grid {
            if let Some(msg) = regime_condition_warning(q, n) {
                warnings.push(RunWarning {
                    n,
                    trial: None,
                    method: None,
                    kind: "regime".into(),
                    message: msg,
                });
            }
        }
    }
    let order = cfg.method_ids();
    let mut records = Vec::with_capacity(cfg.trials * cfg.n_grid.len() * order.len());
    for o in outs {
        records.extend(o.records);
        warnings.extend(o.warnings);
    }
    let rank = |m: &str| order.iter().position(|x| x == m).unwrap_or(usize::MAX);
    records.sort_by_key(|r| (r.n, r.trial, rank(&r.method)));
    Ok(RunOutput { records, warnings })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// Writes records with the exact header; floats carry 17 significant digits.
pub fn write_csv<W: std::io::Write>(records: &[ResultRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CSV_HEADER.split(','))?;
    for r in records {
        wtr.write_record([
            r.experiment_id.clone(),
            r.n.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.method.clone(),
            fmt_opt(r.value),
            fmt_opt(r.truth),
            fmt_opt(r.abs_error),
            fmt_opt(r.regret),
            fmt_opt(r.rate_bound),
            fmt_opt(r.wallclock_ms),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[ResultRecord], path: &Path) -> Result<()> {
    write_csv(records, fs::File::create(path)?)
}

/// Parses a CSV produced by [`write_csv`].
pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<ResultRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header `{}`", header.join(","))));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let field = |k: usize| row.get(k).unwrap_or("");
        let int = |k: usize| -> Result<u64> {
            field(k)
                .parse()
                .map_err(|_| Error::Config(format!("line {line}: column {} is not an integer", k + 1)))
        };
        let opt = |k: usize| -> Result<Option<f64>> {
            let s = field(k);
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("line {line}: column {} is not a number", k + 1)))
            }
        };
        out.push(ResultRecord {
            experiment_id: field(0).to_string(),
            n: int(1)?,
            trial: int(2)? as usize,
            seed: int(3)?,
            method: field(4).to_string(),
            value: opt(5)?,
            truth: opt(6)?,
            abs_error: opt(7)?,
            regret: opt(8)?,
            rate_bound: opt(9)?,
            wallclock_ms: opt(10)?,
        });
    }
    Ok(out)
}

pub fn load_csv(path: &Path) -> Result<Vec<ResultRecord>> {
    read_csv(fs::File::open(path)?)
}

/// Writes warnings as `n,trial,method,kind,message`.
pub fn write_warnings<W: std::io::Write>(warnings: &[RunWarning], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["n", "trial", "method", "kind", "message"])?;
    for x in warnings {
        wtr.write_record([
            x.n.to_string(),
            x.trial.map(|t| t.to_string()).unwrap_or_default(),
            x.method.clone().unwrap_or_default(),
            x.kind.clone(),
            x.message.clone(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// The figure a record contributes to a summary: its absolute error if
/// present, otherwise its regret.
fn error_of(r: &ResultRecord) -> Option<f64> {
    r.abs_error.or(r.regret)
}

/// Per-`(n, method)` mean of [`ResultRecord`] errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub n: u64,
    pub method: String,
    pub trials: usize,
    pub mean_error: f64,
    pub stderr: f64,
}

/// Means per `(n, method)`, ordered by `n` then first appearance of the method.
pub fn summarize(records: &[ResultRecord]) -> Vec<Summary> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<(u64, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        let idx = match order.iter().position(|m| m == &r.method) {
            Some(i) => i,
            None => {
                order.push(r.method.clone());
                order.len() - 1
            }
        };
        if let Some(e) = error_of(r) {
            groups.entry((r.n, idx)).or_default().push(e);
        }
    }
    groups
        .into_iter()
        .map(|((n, idx), v)| {
            let (mean, se) = mean_stderr(&v);
            Summary {
                n,
                method: order[idx].clone(),
                trials: v.len(),
                mean_error: mean,
                stderr: se,
            }
        })
        .collect()
}

/// Mean error of one method per `n`.
pub fn mean_error_by_n(records: &[ResultRecord], method: &str) -> BTreeMap<u64, (f64, f64, usize)> {
    summarize(records)
        .into_iter()
        .filter(|s| s.method == method)
        .map(|s| (s.n, (s.mean_error, s.stderr, s.trials)))
        .collect()
}

/// Least-squares line through `(ln n, ln mean error)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub method: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl RateFit {
    /// Fitted mean error at `n`.
    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept + self.slope * n.ln()).exp()
    }
}

/// Fits `ln(mean error) = a + b ln n` for one method. Needs at least four
/// distinct `n` with five or more trials each.
pub fn fit_rate_slope(records: &[ResultRecord], method: &str) -> Result<RateFit> {
    let by_n = mean_error_by_n(records, method);
    let pts: Vec<(f64, f64)> = by_n
        .iter()
        .filter(|(_, &(_, _, t))| t >= 5)
        .map(|(&n, &(m, _, _))| (n as f64, m))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "method `{method}` has {} grid points with >= 5 trials; need 4",
            pts.len()
        )));
    }
    if pts.iter().any(|&(_, m)| !(m > 0.0)) {
        return Err(Error::InsufficientData(format!(
            "method `{method}` has a zero mean error; log-log fit undefined"
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON * ys.len() as f64 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        method: method.to_string(),
        slope,
        intercept,
        r_squared,
        points: pts.len(),
    })
}

/// One row of an enlargement table.
#[derive(Debug, Clone, PartialEq)]
pub struct EnlargementRow {
    pub n: u64,
    pub m: u64,
    pub optimal_error: f64,
    pub plugin_error: f64,
    /// `optimal_error / plugin_error`; 1 when both are zero.
    pub ratio: f64,
    /// The plug-in error at `m` came from the log-log fit.
    pub interpolated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnlargementReport {
    pub rows: Vec<EnlargementRow>,
    /// `max |ratio - 1|`.
    pub max_deviation: f64,
}

/// Compares the optimal method at `n` with the plug-in method at
/// `round(n ln n)`.
pub fn enlargement_check(records: &[ResultRecord], optimal: &str, plugin: &str, ns: &[u64]) -> Result<EnlargementReport> {
    enlargement_check_with(records, optimal, plugin, ns, n_ln_n)
}

/// As [`enlargement_check`] with a custom `m(n)`.
pub fn enlargement_check_with(
    records: &[ResultRecord],
    optimal: &str,
    plugin: &str,
    ns: &[u64],
    m_of: impl Fn(u64) -> u64,
) -> Result<EnlargementReport> {
    let opt = mean_error_by_n(records, optimal);
    let plug = mean_error_by_n(records, plugin);
    let mut fit: Option<RateFit> = None;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let &(oe, _, _) = opt
            .get(&n)
            .ok_or_else(|| Error::InsufficientData(format!("no `{optimal}` records at n = {n}")))?;
        let m = m_of(n);
        let (pe, interpolated) = match plug.get(&m) {
            Some(&(e, _, _)) => (e, false),
            None => {
                if fit.is_none() {
                    fit = Some(fit_rate_slope(records, plugin)?);
                }
                (fit.as_ref().expect("fit computed").predict(m as f64), true)
            }
        };
        let ratio = if oe == 0.0 && pe == 0.0 { 1.0 } else { oe / pe };
        rows.push(EnlargementRow {
            n,
            m,
            optimal_error: oe,
            plugin_error: pe,
            ratio,
            interpolated,
        });
    }
    let max_deviation = rows.iter().map(|r| (r.ratio - 1.0).abs()).fold(0.0, f64::max);
    Ok(EnlargementReport { rows, max_deviation })
}
