//! Exact probability kernels and numerical checks.
//!
//! Binomial and Poisson mass functions use Loader's saddle-point form
//! (`stirlerr` plus the deviance `bd0`), which keeps relative error near
//! machine precision even for `n` in the millions. CDFs sum outward from the
//! requested point toward the tail, so every summed term shrinks.

use std::f64::consts::PI;

use rand::Rng;

use crate::classify::ThresholdRule;
use crate::dist::{FiniteDistribution, RngSeed};
use crate::envelope::l1;
use crate::error::{Error, Result};
use crate::sum::{kahan, KahanSum};

/// Largest trial count / rate accepted by the exact kernels.
pub const MAX_EXACT: f64 = 1e12;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln(n!) - ln(sqrt(2 pi n) (n/e)^n)`, the Stirling remainder.
pub fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        let nf = n as f64;
        let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
        if n == 0 {
            return 0.0;
        }
        return ln_fact - (nf + 0.5) * nf.ln() + nf - LN_SQRT_2PI;
    }
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x ln(x / np) + np - x`, accurate when `x ≈ np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        let mut j = 1.0;
        loop {
            ej *= v;
            let s1 = s + ej / (2.0 * j + 1.0);
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1.0;
        }
    }
    x * (x / np).ln() + np - x
}

/// `P(Bin(n, p) = k)`.
pub fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let q = 1.0 - p;
    let nf = n as f64;
    if k == 0 {
        return (nf * (-p).ln_1p()).exp();
    }
    if k == n {
        return (nf * p.ln()).exp();
    }
    let kf = k as f64;
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * p) - bd0(nf - kf, nf * q);
    let lf = (2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `P(Poi(lambda) = k)`.
pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if k == 0 {
        return (-lambda).exp();
    }
    let kf = k as f64;
    (-stirlerr(k) - bd0(kf, lambda)).exp() / (2.0 * PI * kf).sqrt()
}

fn check_binomial(n: u64, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("binomial p = {p} outside [0, 1]")));
    }
    if n as f64 > MAX_EXACT {
        return Err(Error::invalid(format!("binomial n = {n} beyond exact range")));
    }
    Ok(())
}

fn check_poisson(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() || lambda > MAX_EXACT {
        return Err(Error::invalid(format!("poisson rate {lambda} outside [0, {MAX_EXACT:e}]")));
    }
    Ok(())
}

/// Sums a unimodal pmf starting at `start` and walking in one direction
/// while terms stay relevant. `step` returns the next index and the ratio
/// `pmf(next) / pmf(current)`; `exact` recomputes a term from scratch.
fn tail_sum(start: u64, exact: impl Fn(u64) -> f64, step: impl Fn(u64) -> Option<(u64, f64)>) -> f64 {
    let mut j = start;
    let mut term = exact(j);
    let mut acc = KahanSum::new();
    let mut steps = 0u32;
    loop {
        acc.add(term);
        let Some((next, ratio)) = step(j) else { break };
        j = next;
        steps += 1;
        // refresh periodically so ratio rounding cannot accumulate
        term = if steps.is_multiple_of(64) { exact(j) } else { term * ratio };
        if term == 0.0 || term < acc.value() * 1e-18 {
            break;
        }
    }
    acc.value()
}

/// `P(Bin(n, p) <= k)`.
pub fn binomial_cdf(n: u64, p: f64, k: u64) -> Result<f64> {
    check_binomial(n, p)?;
    if k >= n || p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let mode = ((n as f64 + 1.0) * p).floor() as u64;
    let odds = p / (1.0 - p);
    if k < mode {
        Ok(tail_sum(
            k,
            |j| binomial_pmf(n, p, j),
            |j| (j > 0).then(|| (j - 1, j as f64 / ((n - j + 1) as f64 * odds))),
        ))
    } else {
        let upper = tail_sum(
            k + 1,
            |j| binomial_pmf(n, p, j),
            |j| (j < n).then(|| (j + 1, (n - j) as f64 / (j + 1) as f64 * odds)),
        );
        Ok((1.0 - upper).max(0.0))
    }
}

/// `P(Bin(n, p) > k)`, computed without cancellation when it is small.
pub fn binomial_sf(n: u64, p: f64, k: u64) -> Result<f64> {
    check_binomial(n, p)?;
    if k >= n || p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let mode = ((n as f64 + 1.0) * p).floor() as u64;
    let odds = p / (1.0 - p);
    if k >= mode {
        Ok(tail_sum(
            k + 1,
            |j| binomial_pmf(n, p, j),
            |j| (j < n).then(|| (j + 1, (n - j) as f64 / (j + 1) as f64 * odds)),
        ))
    } else {
        Ok((1.0 - binomial_cdf(n, p, k)?).max(0.0))
    }
}

/// `P(Poi(lambda) <= k)`.
pub fn poisson_cdf(lambda: f64, k: u64) -> Result<f64> {
    check_poisson(lambda)?;
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let mode = lambda.floor() as u64;
    if k < mode {
        Ok(tail_sum(
            k,
            |j| poisson_pmf(lambda, j),
            |j| (j > 0).then(|| (j - 1, j as f64 / lambda)),
        ))
    } else {
        Ok((1.0 - poisson_sf(lambda, k)?).max(0.0))
    }
}

/// `P(Poi(lambda) > k)`.
pub fn poisson_sf(lambda: f64, k: u64) -> Result<f64> {
    check_poisson(lambda)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let mode = lambda.floor() as u64;
    if k >= mode {
        Ok(tail_sum(
            k + 1,
            |j| poisson_pmf(lambda, j),
            |j| Some((j + 1, lambda / (j + 1) as f64)),
        ))
    } else {
        Ok((1.0 - poisson_cdf(lambda, k)?).max(0.0))
    }
}

/// Count law used by the tail checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountLaw {
    Poisson,
    /// `Bin(n, lambda / n)`.
    Binomial { n: u64 },
}

impl CountLaw {
    fn cdf(&self, lambda: f64, k: u64) -> Result<f64> {
        match *self {
            CountLaw::Poisson => poisson_cdf(lambda, k),
            CountLaw::Binomial { n } => binomial_cdf(n, lambda / n as f64, k),
        }
    }

    /// `P(X >= x)` for real `x`.
    fn at_least(&self, lambda: f64, x: f64) -> Result<f64> {
        // tolerate representation error in products like 1.1 * 10
        let k = (x - 1e-9).ceil();
        if k <= 0.0 {
            return Ok(1.0);
        }
        Ok((1.0 - self.cdf(lambda, k as u64 - 1)?).max(0.0))
    }

    /// `P(X <= x)` for real `x`.
    fn at_most(&self, lambda: f64, x: f64) -> Result<f64> {
        let k = (x + 1e-9).floor();
        if k < 0.0 {
            return Ok(0.0);
        }
        self.cdf(lambda, k as u64)
    }

    fn label(&self) -> String {
        match self {
            CountLaw::Poisson => "poisson".into(),
            CountLaw::Binomial { n } => format!("binomial(n={n})"),
        }
    }
}

/// Grid for the tail-bound checks.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaGrid {
    pub lambdas: Vec<f64>,
    pub ns: Vec<u64>,
    pub deltas: Vec<f64>,
}

impl Default for LemmaGrid {
    fn default() -> Self {
        Self {
            lambdas: vec![0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
            ns: vec![30, 100, 1000],
            deltas: vec![0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0],
        }
    }
}

impl LemmaGrid {
    /// Parses `lambda=0.5,1,10;n=30,100;delta=0.5,1`. Omitted keys keep
    /// their defaults.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut g = Self::default();
        for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, vals) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("grid entry `{part}` is not key=values")))?;
            let nums = |v: &str| -> Result<Vec<f64>> {
                v.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::invalid(format!("bad number `{x}` in grid key {key}")))
                    })
                    .collect()
            };
            match key.trim() {
                "lambda" => g.lambdas = nums(vals)?,
                "delta" => g.deltas = nums(vals)?,
                "n" => {
                    g.ns = nums(vals)?
                        .into_iter()
                        .map(|x| {
                            if x >= 1.0 && x.fract() == 0.0 {
                                Ok(x as u64)
                            } else {
                                Err(Error::invalid(format!("n = {x} must be a positive integer")))
                            }
                        })
                        .collect::<Result<_>>()?
                }
                other => return Err(Error::invalid(format!("unknown grid key `{other}`"))),
            }
        }
        if g.lambdas.iter().any(|&l| !(l >= 0.0 && l.is_finite())) || g.deltas.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::invalid("lambdas must be >= 0 and deltas > 0"));
        }
        Ok(g)
    }

    fn describe(&self) -> String {
        format!("lambda={:?} n={:?} delta={:?}", self.lambdas, self.ns, self.deltas)
    }

    fn laws(&self) -> Vec<CountLaw> {
        std::iter::once(CountLaw::Poisson)
            .chain(self.ns.iter().map(|&n| CountLaw::Binomial { n }))
            .collect()
    }
}

/// Outcome of a tail-inequality sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheckReport {
    pub lemma: u8,
    pub grid: String,
    pub points: usize,
    /// Largest LHS / RHS over the first statement.
    pub max_ratio_m1: f64,
    /// Largest LHS / RHS over the second statement.
    pub max_ratio_m2: f64,
    /// Ratios above this fail the check.
    pub guard: f64,
    pub worst_m1: String,
    pub worst_m2: String,
    pub pass: bool,
}

/// Guard on the measured constants of the Poisson-difference inequalities.
pub const LEMMA8_GUARD: f64 = 5.0;

/// Chernoff-type tail bounds for Poisson and `Bin(n, lambda/n)`:
/// `P(X >= (1+d) lambda) <= max(e^{-d^2 lambda/3}, e^{-d lambda/3})` and
/// `P(X <= (1-d) lambda) <= e^{-d^2 lambda/2}`.
pub fn verify_poisson_tail(grid: &LemmaGrid) -> Result<LemmaCheckReport> {
    let mut points = 0;
    let (mut m1, mut m2) = (0.0f64, 0.0f64);
    let (mut w1, mut w2) = (String::new(), String::new());
    for law in grid.laws() {
        for &lambda in &grid.lambdas {
            if lambda <= 0.0 {
                continue;
            }
            if let CountLaw::Binomial { n } = law {
                if lambda > n as f64 {
                    continue;
                }
            }
            for &d in &grid.deltas {
                points += 1;
                let upper = law.at_least(lambda, (1.0 + d) * lambda)?;
                let ub = (-d * d * lambda / 3.0).exp().max((-d * lambda / 3.0).exp());
                let r1 = upper / ub;
                if r1 > m1 {
                    m1 = r1;
                    w1 = format!("{} lambda={lambda} delta={d}", law.label());
                }
                let lower = law.at_most(lambda, (1.0 - d) * lambda)?;
                let lb = (-d * d * lambda / 2.0).exp();
                let r2 = lower / lb;
                if r2 > m2 {
                    m2 = r2;
                    w2 = format!("{} lambda={lambda} delta={d}", law.label());
                }
            }
        }
    }
    let guard = 1.0;
    Ok(LemmaCheckReport {
        lemma: 6,
        grid: grid.describe(),
        points,
        max_ratio_m1: m1,
        max_ratio_m2: m2,
        guard,
        worst_m1: w1,
        worst_m2: w2,
        pass: m1 <= guard + 1e-12 && m2 <= guard + 1e-12,
    })
}

/// Measures the constants in
/// `(l2 - l1) P(X >= l2) <= M1 min(l2, sqrt(l2))` for `0 <= l1 <= l2 <= n` and
/// `(l1 - l2) P(X <= l2) <= M2 sqrt(l2)` for `l1 >= l2 >= 1`, with `X` Poisson
/// or binomial of mean `l1`.
pub fn verify_poisson_difference(grid: &LemmaGrid) -> Result<LemmaCheckReport> {
    let mut lambdas = grid.lambdas.clone();
    if !lambdas.contains(&0.0) {
        lambdas.push(0.0);
    }
    lambdas.sort_by(f64::total_cmp);
    let mut points = 0;
    let (mut m1, mut m2) = (0.0f64, 0.0f64);
    let (mut w1, mut w2) = (String::new(), String::new());
    for law in grid.laws() {
        let cap = match law {
            CountLaw::Poisson => f64::INFINITY,
            CountLaw::Binomial { n } => n as f64,
        };
        for &l1v in &lambdas {
            for &l2v in &lambdas {
                if l1v > cap || l2v > cap {
                    continue;
                }
                if l2v >= l1v && l2v > 0.0 {
                    points += 1;
                    let lhs = (l2v - l1v) * law.at_least(l1v, l2v)?;
                    let r = lhs / l2v.min(l2v.sqrt());
                    if r > m1 {
                        m1 = r;
                        w1 = format!("{} l1={l1v} l2={l2v}", law.label());
                    }
                }
                if l1v >= l2v && l2v >= 1.0 {
                    points += 1;
                    let lhs = (l1v - l2v) * law.at_most(l1v, l2v)?;
                    let r = lhs / l2v.sqrt();
                    if r > m2 {
                        m2 = r;
                        w2 = format!("{} l1={l1v} l2={l2v}", law.label());
                    }
                }
            }
        }
    }
    Ok(LemmaCheckReport {
        lemma: 8,
        grid: grid.describe(),
        points,
        max_ratio_m1: m1,
        max_ratio_m2: m2,
        guard: LEMMA8_GUARD,
        worst_m1: w1,
        worst_m2: w2,
        pass: m1 <= LEMMA8_GUARD && m2 <= LEMMA8_GUARD,
    })
}

/// Upper limit on the perturbation scale `c`, `sqrt(e) / 4`.
pub fn lower_bound_c_max() -> f64 {
    std::f64::consts::E.sqrt() / 4.0
}

/// Two-point-per-symbol prior around a known `q`:
/// `R_tau(i) = q_i + tau_i c w_i` with `w_i = q_i` if `q_i <= 1/n`, else
/// `sqrt(q_i / n)`, and `tau` uniform on `{-1, +1}^S`. The vectors are
/// generally not normalized.
#[derive(Debug, Clone)]
pub struct LowerBoundPrior {
    q: FiniteDistribution,
    n: u64,
    c: f64,
    widths: Vec<f64>,
}

impl LowerBoundPrior {
    pub fn new(q: FiniteDistribution, n: u64, c: f64) -> Result<Self> {
        q.require_strict()?;
        if !(c > 0.0 && c <= lower_bound_c_max()) {
            return Err(Error::invalid(format!(
                "c = {c} outside (0, sqrt(e)/4 = {:.6}]",
                lower_bound_c_max()
            )));
        }
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        let nf = n as f64;
        let widths = q
            .probs()
            .iter()
            .map(|&qi| if qi <= 1.0 / nf { qi } else { (qi / nf).sqrt() })
            .collect();
        Ok(Self { q, n, c, widths })
    }

    /// Default scale 0.4.
    pub fn with_default_c(q: FiniteDistribution, n: u64) -> Result<Self> {
        Self::new(q, n, 0.4)
    }

    pub fn q(&self) -> &FiniteDistribution {
        &self.q
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `min(q_i, sqrt(q_i / n))` per symbol.
    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// `Σ min(q_i, sqrt(q_i / n))`.
    pub fn rate(&self) -> f64 {
        kahan(self.widths.iter().copied())
    }

    /// `R_tau` for signs `tau` (`true` = +1).
    pub fn r_tau(&self, tau: &[bool]) -> Vec<f64> {
        self.q
            .probs()
            .iter()
            .zip(&self.widths)
            .zip(tau)
            .map(|((&qi, &w), &t)| if t { qi + self.c * w } else { qi - self.c * w })
            .collect()
    }

    /// `L1(R_tau, q)`.
    pub fn separation(&self, tau: &[bool]) -> f64 {
        l1(&self.r_tau(tau), self.q.probs())
    }

    /// `(c / 8) Σ min(q_i, sqrt(q_i / n))`.
    pub fn bayes_lower_bound(&self) -> f64 {
        self.c / 8.0 * self.rate()
    }
}

/// How to average over the sign vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixtureMode {
    /// Every `tau` in `{-1, +1}^S`; requires `S <= 20`.
    Exhaustive,
    /// `draws` sign vectors sampled uniformly.
    Sampled { draws: usize, seed: RngSeed },
}

/// Prior-averaged exact regret of one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureReport {
    pub average_regret: f64,
    /// Monte Carlo standard error over `tau`; zero when exhaustive.
    pub stderr: f64,
    pub lower_bound: f64,
    pub taus_evaluated: u64,
}

impl FixtureReport {
    pub fn respects_bound(&self) -> bool {
        self.average_regret >= self.lower_bound - 3.0 * self.stderr
    }
}

/// Averages the exact Poissonized expected regret of `rule` over the prior.
///
/// Counts are independent `Poi(n R_tau(i))`, and the regret is
/// `L1(R_tau, q)/4 - (R_tau(Â) - q(Â))/2` on the unnormalized vector.
pub fn bayes_regret_lower_fixture(
    prior: &LowerBoundPrior,
    rule: &ThresholdRule,
    mode: FixtureMode,
) -> Result<FixtureReport> {
    let s = prior.q.support_size();
    let n = prior.n;
    let nf = n as f64;
    // per symbol and sign: (|d| / 4 - d P(i ∈ Â) / 2), d = R_tau(i) - q_i
    let mut contrib = Vec::with_capacity(s);
    for i in 0..s {
        let qi = prior.q.probs()[i];
        let mut pair = [0.0; 2];
        for (slot, sign) in pair.iter_mut().zip([-1.0, 1.0]) {
            let ri = qi + sign * prior.c * prior.widths[i];
            let d = ri - qi;
            let p_in = rule.membership_probability_poisson(i, qi, n, nf * ri)?;
            *slot = d.abs() / 4.0 - d * p_in / 2.0;
        }
        contrib.push(pair);
    }
    let total_for = |tau: &dyn Fn(usize) -> bool| kahan((0..s).map(|i| contrib[i][tau(i) as usize]));

    match mode {
        FixtureMode::Exhaustive => {
            if s > 20 {
                return Err(Error::BudgetExceeded(format!(
                    "exhaustive prior average needs S <= 20, got {s}"
                )));
            }
            let count = 1u64 << s;
            let mut acc = KahanSum::new();
            for bits in 0..count {
                acc.add(total_for(&|i| (bits >> i) & 1 == 1));
            }
            Ok(FixtureReport {
                average_regret: acc.value() / count as f64,
                stderr: 0.0,
                lower_bound: prior.bayes_lower_bound(),
                taus_evaluated: count,
            })
        }
        FixtureMode::Sampled { draws, seed } => {
            if draws < 2 {
                return Err(Error::invalid("need at least two sampled sign vectors"));
            }
            let mut rng = seed.rng();
            let vals: Vec<f64> = (0..draws)
                .map(|_| {
                    let tau: Vec<bool> = (0..s).map(|_| rng.random::<bool>()).collect();
                    total_for(&|i| tau[i])
                })
                .collect();
            let (mean, se) = mean_stderr(&vals);
            Ok(FixtureReport {
                average_regret: mean,
                stderr: se,
                lower_bound: prior.bayes_lower_bound(),
                taus_evaluated: draws as u64,
            })
        }
    }
}

/// Sample mean and its standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = kahan(xs.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = kahan(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stirlerr_continuity_at_table_edge() {
        // small-n branch uses exact factorials; both sides should agree with
        // the asymptotic series to high accuracy
        for n in [14u64, 15, 16, 17] {
            let nf = n as f64;
            let series = 1.0 / (12.0 * nf) - 1.0 / (360.0 * nf.powi(3)) + 1.0 / (1260.0 * nf.powi(5));
            assert!((stirlerr(n) - series).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn cdf_trivial_values() {
        assert_eq!(binomial_cdf(10, 0.0, 0).unwrap(), 1.0);
        assert_eq!(binomial_cdf(7, 0.3, 7).unwrap(), 1.0);
        assert_eq!(binomial_cdf(7, 1.0, 6).unwrap(), 0.0);
        assert!((binomial_cdf(10, 0.5, 5).unwrap() - 0.623046875).abs() < 1e-15);
        assert!((poisson_cdf(1.0, 0).unwrap() - (-1.0f64).exp()).abs() < 1e-16);
        assert!(binomial_cdf(10, 1.5, 3).is_err());
        assert!(poisson_cdf(-1.0, 3).is_err());
        assert!(poisson_cdf(f64::INFINITY, 3).is_err());
    }

    #[test]
    fn sf_complements_cdf() {
        for &(n, p, k) in &[(1000u64, 0.001, 0u64), (50, 0.3, 20), (200, 0.9, 150), (5, 0.5, 2)] {
            let c = binomial_cdf(n, p, k).unwrap();
            let s = binomial_sf(n, p, k).unwrap();
            assert!((c + s - 1.0).abs() < 1e-14);
        }
        for &(l, k) in &[(0.3, 0u64), (10.0, 20), (100.0, 80), (1e4, 10_100)] {
            let c = poisson_cdf(l, k).unwrap();
            let s = poisson_sf(l, k).unwrap();
            assert!((c + s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn lemma6_spot_checks() {
        let g = LemmaGrid {
            lambdas: vec![10.0],
            ns: vec![],
            deltas: vec![1.0],
        };
        let rep = verify_poisson_tail(&g).unwrap();
        assert!(rep.pass);
        // delta -> 0: bound tends to 1 and holds trivially
        let g = LemmaGrid {
            lambdas: vec![3.0],
            ns: vec![],
            deltas: vec![1e-9],
        };
        assert!(verify_poisson_tail(&g).unwrap().pass);
        let g = LemmaGrid {
            lambdas: vec![100.0],
            ns: vec![1000],
            deltas: vec![0.5],
        };
        assert!(verify_poisson_tail(&g).unwrap().pass);
    }

    #[test]
    fn lemma8_spot_checks() {
        let g = LemmaGrid {
            lambdas: vec![0.5, 10.0],
            ns: vec![100],
            deltas: vec![1.0],
        };
        let rep = verify_poisson_difference(&g).unwrap();
        assert!(rep.pass && rep.max_ratio_m1 <= 5.0);
        let g = LemmaGrid {
            lambdas: vec![1.0, 20.0],
            ns: vec![],
            deltas: vec![1.0],
        };
        let rep = verify_poisson_difference(&g).unwrap();
        assert!(rep.pass && rep.max_ratio_m2 <= 5.0);
    }

    #[test]
    fn grid_parse() {
        let g = LemmaGrid::parse("lambda=1,2.5; n=30").unwrap();
        assert_eq!(g.lambdas, vec![1.0, 2.5]);
        assert_eq!(g.ns, vec![30]);
        assert_eq!(g.deltas, LemmaGrid::default().deltas);
        assert!(LemmaGrid::parse("mu=1").is_err());
        assert!(LemmaGrid::parse("n=2.5").is_err());
        assert!(LemmaGrid::parse("lambda").is_err());
    }

    #[test]
    fn prior_rejects_large_c() {
        let q = crate::dist::make_uniform(4).unwrap();
        assert!(LowerBoundPrior::new(q.clone(), 100, 0.5).is_err());
        assert!(LowerBoundPrior::new(q.clone(), 100, 0.0).is_err());
        assert!(LowerBoundPrior::new(q, 100, lower_bound_c_max()).is_ok());
    }
}
