//! Estimators for the L1 distance, the Bayes error and the entropy.
//!
//! Each quantity has a plug-in estimator and a polynomial one. The polynomial
//! estimators split symbols into a smooth regime, where the plug-in term is
//! used, and a non-smooth regime near the singularity of the functional,
//! where the best uniform polynomial approximation of the functional is
//! estimated without bias from the counts.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};

use crate::classify::DecisionRegime;
use crate::dist::{empirical_distribution, same_support, EmpiricalCounts, FiniteDistribution, SamplingMode};
use crate::envelope::{entropy_bits, entropy_term, l1};
use crate::error::{Error, Result};
use crate::polyapprox::{remez_with, PolyApprox, RemezOptions, MAX_DEGREE};
use crate::sum::KahanSum;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Result of one estimator call.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimator_id: String,
    pub estimate: f64,
    /// Value before range clamping.
    pub pre_clamp: f64,
    pub truth: Option<f64>,
    pub abs_error: Option<f64>,
}

impl EstimateReport {
    fn clamped(estimator_id: &str, raw: f64, lo: f64, hi: f64) -> Self {
        Self {
            estimator_id: estimator_id.to_string(),
            estimate: raw.clamp(lo, hi),
            pre_clamp: raw,
            truth: None,
            abs_error: None,
        }
    }

    /// Attaches the true value and the absolute error.
    pub fn with_truth(mut self, truth: f64) -> Self {
        self.truth = Some(truth);
        self.abs_error = Some((self.estimate - truth).abs());
        self
    }

    pub fn was_clamped(&self) -> bool {
        self.estimate != self.pre_clamp
    }
}

/// Sequential coding distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CodingScheme {
    /// `(count_x + beta) / (i - 1 + S beta)`.
    AddBeta(f64),
}

impl Default for CodingScheme {
    fn default() -> Self {
        CodingScheme::AddBeta(0.5)
    }
}

impl CodingScheme {
    pub fn beta(&self) -> f64 {
        match *self {
            CodingScheme::AddBeta(b) => b,
        }
    }

    fn validate(&self) -> Result<f64> {
        let b = self.beta();
        if b > 0.0 && b.is_finite() {
            Ok(b)
        } else {
            Err(Error::invalid(format!("smoothing beta = {b} must be positive")))
        }
    }
}

/// Tuning of the polynomial estimators.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorParams {
    /// Threshold multiplier between the polynomial and plug-in regimes.
    pub c1: f64,
    /// Approximation-window multiplier.
    pub c2: f64,
    /// Degree is `ceil(degree_factor * ln n)`.
    pub degree_factor: f64,
    /// Use one half of the sample to pick the regime and the other to
    /// estimate.
    pub split: bool,
    /// Seed for the random split.
    pub split_seed: u64,
    /// L1 only: additive `ln n / n` term of the window radius.
    pub radius_floor: f64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            c1: 2.0,
            c2: 4.0,
            degree_factor: 1.5,
            split: false,
            split_seed: 0,
            radius_floor: 0.1,
        }
    }
}

impl EstimatorParams {
    /// Defaults tuned for the L1 estimators: `c1 = 1.5`, `c2 = 3`.
    pub fn l1() -> Self {
        Self {
            c1: 1.5,
            c2: 3.0,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.degree_factor > 0.0 && self.radius_floor > 0.0) {
            return Err(Error::invalid("c1, c2, degree_factor and radius_floor must be positive"));
        }
        Ok(())
    }

    pub fn degree(&self, n: u64) -> usize {
        let d = (self.degree_factor * (n as f64).ln()).ceil() as usize;
        d.clamp(1, MAX_DEGREE).min(n as usize)
    }
}

fn require_n(n: u64) -> Result<()> {
    if n < 4 {
        return Err(Error::invalid(format!("n = {n}; the polynomial estimators need n >= 4")));
    }
    Ok(())
}

/// Unbiased estimates of `((p - c) / s)^k` for `k = 0..=kmax`, from a single
/// count `x`. Under multinomial sampling `x ~ Bin(n, p)` and `kmax <= n` is
/// required; under Poissonized sampling `x ~ Poi(n p)`.
pub fn centered_power_estimates(x: u64, n: u64, mode: SamplingMode, c: f64, s: f64, kmax: usize) -> Vec<f64> {
    let xf = x as f64;
    let nf = n as f64;
    let mut f = Vec::with_capacity(kmax + 1);
    f.push(1.0);
    if kmax == 0 {
        return f;
    }
    match mode {
        SamplingMode::Multinomial => {
            f.push((xf / nf - c) / s);
            for k in 1..kmax.min(n as usize) {
                let kf = k as f64;
                let next = ((xf - nf * c - (1.0 - 2.0 * c) * kf) * f[k] - c * (1.0 - c) * kf * f[k - 1] / s)
                    / ((nf - kf) * s);
                f.push(next);
            }
        }
        SamplingMode::Poissonized => {
            let a = nf * c;
            let ns = nf * s;
            f.push((xf - a) / ns);
            for k in 1..kmax {
                let kf = k as f64;
                let next = ((xf - a - kf) * f[k] - a * kf * f[k - 1] / ns) / ns;
                f.push(next);
            }
        }
    }
    f
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Target {
    /// `|t - t0|` on `[-1, 1]`, `t0` stored in units of 1e-4.
    AbsKink(i64),
    /// `u lg(1/u)` on `[0, 1]`.
    EntropyUnit,
}

/// Normalized-monomial coefficients of a best approximation.
type Coeffs = Arc<Vec<f64>>;

fn approx_cache() -> &'static Mutex<HashMap<(Target, usize), Coeffs>> {
    static CACHE: OnceLock<Mutex<HashMap<(Target, usize), Coeffs>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn build(target: Target, degree: usize) -> Result<PolyApprox> {
    match target {
        Target::AbsKink(k) => {
            let t0 = k as f64 * 1e-4;
            let opts = RemezOptions {
                breakpoints: vec![t0],
                ..RemezOptions::default()
            };
            remez_with(|t| (t - t0).abs(), -1.0, 1.0, degree, &opts)
        }
        Target::EntropyUnit => remez_with(entropy_unit, 0.0, 1.0, degree, &RemezOptions::default()),
    }
}

fn entropy_unit(u: f64) -> f64 {
    if u > 0.0 {
        -u * u.log2()
    } else {
        0.0
    }
}

fn cached_coeffs(target: Target, degree: usize) -> Result<Coeffs> {
    if let Some(c) = approx_cache().lock().expect("cache poisoned").get(&(target, degree)) {
        return Ok(c.clone());
    }
    let p = build(target, degree)?;
    let coeffs = Arc::new(p.to_normalized_monomial());
    approx_cache()
        .lock()
        .expect("cache poisoned")
        .insert((target, degree), coeffs.clone());
    Ok(coeffs)
}

/// Splits counts into two independent halves: hypergeometric draws for a
/// multinomial sample, binomial thinning for a Poissonized one.
fn split_counts(counts: &EmpiricalCounts, seed: u64) -> Result<(EmpiricalCounts, EmpiricalCounts)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = counts.nominal_n();
    let mode = counts.mode();
    let na = n / 2;
    let nb = n - na;
    if na == 0 {
        return Err(Error::InsufficientData("cannot split a sample of size 1".into()));
    }
    let mut a = Vec::with_capacity(counts.support_size());
    match mode {
        SamplingMode::Multinomial => {
            let mut remaining_total = counts.total();
            let mut remaining_draws = na;
            for &c in counts.counts() {
                let take = if remaining_draws == 0 || c == 0 {
                    0
                } else {
                    Hypergeometric::new(remaining_total, c, remaining_draws)
                        .map_err(|e| Error::invalid(format!("hypergeometric split: {e}")))?
                        .sample(&mut rng)
                };
                a.push(take);
                remaining_total -= c;
                remaining_draws -= take;
            }
        }
        SamplingMode::Poissonized => {
            for &c in counts.counts() {
                let take = Binomial::new(c, na as f64 / n as f64)
                    .map_err(|e| Error::invalid(format!("binomial split: {e}")))?
                    .sample(&mut rng);
                a.push(take);
            }
        }
    }
    let b: Vec<u64> = counts.counts().iter().zip(&a).map(|(c, t)| c - t).collect();
    Ok((EmpiricalCounts::new(a, na, mode)?, EmpiricalCounts::new(b, nb, mode)?))
}

/// Pairs each symbol's selection count (and its sample size) with its
/// estimation count.
struct Halves {
    select: Vec<u64>,
    select_n: u64,
    estimate: EmpiricalCounts,
}

fn halves(counts: &EmpiricalCounts, params: &EstimatorParams) -> Result<Halves> {
    if params.split {
        let (a, b) = split_counts(counts, params.split_seed)?;
        Ok(Halves {
            select: a.counts().to_vec(),
            select_n: a.nominal_n(),
            estimate: b,
        })
    } else {
        Ok(Halves {
            select: counts.counts().to_vec(),
            select_n: counts.nominal_n(),
            estimate: counts.clone(),
        })
    }
}

/// `1/2 - L1(p̂, q)/4` for the empirical law `p̂` of the counts.
pub fn plugin_bayes_error(counts: &EmpiricalCounts, q: &FiniteDistribution) -> Result<EstimateReport> {
    let l = plugin_l1(counts, q)?;
    Ok(EstimateReport::clamped("plugin", 0.5 - l.estimate / 4.0, 0.0, 0.5))
}

/// `L1(p̂, q)`.
pub fn plugin_l1(counts: &EmpiricalCounts, q: &FiniteDistribution) -> Result<EstimateReport> {
    let p = empirical_distribution(counts)?;
    same_support(&p, q)?;
    Ok(EstimateReport::clamped("plugin", l1(p.probs(), q.probs()), 0.0, 2.0))
}

/// Half-width scale of the non-smooth regime around a point `x`.
fn kink_radius(x: f64, n: u64, floor: f64) -> f64 {
    let nf = n as f64;
    let ln = nf.ln();
    (x.max(0.0) * ln / nf).sqrt() + floor * ln / nf
}

/// Polynomial estimate of `L1(p, q)` for known `q`.
///
/// A symbol whose empirical frequency lies more than `c1` radii from `q_i`
/// contributes `|p̂_i - q_i|`. Otherwise the best approximation of
/// `|x - q_i|` on `q_i ± c2` radii (cut at zero) is estimated without bias.
/// The radius is `sqrt(q_i ln n / n) + radius_floor ln n / n`.
pub fn optimal_l1_estimator(counts: &EmpiricalCounts, q: &FiniteDistribution, params: &EstimatorParams) -> Result<EstimateReport> {
    params.validate()?;
    let n = counts.nominal_n();
    require_n(n)?;
    if counts.support_size() != q.support_size() {
        return Err(Error::SupportMismatch {
            left: counts.support_size(),
            right: q.support_size(),
        });
    }
    let h = halves(counts, params)?;
    let ne = h.estimate.nominal_n();
    let mut acc = KahanSum::new();
    for (i, &qi) in q.probs().iter().enumerate() {
        let sel = h.select[i] as f64 / h.select_n as f64;
        acc.add(optimal_l1_term(sel, h.estimate.counts()[i], ne, counts.mode(), qi, params)?);
    }
    Ok(EstimateReport::clamped("optimal", acc.value(), 0.0, 2.0))
}

/// One symbol's contribution to [`optimal_l1_estimator`]: `sel` is the
/// frequency used to choose the regime, `x` the count used to estimate.
pub fn optimal_l1_term(sel: f64, x: u64, n: u64, mode: SamplingMode, qi: f64, params: &EstimatorParams) -> Result<f64> {
    let r = kink_radius(qi, n, params.radius_floor);
    if (sel - qi).abs() > params.c1 * r {
        return Ok((x as f64 / n as f64 - qi).abs());
    }
    let degree = params.degree(n);
    let lo = (qi - params.c2 * r).max(0.0);
    let hi = qi + params.c2 * r;
    let c = (lo + hi) / 2.0;
    let s = (hi - lo) / 2.0;
    let t0 = ((qi - c) / s * 1e4).round() as i64;
    let coeffs = cached_coeffs(Target::AbsKink(t0), degree)?;
    let f = centered_power_estimates(x, n, mode, c, s, degree);
    Ok(s * dot(&coeffs, &f))
}

/// `1/2 - L̂1/4` with the polynomial L1 estimate, clamped to `[0, 1/2]`.
pub fn optimal_bayes_error(counts: &EmpiricalCounts, q: &FiniteDistribution, params: &EstimatorParams) -> Result<EstimateReport> {
    let l = optimal_l1_estimator(counts, q, params)?;
    Ok(EstimateReport::clamped("optimal", 0.5 - l.pre_clamp / 4.0, 0.0, 0.5))
}

/// Entropy of the empirical distribution, in bits.
pub fn plugin_entropy(counts: &EmpiricalCounts) -> Result<EstimateReport> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::DegenerateSample);
    }
    let t = total as f64;
    let probs: Vec<f64> = counts.counts().iter().map(|&c| c as f64 / t).collect();
    let s = counts.support_size() as f64;
    Ok(EstimateReport::clamped("plugin", entropy_bits(&probs), 0.0, s.log2()))
}

/// Polynomial entropy estimator, in bits.
///
/// Symbols with count above `c1 ln n` contribute the plug-in term plus
/// `lg e / (2n)`. The rest contribute an unbiased estimate of the best
/// approximation of `x lg(1/x)` on `[0, c2 ln n / n]`.
pub fn optimal_entropy_estimator(counts: &EmpiricalCounts, params: &EstimatorParams) -> Result<EstimateReport> {
    params.validate()?;
    let n = counts.nominal_n();
    require_n(n)?;
    let h = halves(counts, params)?;
    let ne = h.estimate.nominal_n();
    let nf = ne as f64;
    let ln = nf.ln();
    let degree = params.degree(ne);
    let delta = (params.c2 * ln / nf).min(1.0);
    let threshold = params.c1 * (h.select_n as f64).ln();
    let coeffs = cached_coeffs(Target::EntropyUnit, degree)?;
    let half = delta / 2.0;
    let mut acc = KahanSum::new();
    for (i, &x) in h.estimate.counts().iter().enumerate() {
        if h.select[i] as f64 > threshold {
            acc.add(entropy_term(x as f64 / nf) + LOG2_E / (2.0 * nf));
        } else {
            // x lg(1/x) = Δ g(x/Δ) + x lg(1/Δ), with g(u) = u lg(1/u)
            let f = centered_power_estimates(x, ne, counts.mode(), half, half, degree);
            acc.add(delta * dot(&coeffs, &f) + x as f64 / nf * (1.0 / delta).log2());
        }
    }
    let s = counts.support_size() as f64;
    Ok(EstimateReport::clamped("optimal", acc.value(), 0.0, s.log2()))
}

/// Probability the scheme assigns to `x` after observing `history` counts.
pub fn sequential_predictive(scheme: CodingScheme, history: &[u64], x: usize) -> Result<f64> {
    let beta = scheme.validate()?;
    let cx = *history
        .get(x)
        .ok_or_else(|| Error::invalid(format!("symbol {x} outside alphabet of size {}", history.len())))?;
    let seen: u64 = history.iter().sum();
    Ok((cx as f64 + beta) / (seen as f64 + history.len() as f64 * beta))
}

/// Per-symbol code length `(1/n) Σ_i lg(1 / Q(x_i | x^{i-1}))` of the
/// sequential scheme.
pub fn compression_entropy_estimator(sequence: &[usize], s: usize, scheme: CodingScheme) -> Result<EstimateReport> {
    let beta = scheme.validate()?;
    if sequence.is_empty() {
        return Err(Error::invalid("sequence must be non-empty"));
    }
    if s == 0 {
        return Err(Error::invalid("alphabet must be non-empty"));
    }
    let mut counts = vec![0u64; s];
    let mut acc = KahanSum::new();
    let sb = s as f64 * beta;
    for (i, &x) in sequence.iter().enumerate() {
        let cx = counts
            .get_mut(x)
            .ok_or_else(|| Error::invalid(format!("symbol {x} outside alphabet of size {s}")))?;
        acc.add(((i as f64 + sb) / (*cx as f64 + beta)).log2());
        *cx += 1;
    }
    let n = sequence.len() as f64;
    let v = acc.value() / n;
    Ok(EstimateReport {
        estimator_id: "compression".into(),
        estimate: v,
        pre_clamp: v,
        truth: None,
        abs_error: None,
    })
}

/// As [`compression_entropy_estimator`], from counts alone. The mixture
/// probability of a sequence depends only on its counts.
pub fn compression_entropy_from_counts(counts: &EmpiricalCounts, scheme: CodingScheme) -> Result<EstimateReport> {
    let beta = scheme.validate()?;
    let n = counts.total();
    if n == 0 {
        return Err(Error::DegenerateSample);
    }
    let sb = counts.support_size() as f64 * beta;
    let mut acc = KahanSum::new();
    for j in 0..n {
        acc.add((j as f64 + sb).log2());
    }
    for &c in counts.counts() {
        for j in 0..c {
            acc.add(-(j as f64 + beta).log2());
        }
    }
    let v = acc.value() / n as f64;
    Ok(EstimateReport {
        estimator_id: "compression".into(),
        estimate: v,
        pre_clamp: v,
        truth: None,
        abs_error: None,
    })
}

/// `(counts_i + beta) / (n + S beta)`.
pub fn predictive_distribution(counts: &EmpiricalCounts, beta: f64) -> Result<FiniteDistribution> {
    CodingScheme::AddBeta(beta).validate()?;
    let w: Vec<f64> = counts.counts().iter().map(|&c| c as f64 + beta).collect();
    FiniteDistribution::from_weights(&w)
}

/// As [`predictive_distribution`] for a hypothetical empty sample: uniform.
pub fn predictive_prior(s: usize) -> Result<FiniteDistribution> {
    crate::dist::make_uniform(s)
}

fn check_pair(a: &EmpiricalCounts, b: &EmpiricalCounts) -> Result<()> {
    if a.support_size() != b.support_size() {
        return Err(Error::SupportMismatch {
            left: a.support_size(),
            right: b.support_size(),
        });
    }
    Ok(())
}

/// `L1(r̂, q̂)` of two empirical distributions.
pub fn two_sample_plugin_l1(counts_r: &EmpiricalCounts, counts_q: &EmpiricalCounts) -> Result<EstimateReport> {
    check_pair(counts_r, counts_q)?;
    let r = empirical_distribution(counts_r)?;
    let q = empirical_distribution(counts_q)?;
    Ok(EstimateReport::clamped("two_sample_plugin", l1(r.probs(), q.probs()), 0.0, 2.0))
}

/// Empirical Scheffé regime `{i : r̂_i > q̂_i}`.
pub fn two_sample_regime(counts_r: &EmpiricalCounts, counts_q: &EmpiricalCounts) -> Result<DecisionRegime> {
    check_pair(counts_r, counts_q)?;
    let nr = counts_r.nominal_n() as f64;
    let nq = counts_q.nominal_n() as f64;
    Ok(DecisionRegime::new(
        counts_r
            .counts()
            .iter()
            .zip(counts_q.counts())
            .map(|(&a, &b)| a as f64 / nr > b as f64 / nq)
            .collect(),
    ))
}

/// Polynomial L1 estimate when both laws are sampled.
///
/// With `t_i = r_i - q_i`, symbols where `|r̂_i - q̂_i|` exceeds `c1` radii
/// use the plug-in term. The rest estimate the best approximation of `|t|`
/// on `± c2` radii, using the product of the two samples' unbiased power
/// estimates around a common center.
pub fn two_sample_optimal(
    counts_r: &EmpiricalCounts,
    counts_q: &EmpiricalCounts,
    params: &EstimatorParams,
) -> Result<EstimateReport> {
    params.validate()?;
    check_pair(counts_r, counts_q)?;
    let n = counts_r.nominal_n().min(counts_q.nominal_n());
    require_n(n)?;
    let nr = counts_r.nominal_n();
    let nq = counts_q.nominal_n();
    let degree = params.degree(n);
    let coeffs = cached_coeffs(Target::AbsKink(0), degree)?;
    let binom = binomial_table(degree);
    let mut acc = KahanSum::new();
    for (&x, &y) in counts_r.counts().iter().zip(counts_q.counts()) {
        let rh = x as f64 / nr as f64;
        let qh = y as f64 / nq as f64;
        let c = (rh + qh) / 2.0;
        let r = kink_radius(c, n, params.radius_floor);
        if (rh - qh).abs() > params.c1 * r {
            acc.add((rh - qh).abs());
            continue;
        }
        let s = params.c2 * r;
        let fx = centered_power_estimates(x, nr, counts_r.mode(), c, s, degree);
        let fy = centered_power_estimates(y, nq, counts_q.mode(), c, s, degree);
        // ((r - q)/s)^k = Σ_j C(k, j) ((r - c)/s)^j (-(q - c)/s)^(k - j)
        let mut poly = KahanSum::new();
        for (k, &ak) in coeffs.iter().enumerate() {
            if ak == 0.0 {
                continue;
            }
            let mut term = 0.0;
            for j in 0..=k.min(fx.len() - 1) {
                if k - j >= fy.len() {
                    continue;
                }
                let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                term += binom[k][j] * fx[j] * sign * fy[k - j];
            }
            poly.add(ak * term);
        }
        acc.add(s * poly.value());
    }
    Ok(EstimateReport::clamped("two_sample_optimal", acc.value(), 0.0, 2.0))
}

fn binomial_table(d: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![1.0]];
    for k in 1..=d {
        let prev = &t[k - 1];
        let mut row = vec![1.0; k + 1];
        for j in 1..k {
            row[j] = prev[j - 1] + prev[j];
        }
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::make_uniform;
    use crate::oracle::{binomial_pmf, poisson_pmf};

    fn mc(c: &[u64]) -> EmpiricalCounts {
        EmpiricalCounts::multinomial(c.to_vec()).unwrap()
    }

    #[test]
    fn centered_powers_unbiased_binomial() {
        let (n, p) = (40u64, 0.3);
        for &(c, s) in &[(0.0, 1.0), (0.25, 0.1), (0.5, 0.5), (0.02, 0.05)] {
            let kmax = 12;
            let mut mean = vec![0.0; kmax + 1];
            for x in 0..=n {
                let w = binomial_pmf(n, p, x);
                for (m, f) in mean.iter_mut().zip(centered_power_estimates(x, n, SamplingMode::Multinomial, c, s, kmax)) {
                    *m += w * f;
                }
            }
            for (k, m) in mean.iter().enumerate() {
                let want = ((p - c) / s).powi(k as i32);
                assert!((m - want).abs() < 1e-9 * want.abs().max(1.0), "c={c} s={s} k={k}: {m} vs {want}");
            }
        }
    }

    #[test]
    fn centered_powers_unbiased_poisson() {
        let (n, p) = (50u64, 0.2);
        let lambda = n as f64 * p;
        for &(c, s) in &[(0.0, 1.0), (0.15, 0.1), (0.3, 0.2)] {
            let kmax = 10;
            let mut mean = vec![0.0; kmax + 1];
            for x in 0..200 {
                let w = poisson_pmf(lambda, x);
                for (m, f) in mean.iter_mut().zip(centered_power_estimates(x, n, SamplingMode::Poissonized, c, s, kmax)) {
                    *m += w * f;
                }
            }
            for (k, m) in mean.iter().enumerate() {
                let want = ((p - c) / s).powi(k as i32);
                assert!((m - want).abs() < 1e-8 * want.abs().max(1.0), "k={k}: {m} vs {want}");
            }
        }
    }

    #[test]
    fn plugin_bayes_examples() {
        let q = make_uniform(2).unwrap();
        assert_eq!(plugin_bayes_error(&mc(&[5, 5]), &q).unwrap().estimate, 0.5);
        assert_eq!(plugin_bayes_error(&mc(&[10, 0]), &q).unwrap().estimate, 0.25);
    }

    #[test]
    fn plugin_entropy_examples() {
        assert_eq!(plugin_entropy(&mc(&[7, 0, 0])).unwrap().estimate, 0.0);
        assert_eq!(plugin_entropy(&mc(&[2, 2])).unwrap().estimate, 1.0);
    }

    #[test]
    fn predictive_examples() {
        assert_eq!(sequential_predictive(CodingScheme::default(), &[0, 0], 1).unwrap(), 0.5);
        assert_eq!(sequential_predictive(CodingScheme::default(), &[3, 0], 0).unwrap(), 0.875);
        let d = predictive_distribution(&mc(&[9, 1]), 0.5).unwrap();
        assert!((d.probs()[0] - 9.5 / 11.0).abs() < 1e-15);
        assert!((d.probs()[1] - 1.5 / 11.0).abs() < 1e-15);
        assert!(sequential_predictive(CodingScheme::AddBeta(0.0), &[1], 0).is_err());
        let hist = [4u64, 0, 7];
        let total: f64 = (0..3)
            .map(|x| sequential_predictive(CodingScheme::AddBeta(0.3), &hist, x).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compression_constant_sequence() {
        let n = 16;
        let seq = vec![0usize; n];
        let rep = compression_entropy_estimator(&seq, 2, CodingScheme::default()).unwrap();
        let closed: f64 = (1..=n).map(|i| ((i as f64) / (i as f64 - 0.5)).log2()).sum::<f64>() / n as f64;
        assert!((rep.estimate - closed).abs() < 1e-12);
        assert!(rep.estimate > 0.0);
        let counts = EmpiricalCounts::from_sequence(&seq, 2).unwrap();
        assert_eq!(plugin_entropy(&counts).unwrap().estimate, 0.0);
        let from_counts = compression_entropy_from_counts(&counts, CodingScheme::default()).unwrap();
        assert!((from_counts.estimate - rep.estimate).abs() < 1e-12);
    }

    #[test]
    fn two_sample_examples() {
        let a = mc(&[3, 4, 5]);
        assert_eq!(two_sample_plugin_l1(&a, &a).unwrap().estimate, 0.0);
        assert!(two_sample_regime(&a, &a).unwrap().indices().is_empty());
        let r = mc(&[6, 0]);
        let q = mc(&[0, 6]);
        assert_eq!(two_sample_plugin_l1(&r, &q).unwrap().estimate, 2.0);
        assert_eq!(two_sample_regime(&r, &q).unwrap().indices(), vec![0]);
    }

    #[test]
    fn optimal_needs_n_at_least_4() {
        let q = make_uniform(2).unwrap();
        assert!(optimal_l1_estimator(&mc(&[2, 1]), &q, &EstimatorParams::default()).is_err());
        assert!(optimal_entropy_estimator(&mc(&[2, 1]), &EstimatorParams::default()).is_err());
    }

    #[test]
    fn optimal_large_n_two_symbols() {
        let q = make_uniform(2).unwrap();
        let c = mc(&[500_300, 499_700]);
        let l = optimal_l1_estimator(&c, &q, &EstimatorParams::l1()).unwrap();
        assert!(l.estimate <= 0.01, "{}", l.estimate);
        let h = optimal_entropy_estimator(&c, &EstimatorParams::default()).unwrap();
        assert!((h.estimate - 1.0).abs() < 0.01);
    }

    #[test]
    fn split_preserves_totals() {
        let c = mc(&[10, 0, 33, 7]);
        let (a, b) = split_counts(&c, 3).unwrap();
        assert_eq!(a.total() + b.total(), 50);
        assert_eq!(a.total(), 25);
        for i in 0..4 {
            assert_eq!(a.counts()[i] + b.counts()[i], c.counts()[i]);
        }
    }
}
