//! Finite-alphabet distributions, seeded samplers, and empirical counts.
//!
//! Symbols are indexed `0..S` in code; documentation speaks of the alphabet
//! `{1..S}` only where it mirrors the usual mathematical notation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::sum::kahan;

/// Normalization tolerance for strict distributions.
pub const STRICT_TOL: f64 = 1e-12;

/// A probability vector over a finite alphabet.
///
/// Strict distributions sum to one within [`STRICT_TOL`]. Relaxed ones carry
/// the tolerance they were admitted with and are refused by operations that
/// need a genuine probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    probs: Vec<f64>,
    relaxed_eps: Option<f64>,
}

impl FiniteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_entries(&probs)?;
        let total = kahan(probs.iter().copied());
        if (total - 1.0).abs() > STRICT_TOL {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, expected 1 within {STRICT_TOL:e}"
            )));
        }
        Ok(Self {
            probs,
            relaxed_eps: None,
        })
    }

    /// Non-negative vector whose total lies within `eps` of one (the
    /// `D_0(S, eps)` class). `eps` must be positive.
    pub fn relaxed(probs: Vec<f64>, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::invalid("relaxation tolerance must be positive"));
        }
        check_entries(&probs)?;
        let total = kahan(probs.iter().copied());
        if (total - 1.0).abs() >= eps {
            return Err(Error::invalid(format!(
                "total mass {total} is not within {eps} of 1"
            )));
        }
        Ok(Self {
            probs,
            relaxed_eps: Some(eps),
        })
    }

    /// Normalizes non-negative weights into a strict distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        check_entries(weights)?;
        let total = kahan(weights.iter().copied());
        if !(total > 0.0) {
            return Err(Error::invalid("weights must have positive total"));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed_eps.is_some()
    }

    pub fn relaxed_eps(&self) -> Option<f64> {
        self.relaxed_eps
    }

    pub fn total_mass(&self) -> f64 {
        kahan(self.probs.iter().copied())
    }

    pub(crate) fn require_strict(&self) -> Result<()> {
        if self.is_relaxed() {
            Err(Error::RelaxedDistribution)
        } else {
            Ok(())
        }
    }

    /// Mixture `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        same_support(self, other)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid("mixture weight outside [0, 1]"));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        if self.is_relaxed() || other.is_relaxed() {
            let eps = self.relaxed_eps.unwrap_or(STRICT_TOL) + other.relaxed_eps.unwrap_or(STRICT_TOL);
            Self::relaxed(probs, eps)
        } else {
            Self::new(probs)
        }
    }
}

fn check_entries(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::invalid("alphabet must be non-empty"));
    }
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::invalid(format!("entry {i} is {p}; entries must be finite and >= 0")));
    }
    Ok(())
}

pub(crate) fn same_support(a: &FiniteDistribution, b: &FiniteDistribution) -> Result<()> {
    if a.support_size() != b.support_size() {
        return Err(Error::SupportMismatch {
            left: a.support_size(),
            right: b.support_size(),
        });
    }
    Ok(())
}

/// Uniform distribution on `s` symbols.
pub fn make_uniform(s: usize) -> Result<FiniteDistribution> {
    if s == 0 {
        return Err(Error::invalid("support size must be at least 1"));
    }
    FiniteDistribution::new(vec![1.0 / s as f64; s])
}

/// Zipf law `p_i ∝ i^(-beta)` for `i = 1..=s`.
pub fn make_zipf(s: usize, beta: f64) -> Result<FiniteDistribution> {
    if s == 0 {
        return Err(Error::invalid("support size must be at least 1"));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("zipf exponent must be finite and >= 0, got {beta}")));
    }
    let weights: Vec<f64> = (1..=s).map(|i| (i as f64).powf(-beta)).collect();
    FiniteDistribution::from_weights(&weights)
}

/// How a count vector was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplingMode {
    /// One multinomial draw of `n` symbols; counts sum to `n`.
    Multinomial,
    /// Independent `Poisson(n p_i)` count per symbol; no sum constraint.
    Poissonized,
}

/// Per-symbol counts together with the nominal sample size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalCounts {
    counts: Vec<u64>,
    nominal_n: u64,
    mode: SamplingMode,
}

impl EmpiricalCounts {
    pub fn new(counts: Vec<u64>, nominal_n: u64, mode: SamplingMode) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("count vector must be non-empty"));
        }
        if nominal_n == 0 {
            return Err(Error::invalid("nominal sample size must be positive"));
        }
        if mode == SamplingMode::Multinomial {
            let total: u64 = counts.iter().sum();
            if total != nominal_n {
                return Err(Error::invalid(format!(
                    "multinomial counts sum to {total}, expected {nominal_n}"
                )));
            }
        }
        Ok(Self {
            counts,
            nominal_n,
            mode,
        })
    }

    /// Multinomial counts whose sample size is their total.
    pub fn multinomial(counts: Vec<u64>) -> Result<Self> {
        let n = counts.iter().sum();
        Self::new(counts, n, SamplingMode::Multinomial)
    }

    /// Tallies a symbol sequence over an alphabet of size `s`.
    pub fn from_sequence(seq: &[usize], s: usize) -> Result<Self> {
        let mut counts = vec![0u64; s];
        for &x in seq {
            let slot = counts
                .get_mut(x)
                .ok_or_else(|| Error::invalid(format!("symbol {x} outside alphabet of size {s}")))?;
            *slot += 1;
        }
        Self::multinomial(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn nominal_n(&self) -> u64 {
        self.nominal_n
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Identifies one independent random stream: `(master_seed, stream_index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngSeed {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// ChaCha8 keyed by the master seed, positioned on its own stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Inverse-CDF sampler over a fixed distribution.
#[derive(Debug, Clone)]
pub struct CategoricalSampler {
    cumulative: Vec<f64>,
}

impl CategoricalSampler {
    pub fn new(dist: &FiniteDistribution) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = dist
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // pin the last bucket so every uniform draw lands somewhere
        if let Some(last) = cumulative.last_mut() {
            *last = f64::INFINITY;
        }
        Self { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut idx = self.cumulative.partition_point(|&c| c <= u);
        // skip zero-probability symbols that share a cumulative value
        while idx + 1 < self.cumulative.len() && self.cumulative[idx] <= u {
            idx += 1;
        }
        idx
    }

    pub fn sample_sequence<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    pub fn sample_counts<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Vec<u64> {
        let mut counts = vec![0u64; self.cumulative.len()];
        for _ in 0..n {
            counts[self.sample(rng)] += 1;
        }
        counts
    }
}

/// Draws a count vector of nominal size `n` in the requested mode.
pub fn sample_counts(
    dist: &FiniteDistribution,
    n: u64,
    mode: SamplingMode,
    seed: RngSeed,
) -> Result<EmpiricalCounts> {
    let mut rng = seed.rng();
    sample_counts_with(dist, n, mode, &mut rng)
}

/// As [`sample_counts`], drawing from a caller-owned generator.
pub fn sample_counts_with<R: Rng + ?Sized>(
    dist: &FiniteDistribution,
    n: u64,
    mode: SamplingMode,
    rng: &mut R,
) -> Result<EmpiricalCounts> {
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    match mode {
        SamplingMode::Multinomial => {
            dist.require_strict()?;
            let sampler = CategoricalSampler::new(dist);
            EmpiricalCounts::new(sampler.sample_counts(n, rng), n, mode)
        }
        SamplingMode::Poissonized => {
            let counts = poisson_counts(dist.probs(), n, rng)?;
            EmpiricalCounts::new(counts, n, mode)
        }
    }
}

/// Independent `Poisson(n * w_i)` draws for an arbitrary non-negative vector.
pub(crate) fn poisson_counts<R: Rng + ?Sized>(weights: &[f64], n: u64, rng: &mut R) -> Result<Vec<u64>> {
    weights
        .iter()
        .map(|&w| {
            let lambda = w * n as f64;
            if lambda <= 0.0 {
                Ok(0)
            } else {
                let d = Poisson::new(lambda).map_err(|e| Error::invalid(format!("poisson rate {lambda}: {e}")))?;
                Ok(d.sample(rng) as u64)
            }
        })
        .collect()
}

/// Empirical frequencies `counts[i] / nominal_n`.
///
/// Multinomial counts give a strict distribution. Poissonized counts give a
/// relaxed one whose total is whatever the draw produced.
pub fn empirical_distribution(counts: &EmpiricalCounts) -> Result<FiniteDistribution> {
    let n = counts.nominal_n() as f64;
    let probs: Vec<f64> = counts.counts().iter().map(|&c| c as f64 / n).collect();
    match counts.mode() {
        SamplingMode::Multinomial => FiniteDistribution::new(probs),
        SamplingMode::Poissonized => {
            if counts.total() == 0 {
                return Err(Error::DegenerateSample);
            }
            let total = kahan(probs.iter().copied());
            let eps = (total - 1.0).abs() + STRICT_TOL;
            FiniteDistribution::relaxed(probs, eps)
        }
    }
}
