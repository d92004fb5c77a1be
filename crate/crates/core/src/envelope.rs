//! Bayes envelopes and related information functionals, all in bits.
//!
//! Under logarithmic loss the envelope is the Shannon entropy; for balanced
//! binary classification it is `1/2 - L1(r, q) / 4`.

use std::f64::consts::{E, LOG2_E, PI};

use crate::classify::DecisionRegime;
use crate::dist::{same_support, FiniteDistribution};
use crate::error::{Error, Result};
use crate::sum::kahan;

/// Shannon entropy `Σ p lg(1/p)` with `0 lg(1/0) = 0`.
pub fn shannon_entropy(p: &FiniteDistribution) -> Result<f64> {
    p.require_strict()?;
    Ok(entropy_bits(p.probs()))
}

pub(crate) fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub(crate) fn entropy_bits(p: &[f64]) -> f64 {
    kahan(p.iter().map(|&x| entropy_term(x)))
}

/// `Σ |p_i - q_i|`.
pub fn l1_distance(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    same_support(p, q)?;
    Ok(l1(p.probs(), q.probs()))
}

pub(crate) fn l1(p: &[f64], q: &[f64]) -> f64 {
    kahan(p.iter().zip(q).map(|(a, b)| (a - b).abs()))
}

/// `Σ p lg(p/q)`. Errors if `p` puts mass where `q` has none.
pub fn kl_divergence(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    same_support(p, q)?;
    let mut terms = Vec::with_capacity(p.support_size());
    for (i, (&a, &b)) in p.probs().iter().zip(q.probs()).enumerate() {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Err(Error::InfiniteDivergence { index: i });
        }
        terms.push(a * (a / b).log2());
    }
    // rounding can leave a tiny negative total when p == q
    Ok(kahan(terms).max(0.0))
}

/// Binary classification problem: class-conditional feature laws and the
/// class-1 prior.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDistribution {
    r: FiniteDistribution,
    q: FiniteDistribution,
    prior1: f64,
}

impl LabeledDistribution {
    /// `r = P(X | Y = 0)`, `q = P(X | Y = 1)`, `prior1 = P(Y = 1)`.
    pub fn new(r: FiniteDistribution, q: FiniteDistribution, prior1: f64) -> Result<Self> {
        same_support(&r, &q)?;
        r.require_strict()?;
        q.require_strict()?;
        if !(0.0..=1.0).contains(&prior1) {
            return Err(Error::invalid(format!("prior {prior1} outside [0, 1]")));
        }
        Ok(Self { r, q, prior1 })
    }

    /// Equal class priors, the setting of the known-`q` classification class.
    pub fn balanced(r: FiniteDistribution, q: FiniteDistribution) -> Result<Self> {
        Self::new(r, q, 0.5)
    }

    /// Builds the joint law from a feature marginal and `eta(x) = P(Y = 1 | X = x)`.
    pub fn from_marginal_and_eta(px: &FiniteDistribution, eta: &[f64]) -> Result<Self> {
        if eta.len() != px.support_size() {
            return Err(Error::SupportMismatch {
                left: px.support_size(),
                right: eta.len(),
            });
        }
        if eta.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::invalid("eta values must lie in [0, 1]"));
        }
        let joint1: Vec<f64> = px.probs().iter().zip(eta).map(|(p, e)| p * e).collect();
        let joint0: Vec<f64> = px.probs().iter().zip(eta).map(|(p, e)| p * (1.0 - e)).collect();
        let prior1 = kahan(joint1.iter().copied());
        if prior1 <= 0.0 || prior1 >= 1.0 {
            return Err(Error::invalid("both labels need positive probability"));
        }
        let r = FiniteDistribution::from_weights(&joint0)?;
        let q = FiniteDistribution::from_weights(&joint1)?;
        Self::new(r, q, prior1)
    }

    pub fn r(&self) -> &FiniteDistribution {
        &self.r
    }

    pub fn q(&self) -> &FiniteDistribution {
        &self.q
    }

    pub fn prior1(&self) -> f64 {
        self.prior1
    }

    pub fn support_size(&self) -> usize {
        self.r.support_size()
    }

    pub fn is_balanced(&self) -> bool {
        self.prior1 == 0.5
    }

    /// `P(X = x, Y = 0)` and `P(X = x, Y = 1)`.
    pub fn joint(&self, x: usize) -> (f64, f64) {
        (
            (1.0 - self.prior1) * self.r.probs()[x],
            self.prior1 * self.q.probs()[x],
        )
    }

    pub fn marginal(&self, x: usize) -> f64 {
        let (a, b) = self.joint(x);
        a + b
    }

    /// `P(Y = 1 | X = x)`; `None` when `x` has zero marginal probability.
    pub fn eta(&self, x: usize) -> Option<f64> {
        let (a, b) = self.joint(x);
        let m = a + b;
        (m > 0.0).then(|| b / m)
    }
}

/// Minimum misclassification probability.
///
/// Balanced problems use `1/2 - L1(r, q) / 4`; otherwise
/// `Σ_x min{prior1 q(x), (1 - prior1) r(x)}`.
pub fn bayes_error(ld: &LabeledDistribution) -> f64 {
    if ld.is_balanced() {
        0.5 - l1(ld.r.probs(), ld.q.probs()) / 4.0
    } else {
        bayes_error_general(ld)
    }
}

/// `E[min{eta, 1 - eta}]` evaluated directly from the joint law.
pub fn bayes_error_general(ld: &LabeledDistribution) -> f64 {
    kahan((0..ld.support_size()).map(|x| {
        let (a, b) = ld.joint(x);
        a.min(b)
    }))
}

/// Excess risk of `t(x) = 1[x ∉ regime]` over the Bayes classifier for a
/// balanced problem: `L1(r, q)/4 - (r(regime) - q(regime))/2`.
pub fn envelope_regret(regime: &DecisionRegime, ld: &LabeledDistribution) -> Result<f64> {
    if !ld.is_balanced() {
        return Err(Error::invalid("envelope regret is defined for balanced priors"));
    }
    if regime.len() != ld.support_size() {
        return Err(Error::SupportMismatch {
            left: regime.len(),
            right: ld.support_size(),
        });
    }
    Ok(regret_raw(regime.members(), ld.r.probs(), ld.q.probs()))
}

/// Scheffé form `Σ (r_i - q_i)(1[i ∈ A] - 1[i ∈ Â]) / 2`, equal to the L1 form
/// whenever `r` and `q` have the same total mass.
pub(crate) fn regret_raw(members: &[bool], r: &[f64], q: &[f64]) -> f64 {
    // every term is >= 0
    let v = kahan(r.iter().zip(q).zip(members).map(|((&ri, &qi), &m)| {
        let d = ri - qi;
        let bayes = d > 0.0;
        match (bayes, m) {
            (true, false) => d / 2.0,
            (false, true) => -d / 2.0,
            _ => 0.0,
        }
    }));
    v.max(0.0)
}

/// Redundancy bounds for memoryless sources with `S = alpha n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedundancyBounds {
    pub alpha: f64,
    /// `(alpha/2) lg(e / (2 pi alpha))`, bits per symbol.
    pub lower_bits: f64,
    /// `lg B_alpha`, bits per symbol.
    pub upper_bits: f64,
    pub c_alpha: f64,
    pub b_alpha: f64,
}

/// Upper end of the admissible `alpha` range, `e / (2 pi)`.
pub const ALPHA_MAX: f64 = E / (2.0 * PI);

pub fn redundancy_bounds(alpha: f64) -> Result<RedundancyBounds> {
    if !(alpha > 0.0 && alpha < ALPHA_MAX) {
        return Err(Error::invalid(format!(
            "alpha = {alpha} outside (0, e/(2 pi)) = (0, {ALPHA_MAX:.6})"
        )));
    }
    let c_alpha = 0.5 + 0.5 * (1.0 + 4.0 / alpha).sqrt();
    let b_alpha = alpha * c_alpha.powf(alpha + 2.0) * (-1.0 / c_alpha).exp();
    let lower_bits = alpha / 2.0 * (E / (2.0 * PI * alpha)).log2();
    let upper_bits = b_alpha.ln() * LOG2_E;
    Ok(RedundancyBounds {
        alpha,
        lower_bits,
        upper_bits,
        c_alpha,
        b_alpha,
    })
}
