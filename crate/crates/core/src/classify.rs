//! Classifiers for the known-`q` problem and their expected regret.
//!
//! A decision regime is the set `Â` of symbols assigned to class 0 (the
//! class with feature law `r`). The Bayes regime for equal priors is
//! `A = {i : r_i > q_i}`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::dist::{sample_counts_with, CategoricalSampler, EmpiricalCounts, FiniteDistribution, RngSeed, SamplingMode};
use crate::envelope::{regret_raw, LabeledDistribution};
use crate::error::{Error, Result};
use crate::oracle::{binomial_cdf, binomial_pmf, binomial_sf, mean_stderr, poisson_sf};
use crate::sum::{kahan, KahanSum};

/// Largest sample size accepted by the exact regret evaluators.
pub const MAX_EXACT_N: u64 = 10_000_000;

/// Largest sample size accepted by exact ERM evaluation.
pub const MAX_EXACT_ERM_N: u64 = 1_000_000;

/// Symbols assigned to class 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecisionRegime {
    members: Vec<bool>,
}

impl DecisionRegime {
    pub fn new(members: Vec<bool>) -> Self {
        Self { members }
    }

    pub fn empty(s: usize) -> Self {
        Self::new(vec![false; s])
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.get(i).copied().unwrap_or(false)
    }

    /// Zero-based indices of the members.
    pub fn indices(&self) -> Vec<usize> {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }

    /// `Σ_{i ∈ regime} p_i`.
    pub fn mass(&self, p: &FiniteDistribution) -> f64 {
        kahan(
            p.probs()
                .iter()
                .zip(&self.members)
                .filter_map(|(&pi, &m)| m.then_some(pi)),
        )
    }
}

/// Which classifier a [`ThresholdRule`] implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleTag {
    Mle,
    Tq,
    EmpiricalScheffe,
    Custom,
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleTag::Mle => "mle",
            RuleTag::Tq => "tq",
            RuleTag::EmpiricalScheffe => "scheffe",
            RuleTag::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// `(symbol, count, q_symbol, n) -> symbol ∈ Â`.
pub type Predicate = Arc<dyn Fn(usize, u64, f64, u64) -> bool + Send + Sync>;

/// Coordinatewise classifier: symbol `i` joins the regime based only on its
/// own count, `q_i` and `n`.
#[derive(Clone)]
pub struct ThresholdRule {
    tag: RuleTag,
    predicate: Predicate,
    /// Membership is non-decreasing in the count.
    monotone: bool,
}

impl fmt::Debug for ThresholdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThresholdRule")
            .field("tag", &self.tag)
            .field("monotone", &self.monotone)
            .finish_non_exhaustive()
    }
}

fn exceeds(count: u64, n: u64, q: f64) -> bool {
    count as f64 / n as f64 > q
}

impl ThresholdRule {
    /// `count_i / n > q_i`.
    pub fn mle() -> Self {
        Self {
            tag: RuleTag::Mle,
            predicate: Arc::new(|_, c, q, n| exceeds(c, n, q)),
            monotone: true,
        }
    }

    /// `count_i / n > q_i` or `q_i < 1/n`.
    pub fn tq() -> Self {
        Self {
            tag: RuleTag::Tq,
            predicate: Arc::new(|_, c, q, n| exceeds(c, n, q) || q < 1.0 / n as f64),
            monotone: true,
        }
    }

    /// `count_i / n > q̂_i`, with `q̂` the empirical law of a second sample
    /// held fixed.
    pub fn empirical_scheffe(q_sample: &EmpiricalCounts) -> Self {
        let m = q_sample.nominal_n() as f64;
        let qhat: Vec<f64> = q_sample.counts().iter().map(|&c| c as f64 / m).collect();
        Self {
            tag: RuleTag::EmpiricalScheffe,
            predicate: Arc::new(move |i, c, _, n| exceeds(c, n, qhat.get(i).copied().unwrap_or(f64::INFINITY))),
            monotone: true,
        }
    }

    /// A regime chosen in advance, ignoring the data.
    pub fn fixed(regime: DecisionRegime) -> Self {
        Self {
            tag: RuleTag::Custom,
            predicate: Arc::new(move |i, _, _, _| regime.contains(i)),
            monotone: true,
        }
    }

    /// Arbitrary coordinatewise predicate.
    pub fn custom(predicate: impl Fn(usize, u64, f64, u64) -> bool + Send + Sync + 'static) -> Self {
        Self {
            tag: RuleTag::Custom,
            predicate: Arc::new(predicate),
            monotone: false,
        }
    }

    pub fn tag(&self) -> RuleTag {
        self.tag
    }

    pub fn decide(&self, i: usize, count: u64, q_i: f64, n: u64) -> bool {
        (self.predicate)(i, count, q_i, n)
    }

    /// Applies the rule to a count vector.
    pub fn regime(&self, counts: &EmpiricalCounts, q: &FiniteDistribution) -> Result<DecisionRegime> {
        if counts.support_size() != q.support_size() {
            return Err(Error::SupportMismatch {
                left: counts.support_size(),
                right: q.support_size(),
            });
        }
        let n = counts.nominal_n();
        Ok(DecisionRegime::new(
            counts
                .counts()
                .iter()
                .zip(q.probs())
                .enumerate()
                .map(|(i, (&c, &qi))| self.decide(i, c, qi, n))
                .collect(),
        ))
    }

    /// `P(i ∈ Â)` when the count is `Bin(n, p)`.
    pub fn membership_probability_binomial(&self, i: usize, q_i: f64, n: u64, p: f64) -> Result<f64> {
        let law = Law::Binomial { n, p };
        self.membership_probability(i, q_i, n, law)
    }

    /// `P(i ∈ Â)` when the count is `Poi(lambda)`.
    pub fn membership_probability_poisson(&self, i: usize, q_i: f64, n: u64, lambda: f64) -> Result<f64> {
        self.membership_probability(i, q_i, n, Law::Poisson { lambda })
    }

    fn membership_probability(&self, i: usize, q_i: f64, n: u64, law: Law) -> Result<f64> {
        let hi = law.support_cap();
        let member = |c: u64| self.decide(i, c, q_i, n);
        if self.monotone {
            if !member(hi) {
                return Ok(0.0);
            }
            if member(0) {
                return Ok(1.0);
            }
            // smallest count that joins the regime
            let (mut lo, mut up) = (0u64, hi);
            while up - lo > 1 {
                let mid = lo + (up - lo) / 2;
                if member(mid) {
                    up = mid;
                } else {
                    lo = mid;
                }
            }
            return law.sf(up - 1);
        }
        let mut acc = KahanSum::new();
        for c in law.window() {
            if member(c) {
                acc.add(law.pmf(c));
            }
        }
        Ok(acc.value().clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy)]
enum Law {
    Binomial { n: u64, p: f64 },
    Poisson { lambda: f64 },
}

impl Law {
    fn mean_sd(&self) -> (f64, f64) {
        match *self {
            Law::Binomial { n, p } => (n as f64 * p, (n as f64 * p * (1.0 - p)).sqrt()),
            Law::Poisson { lambda } => (lambda, lambda.sqrt()),
        }
    }

    /// A count beyond which the remaining mass is negligible.
    fn support_cap(&self) -> u64 {
        match *self {
            Law::Binomial { n, .. } => n,
            Law::Poisson { lambda } => (lambda + 40.0 * lambda.sqrt() + 200.0).ceil() as u64,
        }
    }

    fn window(&self) -> std::ops::RangeInclusive<u64> {
        let (m, sd) = self.mean_sd();
        let lo = (m - 40.0 * sd - 40.0).max(0.0).floor() as u64;
        let hi = ((m + 40.0 * sd + 40.0).ceil() as u64).min(self.support_cap());
        lo..=hi
    }

    fn pmf(&self, k: u64) -> f64 {
        match *self {
            Law::Binomial { n, p } => binomial_pmf(n, p, k),
            Law::Poisson { lambda } => crate::oracle::poisson_pmf(lambda, k),
        }
    }

    fn sf(&self, k: u64) -> Result<f64> {
        match *self {
            Law::Binomial { n, p } => binomial_sf(n, p, k),
            Law::Poisson { lambda } => poisson_sf(lambda, k),
        }
    }
}

/// How a regret figure was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegretMethod {
    Exact,
    MonteCarlo,
}

/// Expected regret together with the reference rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub regret: f64,
    pub rate_bound: f64,
    /// `regret / rate_bound`; NaN when the rate is zero.
    pub ratio: f64,
    pub method: RegretMethod,
    pub mc_stderr: f64,
}

impl RegretReport {
    fn new(regret: f64, rate_bound: f64, method: RegretMethod, mc_stderr: f64) -> Self {
        let regret = regret.max(0.0);
        let ratio = if rate_bound > 0.0 { regret / rate_bound } else { f64::NAN };
        Self {
            regret,
            rate_bound,
            ratio,
            method,
            mc_stderr,
        }
    }
}

/// `Σ_i min(q_i, sqrt(q_i / n))`.
pub fn rate_bound(q: &FiniteDistribution, n: u64) -> f64 {
    let nf = n as f64;
    kahan(q.probs().iter().map(|&qi| qi.min((qi / nf).sqrt())))
}

/// `{i : r_i > q_i}`.
pub fn bayes_regime(ld: &LabeledDistribution) -> Result<DecisionRegime> {
    if !ld.is_balanced() {
        return Err(Error::invalid("bayes_regime needs equal class priors"));
    }
    Ok(DecisionRegime::new(
        ld.r().probs().iter().zip(ld.q().probs()).map(|(r, q)| r > q).collect(),
    ))
}

/// Maximum-likelihood plug-in classifier: `count_i / n > q_i`.
pub fn mle_classifier(counts: &EmpiricalCounts, q: &FiniteDistribution) -> Result<DecisionRegime> {
    ThresholdRule::mle().regime(counts, q)
}

/// As [`mle_classifier`], additionally claiming every symbol with `q_i < 1/n`.
pub fn tq_classifier(counts: &EmpiricalCounts, q: &FiniteDistribution, n: u64) -> Result<DecisionRegime> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let c = EmpiricalCounts::new(counts.counts().to_vec(), n, SamplingMode::Poissonized)?;
    ThresholdRule::tq().regime(&c, q)
}

/// Exact expected regret under multinomial sampling.
pub fn expected_regret_exact(rule: &ThresholdRule, ld: &LabeledDistribution, n: u64) -> Result<RegretReport> {
    expected_regret_exact_with(rule, ld, n, SamplingMode::Multinomial)
}

/// Exact expected regret; count `i` is `Bin(n, r_i)` under multinomial
/// sampling and `Poi(n r_i)` under Poissonized sampling.
pub fn expected_regret_exact_with(
    rule: &ThresholdRule,
    ld: &LabeledDistribution,
    n: u64,
    mode: SamplingMode,
) -> Result<RegretReport> {
    check_balanced_n(ld, n)?;
    if n > MAX_EXACT_N {
        return Err(Error::BudgetExceeded(format!(
            "n = {n} exceeds {MAX_EXACT_N} for exact evaluation; use expected_regret_mc"
        )));
    }
    let nf = n as f64;
    let mut acc = KahanSum::new();
    for (i, (&ri, &qi)) in ld.r().probs().iter().zip(ld.q().probs()).enumerate() {
        let p_in = match mode {
            SamplingMode::Multinomial => rule.membership_probability_binomial(i, qi, n, ri)?,
            SamplingMode::Poissonized => rule.membership_probability_poisson(i, qi, n, nf * ri)?,
        };
        if ri > qi {
            acc.add((ri - qi) * (1.0 - p_in));
        } else {
            acc.add((qi - ri) * p_in);
        }
    }
    Ok(RegretReport::new(
        acc.value() / 2.0,
        rate_bound(ld.q(), n),
        RegretMethod::Exact,
        0.0,
    ))
}

fn check_balanced_n(ld: &LabeledDistribution, n: u64) -> Result<()> {
    if !ld.is_balanced() {
        return Err(Error::invalid("regret evaluation needs equal class priors"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    Ok(())
}

/// Monte Carlo mean of the realized regret over `trials` count draws from
/// `r`. Trial `t` uses stream `t` of `master_seed`.
pub fn expected_regret_mc(
    rule: &ThresholdRule,
    ld: &LabeledDistribution,
    n: u64,
    trials: usize,
    master_seed: u64,
    mode: SamplingMode,
) -> Result<RegretReport> {
    check_balanced_n(ld, n)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let r = ld.r().probs();
    let q = ld.q().probs();
    let vals = (0..trials)
        .map(|t| {
            let mut rng = RngSeed::new(master_seed, t as u64).rng();
            let counts = sample_counts_with(ld.r(), n, mode, &mut rng)?;
            let regime = rule.regime(&counts, ld.q())?;
            Ok(regret_raw(regime.members(), r, q))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, se) = mean_stderr(&vals);
    Ok(RegretReport::new(mean, rate_bound(ld.q(), n), RegretMethod::MonteCarlo, se))
}

/// Majority vote per symbol; ties and unseen symbols go to class 0.
pub fn erm_classifier(n0: &[u64], n1: &[u64]) -> Result<DecisionRegime> {
    if n0.len() != n1.len() {
        return Err(Error::SupportMismatch {
            left: n0.len(),
            right: n1.len(),
        });
    }
    Ok(DecisionRegime::new(n0.iter().zip(n1).map(|(a, b)| a >= b).collect()))
}

/// Evaluation mode for ERM regret.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErmMode {
    Exact,
    MonteCarlo { trials: usize, master_seed: u64 },
}

/// Labeled sample counts `(n0_x, n1_x)` from `n` joint draws.
pub fn sample_labeled_counts<R: Rng + ?Sized>(ld: &LabeledDistribution, n: u64, rng: &mut R) -> Result<(Vec<u64>, Vec<u64>)> {
    let s = ld.support_size();
    let mut cells = Vec::with_capacity(2 * s);
    for x in 0..s {
        let (a, b) = ld.joint(x);
        cells.push(a);
        cells.push(b);
    }
    let joint = FiniteDistribution::from_weights(&cells)?;
    let counts = CategoricalSampler::new(&joint).sample_counts(n, rng);
    let n0 = counts.iter().step_by(2).copied().collect();
    let n1 = counts.iter().skip(1).step_by(2).copied().collect();
    Ok((n0, n1))
}

/// Population excess risk of a class-0 regime against `t*(x) = 1[eta(x) >= 1/2]`.
pub fn excess_risk(regime: &DecisionRegime, ld: &LabeledDistribution) -> Result<f64> {
    if regime.len() != ld.support_size() {
        return Err(Error::SupportMismatch {
            left: regime.len(),
            right: ld.support_size(),
        });
    }
    Ok(kahan((0..ld.support_size()).map(|x| {
        let (a, b) = ld.joint(x);
        let bayes0 = a > b;
        if bayes0 != regime.contains(x) {
            (a - b).abs()
        } else {
            0.0
        }
    })))
}

/// Expected excess risk of the ERM classifier over the Bayes classifier,
/// for any class prior. Reference rate is `sqrt(S / n)`.
pub fn expected_regret_erm(ld: &LabeledDistribution, n: u64, mode: ErmMode) -> Result<RegretReport> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let s = ld.support_size();
    let rate = (s as f64 / n as f64).sqrt();
    match mode {
        ErmMode::Exact => {
            if n > MAX_EXACT_ERM_N {
                return Err(Error::BudgetExceeded(format!(
                    "exact ERM regret needs n <= {MAX_EXACT_ERM_N}, got {n}"
                )));
            }
            let mut acc = KahanSum::new();
            for x in 0..s {
                let (a, b) = ld.joint(x);
                if a == b {
                    continue;
                }
                let (p0, p1) = erm_choice_probabilities(n, a + b, b / (a + b))?;
                let wrong = if a > b { p1 } else { p0 };
                acc.add((a - b).abs() * wrong);
            }
            Ok(RegretReport::new(acc.value(), rate, RegretMethod::Exact, 0.0))
        }
        ErmMode::MonteCarlo { trials, master_seed } => {
            if trials == 0 {
                return Err(Error::invalid("trials must be at least 1"));
            }
            let vals = (0..trials)
                .map(|t| {
                    let mut rng = RngSeed::new(master_seed, t as u64).rng();
                    let (n0, n1) = sample_labeled_counts(ld, n, &mut rng)?;
                    excess_risk(&erm_classifier(&n0, &n1)?, ld)
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mean, se) = mean_stderr(&vals);
            Ok(RegretReport::new(mean, rate, RegretMethod::MonteCarlo, se))
        }
    }
}

/// `(P(n0_x >= n1_x), P(n0_x < n1_x))` where `N_x ~ Bin(n, m)` and
/// `n1_x | N_x = k ~ Bin(k, eta)`. Both are summed directly so neither
/// loses precision to cancellation.
fn erm_choice_probabilities(n: u64, m: f64, eta: f64) -> Result<(f64, f64)> {
    let mode = ((n as f64 + 1.0) * m).floor().min(n as f64) as u64;
    let mut p0 = KahanSum::new();
    let mut p1 = KahanSum::new();
    let mut add = |k: u64| -> Result<f64> {
        let w = binomial_pmf(n, m, k);
        if w > 0.0 {
            p0.add(w * binomial_cdf(k, eta, k / 2)?);
            p1.add(w * binomial_sf(k, eta, k / 2)?);
        }
        Ok(w)
    };
    add(mode)?;
    // terms fall monotonically away from the mode
    for k in mode + 1..=n {
        if add(k)? < 1e-17 {
            break;
        }
    }
    for k in (0..mode).rev() {
        if add(k)? < 1e-17 {
            break;
        }
    }
    Ok((p0.value().clamp(0.0, 1.0), p1.value().clamp(0.0, 1.0)))
}

/// Literal reading of the regime `ln S <= ln n <= ln(Σ min(sqrt(q_i), q_i sqrt(n ln n)))`
/// with unit constants. Returns a description when it fails.
pub fn regime_condition_warning(q: &FiniteDistribution, n: u64) -> Option<String> {
    let s = q.support_size() as f64;
    let nf = n as f64;
    let inner = kahan(
        q.probs()
            .iter()
            .map(|&qi| qi.sqrt().min(qi * (nf * nf.ln()).sqrt())),
    );
    let mut issues = Vec::new();
    if s.ln() > nf.ln() {
        issues.push(format!("ln S = {:.3} exceeds ln n = {:.3}", s.ln(), nf.ln()));
    }
    if nf.ln() > inner.ln() {
        issues.push(format!(
            "ln n = {:.3} exceeds ln(Σ min(sqrt q, q sqrt(n ln n))) = {:.3}",
            nf.ln(),
            inner.ln()
        ));
    }
    (!issues.is_empty()).then(|| issues.join("; "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::make_uniform;

    fn fd(p: &[f64]) -> FiniteDistribution {
        FiniteDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn bayes_regime_examples() {
        let u = make_uniform(3).unwrap();
        let ld = LabeledDistribution::balanced(u.clone(), u).unwrap();
        assert!(bayes_regime(&ld).unwrap().indices().is_empty());
        let ld = LabeledDistribution::balanced(fd(&[1.0, 0.0]), fd(&[0.0, 1.0])).unwrap();
        assert_eq!(bayes_regime(&ld).unwrap().indices(), vec![0]);
        let ld = LabeledDistribution::balanced(fd(&[0.5, 0.3, 0.2]), fd(&[0.2, 0.3, 0.5])).unwrap();
        assert_eq!(bayes_regime(&ld).unwrap().indices(), vec![0]);
    }

    #[test]
    fn mle_and_tq_examples() {
        let q = fd(&[0.5, 0.5]);
        let c = EmpiricalCounts::multinomial(vec![6, 4]).unwrap();
        assert_eq!(mle_classifier(&c, &q).unwrap().indices(), vec![0]);
        let z = EmpiricalCounts::new(vec![0, 0], 10, SamplingMode::Poissonized).unwrap();
        assert!(mle_classifier(&z, &q).unwrap().indices().is_empty());
        let c = EmpiricalCounts::multinomial(vec![4, 6]).unwrap();
        assert_eq!(tq_classifier(&c, &q, 10).unwrap().indices(), vec![1]);

        let q = fd(&[0.0, 0.0, 0.0, 1.0]);
        let c = EmpiricalCounts::multinomial(vec![0, 0, 0, 5]).unwrap();
        assert_eq!(tq_classifier(&c, &q, 5).unwrap().indices(), vec![0, 1, 2]);

        // q_i = 1/n exactly: the small-q clause is strict
        let q = fd(&[0.1, 0.9]);
        let c = EmpiricalCounts::multinomial(vec![0, 10]).unwrap();
        assert!(!tq_classifier(&c, &q, 10).unwrap().contains(0));
    }

    #[test]
    fn erm_examples() {
        assert_eq!(erm_classifier(&[5], &[3]).unwrap().indices(), vec![0]);
        assert_eq!(erm_classifier(&[2], &[2]).unwrap().indices(), vec![0]);
        assert_eq!(erm_classifier(&[0], &[0]).unwrap().indices(), vec![0]);
        assert!(erm_classifier(&[1, 2], &[1]).is_err());
    }

    #[test]
    fn oracle_rule_has_zero_regret() {
        let ld = LabeledDistribution::balanced(fd(&[0.5, 0.3, 0.2]), fd(&[0.2, 0.3, 0.5])).unwrap();
        let rule = ThresholdRule::fixed(bayes_regime(&ld).unwrap());
        let rep = expected_regret_exact(&rule, &ld, 50).unwrap();
        assert_eq!(rep.regret, 0.0);
        assert_eq!(rep.method, RegretMethod::Exact);
    }

    #[test]
    fn point_mass_q_closed_form() {
        let n = 1000u64;
        let s = n as usize + 1;
        let mut r = vec![1.0 / n as f64; s];
        r[s - 1] = 0.0;
        let mut q = vec![0.0; s];
        q[s - 1] = 1.0;
        let ld = LabeledDistribution::balanced(fd(&r), fd(&q)).unwrap();
        let mle = expected_regret_exact(&ThresholdRule::mle(), &ld, n).unwrap();
        let closed = 0.5 * (1.0 - 1.0 / n as f64).powi(n as i32);
        assert!((mle.regret - closed).abs() < 1e-12, "{} vs {closed}", mle.regret);
        assert!((mle.regret - 0.18385).abs() < 1e-5);
        let tq = expected_regret_exact(&ThresholdRule::tq(), &ld, n).unwrap();
        assert_eq!(tq.regret, 0.0);
    }

    #[test]
    fn always_empty_on_disjoint_supports() {
        let ld = LabeledDistribution::balanced(fd(&[0.5, 0.5, 0.0]), fd(&[0.0, 0.0, 1.0])).unwrap();
        let rule = ThresholdRule::fixed(DecisionRegime::empty(3));
        let mc = expected_regret_mc(&rule, &ld, 20, 7, 1, SamplingMode::Multinomial).unwrap();
        assert_eq!(mc.regret, 0.5);
        assert_eq!(mc.mc_stderr, 0.0);
    }

    #[test]
    fn custom_rule_matches_threshold_rule() {
        let ld = LabeledDistribution::balanced(fd(&[0.4, 0.35, 0.25]), fd(&[0.3, 0.3, 0.4])).unwrap();
        let custom = ThresholdRule::custom(|_, c, q, n| c as f64 / n as f64 > q);
        for mode in [SamplingMode::Multinomial, SamplingMode::Poissonized] {
            let a = expected_regret_exact_with(&custom, &ld, 40, mode).unwrap();
            let b = expected_regret_exact_with(&ThresholdRule::mle(), &ld, 40, mode).unwrap();
            assert!((a.regret - b.regret).abs() < 1e-13);
        }
    }

    #[test]
    fn erm_exact_brute_force_n1() {
        let px = make_uniform(2).unwrap();
        let ld = LabeledDistribution::from_marginal_and_eta(&px, &[0.9, 0.1]).unwrap();
        let rep = expected_regret_erm(&ld, 1, ErmMode::Exact).unwrap();
        // outcomes (x, y) with probabilities .05, .45, .45, .05; ERM errs on
        // symbol 0 unless (0, 1) was drawn and on symbol 1 only if (1, 1) was
        let brute = 0.4 * 0.55 + 0.4 * 0.05;
        assert!((rep.regret - brute).abs() < 1e-14);
    }

    #[test]
    fn erm_deterministic_single_symbol() {
        let one = make_uniform(1).unwrap();
        let ld = LabeledDistribution::new(one.clone(), one, 1.0).unwrap();
        assert_eq!(expected_regret_erm(&ld, 5, ErmMode::Exact).unwrap().regret, 0.0);
        let px = make_uniform(2).unwrap();
        let ld = LabeledDistribution::from_marginal_and_eta(&px, &[1.0, 0.0]).unwrap();
        let rep = expected_regret_erm(&ld, 30, ErmMode::Exact).unwrap();
        // symbol 0 is wrong only when it is never seen
        let miss = 0.5f64.powi(30);
        assert!((rep.regret - 0.5 * miss).abs() < 1e-15, "{}", rep.regret);
    }

    #[test]
    fn erm_budget() {
        let px = make_uniform(2).unwrap();
        let ld = LabeledDistribution::from_marginal_and_eta(&px, &[0.6, 0.4]).unwrap();
        assert!(matches!(
            expected_regret_erm(&ld, MAX_EXACT_ERM_N + 1, ErmMode::Exact),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn exact_budget() {
        let u = make_uniform(2).unwrap();
        let ld = LabeledDistribution::balanced(u.clone(), u).unwrap();
        assert!(matches!(
            expected_regret_exact(&ThresholdRule::mle(), &ld, 20_000_000),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn rate_bound_uniform() {
        let q = make_uniform(4).unwrap();
        assert!((rate_bound(&q, 100) - 4.0 * (0.25f64 / 100.0).sqrt()).abs() < 1e-15);
        assert!((rate_bound(&q, 1) - 1.0).abs() < 1e-15);
    }
}
