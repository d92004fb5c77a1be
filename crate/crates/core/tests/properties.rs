use fundlim::classify::{bayes_regime, expected_regret_exact, expected_regret_mc, rate_bound, ThresholdRule};
use fundlim::dist::{make_uniform, sample_counts, CategoricalSampler};
use fundlim::envelope::{
    bayes_error, bayes_error_general, envelope_regret, l1_distance, redundancy_bounds, shannon_entropy, ALPHA_MAX,
};
use fundlim::estimate::{
    compression_entropy_estimator, optimal_bayes_error, optimal_entropy_estimator, optimal_l1_estimator,
    plugin_entropy, plugin_l1,
};
use fundlim::oracle::{binomial_cdf, poisson_cdf, LowerBoundPrior};
use fundlim::polyapprox::{eval_poly, remez_best_approx};
use fundlim::{
    CodingScheme, DecisionRegime, EmpiricalCounts, EstimatorParams, FiniteDistribution, LabeledDistribution, RngSeed,
    SamplingMode,
};
use proptest::prelude::*;
use rand::Rng;

fn dist(s: usize) -> impl Strategy<Value = FiniteDistribution> {
    prop::collection::vec(0.01f64..1.0, s).prop_map(|w| FiniteDistribution::from_weights(&w).unwrap())
}

fn pair(max_s: usize) -> impl Strategy<Value = (FiniteDistribution, FiniteDistribution)> {
    (2..=max_s).prop_flat_map(|s| (dist(s), dist(s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multinomial_counts_sum_to_n((p, _) in pair(30), n in 1u64..5000, seed in any::<u64>()) {
        let c = sample_counts(&p, n, SamplingMode::Multinomial, RngSeed::new(seed, 3)).unwrap();
        prop_assert_eq!(c.total(), n);
        let again = sample_counts(&p, n, SamplingMode::Multinomial, RngSeed::new(seed, 3)).unwrap();
        prop_assert_eq!(c.counts(), again.counts());
    }

    #[test]
    fn entropy_and_bayes_error_are_concave((p1, p2) in pair(20), q_seed in 0u64..1000) {
        let s = p1.support_size();
        let mut rng = RngSeed::new(q_seed, 0).rng();
        let q = FiniteDistribution::from_weights(&(0..s).map(|_| rng.random_range(0.01..1.0)).collect::<Vec<f64>>()).unwrap();
        for lambda in [0.25, 0.5, 0.75] {
            let mix = p1.mix(&p2, lambda).unwrap();
            let h = shannon_entropy(&mix).unwrap();
            let hs = lambda * shannon_entropy(&p1).unwrap() + (1.0 - lambda) * shannon_entropy(&p2).unwrap();
            prop_assert!(h >= hs - 1e-12);
            let be = |r: &FiniteDistribution| bayes_error(&LabeledDistribution::balanced(r.clone(), q.clone()).unwrap());
            prop_assert!(be(&mix) >= lambda * be(&p1) + (1.0 - lambda) * be(&p2) - 1e-12);
        }
    }

    #[test]
    fn regret_nonnegative_and_zero_on_scheffe_set((r, q) in pair(25), bits in any::<u64>()) {
        let ld = LabeledDistribution::balanced(r, q).unwrap();
        let s = ld.support_size();
        let regime = DecisionRegime::new((0..s).map(|i| (bits >> (i % 64)) & 1 == 1).collect());
        prop_assert!(envelope_regret(&regime, &ld).unwrap() >= -1e-15);
        prop_assert_eq!(envelope_regret(&bayes_regime(&ld).unwrap(), &ld).unwrap(), 0.0);
    }

    #[test]
    fn l1_is_a_metric((a, b) in pair(20), seed in any::<u64>()) {
        let s = a.support_size();
        let mut rng = RngSeed::new(seed, 0).rng();
        let c = FiniteDistribution::from_weights(&(0..s).map(|_| rng.random_range(0.01..1.0)).collect::<Vec<f64>>()).unwrap();
        prop_assert_eq!(l1_distance(&a, &b).unwrap(), l1_distance(&b, &a).unwrap());
        prop_assert!(l1_distance(&a, &c).unwrap() <= l1_distance(&a, &b).unwrap() + l1_distance(&b, &c).unwrap() + 1e-12);
    }

    #[test]
    fn general_bayes_error_matches_balanced_form((r, q) in pair(30)) {
        let ld = LabeledDistribution::balanced(r, q).unwrap();
        prop_assert!((bayes_error(&ld) - bayes_error_general(&ld)).abs() <= 1e-12);
    }

    #[test]
    fn eval_poly_matches_monomial_form(t in 0.05f64..0.95, degree in 1usize..=8, x in 0.0f64..=1.0) {
        let p = remez_best_approx(|u| (u - t).abs(), 0.0, 1.0, degree, 1e-3).unwrap();
        let mono = p.to_monomial();
        let direct: f64 = mono.iter().enumerate().map(|(k, c)| c * x.powi(k as i32)).sum();
        prop_assert!((eval_poly(&p, x) - direct).abs() <= 1e-10);
    }

    #[test]
    fn exact_regret_is_nonnegative((r, q) in pair(12), n in 1u64..400, threshold in 0u64..10) {
        let ld = LabeledDistribution::balanced(r, q).unwrap();
        let rules = [
            ThresholdRule::mle(),
            ThresholdRule::tq(),
            ThresholdRule::custom(move |_, x, _, _| x >= threshold),
        ];
        for rule in &rules {
            prop_assert!(expected_regret_exact(rule, &ld, n).unwrap().regret >= -1e-15);
        }
    }

    #[test]
    fn tq_within_guard_of_mle((r, q) in pair(40), n in 1u64..2000) {
        let ld = LabeledDistribution::balanced(r, q.clone()).unwrap();
        let tq = expected_regret_exact(&ThresholdRule::tq(), &ld, n).unwrap().regret;
        let mle = expected_regret_exact(&ThresholdRule::mle(), &ld, n).unwrap().regret;
        prop_assert!(tq <= mle + 4.0 * rate_bound(&q, n));
    }

    #[test]
    fn pathwise_compression_dominates_plugin(p in dist(10), n in 1usize..300, seed in any::<u64>()) {
        let mut rng = RngSeed::new(seed, 0).rng();
        let seq = CategoricalSampler::new(&p).sample_sequence(n, &mut rng);
        let counts = EmpiricalCounts::from_sequence(&seq, 10).unwrap();
        let comp = compression_entropy_estimator(&seq, 10, CodingScheme::AddBeta(0.5)).unwrap().estimate;
        prop_assert!(comp >= plugin_entropy(&counts).unwrap().estimate - 1e-10);
    }

    #[test]
    fn estimates_respect_ranges(counts in prop::collection::vec(0u64..60, 2..40)) {
        prop_assume!(counts.iter().sum::<u64>() >= 4);
        let s = counts.len();
        let c = EmpiricalCounts::multinomial(counts).unwrap();
        let q = make_uniform(s).unwrap();
        let h = optimal_entropy_estimator(&c, &EstimatorParams::default()).unwrap().estimate;
        prop_assert!((0.0..=(s as f64).log2() + 1e-12).contains(&h));
        let l1 = optimal_l1_estimator(&c, &q, &EstimatorParams::l1()).unwrap().estimate;
        prop_assert!((0.0..=2.0).contains(&l1));
        let be = optimal_bayes_error(&c, &q, &EstimatorParams::l1()).unwrap().estimate;
        prop_assert!((0.0..=0.5).contains(&be));
        prop_assert!((0.0..=2.0).contains(&plugin_l1(&c, &q).unwrap().estimate));
    }

    #[test]
    fn prior_separation_is_tau_invariant(s in 2usize..12, n in 10u64..500, bits in any::<u64>()) {
        let prior = LowerBoundPrior::new(make_uniform(s).unwrap(), n, 0.4).unwrap();
        let tau: Vec<bool> = (0..s).map(|i| (bits >> i) & 1 == 1).collect();
        let flipped: Vec<bool> = tau.iter().map(|b| !b).collect();
        prop_assert!((prior.separation(&tau) - prior.separation(&flipped)).abs() <= 1e-14);
    }
}

#[test]
fn redundancy_bounds_ordered_on_grid() {
    for k in 0..100 {
        let a = 0.001 + (ALPHA_MAX - 0.002) * k as f64 / 99.0;
        let b = redundancy_bounds(a).unwrap();
        assert!(b.lower_bits <= b.upper_bits, "alpha {a}");
    }
}

#[test]
fn remez_error_shrinks_with_degree() {
    for t in [0.2, 0.5] {
        let mut prev = f64::INFINITY;
        for d in (2..=14).step_by(2) {
            let e = remez_best_approx(|u| (u - t).abs(), 0.0, 1.0, d, 1e-3).unwrap().sup_error();
            assert!(e <= prev * (1.0 + 1e-3), "|x - {t}| degree {d}");
            prev = e;
        }
    }
    let mut prev = f64::INFINITY;
    for d in (2..=14).step_by(2) {
        let f = |u: f64| if u > 0.0 { u * u.log2() } else { 0.0 };
        let e = remez_best_approx(f, 0.0, 1.0, d, 1e-3).unwrap().sup_error();
        assert!(e <= prev * (1.0 + 1e-3), "x lg x degree {d}");
        prev = e;
    }
}

#[test]
fn exact_regret_agrees_with_monte_carlo() {
    let mut rng = RngSeed::new(11, 0).rng();
    for case in 0..4 {
        let s = 6 + case;
        let w = |rng: &mut rand_chacha::ChaCha8Rng| (0..s).map(|_| rng.random_range(0.05..1.0)).collect::<Vec<f64>>();
        let r = FiniteDistribution::from_weights(&w(&mut rng)).unwrap();
        let q = FiniteDistribution::from_weights(&w(&mut rng)).unwrap();
        let ld = LabeledDistribution::balanced(r, q).unwrap();
        let n = 50 * (case as u64 + 1);
        for rule in [ThresholdRule::mle(), ThresholdRule::tq()] {
            let ex = expected_regret_exact(&rule, &ld, n).unwrap();
            let mc = expected_regret_mc(&rule, &ld, n, 4000, 17 + case as u64, SamplingMode::Multinomial).unwrap();
            assert!(
                (ex.regret - mc.regret).abs() <= 3.0 * mc.mc_stderr + 1e-12,
                "case {case}: exact {} mc {} ± {}",
                ex.regret,
                mc.regret,
                mc.mc_stderr
            );
        }
    }
}

#[test]
fn exact_cdfs_agree_with_sampling() {
    use rand_distr::{Binomial, Distribution, Poisson};
    let mut rng = RngSeed::new(99, 0).rng();
    let draws = 200_000;
    for (n, p, k) in [(40u64, 0.3, 10u64), (500, 0.02, 12), (7, 0.9, 6)] {
        let bin = Binomial::new(n, p).unwrap();
        let hits = (0..draws).filter(|_| bin.sample(&mut rng) <= k).count() as f64 / draws as f64;
        let exact = binomial_cdf(n, p, k).unwrap();
        let se = (exact * (1.0 - exact) / draws as f64).sqrt();
        assert!((hits - exact).abs() <= 4.0 * se + 1e-12, "binomial n={n} p={p} k={k}");
    }
    for (lambda, k) in [(0.5, 0u64), (3.0, 4), (40.0, 35)] {
        let poi = Poisson::new(lambda).unwrap();
        let hits = (0..draws).filter(|_| poi.sample(&mut rng) as u64 <= k).count() as f64 / draws as f64;
        let exact = poisson_cdf(lambda, k).unwrap();
        let se = (exact * (1.0 - exact) / draws as f64).sqrt();
        assert!((hits - exact).abs() <= 4.0 * se + 1e-12, "poisson lambda={lambda} k={k}");
    }
}

#[test]
fn empirical_distribution_converges() {
    let p = fundlim::dist::make_zipf(50, 1.0).unwrap();
    let mad = |n: u64| -> f64 {
        (0..1000)
            .map(|t| {
                let c = sample_counts(&p, n, SamplingMode::Multinomial, RngSeed::new(n, t)).unwrap();
                let e = fundlim::dist::empirical_distribution(&c).unwrap();
                l1_distance(&e, &p).unwrap() / 50.0
            })
            .sum::<f64>()
            / 1000.0
    };
    let (a, b, c) = (mad(100), mad(1000), mad(10_000));
    assert!(a > b && b > c, "{a} {b} {c}");
}
