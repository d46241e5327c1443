use hers_core::bayes::{
    log_likelihood, posterior_mean, posterior_update, sample_prior, MeasurementScheme, ParticleEnsemble, PriorSpec,
    UpdateOptions,
};
use hers_core::game::argmax;
use hers_core::linalg;
use hers_core::quantum::random::{haar_pure_state, hilbert_schmidt_state, random_hermitian};
use hers_core::quantum::born_probabilities;
use hers_core::rng::{stream, Domain};
use hers_core::scoring::{classical_expected_score, ensemble_expected_reward};
use hers_core::{DensityMatrix, ExtReal, Povm, ScoringRule};
use proptest::prelude::*;
use rand::Rng;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}

fn random_discrete<R: Rng>(dim: usize, members: usize, rng: &mut R) -> ParticleEnsemble {
    let states: Vec<DensityMatrix> = (0..members).map(|_| hilbert_schmidt_state(dim, rng)).collect();
    let raw: Vec<f64> = (0..members).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    ParticleEnsemble::new(states, raw.into_iter().map(|w| w / total).collect()).unwrap()
}

fn candidates_around<R: Rng>(mean: &DensityMatrix, extra: usize, rng: &mut R) -> Vec<DensityMatrix> {
    let dim = mean.dim();
    let mut out = vec![mean.clone()];
    for k in 0..50 {
        let eps = 5e-3 * (1 + k % 5) as f64;
        out.push(if k % 2 == 0 {
            mean.mix(&hilbert_schmidt_state(dim, rng), eps).unwrap()
        } else {
            let x = random_hermitian(dim, rng);
            let n = x.norm();
            mean.conjugate(&linalg::unitary_exp(&x.scale(1.0 / n), eps).unwrap()).unwrap()
        });
    }
    for _ in 0..extra {
        out.push(hilbert_schmidt_state(dim, rng));
    }
    out
}

#[test]
fn discrete_prior_particle_mean_is_the_ensemble_mean() {
    let spec = PriorSpec::from_pairs(vec![(DensityMatrix::basis_state(2, 0), 0.5), (DensityMatrix::plus(), 0.5)]).unwrap();
    let count = 10_000;
    let particles = sample_prior(&spec, count, 3).unwrap();
    let mean = posterior_mean(&particles).unwrap();
    // Each entry is a two-point average; its standard error is 0.25 / sqrt(count).
    let se = 0.25 / (count as f64).sqrt();
    let expected = [[0.75, 0.25], [0.25, 0.25]];
    for (i, row) in expected.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            assert!((mean.matrix()[(i, j)].re - e).abs() <= 3.0 * se);
        }
    }
}

#[test]
fn hilbert_schmidt_prior_mean_is_maximally_mixed() {
    let particles = sample_prior(&PriorSpec::hilbert_schmidt(2).unwrap(), 100_000, 5).unwrap();
    let mean = posterior_mean(&particles).unwrap();
    assert!(mean.trace_distance(&DensityMatrix::maximally_mixed(2)).unwrap() < 0.01);
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn batches_compose_like_one_update(seed in any::<u64>(), dim in 2usize..=3, n in 1usize..30, split in 0usize..30) {
        let mut rng = stream(seed, Domain::Scenario, 30);
        let prior = random_discrete(dim, 6, &mut rng);
        let truth = prior.particles()[0].clone();
        let record = MeasurementScheme::default_for(dim).simulate(&truth, n, &mut rng).unwrap();
        let (a, b) = record.split_at(split.min(n));
        let opts = UpdateOptions::without_resampling();
        let once = posterior_update(&prior, &record, opts).unwrap();
        let twice = posterior_update(&posterior_update(&prior, &a, opts).unwrap(), &b, opts).unwrap();
        for (x, y) in once.weights().iter().zip(twice.weights()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!((once.log_evidence() - twice.log_evidence()).abs() < 1e-9);
    }

    #[test]
    fn record_order_does_not_matter(seed in any::<u64>(), n in 2usize..25) {
        let mut rng = stream(seed, Domain::Scenario, 31);
        let prior = random_discrete(2, 5, &mut rng);
        let record = MeasurementScheme::RandomPauli.simulate(&prior.particles()[1], n, &mut rng).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let opts = UpdateOptions::without_resampling();
        let a = posterior_update(&prior, &record, opts).unwrap();
        let b = posterior_update(&prior, &record.permuted(&order).unwrap(), opts).unwrap();
        for (x, y) in a.weights().iter().zip(b.weights()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn likelihood_factorizes(seed in any::<u64>(), n in 1usize..20) {
        let mut rng = stream(seed, Domain::Scenario, 32);
        let state = hilbert_schmidt_state(2, &mut rng);
        let record = MeasurementScheme::RandomPauli.simulate(&state, n, &mut rng).unwrap();
        let whole = log_likelihood(&state, &record).unwrap().finite().unwrap();
        let parts: f64 = (0..n).map(|i| log_likelihood(&state, &record.slice(i, i + 1)).unwrap().finite().unwrap()).sum();
        prop_assert!((whole - parts).abs() < 1e-10);
    }
}

#[test]
fn posterior_mean_is_best_under_the_log_score() {
    let rule = ScoringRule::log();
    for s in 0..30u64 {
        let mut rng = stream(33, Domain::Scenario, s);
        let dim = 2 + (s % 2) as usize;
        let prior = random_discrete(dim, 4 + (s % 5) as usize, &mut rng);
        let truth = prior.particles()[0].clone();
        let record = MeasurementScheme::default_for(dim).simulate(&truth, (s % 12) as usize, &mut rng).unwrap();
        let post = posterior_update(&prior, &record, UpdateOptions::without_resampling()).unwrap();
        let mean = posterior_mean(&post).unwrap();
        let grid = candidates_around(&mean, 200, &mut rng);
        let scores: Vec<ExtReal> = grid.iter().map(|c| ensemble_expected_reward(&rule, post.iter(), c).unwrap()).collect();
        assert_eq!(argmax(&scores), 0, "scenario {s}");
    }
}

#[test]
fn posterior_mean_is_best_for_a_fixed_informationally_complete_povm() {
    // Scoring with a report-independent POVM: the ensemble-averaged score is
    // linear in the truth, so the forecast from the mean state wins.
    let povm = Povm::pauli6();
    for (k, rule) in [ScoringRule::log(), ScoringRule::brier(0.0, 1.0).unwrap()].into_iter().enumerate() {
        for s in 0..20u64 {
            let mut rng = stream(34 + k as u64, Domain::Scenario, s);
            let ensemble = random_discrete(2, 5, &mut rng);
            let mean = posterior_mean(&ensemble).unwrap();
            let grid = candidates_around(&mean, 200, &mut rng);
            let scores: Vec<ExtReal> = grid
                .iter()
                .map(|c| {
                    let q = born_probabilities(c, &povm).unwrap();
                    let mut acc = ExtReal::ZERO;
                    for (state, w) in ensemble.iter() {
                        let p = born_probabilities(state, &povm).unwrap();
                        acc = acc + classical_expected_score(&rule, &p, &q).unwrap().scale(w);
                    }
                    acc
                })
                .collect();
            assert_eq!(argmax(&scores), 0, "rule {k} scenario {s}");
        }
    }
}

#[test]
fn posterior_concentrates_on_the_truth() {
    let spec = PriorSpec::hilbert_schmidt(2).unwrap();
    let prior = sample_prior(&spec, 2_000, 40).unwrap();
    let checkpoints = [0usize, 10, 100, 1000];
    let trials = 100;
    let mut distances = vec![Vec::with_capacity(trials); checkpoints.len()];
    for t in 0..trials as u64 {
        let truth = spec.draw(&mut stream(41, Domain::RiskTruth, t));
        let record = MeasurementScheme::Fixed(Povm::qubit_sic())
            .simulate(&truth, 1000, &mut stream(41, Domain::RiskRecord, t))
            .unwrap();
        let mut ensemble = prior.clone();
        let mut done = 0;
        for (i, &n) in checkpoints.iter().enumerate() {
            ensemble = posterior_update(&ensemble, &record.slice(done, n), UpdateOptions { resampling: hers_core::bayes::Resampling::Systematic { seed: t } }).unwrap();
            done = n;
            distances[i].push(posterior_mean(&ensemble).unwrap().trace_distance(&truth).unwrap());
        }
    }
    let medians: Vec<f64> = distances
        .into_iter()
        .map(|mut d| {
            d.sort_by(f64::total_cmp);
            d[d.len() / 2]
        })
        .collect();
    for w in medians.windows(2) {
        assert!(w[1] < w[0], "medians {medians:?}");
    }
}

#[test]
fn pure_prior_members_are_eliminated_by_impossible_outcomes() {
    let zero = DensityMatrix::basis_state(2, 0);
    let one = DensityMatrix::basis_state(2, 1);
    let prior = ParticleEnsemble::new(vec![zero.clone(), one.clone(), haar_pure_state(2, &mut stream(1, Domain::Scenario, 50))], vec![0.25, 0.25, 0.5]).unwrap();
    let record = hers_core::bayes::MeasurementRecord::from_states(&[zero.clone(), zero]).unwrap();
    let post = posterior_update(&prior, &record, UpdateOptions::without_resampling()).unwrap();
    assert_eq!(post.weights()[1], 0.0);
}
