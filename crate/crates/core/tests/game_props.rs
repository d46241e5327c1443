use hers_core::game::{simulate_game, GameConfig};
use hers_core::quantum::random::{full_rank_state, haar_pure_state, hilbert_schmidt_state};
use hers_core::rng::{stream, Domain};
use hers_core::scoring::expected_reward;
use hers_core::{DensityMatrix, ScoringRule};
use rand::Rng;

fn config(k: u64, rounds: usize) -> GameConfig {
    let mut rng = stream(21, Domain::Scenario, k);
    let dim = 2 + (k % 3) as usize;
    let truth = hilbert_schmidt_state(dim, &mut rng);
    let report = full_rank_state(dim, 0.1, &mut rng);
    let rule = if k.is_multiple_of(2) {
        ScoringRule::hers(rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0))
    } else {
        ScoringRule::brier(rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0))
    }
    .unwrap();
    GameConfig::new(truth, report, rule, rounds, k).unwrap()
}

#[test]
fn same_config_same_transcript() {
    for k in 0..5 {
        let cfg = config(k, 5_000);
        assert_eq!(simulate_game(&cfg).unwrap(), simulate_game(&cfg).unwrap());
    }
}

#[test]
fn transcript_does_not_depend_on_thread_count() {
    let cfg = config(3, 20_000);
    let parallel = simulate_game(&cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| simulate_game(&cfg).unwrap());
    assert_eq!(parallel, serial);
}

#[test]
fn sample_mean_converges_to_the_analytic_reward() {
    let trials = 300;
    let within = (0..trials)
        .filter(|&k| simulate_game(&config(1000 + k, 4_000)).unwrap().z_score().unwrap() <= 5.0)
        .count();
    // At 5 standard errors a miss is rare enough that 99% is a loose floor.
    assert!(within as f64 >= 0.99 * trials as f64, "{within}/{trials}");
}

#[test]
fn honest_report_beats_every_other_candidate() {
    let rule = ScoringRule::log();
    for k in 0..100u64 {
        let mut rng = stream(22, Domain::Scenario, k);
        let dim = 2 + (k % 2) as usize;
        let truth = hilbert_schmidt_state(dim, &mut rng);
        let honest = expected_reward(&rule, &truth, &truth).unwrap();
        for j in 0..20 {
            let report = match j % 4 {
                0 => haar_pure_state(dim, &mut rng),
                1 => truth.mix(&hilbert_schmidt_state(dim, &mut rng), 1e-2).unwrap(),
                2 => DensityMatrix::maximally_mixed(dim),
                _ => hilbert_schmidt_state(dim, &mut rng),
            };
            assert!(honest > expected_reward(&rule, &truth, &report).unwrap());
        }
    }
}
