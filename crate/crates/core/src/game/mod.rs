//! The verification game between an experimentalist, who reports a state,
//! and a verifier, who measures a copy in the report's eigenbasis and pays
//! according to a scoring rule.

mod counterexample;
mod search;

pub use counterexample::{fidelity_counterexample, FidelityCounterexample};
pub use search::{compass_search, SearchResult};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::quantum::{born_probabilities, DensityMatrix};
use crate::rng::{self, Domain};
use crate::scoring::{expected_reward, report_measurement, ScoringRule};

#[derive(Debug, Clone)]
pub struct GameConfig {
    pub truth: DensityMatrix,
    pub report: DensityMatrix,
    pub rule: ScoringRule,
    pub rounds: usize,
    pub seed: u64,
}

impl GameConfig {
    pub fn new(truth: DensityMatrix, report: DensityMatrix, rule: ScoringRule, rounds: usize, seed: u64) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::invalid("rounds must be >= 1"));
        }
        if truth.dim() != report.dim() {
            return Err(Error::DimensionMismatch { expected: truth.dim(), found: report.dim() });
        }
        Ok(GameConfig { truth, report, rule, rounds, seed })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameTranscript {
    pub outcomes: Vec<usize>,
    pub payoffs: Vec<ExtReal>,
    pub mean_payoff: ExtReal,
    pub analytic_expected: ExtReal,
    /// Sample standard deviation over `sqrt(rounds)`; `None` when a payoff is
    /// infinite or there is a single round.
    pub standard_error: Option<f64>,
}

impl GameTranscript {
    /// `|mean - analytic|` in units of the standard error.
    pub fn z_score(&self) -> Option<f64> {
        let (mean, exp, se) = (self.mean_payoff.finite()?, self.analytic_expected.finite()?, self.standard_error?);
        if se == 0.0 {
            return Some(if mean == exp { 0.0 } else { f64::INFINITY });
        }
        Some((mean - exp).abs() / se)
    }
}

/// One verification: sample an outcome of measuring `truth` in the eigenbasis
/// of `report`, then pay for it.
pub fn play_round<R: Rng + ?Sized>(
    truth: &DensityMatrix,
    report: &DensityMatrix,
    rule: &ScoringRule,
    rng: &mut R,
) -> Result<(usize, ExtReal)> {
    let (basis, s) = report_measurement(report)?;
    let p = born_probabilities(truth, &basis)?;
    let outcome = p.inverse_cdf(rng.random::<f64>());
    Ok((outcome, rule.payoff(&s, outcome)?))
}

/// Plays `config.rounds` independent rounds.
///
/// Round `k` draws from its own stream keyed by `(seed, k)`, so the
/// transcript does not depend on the thread count.
pub fn simulate_game(config: &GameConfig) -> Result<GameTranscript> {
    let (basis, s) = report_measurement(&config.report)?;
    let p = born_probabilities(&config.truth, &basis)?;
    let payoff_table = (0..s.len()).map(|i| config.rule.payoff(&s, i)).collect::<Result<Vec<_>>>()?;
    let outcomes: Vec<usize> = (0..config.rounds as u64)
        .into_par_iter()
        .map(|k| {
            let u: f64 = rng::stream(config.seed, Domain::GameRound, k).random();
            p.inverse_cdf(u)
        })
        .collect();
    let payoffs: Vec<ExtReal> = outcomes.iter().map(|&i| payoff_table[i]).collect();

    let n = payoffs.len() as f64;
    let finite: Option<Vec<f64>> = payoffs.iter().map(|x| x.finite()).collect();
    let (mean_payoff, standard_error) = match finite {
        Some(xs) => {
            let mean = xs.iter().sum::<f64>() / n;
            let se = (xs.len() > 1).then(|| {
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            });
            (ExtReal::Finite(mean), se)
        }
        None => (ExtReal::NegInfinity, None),
    };
    Ok(GameTranscript {
        outcomes,
        payoffs,
        mean_payoff,
        analytic_expected: expected_reward(&config.rule, &config.truth, &config.report)?,
        standard_error,
    })
}

/// Index of the candidate with the highest expected reward; ties go to the
/// lowest index.
pub fn best_report_on_grid(truth: &DensityMatrix, candidates: &[DensityMatrix], rule: &ScoringRule) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::invalid("candidate list is empty"));
    }
    let scores = candidates
        .par_iter()
        .map(|c| expected_reward(rule, truth, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(argmax(&scores))
}

/// First index of the maximum.
pub fn argmax(scores: &[ExtReal]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// Qubit states on a spherical grid of the Bloch ball: `resolution` radii in
/// `[0, 1]`, `resolution` polar angles in `[0, pi]` and `resolution` azimuths
/// in `[0, 2 pi)`. Returns `resolution^3` states (duplicates at the centre and
/// poles are kept).
pub fn bloch_grid(resolution: usize) -> Vec<DensityMatrix> {
    assert!(resolution >= 2, "Bloch grid needs resolution >= 2");
    let n = resolution;
    let mut out = Vec::with_capacity(n * n * n);
    for k in 0..n {
        let r = k as f64 / (n - 1) as f64;
        for j in 0..n {
            let theta = std::f64::consts::PI * j as f64 / (n - 1) as f64;
            for l in 0..n {
                let phi = 2.0 * std::f64::consts::PI * l as f64 / n as f64;
                let v = bloch_from_polar(r, theta, phi);
                out.push(DensityMatrix::from_bloch(v).expect("grid point inside the ball"));
            }
        }
    }
    out
}

pub(crate) fn bloch_from_polar(r: f64, theta: f64, phi: f64) -> [f64; 3] {
    [r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    #[test]
    fn play_round_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let zero = DensityMatrix::basis_state(2, 0);
        let mixed = DensityMatrix::maximally_mixed(2);
        let log = ScoringRule::log();
        for _ in 0..50 {
            assert_eq!(play_round(&zero, &zero, &log, &mut rng).unwrap(), (0, ExtReal::ZERO));
            let (_, pay) = play_round(&mixed, &mixed, &log, &mut rng).unwrap();
            assert!((pay.finite().unwrap() + LN_2).abs() < 1e-14);
        }
        let mut hits = 0;
        for _ in 0..2000 {
            let (i, pay) = play_round(&DensityMatrix::plus(), &zero, &log, &mut rng).unwrap();
            if i == 1 {
                assert_eq!(pay, ExtReal::NegInfinity);
                hits += 1;
            } else {
                assert_eq!(pay, ExtReal::ZERO);
            }
        }
        // Binomial(2000, 1/2): 6 sigma is about 134.
        assert!((hits as i64 - 1000).abs() < 134, "{hits}");
    }

    #[test]
    fn simulate_game_examples() {
        let log = ScoringRule::log();
        let cfg = GameConfig::new(DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 0), log, 1, 1).unwrap();
        let t = simulate_game(&cfg).unwrap();
        assert_eq!(t.outcomes.len(), 1);
        assert_eq!(t.standard_error, None);

        let cfg = GameConfig::new(DensityMatrix::plus(), DensityMatrix::basis_state(2, 0), log, 1000, 9).unwrap();
        let t = simulate_game(&cfg).unwrap();
        assert_eq!(t.mean_payoff, ExtReal::NegInfinity);
        assert_eq!(t.analytic_expected, ExtReal::NegInfinity);

        assert!(GameConfig::new(DensityMatrix::plus(), DensityMatrix::plus(), log, 0, 1).is_err());
        assert!(GameConfig::new(DensityMatrix::plus(), DensityMatrix::maximally_mixed(3), log, 5, 1).is_err());
    }

    #[test]
    fn best_report_examples() {
        let log = ScoringRule::log();
        let mixed = DensityMatrix::maximally_mixed(2);
        let zero = DensityMatrix::basis_state(2, 0);
        assert_eq!(best_report_on_grid(&mixed, &[zero.clone(), mixed.clone()], &log).unwrap(), 1);
        assert!(best_report_on_grid(&mixed, &[], &log).is_err());

        let truth = DensityMatrix::from_bloch([0.3, 0.1, -0.6]).unwrap();
        let cands: Vec<_> = [0.0, 0.1, 0.2].iter().map(|&e| truth.depolarize(e).unwrap()).collect();
        assert_eq!(best_report_on_grid(&truth, &cands, &log).unwrap(), 0);
        // Ties resolve to the first index.
        assert_eq!(best_report_on_grid(&truth, &[truth.clone(), truth.clone()], &log).unwrap(), 0);
    }

    #[test]
    fn bloch_grid_size() {
        let g = bloch_grid(5);
        assert_eq!(g.len(), 125);
        assert!(g.iter().all(|s| s.dim() == 2));
    }
}
