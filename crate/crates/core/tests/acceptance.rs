//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hers_core::appendix::{construct_counterexample, derivative_tolerance, verify_ci_equality, PerturbationCurve, DEFAULT_STEP};
use hers_core::bayes::{
    estimator_risk, mle_estimate, posterior_mean, posterior_update, sample_prior, Estimator, MeasurementRecord,
    MeasurementScheme, MleOptions, ParticleEnsemble, PriorSpec, RiskConfig, UpdateOptions,
};
use hers_core::game::{fidelity_counterexample, simulate_game, GameConfig};
use hers_core::linalg::{self, CMatrix};
use hers_core::quantum::random::{full_rank_state, haar_pure_state, hilbert_schmidt_state, random_hermitian};
use hers_core::quantum::{relative_entropy, tensor_power};
use hers_core::rng::{stream, Domain};
use hers_core::scoring::{ensemble_expected_reward, propriety_gap};
use hers_core::{DensityMatrix, ExtReal, ScoringRule};
use rand::Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s(e: hers_core::Error) -> String {
    e.to_string()
}

fn strict_propriety() -> Check {
    let rule = ScoringRule::log();
    let mut violations = 0;
    let mut pairs = 0;
    let mut worst_self_gap: f64 = 0.0;
    for k in 0..1200u64 {
        let mut rng = stream(1, Domain::Scenario, k);
        let dim = 2 + (k % 3) as usize;
        let truth = hilbert_schmidt_state(dim, &mut rng);
        let report = if k % 6 == 5 { haar_pure_state(dim, &mut rng) } else { hilbert_schmidt_state(dim, &mut rng) };
        if truth.frobenius_distance(&report) < 1e-9 {
            continue;
        }
        pairs += 1;
        let gap = propriety_gap(&rule, &truth, &report).map_err(e2s)?;
        if !(gap > ExtReal::ZERO) {
            violations += 1;
        }
        let self_gap = propriety_gap(&rule, &truth, &truth).map_err(e2s)?;
        worst_self_gap = worst_self_gap.max(self_gap.to_f64().abs());
    }
    ensure(pairs >= 1000, format!("only {pairs} pairs"))?;
    ensure(violations == 0, format!("{violations} of {pairs} pairs had gap <= 0"))?;
    ensure(worst_self_gap < 1e-10, format!("gap at report = truth reached {worst_self_gap:e}"))?;
    Ok(format!("{pairs} pairs, 0 violations, max |gap(rho, rho)| = {worst_self_gap:.1e}"))
}

fn monte_carlo_reward() -> Check {
    let rounds = 100_000;
    let anchor = simulate_game(
        &GameConfig::new(
            DensityMatrix::maximally_mixed(2),
            DensityMatrix::maximally_mixed(2),
            ScoringRule::hers(0.0, 1.0).map_err(e2s)?,
            rounds,
            7,
        )
        .map_err(e2s)?,
    )
    .map_err(e2s)?;
    let anchor_mean = anchor.mean_payoff.finite().ok_or("anchor mean is infinite")?;
    #[allow(clippy::approx_constant)]
    ensure((anchor_mean + 0.693147).abs() <= 0.01, format!("anchor mean {anchor_mean}"))?;

    let mut within = 0;
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let mut rng = stream(2, Domain::Scenario, k);
        let dim = 2 + (k % 3) as usize;
        let truth = hilbert_schmidt_state(dim, &mut rng);
        let report = full_rank_state(dim, 0.2, &mut rng);
        let rule = if k % 2 == 0 {
            ScoringRule::hers(rng.random_range(-2.0..2.0), rng.random_range(0.5..3.0))
        } else {
            ScoringRule::brier(rng.random_range(-2.0..2.0), rng.random_range(0.5..3.0))
        }
        .map_err(e2s)?;
        let t = simulate_game(&GameConfig::new(truth, report, rule, rounds, 100 + k).map_err(e2s)?).map_err(e2s)?;
        let z = t.z_score().ok_or("payoff not finite")?;
        worst = worst.max(z);
        if z <= 5.0 {
            within += 1;
        }
    }
    ensure(within >= 19, format!("only {within}/20 configs within 5 SE (worst z = {worst:.2})"))?;
    Ok(format!("anchor mean {anchor_mean:.6}; {within}/20 within 5 SE (worst z = {worst:.2})"))
}

fn fidelity_case() -> Check {
    let r = fidelity_counterexample(20).map_err(e2s)?;
    let expected = CMatrix::from_row_slice(
        2,
        2,
        &[linalg::c(0.75, 0.0), linalg::c(0.25, 0.0), linalg::c(0.25, 0.0), linalg::c(0.25, 0.0)],
    );
    let mean_err = linalg::frobenius_distance(r.mean_state.matrix(), &expected);
    ensure(mean_err < 1e-12, format!("mean state off by {mean_err:e}"))?;
    ensure((r.top_eigenvalue - 0.853553).abs() <= 1e-6, format!("top eigenvalue {}", r.top_eigenvalue))?;
    ensure(
        (r.fidelity_optimum_value - 0.853553).abs() <= 1e-6,
        format!("fidelity optimum value {}", r.fidelity_optimum_value),
    )?;
    ensure(
        r.fidelity_optimum_overlap_with_top >= 1.0 - 1e-6,
        format!("fidelity optimum overlaps the top eigenprojector by {}", r.fidelity_optimum_overlap_with_top),
    )?;
    let log = ScoringRule::log();
    let pure_reward =
        ensemble_expected_reward(&log, r.ensemble.iter().map(|(s, w)| (s, *w)), &r.top_eigenprojector).map_err(e2s)?;
    ensure(pure_reward == ExtReal::NegInfinity, format!("pure report HERS reward {pure_reward}"))?;
    ensure(r.hers_reward_of_mean > pure_reward, "mean state does not beat the pure report")?;
    ensure(r.fidelity_optimum_value > r.fidelity_of_mean, "fidelity does not prefer the pure report")?;
    ensure(
        (r.fidelity_of_mean - 0.625).abs() <= 1e-6,
        format!(
            "average fidelity of reporting the mean is {:.6}, expected 0.625 (Tr(mean^2) = {:.6})",
            r.fidelity_of_mean,
            linalg::trace_of_product(r.mean_state.matrix(), r.mean_state.matrix()).re
        ),
    )?;
    Ok(format!(
        "lambda = {:.6}, F(top) = {:.6}, F(mean) = {:.6}, HERS(mean) = {} > HERS(top) = -inf",
        r.top_eigenvalue, r.fidelity_optimum_value, r.fidelity_of_mean, r.hers_reward_of_mean
    ))
}

fn scenario_posterior(s: u64) -> Result<ParticleEnsemble, String> {
    let mut rng = stream(4, Domain::Scenario, s);
    let dim = 2 + (s % 2) as usize;
    let prior = if s % 5 == 4 {
        sample_prior(&PriorSpec::hilbert_schmidt(dim).map_err(e2s)?, 400, s).map_err(e2s)?
    } else {
        let m = rng.random_range(3..9);
        let states: Vec<DensityMatrix> = (0..m).map(|_| hilbert_schmidt_state(dim, &mut rng)).collect();
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        ParticleEnsemble::new(states, raw.iter().map(|w| w / total).collect()).map_err(e2s)?
    };
    let truth = prior.particles()[rng.random_range(0..prior.len())].clone();
    let n = rng.random_range(0..=20);
    let record = MeasurementScheme::default_for(dim).simulate(&truth, n, &mut rng).map_err(e2s)?;
    posterior_update(&prior, &record, UpdateOptions::without_resampling()).map_err(e2s)
}

fn posterior_mean_optimality() -> Check {
    let mut min_sep = f64::INFINITY;
    let mut candidates_per_scenario = 0;
    for s in 0..50u64 {
        let post = scenario_posterior(s)?;
        let dim = post.dim();
        let mean = posterior_mean(&post).map_err(e2s)?;
        let mut rng = stream(4, Domain::Scenario, 1000 + s);
        let rule = ScoringRule::hers(rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0)).map_err(e2s)?;

        let mut candidates = vec![mean.clone()];
        for k in 0..50 {
            let eps = 5e-3 * (1 + k % 10) as f64;
            let c = if k % 2 == 0 {
                mean.mix(&hilbert_schmidt_state(dim, &mut rng), eps).map_err(e2s)?
            } else {
                let x = random_hermitian(dim, &mut rng);
                let norm = x.norm();
                mean.conjugate(&linalg::unitary_exp(&x.scale(1.0 / norm), eps).map_err(e2s)?).map_err(e2s)?
            };
            candidates.push(c);
        }
        while candidates.len() < 1000 {
            candidates.push(if candidates.len() % 10 == 0 {
                haar_pure_state(dim, &mut rng)
            } else {
                hilbert_schmidt_state(dim, &mut rng)
            });
        }
        candidates_per_scenario = candidates.len();
        let scores = candidates
            .iter()
            .map(|c| ensemble_expected_reward(&rule, post.iter(), c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(e2s)?;
        let best = scores[0].finite().ok_or(format!("scenario {s}: mean scores -inf"))?;
        let runner_up = scores[1..].iter().map(|v| v.to_f64()).fold(f64::NEG_INFINITY, f64::max);
        let sep = best - runner_up;
        ensure(sep >= 1e-8, format!("scenario {s}: mean beats runner-up by only {sep:e}"))?;
        min_sep = min_sep.min(sep);
    }
    Ok(format!("50 scenarios x {candidates_per_scenario} candidates, min separation {min_sep:.2e}"))
}

fn appendix() -> Check {
    let mut worst_ratio: f64 = 0.0;
    for k in 0..600u64 {
        let mut rng = stream(5, Domain::Scenario, k);
        let dim = 2 + (k % 3) as usize;
        let rho = full_rank_state(dim, 0.05, &mut rng);
        let x = random_hermitian(dim, &mut rng);
        let constants: Vec<f64> = if k % 2 == 0 {
            vec![rng.random_range(-2.0..2.0); dim]
        } else {
            (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()
        };
        let curve = PerturbationCurve::from_state(&rho, x, constants).map_err(e2s)?;
        let a = curve.second_derivative_analytic().map_err(e2s)?;
        let n = curve.second_derivative_numeric(DEFAULT_STEP).map_err(e2s)?;
        let ratio = (a - n).abs() / derivative_tolerance(a);
        ensure(ratio <= 1.0, format!("curve {k}: analytic {a} vs numeric {n}"))?;
        worst_ratio = worst_ratio.max(ratio);
    }

    let mut equal_trials = 0;
    for dim in [3, 4] {
        let report = verify_ci_equality(dim, 1000, 1).map_err(e2s)?;
        ensure(
            report.equal_constant_violations == 0,
            format!("dim {dim}: {} equal-offset violations", report.equal_constant_violations),
        )?;
        ensure(report.passed, format!("dim {dim}: verification failed\n{}", report.summary_text()))?;
        equal_trials += report.equal_constant_trials;
    }

    let curve = construct_counterexample(0.0, 2.0 * LN_2).map_err(e2s)?;
    let r = curve.eigenvalues();
    ensure(
        (r[0] - 0.5).abs() < 1e-12 && (r[1] - 0.25).abs() < 1e-12 && (r[2] - 0.25).abs() < 1e-12,
        format!("counterexample eigenvalues {r:?}"),
    )?;
    let second = curve.second_derivative_analytic().map_err(e2s)?;
    ensure(second < 0.0, format!("counterexample g''(0) = {second}"))?;
    let (t, g) = curve.scan_negative(0.1, 1000).map_err(e2s)?.ok_or("no t in (0, 0.1] with g(t) < 0")?;
    Ok(format!(
        "600 curves (max err/tol {worst_ratio:.3}), {equal_trials} equal-offset curves clean, g''(0) = {second:.6}, g({t}) = {g:.3e}"
    ))
}

fn relative_entropy_core() -> Check {
    let mut rng = stream(6, Domain::Scenario, 0);
    let rho = hilbert_schmidt_state(3, &mut rng);
    let self_s = relative_entropy(&rho, &rho).map_err(e2s)?.finite().ok_or("S(rho||rho) infinite")?;
    ensure(self_s.abs() <= 1e-10, format!("S(rho||rho) = {self_s:e}"))?;
    let zero = DensityMatrix::basis_state(2, 0);
    let one = DensityMatrix::basis_state(2, 1);
    let s = relative_entropy(&zero, &DensityMatrix::maximally_mixed(2)).map_err(e2s)?.to_f64();
    ensure((s - LN_2).abs() <= 1e-10, format!("S(|0><0| || I/2) = {s}"))?;
    let inf = relative_entropy(&DensityMatrix::maximally_mixed(2), &one).map_err(e2s)?;
    ensure(inf == ExtReal::PosInfinity, format!("support violation gave {inf}"))?;
    let mut worst: f64 = 0.0;
    for k in 0..200u64 {
        let mut rng = stream(6, Domain::Scenario, 1 + k);
        let (a, b) = (hilbert_schmidt_state(2, &mut rng), hilbert_schmidt_state(2, &mut rng));
        let single = relative_entropy(&a, &b).map_err(e2s)?.to_f64();
        let pair = relative_entropy(&tensor_power(&a, 2).map_err(e2s)?, &tensor_power(&b, 2).map_err(e2s)?)
            .map_err(e2s)?
            .to_f64();
        worst = worst.max((pair - 2.0 * single).abs());
    }
    ensure(worst <= 1e-8, format!("tensor additivity error {worst:e}"))?;
    Ok(format!("S(|0>||I/2) - ln 2 = {:.1e}, additivity error {worst:.1e}", s - LN_2))
}

fn estimation_pipeline() -> Check {
    let zero = DensityMatrix::basis_state(2, 0);
    let prior = ParticleEnsemble::new(vec![zero.clone(), DensityMatrix::plus()], vec![0.5, 0.5]).map_err(e2s)?;
    let record = MeasurementRecord::from_states(std::slice::from_ref(&zero)).map_err(e2s)?;
    let post = posterior_update(&prior, &record, UpdateOptions::without_resampling()).map_err(e2s)?;
    let w = post.weights();
    ensure(
        (w[0] - 2.0 / 3.0).abs() <= 1e-12 && (w[1] - 1.0 / 3.0).abs() <= 1e-12,
        format!("posterior weights {w:?}"),
    )?;
    let mean = posterior_mean(&post).map_err(e2s)?;
    let expected = CMatrix::from_row_slice(
        2,
        2,
        &[linalg::c(5.0 / 6.0, 0.0), linalg::c(1.0 / 6.0, 0.0), linalg::c(1.0 / 6.0, 0.0), linalg::c(1.0 / 6.0, 0.0)],
    );
    let max_err = (mean.matrix() - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
    ensure(max_err <= 1e-12, format!("posterior mean off by {max_err:e}"))?;

    let symmetric = MeasurementRecord::from_states(&[zero, DensityMatrix::basis_state(2, 1)]).map_err(e2s)?;
    let mle = mle_estimate(&symmetric, 2, MleOptions::default()).map_err(e2s)?;
    let mle_td = mle.state.trace_distance(&DensityMatrix::maximally_mixed(2)).map_err(e2s)?;
    ensure(mle_td <= 1e-6, format!("MLE on symmetric record is {mle_td:e} from I/2"))?;

    let particles = 10_000;
    let seed = 17;
    let hs = PriorSpec::hilbert_schmidt(2).map_err(e2s)?;
    let prior_particles = sample_prior(&hs, particles, seed).map_err(e2s)?;
    let n0 = posterior_mean(&prior_particles).map_err(e2s)?;
    let bloch = n0.bloch().ok_or("not a qubit")?;
    let mut se2 = 0.0;
    for axis in 0..3 {
        let comps: Vec<f64> = prior_particles.particles().iter().map(|p| p.bloch().unwrap()[axis]).collect();
        let m = comps.iter().sum::<f64>() / particles as f64;
        let var = comps.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (particles as f64 - 1.0);
        se2 += var / particles as f64;
    }
    // Trace distance to I/2 is half the Bloch-vector norm; allow 3 SE.
    let td = n0.trace_distance(&DensityMatrix::maximally_mixed(2)).map_err(e2s)?;
    let bound = 1.5 * se2.sqrt();
    ensure(td <= bound, format!("N = 0 Bayes mean is {td:e} from I/2 (bound {bound:e}, bloch {bloch:?})"))?;

    let mut cfg = RiskConfig::new(hs, 40, vec![0, 10], seed);
    cfg.particles = particles;
    let mut rng = stream(7, Domain::Scenario, 0);
    cfg.truths = Some((0..40).map(|_| haar_pure_state(2, &mut rng).depolarize(1e-3).unwrap()).collect());
    let table = estimator_risk(&cfg).map_err(e2s)?;
    let freq = table
        .summaries
        .iter()
        .find(|s| s.estimator == Estimator::Mle && s.copies == 10)
        .ok_or("no MLE N = 10 summary")?
        .rank_deficient_frequency;
    ensure(freq > 0.0, "MLE never rank-deficient at N = 10")?;
    Ok(format!("weights [2/3, 1/3], MLE {mle_td:.1e} from I/2, N = 0 mean {td:.1e} from I/2, MLE rank-deficient {freq:.2}"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Check, Duration);
    let criteria: [Criterion; 7] = [
        ("1 strict propriety", strict_propriety, Duration::from_secs(10)),
        ("2 Monte Carlo reward", monte_carlo_reward, Duration::from_secs(30)),
        ("3 fidelity counterexample", fidelity_case, Duration::from_secs(5)),
        ("4 posterior-mean optimality", posterior_mean_optimality, Duration::from_secs(60)),
        ("5 equal reward offsets", appendix, Duration::from_secs(30)),
        ("6 relative entropy", relative_entropy_core, Duration::from_secs(5)),
        ("7 estimation pipeline", estimation_pipeline, Duration::from_secs(120)),
    ];
    let mut failures = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= limit {
                Ok(detail)
            } else {
                Err(format!("took {:.1}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({:.2}s): {detail}", elapsed.as_secs_f64()),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
