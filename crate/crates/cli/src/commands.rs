use std::collections::BTreeMap;

use hers_core::appendix::verify_ci_equality;
use hers_core::bayes::{
    estimator_risk, mle_estimate, posterior_update, sample_prior, Estimator, MleOptions,
    PriorSpec, Resampling, RiskConfig, UpdateOptions,
};
use hers_core::game::{fidelity_counterexample, simulate_game, GameConfig};
use hers_core::quantum::random::haar_pure_state;
use hers_core::quantum::{born_probabilities, relative_entropy, MatrixJson};
use hers_core::rng::{stream, Domain};
use hers_core::scoring::{expected_reward, expected_reward_entropic, propriety_gap, report_measurement};
use hers_core::{DensityMatrix, RuleKind};
use serde_json::{json, Value};

use crate::config::{
    CounterexampleParams, EstimateParams, Params, Resolved, RiskStudyParams, ScoreParams, SimulateGameParams,
    VerifyAppendixParams,
};
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;
use crate::state::{load_prior, load_record, load_rule, load_scheme, load_state};

/// Runs the command and writes its artifacts. Returns a short summary for stdout.
pub fn run(resolved: &Resolved, out: &mut OutputDir) -> CliResult<String> {
    let seed = resolved.seed;
    match &resolved.params {
        Params::SimulateGame(p) => simulate(p, seed, out),
        Params::Estimate(p) => estimate(p, seed, out),
        Params::RiskStudy(p) => risk_study(p, seed, out),
        Params::Counterexample(p) => counterexample(p, out),
        Params::VerifyAppendix(p) => verify_appendix(p, seed, out),
        Params::Score(p) => score(p, out),
    }
}

fn required<'a, T>(value: &'a Option<T>, name: &str) -> CliResult<&'a T> {
    value.as_ref().ok_or_else(|| CliError::usage(format!("missing parameter `{name}`")))
}

fn simulate(p: &SimulateGameParams, seed: u64, out: &mut OutputDir) -> CliResult<String> {
    let truth = load_state(required(&p.truth, "truth")?, p.dim).map_err(|e| e.context("truth"))?;
    let report = load_state(required(&p.report, "report")?, p.dim).map_err(|e| e.context("report"))?;
    let rule = load_rule(required(&p.rule, "rule")?, p.c, p.d).map_err(|e| e.context("rule"))?;
    let rounds = *required(&p.rounds, "rounds")?;
    let config = GameConfig::new(truth, report, rule, rounds, seed).map_err(|e| CliError::usage(e.to_string()))?;
    let t = simulate_game(&config)?;

    let mut w = out.csv("transcript.csv")?;
    w.write_record(["round", "outcome", "payoff"])?;
    for (k, (o, pay)) in t.outcomes.iter().zip(&t.payoffs).enumerate() {
        w.write_record([k.to_string(), o.to_string(), pay.to_string()])?;
    }
    w.flush()?;

    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &o in &t.outcomes {
        *counts.entry(o).or_default() += 1;
    }
    let (_, report_dist) = report_measurement(&config.report)?;
    let mut h = out.csv("reward_histogram.csv")?;
    h.write_record(["outcome", "payoff", "count", "frequency", "report_probability"])?;
    for (i, &q) in report_dist.probs().iter().enumerate() {
        let count = counts.get(&i).copied().unwrap_or(0);
        h.write_record([
            i.to_string(),
            rule.payoff(&report_dist, i)?.to_string(),
            count.to_string(),
            (count as f64 / rounds as f64).to_string(),
            q.to_string(),
        ])?;
    }
    h.flush()?;

    out.json(
        "summary.json",
        &json!({
            "rounds": rounds,
            "mean_payoff": t.mean_payoff,
            "analytic_expected": t.analytic_expected,
            "standard_error": t.standard_error,
            "z_score": t.z_score(),
        }),
    )?;
    Ok(format!(
        "mean_payoff={} analytic_expected={} standard_error={}",
        t.mean_payoff,
        t.analytic_expected,
        t.standard_error.map_or("n/a".into(), |s| s.to_string())
    ))
}

fn score(p: &ScoreParams, out: &mut OutputDir) -> CliResult<String> {
    let truth = load_state(required(&p.truth, "truth")?, p.dim).map_err(|e| e.context("truth"))?;
    let report = load_state(required(&p.report, "report")?, p.dim).map_err(|e| e.context("report"))?;
    if truth.dim() != report.dim() {
        return Err(CliError::usage(format!("truth has dim {}, report has dim {}", truth.dim(), report.dim())));
    }
    let rule = load_rule(required(&p.rule, "rule")?, p.c, p.d).map_err(|e| e.context("rule"))?;
    let (basis, s) = report_measurement(&report)?;
    let probs = born_probabilities(&truth, &basis)?;
    let entropic = match rule.kind() {
        RuleKind::Hers => Some(expected_reward_entropic(&rule, &truth, &report)?),
        RuleKind::Brier => None,
    };
    let result = json!({
        "rule": rule,
        "expected_reward": expected_reward(&rule, &truth, &report)?,
        "honest_reward": expected_reward(&rule, &truth, &truth)?,
        "propriety_gap": propriety_gap(&rule, &truth, &report)?,
        "entropic_form": entropic,
        "relative_entropy": relative_entropy(&truth, &report)?,
        "report_eigenvalues": s.probs(),
        "truth_probabilities_in_report_basis": probs.probs(),
    });
    out.json("score.json", &result)?;
    Ok(serde_json::to_string(&result)?)
}

fn estimator_list(names: &[String]) -> CliResult<Vec<Estimator>> {
    let mut list = Vec::new();
    for name in names {
        let e = match name.as_str() {
            "bayes-mean" => Estimator::BayesMean,
            "mle" => Estimator::Mle,
            "both" => {
                list.extend([Estimator::BayesMean, Estimator::Mle]);
                continue;
            }
            other => return Err(CliError::usage(format!("unknown estimator `{other}` (bayes-mean, mle, both)"))),
        };
        if !list.contains(&e) {
            list.push(e);
        }
    }
    if list.is_empty() {
        return Err(CliError::usage("no estimators selected"));
    }
    Ok(list)
}

fn estimate(p: &EstimateParams, seed: u64, out: &mut OutputDir) -> CliResult<String> {
    let prior = load_prior(required(&p.prior, "prior")?, p.dim).map_err(|e| e.context("prior"))?;
    let dim = prior.dim();
    let estimators = estimator_list(std::slice::from_ref(required(&p.estimator, "estimator")?))?;
    let (record, truth) = match (&p.record, &p.truth) {
        (Some(_), Some(_)) => return Err(CliError::usage("give either `record` or `truth`, not both")),
        (Some(path), None) => (load_record(path).map_err(|e| e.context("record"))?, None),
        (None, Some(spec)) => {
            let truth = load_state(spec, Some(dim)).map_err(|e| e.context("truth"))?;
            let scheme = load_scheme(p.scheme.as_deref(), dim).map_err(|e| e.context("scheme"))?;
            let copies = *required(&p.copies, "copies")?;
            let record = scheme.simulate(&truth, copies, &mut stream(seed, Domain::RiskRecord, 0))?;
            out.json("record.json", &record)?;
            (record, Some(truth))
        }
        (None, None) => return Err(CliError::usage("missing parameter `record` (or `truth` to simulate one)")),
    };
    if record.dim() != dim {
        return Err(CliError::usage(format!("record has dim {}, prior has dim {dim}", record.dim())));
    }

    let grade = |state: &DensityMatrix| -> CliResult<Value> {
        Ok(match &truth {
            Some(t) => json!({
                "relative_entropy_risk": relative_entropy(t, state)?,
                "trace_distance": t.trace_distance(state)?,
            }),
            None => Value::Null,
        })
    };
    let mut result = serde_json::Map::new();
    result.insert("prior".into(), serde_json::to_value(&prior)?);
    result.insert("record_length".into(), record.len().into());
    let mut lines = Vec::new();
    if estimators.contains(&Estimator::BayesMean) {
        let particles = particles_for(&prior, *required(&p.particles, "particles")?, seed)?;
        let post = posterior_update(&particles, &record, UpdateOptions { resampling: Resampling::Systematic { seed } })?;
        let summary = post.summary()?;
        lines.push(format!("bayes-mean log_evidence={} ess={}", summary.log_evidence, summary.ess));
        result.insert(
            "bayes_mean".into(),
            json!({
                "state": MatrixJson::from_matrix(summary.mean.matrix()),
                "log_evidence": summary.log_evidence,
                "ess": summary.ess,
                "particles": post.len(),
                "versus_truth": grade(&summary.mean)?,
            }),
        );
    }
    if estimators.contains(&Estimator::Mle) {
        if record.is_empty() {
            return Err(CliError::usage("maximum likelihood needs a nonempty record"));
        }
        let mle = mle_estimate(&record, dim, MleOptions::default())?;
        lines.push(format!("mle log_likelihood={} converged={}", mle.log_likelihood, mle.converged));
        result.insert(
            "mle".into(),
            json!({
                "state": MatrixJson::from_matrix(mle.state.matrix()),
                "log_likelihood": mle.log_likelihood,
                "iterations": mle.iterations,
                "converged": mle.converged,
                "versus_truth": grade(&mle.state)?,
            }),
        );
    }
    out.json("estimate.json", &result)?;
    Ok(lines.join("\n"))
}

fn particles_for(prior: &PriorSpec, count: usize, seed: u64) -> CliResult<hers_core::bayes::ParticleEnsemble> {
    Ok(match prior.exact_ensemble() {
        Some(e) => e,
        None => sample_prior(prior, count, seed)?,
    })
}

fn risk_study(p: &RiskStudyParams, seed: u64, out: &mut OutputDir) -> CliResult<String> {
    let prior = load_prior(required(&p.prior, "prior")?, p.dim).map_err(|e| e.context("prior"))?;
    let dim = prior.dim();
    let trials = *required(&p.trials, "trials")?;
    let mut config = RiskConfig::new(prior, trials, required(&p.copies, "copies")?.clone(), seed);
    config.particles = *required(&p.particles, "particles")?;
    config.estimators = estimator_list(required(&p.estimators, "estimators")?)?;
    config.scheme = load_scheme(p.scheme.as_deref(), dim).map_err(|e| e.context("scheme"))?;
    config.truths = match (&p.truth, p.truth_family.as_deref()) {
        (Some(_), Some(_)) => return Err(CliError::usage("give either `truth` or `truth-family`, not both")),
        (Some(spec), None) => Some(vec![load_state(spec, Some(dim)).map_err(|e| e.context("truth"))?]),
        (None, None | Some("prior")) => None,
        (None, Some("near-pure")) => {
            let noise = *required(&p.near_pure_noise, "near-pure-noise")?;
            if !(0.0..=1.0).contains(&noise) {
                return Err(CliError::usage(format!("near-pure-noise {noise} outside [0, 1]")));
            }
            Some(
                (0..trials as u64)
                    .map(|t| haar_pure_state(dim, &mut stream(seed, Domain::RiskTruth, t)).depolarize(noise))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        }
        (None, Some(other)) => {
            return Err(CliError::usage(format!("unknown truth-family `{other}` (prior, near-pure)")))
        }
    };
    let table = estimator_risk(&config).map_err(|e| match e {
        hers_core::Error::InvalidInput(m) => CliError::usage(m),
        other => other.into(),
    })?;

    let mut w = out.csv("risk.csv")?;
    w.write_record(["estimator", "N", "trial", "relative_entropy_risk", "trace_distance", "rank_deficient_flag"])?;
    for r in &table.rows {
        w.write_record([
            r.estimator.name().to_string(),
            r.copies.to_string(),
            r.trial.to_string(),
            r.relative_entropy_risk.to_string(),
            r.trace_distance.to_string(),
            r.rank_deficient_flag.to_string(),
        ])?;
    }
    w.flush()?;

    let mut c = out.csv("risk_curve.csv")?;
    c.write_record([
        "estimator",
        "N",
        "trials",
        "mean_risk",
        "median_risk",
        "p90_risk",
        "infinite_risk_frequency",
        "mean_trace_distance",
        "median_trace_distance",
        "rank_deficient_frequency",
    ])?;
    let mut lines = Vec::new();
    for s in &table.summaries {
        c.write_record([
            s.estimator.name().to_string(),
            s.copies.to_string(),
            s.trials.to_string(),
            s.mean_risk.to_string(),
            s.median_risk.to_string(),
            s.p90_risk.to_string(),
            s.infinite_risk_frequency.to_string(),
            s.mean_trace_distance.to_string(),
            s.median_trace_distance.to_string(),
            s.rank_deficient_frequency.to_string(),
        ])?;
        lines.push(format!(
            "{} N={} median_risk={} infinite_risk_frequency={}",
            s.estimator.name(),
            s.copies,
            s.median_risk,
            s.infinite_risk_frequency
        ));
    }
    c.flush()?;
    out.json("risk_summary.json", &json!({ "prior": table.prior, "summaries": table.summaries }))?;
    Ok(lines.join("\n"))
}

fn counterexample(p: &CounterexampleParams, out: &mut OutputDir) -> CliResult<String> {
    let resolution = *required(&p.resolution, "resolution")?;
    if resolution < 2 {
        return Err(CliError::usage("resolution must be >= 2"));
    }
    let r = fidelity_counterexample(resolution)?;
    out.json("counterexample.json", &r)?;
    let mut w = out.csv("counterexample.csv")?;
    w.write_record(["report", "average_fidelity", "hers_reward"])?;
    w.write_record(["top_eigenprojector".to_string(), r.fidelity_optimum_value.to_string(), r.hers_reward_of_fidelity_optimum.to_string()])?;
    w.write_record(["mean_state".to_string(), r.fidelity_of_mean.to_string(), r.hers_reward_of_mean.to_string()])?;
    w.flush()?;
    let verdict = r.fidelity_optimum_value > r.fidelity_of_mean && r.hers_reward_of_mean > r.hers_reward_of_fidelity_optimum;
    Ok(format!(
        "top_eigenvalue={} fidelity(top)={} fidelity(mean)={} hers(mean)={} hers(top)={} rankings_inverted={verdict}",
        r.top_eigenvalue, r.fidelity_optimum_value, r.fidelity_of_mean, r.hers_reward_of_mean, r.hers_reward_of_fidelity_optimum
    ))
}

fn verify_appendix(p: &VerifyAppendixParams, seed: u64, out: &mut OutputDir) -> CliResult<String> {
    let dim = *required(&p.dim, "dim")?;
    let trials = *required(&p.trials, "trials")?;
    let report = verify_ci_equality(dim, trials, seed).map_err(|e| CliError::usage(e.to_string()))?;
    out.json("appendix_report.json", &report)?;
    let text = report.summary_text();
    out.text("appendix_report.txt", &text)?;
    if !report.passed {
        return Err(CliError::runtime(format!(
            "verification failed: {} equal-offset violations, {} derivative mismatches, {}/{} witnesses",
            report.equal_constant_violations,
            report.derivative_mismatches,
            report.unequal_witnesses_found,
            report.unequal_constant_trials
        )));
    }
    Ok(text.trim_end().to_string())
}

