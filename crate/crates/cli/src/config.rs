//! Experiment configuration: a JSON file, command-line flags, or both, with
//! flags taking precedence over the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const DEFAULT_OUTPUT: &str = "hers-output";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    SimulateGame,
    Estimate,
    RiskStudy,
    Counterexample,
    VerifyAppendix,
    Score,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::SimulateGame => "simulate-game",
            CommandName::Estimate => "estimate",
            CommandName::RiskStudy => "risk-study",
            CommandName::Counterexample => "counterexample",
            CommandName::VerifyAppendix => "verify-appendix",
            CommandName::Score => "score",
        }
    }
}

/// The on-disk configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub parameters: Map<String, Value>,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> CliResult<Self> {
        serde_json::from_str(s).map_err(|e| CliError::usage(format!("config: {e}")))
    }

    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| e.context(&path.display().to_string()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "hers", version, about = "Honest quantum state estimation experiments")]
pub struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play the reporting game for many rounds.
    SimulateGame(SimulateGameParams),
    /// Bayesian posterior mean and maximum-likelihood estimates from a record.
    Estimate(EstimateParams),
    /// Estimator risk against the number of measured copies.
    RiskStudy(RiskStudyParams),
    /// Average fidelity versus log score for the |0>/|+> ensemble.
    Counterexample(CounterexampleParams),
    /// Check that unequal per-outcome reward offsets break propriety.
    VerifyAppendix(VerifyAppendixParams),
    /// Expected reward and propriety gap for one truth/report pair.
    Score(ScoreParams),
    /// Run whatever command the --config file names.
    Run,
}

macro_rules! params {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name {
            $(
                $(#[$fmeta])*
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }
    };
}

params!(SimulateGameParams {
    /// Preset (zero, one, plus, maximally-mixed, bell) or state JSON file.
    #[arg(long)]
    truth: String,
    #[arg(long)]
    report: String,
    #[arg(long)]
    dim: usize,
    /// hers, log, brier, or a rule JSON file.
    #[arg(long)]
    rule: String,
    #[arg(long, allow_negative_numbers = true)]
    c: f64,
    #[arg(long)]
    d: f64,
    #[arg(long)]
    rounds: usize,
});

params!(ScoreParams {
    #[arg(long)]
    truth: String,
    #[arg(long)]
    report: String,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    rule: String,
    #[arg(long, allow_negative_numbers = true)]
    c: f64,
    #[arg(long)]
    d: f64,
});

params!(EstimateParams {
    /// hilbert-schmidt, bures-like, or a prior JSON file.
    #[arg(long)]
    prior: String,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    particles: usize,
    /// Measurement record JSON file. Without it a record is simulated from --truth.
    #[arg(long)]
    record: String,
    #[arg(long)]
    truth: String,
    #[arg(long)]
    copies: usize,
    /// random-pauli, random-basis, sic, pauli6, or a POVM JSON file.
    #[arg(long)]
    scheme: String,
    /// bayes-mean, mle, or both.
    #[arg(long)]
    estimator: String,
});

params!(RiskStudyParams {
    #[arg(long)]
    prior: String,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    trials: usize,
    /// Record lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    copies: Vec<usize>,
    #[arg(long)]
    particles: usize,
    /// bayes-mean and/or mle, comma separated.
    #[arg(long, value_delimiter = ',')]
    estimators: Vec<String>,
    #[arg(long)]
    scheme: String,
    /// Fixed truth for every trial (preset or file).
    #[arg(long)]
    truth: String,
    /// prior (draw truths from the prior) or near-pure (Haar pure states, slightly depolarized).
    #[arg(long)]
    truth_family: String,
    #[arg(long)]
    near_pure_noise: f64,
});

params!(CounterexampleParams {
    /// Bloch grid points per axis.
    #[arg(long)]
    resolution: usize,
});

params!(VerifyAppendixParams {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    trials: usize,
});

impl SimulateGameParams {
    pub fn with_defaults(mut self) -> Self {
        self.truth.get_or_insert_with(|| "maximally-mixed".into());
        self.report.get_or_insert_with(|| "maximally-mixed".into());
        self.rule.get_or_insert_with(|| "hers".into());
        self.rounds.get_or_insert(100_000);
        fill_rule_constants(&self.rule, &mut self.c, &mut self.d);
        self
    }
}

impl ScoreParams {
    pub fn with_defaults(mut self) -> Self {
        self.truth.get_or_insert_with(|| "maximally-mixed".into());
        self.report.get_or_insert_with(|| "maximally-mixed".into());
        self.rule.get_or_insert_with(|| "hers".into());
        fill_rule_constants(&self.rule, &mut self.c, &mut self.d);
        self
    }
}

// Named rules get explicit constants in the echo; rule files carry their own.
fn fill_rule_constants(rule: &Option<String>, c: &mut Option<f64>, d: &mut Option<f64>) {
    if matches!(rule.as_deref(), Some("hers" | "log" | "brier")) {
        c.get_or_insert(0.0);
        d.get_or_insert(1.0);
    }
}

impl EstimateParams {
    pub fn with_defaults(mut self) -> Self {
        self.prior.get_or_insert_with(|| "hilbert-schmidt".into());
        self.particles.get_or_insert(10_000);
        self.estimator.get_or_insert_with(|| "both".into());
        if self.record.is_none() {
            self.copies.get_or_insert(100);
        }
        self
    }
}

impl RiskStudyParams {
    pub fn with_defaults(mut self) -> Self {
        self.prior.get_or_insert_with(|| "hilbert-schmidt".into());
        self.trials.get_or_insert(100);
        self.copies.get_or_insert_with(|| vec![0, 10, 100]);
        self.particles.get_or_insert(10_000);
        self.estimators.get_or_insert_with(|| vec!["bayes-mean".into(), "mle".into()]);
        if self.truth.is_none() {
            let family = self.truth_family.get_or_insert_with(|| "prior".into());
            if family == "near-pure" {
                self.near_pure_noise.get_or_insert(1e-3);
            }
        }
        self
    }
}

impl CounterexampleParams {
    pub fn with_defaults(mut self) -> Self {
        self.resolution.get_or_insert(20);
        self
    }
}

impl VerifyAppendixParams {
    pub fn with_defaults(mut self) -> Self {
        self.dim.get_or_insert(3);
        self.trials.get_or_insert(1000);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    SimulateGame(SimulateGameParams),
    Estimate(EstimateParams),
    RiskStudy(RiskStudyParams),
    Counterexample(CounterexampleParams),
    VerifyAppendix(VerifyAppendixParams),
    Score(ScoreParams),
}

impl Params {
    pub fn to_value(&self) -> Value {
        let v = match self {
            Params::SimulateGame(p) => serde_json::to_value(p),
            Params::Estimate(p) => serde_json::to_value(p),
            Params::RiskStudy(p) => serde_json::to_value(p),
            Params::Counterexample(p) => serde_json::to_value(p),
            Params::VerifyAppendix(p) => serde_json::to_value(p),
            Params::Score(p) => serde_json::to_value(p),
        };
        v.expect("parameter structs serialize")
    }
}

/// A fully resolved run: command, seed, output directory and parameters with
/// defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub command: CommandName,
    pub seed: u64,
    pub output: PathBuf,
    pub params: Params,
}

impl Resolved {
    /// The resolved run as a config file that reproduces it.
    pub fn echo(&self) -> ExperimentConfig {
        let parameters = match self.params.to_value() {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        ExperimentConfig {
            command: self.command,
            seed: Some(self.seed),
            output: Some(self.output.clone()),
            parameters,
        }
    }
}

/// Overlays `flags` on the file's parameter map and decodes the result.
pub fn merge<P: Serialize + DeserializeOwned>(file: &Map<String, Value>, flags: &P) -> CliResult<P> {
    let mut map = file.clone();
    if let Value::Object(f) = serde_json::to_value(flags).expect("parameter structs serialize") {
        map.extend(f);
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::usage(format!("parameters: {e}")))
}

/// Combines a config file (if any) with the parsed command line.
pub fn resolve(cli: Cli, file: Option<ExperimentConfig>) -> CliResult<Resolved> {
    let requested = match &cli.command {
        Command::SimulateGame(_) => Some(CommandName::SimulateGame),
        Command::Estimate(_) => Some(CommandName::Estimate),
        Command::RiskStudy(_) => Some(CommandName::RiskStudy),
        Command::Counterexample(_) => Some(CommandName::Counterexample),
        Command::VerifyAppendix(_) => Some(CommandName::VerifyAppendix),
        Command::Score(_) => Some(CommandName::Score),
        Command::Run => None,
    };
    let command = match (requested, &file) {
        (None, None) => return Err(CliError::usage("`run` needs --config")),
        (None, Some(f)) => f.command,
        (Some(r), Some(f)) if f.command != r => {
            return Err(CliError::usage(format!(
                "config file is for `{}` but `{}` was requested",
                f.command.as_str(),
                r.as_str()
            )))
        }
        (Some(r), _) => r,
    };
    let empty = Map::new();
    let file_params = file.as_ref().map_or(&empty, |f| &f.parameters);
    let params = match cli.command {
        Command::SimulateGame(p) => Params::SimulateGame(merge(file_params, &p)?.with_defaults()),
        Command::Estimate(p) => Params::Estimate(merge(file_params, &p)?.with_defaults()),
        Command::RiskStudy(p) => Params::RiskStudy(merge(file_params, &p)?.with_defaults()),
        Command::Counterexample(p) => Params::Counterexample(merge(file_params, &p)?.with_defaults()),
        Command::VerifyAppendix(p) => Params::VerifyAppendix(merge(file_params, &p)?.with_defaults()),
        Command::Score(p) => Params::Score(merge(file_params, &p)?.with_defaults()),
        Command::Run => match command {
            CommandName::SimulateGame => {
                Params::SimulateGame(merge(file_params, &SimulateGameParams::default())?.with_defaults())
            }
            CommandName::Estimate => Params::Estimate(merge(file_params, &EstimateParams::default())?.with_defaults()),
            CommandName::RiskStudy => {
                Params::RiskStudy(merge(file_params, &RiskStudyParams::default())?.with_defaults())
            }
            CommandName::Counterexample => {
                Params::Counterexample(merge(file_params, &CounterexampleParams::default())?.with_defaults())
            }
            CommandName::VerifyAppendix => {
                Params::VerifyAppendix(merge(file_params, &VerifyAppendixParams::default())?.with_defaults())
            }
            CommandName::Score => Params::Score(merge(file_params, &ScoreParams::default())?.with_defaults()),
        },
    };
    let seed = cli.seed.or(file.as_ref().and_then(|f| f.seed)).unwrap_or(0);
    let output = cli
        .output
        .or(file.and_then(|f| f.output))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    Ok(Resolved { command, seed, output, params })
}
