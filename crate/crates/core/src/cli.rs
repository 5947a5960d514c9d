//! Command-line front end: `predict`, `simulate`, `exact-mean` and `validate`.
//!
//! Every command first resolves its flags (optionally layered over a JSON
//! [`RunConfig`] given with `--config`) into a complete `RunConfig`, which is
//! embedded in every JSON artifact so the run can be repeated from it alone.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::{
    exact_mean_extinction, phase_schedule, predict_extinction, GumbelPrediction,
    HypothesisDiagnostics, PhaseSchedule, RegimeFormula,
};
use crate::error::{Error, Result};
use crate::mc::run_batch;
use crate::model::{
    classify_regime, InitialCondition, ModelParams, RegimeClass, ScalingFunction,
    DEFAULT_REGIME_THRESHOLD,
};
use crate::sim::{sample_extinction_logistic, RandomSource, RecordMode};
use crate::validate::{run_suite, ValidateOptions, Verdict};

/// Version of every JSON artifact and CSV schema written by the CLI.
pub const SCHEMA_VERSION: u32 = 1;

/// Largest `N` accepted by `exact-mean`.
pub const EXACT_MEAN_MAX_N: u64 = 10_000_000;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_REPLICATES: u64 = 1000;
pub const DEFAULT_K: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Predict,
    Simulate,
    ExactMean,
    Validate,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub command: CommandKind,
    #[serde(rename = "N", default)]
    pub big_n: Option<u64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub x0: Option<u64>,
    /// Number of replicates (`simulate`).
    #[serde(default)]
    pub n: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub suite: Option<String>,
    /// Worker-count hint; never changes results.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Discrete-chain `K` for the phase schedule (`predict`).
    #[serde(default)]
    pub k: Option<f64>,
    /// `x0` sweep for `exact-mean`.
    #[serde(default)]
    pub x0_values: Option<Vec<u64>>,
    /// `N` sweep for `exact-mean`.
    #[serde(rename = "N_values", default)]
    pub n_values: Option<Vec<u64>>,
    /// Full path of replicate 0 as `time,state` CSV (`simulate`).
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

impl RunConfig {
    pub fn empty(command: CommandKind) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            command,
            big_n: None,
            lambda: None,
            mu: None,
            x0: None,
            n: None,
            seed: None,
            t_max: None,
            out: None,
            format: None,
            suite: None,
            threads: None,
            k: None,
            x0_values: None,
            n_values: None,
            trajectory: None,
        }
    }

    /// Parses a `RunConfig`, or the `config` member of a JSON artifact
    /// written by this tool. A missing `command` defaults to `command`.
    pub fn from_json(text: &str, command: CommandKind) -> Result<Self> {
        let invalid = |e: serde_json::Error| Error::Usage(format!("invalid config: {e}"));
        let value: serde_json::Value = serde_json::from_str(text).map_err(invalid)?;
        let mut inner = match value.get("config") {
            Some(c) if value.get("command").is_none() => c.clone(),
            _ => value,
        };
        if let Some(obj) = inner.as_object_mut() {
            if !obj.contains_key("command") {
                obj.insert("command".into(), serde_json::to_value(command)?);
            }
        }
        let cfg: RunConfig = serde_json::from_value(inner).map_err(invalid)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Usage(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path, command: CommandKind) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_json(&text, command)
    }

    pub fn params(&self) -> Result<ModelParams> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| Error::Usage(format!("missing --{flag}")))
        };
        let n = self.big_n.ok_or_else(|| Error::Usage("missing --bigN".into()))?;
        ModelParams::new(n, need(self.lambda, "lambda")?, need(self.mu, "mu")?)
    }

    fn x0_or_n(&self, p: &ModelParams) -> u64 {
        self.x0.unwrap_or(p.n())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sis-extinction",
    version,
    about = "Extinction times of the stochastic SIS logistic epidemic"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gumbel predictions for all regime formulas, diagnostics and the phase schedule.
    Predict(PredictArgs),
    /// Simulate extinction times; one CSV row per replicate.
    Simulate(SimulateArgs),
    /// Exact mean extinction time over an x0 or N sweep.
    ExactMean(ExactMeanArgs),
    /// Run acceptance criteria and report a verdict per criterion.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON RunConfig (or an artifact embedding one); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Population size N.
    #[arg(long = "bigN")]
    pub big_n: Option<u64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Initial number of infectives (default N).
    #[arg(long)]
    pub x0: Option<u64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads; a hint that never changes results.
    #[arg(long, env = "SIS_EXTINCTION_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Discrete-chain K used for the phase schedule.
    #[arg(long)]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of replicates.
    #[arg(long)]
    pub n: Option<u64>,
    /// Censoring horizon (required).
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Also write the full path of replicate 0 as time,state CSV.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExactMeanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// x0 sweep: comma-separated values or ranges `start:end[:step]`.
    #[arg(long = "x0-values", value_parser = parse_sweep_arg)]
    pub x0_values: Option<Sweep>,
    /// N sweep: comma-separated values or ranges `start:end[:step]`.
    #[arg(long = "bigN-values", value_parser = parse_sweep_arg)]
    pub n_values: Option<Sweep>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `all`, `gumbel`, `oracles`, or a criterion id such as `A7`.
    #[arg(long)]
    pub suite: Option<String>,
}

/// A parsed sweep list; a newtype so clap treats it as one value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep(pub Vec<u64>);

fn parse_sweep_arg(text: &str) -> std::result::Result<Sweep, String> {
    parse_sweep(text).map(Sweep)
}

/// Parses `1,5,10:20:5` into `[1, 5, 10, 15, 20]`.
pub fn parse_sweep(text: &str) -> std::result::Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        let num = |s: &str| s.parse::<u64>().map_err(|e| format!("'{s}': {e}"));
        match fields.as_slice() {
            [v] => out.push(num(v)?),
            [a, b] | [a, b, _] => {
                let (start, end) = (num(a)?, num(b)?);
                let step = if fields.len() == 3 { num(fields[2])? } else { 1 };
                if step == 0 || end < start {
                    return Err(format!("bad range '{part}'"));
                }
                out.extend((start..=end).step_by(step as usize));
            }
            _ => return Err(format!("bad sweep element '{part}'")),
        }
    }
    if out.is_empty() {
        return Err("empty sweep".into());
    }
    Ok(out)
}

impl CommonArgs {
    fn layer(&self, command: CommandKind) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let cfg = RunConfig::load(path, command)?;
                if cfg.command != command {
                    return Err(Error::Usage(format!(
                        "{} holds a {:?} config, not {command:?}",
                        path.display(),
                        cfg.command
                    )));
                }
                cfg
            }
            None => RunConfig::empty(command),
        };
        macro_rules! over {
            ($($field:ident),*) => { $( if self.$field.is_some() { cfg.$field = self.$field.clone(); } )* };
        }
        over!(big_n, lambda, mu, x0, seed, out, format, threads);
        if let (Some(config), Some(out)) = (&self.config, &cfg.out) {
            let same = match (config.canonicalize(), out.canonicalize()) {
                (Ok(a), Ok(b)) => a == b,
                _ => config == out,
            };
            if same {
                return Err(Error::Usage(format!(
                    "output {} would overwrite the config file; pass --out",
                    out.display()
                )));
            }
        }
        Ok(cfg)
    }
}

impl Command {
    /// Merges flags over the optional `--config` file.
    pub fn resolve(&self) -> Result<RunConfig> {
        match self {
            Command::Predict(a) => {
                let mut cfg = a.common.layer(CommandKind::Predict)?;
                cfg.k = a.k.or(cfg.k);
                Ok(cfg)
            }
            Command::Simulate(a) => {
                let mut cfg = a.common.layer(CommandKind::Simulate)?;
                cfg.n = a.n.or(cfg.n);
                cfg.t_max = a.tmax.or(cfg.t_max);
                cfg.trajectory = a.trajectory.clone().or(cfg.trajectory);
                Ok(cfg)
            }
            Command::ExactMean(a) => {
                let mut cfg = a.common.layer(CommandKind::ExactMean)?;
                cfg.x0_values = a.x0_values.clone().map(|s| s.0).or(cfg.x0_values);
                cfg.n_values = a.n_values.clone().map(|s| s.0).or(cfg.n_values);
                Ok(cfg)
            }
            Command::Validate(a) => {
                let mut cfg = a.common.layer(CommandKind::Validate)?;
                cfg.suite = a.suite.clone().or(cfg.suite);
                Ok(cfg)
            }
        }
    }
}

/// Outcome of a command, mapped to the process exit status by the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// A validation criterion failed.
    CheckFailed,
}

/// Runs a fully resolved configuration.
pub fn execute(cfg: &RunConfig) -> Result<Status> {
    match cfg.command {
        CommandKind::Predict => cmd_predict(cfg),
        CommandKind::Simulate => cmd_simulate(cfg),
        CommandKind::ExactMean => cmd_exact_mean(cfg),
        CommandKind::Validate => cmd_validate(cfg),
    }
}

pub fn run(cli: &Cli) -> Result<Status> {
    execute(&cli.command.resolve()?)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// A regime-related caveat attached to a report instead of an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub code: String,
    pub message: String,
}

impl Warning {
    fn new(code: &str, message: impl Into<String>) -> Self {
        Warning {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaReport {
    pub formula: RegimeFormula,
    pub prediction: Option<GumbelPrediction>,
    /// Centering minus the General centering.
    pub delta_vs_general: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub regime: RegimeClass,
    pub diagnostics: Option<HypothesisDiagnostics>,
    pub formulas: Vec<FormulaReport>,
    pub phase_schedule: Option<PhaseSchedule>,
    pub warnings: Vec<Warning>,
}

pub fn predict_report(cfg: &RunConfig) -> Result<PredictReport> {
    let p = cfg.params()?;
    let x0 = cfg.x0_or_n(&p);
    let ic = InitialCondition::new(x0, &p)?;
    if x0 == 0 {
        return Err(Error::Usage("predict needs x0 >= 1".into()));
    }
    let k = cfg.k.unwrap_or(DEFAULT_K);
    let mut resolved = cfg.clone();
    resolved.x0 = Some(x0);
    resolved.k = Some(k);

    let regime = classify_regime(&p, DEFAULT_REGIME_THRESHOLD)?;
    let mut warnings = Vec::new();
    if !p.subcritical() {
        warnings.push(Warning::new(
            "not-subcritical",
            format!(
                "mu = {} does not exceed lambda = {}; the Gumbel limit does not apply",
                p.mu(),
                p.lambda()
            ),
        ));
    }
    let general = predict_extinction(&p, ic, RegimeFormula::General).ok();
    let mut formulas = Vec::new();
    for formula in RegimeFormula::ALL {
        match predict_extinction(&p, ic, formula) {
            Ok(pred) => formulas.push(FormulaReport {
                formula,
                delta_vs_general: general.map(|g| pred.centering - g.centering),
                prediction: Some(pred),
            }),
            Err(e) => {
                if p.subcritical() {
                    warnings.push(Warning::new("formula-unavailable", format!("{formula:?}: {e}")));
                }
                formulas.push(FormulaReport {
                    formula,
                    prediction: None,
                    delta_vs_general: None,
                });
            }
        }
    }
    let diagnostics = general.map(|g| g.diagnostics);
    if let Some(d) = diagnostics {
        if d.gap_sqrt_n < DEFAULT_REGIME_THRESHOLD {
            warnings.push(Warning::new(
                "weak-subcriticality",
                format!("(mu - lambda) sqrt(N) = {:.4} is not large", d.gap_sqrt_n),
            ));
        }
        if d.x0_gap < DEFAULT_REGIME_THRESHOLD {
            warnings.push(Warning::new(
                "small-start",
                format!("x0 (mu - lambda) = {:.4} is not large; see the small-start limits", d.x0_gap),
            ));
        }
    }
    let phase_schedule = if p.subcritical() {
        match phase_schedule(&p, ic, ScalingFunction::Default, k, 0.0) {
            Ok(s) => Some(s),
            Err(e) => {
                warnings.push(Warning::new("phase-schedule-unavailable", e.to_string()));
                None
            }
        }
    } else {
        None
    };
    Ok(PredictReport {
        schema_version: SCHEMA_VERSION,
        config: resolved,
        regime,
        diagnostics,
        formulas,
        phase_schedule,
        warnings,
    })
}

fn cmd_predict(cfg: &RunConfig) -> Result<Status> {
    let report = predict_report(cfg)?;
    let bytes = match cfg.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => json_bytes(&report)?,
        OutputFormat::Csv => {
            let mut s = String::from("formula,centering,scale,predicted_mean,delta_vs_general\n");
            for f in &report.formulas {
                match f.prediction {
                    Some(pred) => s.push_str(&format!(
                        "{:?},{},{},{},{}\n",
                        f.formula,
                        pred.centering,
                        pred.scale,
                        pred.predicted_mean,
                        f.delta_vs_general.unwrap_or(f64::NAN)
                    )),
                    None => s.push_str(&format!("{:?},,,,\n", f.formula)),
                }
            }
            s.into_bytes()
        }
    };
    for w in &report.warnings {
        eprintln!("warning [{}]: {}", w.code, w.message);
    }
    emit(cfg.out.as_deref(), &bytes)?;
    Ok(Status::Success)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub replicates: u64,
    pub censored_count: u64,
    pub mean_extinction_time: Option<f64>,
    pub standard_error: Option<f64>,
}

fn cmd_simulate(cfg: &RunConfig) -> Result<Status> {
    let p = cfg.params()?;
    let t_max = cfg
        .t_max
        .ok_or_else(|| Error::Usage("simulate needs an explicit censoring horizon --tmax".into()))?;
    let x0 = cfg.x0_or_n(&p);
    let ic = InitialCondition::new(x0, &p)?;
    let n = cfg.n.unwrap_or(DEFAULT_REPLICATES);
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let mut resolved = cfg.clone();
    resolved.x0 = Some(x0);
    resolved.n = Some(n);
    resolved.seed = Some(seed);

    let set = run_batch(&p, ic, n, seed, t_max, cfg.threads)?;
    if let Err(e) = set.check_censoring() {
        eprintln!("warning: {e}");
    }
    let bytes = match cfg.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            set.write_csv(&mut buf).map_err(|e| Error::io("<buffer>", e))?;
            buf
        }
        OutputFormat::Json => {
            let est = set.mean();
            json_bytes(&serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "config": resolved,
                "summary": SimulateSummary {
                    replicates: set.replicates(),
                    censored_count: set.censored_count,
                    mean_extinction_time: est.map(|e| e.mean),
                    standard_error: est.map(|e| e.se),
                },
                "records": set.records,
            }))?
        }
    };
    emit(cfg.out.as_deref(), &bytes)?;

    if let Some(path) = &cfg.trajectory {
        let mut rng = RandomSource::new(seed, 0).rng();
        let traj = sample_extinction_logistic(&p, ic, t_max, RecordMode::Full, &mut rng)?;
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))?;
    }
    Ok(Status::Success)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactMeanRow {
    #[serde(rename = "N")]
    pub big_n: u64,
    pub lambda: f64,
    pub mu: f64,
    pub x0: u64,
    pub mean: f64,
}

pub fn exact_mean_rows(cfg: &RunConfig) -> Result<Vec<ExactMeanRow>> {
    let lambda = cfg.lambda.ok_or_else(|| Error::Usage("missing --lambda".into()))?;
    let mu = cfg.mu.ok_or_else(|| Error::Usage("missing --mu".into()))?;
    if cfg.x0_values.is_some() && cfg.n_values.is_some() {
        return Err(Error::Usage("sweep either x0 or N, not both".into()));
    }
    let sizes = match (&cfg.n_values, cfg.big_n) {
        (Some(v), _) => v.clone(),
        (None, Some(n)) => vec![n],
        (None, None) => return Err(Error::Usage("missing --bigN".into())),
    };
    if let Some(&big) = sizes.iter().find(|&&n| n > EXACT_MEAN_MAX_N) {
        return Err(Error::CostGuard {
            what: "N",
            value: big,
            limit: EXACT_MEAN_MAX_N,
            hint: "the exact solver is O(N) in time and memory",
        });
    }
    let mut rows = Vec::new();
    for n in sizes {
        let p = ModelParams::new(n, lambda, mu)?;
        let starts = match &cfg.x0_values {
            Some(v) => v.clone(),
            None => vec![cfg.x0.unwrap_or(n)],
        };
        // one O(N) sweep serves every x0 of this N
        let profile = crate::analytic::mean_extinction_profile(&p);
        for x0 in starts {
            if x0 > n {
                return Err(Error::domain(format!("x0 = {x0} exceeds N = {n}")));
            }
            let mut mean = profile[x0 as usize];
            if !mean.is_finite() {
                mean = exact_mean_extinction(&p, x0)?;
            }
            rows.push(ExactMeanRow {
                big_n: n,
                lambda,
                mu,
                x0,
                mean,
            });
        }
    }
    Ok(rows)
}

fn cmd_exact_mean(cfg: &RunConfig) -> Result<Status> {
    let rows = exact_mean_rows(cfg)?;
    let bytes = match cfg.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut s = String::from("N,lambda,mu,x0,mean\n");
            for r in &rows {
                s.push_str(&format!("{},{},{},{},{}\n", r.big_n, r.lambda, r.mu, r.x0, r.mean));
            }
            s.into_bytes()
        }
        OutputFormat::Json => json_bytes(&serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "config": cfg,
            "rows": rows,
        }))?,
    };
    emit(cfg.out.as_deref(), &bytes)?;
    Ok(Status::Success)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub pass: bool,
    pub verdicts: Vec<Verdict>,
}

fn cmd_validate(cfg: &RunConfig) -> Result<Status> {
    let suite = cfg.suite.clone().unwrap_or_else(|| "all".to_string());
    let opts = ValidateOptions {
        seed: cfg.seed.unwrap_or(ValidateOptions::default().seed),
        threads: cfg.threads,
    };
    let mut resolved = cfg.clone();
    resolved.suite = Some(suite.clone());
    resolved.seed = Some(opts.seed);
    let verdicts = run_suite(&suite, &opts)?;
    for v in &verdicts {
        eprintln!("{}", v.summary_line());
    }
    let pass = verdicts.iter().all(|v| v.pass);
    let bytes = match cfg.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => json_bytes(&ValidateReport {
            schema_version: SCHEMA_VERSION,
            config: resolved,
            pass,
            verdicts,
        })?,
        OutputFormat::Csv => {
            let mut s = String::from("id,measured,threshold,pass,seconds\n");
            for v in &verdicts {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    v.id, v.measured, v.threshold, v.pass as u8, v.seconds
                ));
            }
            s.into_bytes()
        }
    };
    emit(cfg.out.as_deref(), &bytes)?;
    Ok(if pass { Status::Success } else { Status::CheckFailed })
}
