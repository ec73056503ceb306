//! Config-driven experiment runner.
//!
//! Every replication runs the same loop for `horizon` steps: draw a situation,
//! score the decision the learner makes with its current estimate, let the
//! operator decide under the current true preference, grade that decision,
//! and update the estimator with it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::inverse::{update_estimate, CutSet, Observation, DEFAULT_WINDOW};
use crate::lp::UnitPreference;
use crate::metrics::{
    adaptation_flags, coincide_rate_curve, learning_curve, step_effectiveness, EffectivenessTrace,
    FrontierResult, StepRecord,
};
use crate::operator::{choose, evaluate, OperatorConfig};
use crate::plot::render_curve_svg;
use crate::rng::{operator_rng, replication_seed};
use crate::scenario::{GeneratorConfig, PreferenceSchedule, ScheduleConfig, SituationGenerator};

pub const STEPS_CSV: &str = "steps.csv";
pub const CURVE_CSV: &str = "curve.csv";
pub const FRONTIER_CSV: &str = "frontier.csv";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const CURVE_SVG: &str = "curve.svg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Coincidence window `K` for the adaptation period.
    #[serde(default = "default_k")]
    pub window: usize,
}

fn default_beta() -> f64 {
    0.95
}
fn default_k() -> usize {
    20
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            beta: default_beta(),
            window: default_k(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub plot: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            plot: false,
        }
    }
}

/// All parameters of one experiment, as read from the JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Resource rows before bounds are folded in; defaults to `n`.
    #[serde(default)]
    pub m_raw: Option<usize>,
    pub horizon: usize,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub operator: OperatorConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

impl ExperimentConfig {
    /// Parses and validates a JSON config document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn m_raw(&self) -> usize {
        self.m_raw.unwrap_or(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be >= 1"));
        }
        if self.replications == 0 {
            return Err(Error::config("replications", "must be >= 1"));
        }
        self.operator.validate()?;
        if self.estimator.window == 0 {
            return Err(Error::config("estimator.window", "must be >= 1"));
        }
        self.generator.validate(self.n)?;
        self.schedule.build(self.n)?;
        if !(self.metrics.beta > 0.0 && self.metrics.beta <= 1.0) {
            return Err(Error::config(
                "metrics.beta",
                format!("{} is outside (0, 1]", self.metrics.beta),
            ));
        }
        if self.metrics.window == 0 {
            return Err(Error::config("metrics.window", "must be >= 1"));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<PreferenceSchedule> {
        self.schedule.build(self.n)
    }

    pub fn replication_seeds(&self) -> Vec<u64> {
        (0..self.replications as u64)
            .map(|r| replication_seed(self.seed, r))
            .collect()
    }
}

/// Provenance record written next to the CSV outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub replication_seeds: Vec<u64>,
    pub wall_time_secs: f64,
    /// SHA-256 of each written file, keyed by file name.
    pub outputs: BTreeMap<String, String>,
}

/// How the learner picks its estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Learner {
    /// Windowed max-margin estimator.
    MaxMargin,
    /// Always the uniform direction; the uninformed baseline.
    Uniform,
}

/// Runs every replication of `cfg`, in parallel, ordered by replication id.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<EffectivenessTrace>, RunManifest)> {
    run_with(cfg, Learner::MaxMargin)
}

/// [`run_experiment`] with a chosen learner.
pub fn run_with(
    cfg: &ExperimentConfig,
    learner: Learner,
) -> Result<(Vec<EffectivenessTrace>, RunManifest)> {
    cfg.validate()?;
    let started = Instant::now();
    let schedule = cfg.schedule()?;
    let seeds = cfg.replication_seeds();
    let traces = seeds
        .par_iter()
        .enumerate()
        .map(|(r, &seed)| run_replication(cfg, &schedule, r, seed, learner))
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        replication_seeds: seeds,
        wall_time_secs: started.elapsed().as_secs_f64(),
        outputs: BTreeMap::new(),
    };
    Ok((traces, manifest))
}

fn run_replication(
    cfg: &ExperimentConfig,
    schedule: &PreferenceSchedule,
    replication_id: usize,
    seed: u64,
    learner: Learner,
) -> Result<EffectivenessTrace> {
    let mut situations = SituationGenerator::new(cfg.n, cfg.m_raw(), cfg.generator.clone(), seed)?;
    let mut rng = operator_rng(seed);
    let mut state = CutSet::new(cfg.n, cfg.estimator.window)?;
    let mut records = Vec::with_capacity(cfg.horizon);
    let mut c_hat = UnitPreference::uniform(cfg.n);
    for t in 0..cfg.horizon {
        let inst = situations.next_situation()?;
        let c_true = schedule.preference_at(t);
        // The learner commits to its decision before seeing the operator's.
        let (eta, coincide) = step_effectiveness(&inst, &c_hat, &c_true)?;
        records.push(StepRecord {
            t,
            eta,
            coincide,
            tau_flag: false,
            c_hat: c_hat.clone(),
            epoch: schedule.epoch_at(t),
        });
        let chosen = choose(&inst, &c_true, &cfg.operator, &mut rng)?;
        let label = evaluate(&inst, &chosen, &c_true, &cfg.operator)?;
        if learner == Learner::MaxMargin {
            let obs = Observation::new(t as u64, inst, chosen, label)?;
            let (next, est) = update_estimate(&state, &obs)?;
            state = next;
            c_hat = est.c_hat;
        }
    }
    let coincide: Vec<bool> = records.iter().map(|r| r.coincide).collect();
    let epochs: Vec<usize> = records.iter().map(|r| r.epoch).collect();
    let flags = adaptation_flags(&coincide, &epochs, cfg.metrics.beta, cfg.metrics.window);
    for (r, f) in records.iter_mut().zip(flags) {
        r.tau_flag = f;
    }
    Ok(EffectivenessTrace {
        replication_id,
        n: cfg.n,
        records,
    })
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Per-step CSV: one row per (replication, t).
pub fn steps_csv(traces: &[EffectivenessTrace]) -> Result<Vec<u8>> {
    let mut sorted: Vec<&EffectivenessTrace> = traces.iter().collect();
    sorted.sort_by_key(|t| t.replication_id);
    let mut w = csv_writer();
    w.write_record([
        "replication",
        "t",
        "epoch",
        "eta",
        "coincide",
        "tau_flag",
        "c_hat",
    ])?;
    for tr in sorted {
        for r in &tr.records {
            let c_hat = r
                .c_hat
                .as_slice()
                .iter()
                .map(|v| format!("{v:.9}"))
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                tr.replication_id.to_string(),
                r.t.to_string(),
                r.epoch.to_string(),
                format!("{:.9}", r.eta),
                bit(r.coincide).to_string(),
                bit(r.tau_flag).to_string(),
                c_hat,
            ])?;
        }
    }
    finish(w)
}

/// Aggregated curve CSV: replication-averaged eta and coincidence rate per step.
pub fn curve_csv(traces: &[EffectivenessTrace]) -> Result<Vec<u8>> {
    let curve = learning_curve(traces)?;
    let rates = coincide_rate_curve(traces)?;
    let mut w = csv_writer();
    w.write_record(["t", "mean_eta", "coincide_rate"])?;
    for ((t, eta), rate) in curve.iter().zip(rates) {
        w.write_record([t.to_string(), format!("{eta:.9}"), format!("{rate:.9}")])?;
    }
    finish(w)
}

pub fn frontier_csv(result: &FrontierResult) -> Result<Vec<u8>> {
    let mut w = csv_writer();
    w.write_record(["T", "mean_eta", "qualifies"])?;
    for row in &result.rows {
        w.write_record([
            row.epoch_length.to_string(),
            format!("{:.9}", row.mean_eta),
            bit(row.qualifies).to_string(),
        ])?;
    }
    finish(w)
}

fn write_digested(
    dir: &Path,
    name: &str,
    bytes: &[u8],
    digests: &mut BTreeMap<String, String>,
) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, bytes)?;
    digests.insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
    Ok(path)
}

/// Writes the per-step CSV, the curve CSV, the optional SVG plot and the
/// manifest (last, so it carries the digests of the other files).
pub fn emit_outputs(
    traces: &[EffectivenessTrace],
    manifest: &mut RunManifest,
    out_dir: &Path,
    plot: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut digests = BTreeMap::new();
    written.push(write_digested(
        out_dir,
        STEPS_CSV,
        &steps_csv(traces)?,
        &mut digests,
    )?);
    written.push(write_digested(
        out_dir,
        CURVE_CSV,
        &curve_csv(traces)?,
        &mut digests,
    )?);
    if plot {
        let curve = learning_curve(traces)?;
        let title = format!(
            "mean effectiveness, n = {}, R = {}",
            manifest.config.n, manifest.config.replications
        );
        let svg = render_curve_svg(&curve, &title);
        written.push(write_digested(
            out_dir,
            CURVE_SVG,
            svg.as_bytes(),
            &mut digests,
        )?);
    }
    manifest.outputs = digests;
    let path = out_dir.join(MANIFEST_JSON);
    fs::write(&path, serde_json::to_string_pretty(manifest)? + "\n")?;
    written.push(path);
    Ok(written)
}
