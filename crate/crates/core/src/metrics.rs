//! Effectiveness and adaptation measures.
//!
//! `eta` is the true value of the learner's decision divided by the true
//! optimum, so it lives in `[0, 1]`. Averaged over replications it gives the
//! learning curve `L(t)`; averaged over time it gives the single-number
//! effectiveness used by the non-stationarity frontier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::lp::{dot, solve_lp, LpInstance, UnitPreference};
use crate::scenario::ScheduleKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub eta: f64,
    /// The learner's decision equals the operator's noiseless decision.
    pub coincide: bool,
    /// The replication has adapted within the current epoch at this step.
    pub tau_flag: bool,
    pub c_hat: UnitPreference,
    pub epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectivenessTrace {
    pub replication_id: usize,
    pub n: usize,
    pub records: Vec<StepRecord>,
}

impl EffectivenessTrace {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn mean_eta(&self) -> f64 {
        self.records.iter().map(|r| r.eta).sum::<f64>() / self.records.len().max(1) as f64
    }
}

/// Normalized effectiveness of deciding with `c_hat` when the truth is `c_true`.
pub fn step_effectiveness(
    inst: &LpInstance,
    c_hat: &UnitPreference,
    c_true: &UnitPreference,
) -> Result<(f64, bool)> {
    let robot = solve_lp(inst, c_hat)?.vertex;
    let best = solve_lp(inst, c_true)?;
    let coincide = robot.same_point(&best.vertex.x);
    let eta = if best.value <= 0.0 {
        1.0
    } else {
        (dot(c_true.as_slice(), &robot.x) / best.value).clamp(0.0, 1.0)
    };
    Ok((eta, coincide))
}

fn check_aligned(traces: &[EffectivenessTrace]) -> Result<usize> {
    let first = traces
        .first()
        .ok_or_else(|| Error::InvalidInput("no traces to aggregate".into()))?;
    let horizon = first.horizon();
    if let Some(t) = traces
        .iter()
        .find(|t| t.horizon() != horizon || t.n != first.n)
    {
        return Err(Error::InvalidInput(format!(
            "trace {} (n = {}, horizon {}) does not match n = {}, horizon {horizon}",
            t.replication_id,
            t.n,
            t.horizon(),
            first.n
        )));
    }
    Ok(horizon)
}

/// Pointwise mean of `eta` across replications: `(t, mean_eta)`.
pub fn learning_curve(traces: &[EffectivenessTrace]) -> Result<Vec<(usize, f64)>> {
    let horizon = check_aligned(traces)?;
    let r = traces.len() as f64;
    Ok((0..horizon)
        .map(|t| {
            let sum: f64 = traces.iter().map(|tr| tr.records[t].eta).sum();
            (traces[0].records[t].t, sum / r)
        })
        .collect())
}

/// Pointwise fraction of replications whose decision coincides with the operator's.
pub fn coincide_rate_curve(traces: &[EffectivenessTrace]) -> Result<Vec<f64>> {
    let horizon = check_aligned(traces)?;
    let r = traces.len() as f64;
    Ok((0..horizon)
        .map(|t| traces.iter().filter(|tr| tr.records[t].coincide).count() as f64 / r)
        .collect())
}

/// Smallest `t` such that the coincidence frequency over all replications and
/// the steps `[t, t + window)` reaches `beta`. Steps count from the first record.
pub fn adaptation_period(
    traces: &[EffectivenessTrace],
    beta: f64,
    window: usize,
) -> Result<Option<usize>> {
    let horizon = check_aligned(traces)?;
    adaptation_period_in(traces, 0, horizon, beta, window)
}

/// [`adaptation_period`] restricted to the steps `[start, end)`, measured from `start`.
pub fn adaptation_period_in(
    traces: &[EffectivenessTrace],
    start: usize,
    end: usize,
    beta: f64,
    window: usize,
) -> Result<Option<usize>> {
    let horizon = check_aligned(traces)?;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidInput(format!("beta = {beta} outside (0, 1]")));
    }
    if window == 0 {
        return Err(Error::InvalidInput("window must be >= 1".into()));
    }
    if start > end || end > horizon {
        return Err(Error::InvalidInput(format!(
            "range [{start}, {end}) outside horizon {horizon}"
        )));
    }
    if window > end - start {
        return Err(Error::InvalidInput(format!(
            "window {window} exceeds the {} available steps",
            end - start
        )));
    }
    let hits: Vec<usize> = (start..end)
        .map(|t| traces.iter().filter(|tr| tr.records[t].coincide).count())
        .collect();
    Ok(first_window_reaching(
        &hits,
        traces.len() * window,
        beta,
        window,
    ))
}

fn first_window_reaching(
    hits: &[usize],
    per_window: usize,
    beta: f64,
    window: usize,
) -> Option<usize> {
    let mut sum: usize = hits[..window].iter().sum();
    for s in 0..=hits.len() - window {
        if s > 0 {
            sum = sum + hits[s + window - 1] - hits[s - 1];
        }
        if sum as f64 >= beta * per_window as f64 {
            return Some(s);
        }
    }
    None
}

/// Per-step adaptation flags for one replication: within each epoch
/// (maximal run of equal `epochs`), steps from the epoch's own adaptation
/// period onward are flagged. The window is clamped to the epoch length.
pub fn adaptation_flags(
    coincide: &[bool],
    epochs: &[usize],
    beta: f64,
    window: usize,
) -> Vec<bool> {
    let mut flags = vec![false; coincide.len()];
    let mut start = 0;
    while start < coincide.len() {
        let end = (start..coincide.len())
            .find(|&t| epochs[t] != epochs[start])
            .unwrap_or(coincide.len());
        let hits: Vec<usize> = coincide[start..end].iter().map(|&c| c as usize).collect();
        let w = window.clamp(1, end - start);
        if let Some(tau) = first_window_reaching(&hits, w, beta, w) {
            flags[start + tau..end].fill(true);
        }
        start = end;
    }
    flags
}

/// Mean `eta` over every step of every replication.
pub fn time_average_effectiveness(traces: &[EffectivenessTrace]) -> Result<f64> {
    let (sum, count) = traces
        .iter()
        .flat_map(|t| t.records.iter())
        .fold((0.0, 0usize), |(s, c), r| (s + r.eta, c + 1));
    if count == 0 {
        return Err(Error::InvalidInput("no steps to average".into()));
    }
    Ok(sum / count as f64)
}

/// Mean and standard error of the per-replication time averages.
pub fn replication_mean_and_se(traces: &[EffectivenessTrace]) -> Result<(f64, f64)> {
    if traces.is_empty() {
        return Err(Error::InvalidInput("no traces".into()));
    }
    let means: Vec<f64> = traces.iter().map(|t| t.mean_eta()).collect();
    let r = means.len() as f64;
    let mean = means.iter().sum::<f64>() / r;
    if means.len() < 2 {
        return Ok((mean, 0.0));
    }
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Ok((mean, (var / r).sqrt()))
}

/// Number of adjacent pairs where the curve strictly decreases.
pub fn decreasing_pairs(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] < w[0]).count()
}

/// For each change point `c`, the mean of `curve` over `[c - span, c)` minus
/// the mean over `[c, c + span)`. Change points too close to either end are skipped.
pub fn change_point_drops(
    curve: &[f64],
    change_points: &[usize],
    span: usize,
) -> Vec<(usize, f64)> {
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    change_points
        .iter()
        .filter(|&&c| c >= span && c + span <= curve.len())
        .map(|&c| (c, mean(&curve[c - span..c]) - mean(&curve[c..c + span])))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub epoch_length: usize,
    pub mean_eta: f64,
    pub std_err: f64,
    pub qualifies: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierResult {
    pub rows: Vec<FrontierRow>,
    /// Smallest epoch length whose mean effectiveness reaches the threshold.
    pub t_critical: Option<usize>,
}

impl FrontierResult {
    /// Checks that each row is no worse than its predecessor by more than
    /// `k` standard errors of the difference.
    pub fn is_monotone_within(&self, k: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let se = (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt();
            w[1].mean_eta >= w[0].mean_eta - k * se
        })
    }
}

/// Runs `base` once per epoch length in `t_grid` with a step schedule and
/// reports the time-averaged effectiveness of each.
pub fn frontier_sweep(
    base: &ExperimentConfig,
    t_grid: &[usize],
    theta: f64,
) -> Result<FrontierResult> {
    if t_grid.is_empty() {
        return Err(Error::config("t_grid", "must not be empty"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] == 0 {
        return Err(Error::config(
            "t_grid",
            "must be positive and strictly ascending",
        ));
    }
    if !theta.is_finite() {
        return Err(Error::config("theta", "must be finite"));
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut cfg = base.clone();
        cfg.schedule.kind = ScheduleKind::Step;
        cfg.schedule.epoch_length = t;
        let (traces, _) = run_experiment(&cfg)?;
        let (mean_eta, std_err) = replication_mean_and_se(&traces)?;
        rows.push(FrontierRow {
            epoch_length: t,
            mean_eta,
            std_err,
            qualifies: mean_eta >= theta,
        });
    }
    let t_critical = rows.iter().find(|r| r.qualifies).map(|r| r.epoch_length);
    Ok(FrontierResult { rows, t_critical })
}
