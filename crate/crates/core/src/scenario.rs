//! Decision situations and the hidden preference schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{canonicalize, dot, LpInstance, UnitPreference};
use crate::rng::{situation_rng, SimRng};

/// Sampling ranges for generated instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default = "default_entry_low")]
    pub entry_low: f64,
    #[serde(default = "default_entry_high")]
    pub entry_high: f64,
    #[serde(default = "default_avail_low")]
    pub avail_low: f64,
    /// Defaults to the variable count `n`.
    #[serde(default)]
    pub avail_high: Option<f64>,
    /// Redraw the demand matrix every step instead of once per replication.
    #[serde(default)]
    pub redraw_matrix: bool,
}

fn default_entry_low() -> f64 {
    0.1
}
fn default_entry_high() -> f64 {
    1.0
}
fn default_avail_low() -> f64 {
    1.0
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            entry_low: default_entry_low(),
            entry_high: default_entry_high(),
            avail_low: default_avail_low(),
            avail_high: None,
            redraw_matrix: false,
        }
    }
}

impl GeneratorConfig {
    pub fn avail_high_for(&self, n: usize) -> f64 {
        self.avail_high.unwrap_or(n as f64)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let finite = [
            self.entry_low,
            self.entry_high,
            self.avail_low,
            self.avail_high_for(n),
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("generator", "ranges must be finite"));
        }
        if !(self.entry_low > 0.0 && self.entry_low <= self.entry_high) {
            return Err(Error::config(
                "generator.entry_low",
                format!(
                    "need 0 < entry_low <= entry_high, got {} / {}",
                    self.entry_low, self.entry_high
                ),
            ));
        }
        if !(self.avail_low >= 0.0 && self.avail_low <= self.avail_high_for(n)) {
            return Err(Error::config(
                "generator.avail_low",
                format!(
                    "need 0 <= avail_low <= avail_high, got {} / {}",
                    self.avail_low,
                    self.avail_high_for(n)
                ),
            ));
        }
        Ok(())
    }
}

/// Seeded stream of allocation problems.
///
/// By default the demand matrix is drawn once and only the availabilities and
/// per-variable bounds change between situations.
#[derive(Debug, Clone)]
pub struct SituationGenerator {
    n: usize,
    m_raw: usize,
    ranges: GeneratorConfig,
    matrix: Option<Vec<Vec<f64>>>,
    rng: SimRng,
}

impl SituationGenerator {
    pub fn new(n: usize, m_raw: usize, ranges: GeneratorConfig, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("n", "must be >= 1"));
        }
        ranges.validate(n)?;
        let mut gen = Self {
            n,
            m_raw,
            ranges,
            matrix: None,
            rng: situation_rng(seed),
        };
        if !gen.ranges.redraw_matrix {
            gen.matrix = Some(gen.draw_matrix());
        }
        Ok(gen)
    }

    fn draw_matrix(&mut self) -> Vec<Vec<f64>> {
        let (lo, hi) = (self.ranges.entry_low, self.ranges.entry_high);
        (0..self.m_raw)
            .map(|_| {
                (0..self.n)
                    .map(|_| self.rng.random_range(lo..=hi))
                    .collect()
            })
            .collect()
    }

    fn draw_avail(&mut self, len: usize) -> Vec<f64> {
        let (lo, hi) = (self.ranges.avail_low, self.ranges.avail_high_for(self.n));
        (0..len).map(|_| self.rng.random_range(lo..=hi)).collect()
    }

    /// Draws the next situation.
    pub fn next_situation(&mut self) -> Result<LpInstance> {
        let a = match &self.matrix {
            Some(a) => a.clone(),
            None => self.draw_matrix(),
        };
        let a0 = self.draw_avail(self.m_raw);
        let b = self.draw_avail(self.n);
        canonicalize(&a, &a0, &b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Fixed,
    Step,
    Drift,
}

/// Schedule parameters as written in a config file. Targets are raw
/// nonnegative vectors and get normalized when the schedule is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    #[serde(default = "default_epoch_length")]
    pub epoch_length: usize,
    pub targets: Vec<Vec<f64>>,
    #[serde(default)]
    pub drift_rate: f64,
}

fn default_epoch_length() -> usize {
    100
}

impl ScheduleConfig {
    pub fn build(&self, n: usize) -> Result<PreferenceSchedule> {
        if self.targets.is_empty() {
            return Err(Error::config(
                "schedule.targets",
                "at least one target is required",
            ));
        }
        let mut targets = Vec::with_capacity(self.targets.len());
        for (i, raw) in self.targets.iter().enumerate() {
            if raw.len() != n {
                return Err(Error::config(
                    format!("schedule.targets[{i}]"),
                    format!("has {} components, expected n = {n}", raw.len()),
                ));
            }
            let p = UnitPreference::normalized(raw)
                .map_err(|e| Error::config(format!("schedule.targets[{i}]"), e.to_string()))?;
            targets.push(p);
        }
        PreferenceSchedule::new(self.kind, self.epoch_length, targets, self.drift_rate)
    }
}

/// The hidden true preference as a function of the step index.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceSchedule {
    kind: ScheduleKind,
    epoch_length: usize,
    targets: Vec<UnitPreference>,
    drift_rate: f64,
}

impl PreferenceSchedule {
    pub fn new(
        kind: ScheduleKind,
        epoch_length: usize,
        targets: Vec<UnitPreference>,
        drift_rate: f64,
    ) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::config(
                "schedule.targets",
                "at least one target is required",
            ));
        }
        let n = targets[0].dim();
        if targets.iter().any(|t| t.dim() != n) {
            return Err(Error::config(
                "schedule.targets",
                "targets differ in length",
            ));
        }
        if epoch_length == 0 {
            return Err(Error::config("schedule.epoch_length", "must be >= 1"));
        }
        if !drift_rate.is_finite() || drift_rate < 0.0 {
            return Err(Error::config(
                "schedule.drift_rate",
                "must be finite and >= 0",
            ));
        }
        Ok(Self {
            kind,
            epoch_length,
            targets,
            drift_rate,
        })
    }

    /// Step schedule cycling through `targets` every `epoch_length` steps.
    pub fn step(epoch_length: usize, targets: Vec<UnitPreference>) -> Result<Self> {
        Self::new(ScheduleKind::Step, epoch_length, targets, 0.0)
    }

    pub fn fixed(target: UnitPreference) -> Self {
        Self {
            kind: ScheduleKind::Fixed,
            epoch_length: 1,
            targets: vec![target],
            drift_rate: 0.0,
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn epoch_length(&self) -> usize {
        self.epoch_length
    }

    /// Index of the preference epoch containing `t` (always 0 unless stepping).
    pub fn epoch_at(&self, t: usize) -> usize {
        match self.kind {
            ScheduleKind::Step => t / self.epoch_length,
            ScheduleKind::Fixed | ScheduleKind::Drift => 0,
        }
    }

    /// True preference at step `t`. A change takes effect on the first step of the new epoch.
    pub fn preference_at(&self, t: usize) -> UnitPreference {
        match self.kind {
            ScheduleKind::Fixed => self.targets[0].clone(),
            ScheduleKind::Step => self.targets[self.epoch_at(t) % self.targets.len()].clone(),
            ScheduleKind::Drift => self.drifted(t),
        }
    }

    /// Geodesic rotation from `targets[0]` toward `targets[1]`, clamped at the latter.
    fn drifted(&self, t: usize) -> UnitPreference {
        let from = self.targets[0].as_slice();
        let Some(to) = self.targets.get(1).map(|p| p.as_slice()) else {
            return self.targets[0].clone();
        };
        let total = dot(from, to).clamp(-1.0, 1.0).acos();
        let angle = (self.drift_rate * t as f64).min(total);
        if total < 1e-12 || angle <= 0.0 {
            return self.targets[0].clone();
        }
        let (wa, wb) = ((total - angle).sin(), angle.sin());
        let v: Vec<f64> = from
            .iter()
            .zip(to)
            .map(|(a, b)| (wa * a + wb * b).max(0.0))
            .collect();
        UnitPreference::normalized(&v).expect("slerp of nonnegative unit vectors is nonzero")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{enumerate_vertices, norm};
    use approx::assert_abs_diff_eq;

    fn reference_targets() -> Vec<UnitPreference> {
        vec![
            UnitPreference::new(vec![0.8, 0.6]).unwrap(),
            UnitPreference::new(vec![0.6, 0.8]).unwrap(),
        ]
    }

    #[test]
    fn step_boundary_timing() {
        let s = PreferenceSchedule::step(50, reference_targets()).unwrap();
        assert_eq!(s.preference_at(0).as_slice(), &[0.8, 0.6]);
        assert_eq!(s.preference_at(49).as_slice(), &[0.8, 0.6]);
        assert_eq!(s.preference_at(50).as_slice(), &[0.6, 0.8]);
        assert_eq!(s.preference_at(100).as_slice(), &[0.8, 0.6]);
        assert_eq!(s.epoch_at(149), 2);
    }

    #[test]
    fn step_change_point_count() {
        for (horizon, t) in [(300usize, 100usize), (301, 100), (7, 3), (5, 5), (1, 4)] {
            let s = PreferenceSchedule::step(t, reference_targets()).unwrap();
            let changes = (1..horizon)
                .filter(|&k| s.preference_at(k) != s.preference_at(k - 1))
                .count();
            assert_eq!(changes, horizon.div_ceil(t) - 1, "horizon {horizon}, T {t}");
        }
    }

    #[test]
    fn fixed_is_constant() {
        let s = PreferenceSchedule::fixed(reference_targets()[1].clone());
        for t in [0, 1, 1000] {
            assert_eq!(s.preference_at(t).as_slice(), &[0.6, 0.8]);
        }
    }

    #[test]
    fn drift_zero_rate_is_constant() {
        let s = PreferenceSchedule::new(ScheduleKind::Drift, 1, reference_targets(), 0.0).unwrap();
        assert_eq!(s.preference_at(500).as_slice(), &[0.8, 0.6]);
    }

    #[test]
    fn drift_rotates_and_clamps() {
        let targets = vec![
            UnitPreference::new(vec![1.0, 0.0]).unwrap(),
            UnitPreference::new(vec![0.0, 1.0]).unwrap(),
        ];
        let s = PreferenceSchedule::new(ScheduleKind::Drift, 1, targets, 0.01).unwrap();
        let p = s.preference_at(10);
        assert_abs_diff_eq!(p.as_slice()[0], 0.1f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.as_slice()[1], 0.1f64.sin(), epsilon = 1e-12);
        let end = s.preference_at(10_000);
        assert_abs_diff_eq!(end.as_slice()[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(end.as_slice()[1], 1.0, epsilon = 1e-12);
        for t in 0..300 {
            let p = s.preference_at(t);
            assert_abs_diff_eq!(norm(p.as_slice()), 1.0, epsilon = 1e-9);
            assert!(p.as_slice().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn schedule_config_validation() {
        let mut cfg = ScheduleConfig {
            kind: ScheduleKind::Step,
            epoch_length: 10,
            targets: vec![vec![4.0, 3.0]],
            drift_rate: 0.0,
        };
        let s = cfg.build(2).unwrap();
        assert_abs_diff_eq!(s.preference_at(0).as_slice()[0], 0.8, epsilon = 1e-15);
        cfg.targets = vec![vec![-1.0, 1.0]];
        assert!(cfg.build(2).is_err());
        cfg.targets = vec![vec![0.0, 0.0]];
        assert!(cfg.build(2).is_err());
        cfg.targets = vec![];
        assert!(cfg.build(2).is_err());
        cfg.targets = vec![vec![1.0, 1.0, 1.0]];
        assert!(cfg.build(2).is_err());
        cfg.targets = vec![vec![1.0, 1.0]];
        cfg.epoch_length = 0;
        assert!(cfg.build(2).is_err());
    }

    #[test]
    fn situations_are_reproducible() {
        let draw = |seed| {
            let mut g = SituationGenerator::new(2, 2, GeneratorConfig::default(), seed).unwrap();
            (0..10)
                .map(|_| g.next_situation().unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn degenerate_ranges_give_deterministic_family() {
        let ranges = GeneratorConfig {
            entry_low: 1.0,
            entry_high: 1.0,
            avail_low: 2.0,
            avail_high: Some(2.0),
            redraw_matrix: true,
        };
        let mut g = SituationGenerator::new(2, 1, ranges, 9).unwrap();
        let first = g.next_situation().unwrap();
        assert_eq!(first.a(), &[vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(first.a0(), &[2.0, 2.0, 2.0]);
        for _ in 0..5 {
            assert_eq!(g.next_situation().unwrap(), first);
        }
    }

    #[test]
    fn fixed_matrix_mode_keeps_demands() {
        let mut g = SituationGenerator::new(3, 3, GeneratorConfig::default(), 1).unwrap();
        let a = g.next_situation().unwrap();
        let b = g.next_situation().unwrap();
        assert_eq!(a.a()[..3], b.a()[..3]);
        assert_ne!(a.a0(), b.a0());
    }

    #[test]
    fn generated_polytopes_have_enough_vertices() {
        for n in 2..=4 {
            let mut g =
                SituationGenerator::new(n, n, GeneratorConfig::default(), 100 + n as u64).unwrap();
            for _ in 0..100 {
                let inst = g.next_situation().unwrap();
                assert!(enumerate_vertices(&inst).unwrap().len() > n);
            }
        }
    }

    #[test]
    fn invalid_ranges_rejected() {
        let bad = GeneratorConfig {
            entry_low: 0.0,
            ..GeneratorConfig::default()
        };
        assert!(SituationGenerator::new(2, 2, bad, 0).is_err());
        let bad = GeneratorConfig {
            avail_low: 3.0,
            avail_high: Some(2.0),
            ..GeneratorConfig::default()
        };
        assert!(SituationGenerator::new(2, 2, bad, 0).is_err());
    }
}
