//! Simulated decision-maker.
//!
//! The operator solves the allocation problem under the hidden preferences,
//! except that with probability `p_noise` it picks a uniformly random
//! non-optimal vertex instead. Each applied decision is then graded good or
//! bad by comparing its true value with the true optimum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inverse::Label;
use crate::lp::{dot, polytope_vertices, solve_lp, LpInstance, UnitPreference, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    /// Probability of a non-optimal choice.
    #[serde(default)]
    pub p_noise: f64,
    /// A decision is good if it reaches `(1 - delta_good)` of the optimum.
    #[serde(default)]
    pub delta_good: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self {
            p_noise: 0.0,
            delta_good: 0.0,
        }
    }
}

impl OperatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_noise) {
            return Err(Error::config(
                "operator.p_noise",
                format!("{} is outside [0, 1]", self.p_noise),
            ));
        }
        if !(0.0..=1.0).contains(&self.delta_good) {
            return Err(Error::config(
                "operator.delta_good",
                format!("{} is outside [0, 1]", self.delta_good),
            ));
        }
        Ok(())
    }
}

/// The operator's decision for one situation.
///
/// One uniform draw decides whether the choice is noisy, so the stream
/// consumption per call does not depend on the instance.
pub fn choose<R: Rng + ?Sized>(
    inst: &LpInstance,
    c_true: &UnitPreference,
    cfg: &OperatorConfig,
    rng: &mut R,
) -> Result<Vertex> {
    cfg.validate()?;
    let best = solve_lp(inst, c_true)?.vertex;
    let u: f64 = rng.random();
    if u >= cfg.p_noise {
        return Ok(best);
    }
    let others: Vec<Vertex> = polytope_vertices(inst)?
        .into_iter()
        .filter(|v| !v.same_point(&best.x))
        .collect();
    if others.is_empty() {
        return Ok(best);
    }
    let pick = rng.random_range(0..others.len());
    Ok(others.into_iter().nth(pick).expect("index in range"))
}

/// Good iff `c_true·x >= (1 - delta_good) * optimum`; always good when the optimum is 0.
pub fn evaluate(
    inst: &LpInstance,
    chosen: &Vertex,
    c_true: &UnitPreference,
    cfg: &OperatorConfig,
) -> Result<Label> {
    let optimum = solve_lp(inst, c_true)?.value;
    if optimum <= 0.0 {
        return Ok(Label::Good);
    }
    let value = dot(c_true.as_slice(), &chosen.x);
    // Relative slack absorbs round-off when the chosen vertex is the optimum itself.
    let threshold = (1.0 - cfg.delta_good) * optimum - 1e-12 * optimum;
    Ok(if value >= threshold {
        Label::Good
    } else {
        Label::Bad
    })
}
