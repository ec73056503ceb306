//! Reverse LP: recover a preference vector consistent with observed decisions.
//!
//! A decision `x^k` that the operator considered good is assumed optimal
//! among the vertices of its instance. For every other vertex `v` this gives
//! the homogeneous cut `c·(x^k - v) >= 0`. The cuts from the most recent
//! observations bound a cone of consistent preferences; the point estimate is
//! the direction of largest margin inside that cone and the nonnegative
//! orthant.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{
    dot, max_dist, maximize_lexicographic, norm, polytope_vertices, LpInstance, UnitPreference,
    Vertex, VERTEX_TOL,
};

/// Observations retained by default.
pub const DEFAULT_WINDOW: usize = 40;
/// Max-margin values below this mean the cone has empty interior.
pub const MARGIN_EPS: f64 = 1e-7;

const SUPPORT_TOL: f64 = 1e-9;
const DUPLICATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Good,
    Bad,
}

/// One decision event.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub k: u64,
    pub inst: LpInstance,
    pub chosen: Vertex,
    pub label: Label,
}

impl Observation {
    /// Checks that `chosen` is a vertex of `inst`.
    pub fn new(k: u64, inst: LpInstance, chosen: Vertex, label: Label) -> Result<Self> {
        if !inst.is_feasible(&chosen.x, VERTEX_TOL) {
            return Err(Error::InvalidInput(format!(
                "chosen point {:?} is infeasible",
                chosen.x
            )));
        }
        if inst.active_set(&chosen.x, VERTEX_TOL).len() < inst.n() {
            return Err(Error::InvalidInput(format!(
                "chosen point {:?} is not a vertex",
                chosen.x
            )));
        }
        Ok(Self {
            k,
            inst,
            chosen,
            label,
        })
    }
}

/// The half-space `{c : g·c >= 0}` with unit normal `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    g: Vec<f64>,
    origin_k: u64,
    /// The compared vertex is adjacent to the chosen one. Cuts to
    /// non-adjacent vertices are implied by the edge cuts, margin included.
    edge: bool,
}

impl Cut {
    /// Normalizes `normal` to unit length. Rejects (near-)zero normals.
    pub fn new(normal: &[f64], origin_k: u64) -> Result<Self> {
        let len = norm(normal);
        if len.is_nan() || len < VERTEX_TOL {
            return Err(Error::InvalidInput(format!(
                "cut normal {normal:?} is too short to normalize"
            )));
        }
        Ok(Self {
            g: normal.iter().map(|v| v / len).collect(),
            origin_k,
            edge: true,
        })
    }

    /// A cut known to be implied by edge cuts of the same observation.
    fn implied(normal: &[f64], origin_k: u64) -> Result<Self> {
        Ok(Self {
            edge: false,
            ..Self::new(normal, origin_k)?
        })
    }

    pub fn normal(&self) -> &[f64] {
        &self.g
    }

    pub fn origin_k(&self) -> u64 {
        self.origin_k
    }

    pub fn is_edge(&self) -> bool {
        self.edge
    }

    /// `g·c`; nonnegative iff `c` satisfies the cut.
    pub fn slack(&self, c: &[f64]) -> f64 {
        dot(&self.g, c)
    }
}

/// Cuts from the most recent good observations, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSet {
    n: usize,
    window: usize,
    groups: VecDeque<(u64, Vec<Cut>)>,
}

impl CutSet {
    pub fn new(n: usize, window: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("cut set dimension must be >= 1".into()));
        }
        if window == 0 {
            return Err(Error::InvalidInput("estimator window must be >= 1".into()));
        }
        Ok(Self {
            n,
            window,
            groups: VecDeque::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// All retained cuts ordered by originating step.
    pub fn cuts(&self) -> impl Iterator<Item = &Cut> {
        self.groups.iter().flat_map(|(_, cuts)| cuts.iter())
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(|(_, cuts)| cuts.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Step indices of the observations whose cuts are retained.
    pub fn observation_steps(&self) -> impl Iterator<Item = u64> + '_ {
        self.groups.iter().map(|(k, _)| *k)
    }

    /// Appends one observation's cuts and evicts beyond the window.
    pub fn push(&mut self, k: u64, cuts: Vec<Cut>) -> Result<()> {
        if let Some(c) = cuts.iter().find(|c| c.g.len() != self.n) {
            return Err(Error::InvalidInput(format!(
                "cut of dimension {} pushed into a {}-dimensional cut set",
                c.g.len(),
                self.n
            )));
        }
        if let Some(&(last, _)) = self.groups.back() {
            if k < last {
                return Err(Error::InvalidInput(format!(
                    "observation {k} pushed after observation {last}"
                )));
            }
        }
        self.groups.push_back((k, cuts));
        while self.groups.len() > self.window {
            self.groups.pop_front();
        }
        Ok(())
    }

    fn evict_oldest(&mut self) {
        self.groups.pop_front();
    }

    fn observation_count(&self) -> usize {
        self.groups.len()
    }
}

/// The current point estimate `c_hat`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceEstimate {
    pub c_hat: UnitPreference,
    /// Optimal value of the max-margin LP (sum-normalized coordinates).
    pub margin: f64,
    /// Cuts tight at the max-margin optimum.
    pub support_count: usize,
}

/// Normal-cone cuts stating that the chosen vertex beats every other vertex.
pub fn cuts_from_observation(obs: &Observation) -> Result<Vec<Cut>> {
    if obs.label == Label::Bad {
        return Err(Error::InvalidInput(
            "cuts are only generated from good observations".into(),
        ));
    }
    let chosen = &obs.chosen.x;
    let n = obs.inst.n();
    let chosen_active = obs.inst.active_set(chosen, VERTEX_TOL);
    let mut cuts = Vec::new();
    for v in polytope_vertices(&obs.inst)? {
        let diff: Vec<f64> = chosen.iter().zip(&v.x).map(|(a, b)| a - b).collect();
        if norm(&diff) < VERTEX_TOL {
            continue;
        }
        // Adjacent vertices share at least n - 1 tight constraints.
        let shared = v
            .active_set
            .iter()
            .filter(|i| chosen_active.contains(i))
            .count();
        cuts.push(if shared + 1 >= n {
            Cut::new(&diff, obs.k)?
        } else {
            Cut::implied(&diff, obs.k)?
        });
    }
    Ok(cuts)
}

/// Max-margin direction inside the cone of the retained cuts.
///
/// Solves `max eps` subject to `g·c >= eps` for every cut, `c_i >= eps`,
/// `sum c = 1`, then rescales `c` to unit length. The orthant faces carry a
/// margin too, so the estimate stays strictly positive. With no cuts the
/// uniform direction is returned with margin 0.
pub fn estimate_from_cuts(state: &CutSet) -> Result<PreferenceEstimate> {
    let n = state.n;
    if state.is_empty() {
        return Ok(PreferenceEstimate {
            c_hat: UnitPreference::uniform(n),
            margin: 0.0,
            support_count: 0,
        });
    }

    // Variables: c_0 .. c_{n-1}, eps. All rows have the form `row · (c, eps) <= rhs`.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    for cut in state.cuts() {
        // A cut with a nonnegative normal is implied by the orthant rows:
        // g·c >= |g|_1 eps >= eps.
        if !cut.edge || cut.g.iter().all(|&v| v >= 0.0) {
            continue;
        }
        let mut row: Vec<f64> = cut.g.iter().map(|v| -v).collect();
        row.push(1.0);
        if rows.iter().any(|r| max_dist(r, &row) < DUPLICATE_TOL) {
            continue;
        }
        rows.push(row);
        rhs.push(0.0);
    }
    for i in 0..n {
        let mut row = vec![0.0; n + 1];
        row[i] = -1.0;
        row[n] = 1.0;
        rows.push(row);
        rhs.push(0.0);
    }
    let mut simplex_row = vec![1.0; n + 1];
    simplex_row[n] = 0.0;
    rows.push(simplex_row);
    rhs.push(1.0);

    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let z = maximize_lexicographic(&rows, &rhs, &objective)?
        .ok_or_else(|| Error::Inconsistent("max-margin LP reported unbounded".into()))?;
    let margin = z[n];
    if margin < MARGIN_EPS {
        return Err(Error::InfeasibleCone { margin });
    }
    let c = &z[..n];
    let support_count = state
        .cuts()
        .filter(|cut| (cut.slack(c) - margin).abs() <= SUPPORT_TOL)
        .count();
    Ok(PreferenceEstimate {
        c_hat: UnitPreference::normalized(c)?,
        margin,
        support_count,
    })
}

/// One step of the learning loop.
///
/// Bad observations leave the state untouched. A good observation adds its
/// cuts; if the cone then loses its interior, whole observations are evicted
/// oldest first until it is restored. The newest observation is never
/// evicted: if its cuts alone have no interior it is discarded instead and
/// the previous state is kept.
pub fn update_estimate(state: &CutSet, obs: &Observation) -> Result<(CutSet, PreferenceEstimate)> {
    if obs.label == Label::Bad {
        return Ok((state.clone(), estimate_from_cuts(state)?));
    }
    if obs.inst.n() != state.n {
        return Err(Error::InvalidInput(format!(
            "observation has {} variables, estimator expects {}",
            obs.inst.n(),
            state.n
        )));
    }
    let mut next = state.clone();
    next.push(obs.k, cuts_from_observation(obs)?)?;
    loop {
        match estimate_from_cuts(&next) {
            Ok(est) => return Ok((next, est)),
            Err(Error::InfeasibleCone { .. }) if next.observation_count() > 1 => {
                next.evict_oldest()
            }
            Err(Error::InfeasibleCone { .. }) => {
                return Ok((state.clone(), estimate_from_cuts(state)?));
            }
            Err(e) => return Err(e),
        }
    }
}
