//! Forward allocation LP: maximize `c·x` subject to `A x <= a0`, `x >= 0`.
//!
//! Per-variable upper bounds are folded into the constraint matrix by
//! [`canonicalize`], so every instance has the single form above with the
//! origin feasible and every column constrained.

mod simplex;
mod vertices;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use simplex::maximize_lexicographic;
pub use vertices::{enumerate_vertices, polytope_vertices, MAX_HYPERPLANES, MAX_VARIABLES};

/// Pivot and feasibility tolerance used by the simplex.
pub const PIVOT_TOL: f64 = 1e-9;
/// Tolerance for comparing and deduplicating vertices.
pub const VERTEX_TOL: f64 = 1e-7;
/// Tolerance on the Euclidean norm of a [`UnitPreference`].
pub const UNIT_TOL: f64 = 1e-9;

/// The allocation problem after bounds have been folded into the rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpInstance {
    a: Vec<Vec<f64>>,
    a0: Vec<f64>,
    n: usize,
}

impl LpInstance {
    /// Builds an instance, checking finiteness, origin feasibility and boundedness.
    pub fn new(a: Vec<Vec<f64>>, a0: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput(
                "instance needs at least one variable".into(),
            ));
        }
        if a.len() != a0.len() {
            return Err(Error::InvalidInput(format!(
                "matrix has {} rows but availability vector has {} entries",
                a.len(),
                a0.len()
            )));
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "row {i} has a non-finite entry"
                )));
            }
        }
        for (i, &v) in a0.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "availability a0[{i}] = {v} must be finite and >= 0"
                )));
            }
        }
        for j in 0..n {
            if !a.iter().any(|row| row[j] > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "column {j} has no strictly positive entry; polytope would be unbounded"
                )));
            }
        }
        Ok(Self { a, a0, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of resource rows (bounds included).
    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn a0(&self) -> &[f64] {
        &self.a0
    }

    /// Returns the same instance with its rows reordered by `order`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.m()];
        for &i in order {
            if i >= self.m() || seen[i] {
                return Err(Error::InvalidInput("row order is not a permutation".into()));
            }
            seen[i] = true;
        }
        if order.len() != self.m() {
            return Err(Error::InvalidInput("row order is not a permutation".into()));
        }
        Ok(Self {
            a: order.iter().map(|&i| self.a[i].clone()).collect(),
            a0: order.iter().map(|&i| self.a0[i]).collect(),
            n: self.n,
        })
    }

    /// Checks `x >= -tol` and `A x <= a0 + tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.n
            && x.iter().all(|&v| v >= -tol)
            && self
                .a
                .iter()
                .zip(&self.a0)
                .all(|(row, &rhs)| dot(row, x) <= rhs + tol)
    }

    /// Indices of constraints tight at `x`. Resource rows are numbered
    /// `0..m`, the nonnegativity bound of variable `j` is `m + j`.
    pub fn active_set(&self, x: &[f64], tol: f64) -> Vec<usize> {
        let rows = self
            .a
            .iter()
            .zip(&self.a0)
            .enumerate()
            .filter(|(_, (row, &rhs))| (dot(row, x) - rhs).abs() <= tol)
            .map(|(i, _)| i);
        let bounds = x
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() <= tol)
            .map(|(j, _)| self.m() + j);
        rows.chain(bounds).collect()
    }

    /// Wraps a point with the constraints tight at it. Does not check feasibility.
    pub fn vertex_at(&self, x: Vec<f64>) -> Vertex {
        let active_set = self.active_set(&x, VERTEX_TOL);
        Vertex { x, active_set }
    }
}

/// A nonnegative objective-coefficient vector of unit Euclidean length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitPreference(Vec<f64>);

impl UnitPreference {
    /// Accepts a vector that is already nonnegative with unit norm.
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidInput("preference vector is empty".into()));
        }
        if c.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "preference {c:?} must be finite and nonnegative"
            )));
        }
        let norm = norm(&c);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidInput(format!(
                "preference {c:?} has norm {norm}, expected 1"
            )));
        }
        Ok(Self(c))
    }

    /// Rescales a raw nonnegative vector to unit length.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "preference {raw:?} has a negative or non-finite component"
            )));
        }
        let norm = norm(raw);
        if norm == 0.0 {
            return Err(Error::InvalidInput("preference vector is all zeros".into()));
        }
        Ok(Self(raw.iter().map(|v| v / norm).collect()))
    }

    /// The uninformed direction `(1/sqrt(n), ..., 1/sqrt(n))`.
    pub fn uniform(n: usize) -> Self {
        let v = 1.0 / (n as f64).sqrt();
        Self(vec![v; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for UnitPreference {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<UnitPreference> for Vec<f64> {
    fn from(value: UnitPreference) -> Self {
        value.0
    }
}

/// A vertex of an instance's feasible polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub x: Vec<f64>,
    /// Constraints tight at `x`, numbered as in [`LpInstance::active_set`].
    pub active_set: Vec<usize>,
}

impl Vertex {
    /// Max-norm distance below [`VERTEX_TOL`].
    pub fn same_point(&self, other: &[f64]) -> bool {
        max_dist(&self.x, other) < VERTEX_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub vertex: Vertex,
    pub value: f64,
    pub status: LpStatus,
}

/// Folds per-variable upper bounds `x <= b` into the resource rows.
pub fn canonicalize(a_raw: &[Vec<f64>], a0_raw: &[f64], b: &[f64]) -> Result<LpInstance> {
    let n = b.len();
    if let Some((j, v)) = b
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < 0.0)
    {
        return Err(Error::InvalidInput(format!(
            "upper bound b[{j}] = {v} must be finite and >= 0"
        )));
    }
    if a_raw.len() != a0_raw.len() {
        return Err(Error::InvalidInput(format!(
            "{} demand rows but {} availabilities",
            a_raw.len(),
            a0_raw.len()
        )));
    }
    let mut a = a_raw.to_vec();
    let mut a0 = a0_raw.to_vec();
    for (j, &bound) in b.iter().enumerate() {
        let mut row = vec![0.0; n];
        row[j] = 1.0;
        a.push(row);
        a0.push(bound);
    }
    LpInstance::new(a, a0, n)
}

/// Maximizes `pref · x` over the instance. Ties between optimal vertices
/// resolve to the lexicographically smallest `x`.
pub fn solve_lp(inst: &LpInstance, pref: &UnitPreference) -> Result<LpSolution> {
    maximize(inst, pref.as_slice())
}

/// [`solve_lp`] for an arbitrary objective vector (no sign or norm requirement).
pub fn maximize(inst: &LpInstance, c: &[f64]) -> Result<LpSolution> {
    if c.len() != inst.n() {
        return Err(Error::InvalidInput(format!(
            "objective has {} entries, instance has {} variables",
            c.len(),
            inst.n()
        )));
    }
    let x = maximize_lexicographic(inst.a(), inst.a0(), c)?.ok_or_else(|| {
        Error::Inconsistent("simplex reported an unbounded allocation problem".into())
    })?;
    if !inst.is_feasible(&x, VERTEX_TOL) {
        return Err(Error::Inconsistent(format!(
            "simplex returned an infeasible point {x:?}"
        )));
    }
    let value = dot(c, &x);
    Ok(LpSolution {
        vertex: inst.vertex_at(x),
        value,
        status: LpStatus::Optimal,
    })
}

/// `L(x) = sum_j c_j x_j`.
pub fn objective_value(pref: &UnitPreference, x: &[f64]) -> Result<f64> {
    if pref.dim() != x.len() {
        return Err(Error::InvalidInput(format!(
            "preference has {} entries, point has {}",
            pref.dim(),
            x.len()
        )));
    }
    Ok(dot(pref.as_slice(), x))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub(crate) fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
