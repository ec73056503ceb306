//! Vertex enumeration.
//!
//! [`enumerate_vertices`] is the brute-force reference: intersect every
//! `n`-subset of the `m + n` bounding hyperplanes and keep the feasible,
//! distinct points. [`polytope_vertices`] returns the same set by walking the
//! edges of the polytope from the origin, which is far cheaper for the
//! nondegenerate instances the simulator draws; it falls back to brute force
//! as soon as it meets a degenerate vertex.

use std::collections::VecDeque;

use itertools::Itertools;

use super::{dot, max_dist, LpInstance, Vertex, VERTEX_TOL};
use crate::error::{Error, Result};

pub const MAX_VARIABLES: usize = 12;
pub const MAX_HYPERPLANES: usize = 28;

const SINGULAR_TOL: f64 = 1e-12;

/// Every vertex of the feasible polytope, once each, sorted lexicographically.
pub fn enumerate_vertices(inst: &LpInstance) -> Result<Vec<Vertex>> {
    check_limits(inst)?;
    let n = inst.n();
    let m = inst.m();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut mat = vec![vec![0.0; n + 1]; n];
    for subset in (0..m + n).combinations(n) {
        let Some(x) = intersect(inst, &subset, &mut mat) else {
            continue;
        };
        if !inst.is_feasible(&x, VERTEX_TOL) {
            continue;
        }
        if points.iter().any(|p| max_dist(p, &x) < VERTEX_TOL) {
            continue;
        }
        points.push(x);
    }
    Ok(finish(inst, points))
}

/// Same result as [`enumerate_vertices`], found by a breadth-first walk over
/// the polytope's edges starting at the origin.
pub fn polytope_vertices(inst: &LpInstance) -> Result<Vec<Vertex>> {
    check_limits(inst)?;
    match edge_walk(inst) {
        Some(points) => Ok(finish(inst, points)),
        None => enumerate_vertices(inst),
    }
}

fn check_limits(inst: &LpInstance) -> Result<()> {
    let (n, m) = (inst.n(), inst.m());
    if n > MAX_VARIABLES || m + n > MAX_HYPERPLANES {
        return Err(Error::DimensionLimit {
            n,
            hyperplanes: m + n,
        });
    }
    Ok(())
}

/// Hyperplane `h` as `(normal, rhs)`: rows `0..m` are `a_i·x = a0_i`, rows
/// `m + j` are `x_j = 0`.
fn plane(inst: &LpInstance, h: usize, out: &mut [f64]) -> f64 {
    let m = inst.m();
    if h < m {
        out.copy_from_slice(&inst.a()[h]);
        inst.a0()[h]
    } else {
        out.fill(0.0);
        out[h - m] = 1.0;
        0.0
    }
}

/// Slack of constraint `h` at `x` (nonnegative when satisfied).
fn slack(inst: &LpInstance, h: usize, x: &[f64]) -> f64 {
    let m = inst.m();
    if h < m {
        inst.a0()[h] - dot(&inst.a()[h], x)
    } else {
        x[h - m]
    }
}

/// Rate at which the slack of constraint `h` shrinks along direction `d`.
fn closing_rate(inst: &LpInstance, h: usize, d: &[f64]) -> f64 {
    let m = inst.m();
    if h < m {
        dot(&inst.a()[h], d)
    } else {
        -d[h - m]
    }
}

fn intersect(inst: &LpInstance, subset: &[usize], mat: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let n = inst.n();
    for (row, &h) in mat.iter_mut().zip(subset) {
        let rhs = plane(inst, h, &mut row[..n]);
        row[n] = rhs;
    }
    solve_square(mat)
}

/// Breadth-first search over simple vertices. `None` when a degenerate
/// vertex (more than `n` tight constraints) or a numerical failure is met.
fn edge_walk(inst: &LpInstance) -> Option<Vec<Vec<f64>>> {
    let n = inst.n();
    let m = inst.m();
    let tight = |x: &[f64]| -> Vec<usize> {
        (0..m + n)
            .filter(|&h| slack(inst, h, x).abs() <= VERTEX_TOL)
            .collect()
    };

    let origin = vec![0.0; n];
    let start = tight(&origin);
    if start.len() != n {
        return None;
    }
    let mut points = vec![origin.clone()];
    let mut queue = VecDeque::from([(origin, start)]);
    let mut mat = vec![vec![0.0; n + 1]; n];
    let mut basis = vec![vec![0.0; n]; n];

    while let Some((x, active)) = queue.pop_front() {
        for (row, &h) in basis.iter_mut().zip(&active) {
            plane(inst, h, row);
            // Store outward normals: bounds are -x_j <= 0.
            if h >= m {
                row[h - m] = -1.0;
            }
        }
        for leave in 0..n {
            // Direction keeping the other active constraints tight and
            // moving off constraint `leave`: outward_normal · d = -1.
            for (i, row) in mat.iter_mut().enumerate() {
                row[..n].copy_from_slice(&basis[i]);
                row[n] = if i == leave { -1.0 } else { 0.0 };
            }
            let d = solve_square(&mut mat)?;

            let mut best: Option<(usize, f64)> = None;
            let mut tie = false;
            for h in (0..m + n).filter(|h| !active.contains(h)) {
                let rate = closing_rate(inst, h, &d);
                if rate <= 1e-12 {
                    continue;
                }
                let step = slack(inst, h, &x).max(0.0) / rate;
                match best {
                    None => best = Some((h, step)),
                    Some((_, s)) if step < s - VERTEX_TOL => {
                        best = Some((h, step));
                        tie = false;
                    }
                    Some((_, s)) if step <= s + VERTEX_TOL => tie = true,
                    _ => {}
                }
            }
            // Bounded polytope: every edge ends at another vertex.
            let (enter, _) = best?;
            if tie {
                return None;
            }
            let mut next_active: Vec<usize> = active.clone();
            next_active[leave] = enter;
            let y = intersect(inst, &next_active, &mut mat)?;
            if points.iter().any(|p| max_dist(p, &y) < VERTEX_TOL) {
                continue;
            }
            if !inst.is_feasible(&y, VERTEX_TOL) {
                return None;
            }
            let y_active = tight(&y);
            if y_active.len() != n {
                return None;
            }
            points.push(y.clone());
            queue.push_back((y, y_active));
        }
    }
    Some(points)
}

fn finish(inst: &LpInstance, mut points: Vec<Vec<f64>>) -> Vec<Vertex> {
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points.into_iter().map(|x| inst.vertex_at(x)).collect()
}

/// Gaussian elimination with partial pivoting on an `n x (n+1)` augmented
/// matrix. Returns `None` for (numerically) singular systems.
fn solve_square(mat: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let n = mat.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| mat[i][col].abs().total_cmp(&mat[j][col].abs()))?;
        if mat[p][col].abs() < SINGULAR_TOL {
            return None;
        }
        mat.swap(col, p);
        let (top, rest) = mat.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest {
            let f = row[col] / pivot_row[col];
            if f != 0.0 {
                for (r, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *r -= f * p;
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| mat[i][k] * x[k]).sum();
        x[i] = (mat[i][n] - s) / mat[i][i];
    }
    // Exact zeros keep coordinates on the nonnegativity planes clean.
    for v in &mut x {
        if v.abs() < 1e-14 {
            *v = 0.0;
        }
    }
    Some(x)
}
