//! Dense condensed-tableau simplex with Bland's pivot rule.
//!
//! Solves `max c·x, A x <= b, x >= 0` for `b >= 0`, starting from the all-slack
//! basis. Only nonbasic columns are stored, so a pivot costs `O(m * n)` no
//! matter how many rows the problem has. After the primary objective is
//! optimal the same tableau is reused to minimize `x_0`, then `x_1`, ... over
//! the optimal face, which yields the lexicographically smallest optimum.

use crate::error::{Error, Result};
use crate::lp::PIVOT_TOL;

const MAX_PIVOTS: usize = 100_000;

enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    /// `x_basic[i] = rhs[i] - sum_j t[i][j] * x_nonbasic[j]`
    t: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    /// Labels that may no longer enter the basis.
    frozen: Vec<bool>,
    n: usize,
}

impl Tableau {
    fn new(a: &[Vec<f64>], b: &[f64], n: usize) -> Self {
        let m = a.len();
        Self {
            t: a.to_vec(),
            rhs: b.to_vec(),
            basic: (n..n + m).collect(),
            nonbasic: (0..n).collect(),
            frozen: vec![false; n + m],
            n,
        }
    }

    /// Reduced costs of the nonbasic columns for objective `d` over structural labels.
    fn reduced_costs(&self, d: &[f64]) -> Vec<f64> {
        let weight = |label: usize| if label < self.n { d[label] } else { 0.0 };
        let mut r: Vec<f64> = self.nonbasic.iter().map(|&l| weight(l)).collect();
        for (row, &b) in self.t.iter().zip(&self.basic) {
            let w = weight(b);
            if w != 0.0 {
                for (rj, tij) in r.iter_mut().zip(row) {
                    *rj -= w * tij;
                }
            }
        }
        r
    }

    fn optimize(&mut self, d: &[f64], pivots: &mut usize) -> Result<Outcome> {
        loop {
            let r = self.reduced_costs(d);
            // Bland: smallest label among improving, non-frozen columns.
            let entering = r
                .iter()
                .enumerate()
                .filter(|&(j, &rj)| rj > PIVOT_TOL && !self.frozen[self.nonbasic[j]])
                .min_by_key(|&(j, _)| self.nonbasic[j])
                .map(|(j, _)| j);
            let Some(q) = entering else {
                return Ok(Outcome::Optimal);
            };

            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let tiq = row[q];
                if tiq <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / tiq;
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((p, best)) => {
                        if ratio < best - PIVOT_TOL
                            || (ratio <= best + PIVOT_TOL && self.basic[i] < self.basic[p])
                        {
                            Some((i, ratio))
                        } else {
                            Some((p, best))
                        }
                    }
                };
            }
            let Some((p, _)) = leaving else {
                return Ok(Outcome::Unbounded);
            };

            self.pivot(p, q);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::Inconsistent(format!(
                    "simplex exceeded {MAX_PIVOTS} pivots"
                )));
            }
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let piv = self.t[p][q];
        let prow: Vec<f64> = self.t[p].iter().map(|v| v / piv).collect();
        let prhs = self.rhs[p] / piv;
        for i in 0..self.t.len() {
            if i == p {
                continue;
            }
            let f = self.t[i][q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i];
            for (j, v) in row.iter_mut().enumerate() {
                *v -= f * prow[j];
            }
            row[q] = -f / piv;
            self.rhs[i] -= f * prhs;
            if self.rhs[i].abs() < PIVOT_TOL * 1e-3 {
                self.rhs[i] = 0.0;
            }
        }
        self.t[p] = prow;
        self.t[p][q] = 1.0 / piv;
        self.rhs[p] = prhs;
        std::mem::swap(&mut self.basic[p], &mut self.nonbasic[q]);
    }

    /// Freezes nonbasic columns whose entry would worsen objective `d`;
    /// the remaining columns span the optimal face.
    fn freeze_nonimproving(&mut self, d: &[f64]) {
        let r = self.reduced_costs(d);
        for (j, &rj) in r.iter().enumerate() {
            if rj < -PIVOT_TOL {
                self.frozen[self.nonbasic[j]] = true;
            }
        }
    }

    fn structural_values(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (i, &b) in self.basic.iter().enumerate() {
            if b < self.n {
                x[b] = self.rhs[i].max(0.0);
            }
        }
        x
    }
}

/// Lexicographically smallest maximizer of `c·x` over `{A x <= b, x >= 0}`,
/// or `None` if the objective is unbounded. Requires `b >= 0`.
pub(crate) fn maximize_lexicographic(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
) -> Result<Option<Vec<f64>>> {
    let n = c.len();
    if b.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidInput(
            "simplex start requires a nonnegative right-hand side".into(),
        ));
    }
    let mut tab = Tableau::new(a, b, n);
    let mut pivots = 0;
    if let Outcome::Unbounded = tab.optimize(c, &mut pivots)? {
        return Ok(None);
    }
    tab.freeze_nonimproving(c);
    let mut d = vec![0.0; n];
    for k in 0..n {
        d.fill(0.0);
        d[k] = -1.0;
        // Minimizing a nonnegative coordinate over a bounded face cannot be unbounded.
        if let Outcome::Unbounded = tab.optimize(&d, &mut pivots)? {
            return Err(Error::Inconsistent(
                "lexicographic refinement reported unbounded".into(),
            ));
        }
        tab.freeze_nonimproving(&d);
    }
    Ok(Some(tab.structural_values()))
}
