//! Two-phase dense tableau simplex with Bland's anti-cycling rule.
//!
//! Variables are shifted to `y = x - lower`, upper bounds become ordinary
//! rows, and every row gets a slack. Rows whose right-hand side is negative
//! after the shift are negated and given an artificial variable, which phase 1
//! drives to zero.

use super::{dot, LinearProgram, SolveReport, Status, FEASIBILITY_TOLERANCE};

const PIVOT_TOLERANCE: f64 = 1e-12;
const REDUCED_COST_TOLERANCE: f64 = 1e-12;
const MAX_PIVOTS: usize = 50_000;

struct Tableau {
    /// `rows x (cols + 1)`; the last entry of each row is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    /// Columns that may not enter the basis.
    blocked: Vec<bool>,
    pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.cols]
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, row) in self.t.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, &tij) in d.iter_mut().zip(row.iter()) {
                    *dj -= cb * tij;
                }
            }
        }
        d
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        (0..self.t.len())
            .map(|i| cost[self.basis[i]] * self.rhs(i))
            .sum()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, &pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Minimizes `cost` over the current tableau with Bland's rule.
    fn run(&mut self, cost: &[f64]) -> Outcome {
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Outcome::IterationLimit;
            }
            let d = self.reduced_costs(cost);
            let entering = (0..self.cols).find(|&j| !self.blocked[j] && d[j] < -REDUCED_COST_TOLERANCE);
            let Some(col) = entering else {
                return Outcome::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][col];
                if a > PIVOT_TOLERANCE {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-15
                                || (ratio <= best + 1e-15 && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Outcome::Unbounded,
                Some((row, _)) => self.pivot(row, col),
            }
        }
    }
}

/// Solves `min c.x s.t. A x <= b, lower <= x <= upper`.
///
/// Infeasibility and unboundedness are reported through
/// [`SolveReport::status`]; the function itself never fails.
pub fn solve_lp(lp: &LinearProgram) -> SolveReport {
    let poly = &lp.polytope;
    let n = poly.dim();

    // Rows over the shifted variables: A y <= b - A lower, then y_j <= width_j.
    let mut rows: Vec<(Vec<f64>, f64)> = poly
        .a
        .iter()
        .zip(&poly.b)
        .map(|(a, &b)| (a.clone(), b - dot(a, &poly.lower)))
        .collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e, poly.upper[j] - poly.lower[j]));
    }
    let m = rows.len();
    let negated: Vec<bool> = rows.iter().map(|(_, r)| *r < 0.0).collect();
    let n_art = negated.iter().filter(|&&v| v).count();
    let cols = n + m + n_art;

    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let mut next_art = n + m;
    for (i, (a, r)) in rows.iter().enumerate() {
        let s = if negated[i] { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = s * a[j];
        }
        t[i][n + i] = s;
        t[i][cols] = s * r;
        if negated[i] {
            t[i][next_art] = 1.0;
            basis[i] = next_art;
            next_art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut tab = Tableau {
        t,
        basis,
        cols,
        blocked: vec![false; cols],
        pivots: 0,
    };

    if n_art > 0 {
        let mut phase1 = vec![0.0; cols];
        for c in phase1.iter_mut().skip(n + m) {
            *c = 1.0;
        }
        match tab.run(&phase1) {
            Outcome::Optimal => {}
            Outcome::IterationLimit => {
                return SolveReport::failed(Status::IterationLimit, n, tab.pivots)
            }
            // Phase 1 is bounded below by zero.
            Outcome::Unbounded => unreachable!("phase 1 objective is bounded"),
        }
        if tab.objective(&phase1) > FEASIBILITY_TOLERANCE {
            return SolveReport::failed(Status::Infeasible, n, tab.pivots);
        }
        // Drive zero-level artificials out of the basis where possible; a row
        // with no usable pivot is redundant and stays inert.
        for i in 0..m {
            if tab.basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| tab.t[i][j].abs() > 1e-9) {
                    tab.pivot(i, j);
                }
            }
        }
        for j in n + m..cols {
            tab.blocked[j] = true;
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.c);
    let outcome = tab.run(&cost);
    match outcome {
        Outcome::Optimal => {}
        Outcome::Unbounded => return SolveReport::failed(Status::Unbounded, n, tab.pivots),
        Outcome::IterationLimit => {
            return SolveReport::failed(Status::IterationLimit, n, tab.pivots)
        }
    }

    let mut y = vec![0.0; n];
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            y[bv] = tab.rhs(i).max(0.0);
        }
    }
    // Snap to bounds: y = width exactly when within round-off.
    let x: Vec<f64> = (0..n)
        .map(|j| {
            let width = poly.upper[j] - poly.lower[j];
            let yj = if (y[j] - width).abs() <= 1e-13 { width } else { y[j].min(width) };
            poly.lower[j] + yj
        })
        .collect();
    let objective = dot(&lp.c, &x);

    // Row duals from the slack reduced costs: pi_i = -d_{slack_i}.
    let d = tab.reduced_costs(&cost);
    let dual_objective: f64 = rows
        .iter()
        .enumerate()
        .map(|(i, (_, r))| -d[n + i] * r)
        .sum::<f64>()
        + dot(&lp.c, &poly.lower);

    SolveReport {
        status: Status::Optimal,
        objective,
        gap: (objective - dual_objective).abs(),
        x,
        iterations: tab.pivots,
    }
}
