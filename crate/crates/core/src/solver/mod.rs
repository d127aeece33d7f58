//! Small dense optimization kernels.
//!
//! Every program in this crate has at most a handful of variables and rows,
//! so both solvers work on dense row-major storage and favour exactness and
//! determinism over speed.

mod frank_wolfe;
mod simplex;

pub use frank_wolfe::{minimize_convex, ConvexObjective, FrankWolfeOptions, StepRule};
pub use simplex::solve_lp;

use serde::Serialize;

use crate::error::{Error, Result};

/// Residual tolerance at which a point counts as feasible.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// `{x : A x <= b, lower <= x <= upper}` with finite bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polytope {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Polytope {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = lower.len();
        if upper.len() != n {
            return Err(Error::Config(format!(
                "bound lengths differ: {} lower vs {} upper",
                n,
                upper.len()
            )));
        }
        if a.len() != b.len() {
            return Err(Error::Config(format!(
                "{} constraint rows but {} right-hand sides",
                a.len(),
                b.len()
            )));
        }
        if let Some(i) = a.iter().position(|row| row.len() != n) {
            return Err(Error::Config(format!("row {i} has wrong length")));
        }
        let finite = a.iter().flatten().chain(&b).chain(&lower).chain(&upper);
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite coefficient or bound".into()));
        }
        if let Some(j) = (0..n).find(|&j| lower[j] > upper[j]) {
            return Err(Error::Config(format!(
                "variable {j}: lower bound {} exceeds upper bound {}",
                lower[j], upper[j]
            )));
        }
        Ok(Polytope { a, b, lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Largest violation of any row or bound at `x` (0 when feasible).
    pub fn residual(&self, x: &[f64]) -> f64 {
        let rows = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(row, &b)| dot(row, x) - b);
        let bounds = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .flat_map(|(&v, (&lo, &hi))| [lo - v, v - hi]);
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearProgram {
    /// Minimized objective `c . x`.
    pub c: Vec<f64>,
    pub polytope: Polytope,
}

impl LinearProgram {
    pub fn new(c: Vec<f64>, polytope: Polytope) -> Result<Self> {
        if c.len() != polytope.dim() {
            return Err(Error::Config(format!(
                "objective has {} entries for {} variables",
                c.len(),
                polytope.dim()
            )));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite objective coefficient".into()));
        }
        Ok(LinearProgram { c, polytope })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub status: Status,
    pub objective: f64,
    pub x: Vec<f64>,
    /// Duality gap (LP) or Frank-Wolfe gap (convex) at `x`.
    pub gap: f64,
    pub iterations: usize,
}

impl SolveReport {
    pub(crate) fn failed(status: Status, n: usize, iterations: usize) -> Self {
        SolveReport {
            status,
            objective: f64::NAN,
            x: vec![f64::NAN; n],
            gap: f64::INFINITY,
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
