//! Lower boundary `D(C)` of the distortion-classification region reachable
//! by re-decoding a fixed representation `Z`.
//!
//! With `p_i = P(X̂ = 0 | Z = i)` the distortion is affine in `p`, and the
//! task-entropy budget becomes one linear row after Mrs. Gerber's lemma, so
//! the boundary is a single-row LP over a box — a continuous knapsack. Both
//! a greedy knapsack and the generic simplex solve it; they must agree.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::binary_info::{
    binary_entropy, check_task_budget, inverse_binary_entropy, Bits, Probability,
};
use crate::error::{Error, Result};
use crate::solver::{solve_lp, LinearProgram, Polytope, Status};
use crate::sweep::{CurveSweep, SweepKind};

/// Tolerance on `sum q_i = 1`. Channels off by more are rejected, never
/// renormalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;
/// Maximum permitted disagreement between the knapsack and simplex optima.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-9;
const ROW_SLACK: f64 = 1e-12;

/// `p_Z(i) = q_i` with `P(X = 1 | Z = i) = eps_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel")]
pub struct RepresentationChannel {
    q: Vec<f64>,
    eps: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    q: Vec<f64>,
    eps: Vec<f64>,
}

impl TryFrom<RawChannel> for RepresentationChannel {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        RepresentationChannel::new(raw.q, raw.eps)
    }
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidChannel {
        field: field.into(),
        reason: reason.into(),
    }
}

impl RepresentationChannel {
    pub fn new(q: Vec<f64>, eps: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(invalid("q", "must contain at least one symbol"));
        }
        if eps.len() != q.len() {
            return Err(invalid(
                "eps",
                format!("has {} entries but `q` has {}", eps.len(), q.len()),
            ));
        }
        for (name, values) in [("q", &q), ("eps", &eps)] {
            if let Some((i, v)) = values
                .iter()
                .enumerate()
                .find(|(_, v)| !(0.0..=1.0).contains(*v))
            {
                return Err(invalid(format!("{name}[{i}]"), format!("{v} is not a probability")));
            }
        }
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(invalid("q", format!("sums to {total}, not 1")));
        }
        Ok(RepresentationChannel { q, eps })
    }

    /// Parses `{"q": [...], "eps": [...]}`, naming the offending key or
    /// position on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let field = ["missing field `", "unknown field `"]
                .iter()
                .find_map(|prefix| {
                    let rest = msg.split_once(prefix)?.1;
                    Some(rest.split('`').next()?.to_string())
                })
                .or_else(|| {
                    // Validation errors from `new` are re-rendered through serde.
                    let rest = msg.split_once("field `")?.1;
                    Some(rest.split('`').next()?.to_string())
                })
                .unwrap_or_else(|| "<document>".into());
            invalid(field, msg)
        })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    /// Induced source marginal `P(X = 1) = sum q_i eps_i`.
    pub fn q_x(&self) -> f64 {
        self.q.iter().zip(&self.eps).map(|(q, e)| q * e).sum()
    }

    /// Distortion of the MAP re-decoder, `sum q_i min(eps_i, 1 - eps_i)`.
    pub fn map_distortion(&self) -> f64 {
        self.q
            .iter()
            .zip(&self.eps)
            .map(|(q, e)| q * e.min(1.0 - e))
            .sum()
    }

    /// Admissible interval for `p_i`: `[1 - eps_i, 1]` when `1 - eps_i >= 1/2`,
    /// else `[0, 1 - eps_i]`. The natural upper end of the second branch is
    /// open; it is closed here so the LP attains its infimum. `eps_i = 1/2`
    /// falls in the first branch, where its objective weight is zero anyway.
    pub fn profile_bounds(&self) -> Vec<(f64, f64)> {
        self.eps
            .iter()
            .map(|e| {
                let keep = 1.0 - e;
                if keep >= 0.5 {
                    (keep, 1.0)
                } else {
                    (0.0, keep)
                }
            })
            .collect()
    }
}

/// `p_i = P(X̂ = 0 | Z = i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderProfile {
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DcBoundaryPoint {
    /// Knapsack optimum.
    pub distortion: Probability,
    pub profile: DecoderProfile,
    /// Independent simplex optimum of the same LP.
    pub simplex_distortion: f64,
    /// `rhs - lhs` of the classification row at `profile` (>= 0).
    pub slack: f64,
}

/// The LP `min K + w.p  s.t.  a.p <= beta, lo <= p <= hi`.
struct DecoderLp {
    constant: f64,
    w: Vec<f64>,
    a: Vec<f64>,
    beta: f64,
    bounds: Vec<(f64, f64)>,
}

impl DecoderLp {
    fn new(channel: &RepresentationChannel, q_s1: Probability, c: f64) -> Result<Self> {
        let qs1 = q_s1.get();
        if qs1 >= 0.5 {
            return Err(Error::DegenerateModel(
                "q_s1 = 1/2 leaves the task independent of the source".into(),
            ));
        }
        check_task_budget(q_s1, c)?;
        let q_x = channel.q_x();
        if q_x <= 0.0 {
            return Err(Error::DegenerateModel(
                "channel induces P(X = 1) = 0; the classification row is undefined".into(),
            ));
        }
        let crossover = inverse_binary_entropy(c.min(1.0))?.get();
        let pairs = channel.q.iter().zip(&channel.eps);
        Ok(DecoderLp {
            constant: pairs.clone().map(|(q, e)| q * (1.0 - e)).sum(),
            w: pairs.clone().map(|(q, e)| q * (2.0 * e - 1.0)).collect(),
            a: pairs.map(|(q, e)| (1.0 - 2.0 * qs1) * q * e).collect(),
            beta: (crossover - qs1) * q_x,
            bounds: channel.profile_bounds(),
        })
    }

    fn objective(&self, p: &[f64]) -> f64 {
        self.constant + self.w.iter().zip(p).map(|(w, p)| w * p).sum::<f64>()
    }

    fn lhs(&self, p: &[f64]) -> f64 {
        self.a.iter().zip(p).map(|(a, p)| a * p).sum()
    }

    /// Greedy continuous knapsack. Starting from the row-minimizing corner
    /// `p = lo`, only coordinates with negative weight are worth raising;
    /// they are raised in order of objective gain per unit of row budget.
    fn knapsack(&self) -> Result<Vec<f64>> {
        let mut p: Vec<f64> = self.bounds.iter().map(|b| b.0).collect();
        let used = self.lhs(&p);
        if used > self.beta + ROW_SLACK {
            return Err(Error::InfeasibleLp {
                violation: used - self.beta,
                profile: p,
            });
        }
        let mut budget = (self.beta - used).max(0.0);
        let mut order: Vec<usize> = (0..p.len()).filter(|&i| self.w[i] < 0.0).collect();
        // Free items (a_i = 0) first, then by w_i / a_i ascending; sort is stable.
        let ratio = |i: usize| {
            if self.a[i] == 0.0 {
                f64::NEG_INFINITY
            } else {
                self.w[i] / self.a[i]
            }
        };
        order.sort_by(|&i, &j| ratio(i).total_cmp(&ratio(j)));
        for i in order {
            let (lo, hi) = self.bounds[i];
            if self.a[i] == 0.0 {
                p[i] = hi;
                continue;
            }
            let room = (hi - lo) * self.a[i];
            if room <= budget {
                p[i] = hi;
                budget -= room;
            } else {
                p[i] = lo + budget / self.a[i];
                break;
            }
        }
        Ok(p)
    }

    fn simplex(&self) -> Result<(f64, Vec<f64>)> {
        let lp = LinearProgram::new(
            self.w.clone(),
            Polytope::new(
                vec![self.a.clone()],
                vec![self.beta],
                self.bounds.iter().map(|b| b.0).collect(),
                self.bounds.iter().map(|b| b.1).collect(),
            )?,
        )?;
        let report = solve_lp(&lp);
        match report.status {
            Status::Optimal => Ok((self.constant + report.objective, report.x)),
            status => Err(Error::SolverDisagreement(format!(
                "knapsack found a feasible profile but the simplex reported {status:?}"
            ))),
        }
    }
}

/// Minimum `P(X != X̂)` over decoders `p` meeting the classification budget
/// `c`, with the optimizing profile.
pub fn dc_lower_boundary(
    channel: &RepresentationChannel,
    q_s1: Probability,
    c: f64,
) -> Result<DcBoundaryPoint> {
    let lp = DecoderLp::new(channel, q_s1, c)?;
    let p = lp.knapsack()?;
    let distortion = lp.objective(&p);
    let (simplex_distortion, _) = lp.simplex()?;
    if (distortion - simplex_distortion).abs() > CROSS_CHECK_TOLERANCE {
        return Err(Error::SolverDisagreement(format!(
            "knapsack D = {distortion}, simplex D = {simplex_distortion}"
        )));
    }
    Ok(DcBoundaryPoint {
        distortion: Probability::clamped(distortion),
        slack: lp.beta - lp.lhs(&p),
        profile: DecoderProfile { p },
        simplex_distortion,
    })
}

/// Smallest `c` for which the decoder LP is feasible: the row is tightest at
/// `p = lo`, which needs `H^-1(c) >= q_s1 + (1 - 2 q_s1) sum q_i eps_i lo_i / q_x`.
pub fn dc_feasibility_threshold(channel: &RepresentationChannel, q_s1: Probability) -> Result<Bits> {
    let qs1 = q_s1.get();
    let q_x = channel.q_x();
    if qs1 >= 0.5 || q_x <= 0.0 {
        return Err(Error::DegenerateModel(
            "feasibility threshold needs q_s1 < 1/2 and P(X = 1) > 0".into(),
        ));
    }
    let corner: f64 = channel
        .q
        .iter()
        .zip(&channel.eps)
        .zip(channel.profile_bounds())
        .map(|((q, e), (lo, _))| q * e * lo)
        .sum();
    let crossover = qs1 + (1.0 - 2.0 * qs1) * corner / q_x;
    if crossover > 0.5 + ROW_SLACK {
        return Err(Error::Infeasible(format!(
            "decoder LP needs crossover {crossover:.6} > 1/2; infeasible for every budget"
        )));
    }
    Ok(binary_entropy(Probability::clamped(crossover.min(0.5))))
}

/// `D(C)` over an ascending grid, computed sample-parallel. Budgets below
/// the feasibility threshold are omitted and counted.
pub fn dc_boundary_curve(
    channel: &RepresentationChannel,
    q_s1: Probability,
    c_grid: &[f64],
) -> Result<CurveSweep> {
    if let Some(i) = (1..c_grid.len()).find(|&i| c_grid[i] <= c_grid[i - 1]) {
        return Err(Error::Config(format!(
            "C grid must be strictly ascending (index {i})"
        )));
    }
    let values: Vec<Result<f64>> = c_grid
        .par_iter()
        .map(|&c| dc_lower_boundary(channel, q_s1, c).map(|pt| pt.distortion.get()))
        .collect();
    let mut params = BTreeMap::new();
    params.insert("q_s1".into(), Value::from(q_s1.get()));
    params.insert("q".into(), Value::from(channel.q.clone()));
    params.insert("eps".into(), Value::from(channel.eps.clone()));
    CurveSweep::collect(SweepKind::Dc, params, c_grid.iter().copied().zip(values))
}
