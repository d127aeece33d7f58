//! Rate cost of one representation serving every operating point at rate `r`.
//!
//! The achievable set at rate `r` is bounded by two corner points, `(C0, ·)`
//! and `(b, C_min)`. A universal decoder pair `(X̂₁, X̂₂)` must hit both, and
//! the rate it needs is bracketed by minimizing the log-sum surrogate
//! `I_LB <= I(X; X̂₁, X̂₂)` over two nested polytopes.
//!
//! Throughout, `q = q_x = P(X = 1)` and the decision variable is the free
//! part of `p_{X̂₁X̂₂|X}(ij|k)`,
//! `x = [p00|0, p01|0, p11|0, p00|1, p01|1, p11|1]`, with `p10|k` implied by
//! slice normalization.

use serde::{Deserialize, Serialize};

use crate::binary_info::{
    binary_entropy, entropy_bits, inverse_binary_entropy, Bits, Probability, SourceModel,
};
use crate::error::{Error, Result};
use crate::oneshot::asymptotic_b;
use crate::solver::{
    minimize_convex, ConvexObjective, FrankWolfeOptions, Polytope, SolveReport, Status,
};

const SLICE_TOLERANCE: f64 = 1e-12;
/// Gradient inputs are clamped here; reported values use exact `0 log 0 = 0`.
const GRADIENT_FLOOR: f64 = 1e-15;
/// Largest row violation tolerated at a reported optimizer.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Conditional pmf `p(i, j | k)` of `(X̂₁, X̂₂)` given `X = k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDecoderPMF {
    /// `p[k][2 i + j] = p(ij|k)`.
    p: [[f64; 4]; 2],
}

impl JointDecoderPMF {
    /// Validates both slices: entries in `[0, 1]`, each slice summing to 1.
    pub fn new(p: [[f64; 4]; 2]) -> Result<Self> {
        for (k, slice) in p.iter().enumerate() {
            if let Some(v) = slice.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Config(format!("p(.|{k}) has entry {v} outside [0, 1]")));
            }
            let total: f64 = slice.iter().sum();
            if (total - 1.0).abs() > SLICE_TOLERANCE {
                return Err(Error::Config(format!("p(.|{k}) sums to {total}")));
            }
        }
        Ok(JointDecoderPMF { p })
    }

    /// Builds the pmf from the six free coordinates, completing `p10|k`.
    /// Round-off below zero is clipped; anything larger is rejected.
    pub fn from_free(x: &[f64; 6]) -> Result<Self> {
        let mut p = [[0.0; 4]; 2];
        for k in 0..2 {
            let (p00, p01, p11) = (x[3 * k], x[3 * k + 1], x[3 * k + 2]);
            let p10 = ((1.0 - p00) - p01) - p11;
            p[k] = [p00, p01, p10, p11].map(|v| {
                if (-SLICE_TOLERANCE..=1.0 + SLICE_TOLERANCE).contains(&v) {
                    v.clamp(0.0, 1.0)
                } else {
                    v
                }
            });
        }
        Self::new(p)
    }

    pub fn free(&self) -> [f64; 6] {
        [
            self.get(0, 0, 0),
            self.get(0, 1, 0),
            self.get(1, 1, 0),
            self.get(0, 0, 1),
            self.get(0, 1, 1),
            self.get(1, 1, 1),
        ]
    }

    /// `p(ij|k)`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.p[k][2 * i + j]
    }

    pub fn slices(&self) -> [[f64; 4]; 2] {
        self.p
    }
}

/// Corner parameters of the achievable set at rate `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaBoundary {
    pub c0: Probability,
    pub c_min: Bits,
    pub b: Probability,
}

impl ThetaBoundary {
    /// Residuals of the two defining equations at the stored values:
    /// `r = H(b) - H(C0)` and `r = H(b) - H((H^-1(C_min) - q_s1) / (1 - 2 q_s1))`.
    pub fn residuals(&self, model: &SourceModel, r: f64) -> Result<[f64; 2]> {
        let qs1 = model.q_s1().get();
        let hb = entropy_bits(self.b.get());
        let first = hb - entropy_bits(self.c0.get()) - r;
        let inner = (inverse_binary_entropy(self.c_min.get())?.get() - qs1) / (1.0 - 2.0 * qs1);
        let second = hb - entropy_bits(inner.clamp(0.0, 0.5)) - r;
        Ok([first.abs(), second.abs()])
    }
}

/// Solves for the corner parameters at rate `r`, `0 < r <= H(b)`:
/// `C0 = H^-1(H(b) - r)` and `C_min = H(q_s1 + (1 - 2 q_s1) C0)`.
pub fn theta_boundary(model: &SourceModel, r: f64) -> Result<ThetaBoundary> {
    let b = asymptotic_b(model)?;
    let hb = binary_entropy(b).get();
    if !r.is_finite() || r <= 0.0 || r > hb + 1e-12 {
        return Err(Error::Domain {
            name: "r",
            value: r,
            lo: 0.0,
            hi: hb,
        });
    }
    let c0 = inverse_binary_entropy((hb - r).max(0.0))?;
    let qs1 = model.q_s1().get();
    let crossover = qs1 + (1.0 - 2.0 * qs1) * c0.get();
    Ok(ThetaBoundary {
        c0,
        c_min: binary_entropy(Probability::clamped(crossover)),
        b,
    })
}

fn plogq(p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * (p / q).log2()
    }
}

/// Contribution of one `(ij)` cell: `(1-q) a log(a/m) + q c log(c/m)`,
/// `m = (1-q) a + q c`, with `a = p(ij|0)`, `c = p(ij|1)`.
fn cell(q: f64, a: f64, c: f64) -> f64 {
    let m = (1.0 - q) * a + q * c;
    (1.0 - q) * plogq(a, m) + q * plogq(c, m)
}

/// Log-sum surrogate: the mutual information with the `ij = 10` cells dropped.
pub fn i_lb(q_x: Probability, pmf: &JointDecoderPMF) -> Bits {
    let q = q_x.get();
    let v: f64 = [(0, 0), (0, 1), (1, 1)]
        .iter()
        .map(|&(i, j)| cell(q, pmf.get(i, j, 0), pmf.get(i, j, 1)))
        .sum();
    Bits::clamped(v)
}

/// `I(X; X̂₁, X̂₂)` over all four cells.
pub fn mutual_information_exact(q_x: Probability, pmf: &JointDecoderPMF) -> Bits {
    let q = q_x.get();
    let v: f64 = (0..4).map(|ij| cell(q, pmf.p[0][ij], pmf.p[1][ij])).sum();
    Bits::clamped(v)
}

/// `I_LB` as a function of the free coordinates.
#[derive(Clone, Copy, Debug)]
pub struct SurrogateObjective {
    q: f64,
}

impl SurrogateObjective {
    pub fn new(q_x: Probability) -> Self {
        SurrogateObjective { q: q_x.get() }
    }
}

impl ConvexObjective for SurrogateObjective {
    fn value(&self, x: &[f64]) -> f64 {
        (0..3)
            .map(|t| cell(self.q, x[t].max(0.0), x[t + 3].max(0.0)))
            .sum()
    }

    /// `d/da = (1-q) log2(a/m)`, `d/dc = q log2(c/m)`; empty cells are
    /// handled as homogeneous blocks.
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; 6];
        for t in 0..3 {
            (g[t], g[t + 3]) = self.cell_gradient(x[t], x[t + 3]);
        }
        g
    }

    fn homogeneous_blocks(&self) -> Vec<Vec<usize>> {
        (0..3).map(|t| vec![t, t + 3]).collect()
    }

    fn block_value(&self, _b: usize, y: &[f64]) -> f64 {
        cell(self.q, y[0].max(0.0), y[1].max(0.0))
    }

    fn block_gradient(&self, _b: usize, y: &[f64]) -> Vec<f64> {
        let (ga, gc) = self.cell_gradient(y[0], y[1]);
        vec![ga, gc]
    }
}

impl SurrogateObjective {
    fn cell_gradient(&self, a: f64, c: f64) -> (f64, f64) {
        if a <= 0.0 && c <= 0.0 {
            return (0.0, 0.0);
        }
        let q = self.q;
        let a = a.max(GRADIENT_FLOOR);
        let c = c.max(GRADIENT_FLOOR);
        let m = (1.0 - q) * a + q * c;
        ((1.0 - q) * (a / m).log2(), q * (c / m).log2())
    }
}

/// Which of the two nested programs to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Program {
    Lower,
    Upper(UpperBoundForm),
}

/// How the first decoder's classification row of the upper program is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperBoundForm {
    /// `p10|0 + p11|0 <= 0`: the first decoder never flips `X = 0`.
    #[default]
    Interpreted,
    /// `(1-q_s1)(p10|0 + p11|0) + q_s1(1 - p10|0 - p11|0) <= 0`, whose left
    /// side is at least `q_s1`; empty for `q_s1 > 0`.
    Literal,
}

/// One linear row `coeffs . x + constant <= rhs`, kept in the shape it is
/// derived in so the algebra can be checked against first principles.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRow {
    pub name: &'static str,
    pub coeffs: [f64; 6],
    pub constant: f64,
    pub rhs: f64,
}

impl ConstraintRow {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + self.constant
    }
}

/// The linear rows of the chosen program (box bounds excluded).
pub fn constraint_rows(
    model: &SourceModel,
    theta: &ThetaBoundary,
    program: Program,
) -> Result<Vec<ConstraintRow>> {
    let q = model.q_x().get();
    let qs1 = model.q_s1().get();
    let k = 1.0 - 2.0 * qs1;
    let c0 = theta.c0.get();
    let b = theta.b.get();
    let row = |name, coeffs, constant, rhs| ConstraintRow {
        name,
        coeffs,
        constant,
        rhs,
    };

    let mut rows = vec![
        // P(X != X̂₁) = (1-q)(1 - p00|0 - p01|0) + q(p00|1 + p01|1) <= C0
        row(
            "distortion-1",
            [-(1.0 - q), -(1.0 - q), 0.0, q, q, 0.0],
            1.0 - q,
            c0,
        ),
        // P(X != X̂₂) = (1-q)(p01|0 + p11|0) + q(1 - p01|1 - p11|1) <= b
        row(
            "distortion-2",
            [0.0, 1.0 - q, 1.0 - q, 0.0, -q, -q],
            q,
            b,
        ),
    ];
    // q_s1 * P(X̂₁ = 1 | X = 0), with P(X̂₁ = 1 | X = 0) = 1 - p00|0 - p01|0.
    let first_task = |rhs| row("classification-1", [-k, -k, 0.0, 0.0, 0.0, 0.0], qs1 + k, rhs);
    match program {
        Program::Lower => rows.push(first_task(c0 * k + qs1)),
        Program::Upper(UpperBoundForm::Literal) => rows.push(first_task(0.0)),
        Program::Upper(UpperBoundForm::Interpreted) => rows.push(row(
            "classification-1",
            [-1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
            1.0,
            0.0,
        )),
    }
    // q_s1 * P(X̂₂ = 1 | X = 0), with P(X̂₂ = 1 | X = 0) = p01|0 + p11|0.
    rows.push(row(
        "classification-2",
        [0.0, k, k, 0.0, 0.0, 0.0],
        qs1,
        inverse_binary_entropy(theta.c_min.get())?.get(),
    ));
    rows.push(row("slice-0", [1.0, 1.0, 1.0, 0.0, 0.0, 0.0], 0.0, 1.0));
    rows.push(row("slice-1", [0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 0.0, 1.0));
    Ok(rows)
}

/// The feasible polytope of the chosen program over the free coordinates.
pub fn program_polytope(
    model: &SourceModel,
    theta: &ThetaBoundary,
    program: Program,
) -> Result<Polytope> {
    let rows = constraint_rows(model, theta, program)?;
    let mut upper = vec![1.0; 6];
    if program == Program::Upper(UpperBoundForm::Interpreted) {
        // p00|0 + p01|0 >= 1 leaves no room for p11|0.
        upper[2] = 0.0;
    }
    Polytope::new(
        rows.iter().map(|r| r.coeffs.to_vec()).collect(),
        rows.iter().map(|r| r.rhs - r.constant).collect(),
        vec![0.0; 6],
        upper,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniversalSolution {
    /// Minimum of `I_LB` over the program's polytope.
    pub rate: Bits,
    pub pmf: JointDecoderPMF,
    /// Exact mutual information at the optimizer (an achievable rate there).
    pub exact_mi: Bits,
    pub gap: f64,
    pub iterations: usize,
    /// Largest row or bound violation at the optimizer.
    pub max_residual: f64,
}

fn solve_program(
    model: &SourceModel,
    r: f64,
    program: Program,
    options: &FrankWolfeOptions,
) -> Result<UniversalSolution> {
    let theta = theta_boundary(model, r)?;
    let polytope = program_polytope(model, &theta, program)?;
    let f = SurrogateObjective::new(model.q_x());
    let report: SolveReport = minimize_convex(&f, &polytope, options);
    match report.status {
        Status::Optimal => {}
        Status::Infeasible => {
            return Err(Error::Infeasible(format!(
                "{program:?} program is empty at r = {r}"
            )))
        }
        _ => {
            return Err(Error::Convergence {
                objective: report.objective,
                gap: report.gap,
                best: report.x,
            })
        }
    }
    let mut x: [f64; 6] = report.x.clone().try_into().expect("six coordinates");
    if program == Program::Upper(UpperBoundForm::Interpreted) {
        // Pin the forced cells so p10|0 = p11|0 = 0 hold exactly.
        x[2] = 0.0;
        x[1] = 1.0 - x[0];
    }
    let pmf = JointDecoderPMF::from_free(&x)?;
    let max_residual = polytope.residual(&x);
    if max_residual > RESIDUAL_TOLERANCE {
        return Err(Error::Convergence {
            objective: report.objective,
            gap: report.gap,
            best: x.to_vec(),
        });
    }
    Ok(UniversalSolution {
        rate: i_lb(model.q_x(), &pmf),
        exact_mi: mutual_information_exact(model.q_x(), &pmf),
        pmf,
        gap: report.gap,
        iterations: report.iterations,
        max_residual,
    })
}

/// `R_LB`: `I_LB` minimized under both corner-point constraints.
pub fn rate_penalty_lower(model: &SourceModel, r: f64) -> Result<UniversalSolution> {
    rate_penalty_lower_with(model, r, &FrankWolfeOptions::default())
}

pub fn rate_penalty_lower_with(
    model: &SourceModel,
    r: f64,
    options: &FrankWolfeOptions,
) -> Result<UniversalSolution> {
    solve_program(model, r, Program::Lower, options)
}

/// `R_UB`: the same objective over the smaller polytope where the first
/// decoder is forced to reproduce `X = 0`.
pub fn rate_penalty_upper(model: &SourceModel, r: f64) -> Result<UniversalSolution> {
    rate_penalty_upper_with(model, r, UpperBoundForm::Interpreted, &FrankWolfeOptions::default())
}

pub fn rate_penalty_upper_with(
    model: &SourceModel,
    r: f64,
    form: UpperBoundForm,
    options: &FrankWolfeOptions,
) -> Result<UniversalSolution> {
    solve_program(model, r, Program::Upper(form), options)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatePenaltyBounds {
    pub r_lb: Bits,
    pub r_ub: Bits,
    /// `r_lb - r`; may be negative since `I_LB` under-counts.
    pub penalty_lb: f64,
    pub penalty_ub: f64,
}

/// Both bounds and their excess over `r`, the largest single-point rate in
/// the achievable set at rate `r`.
pub fn rate_penalty_bounds(model: &SourceModel, r: f64) -> Result<RatePenaltyBounds> {
    let lb = rate_penalty_lower(model, r)?;
    let ub = rate_penalty_upper(model, r)?;
    Ok(RatePenaltyBounds {
        r_lb: lb.rate,
        r_ub: ub.rate,
        penalty_lb: lb.rate.get() - r,
        penalty_ub: ub.rate.get() - r,
    })
}
