//! Conditional-gradient minimization of convex functions over a polytope.
//!
//! The linear minimization oracle is the simplex in [`super::simplex`]. The
//! default step rule is the away-step variant with exact line search: it
//! keeps the iterate as an explicit convex combination of vertices, which
//! lets it shed weight from bad vertices and land exactly on faces — the
//! plain open-loop rule creeps towards face optima at `O(1/k)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dot, solve_lp, LinearProgram, Polytope, SolveReport, Status};

/// A convex function with a (sub)gradient oracle.
///
/// Objectives that are nondifferentiable only where some coordinate block
/// vanishes — sums of positively homogeneous terms, like perspectives — can
/// expose those blocks. At such a point the solver then models each vanished
/// block's term exactly (by cutting planes) instead of trusting the gradient,
/// which there is at best a loose subgradient whose gap never closes.
pub trait ConvexObjective: Sync {
    fn value(&self, x: &[f64]) -> f64;
    /// Gradient where it exists; at a vanished block, 0 for its coordinates.
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Coordinate blocks carrying positively homogeneous convex terms.
    fn homogeneous_blocks(&self) -> Vec<Vec<usize>> {
        Vec::new()
    }

    /// Term of block `b` evaluated at block coordinates `y`.
    fn block_value(&self, _b: usize, _y: &[f64]) -> f64 {
        0.0
    }

    /// A gradient of block `b`'s term at `y`; by homogeneity it is also a
    /// subgradient at the origin, i.e. a valid cut.
    fn block_gradient(&self, _b: usize, y: &[f64]) -> Vec<f64> {
        vec![0.0; y.len()]
    }
}

const MAX_CUTS: usize = 64;
const EPIGRAPH_BOUND: f64 = 1e6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// Away steps with exact line search.
    #[default]
    AwayLineSearch,
    /// Classic `2 / (k + 2)` steps towards the oracle vertex.
    OpenLoop,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrankWolfeOptions {
    pub max_iterations: usize,
    pub gap_tolerance: f64,
    /// Number of random feasible starting points; the best result wins.
    pub starts: usize,
    pub seed: u64,
    pub step: StepRule,
}

impl Default for FrankWolfeOptions {
    fn default() -> Self {
        FrankWolfeOptions {
            max_iterations: 100_000,
            gap_tolerance: 1e-9,
            starts: 16,
            seed: 0x5eed,
            step: StepRule::AwayLineSearch,
        }
    }
}

const SAME_VERTEX: f64 = 1e-12;
const LINE_SEARCH_STEPS: usize = 80;

fn lmo(polytope: &Polytope, direction: &[f64]) -> Option<Vec<f64>> {
    let lp = LinearProgram {
        c: direction.to_vec(),
        polytope: polytope.clone(),
    };
    let r = solve_lp(&lp);
    r.is_optimal().then_some(r.x)
}

/// Minimizes the first-order model
/// `phi(s) = g.s + sum over vanished blocks of f_b(s_b)` over the polytope,
/// returning a minimizer and a certified lower bound on `min phi`.
/// Vanished blocks are exactly represented by the directional derivative of
/// a homogeneous term, so `phi(x) - bound` bounds `f(x) - f*` from above.
fn model_oracle<F: ConvexObjective>(
    f: &F,
    polytope: &Polytope,
    x: &[f64],
    g: &[f64],
) -> Option<(Vec<f64>, f64)> {
    let s = lmo(polytope, g)?;
    let blocks: Vec<Vec<usize>> = f
        .homogeneous_blocks()
        .into_iter()
        .filter(|b| b.iter().all(|&j| x[j] <= 0.0))
        .collect();
    if blocks.is_empty() {
        let bound = dot(g, &s);
        return Some((s, bound));
    }
    let all = f.homogeneous_blocks();
    let block_id = |b: &Vec<usize>| all.iter().position(|a| a == b).expect("block listed");
    let n = polytope.dim();
    let z = blocks.len();
    let phi = |s: &[f64]| {
        dot(g, s)
            + blocks
                .iter()
                .map(|b| f.block_value(block_id(b), &b.iter().map(|&j| s[j]).collect::<Vec<_>>()))
                .sum::<f64>()
    };
    // Epigraph LP over (s, tau): min g.s + sum tau_t, tau_t >= cut . s_b.
    let mut a: Vec<Vec<f64>> = polytope
        .a
        .iter()
        .map(|row| row.iter().copied().chain(std::iter::repeat(0.0).take(z)).collect())
        .collect();
    let mut rhs = polytope.b.clone();
    let add_cut = |a: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>, t: usize, at: &[f64]| {
        let b = &blocks[t];
        let mut y: Vec<f64> = b.iter().map(|&j| at[j]).collect();
        if y.iter().all(|&v| v <= 0.0) {
            y.iter_mut().for_each(|v| *v = 1.0);
        }
        let grad = f.block_gradient(block_id(b), &y);
        let mut row = vec![0.0; n + z];
        for (&j, gj) in b.iter().zip(&grad) {
            row[j] = *gj;
        }
        row[n + t] = -1.0;
        a.push(row);
        rhs.push(0.0);
    };
    for t in 0..z {
        add_cut(&mut a, &mut rhs, t, &s);
    }
    let lower: Vec<f64> = polytope.lower.iter().copied().chain(std::iter::repeat(-EPIGRAPH_BOUND).take(z)).collect();
    let upper: Vec<f64> = polytope.upper.iter().copied().chain(std::iter::repeat(EPIGRAPH_BOUND).take(z)).collect();
    let c: Vec<f64> = g.iter().copied().chain(std::iter::repeat(1.0).take(z)).collect();

    let mut best = (phi(&s), s);
    let mut bound = f64::NEG_INFINITY;
    for _ in 0..MAX_CUTS {
        let lp = LinearProgram {
            c: c.clone(),
            polytope: Polytope {
                a: a.clone(),
                b: rhs.clone(),
                lower: lower.clone(),
                upper: upper.clone(),
            },
        };
        let r = solve_lp(&lp);
        if !r.is_optimal() {
            break;
        }
        bound = bound.max(r.objective);
        let cand = r.x[..n].to_vec();
        let value = phi(&cand);
        if value < best.0 {
            best = (value, cand.clone());
        }
        if best.0 - bound <= 1e-13 {
            break;
        }
        let mut added = false;
        for t in 0..z {
            let b = &blocks[t];
            let y: Vec<f64> = b.iter().map(|&j| cand[j]).collect();
            if f.block_value(block_id(b), &y) > r.x[n + t] + 1e-14 {
                add_cut(&mut a, &mut rhs, t, &cand);
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    // Without a finite bound fall back to the (loose) plain linearization.
    if !bound.is_finite() {
        let s = lmo(polytope, g)?;
        let b = dot(g, &s);
        return Some((s, b));
    }
    Some((best.1, bound))
}

fn same(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= SAME_VERTEX)
}

/// Convex combination `sum w_i v_i` kept alongside the iterate.
#[derive(Clone, Debug)]
struct ActiveSet {
    vertices: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl ActiveSet {
    fn insert(&mut self, v: &[f64], w: f64) {
        match self.vertices.iter().position(|u| same(u, v)) {
            Some(i) => self.weights[i] += w,
            None => {
                self.vertices.push(v.to_vec());
                self.weights.push(w);
            }
        }
    }

    fn point(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (v, &w) in self.vertices.iter().zip(&self.weights) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += w * vi;
            }
        }
        x
    }

    fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            *w *= factor;
        }
    }

    fn prune(&mut self) {
        let mut i = 0;
        while i < self.weights.len() {
            if self.weights[i] <= 1e-15 {
                self.weights.remove(i);
                self.vertices.remove(i);
            } else {
                i += 1;
            }
        }
    }
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

/// Minimizes the convex `phi(t) = f(x + t d)` on `[0, t_max]` by bisection on
/// the directional derivative.
fn line_search<F: ConvexObjective>(f: &F, x: &[f64], d: &[f64], t_max: f64) -> f64 {
    let slope = |t: f64| dot(&f.gradient(&axpy(x, t, d)), d);
    if slope(t_max) <= 0.0 {
        return t_max;
    }
    let (mut lo, mut hi) = (0.0, t_max);
    for _ in 0..LINE_SEARCH_STEPS {
        let mid = 0.5 * (lo + hi);
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Subgradients may be clamped near the boundary; trust values over slopes.
    let candidates = [lo, hi, t_max];
    candidates
        .into_iter()
        .map(|t| (t, f.value(&axpy(x, t, d))))
        .fold((0.0, f.value(x)), |best, c| if c.1 < best.1 { c } else { best })
        .0
}

pub(crate) struct Trace {
    pub report: SolveReport,
    #[cfg_attr(not(test), allow(dead_code))]
    pub history: Vec<f64>,
}

pub(crate) fn run_from<F: ConvexObjective>(
    f: &F,
    polytope: &Polytope,
    start: ActiveSetStart,
    options: &FrankWolfeOptions,
) -> Trace {
    let n = polytope.dim();
    let mut active = ActiveSet {
        vertices: Vec::new(),
        weights: Vec::new(),
    };
    for (v, w) in start.vertices.iter().zip(&start.weights) {
        active.insert(v, *w);
    }
    let mut x = active.point(n);
    let mut value = f.value(&x);
    let mut history = vec![value];
    let mut gap = f64::INFINITY;

    for k in 0..options.max_iterations {
        let g = f.gradient(&x);
        let Some((s, bound)) = model_oracle(f, polytope, &x, &g) else {
            break;
        };
        gap = dot(&g, &x) - bound;
        let fw_dir: Vec<f64> = s.iter().zip(&x).map(|(a, b)| a - b).collect();
        if gap <= options.gap_tolerance {
            return Trace {
                report: SolveReport {
                    status: Status::Optimal,
                    objective: value,
                    x,
                    gap: gap.max(0.0),
                    iterations: k,
                },
                history,
            };
        }

        match options.step {
            StepRule::OpenLoop => {
                let t = 2.0 / (k as f64 + 2.0);
                active.scale(1.0 - t);
                active.insert(&s, t);
                x = axpy(&x, t, &fw_dir);
            }
            StepRule::AwayLineSearch => {
                let (away_idx, away_score) = active
                    .vertices
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (i, dot(&g, v)))
                    .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
                let away_gap = away_score - dot(&g, &x);
                if gap >= away_gap || active.vertices.len() == 1 {
                    let t = line_search(f, &x, &fw_dir, 1.0);
                    if t >= 1.0 {
                        active.vertices = vec![s.clone()];
                        active.weights = vec![1.0];
                        x = s;
                    } else {
                        active.scale(1.0 - t);
                        active.insert(&s, t);
                        x = axpy(&x, t, &fw_dir);
                    }
                } else {
                    let alpha = active.weights[away_idx];
                    let t_max = alpha / (1.0 - alpha);
                    let v = active.vertices[away_idx].clone();
                    let dir: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - b).collect();
                    let t = line_search(f, &x, &dir, t_max);
                    active.scale(1.0 + t);
                    if t >= t_max {
                        active.weights[away_idx] = 0.0;
                    } else {
                        active.weights[away_idx] -= t;
                    }
                    x = axpy(&x, t, &dir);
                }
                active.prune();
            }
        }
        value = f.value(&x);
        history.push(value);
    }

    Trace {
        report: SolveReport {
            status: Status::IterationLimit,
            objective: value,
            x,
            gap,
            iterations: options.max_iterations,
        },
        history,
    }
}

#[derive(Clone, Debug)]
pub(crate) struct ActiveSetStart {
    vertices: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Random convex combinations of polytope vertices, one per start. Each
/// vertex comes from the LP oracle with a random objective.
fn random_starts(polytope: &Polytope, options: &FrankWolfeOptions) -> Option<Vec<ActiveSetStart>> {
    let n = polytope.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut starts = Vec::with_capacity(options.starts.max(1));
    for _ in 0..options.starts.max(1) {
        let mut vertices = Vec::with_capacity(n + 1);
        let mut weights = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            vertices.push(lmo(polytope, &c)?);
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            weights.push(-u.ln());
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        starts.push(ActiveSetStart { vertices, weights });
    }
    Some(starts)
}

/// Minimizes `f` over `polytope` from several seeded feasible starts in
/// parallel. The lowest objective wins, ties going to the earliest start, so
/// the result does not depend on thread scheduling.
pub fn minimize_convex<F: ConvexObjective>(
    f: &F,
    polytope: &Polytope,
    options: &FrankWolfeOptions,
) -> SolveReport {
    let Some(starts) = random_starts(polytope, options) else {
        return SolveReport::failed(Status::Infeasible, polytope.dim(), 0);
    };
    let reports: Vec<SolveReport> = starts
        .into_par_iter()
        .map(|s| run_from(f, polytope, s, options).report)
        .collect();
    let mut best: Option<SolveReport> = None;
    for r in reports {
        let better = match &best {
            None => true,
            Some(b) => {
                let rank = |s: &SolveReport| (s.status != Status::Optimal) as u8;
                (rank(&r), r.objective) < (rank(b), b.objective)
            }
        };
        if better {
            best = Some(r);
        }
    }
    best.expect("at least one start")
}

#[cfg(test)]
pub(crate) fn single_start(polytope: &Polytope, seed: u64) -> ActiveSetStart {
    let opts = FrankWolfeOptions {
        starts: 1,
        seed,
        ..FrankWolfeOptions::default()
    };
    random_starts(polytope, &opts).unwrap().remove(0)
}
