//! The oracle suite behind `rdc verify`: every closed form and solver path
//! checked against its independent oracle, one residual per check.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::binary_info::{binary_entropy, inverse_binary_entropy, task_prior_m, Probability, SourceModel};
use crate::dc_region::{dc_feasibility_threshold, dc_lower_boundary, RepresentationChannel};
use crate::error::{Error, Result};
use crate::oneshot::{oneshot_drc, oneshot_rdc, OperatingPoint};
use crate::oracle::{
    dc_grid_oracle, four_map_enumeration_oracle, projected_gradient_oracle, scalar_lp_oracle_drc,
    scalar_lp_oracle_rdc, GridSpec, PgProblem,
};
use crate::universal::{
    i_lb, mutual_information_exact, rate_penalty_lower, rate_penalty_upper, theta_boundary, JointDecoderPMF,
};

const SEED: u64 = 0x0a11_5eed;
const FOUR_MAP_RESOLUTION: usize = 101;
const DC_RESOLUTION_2D: usize = 201;
const DC_RESOLUTION_HIGHER: usize = 41;
const PG_STARTS: usize = 8;
const C_SAMPLES: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyScope {
    All,
    Oneshot,
    Dc,
    Universal,
}

impl FromStr for VerifyScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(VerifyScope::All),
            "oneshot" => Ok(VerifyScope::Oneshot),
            "dc" => Ok(VerifyScope::Dc),
            "universal" => Ok(VerifyScope::Universal),
            other => Err(Error::Config(format!(
                "unknown verify scope `{other}` (expected all, oneshot, dc or universal)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub family: &'static str,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    /// Why the residual is infinite, when an unexpected error replaced it.
    pub note: Option<String>,
}

impl Check {
    fn new(family: &'static str, name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            family,
            name: name.into(),
            residual,
            tolerance,
            note: None,
        }
    }

    fn errored(family: &'static str, name: impl Into<String>, tolerance: f64, err: &Error) -> Self {
        Check {
            note: Some(err.to_string()),
            ..Check::new(family, name, f64::INFINITY, tolerance)
        }
    }

    /// NaN residuals fail.
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: residual {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.family,
            self.name,
            self.residual,
            self.tolerance
        )?;
        if let Some(note) = &self.note {
            write!(f, " [{note}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(
            f,
            "{} of {} checks passed",
            self.checks.len() - self.failures(),
            self.checks.len()
        )
    }
}

/// Runs every check in `scope`. `resolution` overrides the points per axis
/// of every grid oracle (defaults: 101 for the four-map simplex, 201 for
/// two-symbol channels, 41 beyond).
pub fn run_verification(scope: VerifyScope, resolution: Option<usize>) -> Result<VerifyReport> {
    if let Some(r) = resolution {
        GridSpec::new(r, SEED)?;
    }
    let mut checks = Vec::new();
    if matches!(scope, VerifyScope::All | VerifyScope::Oneshot) {
        checks.extend(oneshot_checks(resolution.unwrap_or(FOUR_MAP_RESOLUTION)));
    }
    if matches!(scope, VerifyScope::All | VerifyScope::Dc) {
        checks.extend(dc_checks(resolution));
    }
    if matches!(scope, VerifyScope::All | VerifyScope::Universal) {
        checks.extend(universal_checks());
    }
    Ok(VerifyReport { checks })
}

/// Max |a - b| when both succeed; both failing as infeasible counts as
/// agreement, anything else as an infinite residual.
fn agreement(a: Result<f64>, b: Result<f64>) -> f64 {
    match (a, b) {
        (Ok(x), Ok(y)) => (x - y).abs(),
        (Err(e1), Err(e2)) if e1.is_infeasible() && e2.is_infeasible() => 0.0,
        _ => f64::INFINITY,
    }
}

fn random_model(rng: &mut ChaCha8Rng) -> SourceModel {
    SourceModel::new(rng.gen_range(0.01..=0.49), rng.gen_range(0.01..=0.49)).expect("in range")
}

fn oneshot_checks(four_map_resolution: usize) -> Vec<Check> {
    let fam = "oneshot";
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checks = Vec::new();

    let (mut rdc, mut drc) = (0.0f64, 0.0f64);
    for i in 0..550 {
        let model = random_model(&mut rng);
        let hs = binary_entropy(model.q_s1()).get();
        // The last 50 tuples sit below the classification threshold.
        let c = if i < 500 { rng.gen_range(hs..=1.0) } else { rng.gen_range(0.0..hs) };
        let d = rng.gen_range(0.0..=1.0);
        let r = rng.gen_range(0.0..=1.2 * binary_entropy(model.q_x()).get());
        rdc = rdc.max(match OperatingPoint::new(d, c) {
            Ok(p) => agreement(
                oneshot_rdc(&model, &p).map(|s| s.rate.get()),
                scalar_lp_oracle_rdc(&model, &p).map(|b| b.get()),
            ),
            Err(_) => f64::INFINITY,
        });
        drc = drc.max(agreement(
            oneshot_drc(&model, r, c).map(|s| s.distortion.get()),
            scalar_lp_oracle_drc(&model, r, c).map(|p| p.get()),
        ));
    }
    checks.push(Check::new(fam, "rdc closed form vs scalar LP (550 tuples)", rdc, 1e-9));
    checks.push(Check::new(fam, "drc closed form vs scalar LP (550 tuples)", drc, 1e-9));

    let grid = GridSpec::new(four_map_resolution, SEED).expect("validated");
    let (mut below, mut relative_gap) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let model = random_model(&mut rng);
        let hs = binary_entropy(model.q_s1()).get();
        let point = OperatingPoint::new(rng.gen_range(0.0..=1.0), rng.gen_range(hs..=1.0)).expect("in range");
        match (oneshot_rdc(&model, &point), four_map_enumeration_oracle(&model, &point, grid)) {
            (Ok(exact), Ok(grid_value)) => {
                let gap = grid_value.get() - exact.rate.get();
                below = below.max(-gap);
                // Rounding the identity weight up to the next level of the
                // grid costs at most H(q_x)/N.
                let bound = binary_entropy(model.q_x()).get() / (four_map_resolution - 1) as f64;
                relative_gap = relative_gap.max(gap / bound.max(f64::MIN_POSITIVE));
            }
            (Err(e), _) | (_, Err(e)) => {
                checks.push(Check::errored(fam, "four-map enumeration", 0.0, &e));
                return checks;
            }
        }
    }
    checks.push(Check::new(fam, "four-map grid never beats the closed form", below, 1e-12));
    checks.push(Check::new(
        fam,
        format!("four-map gap / grid bound H(q_x)/N at resolution {four_map_resolution}"),
        relative_gap,
        1.0 + 1e-9,
    ));

    let round_trip = (0..1000)
        .map(|i| {
            let h = i as f64 / 999.0;
            inverse_binary_entropy(h).map_or(f64::INFINITY, |p| (binary_entropy(p).get() - h).abs())
        })
        .fold(0.0, f64::max);
    checks.push(Check::new(fam, "H^-1 round trip (1000 points)", round_trip, 1e-10));

    let (mut identity, mut lemma) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let model = SourceModel::new(rng.gen_range(0.0..=0.5), rng.gen_range(0.0..=0.5)).expect("in range");
        let (qx, qs) = (model.q_x().get(), model.q_s1().get());
        let m = task_prior_m(&model);
        identity = identity.max(((m.get() - 0.5).abs() - 2.0 * (qx - 0.5).abs() * (qs - 0.5).abs()).abs());
        lemma = lemma.max(binary_entropy(model.q_s1()).get() - binary_entropy(m).get());
    }
    checks.push(Check::new(fam, "|m - 1/2| = 2|q_x - 1/2||q_s1 - 1/2|", identity, 1e-15));
    checks.push(Check::new(fam, "H(m) >= H(q_s1)", lemma.max(0.0), 1e-12));
    checks
}

fn dc_instances() -> Vec<(&'static str, RepresentationChannel, Probability)> {
    vec![
        (
            "two-symbol channel",
            RepresentationChannel::new(vec![0.5, 0.5], vec![0.2, 0.8]).expect("valid"),
            Probability::new(0.05).expect("valid"),
        ),
        (
            "four-symbol channel",
            RepresentationChannel::new(vec![0.2, 0.3, 0.1, 0.4], vec![0.15, 0.35, 0.65, 0.85]).expect("valid"),
            Probability::new(0.1).expect("valid"),
        ),
    ]
}

/// `c_samples` budgets evenly spaced from the feasibility threshold to 1.
pub fn dc_budget_grid(channel: &RepresentationChannel, q_s1: Probability, c_samples: usize) -> Result<Vec<f64>> {
    let lo = dc_feasibility_threshold(channel, q_s1)?.get();
    Ok((0..c_samples)
        .map(|i| lo + (1.0 - lo) * i as f64 / (c_samples - 1) as f64)
        .collect())
}

/// Bound on how far the best grid profile can sit above the LP optimum:
/// rounding each coordinate down keeps the task row feasible and costs at
/// most `q_i |2 eps_i - 1|` per unit.
pub fn dc_grid_bound(channel: &RepresentationChannel, resolution: usize) -> f64 {
    channel
        .q()
        .iter()
        .zip(channel.eps())
        .map(|(q, e)| q * (2.0 * e - 1.0).abs() * e.min(1.0 - e) / (resolution - 1) as f64)
        .sum()
}

fn dc_checks(resolution: Option<usize>) -> Vec<Check> {
    let fam = "dc";
    let mut checks = Vec::new();
    for (label, channel, q_s1) in dc_instances() {
        let res = resolution.unwrap_or(if channel.n() <= 2 { DC_RESOLUTION_2D } else { DC_RESOLUTION_HIGHER });
        let grid = GridSpec::new(res, SEED).expect("validated");
        let budgets = match dc_budget_grid(&channel, q_s1, C_SAMPLES) {
            Ok(b) => b,
            Err(e) => {
                checks.push(Check::errored(fam, label, 0.0, &e));
                continue;
            }
        };
        let bound = dc_grid_bound(&channel, res);
        let (mut solvers, mut below, mut over) = (0.0f64, 0.0f64, 0.0f64);
        let mut curve = Vec::with_capacity(budgets.len());
        for &c in &budgets {
            let point = dc_lower_boundary(&channel, q_s1, c);
            let oracle = dc_grid_oracle(&channel, q_s1, c, grid);
            match (point, oracle) {
                (Ok(p), Ok(o)) => {
                    let d = p.distortion.get();
                    solvers = solvers.max((d - p.simplex_distortion).abs());
                    below = below.max(d - o.get());
                    over = over.max(o.get() - d - bound);
                    curve.push((inverse_binary_entropy(c).map_or(f64::NAN, |t| t.get()), d));
                }
                (Err(e), _) | (_, Err(e)) => {
                    checks.push(Check::errored(fam, format!("{label} at c = {c}"), 0.0, &e));
                }
            }
        }
        checks.push(Check::new(fam, format!("{label}: knapsack vs simplex"), solvers, 1e-9));
        checks.push(Check::new(fam, format!("{label}: grid never beats the LP"), below.max(0.0), 1e-12));
        checks.push(Check::new(
            fam,
            format!("{label}: grid excess over the rounding bound {bound:.2e} (resolution {res})"),
            over.max(0.0),
            1e-12,
        ));
        let rising = curve.windows(2).map(|w| w[1].1 - w[0].1).fold(0.0, f64::max);
        checks.push(Check::new(fam, format!("{label}: D nonincreasing in c"), rising, 1e-12));
        // D is convex in the crossover budget t = H^-1(c), on a nonuniform t grid.
        let concavity = curve
            .windows(3)
            .map(|w| {
                let (t0, d0) = w[0];
                let (t1, d1) = w[1];
                let (t2, d2) = w[2];
                let chord = d0 + (d2 - d0) * (t1 - t0) / (t2 - t0);
                d1 - chord
            })
            .fold(0.0, f64::max);
        checks.push(Check::new(fam, format!("{label}: D convex in H^-1(c)"), concavity, 1e-9));
    }
    checks
}

fn random_pmf(rng: &mut ChaCha8Rng) -> JointDecoderPMF {
    let mut slice = || {
        let e: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.gen::<f64>()).ln());
        let s: f64 = e.iter().sum();
        e.map(|v| v / s)
    };
    let (a, b) = (slice(), slice());
    JointDecoderPMF::from_free(&[a[0], a[1], a[3], b[0], b[1], b[3]]).expect("normalized")
}

fn universal_checks() -> Vec<Check> {
    let fam = "universal";
    let mut checks = Vec::new();
    let model = SourceModel::new(0.2, 0.05).expect("valid");

    match theta_boundary(&model, 0.1).and_then(|t| t.residuals(&model, 0.1)) {
        Ok(res) => checks.push(Check::new(
            fam,
            "boundary equations at r = 0.1",
            res[0].abs().max(res[1].abs()),
            1e-10,
        )),
        Err(e) => checks.push(Check::errored(fam, "boundary equations at r = 0.1", 1e-10, &e)),
    }

    let grid = GridSpec::new(PG_STARTS, SEED).expect("valid");
    for r in [0.05, 0.1, 0.2] {
        let fw = rate_penalty_lower(&model, r).and_then(|lb| Ok((lb, rate_penalty_upper(&model, r)?)));
        let pg = projected_gradient_oracle(&model, r, PgProblem::Lb, grid)
            .and_then(|lb| Ok((lb, projected_gradient_oracle(&model, r, PgProblem::Ub, grid)?)));
        match (fw, pg) {
            (Ok((lb, ub)), Ok((plb, pub_))) => {
                checks.push(Check::new(
                    fam,
                    format!("r = {r}: lower <= upper"),
                    (lb.rate.get() - ub.rate.get()).max(0.0),
                    1e-8,
                ));
                checks.push(Check::new(
                    fam,
                    format!("r = {r}: lower vs projected gradient"),
                    (lb.rate.get() - plb.value.get()).abs(),
                    1e-4,
                ));
                checks.push(Check::new(
                    fam,
                    format!("r = {r}: upper vs projected gradient"),
                    (ub.rate.get() - pub_.value.get()).abs(),
                    1e-4,
                ));
                let residual = [lb.max_residual, ub.max_residual, plb.residual, pub_.residual]
                    .into_iter()
                    .fold(0.0, f64::max);
                checks.push(Check::new(fam, format!("r = {r}: constraint residuals"), residual, 1e-9));
            }
            (Err(e), _) | (_, Err(e)) => checks.push(Check::errored(fam, format!("r = {r}"), 1e-4, &e)),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let q = model.q_x();
    let excess = (0..10_000)
        .map(|_| {
            let p = random_pmf(&mut rng);
            i_lb(q, &p).get() - mutual_information_exact(q, &p).get()
        })
        .fold(0.0, f64::max);
    checks.push(Check::new(fam, "I_LB <= I on 10^4 decoders", excess, 1e-12));
    checks
}
