use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rdc_core::binary_info::{binary_entropy, Probability, SourceModel};
use rdc_core::dc_region::{dc_boundary_curve, dc_feasibility_threshold, RepresentationChannel};
use rdc_core::error::{Error, Result as CoreResult};
use rdc_core::oneshot::{asymptotic_drc, asymptotic_rdc, feasible, oneshot_drc, oneshot_rdc, OperatingPoint};
use rdc_core::sweep::{CurveSweep, SweepKind};
use rdc_core::universal::{rate_penalty_bounds, theta_boundary};
use rdc_core::verify::{run_verification, VerifyScope};
use serde_json::Value;

use crate::args::{
    Axis, Cli, Command, ConfigFile, DcRegionArgs, DrcCurveArgs, Format, Merge, Mode, RdcCurveArgs, UniversalArgs,
    VerifyArgs,
};
use crate::output::{emit, resolve, with_suffix, write_file};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;

const DEFAULT_SAMPLES: usize = 101;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INFEASIBLE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_infeasible() {
            EXIT_INFEASIBLE
        } else {
            match e {
                // The computation ran but its result could not be certified.
                Error::Convergence { .. } | Error::SolverDisagreement(_) => EXIT_VERIFY,
                Error::AtSample { ref source, .. }
                    if matches!(**source, Error::Convergence { .. } | Error::SolverDisagreement(_)) =>
                {
                    EXIT_VERIFY
                }
                _ => EXIT_INVALID,
            }
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

pub fn run(cli: Cli) -> Outcome {
    let config = match &cli.config {
        Some(path) => load_config(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::RdcCurve(a) => rdc_curve(a.merge(config.rdc_curve)),
        Command::DrcCurve(a) => drc_curve(a.merge(config.drc_curve)),
        Command::DcRegion(a) => dc_region(a.merge(config.dc_region)),
        Command::Universal(a) => universal(a.merge(config.universal)),
        Command::Verify(a) => verify(a.merge(config.verify)),
    }
}

fn load_config(path: &Path) -> Result<ConfigFile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::invalid(format!("config {}: {e}", path.display())))
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::invalid(format!("missing --{flag} (flag or config)")))
}

/// `samples` evenly spaced points from `lo` to `hi`, both included.
fn linspace(lo: f64, hi: f64, samples: usize, what: &str) -> Result<Vec<f64>, Failure> {
    if samples < 2 {
        return Err(Failure::invalid(format!("need at least 2 samples, got {samples}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Failure::invalid(format!("{what} range must satisfy min < max, got [{lo}, {hi}]")));
    }
    let last = (samples - 1) as f64;
    Ok((0..samples)
        .map(|i| if i + 1 == samples { hi } else { lo + (hi - lo) * i as f64 / last })
        .collect())
}

fn unit_interval(value: f64, flag: &str) -> Result<f64, Failure> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Failure::invalid(format!("--{flag} = {value} must lie in [0, 1]")))
    }
}

fn classification_threshold(model: &SourceModel, c: f64) -> Result<(), Failure> {
    if feasible(model, c) {
        Ok(())
    } else {
        Err(Error::InfeasibleClassification {
            c,
            threshold: binary_entropy(model.q_s1()).get(),
        }
        .into())
    }
}

fn params(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn sweep_parallel<F>(xs: &[f64], f: F) -> Vec<(f64, CoreResult<f64>)>
where
    F: Fn(f64) -> CoreResult<f64> + Sync,
{
    let ys: Vec<CoreResult<f64>> = xs.par_iter().map(|&x| f(x)).collect();
    xs.iter().copied().zip(ys).collect()
}

fn rdc_curve(a: RdcCurveArgs) -> Outcome {
    let model = SourceModel::new(need(a.q_x, "q-x")?, need(a.q_s1, "q-s1")?)?;
    let c = unit_interval(need(a.c, "c")?, "c")?;
    let d_min = unit_interval(a.d_min.unwrap_or(0.0), "d-min")?;
    let d_max = unit_interval(a.d_max.unwrap_or(1.0), "d-max")?;
    let samples = a.samples.unwrap_or(DEFAULT_SAMPLES);
    let mode = a.mode.unwrap_or(Mode::Oneshot);
    let format = a.format.unwrap_or(Format::Csv);
    let ds = linspace(d_min, d_max, samples, "distortion")?;
    classification_threshold(&model, c)?;

    let results = sweep_parallel(&ds, |d| {
        let point = OperatingPoint::new(d, c)?;
        match mode {
            Mode::Oneshot => oneshot_rdc(&model, &point).map(|s| s.rate.get()),
            Mode::Asymptotic => asymptotic_rdc(&model, &point).map(|r| r.get()),
        }
    });
    let p = params(&[
        ("q_x", model.q_x().get().into()),
        ("q_s1", model.q_s1().get().into()),
        ("c", c.into()),
        ("d_min", d_min.into()),
        ("d_max", d_max.into()),
        ("samples", samples.into()),
        ("mode", mode.name().into()),
    ]);
    let sweep = CurveSweep::collect(SweepKind::Rdc, p, results)?;
    emit(&sweep, format, a.output.as_deref(), "rdc-curve")?;
    Ok(EXIT_OK)
}

fn drc_curve(a: DrcCurveArgs) -> Outcome {
    let model = SourceModel::new(need(a.q_x, "q-x")?, need(a.q_s1, "q-s1")?)?;
    let (axis, fixed) = match (a.c_fixed, a.r_fixed) {
        (Some(c), None) => (Axis::R, c),
        (None, Some(r)) => (Axis::C, r),
        _ => return Err(Failure::invalid("give exactly one of --c-fixed and --r-fixed")),
    };
    if let Some(requested) = a.sweep_axis {
        if requested != axis {
            return Err(Failure::invalid("--sweep-axis must name the variable that is not fixed"));
        }
    }
    let samples = a.samples.unwrap_or(DEFAULT_SAMPLES);
    let mode = a.mode.unwrap_or(Mode::Oneshot);
    let format = a.format.unwrap_or(Format::Csv);
    let (lo, hi) = match a.range.as_deref() {
        Some([lo, hi]) => (*lo, *hi),
        Some(other) => return Err(Failure::invalid(format!("--range takes MIN,MAX, got {other:?}"))),
        None => match axis {
            Axis::R => (0.0, binary_entropy(model.q_x()).get()),
            Axis::C => (binary_entropy(model.q_s1()).get(), 1.0),
        },
    };
    let xs = linspace(lo, hi, samples, "sweep")?;
    let distortion = |r: f64, c: f64| match mode {
        Mode::Oneshot => oneshot_drc(&model, r, c).map(|s| s.distortion.get()),
        Mode::Asymptotic => asymptotic_drc(&model, r, c).map(|d| d.get()),
    };

    let (results, fixed_key, axis_name) = match axis {
        Axis::R => {
            let c = unit_interval(fixed, "c-fixed")?;
            if lo < 0.0 {
                return Err(Failure::invalid(format!("rates must be nonnegative, got {lo}")));
            }
            classification_threshold(&model, c)?;
            (sweep_parallel(&xs, |r| distortion(r, c)), "c_fixed", "r")
        }
        Axis::C => {
            if !(fixed.is_finite() && fixed >= 0.0) {
                return Err(Failure::invalid(format!("--r-fixed = {fixed} must be a nonnegative rate")));
            }
            unit_interval(lo, "range")?;
            unit_interval(hi, "range")?;
            (sweep_parallel(&xs, |c| distortion(fixed, c)), "r_fixed", "c")
        }
    };
    let p = params(&[
        ("q_x", model.q_x().get().into()),
        ("q_s1", model.q_s1().get().into()),
        (fixed_key, fixed.into()),
        ("sweep_axis", axis_name.into()),
        ("range", vec![lo, hi].into()),
        ("samples", samples.into()),
        ("mode", mode.name().into()),
    ]);
    let sweep = CurveSweep::collect(SweepKind::Drc, p, results)?;
    emit(&sweep, format, a.output.as_deref(), "drc-curve")?;
    Ok(EXIT_OK)
}

fn dc_region(a: DcRegionArgs) -> Outcome {
    let path = need(a.channel_file, "channel-file")?;
    let text = fs::read_to_string(&path)
        .map_err(|e| Failure::invalid(format!("cannot read channel file {}: {e}", path.display())))?;
    let channel = RepresentationChannel::from_json(&text)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let q_s1 = Probability::named("q_s1", need(a.q_s1, "q-s1")?)?;
    let c_min = match a.c_min {
        Some(c) => unit_interval(c, "c-min")?,
        None => dc_feasibility_threshold(&channel, q_s1)?.get(),
    };
    let c_max = unit_interval(a.c_max.unwrap_or(1.0), "c-max")?;
    let cs = linspace(c_min, c_max, a.samples.unwrap_or(DEFAULT_SAMPLES), "classification")?;
    let sweep = dc_boundary_curve(&channel, q_s1, &cs)?;
    emit(&sweep, a.format.unwrap_or(Format::Csv), a.output.as_deref(), "dc-region")?;
    Ok(EXIT_OK)
}

fn universal(a: UniversalArgs) -> Outcome {
    let model = SourceModel::new(need(a.q_x, "q-x")?, need(a.q_s1, "q-s1")?)?;
    let r = need(a.r, "r")?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(Failure::invalid(format!("--r = {r} must be a nonnegative rate")));
    }
    let format = a.format.unwrap_or(Format::Csv);
    if let Err(e) = theta_boundary(&model, r) {
        return Err(match e {
            Error::Domain { hi, .. } => Failure::infeasible(format!("r = {r} lies outside the admissible interval (0, {hi}]")),
            other => other.into(),
        });
    }
    let bounds = rate_penalty_bounds(&model, r)?;
    let (r_lb, r_ub) = (bounds.r_lb.get(), bounds.r_ub.get());
    eprintln!("r_lb = {r_lb}, r_ub = {r_ub}");

    let c_lo = binary_entropy(model.q_s1()).get();
    let cs = linspace(c_lo, 1.0, a.c_samples.unwrap_or(DEFAULT_SAMPLES), "classification")?;
    let base = resolve(
        &a.output
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("universal.{}", format.extension()))),
    );
    for (kind, rate, suffix) in [(SweepKind::UniversalLb, r_lb, "_lb"), (SweepKind::UniversalUb, r_ub, "_ub")] {
        let results = sweep_parallel(&cs, |c| asymptotic_drc(&model, rate, c).map(|d| d.get()));
        let p = params(&[
            ("q_x", model.q_x().get().into()),
            ("q_s1", model.q_s1().get().into()),
            ("r", r.into()),
            ("rate", rate.into()),
            ("r_lb", r_lb.into()),
            ("r_ub", r_ub.into()),
        ]);
        let sweep = CurveSweep::collect(kind, p, results)?;
        let text = crate::output::render(&sweep, format);
        write_file(&with_suffix(&base, suffix), &text)?;
    }
    Ok(EXIT_OK)
}

fn verify(a: VerifyArgs) -> Outcome {
    let scope: VerifyScope = a.scope.as_deref().unwrap_or("all").parse()?;
    let report = run_verification(scope, a.resolution)?;
    println!("{report}");
    Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_hits_both_ends() {
        let xs = linspace(0.1, 0.7, 7, "x").unwrap();
        assert_eq!(xs.len(), 7);
        assert_eq!((xs[0], xs[6]), (0.1, 0.7));
        assert!(linspace(0.5, 0.5, 3, "x").is_err());
        assert!(linspace(0.0, 1.0, 1, "x").is_err());
    }

    #[test]
    fn error_codes() {
        let f: Failure = Error::RateInsufficient { rate: 0.1, required: 0.2 }.into();
        assert_eq!(f.code, EXIT_INFEASIBLE);
        let f: Failure = Error::Config("x".into()).into();
        assert_eq!(f.code, EXIT_INVALID);
        let f: Failure = Error::SolverDisagreement("x".into()).into();
        assert_eq!(f.code, EXIT_VERIFY);
    }
}
