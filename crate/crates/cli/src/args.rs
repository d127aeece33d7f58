//! Flags, mirrored one-to-one by the TOML config sections.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "rdc", version, about = "Rate-distortion-classification curves for Bernoulli sources")]
pub struct Cli {
    /// TOML file with one table per subcommand; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Minimum rate versus distortion at a fixed classification budget.
    RdcCurve(RdcCurveArgs),
    /// Minimum distortion versus rate (fixed C) or versus C (fixed rate).
    DrcCurve(DrcCurveArgs),
    /// Lower boundary D(C) of the achievable region for a fixed representation.
    DcRegion(DcRegionArgs),
    /// Distortion-versus-C curves at the lower and upper universal rates.
    Universal(UniversalArgs),
    /// Run the oracle suite and report per-check residuals.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Oneshot,
    Asymptotic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Oneshot => "oneshot",
            Mode::Asymptotic => "asymptotic",
        }
    }
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    R,
    C,
}

#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct RdcCurveArgs {
    #[arg(long)]
    pub q_x: Option<f64>,
    #[arg(long)]
    pub q_s1: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub d_min: Option<f64>,
    #[arg(long)]
    pub d_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; relative paths resolve against $RDC_OUTPUT_DIR when set.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct DrcCurveArgs {
    #[arg(long)]
    pub q_x: Option<f64>,
    #[arg(long)]
    pub q_s1: Option<f64>,
    /// Hold C fixed and sweep the rate.
    #[arg(long, conflicts_with = "r_fixed")]
    pub c_fixed: Option<f64>,
    /// Hold the rate fixed and sweep C.
    #[arg(long)]
    pub r_fixed: Option<f64>,
    /// Must name the variable that is not fixed; inferred when omitted.
    #[arg(long, value_enum)]
    pub sweep_axis: Option<Axis>,
    /// Sweep interval as MIN,MAX.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_name = "MIN,MAX")]
    pub range: Option<Vec<f64>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; relative paths resolve against $RDC_OUTPUT_DIR when set.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct DcRegionArgs {
    /// JSON file `{"q": [...], "eps": [...]}`.
    #[arg(long)]
    pub channel_file: Option<PathBuf>,
    #[arg(long)]
    pub q_s1: Option<f64>,
    /// Defaults to the smallest feasible budget.
    #[arg(long)]
    pub c_min: Option<f64>,
    #[arg(long)]
    pub c_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; relative paths resolve against $RDC_OUTPUT_DIR when set.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct UniversalArgs {
    #[arg(long)]
    pub q_x: Option<f64>,
    #[arg(long)]
    pub q_s1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long)]
    pub c_samples: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Base path; `_lb` and `_ub` go before the extension. Relative paths
    /// resolve against $RDC_OUTPUT_DIR when set.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct VerifyArgs {
    /// all, oneshot, dc or universal.
    #[arg(long)]
    pub scope: Option<String>,
    /// Points per axis for every grid oracle.
    #[arg(long)]
    pub resolution: Option<usize>,
}

/// Fills unset fields of `self` from `base`.
pub trait Merge {
    fn merge(self, base: Self) -> Self;
}

macro_rules! merge_fields {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl Merge for $ty {
            fn merge(self, base: Self) -> Self {
                Self { $($field: self.$field.or(base.$field),)* }
            }
        }
    };
}

merge_fields!(RdcCurveArgs { q_x, q_s1, c, d_min, d_max, samples, mode, format, output });
merge_fields!(DcRegionArgs { channel_file, q_s1, c_min, c_max, samples, format, output });
merge_fields!(UniversalArgs { q_x, q_s1, r, c_samples, format, output });
merge_fields!(VerifyArgs { scope, resolution });

impl Merge for DrcCurveArgs {
    fn merge(self, base: Self) -> Self {
        // A fixed variable given on the command line replaces the config's
        // choice of which variable is fixed.
        let (c_fixed, r_fixed) = if self.c_fixed.is_some() || self.r_fixed.is_some() {
            (self.c_fixed, self.r_fixed)
        } else {
            (base.c_fixed, base.r_fixed)
        };
        DrcCurveArgs {
            q_x: self.q_x.or(base.q_x),
            q_s1: self.q_s1.or(base.q_s1),
            c_fixed,
            r_fixed,
            sweep_axis: self.sweep_axis.or(base.sweep_axis),
            range: self.range.or(base.range),
            samples: self.samples.or(base.samples),
            mode: self.mode.or(base.mode),
            format: self.format.or(base.format),
            output: self.output.or(base.output),
        }
    }
}

/// The config file: one optional table per subcommand.
#[derive(Deserialize, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub rdc_curve: RdcCurveArgs,
    #[serde(default)]
    pub drc_curve: DrcCurveArgs,
    #[serde(default)]
    pub dc_region: DcRegionArgs,
    #[serde(default)]
    pub universal: UniversalArgs,
    #[serde(default)]
    pub verify: VerifyArgs,
}
