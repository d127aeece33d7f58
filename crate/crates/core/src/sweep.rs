//! Sampled curves and their CSV / JSON encodings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Significant digits written for every sample coordinate.
pub const SIGNIFICANT_DIGITS: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Rdc,
    Drc,
    Dc,
    UniversalLb,
    UniversalUb,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub kind: SweepKind,
    pub infeasible_samples: usize,
}

/// A curve `y(x)` with the parameters that generated it. Samples are strictly
/// increasing in `x`; infeasible points are dropped and counted in `meta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSweep {
    pub params: BTreeMap<String, Value>,
    pub meta: SweepMeta,
    pub samples: Vec<Sample>,
}

impl CurveSweep {
    pub fn new(kind: SweepKind, params: BTreeMap<String, Value>) -> Self {
        CurveSweep {
            params,
            meta: SweepMeta {
                kind,
                infeasible_samples: 0,
            },
            samples: Vec::new(),
        }
    }

    /// Assembles a sweep from per-sample results in grid order. Infeasible
    /// samples are skipped and counted; any other error aborts with the
    /// sample's index attached.
    pub fn collect<I>(kind: SweepKind, params: BTreeMap<String, Value>, results: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Result<f64>)>,
    {
        let mut sweep = CurveSweep::new(kind, params);
        for (index, (x, y)) in results.into_iter().enumerate() {
            match y {
                Ok(y) => sweep.push(x, y)?,
                Err(e) if e.is_infeasible() => sweep.meta.infeasible_samples += 1,
                Err(e) => {
                    return Err(Error::AtSample {
                        index,
                        x,
                        source: Box::new(e),
                    })
                }
            }
        }
        Ok(sweep)
    }

    pub fn push(&mut self, x: f64, y: f64) -> Result<()> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Config(format!("non-finite sample ({x}, {y})")));
        }
        if let Some(last) = self.samples.last() {
            if x <= last.x {
                return Err(Error::Config(format!(
                    "sample x = {x} does not increase past {}",
                    last.x
                )));
            }
        }
        self.samples.push(Sample { x, y });
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{}", format_decimal(s.x), format_decimal(s.y));
        }
        out
    }

    /// JSON whose sample numbers are exactly the CSV's decimal strings read
    /// back, so the two encodings never disagree.
    pub fn to_json(&self) -> String {
        let rounded: Vec<Sample> = self
            .samples
            .iter()
            .map(|s| Sample {
                x: round_significant(s.x),
                y: round_significant(s.y),
            })
            .collect();
        let doc = CurveSweep {
            params: self.params.clone(),
            meta: self.meta.clone(),
            samples: rounded,
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("sweep serializes");
        text.push('\n');
        text
    }
}

/// `v` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(v: f64) -> f64 {
    format_decimal(v).parse().expect("decimal string parses")
}

/// Plain decimal notation with at most 15 significant digits and no trailing
/// zeros, independent of locale.
pub fn format_decimal(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exponent >= 0 {
        let int_len = exponent as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat('0').take(int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    } else {
        out.push_str("0.");
        out.extend(std::iter::repeat('0').take((-exponent - 1) as usize));
        out.push_str(&digits);
    }
    if out.contains('.') {
        let trimmed = out.trim_end_matches('0').trim_end_matches('.').len();
        out.truncate(trimmed);
    }
    out
}
