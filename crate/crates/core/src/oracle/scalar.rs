//! The one-shot problems as a one-variable LP in `a`, the weight on the
//! identity map, solved by intersecting the intervals each affine constraint
//! allows.

use super::ORACLE_SLACK;
use crate::binary_info::{binary_entropy, Bits, Probability, SourceModel};
use crate::error::{Error, Result};
use crate::oneshot::OperatingPoint;

/// `(lo, hi)` with `lo > hi` meaning empty.
type Interval = (f64, f64);

fn intersect(a: Interval, b: Interval) -> Interval {
    (a.0.max(b.0), a.1.min(b.1))
}

struct Scalars {
    qx: f64,
    hx: f64,
    hs1: f64,
    hm: f64,
}

impl Scalars {
    fn of(model: &SourceModel) -> Self {
        let qx = model.q_x().get();
        let qs1 = model.q_s1().get();
        let m = (1.0 - qx) * (1.0 - qs1) + qx * qs1;
        Scalars {
            qx,
            hx: binary_entropy(model.q_x()).get(),
            hs1: binary_entropy(model.q_s1()).get(),
            hm: binary_entropy(Probability::new(m).expect("m is a probability")).get(),
        }
    }

    /// `{a : a H(q_s1) + (1 - a) H(m) <= c}` within `[0, 1]`.
    fn task(&self, c: f64) -> Result<Interval> {
        let slope = self.hs1 - self.hm;
        let room = c - self.hm;
        let iv = if slope < 0.0 {
            (room / slope, 1.0)
        } else if room >= -ORACLE_SLACK {
            (0.0, 1.0)
        } else {
            (1.0, 0.0)
        };
        let iv = intersect(iv, (0.0, 1.0));
        if iv.0 > iv.1 + ORACLE_SLACK {
            return Err(Error::InfeasibleClassification {
                c,
                threshold: self.hs1,
            });
        }
        Ok(iv)
    }
}

/// `min H(q_x) a` over `a in [0, 1]` with `q_x (1 - a) <= D` and the task
/// row.
pub fn scalar_lp_oracle_rdc(model: &SourceModel, point: &OperatingPoint) -> Result<Bits> {
    let s = Scalars::of(model);
    let d = point.d.get();
    let distortion = if s.qx > 0.0 { (1.0 - d / s.qx, 1.0) } else { (0.0, 1.0) };
    let iv = intersect(s.task(point.c.get())?, distortion);
    if iv.0 > iv.1 + ORACLE_SLACK {
        return Err(Error::Infeasible(format!(
            "no weight a satisfies both rows: [{}, {}]",
            iv.0, iv.1
        )));
    }
    Ok(Bits::new(s.hx * iv.0.max(0.0))?)
}

/// `min q_x (1 - a)` over `a in [0, 1]` with `H(q_x) a <= r` and the task
/// row.
pub fn scalar_lp_oracle_drc(model: &SourceModel, r: f64, c: f64) -> Result<Probability> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain {
            name: "r",
            value: r,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let s = Scalars::of(model);
    let task = s.task(c)?;
    let rate = if s.hx > 0.0 { (0.0, r / s.hx) } else { (0.0, 1.0) };
    let iv = intersect(task, rate);
    if iv.0 > iv.1 + ORACLE_SLACK {
        return Err(Error::RateInsufficient {
            rate: r,
            required: s.hx * task.0,
        });
    }
    let a = iv.1.max(iv.0).min(1.0);
    Ok(Probability::new(s.qx * (1.0 - a))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(qx: f64, qs1: f64) -> SourceModel {
        SourceModel::new(qx, qs1).unwrap()
    }

    fn pt(d: f64, c: f64) -> OperatingPoint {
        OperatingPoint::new(d, c).unwrap()
    }

    // Frozen from an mpmath evaluation at 40 digits.
    const PLATEAU_C08: f64 = 0.5898889466359913;
    const BREAKPOINT_C08: f64 = 0.0991960609768269;
    const H_03: f64 = 0.8812908992306926;

    #[test]
    fn rdc_examples() {
        let m = model(0.3, 0.2);
        let v = scalar_lp_oracle_rdc(&m, &pt(0.5, 0.8)).unwrap().get();
        assert!((v - PLATEAU_C08).abs() < 1e-12);
        assert_eq!(scalar_lp_oracle_rdc(&m, &pt(0.3, 1.0)).unwrap().get(), 0.0);
        assert!((scalar_lp_oracle_rdc(&m, &pt(0.0, 0.8)).unwrap().get() - H_03).abs() < 1e-15);
        assert!(matches!(
            scalar_lp_oracle_rdc(&m, &pt(0.2, 0.5)),
            Err(Error::InfeasibleClassification { .. })
        ));
    }

    #[test]
    fn drc_examples() {
        let m = model(0.3, 0.2);
        assert_eq!(scalar_lp_oracle_drc(&m, 1.0, 1.0).unwrap().get(), 0.0);
        assert!((scalar_lp_oracle_drc(&m, 0.0, 1.0).unwrap().get() - 0.3).abs() < 1e-15);
        // The classification row needs a >= 0.669..., i.e. rate >= the plateau.
        match scalar_lp_oracle_drc(&m, 0.4, 0.8) {
            Err(Error::RateInsufficient { required, .. }) => {
                assert!((required - PLATEAU_C08).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        let at = scalar_lp_oracle_drc(&m, PLATEAU_C08, 0.8).unwrap().get();
        assert!((at - BREAKPOINT_C08).abs() < 1e-12);
    }
}
