//! Closed-form rate-distortion-classification tradeoffs for the Bernoulli
//! model: the one-shot RDC and DRC functions under common randomness, and the
//! asymptotic (block-coding) RDC function.
//!
//! With common randomness the reconstruction is a random mixture of the four
//! deterministic maps `x -> x`, `x -> 1-x`, `x -> 0`, `x -> 1`. Writing `a` for
//! the weight on the identity map, the one-shot problems collapse to a scalar
//! LP in `a` with
//!
//! ```text
//! rate           = H_b(q_x) a
//! distortion     = q_x (1 - a)
//! classification = a H_b(q_s1) + (1 - a) H_b(m)
//! ```
//!
//! and the optimizer always has the form `(a, 0, 1 - a, 0)`.

use serde::Serialize;

use crate::binary_info::{
    binary_entropy, check_classification, entropy_bits, inverse_binary_entropy, mgl_threshold,
    task_prior_m, Bits, Probability, SourceModel, FEASIBILITY_SLACK,
};
use crate::error::{Error, Result};

/// Tolerance when deciding which side of a case boundary a point is on.
const BOUNDARY_SLACK: f64 = 1e-12;

/// A (distortion, classification) requirement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub d: Probability,
    pub c: Bits,
}

impl OperatingPoint {
    pub fn new(d: f64, c: f64) -> Result<Self> {
        let d = Probability::named("d", d)?;
        if !c.is_finite() || c < -1e-12 || c > 1.0 + 1e-12 {
            return Err(Error::Domain {
                name: "c",
                value: c,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(OperatingPoint {
            d,
            c: Bits::clamped(c.min(1.0)),
        })
    }
}

/// Mixture weights over the four deterministic maps
/// `x -> x`, `x -> 1-x`, `x -> 0`, `x -> 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeedDistribution {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

impl SeedDistribution {
    pub fn new(p1: f64, p2: f64, p3: f64, p4: f64) -> Result<Self> {
        let w = [p1, p2, p3, p4];
        if w.iter().any(|&x| !(x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain {
                name: "seed weights",
                value: w.iter().sum(),
                lo: 1.0,
                hi: 1.0,
            });
        }
        Ok(SeedDistribution { p1, p2, p3, p4 })
    }

    /// `(a, 0, 1 - a, 0)`.
    fn identity_or_zero(a: f64) -> Self {
        let a = a.clamp(0.0, 1.0);
        SeedDistribution {
            p1: a,
            p2: 0.0,
            p3: 1.0 - a,
            p4: 0.0,
        }
    }

    /// `H(X_hat | U) = H_b(q_x)(p1 + p2)`.
    pub fn rate(&self, model: &SourceModel) -> f64 {
        entropy_bits(model.q_x().get()) * (self.p1 + self.p2)
    }

    /// `P(X != X_hat) = p2 + q_x p3 + (1 - q_x) p4`.
    pub fn distortion(&self, model: &SourceModel) -> f64 {
        let qx = model.q_x().get();
        self.p2 + qx * self.p3 + (1.0 - qx) * self.p4
    }

    /// `H(S | X_hat) = (p1 + p2) H_b(q_s1) + (p3 + p4) H_b(m)`.
    pub fn classification(&self, model: &SourceModel) -> f64 {
        let hs = entropy_bits(model.q_s1().get());
        let hm = entropy_bits(task_prior_m(model).get());
        (self.p1 + self.p2) * hs + (self.p3 + self.p4) * hm
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RdcSolution {
    pub rate: Bits,
    pub seed: SeedDistribution,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DrcSolution {
    pub distortion: Probability,
    pub seed: SeedDistribution,
}

/// `C >= H_b(q_s1)`, up to round-off slack.
pub fn feasible(model: &SourceModel, c: f64) -> bool {
    c >= binary_entropy(model.q_s1()).get() - FEASIBILITY_SLACK
}

struct Entropies {
    qx: f64,
    hx: f64,
    hs: f64,
    hm: f64,
}

impl Entropies {
    fn of(model: &SourceModel) -> Self {
        Entropies {
            qx: model.q_x().get(),
            hx: binary_entropy(model.q_x()).get(),
            hs: binary_entropy(model.q_s1()).get(),
            hm: binary_entropy(task_prior_m(model)).get(),
        }
    }

    /// `H_b(m) - H_b(q_s1)`, positive whenever `q_x > 0`.
    fn gap(&self) -> f64 {
        self.hm - self.hs
    }
}

/// The D-breakpoint `q_x (C - H_b(q_s1)) / (H_b(m) - H_b(q_s1))` between the
/// distortion-limited and classification-limited branches of the one-shot
/// RDC function.
pub fn rdc_breakpoint(model: &SourceModel, c: f64) -> Result<Probability> {
    check_classification(model, c)?;
    let e = Entropies::of(model);
    if e.qx == 0.0 {
        return Ok(Probability::ZERO);
    }
    Ok(Probability::clamped(e.qx * (c - e.hs) / e.gap()))
}

/// One-shot RDC function with common randomness:
///
/// ```text
/// R(D, C) = H_b(q_x)(q_x - D)/q_x                       D < D*
///         = H_b(q_x)(H_b(m) - C)/(H_b(m) - H_b(q_s1))   D >= D*
///         = 0                                           C >= H_b(m), D >= q_x
/// ```
///
/// with `D* = q_x (C - H_b(q_s1)) / (H_b(m) - H_b(q_s1))`. At `D = D*` the
/// first two branches coincide and the plateau expression is used.
pub fn oneshot_rdc(model: &SourceModel, point: &OperatingPoint) -> Result<RdcSolution> {
    let c = point.c.get();
    check_classification(model, c)?;
    let d = point.d.get();
    let e = Entropies::of(model);

    // A constant source needs no bits: the map x -> 0 is exact.
    if e.qx == 0.0 || e.gap() <= 0.0 {
        return Ok(RdcSolution {
            rate: Bits::ZERO,
            seed: SeedDistribution::identity_or_zero(0.0),
        });
    }

    let breakpoint = e.qx * (c - e.hs) / e.gap();
    let a = if c >= e.hm && d >= e.qx {
        0.0
    } else if d < breakpoint {
        (e.qx - d) / e.qx
    } else {
        (e.hm - c) / e.gap()
    };
    let seed = SeedDistribution::identity_or_zero(a);
    Ok(RdcSolution {
        rate: Bits::clamped(e.hx * seed.p1),
        seed,
    })
}

/// One-shot DRC function with common randomness.
///
/// The classification constraint bounds the identity-map weight from below,
/// `a >= (H_b(m) - C)/(H_b(m) - H_b(q_s1))`, and the rate bounds it from
/// above, `a <= R / H_b(q_x)`. Distortion is minimized by the largest
/// admissible `a`:
///
/// ```text
/// D(R, C) = q_x (H_b(q_x) - R)/H_b(q_x)                 C > C*(R)
///         = q_x (C - H_b(q_s1))/(H_b(m) - H_b(q_s1))     C = C*(R)
///         = 0                                           R >= H_b(q_x)
/// ```
///
/// with `C*(R) = R (H_b(q_s1) - H_b(m))/H_b(q_x) + H_b(m)`. Below `C*(R)` the
/// two bounds cross and the budget pair is unattainable; that is reported as
/// [`Error::RateInsufficient`] with the smallest rate that would work.
pub fn oneshot_drc(model: &SourceModel, r: f64, c: f64) -> Result<DrcSolution> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain {
            name: "r",
            value: r,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    check_classification(model, c)?;
    let e = Entropies::of(model);

    if e.qx == 0.0 || e.gap() <= 0.0 {
        return Ok(DrcSolution {
            distortion: Probability::ZERO,
            seed: SeedDistribution::identity_or_zero(0.0),
        });
    }

    if r >= e.hx {
        return Ok(DrcSolution {
            distortion: Probability::ZERO,
            seed: SeedDistribution::identity_or_zero(1.0),
        });
    }

    let c_star = r * (e.hs - e.hm) / e.hx + e.hm;
    let a = if c > c_star + BOUNDARY_SLACK {
        r / e.hx
    } else if c >= c_star - BOUNDARY_SLACK {
        (e.hm - c) / e.gap()
    } else {
        return Err(Error::RateInsufficient {
            rate: r,
            required: e.hx * (e.hm - c) / e.gap(),
        });
    };
    let seed = SeedDistribution::identity_or_zero(a);
    Ok(DrcSolution {
        distortion: Probability::clamped(e.qx * (1.0 - seed.p1)),
        seed,
    })
}

/// `b = min{ q_x(1-2q_s1)/(1-2q_s1), 1 - q_x(1-2q_s1)/(1-2q_s1) }`, kept in
/// its printed form; it reduces to `min{q_x, 1 - q_x}`.
pub fn asymptotic_b(model: &SourceModel) -> Result<Probability> {
    let qs1 = model.q_s1().get();
    let denom = 1.0 - 2.0 * qs1;
    if denom <= 0.0 {
        return Err(Error::DegenerateModel("1 - 2 q_s1 = 0".into()));
    }
    let ratio = model.q_x().get() * (1.0 - 2.0 * qs1) / denom;
    Ok(Probability::clamped(ratio.min(1.0 - ratio)))
}

/// Asymptotic RDC function (no common randomness, block coding):
///
/// ```text
/// R(D, C) = H(b) - H(D)    D < C0 and D <= b
///         = H(b) - H(C0)   D >= C0 and C0 <= b
///         = 0              min{D, C0} > b
/// ```
pub fn asymptotic_rdc(model: &SourceModel, point: &OperatingPoint) -> Result<Bits> {
    let c0 = mgl_threshold(model, point.c.get())?.get();
    let b = asymptotic_b(model)?.get();
    let d = point.d.get();
    let hb = entropy_bits(b);
    let rate = if d < c0 && d <= b {
        hb - entropy_bits(d)
    } else if d >= c0 && c0 <= b {
        hb - entropy_bits(c0)
    } else {
        0.0
    };
    Ok(Bits::clamped(rate))
}

/// Smallest distortion with `asymptotic_rdc(D, C) <= r`.
///
/// The rate-limited distortion is `D_r = H^-1(H(b) - r)`; it is attainable
/// when the classification threshold admits it (`D_r <= C0`). Otherwise the
/// plateau `H(b) - H(C0)` exceeds `r` for every `D`.
pub fn asymptotic_drc(model: &SourceModel, r: f64, c: f64) -> Result<Probability> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain {
            name: "r",
            value: r,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let c0 = mgl_threshold(model, c)?.get();
    let b = asymptotic_b(model)?.get();
    let hb = entropy_bits(b);
    let d_r = if r >= hb {
        0.0
    } else {
        inverse_binary_entropy(hb - r)?.get()
    };
    if d_r <= c0 + BOUNDARY_SLACK {
        Ok(Probability::clamped(d_r))
    } else {
        Err(Error::RateInsufficient {
            rate: r,
            required: hb - entropy_bits(c0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(qx: f64, qs1: f64) -> SourceModel {
        SourceModel::new(qx, qs1).unwrap()
    }

    fn rdc(qx: f64, qs1: f64, d: f64, c: f64) -> RdcSolution {
        oneshot_rdc(&model(qx, qs1), &OperatingPoint::new(d, c).unwrap()).unwrap()
    }

    fn asym(qx: f64, qs1: f64, d: f64, c: f64) -> f64 {
        asymptotic_rdc(&model(qx, qs1), &OperatingPoint::new(d, c).unwrap())
            .unwrap()
            .get()
    }

    // Frozen from an mpmath evaluation of the same expressions at 40 digits.
    const H_03: f64 = 0.881_290_899_230_692_6;
    const PLATEAU_C08: f64 = 0.589_888_946_635_991_3;
    const BREAKPOINT_C08: f64 = 0.099_196_060_976_826_9;

    #[test]
    fn feasibility_examples() {
        assert!(feasible(&model(0.3, 0.2), 0.8));
        assert!(!feasible(&model(0.3, 0.2), 0.5));
        assert!(feasible(&model(0.3, 0.0), 0.0));
    }

    #[test]
    fn rdc_examples() {
        assert!((rdc(0.3, 0.2, 0.0, 0.8).rate.get() - H_03).abs() < 1e-12);
        assert!((rdc(0.3, 0.2, 0.5, 0.8).rate.get() - PLATEAU_C08).abs() < 1e-12);
        assert_eq!(rdc(0.3, 0.2, 0.5, 0.97).rate.get(), 0.0);
        assert!(
            (rdc_breakpoint(&model(0.3, 0.2), 0.8).unwrap().get() - BREAKPOINT_C08).abs() < 1e-12
        );
    }

    #[test]
    fn rdc_infeasible() {
        let err = oneshot_rdc(&model(0.3, 0.2), &OperatingPoint::new(0.1, 0.5).unwrap());
        assert!(matches!(err, Err(Error::InfeasibleClassification { .. })));
    }

    #[test]
    fn rdc_constant_source() {
        let s = rdc(0.0, 0.1, 0.0, 0.6);
        assert_eq!(s.rate.get(), 0.0);
        assert_eq!(s.seed, SeedDistribution::new(0.0, 0.0, 1.0, 0.0).unwrap());
    }

    #[test]
    fn rdc_exact_equality_corner() {
        // C = H_b(m) and D = q_x: third case by right-continuity.
        let m = model(0.3, 0.2);
        let hm = binary_entropy(task_prior_m(&m)).get();
        assert_eq!(rdc(0.3, 0.2, 0.3, hm).rate.get(), 0.0);
    }

    #[test]
    fn rdc_branches_meet_at_breakpoint() {
        let m = model(0.3, 0.2);
        for c in [0.75, 0.8, 0.85, 0.9, 0.95] {
            let e = Entropies::of(&m);
            let bp = rdc_breakpoint(&m, c).unwrap().get();
            let first = e.hx * (e.qx - bp) / e.qx;
            let second = e.hx * (e.hm - c) / e.gap();
            assert!((first - second).abs() < 1e-12, "c={c}");
            let at = rdc(0.3, 0.2, bp, c).rate.get();
            assert!((at - second.max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn seed_reconstructs_rate_and_constraints() {
        let m = model(0.3, 0.2);
        for (d, c) in [(0.0, 0.8), (0.05, 0.8), (0.5, 0.8), (0.2, 0.97), (0.31, 0.99)] {
            let s = rdc(0.3, 0.2, d, c);
            assert!((s.seed.rate(&m) - s.rate.get()).abs() < 1e-12);
            assert!(s.seed.distortion(&m) <= d + 1e-12);
            assert!(s.seed.classification(&m) <= c + 1e-12);
        }
    }

    #[test]
    fn drc_examples() {
        let m = model(0.3, 0.2);
        assert_eq!(oneshot_drc(&m, 1.0, 0.97).unwrap().distortion.get(), 0.0);
        assert!((oneshot_drc(&m, 0.0, 1.0).unwrap().distortion.get() - 0.3).abs() < 1e-15);
        // At the boundary rate the classification-binding value appears.
        let at = oneshot_drc(&m, PLATEAU_C08, 0.8).unwrap().distortion.get();
        assert!((at - BREAKPOINT_C08).abs() < 1e-9, "{at}");
    }

    #[test]
    fn drc_rate_insufficient_below_boundary() {
        let m = model(0.3, 0.2);
        match oneshot_drc(&m, 0.4, 0.8) {
            Err(Error::RateInsufficient { required, .. }) => {
                assert!((required - PLATEAU_C08).abs() < 1e-12)
            }
            other => panic!("expected RateInsufficient, got {other:?}"),
        }
    }

    #[test]
    fn drc_branches_meet_at_c_breakpoint() {
        let m = model(0.3, 0.2);
        let e = Entropies::of(&m);
        for r in [0.2, 0.5, 0.7] {
            let c_star = r * (e.hs - e.hm) / e.hx + e.hm;
            let first = e.qx * (e.hx - r) / e.hx;
            let second = e.qx * (c_star - e.hs) / e.gap();
            assert!((first - second).abs() < 1e-12);
        }
    }

    #[test]
    fn drc_inverts_rdc() {
        let m = model(0.3, 0.2);
        for (d, c) in [(0.05, 0.8), (0.2, 0.8), (0.1, 0.9), (0.02, 0.75)] {
            let r = rdc(0.3, 0.2, d, c).rate.get();
            let back = oneshot_drc(&m, r, c).unwrap().distortion.get();
            assert!(back <= d + 1e-9, "d={d} c={c} back={back}");
        }
    }

    #[test]
    fn b_examples() {
        assert!((asymptotic_b(&model(0.3, 0.2)).unwrap().get() - 0.3).abs() < 1e-15);
        assert!((asymptotic_b(&model(0.2, 0.05)).unwrap().get() - 0.2).abs() < 1e-15);
        assert_eq!(asymptotic_b(&model(0.5, 0.3)).unwrap().get(), 0.5);
    }

    #[test]
    fn asymptotic_examples() {
        assert!(asym(0.3, 0.2, 0.3, 1.0).abs() < 1e-15);
        assert!((asym(0.3, 0.2, 0.05, 1.0) - 0.594_893_942_114_736_5).abs() < 1e-12);
        assert!((asym(0.3, 0.2, 0.25, 0.8) - 0.509_154_397_100_007_5).abs() < 1e-9);
    }

    #[test]
    fn asymptotic_continuous_at_c0() {
        let m = model(0.3, 0.2);
        let c0 = mgl_threshold(&m, 0.8).unwrap().get();
        let below = asym(0.3, 0.2, c0 - 1e-12, 0.8);
        let at = asym(0.3, 0.2, c0, 0.8);
        assert!((below - at).abs() < 1e-9);
    }

    #[test]
    fn asymptotic_drc_inverts_rdc() {
        let m = model(0.2, 0.05);
        for (d, c) in [(0.05, 0.9), (0.1, 0.95), (0.15, 1.0)] {
            let r = asym(0.2, 0.05, d, c);
            let back = asymptotic_drc(&m, r, c).unwrap().get();
            assert!((back - d).abs() < 1e-9, "d={d} back={back}");
        }
        // Rate too small for a tight classification budget.
        let c0 = mgl_threshold(&m, 0.5).unwrap().get();
        let plateau = entropy_bits(0.2) - entropy_bits(c0);
        assert!(matches!(
            asymptotic_drc(&m, 0.5 * plateau, 0.5),
            Err(Error::RateInsufficient { .. })
        ));
    }
}
