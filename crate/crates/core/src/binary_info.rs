//! Binary-entropy arithmetic shared by every other module.
//!
//! All entropies are in bits. The model quantities derived here are
//!
//! * `m = (1 - q_x)(1 - q_s1) + q_x q_s1 = P(S = 0)`, the task prior seen by a
//!   constant reconstruction,
//! * `q_s = q_x * q_s1` (binary convolution), so that `S ~ Bern(q_s)`,
//! * `C0 = (H^-1(C) - q_s1) / (1 - 2 q_s1)`, the crossover threshold that a
//!   classification budget `C` translates into.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Slack absorbed when validating probabilities and entropies that come out
/// of floating-point arithmetic.
pub const INPUT_SLACK: f64 = 1e-12;

/// Slack on the feasibility test `C >= H_b(q_s1)`.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

const INVERSE_MAX_ITERATIONS: usize = 200;

/// A probability in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const HALF: Probability = Probability(0.5);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        Self::named("probability", value)
    }

    /// Like [`Probability::new`] but reports `name` in the domain error.
    pub fn named(name: &'static str, value: f64) -> Result<Self> {
        if !value.is_finite() || value < -INPUT_SLACK || value > 1.0 + INPUT_SLACK {
            return Err(Error::Domain {
                name,
                value,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Probability(value.clamp(0.0, 1.0)))
    }

    /// Clamps an already-computed quantity into `[0, 1]`. Only for values
    /// that are probabilities by construction and may carry round-off.
    pub(crate) fn clamped(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A nonnegative information quantity in bits.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Bits(f64);

impl Bits {
    pub const ZERO: Bits = Bits(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < -INPUT_SLACK {
            return Err(Error::Domain {
                name: "bits",
                value,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Bits(value.max(0.0)))
    }

    pub(crate) fn clamped(value: f64) -> Self {
        Bits(value.max(0.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<Bits> for f64 {
    fn from(b: Bits) -> f64 {
        b.0
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Bernoulli source `X ~ Bern(q_x)` coupled to the task `S = X xor S1` with
/// `S1 ~ Bern(q_s1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SourceModel {
    q_x: Probability,
    q_s1: Probability,
}

impl SourceModel {
    /// Requires `0 <= q_x <= 1/2` and `0 <= q_s1 < 1/2`. `q_s1 = 1/2` makes the
    /// task independent of the source and every closed form divides by zero.
    pub fn new(q_x: f64, q_s1: f64) -> Result<Self> {
        let q_x = Probability::named("q_x", q_x)?;
        let q_s1 = Probability::named("q_s1", q_s1)?;
        if q_x.get() > 0.5 {
            return Err(Error::Domain {
                name: "q_x",
                value: q_x.get(),
                lo: 0.0,
                hi: 0.5,
            });
        }
        if q_s1.get() > 0.5 {
            return Err(Error::Domain {
                name: "q_s1",
                value: q_s1.get(),
                lo: 0.0,
                hi: 0.5,
            });
        }
        if q_s1.get() == 0.5 {
            return Err(Error::DegenerateModel(
                "q_s1 = 1/2 leaves the task independent of the source".into(),
            ));
        }
        Ok(SourceModel { q_x, q_s1 })
    }

    pub fn q_x(&self) -> Probability {
        self.q_x
    }

    pub fn q_s1(&self) -> Probability {
        self.q_s1
    }

    /// `P(S = 1)`.
    pub fn q_s(&self) -> Probability {
        binary_convolution(self.q_x, self.q_s1)
    }
}

/// `H_b(p) = -p log2 p - (1-p) log2 (1-p)` with `0 log 0 = 0`.
pub fn binary_entropy(p: Probability) -> Bits {
    Bits(entropy_bits(p.get()))
}

/// Unchecked binary entropy of a value already known to lie in `[0, 1]`.
pub(crate) fn entropy_bits(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// The unique `p` in `[0, 1/2]` with `H_b(p) = h`, by bisection on `[0, 1/2]`.
///
/// The bracket is shrunk until it stops changing (well below 1e-12) or
/// 200 halvings, whichever comes first.
pub fn inverse_binary_entropy(h: f64) -> Result<Probability> {
    if !h.is_finite() || h < -INPUT_SLACK || h > 1.0 + INPUT_SLACK {
        return Err(Error::Domain {
            name: "entropy",
            value: h,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if h <= 0.0 {
        return Ok(Probability::ZERO);
    }
    if h >= 1.0 {
        return Ok(Probability::HALF);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..INVERSE_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if entropy_bits(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick the bracket end whose entropy is closer to the target.
    let p = if (entropy_bits(lo) - h).abs() <= (entropy_bits(hi) - h).abs() {
        lo
    } else {
        hi
    };
    Ok(Probability(p))
}

/// `a * b = a(1-b) + b(1-a)`: parameter of the xor of independent
/// `Bern(a)` and `Bern(b)` variables.
pub fn binary_convolution(a: Probability, b: Probability) -> Probability {
    let (a, b) = (a.get(), b.get());
    Probability::clamped(a * (1.0 - b) + b * (1.0 - a))
}

/// `m = (1 - q_x)(1 - q_s1) + q_x q_s1 = P(S = 0)`.
pub fn task_prior_m(model: &SourceModel) -> Probability {
    let (qx, qs1) = (model.q_x.get(), model.q_s1.get());
    Probability::clamped((1.0 - qx) * (1.0 - qs1) + qx * qs1)
}

/// Whether a classification budget is attainable at all: `c >= H_b(q_s1)`.
pub fn classification_feasible(model: &SourceModel, c: f64) -> bool {
    c >= binary_entropy(model.q_s1).get() - FEASIBILITY_SLACK
}

pub(crate) fn check_classification(model: &SourceModel, c: f64) -> Result<()> {
    check_task_budget(model.q_s1, c)
}

/// Validates `c` against the residual task entropy `H_b(q_s1)` alone, for
/// callers whose source marginal is not a [`SourceModel`].
pub(crate) fn check_task_budget(q_s1: Probability, c: f64) -> Result<()> {
    if !c.is_finite() || c < -INPUT_SLACK || c > 1.0 + INPUT_SLACK {
        return Err(Error::Domain {
            name: "c",
            value: c,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let threshold = binary_entropy(q_s1).get();
    if c < threshold - FEASIBILITY_SLACK {
        return Err(Error::InfeasibleClassification { c, threshold });
    }
    Ok(())
}

/// Mrs. Gerber threshold `C0 = (H^-1(c) - q_s1) / (1 - 2 q_s1)`, in `[0, 1/2]`.
pub fn mgl_threshold(model: &SourceModel, c: f64) -> Result<Probability> {
    check_classification(model, c)?;
    let qs1 = model.q_s1.get();
    let h_inv = inverse_binary_entropy(c.min(1.0))?.get();
    Ok(Probability(((h_inv - qs1) / (1.0 - 2.0 * qs1)).clamp(0.0, 0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    fn model(qx: f64, qs1: f64) -> SourceModel {
        SourceModel::new(qx, qs1).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(p(0.5)).get(), 1.0);
        assert_eq!(binary_entropy(p(0.0)).get(), 0.0);
        assert_eq!(binary_entropy(p(1.0)).get(), 0.0);
        assert!((binary_entropy(p(0.3)).get() - 0.881291).abs() < 5e-7);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse_binary_entropy(1.0).unwrap().get(), 0.5);
        assert_eq!(inverse_binary_entropy(0.0).unwrap().get(), 0.0);
        // 0.721928 is H_b(0.2) rounded to 6 places; mpmath gives 0.19999995.
        assert!((inverse_binary_entropy(0.721928).unwrap().get() - 0.2).abs() < 1e-6);
    }

    #[test]
    fn inverse_rejects_out_of_range() {
        assert!(matches!(
            inverse_binary_entropy(1.1),
            Err(Error::Domain { .. })
        ));
        assert!(inverse_binary_entropy(-0.01).is_err());
        assert!(inverse_binary_entropy(f64::NAN).is_err());
        // Round-off slack is absorbed.
        assert_eq!(inverse_binary_entropy(1.0 + 1e-13).unwrap().get(), 0.5);
        assert_eq!(inverse_binary_entropy(-1e-13).unwrap().get(), 0.0);
    }

    #[test]
    fn convolution_examples() {
        for a in [0.0, 0.1, 0.37, 1.0] {
            assert!((binary_convolution(p(a), p(0.5)).get() - 0.5).abs() < 1e-15);
        }
        assert_eq!(binary_convolution(p(0.2), p(0.0)).get(), 0.2);
        assert!((binary_convolution(p(0.3), p(0.2)).get() - 0.38).abs() < 1e-15);
    }

    #[test]
    fn task_prior_examples() {
        assert!((task_prior_m(&model(0.3, 0.2)).get() - 0.62).abs() < 1e-15);
        assert!((task_prior_m(&model(0.0, 0.15)).get() - 0.85).abs() < 1e-15);
        assert!((task_prior_m(&model(0.5, 0.05)).get() - 0.5).abs() < 1e-15);
        let m = model(0.3, 0.2);
        assert!((task_prior_m(&m).get() - (1.0 - m.q_s().get())).abs() < 1e-15);
    }

    #[test]
    fn mgl_threshold_examples() {
        let c = 0.8;
        let noiseless = model(0.3, 0.0);
        assert_eq!(
            mgl_threshold(&noiseless, c).unwrap(),
            inverse_binary_entropy(c).unwrap()
        );
        assert!((mgl_threshold(&model(0.2, 0.05), 1.0).unwrap().get() - 0.5).abs() < 1e-15);
        // mpmath: H^-1(0.8) = 0.2430038538, C0 = 0.0716730897.
        let c0 = mgl_threshold(&model(0.3, 0.2), 0.8).unwrap().get();
        assert!((c0 - 0.071_673_089_7).abs() < 1e-9, "{c0}");
    }

    #[test]
    fn mgl_threshold_errors() {
        assert!(matches!(
            mgl_threshold(&model(0.3, 0.2), 0.5),
            Err(Error::InfeasibleClassification { .. })
        ));
        assert!(matches!(
            SourceModel::new(0.3, 0.5),
            Err(Error::DegenerateModel(_))
        ));
        assert!(SourceModel::new(0.6, 0.1).is_err());
        assert!(SourceModel::new(0.2, -0.1).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(h in 0.0f64..=1.0) {
            let p = inverse_binary_entropy(h).unwrap();
            prop_assert!(p.get() <= 0.5);
            prop_assert!((binary_entropy(p).get() - h).abs() <= 1e-10);
        }

        #[test]
        fn entropy_symmetric(x in 0.0f64..=1.0) {
            let a = binary_entropy(p(x)).get();
            let b = binary_entropy(p(1.0 - x)).get();
            prop_assert!((a - b).abs() < 1e-15);
            prop_assert!(a <= 1.0);
        }

        #[test]
        fn lemma_entropy_ordering(qx in 0.0f64..=0.5, qs1 in 0.0f64..0.5) {
            let model = model(qx, qs1);
            let m = task_prior_m(&model).get();
            prop_assert!(entropy_bits(m) >= entropy_bits(qs1) - 1e-15);
            let lhs = (m - 0.5).abs();
            let rhs = 2.0 * (qx - 0.5).abs() * (qs1 - 0.5).abs();
            prop_assert!((lhs - rhs).abs() <= 1e-15);
        }

        #[test]
        fn monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(inverse_binary_entropy(lo).unwrap() <= inverse_binary_entropy(hi).unwrap());
            let (plo, phi) = (lo / 2.0, hi / 2.0);
            prop_assert!(entropy_bits(plo) <= entropy_bits(phi));
        }

        #[test]
        fn convolution_dominates(a in 0.0f64..=0.5, b in 0.0f64..=0.5) {
            let c = binary_convolution(p(a), p(b)).get();
            prop_assert!(c >= a.max(b) - 1e-15);
            prop_assert!((c - binary_convolution(p(b), p(a)).get()).abs() < 1e-16);
        }
    }

    #[test]
    fn lemma_equality_cases() {
        // q_x = 0: m = 1 - q_s1, same entropy as q_s1.
        let m = task_prior_m(&model(0.0, 0.3)).get();
        assert!((entropy_bits(m) - entropy_bits(0.3)).abs() < 1e-15);
        // Strict inequality otherwise.
        let m = task_prior_m(&model(0.01, 0.3)).get();
        assert!(entropy_bits(m) > entropy_bits(0.3));
    }
}
