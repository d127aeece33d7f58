//! Exhaustive search over mixtures of the four deterministic binary maps
//! `x`, `1 - x`, `0`, `1`, without assuming which weights vanish at the
//! optimum.

use super::{GridSpec, ORACLE_SLACK};
use crate::binary_info::{binary_entropy, Bits, Probability, SourceModel};
use crate::error::{Error, Result};
use crate::oneshot::OperatingPoint;

/// Best rate over the grid `p_U = (i, j, k, l) / N`, `i + j + k + l = N`,
/// `N = resolution - 1`. The rate depends only on `i + j`, so levels are
/// scanned in increasing `i + j` and the first level with a feasible point
/// wins; within a level every `(j, k)` is visited.
pub fn four_map_enumeration_oracle(
    model: &SourceModel,
    point: &OperatingPoint,
    grid: GridSpec,
) -> Result<Bits> {
    let qx = model.q_x().get();
    let qs1 = model.q_s1().get();
    let hx = binary_entropy(model.q_x()).get();
    let hs1 = binary_entropy(model.q_s1()).get();
    let m = (1.0 - qx) * (1.0 - qs1) + qx * qs1;
    let hm = binary_entropy(Probability::new(m)?).get();
    let (d, c) = (point.d.get(), point.c.get());
    let n = grid.resolution() - 1;
    let step = 1.0 / n as f64;

    for level in 0..=n {
        let informative = level as f64 * step;
        let task = informative * hs1 + (1.0 - informative) * hm;
        if task > c + ORACLE_SLACK {
            continue;
        }
        for j in 0..=level {
            let flip = j as f64 * step;
            for k in 0..=(n - level) {
                let zero = k as f64 * step;
                let one = (n - level - k) as f64 * step;
                let distortion = flip + qx * zero + (1.0 - qx) * one;
                if distortion <= d + ORACLE_SLACK {
                    return Ok(Bits::new(hx * informative)?);
                }
            }
        }
    }
    Err(Error::Infeasible(format!(
        "no grid point at resolution {} meets D = {d}, C = {c}",
        grid.resolution()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(res: usize) -> GridSpec {
        GridSpec::new(res, 0).unwrap()
    }

    #[test]
    fn everything_feasible_at_zero_rate() {
        let m = SourceModel::new(0.3, 0.2).unwrap();
        let p = OperatingPoint::new(1.0, 1.0).unwrap();
        assert_eq!(four_map_enumeration_oracle(&m, &p, grid(11)).unwrap().get(), 0.0);
    }

    #[test]
    fn refines_towards_the_plateau() {
        // Frozen from mpmath: the one-shot plateau at q_x=0.3, q_s1=0.2, C=0.8.
        let plateau = 0.5898889466359913;
        let m = SourceModel::new(0.3, 0.2).unwrap();
        let p = OperatingPoint::new(0.5, 0.8).unwrap();
        let mut last = f64::INFINITY;
        for res in [11, 101, 1001] {
            let v = four_map_enumeration_oracle(&m, &p, grid(res)).unwrap().get();
            assert!(v >= plateau - 1e-12);
            assert!(v <= last);
            last = v;
        }
        assert!(last - plateau < 2e-3);
        let coarse = four_map_enumeration_oracle(&m, &p, grid(101)).unwrap().get();
        assert!(coarse - plateau < 2e-2);
    }

    #[test]
    fn reports_empty_grid() {
        let m = SourceModel::new(0.3, 0.2).unwrap();
        let p = OperatingPoint::new(0.0, 0.5).unwrap();
        assert!(matches!(
            four_map_enumeration_oracle(&m, &p, grid(11)),
            Err(Error::Infeasible(_))
        ));
    }
}
