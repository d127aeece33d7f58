//! Exhaustive grid over decoder profiles for the re-decoding problem.

use rayon::prelude::*;

use super::{GridSpec, ORACLE_SLACK};
use crate::binary_info::{inverse_binary_entropy, Probability};
use crate::dc_region::RepresentationChannel;
use crate::error::{Error, Result};

/// Largest alphabet the grid will enumerate (`resolution^n` points).
pub const DC_GRID_MAX_SYMBOLS: usize = 5;

/// Smallest `P(X != X̂)` over profiles on a `resolution`-point grid per axis
/// that meet the linearized task budget. Each axis spans the admissible
/// interval for `p_i = P(X̂ = 0 | Z = i)`, endpoints included.
pub fn dc_grid_oracle(
    channel: &RepresentationChannel,
    q_s1: Probability,
    c: f64,
    grid: GridSpec,
) -> Result<Probability> {
    let n = channel.n();
    if n > DC_GRID_MAX_SYMBOLS {
        return Err(Error::Config(format!(
            "grid oracle enumerates at most {DC_GRID_MAX_SYMBOLS} symbols, channel has {n}"
        )));
    }
    let q = channel.q();
    let eps = channel.eps();
    let qs1 = q_s1.get();
    let qx: f64 = q.iter().zip(eps).map(|(a, b)| a * b).sum();
    let budget = (inverse_binary_entropy(c.min(1.0))?.get() - qs1) * qx;

    let res = grid.resolution();
    let axes: Vec<Vec<f64>> = eps
        .iter()
        .map(|&e| {
            let (lo, hi) = if 1.0 - e >= 0.5 { (1.0 - e, 1.0) } else { (0.0, 1.0 - e) };
            (0..res)
                .map(|t| lo + (hi - lo) * t as f64 / (res - 1) as f64)
                .collect()
        })
        .collect();

    // Per symbol: P(X=0, X̂=1 | i) + P(X=1, X̂=0 | i), and its X=1, X̂=0 mass.
    let cost = |i: usize, p: f64| q[i] * ((1.0 - eps[i]) * (1.0 - p) + eps[i] * p);
    let load = |i: usize, p: f64| (1.0 - 2.0 * qs1) * q[i] * eps[i] * p;

    let total = res.pow(n as u32);
    let per_first = total / res;
    let best = (0..res)
        .into_par_iter()
        .map(|first| {
            let mut best = f64::INFINITY;
            let mut idx = vec![0usize; n];
            for rest in 0..per_first {
                let mut r = rest;
                idx[0] = first;
                for slot in idx.iter_mut().skip(1) {
                    *slot = r % res;
                    r /= res;
                }
                let mut d = 0.0;
                let mut used = 0.0;
                for (i, &t) in idx.iter().enumerate() {
                    let p = axes[i][t];
                    d += cost(i, p);
                    used += load(i, p);
                }
                if used <= budget + ORACLE_SLACK && d < best {
                    best = d;
                }
            }
            best
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    if !best.is_finite() {
        return Err(Error::Infeasible(format!(
            "no profile on the {res}-point grid meets the budget at c = {c}"
        )));
    }
    Ok(Probability::new(best.clamp(0.0, 1.0))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_symbol() -> RepresentationChannel {
        RepresentationChannel::new(vec![0.5, 0.5], vec![0.2, 0.8]).unwrap()
    }

    #[test]
    fn two_symbol_at_full_budget() {
        let g = GridSpec::new(201, 0).unwrap();
        let d = dc_grid_oracle(&two_symbol(), Probability::new(0.05).unwrap(), 1.0, g).unwrap();
        assert!((d.get() - 0.2).abs() < 5e-3);
    }

    #[test]
    fn unconstrained_hits_map_corner_exactly() {
        // MAP load 0.125 sits under the budget 0.15.
        let ch = RepresentationChannel::new(vec![0.25, 0.25, 0.5], vec![0.1, 0.7, 0.2]).unwrap();
        let g = GridSpec::new(5, 0).unwrap();
        let d = dc_grid_oracle(&ch, Probability::ZERO, 1.0, g).unwrap().get();
        let map: f64 = 0.25 * 0.1 + 0.25 * 0.3 + 0.5 * 0.2;
        assert!((d - map).abs() < 1e-15);
    }

    #[test]
    fn refuses_large_alphabets() {
        let ch = RepresentationChannel::new(vec![1.0 / 6.0; 6], vec![0.5; 6]).unwrap();
        let g = GridSpec::new(3, 0).unwrap();
        assert!(matches!(
            dc_grid_oracle(&ch, Probability::ZERO, 1.0, g),
            Err(Error::Config(_))
        ));
    }
}
