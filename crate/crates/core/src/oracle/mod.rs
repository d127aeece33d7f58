//! Brute-force and independent-algorithm oracles.
//!
//! Nothing here calls the closed forms, LP assemblies or solvers it checks;
//! only the entropy kernel is shared, and that is validated separately by
//! round-trip and symmetry identities.

mod dc_grid;
mod four_map;
mod projected_gradient;
mod scalar;

pub use dc_grid::{dc_grid_oracle, DC_GRID_MAX_SYMBOLS};
pub use four_map::four_map_enumeration_oracle;
pub use projected_gradient::{projected_gradient_oracle, OracleOptimum, PgProblem};
pub use scalar::{scalar_lp_oracle_drc, scalar_lp_oracle_rdc};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on every constraint an oracle checks.
pub(crate) const ORACLE_SLACK: f64 = 1e-12;

/// Grid density (points per axis) and seed for randomized parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    resolution: usize,
    seed: u64,
}

impl GridSpec {
    pub fn new(resolution: usize, seed: u64) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Config(format!(
                "grid resolution must be at least 2, got {resolution}"
            )));
        }
        Ok(GridSpec { resolution, seed })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}
