use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::RoughPath;
use crate::error::{Result, RoughError};
use crate::path::{check_grid, SamplePath};
use crate::tensor::TruncatedTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LiftMode {
    Ito,
    #[default]
    Strat,
}

impl std::str::FromStr for LiftMode {
    type Err = RoughError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ito" | "itô" => Ok(LiftMode::Ito),
            "strat" | "stratonovich" => Ok(LiftMode::Strat),
            other => Err(RoughError::Parse(format!("unknown lift mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BrownianLift {
    /// Level-2 rough path on the coarse grid.
    pub rough: RoughPath,
    /// The Brownian sample on the `r`-fold refined grid.
    pub fine: SamplePath,
}

/// Brownian motion in `R^d` on `grid`, lifted to depth 2.
///
/// Increments are sampled on the grid refined `r` times per cell
/// (coordinate by coordinate from `ChaCha8Rng::seed_from_u64(seed)`). The
/// Stratonovich level 2 of a coarse cell is the level 2 of the canonical
/// lift of the refined piecewise-linear path; the Itô one subtracts
/// `I_d (t - s) / 2`.
pub fn brownian_lift_full(grid: &[f64], refinement: usize, mode: LiftMode, seed: u64, d: usize, alpha: f64) -> Result<BrownianLift> {
    check_grid(grid)?;
    if grid.len() < 2 {
        return Err(RoughError::Grid("Brownian lift needs at least one cell".into()));
    }
    if refinement < 4 {
        return Err(RoughError::Parameter(format!("refinement must be at least 4, got {refinement}")));
    }
    if d == 0 {
        return Err(RoughError::Dimension("dimension must be positive".into()));
    }
    let r = refinement;
    let cells = grid.len() - 1;
    let n_fine = cells * r;
    let mut fine_times = Vec::with_capacity(n_fine + 1);
    for k in 0..cells {
        let (a, b) = (grid[k], grid[k + 1]);
        for q in 0..r {
            fine_times.push(a + (b - a) * q as f64 / r as f64);
        }
    }
    fine_times.push(grid[cells]);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dw = vec![0.0; n_fine * d];
    for c in 0..d {
        for k in 0..n_fine {
            let z: f64 = StandardNormal.sample(&mut rng);
            dw[k * d + c] = z * (fine_times[k + 1] - fine_times[k]).sqrt();
        }
    }
    let mut values = vec![0.0; (n_fine + 1) * d];
    for k in 0..n_fine {
        for c in 0..d {
            values[(k + 1) * d + c] = values[k * d + c] + dw[k * d + c];
        }
    }
    let fine = SamplePath::from_flat(fine_times, d, values)?;

    let mut incs = Vec::with_capacity(cells);
    for k in 0..cells {
        let mut l1 = vec![0.0; d];
        let mut l2 = vec![0.0; d * d];
        for q in 0..r {
            let inc = &dw[(k * r + q) * d..(k * r + q + 1) * d];
            // (1, a, A) ⊗ (1, δ, δ⊗δ/2)
            for i in 0..d {
                for j in 0..d {
                    l2[i * d + j] += l1[i] * inc[j] + 0.5 * inc[i] * inc[j];
                }
            }
            for i in 0..d {
                l1[i] += inc[i];
            }
        }
        if mode == LiftMode::Ito {
            let h = grid[k + 1] - grid[k];
            for i in 0..d {
                l2[i * d + i] -= 0.5 * h;
            }
        }
        incs.push(TruncatedTensor::from_levels(d, vec![vec![1.0], l1, l2])?);
    }
    Ok(BrownianLift { rough: RoughPath::new(grid.to_vec(), incs, alpha)?, fine })
}

/// The rough path part of [`brownian_lift_full`].
pub fn brownian_lift(grid: &[f64], refinement: usize, mode: LiftMode, seed: u64, d: usize, alpha: f64) -> Result<RoughPath> {
    Ok(brownian_lift_full(grid, refinement, mode, seed, d, alpha)?.rough)
}
