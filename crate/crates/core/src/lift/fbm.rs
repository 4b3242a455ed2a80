use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RoughError};
use crate::path::{check_grid, SamplePath};

/// Largest grid (number of points) accepted by the Cholesky sampler.
pub const MAX_FBM_POINTS: usize = 1 << 13;
const JITTER: f64 = 1e-12;

/// `R(s, t) = ½ (t^{2H} + s^{2H} - |t - s|^{2H})`.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (t.abs().powf(h2) + s.abs().powf(h2) - (t - s).abs().powf(h2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSimConfig {
    pub hurst: f64,
    pub times: Vec<f64>,
    pub seed: u64,
    /// Number of independent coordinates.
    pub dim: usize,
}

/// Exact sampler for fBm on a fixed grid: the covariance of the non-zero
/// grid times is factored once and reused for every seed.
#[derive(Debug, Clone)]
pub struct FbmSampler {
    hurst: f64,
    times: Vec<f64>,
    chol: Option<DMatrix<f64>>,
    jittered: bool,
}

impl FbmSampler {
    pub fn new(hurst: f64, times: &[f64]) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(RoughError::Parameter(format!("Hurst parameter must lie in (0, 1), got {hurst}")));
        }
        check_grid(times)?;
        if times[0] != 0.0 {
            return Err(RoughError::Grid(format!("fBm grid must start at 0, starts at {}", times[0])));
        }
        if times.len() > MAX_FBM_POINTS {
            return Err(RoughError::Grid(format!(
                "fBm grid of {} points exceeds the Cholesky cap of {MAX_FBM_POINTS}",
                times.len()
            )));
        }
        let inner = &times[1..];
        let n = inner.len();
        if n == 0 {
            return Ok(Self { hurst, times: times.to_vec(), chol: None, jittered: false });
        }
        let cov = DMatrix::from_fn(n, n, |i, j| fbm_covariance(hurst, inner[i], inner[j]));
        let (l, jittered) = match cov.clone().cholesky() {
            Some(c) => (c.l(), false),
            None => {
                let jit = cov + DMatrix::identity(n, n) * JITTER;
                match jit.cholesky() {
                    Some(c) => (c.l(), true),
                    None => {
                        return Err(RoughError::Numerical(
                            "fBm covariance is not positive definite even after diagonal jitter".into(),
                        ))
                    }
                }
            }
        };
        Ok(Self { hurst, times: times.to_vec(), chol: Some(l), jittered })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// True if the factorisation needed the diagonal jitter.
    pub fn jittered(&self) -> bool {
        self.jittered
    }

    /// One draw with `dim` independent coordinates. Normals come from
    /// `ChaCha8Rng::seed_from_u64(seed)`, coordinate by coordinate.
    pub fn sample(&self, seed: u64, dim: usize) -> Result<SamplePath> {
        if dim == 0 {
            return Err(RoughError::Dimension("fBm dimension must be positive".into()));
        }
        let n = self.times.len();
        let mut values = vec![0.0; n * dim];
        if let Some(l) = &self.chol {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for c in 0..dim {
                let z = DVector::from_fn(n - 1, |_, _| StandardNormal.sample(&mut rng));
                let x = l * z;
                for (k, v) in x.iter().enumerate() {
                    values[(k + 1) * dim + c] = *v;
                }
            }
        }
        SamplePath::from_flat(self.times.clone(), dim, values)
    }
}

/// One seeded fBm draw on `cfg.times`.
pub fn fbm_sample(cfg: &GaussianSimConfig) -> Result<SamplePath> {
    FbmSampler::new(cfg.hurst, &cfg.times)?.sample(cfg.seed, cfg.dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::uniform_grid;

    #[test]
    fn degenerate_grid() {
        let cfg = GaussianSimConfig { hurst: 0.3, times: vec![0.0], seed: 1, dim: 2 };
        let p = fbm_sample(&cfg).unwrap();
        assert_eq!(p.values(), &[0.0, 0.0]);
    }

    #[test]
    fn validation() {
        assert!(FbmSampler::new(1.0, &[0.0, 1.0]).is_err());
        assert!(matches!(FbmSampler::new(0.5, &[0.1, 1.0]), Err(RoughError::Grid(_))));
    }

    #[test]
    fn deterministic_per_seed() {
        let s = FbmSampler::new(0.7, &uniform_grid(1.0, 32)).unwrap();
        assert_eq!(s.sample(9, 2).unwrap(), s.sample(9, 2).unwrap());
        assert_ne!(s.sample(9, 2).unwrap(), s.sample(10, 2).unwrap());
    }

    #[test]
    fn brownian_covariance_is_min() {
        assert_eq!(fbm_covariance(0.5, 0.5, 1.0), 0.5);
        assert!((fbm_covariance(0.7, 1.0, 1.0) - 1.0).abs() < 1e-15);
    }
}
