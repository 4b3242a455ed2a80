use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::davie_solve;
use crate::error::{Result, RoughError};
use crate::lift::{brownian_lift_full, canonical_lift, rho_alpha, FbmSampler, LiftMode};
use crate::path::{dyadic_grid, norm_diff, uniform_grid, PairFamily};
use crate::smooth::VectorField;
use crate::stats::{linear_fit, median};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WongZakaiConfig {
    /// The reference solution lives on `2^master_level` cells.
    pub master_level: u32,
    /// Dyadic approximation levels `n` (each below `master_level`).
    pub levels: Vec<u32>,
    /// Refinement of the Brownian lift on each master cell.
    pub refinement: usize,
    pub alpha: f64,
    pub horizon: f64,
}

impl Default for WongZakaiConfig {
    fn default() -> Self {
        Self { master_level: 10, levels: (4..=9).collect(), refinement: 16, alpha: 0.35, horizon: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WongZakaiRow {
    pub level: u32,
    pub sup_error: f64,
    /// `‖Y(n) - Y‖_α` on the master grid.
    pub holder_error: f64,
    pub terminal_error: f64,
    /// `ρ_α(B(n), B^Strat)`.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WongZakaiRun {
    pub seed: u64,
    /// `B_T`.
    pub driver_end: Vec<f64>,
    /// Terminal value of the solution driven by the Stratonovich lift.
    pub reference_end: Vec<f64>,
    pub rows: Vec<WongZakaiRow>,
}

/// Medians over seeds, per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WongZakaiLevel {
    pub level: u32,
    pub sup_error: f64,
    pub holder_error: f64,
    pub terminal_error: f64,
    pub rho: f64,
}

impl WongZakaiLevel {
    pub fn summarize(runs: &[WongZakaiRun]) -> Vec<Self> {
        let Some(first) = runs.first() else { return Vec::new() };
        (0..first.rows.len())
            .map(|k| {
                let col = |f: fn(&WongZakaiRow) -> f64| median(&runs.iter().map(|r| f(&r.rows[k])).collect::<Vec<_>>());
                Self {
                    level: first.rows[k].level,
                    sup_error: col(|r| r.sup_error),
                    holder_error: col(|r| r.holder_error),
                    terminal_error: col(|r| r.terminal_error),
                    rho: col(|r| r.rho),
                }
            })
            .collect()
    }
}

/// Solve against piecewise-linear approximations `B(n)` of one Brownian
/// draw and compare with the solution driven by its Stratonovich lift, all
/// on the master grid.
pub fn wong_zakai_experiment(sigma: &VectorField, y0: &[f64], cfg: &WongZakaiConfig, seed: u64) -> Result<WongZakaiRun> {
    let top = cfg.master_level;
    if top == 0 || top > 20 {
        return Err(RoughError::Parameter(format!("master level must lie in 1..=20, got {top}")));
    }
    if let Some(&bad) = cfg.levels.iter().find(|&&n| n >= top) {
        return Err(RoughError::Parameter(format!("approximation level {bad} must be below the master level {top}")));
    }
    let d = sigma.driver_dim();
    let grid = uniform_grid(cfg.horizon, 1 << top);
    let master = brownian_lift_full(&grid, cfg.refinement, LiftMode::Strat, seed, d, cfg.alpha)?;
    let b = master.rough.level_one_path();
    let reference = davie_solve(sigma, &master.rough, y0)?;
    let y_ref = reference.y();

    let mut rows = Vec::with_capacity(cfg.levels.len());
    for &n in &cfg.levels {
        let bn = b.subsample(1 << (top - n))?.interpolate(&grid)?;
        let lift = canonical_lift(&bn, 2, cfg.alpha)?;
        let sol = davie_solve(sigma, &lift, y0)?;
        let diff = sol.y().sub(y_ref)?;
        rows.push(WongZakaiRow {
            level: n,
            sup_error: sol.y().sup_distance(y_ref)?,
            holder_error: diff.holder_norm(cfg.alpha, PairFamily::Auto)?,
            terminal_error: norm_diff(sol.terminal(), reference.terminal()),
            rho: rho_alpha(&lift, &master.rough, cfg.alpha)?,
        });
    }
    Ok(WongZakaiRun { seed, driver_end: b.end().to_vec(), reference_end: reference.terminal().to_vec(), rows })
}

/// [`wong_zakai_experiment`] over many seeds, in seed order.
pub fn wong_zakai_ensemble(sigma: &VectorField, y0: &[f64], cfg: &WongZakaiConfig, seeds: &[u64]) -> Result<Vec<WongZakaiRun>> {
    seeds.par_iter().map(|&s| wong_zakai_experiment(sigma, y0, cfg, s)).collect()
}

/// Terms `(C_n^2 + S_n^2) / (2πn)`, `n = 1..=n_max`, with `C_n, S_n`
/// standard normals drawn in the order `C_1, S_1, C_2, ...`.
pub fn lyons_divergence_terms(n_max: usize, seed: u64) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(RoughError::Parameter("n_max must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((1..=n_max)
        .map(|n| {
            let c: f64 = StandardNormal.sample(&mut rng);
            let s: f64 = StandardNormal.sample(&mut rng);
            (c * c + s * s) / (2.0 * std::f64::consts::PI * n as f64)
        })
        .collect())
}

/// Partial sums of [`lyons_divergence_terms`].
pub fn lyons_divergence_demo(n_max: usize, seed: u64) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    Ok(lyons_divergence_terms(n_max, seed)?
        .into_iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RogersScan {
    pub hurst: f64,
    pub p: f64,
    pub levels: Vec<u32>,
    /// Median over seeds of `Σ_k |δX_{k 2^{-n}, (k+1) 2^{-n}}|^p`.
    pub medians: Vec<f64>,
    /// Least-squares slope of `log2(median)` against the level.
    pub slope: f64,
}

/// Dyadic `p`-variation sums of fBm on `[0, 1]`, levels `1..=n_levels`.
pub fn rogers_scan(hurst: f64, p: f64, n_levels: u32, seeds: &[u64]) -> Result<RogersScan> {
    if n_levels < 2 {
        return Err(RoughError::Parameter(format!("need at least two levels, got {n_levels}")));
    }
    if seeds.is_empty() {
        return Err(RoughError::Parameter("need at least one seed".into()));
    }
    if !(p > 0.0) {
        return Err(RoughError::Parameter(format!("p must be positive, got {p}")));
    }
    let sampler = FbmSampler::new(hurst, &dyadic_grid(1.0, n_levels))?;
    let levels: Vec<u32> = (1..=n_levels).collect();
    let sums: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&s| {
            let path = sampler.sample(s, 1)?;
            levels.iter().map(|&n| path.dyadic_pvar_sum(p, n)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let medians: Vec<f64> = (0..levels.len()).map(|k| median(&sums.iter().map(|r| r[k]).collect::<Vec<_>>())).collect();
    let xs: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = medians.iter().map(|m| m.log2()).collect();
    let slope = linear_fit(&xs, &ys).slope;
    Ok(RogersScan { hurst, p, levels, medians, slope })
}
