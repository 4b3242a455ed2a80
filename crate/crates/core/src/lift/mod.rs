//! Rough paths on grids and their construction: canonical lifts, Brownian
//! and fractional Brownian drivers, the Lyons extension and rough path
//! metrics.

mod brownian;
mod extension;
mod fbm;
mod metrics;

pub use brownian::{brownian_lift, brownian_lift_full, BrownianLift, LiftMode};
pub use extension::{lyons_extend, DecayFit, ExtendOptions, Extension};
pub use fbm::{fbm_covariance, fbm_sample, FbmSampler, GaussianSimConfig, MAX_FBM_POINTS};
pub use metrics::{homogeneous_norm, level_sups, neo_classical_check, rho_alpha, successive_dyadic_rho, NeoClassical};

use std::fmt::Write as _;

use crate::error::{Result, RoughError};
use crate::path::{check_grid, grid_index, parse_csv_floats, SamplePath};
use crate::tensor::{TruncatedTensor, Word};

/// A multiplicative functional on a grid, stored as its adjacent-cell
/// increments. `X_{s,t}` for grid points `s ≤ t` is the ordered product of
/// the cells between them, so Chen's relation holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughPath {
    dim: usize,
    depth: usize,
    times: Vec<f64>,
    incs: Vec<TruncatedTensor>,
    alpha: f64,
}

impl RoughPath {
    /// `incs[k]` is the increment over `[times[k], times[k+1]]`.
    pub fn new(times: Vec<f64>, incs: Vec<TruncatedTensor>, alpha: f64) -> Result<Self> {
        check_grid(&times)?;
        if incs.len() + 1 != times.len() {
            return Err(RoughError::Dimension(format!(
                "{} increments for a grid of {} points",
                incs.len(),
                times.len()
            )));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(RoughError::Parameter(format!("declared alpha must lie in (0, 1], got {alpha}")));
        }
        let Some(first) = incs.first() else {
            return Err(RoughError::Grid("a rough path needs at least one cell".into()));
        };
        let (dim, depth) = (first.dim(), first.depth());
        for (k, inc) in incs.iter().enumerate() {
            if inc.dim() != dim || inc.depth() != depth {
                return Err(RoughError::Dimension(format!("increment {k} has a different shape")));
            }
            if inc.scalar() != 1.0 {
                return Err(RoughError::Parameter(format!("increment {k} has level 0 = {} != 1", inc.scalar())));
            }
        }
        Ok(Self { dim, depth, times, incs, alpha })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_cells(&self) -> usize {
        self.incs.len()
    }

    pub fn increments(&self) -> &[TruncatedTensor] {
        &self.incs
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(RoughError::Parameter(format!("declared alpha must lie in (0, 1], got {alpha}")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    /// `X_{t_i, t_j}` for grid indices `i ≤ j`.
    pub fn evaluate_idx(&self, i: usize, j: usize) -> Result<TruncatedTensor> {
        if i > j {
            return Err(RoughError::Order(format!("evaluate needs i <= j, got {i} > {j}")));
        }
        if j >= self.times.len() {
            return Err(RoughError::Grid(format!("index {j} outside grid of {} points", self.times.len())));
        }
        Ok(self.product(i, j))
    }

    pub(crate) fn product(&self, i: usize, j: usize) -> TruncatedTensor {
        let mut acc = TruncatedTensor::unit(self.dim, self.depth);
        let mut tmp = TruncatedTensor::zero(self.dim, self.depth);
        for inc in &self.incs[i..j] {
            acc.mul_unchecked_into(inc, self.depth, &mut tmp);
            std::mem::swap(&mut acc, &mut tmp);
        }
        acc
    }

    /// `X_{s,t}` for grid times `s ≤ t`.
    pub fn evaluate(&self, s: f64, t: f64) -> Result<TruncatedTensor> {
        if s > t {
            return Err(RoughError::Order(format!("evaluate needs s <= t, got {s} > {t}")));
        }
        self.evaluate_idx(grid_index(&self.times, s)?, grid_index(&self.times, t)?)
    }

    /// `X_{0, t_k}` for every grid index.
    pub fn prefix_products(&self) -> Vec<TruncatedTensor> {
        let mut out = Vec::with_capacity(self.times.len());
        out.push(TruncatedTensor::unit(self.dim, self.depth));
        let mut tmp = TruncatedTensor::zero(self.dim, self.depth);
        for inc in &self.incs {
            out.last().unwrap().mul_unchecked_into(inc, self.depth, &mut tmp);
            out.push(tmp.clone());
        }
        out
    }

    /// The underlying path `t ↦ X_0 + X^{(1)}_{0,t}` with `X_0 = 0`.
    pub fn level_one_path(&self) -> SamplePath {
        let mut values = vec![0.0; self.dim];
        let mut acc = vec![0.0; self.dim];
        for inc in &self.incs {
            for (a, b) in acc.iter_mut().zip(inc.level(1)) {
                *a += b;
            }
            values.extend_from_slice(&acc);
        }
        SamplePath::from_flat(self.times.clone(), self.dim, values).expect("grid already validated")
    }

    pub fn truncate(&self, depth: usize) -> Result<Self> {
        let incs = self.incs.iter().map(|x| x.truncate(depth)).collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: self.dim, depth, times: self.times.clone(), incs, alpha: self.alpha })
    }

    /// Merge every `factor` consecutive cells.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.n_cells() % factor != 0 {
            return Err(RoughError::Grid(format!("cannot coarsen {} cells by {factor}", self.n_cells())));
        }
        let times = self.times.iter().step_by(factor).copied().collect();
        let incs = (0..self.n_cells() / factor).map(|c| self.product(c * factor, (c + 1) * factor)).collect();
        Self::new(times, incs, self.alpha)
    }

    /// Dilation `δ_c`: level `n` scaled by `c^n`.
    pub fn dilate(&self, c: f64) -> Self {
        let incs = self
            .incs
            .iter()
            .map(|x| {
                let mut y = x.clone();
                for n in 1..=self.depth {
                    let f = c.powi(n as i32);
                    y.level_mut(n).iter_mut().for_each(|v| *v *= f);
                }
                y
            })
            .collect();
        Self { dim: self.dim, depth: self.depth, times: self.times.clone(), incs, alpha: self.alpha }
    }

    /// Largest `|X_{s,t} - X_{s,u} ⊗ X_{u,t}|` (coefficient-wise) over grid
    /// triples; exhaustive when there are at most `max_triples`, otherwise
    /// over triples with `u` at the index midpoint.
    pub fn chen_residual(&self, max_triples: usize) -> f64 {
        let n = self.times.len();
        let total = n * n.saturating_sub(1) * n.saturating_sub(2) / 6;
        let mut worst = 0.0f64;
        if total <= max_triples && n <= 256 {
            let table = self.pair_table();
            let at = |i: usize, j: usize| &table[i * n + j];
            for i in 0..n {
                for j in (i + 2)..n {
                    for u in (i + 1)..j {
                        let prod = at(i, u).mul(at(u, j)).expect("shapes agree");
                        worst = worst.max(at(i, j).max_abs_diff(&prod).expect("shapes agree"));
                    }
                }
            }
        } else {
            for i in 0..n {
                for j in (i + 2)..n {
                    let u = (i + j) / 2;
                    let prod = self.product(i, u).mul(&self.product(u, j)).expect("shapes agree");
                    worst = worst.max(self.product(i, j).max_abs_diff(&prod).expect("shapes agree"));
                }
            }
        }
        worst
    }

    /// `X_{t_i, t_j}` for all `i ≤ j`, row-major `n × n` (entries below
    /// the diagonal are the unit).
    pub(crate) fn pair_table(&self) -> Vec<TruncatedTensor> {
        let n = self.times.len();
        let unit = TruncatedTensor::unit(self.dim, self.depth);
        let mut table = vec![unit; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let mut next = TruncatedTensor::zero(self.dim, self.depth);
                table[i * n + j - 1].mul_unchecked_into(&self.incs[j - 1], self.depth, &mut next);
                table[i * n + j] = next;
            }
        }
        table
    }

    /// CSV: header `t_start,t_end,d,N,<words>`, then one row per cell.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t_start,t_end,d,N");
        for w in Word::all_up_to(self.dim, self.depth) {
            write!(s, ",{w}").unwrap();
        }
        s.push('\n');
        for (k, inc) in self.incs.iter().enumerate() {
            write!(s, "{:.16e},{:.16e}", self.times[k], self.times[k + 1]).unwrap();
            let flat = inc.to_flat();
            write!(s, ",{},{}", self.dim, self.depth).unwrap();
            for v in &flat[2..] {
                write!(s, ",{v:.16e}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str, alpha: f64) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| RoughError::Parse("empty rough path CSV".into()))?;
        if !header.starts_with("t_start,t_end,d,N") {
            return Err(RoughError::Parse(format!("bad rough path CSV header {header:?}")));
        }
        let mut times = Vec::new();
        let mut incs = Vec::new();
        for line in lines {
            let row = parse_csv_floats(line)?;
            if row.len() < 5 {
                return Err(RoughError::Parse("rough path row too short".into()));
            }
            if times.is_empty() {
                times.push(row[0]);
            } else if *times.last().unwrap() != row[0] {
                return Err(RoughError::Parse(format!("cell starting at {} does not continue the grid", row[0])));
            }
            times.push(row[1]);
            incs.push(TruncatedTensor::from_flat(&row[2..])?);
        }
        Self::new(times, incs, alpha)
    }
}

/// Canonical lift of the piecewise-linear interpolation of `x`: each cell
/// increment is `exp(δX)` truncated at `depth`.
pub fn canonical_lift(x: &SamplePath, depth: usize, alpha: f64) -> Result<RoughPath> {
    if x.len() < 2 {
        return Err(RoughError::Grid("canonical lift needs at least two grid points".into()));
    }
    let incs = (0..x.len() - 1).map(|k| TruncatedTensor::exp(&x.increment_idx(k, k + 1), depth)).collect();
    RoughPath::new(x.times().to_vec(), incs, alpha)
}
