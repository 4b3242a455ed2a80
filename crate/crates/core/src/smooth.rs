//! Smooth maps and vector fields with analytic or finite-difference
//! derivatives.
//!
//! Layouts (row-major):
//! * `f(y)` has `out_dim` entries, `Df(y)[r * in_dim + k] = ∂_k f_r(y)`,
//!   `D²f(y)[(r * in_dim + k) * in_dim + l] = ∂_k ∂_l f_r(y)`.
//! * A vector field `σ: R^m → L(R^d, R^m)` is a smooth map with
//!   `out_dim = m d`, `σ(y)[a * d + j] = σ_{aj}(y)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Result, RoughError};

type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Step of the central difference used when `Df` is not supplied.
pub const FD_STEP: f64 = 1e-5;
/// Step of the second-order central difference used for `D²f`.
pub const FD2_STEP: f64 = 1e-4;
/// Tolerance for agreement between analytic and finite-difference `Df`.
pub const DERIVATIVE_CHECK_TOL: f64 = 1e-4;

#[derive(Clone)]
pub struct SmoothMap {
    in_dim: usize,
    out_dim: usize,
    f: MapFn,
    df: Option<MapFn>,
    d2f: Option<MapFn>,
    allow_fd: bool,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .field("analytic_df", &self.df.is_some())
            .field("analytic_d2f", &self.d2f.is_some())
            .finish()
    }
}

impl SmoothMap {
    pub fn new<F>(in_dim: usize, out_dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self { in_dim, out_dim, f: Arc::new(f), df: None, d2f: None, allow_fd: true }
    }

    pub fn with_derivative<F>(mut self, df: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.df = Some(Arc::new(df));
        self
    }

    pub fn with_second_derivative<F>(mut self, d2f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.d2f = Some(Arc::new(d2f));
        self
    }

    /// Disable the finite-difference fallback; missing derivatives then
    /// raise a derivative error.
    pub fn without_fd(mut self) -> Self {
        self.allow_fd = false;
        self
    }

    /// `y ↦ A y` for a row-major `rows × cols` matrix.
    pub fn linear(rows: usize, cols: usize, a: Vec<f64>) -> Result<Self> {
        if a.len() != rows * cols {
            return Err(RoughError::Dimension(format!("matrix has {} entries, expected {}", a.len(), rows * cols)));
        }
        let a = Arc::new(a);
        let (a1, a2) = (a.clone(), a.clone());
        Ok(Self::new(cols, rows, move |y| mat_vec(&a1, rows, cols, y))
            .with_derivative(move |_| a2.to_vec())
            .with_second_derivative(move |_| vec![0.0; rows * cols * cols]))
    }

    pub fn identity(dim: usize) -> Self {
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            a[i * dim + i] = 1.0;
        }
        Self::linear(dim, dim, a).expect("square identity")
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.df.is_some()
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.in_dim);
        (self.f)(y)
    }

    pub fn derivative(&self, y: &[f64]) -> Result<Vec<f64>> {
        match &self.df {
            Some(df) => Ok(df(y)),
            None if self.allow_fd => Ok(self.fd_derivative(y)),
            None => Err(RoughError::Derivative("no first derivative supplied".into())),
        }
    }

    pub fn second_derivative(&self, y: &[f64]) -> Result<Vec<f64>> {
        match &self.d2f {
            Some(d2f) => Ok(d2f(y)),
            None if self.allow_fd => Ok(self.fd_second_derivative(y)),
            None => Err(RoughError::Derivative("no second derivative supplied".into())),
        }
    }

    /// Central differences of `f` with step `FD_STEP`.
    pub fn fd_derivative(&self, y: &[f64]) -> Vec<f64> {
        let (n, q) = (self.in_dim, self.out_dim);
        let mut out = vec![0.0; q * n];
        let mut yp = y.to_vec();
        for k in 0..n {
            yp[k] = y[k] + FD_STEP;
            let fp = self.eval(&yp);
            yp[k] = y[k] - FD_STEP;
            let fm = self.eval(&yp);
            yp[k] = y[k];
            for r in 0..q {
                out[r * n + k] = (fp[r] - fm[r]) / (2.0 * FD_STEP);
            }
        }
        out
    }

    fn fd_second_derivative(&self, y: &[f64]) -> Vec<f64> {
        let (n, q) = (self.in_dim, self.out_dim);
        let h = FD2_STEP;
        let mut out = vec![0.0; q * n * n];
        let mut z = y.to_vec();
        let mut at = |dk: f64, k: usize, dl: f64, l: usize| {
            z.copy_from_slice(y);
            z[k] += dk;
            z[l] += dl;
            self.eval(&z)
        };
        for k in 0..n {
            for l in 0..n {
                let pp = at(h, k, h, l);
                let pm = at(h, k, -h, l);
                let mp = at(-h, k, h, l);
                let mm = at(-h, k, -h, l);
                for r in 0..q {
                    out[(r * n + k) * n + l] = (pp[r] - pm[r] - mp[r] + mm[r]) / (4.0 * h * h);
                }
            }
        }
        out
    }

    /// Compare a supplied `Df` against central differences on probe points;
    /// returns the worst scaled discrepancy.
    pub fn verify_derivative(&self, probes: &[Vec<f64>]) -> Result<f64> {
        let Some(df) = &self.df else { return Ok(0.0) };
        let mut worst = 0.0f64;
        for y in probes {
            let an = df(y);
            let fd = self.fd_derivative(y);
            for (a, b) in an.iter().zip(&fd) {
                worst = worst.max((a - b).abs() / a.abs().max(1.0));
            }
        }
        if worst > DERIVATIVE_CHECK_TOL {
            return Err(RoughError::Derivative(format!(
                "analytic derivative disagrees with finite differences by {worst:.3e}"
            )));
        }
        Ok(worst)
    }

    /// Estimate `max_{l ≤ 2} sup |D^l f|` on the box `center ± radius`,
    /// probed on a regular lattice (`per_axis` points per coordinate).
    pub fn probe_bounds(&self, center: &[f64], radius: f64, per_axis: usize) -> Result<CkBounds> {
        let n = self.in_dim;
        let per_axis = per_axis.max(2);
        let total = per_axis.pow(n as u32);
        let mut b = CkBounds::default();
        let mut y = vec![0.0; n];
        for idx in 0..total {
            let mut rem = idx;
            for (k, yk) in y.iter_mut().enumerate() {
                let c = rem % per_axis;
                rem /= per_axis;
                *yk = center[k] - radius + 2.0 * radius * c as f64 / (per_axis - 1) as f64;
            }
            b.c0 = b.c0.max(op_norm_bound(&self.eval(&y)));
            b.c1 = b.c1.max(op_norm_bound(&self.derivative(&y)?));
            b.c2 = b.c2.max(op_norm_bound(&self.second_derivative(&y)?));
        }
        Ok(b)
    }
}

/// Frobenius norm, an upper bound for every operator norm we use.
fn op_norm_bound(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Probed sup-norms of a map and its first two derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CkBounds {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl CkBounds {
    /// `‖f‖_{C^k} = max_{l ≤ k} ‖D^l f‖_∞`.
    pub fn ck(&self, k: usize) -> f64 {
        match k {
            0 => self.c0,
            1 => self.c0.max(self.c1),
            _ => self.c0.max(self.c1).max(self.c2),
        }
    }
}

pub(crate) fn mat_vec(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    (0..rows).map(|r| a[r * cols..(r + 1) * cols].iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// `σ: R^m → L(R^d, R^m)`.
#[derive(Clone, Debug)]
pub struct VectorField {
    m: usize,
    d: usize,
    map: SmoothMap,
}

impl VectorField {
    pub fn new<F>(m: usize, d: usize, sigma: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self { m, d, map: SmoothMap::new(m, m * d, sigma) }
    }

    pub fn from_map(m: usize, d: usize, map: SmoothMap) -> Result<Self> {
        if map.in_dim() != m || map.out_dim() != m * d {
            return Err(RoughError::Dimension(format!(
                "vector field map has shape {}→{}, expected {m}→{}",
                map.in_dim(),
                map.out_dim(),
                m * d
            )));
        }
        Ok(Self { m, d, map })
    }

    pub fn with_derivative<F>(mut self, dsigma: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.map = self.map.with_derivative(dsigma);
        self
    }

    pub fn with_second_derivative<F>(mut self, d2sigma: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.map = self.map.with_second_derivative(d2sigma);
        self
    }

    pub fn without_fd(mut self) -> Self {
        self.map = self.map.without_fd();
        self
    }

    /// `σ ≡ c` for a row-major `m × d` matrix `c`.
    pub fn constant(m: usize, d: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != m * d {
            return Err(RoughError::Dimension(format!("constant field has {} entries, expected {}", c.len(), m * d)));
        }
        Ok(Self::new(m, d, move |_| c.clone())
            .with_derivative(move |_| vec![0.0; m * d * m])
            .with_second_derivative(move |_| vec![0.0; m * d * m * m]))
    }

    /// Linear field `σ(y) e_j = A_j y` for `d` row-major `m × m` matrices.
    pub fn linear(m: usize, mats: &[Vec<f64>]) -> Result<Self> {
        let d = mats.len();
        if d == 0 || mats.iter().any(|a| a.len() != m * m) {
            return Err(RoughError::Dimension(format!("linear field needs d >= 1 matrices of size {m}x{m}")));
        }
        let mats: Arc<Vec<Vec<f64>>> = Arc::new(mats.to_vec());
        let (m1, m2) = (mats.clone(), mats.clone());
        let sigma = move |y: &[f64]| {
            let mut out = vec![0.0; m * d];
            for (j, a) in m1.iter().enumerate() {
                for (r, v) in mat_vec(a, m, m, y).into_iter().enumerate() {
                    out[r * d + j] = v;
                }
            }
            out
        };
        let dsigma = move |_: &[f64]| {
            let mut out = vec![0.0; m * d * m];
            for (j, a) in m2.iter().enumerate() {
                for r in 0..m {
                    for k in 0..m {
                        out[(r * d + j) * m + k] = a[r * m + k];
                    }
                }
            }
            out
        };
        Ok(Self::new(m, d, sigma)
            .with_derivative(dsigma)
            .with_second_derivative(move |_| vec![0.0; m * d * m * m]))
    }

    /// Scalar field `σ(y) = y` (`m = d = 1`).
    pub fn scalar_identity() -> Self {
        Self::linear(1, &[vec![1.0]]).expect("1x1 identity")
    }

    pub fn state_dim(&self) -> usize {
        self.m
    }

    pub fn driver_dim(&self) -> usize {
        self.d
    }

    pub fn map(&self) -> &SmoothMap {
        &self.map
    }

    pub fn sigma(&self, y: &[f64]) -> Vec<f64> {
        self.map.eval(y)
    }

    pub fn d_sigma(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.map.derivative(y)
    }

    pub fn d2_sigma(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.map.second_derivative(y)
    }

    /// `σ(y) v` for `v ∈ R^d`.
    pub fn apply(&self, y: &[f64], v: &[f64]) -> Vec<f64> {
        mat_vec(&self.sigma(y), self.m, self.d, v)
    }

    /// `(Dσ σ)(y)` as an `m × (d d)` array: entry `[a * d*d + i*d + j]` is
    /// `Σ_k ∂_k σ_{aj}(y) σ_{ki}(y)`, the coefficient of `𝕏^{ij}`.
    pub fn d_sigma_sigma(&self, y: &[f64]) -> Result<Vec<f64>> {
        let (m, d) = (self.m, self.d);
        let s = self.sigma(y);
        let ds = self.d_sigma(y)?;
        let mut out = vec![0.0; m * d * d];
        for a in 0..m {
            for j in 0..d {
                for i in 0..d {
                    let mut acc = 0.0;
                    for k in 0..m {
                        acc += ds[(a * d + j) * m + k] * s[k * d + i];
                    }
                    out[a * d * d + i * d + j] = acc;
                }
            }
        }
        Ok(out)
    }

    pub fn verify_derivative(&self, probes: &[Vec<f64>]) -> Result<f64> {
        self.map.verify_derivative(probes)
    }

    pub fn probe_bounds(&self, center: &[f64], radius: f64, per_axis: usize) -> Result<CkBounds> {
        self.map.probe_bounds(center, radius, per_axis)
    }
}
