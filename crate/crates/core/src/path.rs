//! Sampled paths on finite grids, two-parameter germs, grid Hölder norms and
//! dyadic p-variation sums.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Result, RoughError};

/// A path observed on a strictly increasing time grid with values in `R^d`.
///
/// Values are stored row-major: point `k` occupies `values[k*d..(k+1)*d]`.
/// Operator-valued paths use the same layout with `d = rows * cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    times: Vec<f64>,
    dim: usize,
    values: Vec<f64>,
}

/// Uniform grid `t_k = T k / n`, `k = 0..=n`. For `n` a power of two the
/// points are exact dyadic rationals whenever `T` is.
pub fn uniform_grid(t_end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_end * k as f64 / n as f64).collect()
}

/// Dyadic grid of `[0, T]` with `2^level` cells.
pub fn dyadic_grid(t_end: f64, level: u32) -> Vec<f64> {
    uniform_grid(t_end, 1usize << level)
}

pub(crate) fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(RoughError::Grid("grid is empty".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(RoughError::Grid("grid contains non-finite times".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RoughError::Grid("grid times must be strictly increasing".into()));
    }
    Ok(())
}

/// Index of `t` in a grid; exact match, with a relative slack of `1e-12`
/// to absorb decimal round-trips.
pub fn grid_index(times: &[f64], t: f64) -> Result<usize> {
    let slack = 1e-12 * times.last().map_or(1.0, |x| x.abs().max(1.0));
    let k = times.partition_point(|&x| x < t - slack);
    if k < times.len() && (times[k] - t).abs() <= slack {
        Ok(k)
    } else {
        Err(RoughError::Grid(format!("time {t} is not a grid point")))
    }
}

impl SamplePath {
    /// Build from a flat row-major value buffer.
    pub fn from_flat(times: Vec<f64>, dim: usize, values: Vec<f64>) -> Result<Self> {
        check_grid(&times)?;
        if dim == 0 {
            return Err(RoughError::Dimension("path dimension must be positive".into()));
        }
        if values.len() != times.len() * dim {
            return Err(RoughError::Dimension(format!(
                "{} values for {} times of dimension {dim}",
                values.len(),
                times.len()
            )));
        }
        Ok(Self { times, dim, values })
    }

    pub fn new(times: Vec<f64>, points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(RoughError::Dimension("points have inconsistent dimension".into()));
        }
        Self::from_flat(times, dim, points.concat())
    }

    pub fn from_fn(times: Vec<f64>, dim: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(times.len() * dim);
        for &t in &times {
            let p = f(t);
            if p.len() != dim {
                return Err(RoughError::Dimension(format!(
                    "function returned {} components, expected {dim}",
                    p.len()
                )));
            }
            values.extend(p);
        }
        Self::from_flat(times, dim, values)
    }

    pub fn constant(times: Vec<f64>, value: &[f64]) -> Result<Self> {
        let n = times.len();
        Self::from_flat(times, value.len(), value.repeat(n))
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn start(&self) -> &[f64] {
        self.value(0)
    }

    pub fn end(&self) -> &[f64] {
        self.value(self.len() - 1)
    }

    pub fn index_of(&self, t: f64) -> Result<usize> {
        grid_index(&self.times, t)
    }

    /// `X_{t_j} - X_{t_i}` by grid index.
    pub fn increment_idx(&self, i: usize, j: usize) -> Vec<f64> {
        self.value(j).iter().zip(self.value(i)).map(|(b, a)| b - a).collect()
    }

    /// `δX_{s,t} = X_t - X_s` for grid times `s ≤ t`.
    pub fn increment(&self, s: f64, t: f64) -> Result<Vec<f64>> {
        if s > t {
            return Err(RoughError::Order(format!("increment needs s <= t, got s={s}, t={t}")));
        }
        let (i, j) = (self.index_of(s)?, self.index_of(t)?);
        Ok(self.increment_idx(i, j))
    }

    /// Pointwise map of values into a new dimension.
    pub fn map(&self, out_dim: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(self.len() * out_dim);
        for k in 0..self.len() {
            let v = f(self.value(k));
            if v.len() != out_dim {
                return Err(RoughError::Dimension(format!(
                    "map returned {} components, expected {out_dim}",
                    v.len()
                )));
            }
            values.extend(v);
        }
        Self::from_flat(self.times.clone(), out_dim, values)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { times: self.times.clone(), dim: self.dim, values: self.values.iter().map(|x| c * x).collect() }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(RoughError::Dimension(format!("path dimensions {} and {} differ", self.dim, other.dim)));
        }
        if self.times != other.times {
            return Err(RoughError::Grid("paths live on different grids".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { times: self.times.clone(), dim: self.dim, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Largest Euclidean distance between aligned points.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok((0..self.len()).map(|k| norm_diff(self.value(k), other.value(k))).fold(0.0, f64::max))
    }

    /// Sub-path on grid indices `i0..=i1`.
    pub fn slice(&self, i0: usize, i1: usize) -> Result<Self> {
        if i0 > i1 || i1 >= self.len() {
            return Err(RoughError::Grid(format!("bad index range {i0}..={i1}")));
        }
        Self::from_flat(
            self.times[i0..=i1].to_vec(),
            self.dim,
            self.values[i0 * self.dim..(i1 + 1) * self.dim].to_vec(),
        )
    }

    /// Every `step`-th grid point; the last point must be retained.
    pub fn subsample(&self, step: usize) -> Result<Self> {
        if step == 0 || (self.len() - 1) % step != 0 {
            return Err(RoughError::Grid(format!(
                "cannot subsample {} cells by {step}",
                self.len() - 1
            )));
        }
        let idx: Vec<usize> = (0..self.len()).step_by(step).collect();
        let times = idx.iter().map(|&k| self.times[k]).collect();
        let values = idx.iter().flat_map(|&k| self.value(k).to_vec()).collect();
        Self::from_flat(times, self.dim, values)
    }

    /// Piecewise-linear interpolation onto `times`, which must lie inside the
    /// path's time range.
    pub fn interpolate(&self, times: &[f64]) -> Result<Self> {
        let (t0, t1) = (self.times[0], *self.times.last().unwrap());
        let mut values = Vec::with_capacity(times.len() * self.dim);
        for &t in times {
            if t < t0 || t > t1 {
                return Err(RoughError::Grid(format!("time {t} outside [{t0}, {t1}]")));
            }
            let k = self.times.partition_point(|&x| x <= t);
            if k == 0 || k == self.len() || self.times[k - 1] == t {
                let idx = if k == 0 { 0 } else { k - 1 };
                values.extend_from_slice(self.value(idx));
                continue;
            }
            let (a, b) = (self.times[k - 1], self.times[k]);
            let w = (t - a) / (b - a);
            values.extend(self.value(k - 1).iter().zip(self.value(k)).map(|(x, y)| x + w * (y - x)));
        }
        Self::from_flat(times.to_vec(), self.dim, values)
    }

    /// Empirical `α`-Hölder seminorm over a family of grid pairs.
    pub fn holder_norm(&self, alpha: f64, pairs: PairFamily) -> Result<f64> {
        check_exponent(alpha)?;
        Ok(grid_holder_sup(&self.times, alpha, pairs, |i, j| {
            norm_diff(self.value(j), self.value(i))
        }))
    }

    /// Rough Hölder-exponent estimate: log-log slope of the largest
    /// increment against the time span over index scales `2^k`. `None` when
    /// fewer than three scales are available or the path is constant.
    pub fn estimate_holder_exponent(&self) -> Option<f64> {
        let n = self.len();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut span = 1;
        while span < n && xs.len() < 12 {
            let (mut best, mut width) = (0.0f64, 0.0f64);
            let mut i = 0;
            while i + span < n {
                best = best.max(norm_diff(self.value(i + span), self.value(i)));
                width = width.max(self.times[i + span] - self.times[i]);
                i += span;
            }
            if best > 0.0 {
                xs.push(width.ln());
                ys.push(best.ln());
            }
            span *= 2;
        }
        (xs.len() >= 3).then(|| crate::stats::linear_fit(&xs, &ys).slope)
    }

    /// `Σ_j |δX|^p` over the `2^n` dyadic cells of the path's time range.
    pub fn dyadic_pvar_sum(&self, p: f64, n: u32) -> Result<f64> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(RoughError::Parameter(format!("p must be positive, got {p}")));
        }
        let idx = self.dyadic_indices(n)?;
        Ok(idx.windows(2).map(|w| norm_diff(self.value(w[1]), self.value(w[0])).powf(p)).sum())
    }

    fn dyadic_indices(&self, n: u32) -> Result<Vec<usize>> {
        if n >= usize::BITS - 1 {
            return Err(RoughError::Parameter(format!("dyadic level {n} too large")));
        }
        let cells = 1usize << n;
        let (t0, t1) = (self.times[0], *self.times.last().unwrap());
        if self.len() < 2 {
            return Err(RoughError::Grid("dyadic sums need at least two grid points".into()));
        }
        // Fast path for uniform grids whose cell count is a multiple of 2^n.
        let m = self.len() - 1;
        if m % cells == 0 {
            let step = m / cells;
            let idx: Vec<usize> = (0..=cells).map(|j| j * step).collect();
            let ok = idx.iter().enumerate().all(|(j, &k)| {
                let want = t0 + (t1 - t0) * j as f64 / cells as f64;
                (self.times[k] - want).abs() <= 1e-12 * t1.abs().max(1.0)
            });
            if ok {
                return Ok(idx);
            }
        }
        (0..=cells)
            .map(|j| {
                let t = t0 + (t1 - t0) * j as f64 / cells as f64;
                self.index_of(t)
                    .map_err(|_| RoughError::Grid(format!("dyadic point {t} at level {n} missing from grid")))
            })
            .collect()
    }

    /// CSV with header `t,x1,…,xd`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for i in 1..=self.dim {
            write!(s, ",x{i}").unwrap();
        }
        s.push('\n');
        for k in 0..self.len() {
            write!(s, "{:.16e}", self.times[k]).unwrap();
            for v in self.value(k) {
                write!(s, ",{v:.16e}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| RoughError::Parse("empty path CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.first() != Some(&"t") || cols.len() < 2 {
            return Err(RoughError::Parse(format!("bad path CSV header {header:?}")));
        }
        let dim = cols.len() - 1;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, line) in lines.enumerate() {
            let fields = parse_csv_floats(line)?;
            if fields.len() != dim + 1 {
                return Err(RoughError::Parse(format!("row {} has {} fields, expected {}", row + 1, fields.len(), dim + 1)));
            }
            times.push(fields[0]);
            values.extend_from_slice(&fields[1..]);
        }
        Self::from_flat(times, dim, values)
    }
}

pub(crate) fn parse_csv_floats(line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|f| f.trim().parse::<f64>().map_err(|_| RoughError::Parse(format!("bad number {f:?}"))))
        .collect()
}

pub(crate) fn check_exponent(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(RoughError::Parameter(format!("Hölder exponent must lie in (0, 1], got {alpha}")))
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Which grid pairs `(s, t)` a Hölder sup ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairFamily {
    /// Every pair `s < t`.
    All,
    /// Pairs adjacent at some dyadic index scale: `(j 2^k, (j+1) 2^k)`.
    Dyadic,
    /// `All` for grids of at most 4096 points, `Dyadic` otherwise.
    #[default]
    Auto,
}

pub const ALL_PAIRS_LIMIT: usize = 4096;

impl PairFamily {
    pub fn resolve(self, n_points: usize) -> PairFamily {
        match self {
            PairFamily::Auto if n_points <= ALL_PAIRS_LIMIT => PairFamily::All,
            PairFamily::Auto => PairFamily::Dyadic,
            other => other,
        }
    }
}

/// Index pairs `(j 2^k, (j+1) 2^k)` that fit in a grid of `n_points`.
pub fn dyadic_pairs(n_points: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut span = 1;
    while span < n_points {
        let mut i = 0;
        while i + span < n_points {
            out.push((i, i + span));
            i += span;
        }
        span *= 2;
    }
    out
}

/// `sup f(i, j) / (t_j - t_i)^exponent` over a pair family. The max is
/// order-independent, so the parallel scan is deterministic.
pub fn grid_holder_sup<F>(times: &[f64], exponent: f64, pairs: PairFamily, f: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let n = times.len();
    let ratio = |i: usize, j: usize| f(i, j) / (times[j] - times[i]).powf(exponent);
    match pairs.resolve(n) {
        PairFamily::All => {
            let row = |i: usize| ((i + 1)..n).map(|j| ratio(i, j)).fold(0.0, f64::max);
            if n > 256 {
                (0..n).into_par_iter().map(row).reduce(|| 0.0, f64::max)
            } else {
                (0..n).map(row).fold(0.0, f64::max)
            }
        }
        _ => dyadic_pairs(n).into_iter().map(|(i, j)| ratio(i, j)).fold(0.0, f64::max),
    }
}

/// A two-parameter function on grid pairs, `Ξ_{s,t}` for `s ≤ t`.
///
/// Implementations should satisfy `Ξ_{t,t} = 0`.
pub trait Germ: Sync {
    /// Length of the value vector.
    fn out_dim(&self) -> usize;

    fn times(&self) -> &[f64];

    /// Write `Ξ_{t_i, t_j}` into `out` (`out.len() == out_dim()`).
    fn eval_into(&self, i: usize, j: usize, out: &mut [f64]);

    fn eval(&self, i: usize, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.out_dim()];
        self.eval_into(i, j, &mut out);
        out
    }
}

/// Germ defined by a closure over grid indices.
pub struct FnGerm<'a, F> {
    times: &'a [f64],
    out_dim: usize,
    f: F,
}

impl<'a, F> FnGerm<'a, F>
where
    F: Fn(usize, usize, &mut [f64]) + Sync,
{
    pub fn new(times: &'a [f64], out_dim: usize, f: F) -> Self {
        Self { times, out_dim, f }
    }
}

impl<F> Germ for FnGerm<'_, F>
where
    F: Fn(usize, usize, &mut [f64]) + Sync,
{
    fn out_dim(&self) -> usize {
        self.out_dim
    }

    fn times(&self) -> &[f64] {
        self.times
    }

    fn eval_into(&self, i: usize, j: usize, out: &mut [f64]) {
        (self.f)(i, j, out)
    }
}

/// Additive germ `Ξ_{s,t} = δX_{s,t}`.
pub struct IncrementGerm<'a>(pub &'a SamplePath);

impl Germ for IncrementGerm<'_> {
    fn out_dim(&self) -> usize {
        self.0.dim()
    }

    fn times(&self) -> &[f64] {
        self.0.times()
    }

    fn eval_into(&self, i: usize, j: usize, out: &mut [f64]) {
        for ((o, b), a) in out.iter_mut().zip(self.0.value(j)).zip(self.0.value(i)) {
            *o = b - a;
        }
    }
}

/// `δΞ_{s,u,t} = Ξ_{s,t} - Ξ_{s,u} - Ξ_{u,t}` on grid indices.
pub fn germ_delta_idx<G: Germ + ?Sized>(xi: &G, i: usize, u: usize, j: usize) -> Result<Vec<f64>> {
    if !(i <= u && u <= j) {
        return Err(RoughError::Order(format!("germ delta needs s <= u <= t, got indices {i}, {u}, {j}")));
    }
    let n = xi.times().len();
    if j >= n {
        return Err(RoughError::Grid(format!("index {j} outside grid of {n} points")));
    }
    Ok(germ_delta_unchecked(xi, i, u, j))
}

pub(crate) fn germ_delta_unchecked<G: Germ + ?Sized>(xi: &G, i: usize, u: usize, j: usize) -> Vec<f64> {
    let mut st = xi.eval(i, j);
    let su = xi.eval(i, u);
    let ut = xi.eval(u, j);
    for ((a, b), c) in st.iter_mut().zip(su).zip(ut) {
        *a -= b + c;
    }
    st
}

/// `δΞ_{s,u,t}` at grid times.
pub fn germ_delta<G: Germ + ?Sized>(xi: &G, s: f64, u: f64, t: f64) -> Result<Vec<f64>> {
    if !(s <= u && u <= t) {
        return Err(RoughError::Order(format!("germ delta needs s <= u <= t, got {s}, {u}, {t}")));
    }
    let times = xi.times();
    germ_delta_idx(xi, grid_index(times, s)?, grid_index(times, u)?, grid_index(times, t)?)
}
