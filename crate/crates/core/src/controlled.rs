//! Controlled paths, the rough integral and composition with smooth maps.
//!
//! Layouts: `Y_t ∈ R^w` and `Y'_t ∈ L(R^d, R^w)` row-major,
//! `Y'[k * d + i] = ∂_i Y^k`. An integrand for `∫ Y dX ∈ R^m` is a
//! controlled path with `w = m d`, `Y[a * d + j] = Y_{aj}`.

use crate::error::{Result, RoughError};
use crate::lift::{level_sups, rho_alpha, RoughPath};
use crate::path::{check_exponent, grid_holder_sup, grid_index, norm, norm_diff, Germ, PairFamily, SamplePath};
use crate::sewing::{sew_converged, sewing_bound_check, sewing_constant, SewResult, SewingBoundReport};
use crate::smooth::SmoothMap;
use crate::tensor::TruncatedTensor;

#[derive(Debug, Clone)]
pub struct ControlledPath {
    reference: RoughPath,
    y: SamplePath,
    yp: SamplePath,
    /// `X_{0,t}` through level 2 at every grid point (level 2 absent for
    /// depth-1 references).
    prefix: Vec<TruncatedTensor>,
}

impl ControlledPath {
    pub fn new(reference: RoughPath, y: SamplePath, yp: SamplePath) -> Result<Self> {
        if y.times() != reference.times() || yp.times() != reference.times() {
            return Err(RoughError::Grid("Y, Y' and the reference must share one grid".into()));
        }
        let d = reference.dim();
        if yp.dim() != y.dim() * d {
            return Err(RoughError::Dimension(format!(
                "Y' has {} components, expected {} x {d}",
                yp.dim(),
                y.dim()
            )));
        }
        let depth = reference.depth().min(2);
        let prefix = reference
            .truncate(depth)?
            .prefix_products();
        Ok(Self { reference, y, yp, prefix })
    }

    /// `(X_0 + X^{(1)}_{0,·}, I_d)`.
    pub fn identity(reference: RoughPath, x0: &[f64]) -> Result<Self> {
        let d = reference.dim();
        if x0.len() != d {
            return Err(RoughError::Dimension(format!("start point has {} components, expected {d}", x0.len())));
        }
        let base = reference.level_one_path();
        let y = base.map(d, |p| p.iter().zip(x0).map(|(a, b)| a + b).collect())?;
        let mut eye = vec![0.0; d * d];
        (0..d).for_each(|i| eye[i * d + i] = 1.0);
        let yp = SamplePath::constant(reference.times().to_vec(), &eye)?;
        Self::new(reference, y, yp)
    }

    /// `(Y, 0)`.
    pub fn with_zero_derivative(reference: RoughPath, y: SamplePath) -> Result<Self> {
        let zero = vec![0.0; y.dim() * reference.dim()];
        let yp = SamplePath::constant(y.times().to_vec(), &zero)?;
        Self::new(reference, y, yp)
    }

    pub fn reference(&self) -> &RoughPath {
        &self.reference
    }

    pub fn y(&self) -> &SamplePath {
        &self.y
    }

    pub fn yp(&self) -> &SamplePath {
        &self.yp
    }

    pub fn target_dim(&self) -> usize {
        self.y.dim()
    }

    pub fn times(&self) -> &[f64] {
        self.reference.times()
    }

    fn x1(&self, i: usize, j: usize) -> Vec<f64> {
        self.prefix[j].level(1).iter().zip(self.prefix[i].level(1)).map(|(b, a)| b - a).collect()
    }

    /// `𝕏_{t_i, t_j}` from the prefix products, exact on adjacent cells.
    fn x2(&self, i: usize, j: usize) -> Vec<f64> {
        if j == i + 1 {
            return self.reference.increments()[i].level(2).to_vec();
        }
        let d = self.reference.dim();
        let dx = self.x1(i, j);
        let (a, b) = (&self.prefix[i], &self.prefix[j]);
        let mut out: Vec<f64> = b.level(2).iter().zip(a.level(2)).map(|(q, p)| q - p).collect();
        for p in 0..d {
            for q in 0..d {
                out[p * d + q] -= a.level(1)[p] * dx[q];
            }
        }
        out
    }

    /// `R_{t_i, t_j} = δY - Y'_{t_i} δX`.
    pub fn remainder_idx(&self, i: usize, j: usize) -> Vec<f64> {
        let d = self.reference.dim();
        let dx = self.x1(i, j);
        let yp = self.yp.value(i);
        self.y
            .increment_idx(i, j)
            .iter()
            .enumerate()
            .map(|(k, dy)| dy - (0..d).map(|l| yp[k * d + l] * dx[l]).sum::<f64>())
            .collect()
    }

    pub fn remainder(&self, s: f64, t: f64) -> Result<Vec<f64>> {
        if s > t {
            return Err(RoughError::Order(format!("remainder needs s <= t, got {s} > {t}")));
        }
        let times = self.times();
        Ok(self.remainder_idx(grid_index(times, s)?, grid_index(times, t)?))
    }

    /// Integrand `v ↦ Y ⊗ v` (`w = d'·d` outputs), so that `∫ Y ⊗ dX` is
    /// the matrix of iterated integrals `∫ Y^k dX^l`.
    pub fn outer_integrand(&self) -> Result<Self> {
        let (w, d) = (self.y.dim(), self.reference.dim());
        let y = self.y.map(w * d * d, |p| {
            let mut out = vec![0.0; w * d * d];
            for k in 0..w {
                for l in 0..d {
                    out[(k * d + l) * d + l] = p[k];
                }
            }
            out
        })?;
        let yp = self.yp.map(w * d * d * d, |p| {
            let mut out = vec![0.0; w * d * d * d];
            for k in 0..w {
                for l in 0..d {
                    for i in 0..d {
                        out[((k * d + l) * d + l) * d + i] = p[k * d + i];
                    }
                }
            }
            out
        })?;
        Self::new(self.reference.clone(), y, yp)
    }

    /// Integrand `v ↦ ⟨Y, v⟩` for `Y ∈ R^d`, giving `∫ Σ_j Y^j dX^j`.
    pub fn inner_integrand(&self) -> Result<Self> {
        let d = self.reference.dim();
        if self.y.dim() != d {
            return Err(RoughError::Dimension(format!("inner integrand needs Y in R^{d}, got R^{}", self.y.dim())));
        }
        Self::new(self.reference.clone(), self.y.clone(), self.yp.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlledNorm {
    /// `‖Y'‖_α`.
    pub derivative: f64,
    /// `‖R^Y‖_{2α}`.
    pub remainder: f64,
    /// `‖Y'‖_α + ‖R^Y‖_{2α}`.
    pub seminorm: f64,
    /// `|Y_0| + |Y'_0| + seminorm`.
    pub full: f64,
}

fn remainder_sup(cp: &ControlledPath, alpha: f64, pairs: PairFamily) -> f64 {
    grid_holder_sup(cp.times(), 2.0 * alpha, pairs, |i, j| norm(&cp.remainder_idx(i, j)))
}

/// Grid-sup controlled norms of `(Y, Y')`.
pub fn controlled_norm(cp: &ControlledPath, alpha: f64) -> Result<ControlledNorm> {
    controlled_norm_with(cp, alpha, PairFamily::Auto)
}

pub fn controlled_norm_with(cp: &ControlledPath, alpha: f64, pairs: PairFamily) -> Result<ControlledNorm> {
    check_exponent(alpha)?;
    let derivative = cp.yp.holder_norm(alpha, pairs)?;
    let remainder = remainder_sup(cp, alpha, pairs);
    let seminorm = derivative + remainder;
    Ok(ControlledNorm { derivative, remainder, seminorm, full: norm(cp.y.start()) + norm(cp.yp.start()) + seminorm })
}

/// Compensated germ `Y_u δX_{u,v} + Y'_u 𝕏_{u,v}`.
struct RoughGerm<'a> {
    cp: &'a ControlledPath,
    m: usize,
}

impl Germ for RoughGerm<'_> {
    fn out_dim(&self) -> usize {
        self.m
    }

    fn times(&self) -> &[f64] {
        self.cp.times()
    }

    fn eval_into(&self, i: usize, j: usize, out: &mut [f64]) {
        let d = self.cp.reference.dim();
        let (dx, xx) = (self.cp.x1(i, j), self.cp.x2(i, j));
        let (y, yp) = (self.cp.y.value(i), self.cp.yp.value(i));
        for (a, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for q in 0..d {
                let row = a * d + q;
                acc += y[row] * dx[q];
                for p in 0..d {
                    acc += yp[row * d + p] * xx[p * d + q];
                }
            }
            *o = acc;
        }
    }
}

fn rough_germ(cp: &ControlledPath) -> Result<RoughGerm<'_>> {
    if cp.reference.depth() < 2 {
        return Err(RoughError::Depth(format!("rough integration needs depth >= 2, got {}", cp.reference.depth())));
    }
    let d = cp.reference.dim();
    if cp.y.dim() % d != 0 {
        return Err(RoughError::Dimension(format!(
            "integrand has {} components, not a multiple of d = {d}",
            cp.y.dim()
        )));
    }
    Ok(RoughGerm { cp, m: cp.y.dim() / d })
}

#[derive(Debug, Clone)]
pub struct RoughIntegral {
    /// `(Z, Z') = (∫_0^· Y dX, Y)`, zero at the first grid point.
    pub integral: ControlledPath,
    /// Bisection levels of the compensated sums over the whole grid.
    pub sewing: SewResult,
}

impl RoughIntegral {
    pub fn value(&self) -> &[f64] {
        self.integral.y.end()
    }

    pub fn cauchy_gap(&self) -> f64 {
        self.sewing.cauchy_gap
    }
}

/// `∫ Y dX` as a controlled path with Gubinelli derivative `Y`. Grid
/// values are compensated sums on the full grid.
pub fn rough_integral(cp: &ControlledPath) -> Result<RoughIntegral> {
    let germ = rough_germ(cp)?;
    let n = cp.times().len();
    let m = germ.m;
    let mut values = vec![0.0; n * m];
    let mut buf = vec![0.0; m];
    for k in 0..n - 1 {
        germ.eval_into(k, k + 1, &mut buf);
        for c in 0..m {
            values[(k + 1) * m + c] = values[k * m + c] + buf[c];
        }
    }
    let sewing = sew_converged(&germ, 0, n - 1, &[0, n - 1], 0.0)?;
    let z = SamplePath::from_flat(cp.times().to_vec(), m, values)?;
    let integral = ControlledPath::new(cp.reference.clone(), z, cp.y.clone())?;
    Ok(RoughIntegral { integral, sewing })
}

/// Compensated sums of `∫_s^t Y dX` over bisections of `{s, t}`.
pub fn rough_integral_over(cp: &ControlledPath, s: f64, t: f64) -> Result<SewResult> {
    let germ = rough_germ(cp)?;
    if s > t {
        return Err(RoughError::Order(format!("need s <= t, got {s} > {t}")));
    }
    let (i, j) = (grid_index(cp.times(), s)?, grid_index(cp.times(), t)?);
    if i == j {
        return Err(RoughError::Partition("empty integration interval".into()));
    }
    sew_converged(&germ, i, j, &[i, j], 0.0)
}

/// Local estimate `|∫_s^t Y dX - Y_s δX - Y'_s 𝕏| ≤ C (‖X‖_α ‖R^Y‖_{2α} + ‖𝕏‖_{2α} ‖Y'‖_α) |t-s|^{3α}`
/// with `C` the sewing constant at `3α`.
#[derive(Debug, Clone)]
pub struct RoughIntegralBound {
    /// `sup |∫_s^t Y dX - Ξ_{s,t}| / |t-s|^{3α}` over grid pairs.
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub holds: bool,
    /// Exceeds the bound by less than 1%; attributed to grid estimation.
    pub flagged: bool,
    /// Maximal inequality of the sewing construction with `β = 3α`.
    pub sewing: SewingBoundReport,
}

pub fn rough_integral_bound(cp: &ControlledPath, alpha: f64) -> Result<RoughIntegralBound> {
    check_exponent(alpha)?;
    let germ = rough_germ(cp)?;
    let beta = 3.0 * alpha;
    let constant = sewing_constant(beta)?;
    let integral = rough_integral(cp)?;
    let z = &integral.integral.y;
    let times = cp.times();
    let m = germ.m;
    let lhs = grid_holder_sup(times, beta, PairFamily::Auto, |i, j| {
        let mut xi = vec![0.0; m];
        germ.eval_into(i, j, &mut xi);
        let dz = z.increment_idx(i, j);
        norm_diff(&dz, &xi)
    });
    let sups = level_sups(&cp.reference.truncate(2)?, alpha, PairFamily::Auto);
    let cn = controlled_norm(cp, alpha)?;
    let rhs = constant * (sups[0] * cn.remainder + sups[1] * cn.derivative);
    let holds = lhs <= rhs * (1.0 + 1e-12);
    let flagged = !holds && lhs <= rhs * 1.01;
    let sewing = sewing_bound_check(&germ, beta, 0, times.len() - 1)?;
    Ok(RoughIntegralBound { lhs, rhs, constant, holds, flagged, sewing })
}

#[derive(Debug, Clone)]
pub struct Composition {
    /// `(φ(Y), Dφ(Y) Y')`.
    pub path: ControlledPath,
    /// Seminorm `‖φ(Y), φ(Y)'‖_{X,α}`.
    pub norm: f64,
    /// `‖Y‖_α + ‖Y‖_α^2 + ‖Y, Y'‖_{X,α}`.
    pub scale: f64,
}

impl Composition {
    /// Empirical constant of the composition estimate.
    pub fn ratio(&self) -> f64 {
        if self.scale == 0.0 { 0.0 } else { self.norm / self.scale }
    }
}

/// Compose a controlled path with a smooth map.
pub fn compose_smooth(phi: &SmoothMap, cp: &ControlledPath, alpha: f64) -> Result<Composition> {
    let (w, d) = (cp.y.dim(), cp.reference.dim());
    if phi.in_dim() != w {
        return Err(RoughError::Dimension(format!("map takes R^{}, path lives in R^{w}", phi.in_dim())));
    }
    let q = phi.out_dim();
    let n = cp.times().len();
    let mut y = Vec::with_capacity(n * q);
    let mut yp = Vec::with_capacity(n * q * d);
    for k in 0..n {
        let p = cp.y.value(k);
        let v = phi.eval(p);
        if v.len() != q {
            return Err(RoughError::Dimension(format!("map returned {} components, expected {q}", v.len())));
        }
        y.extend(v);
        let dphi = phi.derivative(p)?;
        let dy = cp.yp.value(k);
        for r in 0..q {
            for i in 0..d {
                yp.push((0..w).map(|c| dphi[r * w + c] * dy[c * d + i]).sum::<f64>());
            }
        }
    }
    let times = cp.times().to_vec();
    let path = ControlledPath::new(
        cp.reference.clone(),
        SamplePath::from_flat(times.clone(), q, y)?,
        SamplePath::from_flat(times, q * d, yp)?,
    )?;
    let norm = controlled_norm(&path, alpha)?.seminorm;
    let yh = cp.y.holder_norm(alpha, PairFamily::Auto)?;
    let scale = yh + yh * yh + controlled_norm(cp, alpha)?.seminorm;
    Ok(Composition { path, norm, scale })
}

/// `ρ_α(X, X̃) + ‖Y' - Ỹ'‖_α + ‖R^Y - R^Ỹ‖_{2α} + |Y_0 - Ỹ_0| + |Y'_0 - Ỹ'_0|`.
pub fn dflat_metric(a: &ControlledPath, b: &ControlledPath, alpha: f64) -> Result<f64> {
    check_exponent(alpha)?;
    if a.y.dim() != b.y.dim() || a.reference.dim() != b.reference.dim() {
        return Err(RoughError::Dimension("controlled paths of different shapes".into()));
    }
    if a.times() != b.times() {
        return Err(RoughError::Dimension("controlled paths on different grids".into()));
    }
    let rho = rho_alpha(&a.reference, &b.reference, alpha)?;
    let dyp = a.yp.sub(&b.yp)?.holder_norm(alpha, PairFamily::Auto)?;
    let dr = grid_holder_sup(a.times(), 2.0 * alpha, PairFamily::Auto, |i, j| {
        norm_diff(&a.remainder_idx(i, j), &b.remainder_idx(i, j))
    });
    Ok(rho + dyp + dr + norm_diff(a.y.start(), b.y.start()) + norm_diff(a.yp.start(), b.yp.start()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::canonical_lift;
    use crate::path::uniform_grid;

    fn curve(n: usize) -> SamplePath {
        SamplePath::from_fn(uniform_grid(1.0, n), 2, |t| vec![(3.0 * t).sin(), t * t - t]).unwrap()
    }

    #[test]
    fn identity_has_zero_remainder() {
        let x = canonical_lift(&curve(16), 2, 0.5).unwrap();
        let cp = ControlledPath::identity(x, &[1.0, -2.0]).unwrap();
        for i in 0..16 {
            for j in i..17 {
                assert!(norm(&cp.remainder_idx(i, j)) < 1e-14);
            }
        }
        let cn = controlled_norm(&cp, 0.5).unwrap();
        assert!(cn.seminorm < 1e-12);
    }

    #[test]
    fn zero_derivative_remainder_is_increment() {
        let x = canonical_lift(&curve(8), 2, 0.5).unwrap();
        let y = SamplePath::from_fn(x.times().to_vec(), 1, |t| vec![t.exp()]).unwrap();
        let cp = ControlledPath::with_zero_derivative(x, y.clone()).unwrap();
        assert_eq!(cp.remainder(0.25, 0.75).unwrap(), y.increment(0.25, 0.75).unwrap());
        assert!(matches!(cp.remainder(0.1, 0.5), Err(RoughError::Grid(_))));
    }

    #[test]
    fn constant_integrand() {
        let x = canonical_lift(&curve(32), 2, 0.5).unwrap();
        let c = SamplePath::constant(x.times().to_vec(), &[2.0, -1.0]).unwrap();
        let cp = ControlledPath::with_zero_derivative(x.clone(), c).unwrap();
        let r = rough_integral(&cp).unwrap();
        let dx = x.evaluate_idx(0, 32).unwrap();
        assert!((r.value()[0] - (2.0 * dx.level(1)[0] - dx.level(1)[1])).abs() < 1e-14);
    }

    #[test]
    fn x_dx_is_level_two() {
        let x = canonical_lift(&curve(64), 2, 0.5).unwrap();
        let x0 = [0.3, -0.7];
        let cp = ControlledPath::identity(x.clone(), &x0).unwrap().outer_integrand().unwrap();
        let r = rough_integral(&cp).unwrap();
        let full = x.evaluate_idx(0, 64).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                let want = full.level(2)[k * 2 + l];
                let got = r.value()[k * 2 + l] - x0[k] * full.level(1)[l];
                assert!((got - want).abs() <= 1e-8 * want.abs().max(1e-3));
            }
        }
        assert_eq!(r.integral.yp().values(), cp.y().values());
    }

    #[test]
    fn depth_one_reference() {
        let x = canonical_lift(&curve(8), 1, 0.9).unwrap();
        let cp = ControlledPath::identity(x, &[0.0, 0.0]).unwrap().inner_integrand().unwrap();
        assert!(matches!(rough_integral(&cp), Err(RoughError::Depth(_))));
    }

    #[test]
    fn linear_composition() {
        let x = canonical_lift(&curve(16), 2, 0.5).unwrap();
        let cp = ControlledPath::identity(x, &[0.0, 1.0]).unwrap();
        let a = vec![1.0, 2.0, 0.0, -1.0, 3.0, 0.5];
        let c = compose_smooth(&SmoothMap::linear(3, 2, a.clone()).unwrap(), &cp, 0.5).unwrap();
        for k in 0..17 {
            let y = cp.y().value(k);
            for r in 0..3 {
                let want = a[r * 2] * y[0] + a[r * 2 + 1] * y[1];
                assert!((c.path.y().value(k)[r] - want).abs() < 1e-15);
                for i in 0..2 {
                    assert_eq!(c.path.yp().value(k)[r * 2 + i], a[r * 2 + i]);
                }
            }
        }
        let id = compose_smooth(&SmoothMap::identity(2), &cp, 0.5).unwrap();
        assert_eq!(id.path.y(), cp.y());
        assert_eq!(id.path.yp(), cp.yp());
    }

    #[test]
    fn shifted_start_metric() {
        let x = canonical_lift(&curve(16), 2, 0.5).unwrap();
        let a = ControlledPath::identity(x.clone(), &[0.0, 0.0]).unwrap();
        let b = ControlledPath::identity(x, &[0.25, 0.0]).unwrap();
        assert_eq!(dflat_metric(&a, &a, 0.5).unwrap(), 0.0);
        assert!((dflat_metric(&a, &b, 0.5).unwrap() - 0.25).abs() < 1e-12);
        let ab = dflat_metric(&a, &b, 0.5).unwrap();
        assert!((ab - dflat_metric(&b, &a, 0.5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn bound_holds_for_smooth_integrand() {
        let x = canonical_lift(&curve(64), 2, 0.5).unwrap();
        let cp = ControlledPath::identity(x, &[0.0, 0.0]).unwrap();
        let phi = SmoothMap::new(2, 2, |y| vec![y[0].sin(), y[0] * y[1]])
            .with_derivative(|y| vec![y[0].cos(), 0.0, y[1], y[0]]);
        let integrand = compose_smooth(&phi, &cp, 0.5).unwrap().path;
        let b = rough_integral_bound(&integrand.inner_integrand().unwrap(), 0.5).unwrap();
        assert!(b.holds, "{} > {}", b.lhs, b.rhs);
        assert!(b.sewing.holds);
    }
}
