//! Young integration and Young ODEs.

use crate::error::{Result, RoughError};
use crate::path::{norm_diff, FnGerm, PairFamily, SamplePath};
pub use crate::picard::{PicardDiagnostics, PicardOptions, WindowReport};
use crate::picard::windowed_picard;
use crate::sewing::{sew_converged, SewResult};
use crate::smooth::{mat_vec, VectorField};

#[derive(Debug, Clone)]
pub struct YoungIntegral {
    /// `t ↦ ∫_s^t f dg` on the grid points of `[s, t]`, zero at `s`.
    pub path: SamplePath,
    /// Bisection levels of the sum over the whole interval.
    pub sewing: SewResult,
}

impl YoungIntegral {
    pub fn value(&self) -> &[f64] {
        self.path.end()
    }

    pub fn cauchy_gap(&self) -> f64 {
        self.sewing.cauchy_gap
    }
}

/// Young integral `∫ f dg` of an operator-valued `f` (row-major `w × v`
/// per point) against `g ∈ R^v`, over grid times `[s, t]`.
///
/// The grid value is the left-point sum on the full grid; coarser
/// bisection levels give the Cauchy gap.
pub fn young_integral(f: &SamplePath, g: &SamplePath, s: f64, t: f64) -> Result<YoungIntegral> {
    if f.times() != g.times() {
        return Err(RoughError::Grid("integrand and integrator live on different grids".into()));
    }
    let v = g.dim();
    if f.dim() % v != 0 {
        return Err(RoughError::Dimension(format!(
            "integrand dimension {} is not a multiple of integrator dimension {v}",
            f.dim()
        )));
    }
    if s > t {
        return Err(RoughError::Order(format!("need s <= t, got {s} > {t}")));
    }
    let w = f.dim() / v;
    let (i0, i1) = (g.index_of(s)?, g.index_of(t)?);
    let times = g.times();

    let germ = FnGerm::new(times, w, |i, j, out: &mut [f64]| {
        let dg: Vec<f64> = g.value(j).iter().zip(g.value(i)).map(|(b, a)| b - a).collect();
        out.copy_from_slice(&mat_vec(f.value(i), w, v, &dg));
    });
    let sewing = if i1 > i0 {
        sew_converged(&germ, i0, i1, &[i0, i1], 0.0)?
    } else {
        SewResult {
            value: vec![0.0; w],
            cauchy_gap: 0.0,
            gaps: vec![],
            level_values: vec![vec![0.0; w]],
            meshes: vec![0.0],
            converged: true,
        }
    };

    let mut values = Vec::with_capacity((i1 - i0 + 1) * w);
    let mut acc = vec![0.0; w];
    values.extend_from_slice(&acc);
    let mut buf = vec![0.0; w];
    for k in i0..i1 {
        crate::path::Germ::eval_into(&germ, k, k + 1, &mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b;
        }
        values.extend_from_slice(&acc);
    }
    let path = SamplePath::from_flat(times[i0..=i1].to_vec(), w, values)?;
    Ok(YoungIntegral { path, sewing })
}

#[derive(Debug, Clone)]
pub struct YoungOdeSolution {
    pub path: SamplePath,
    pub diagnostics: PicardDiagnostics,
}

/// Solve `Y_t = y0 + ∫_0^t σ(Y) dX` by windowed Picard iteration.
///
/// The fixed point map sews the trapezoidal germ
/// `½(σ(Y_u) + σ(Y_v)) δX_{u,v}`, which has the same sewn limit as the
/// left-point germ and second order accuracy on the grid.
pub fn young_ode_solve(
    sigma: &VectorField,
    x: &SamplePath,
    y0: &[f64],
    opts: &PicardOptions,
) -> Result<YoungOdeSolution> {
    let (m, d) = (sigma.state_dim(), sigma.driver_dim());
    if x.dim() != d {
        return Err(RoughError::Dimension(format!("driver has dimension {}, field expects {d}", x.dim())));
    }
    if y0.len() != m {
        return Err(RoughError::Dimension(format!("initial value has dimension {}, field expects {m}", y0.len())));
    }
    let n_cells = x.len() - 1;
    let incs: Vec<Vec<f64>> = (0..n_cells).map(|k| x.increment_idx(k, k + 1)).collect();
    let map = |a: usize, b: usize, y: &[f64]| -> Vec<f64> {
        let sig: Vec<Vec<f64>> = y.chunks(m).map(|p| sigma.sigma(p)).collect();
        let mut out = Vec::with_capacity(y.len());
        let mut acc = y[..m].to_vec();
        out.extend_from_slice(&acc);
        for k in 0..(b - a) {
            let dx = &incs[a + k];
            let l = mat_vec(&sig[k], m, d, dx);
            let r = mat_vec(&sig[k + 1], m, d, dx);
            for c in 0..m {
                acc[c] += 0.5 * (l[c] + r[c]);
            }
            out.extend_from_slice(&acc);
        }
        out
    };
    let (values, mut diagnostics) = windowed_picard(n_cells, m, y0, map, opts)?;
    if let Some(a) = x.estimate_holder_exponent() {
        if a <= 0.5 {
            diagnostics
                .warnings
                .push(format!("driver looks {a:.2}-Hölder; Young theory needs an exponent above 1/2"));
        }
    }
    let path = SamplePath::from_flat(x.times().to_vec(), m, values)?;
    Ok(YoungOdeSolution { path, diagnostics })
}

/// Inputs of the composition Lipschitz estimate for `σ` along two paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzCheck {
    /// `‖σ(X) - σ(Y)‖_α`.
    pub lhs: f64,
    /// `|X_0 - Y_0| + ‖X - Y‖_α`.
    pub base: f64,
    /// `max(‖X‖_α, ‖Y‖_α)`.
    pub k: f64,
}

impl LipschitzCheck {
    pub fn ratio(&self) -> f64 {
        if self.base == 0.0 { 0.0 } else { self.lhs / self.base }
    }
}

/// Evaluate both sides of `‖σ(X) − σ(Y)‖_α ≤ C (|X_0 − Y_0| + ‖X − Y‖_α)`
/// for paths `X, Y` in the state space of `σ`.
pub fn lipschitz_composition_check(
    sigma: &VectorField,
    x: &SamplePath,
    y: &SamplePath,
    alpha: f64,
    pairs: PairFamily,
) -> Result<LipschitzCheck> {
    let m = sigma.state_dim();
    if x.dim() != m || y.dim() != m {
        return Err(RoughError::Dimension("paths must live in the state space of the field".into()));
    }
    let out = m * sigma.driver_dim();
    let sx = x.map(out, |p| sigma.sigma(p))?;
    let sy = y.map(out, |p| sigma.sigma(p))?;
    let lhs = sx.sub(&sy)?.holder_norm(alpha, pairs)?;
    let diff = x.sub(y)?;
    let base = norm_diff(x.start(), y.start()) + diff.holder_norm(alpha, pairs)?;
    let k = x.holder_norm(alpha, pairs)?.max(y.holder_norm(alpha, pairs)?);
    Ok(LipschitzCheck { lhs, base, k })
}
