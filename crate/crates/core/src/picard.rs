//! Windowed Picard iteration shared by the Young and rough ODE solvers.
//!
//! The grid is covered by consecutive windows. On each window the fixed
//! point map is iterated from the constant path at the window's initial
//! value; the window is halved whenever an iterate ratio reaches the
//! contraction threshold, the iteration budget runs out, or values become
//! non-finite. Accepted windows are glued.

use crate::error::{Result, RoughError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Sup-norm tolerance on successive iterates.
    pub tol: f64,
    /// Iteration budget per window attempt.
    pub max_iter: usize,
    /// Windows are never split below this many grid cells.
    pub min_window_cells: usize,
    /// A window is rejected once `d_{k+1} / d_k` reaches this value.
    pub contraction_threshold: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 200, min_window_cells: 4, contraction_threshold: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    pub start: usize,
    pub end: usize,
    pub iterations: usize,
    /// `‖Y - M(Y)‖_∞` of the returned iterate.
    pub residual: f64,
    /// Successive-iterate distance ratios.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PicardDiagnostics {
    pub windows: Vec<WindowReport>,
    /// `(start, end, reason)` of rejected window attempts.
    pub rejected: Vec<(usize, usize, String)>,
    pub warnings: Vec<String>,
}

impl PicardDiagnostics {
    pub fn max_residual(&self) -> f64 {
        self.windows.iter().map(|w| w.residual).fold(0.0, f64::max)
    }

    pub fn max_ratio(&self) -> f64 {
        self.windows.iter().flat_map(|w| w.ratios.iter().copied()).fold(0.0, f64::max)
    }
}

fn sup_dist(a: &[f64], b: &[f64], m: usize) -> f64 {
    a.chunks(m)
        .zip(b.chunks(m))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

enum Attempt {
    Accepted(Vec<f64>, WindowReport),
    Rejected(String),
}

fn try_window<F>(a: usize, b: usize, m: usize, y_a: &[f64], map: &F, opts: &PicardOptions) -> Attempt
where
    F: Fn(usize, usize, &[f64]) -> Vec<f64>,
{
    let mut cur = y_a.repeat(b - a + 1);
    let mut prev_dist: Option<f64> = None;
    let mut ratios = Vec::new();
    for it in 1..=opts.max_iter {
        let next = map(a, b, &cur);
        if next.iter().any(|v| !v.is_finite()) {
            return Attempt::Rejected(format!("non-finite iterate at iteration {it}"));
        }
        let dist = sup_dist(&next, &cur, m);
        if let Some(p) = prev_dist {
            if p > 0.0 {
                let r = dist / p;
                ratios.push(r);
                if r >= opts.contraction_threshold && dist > opts.tol {
                    return Attempt::Rejected(format!("contraction ratio {r:.3} at iteration {it}"));
                }
            }
        }
        cur = next;
        if dist <= opts.tol {
            let check = map(a, b, &cur);
            let residual = sup_dist(&check, &cur, m);
            let report = WindowReport { start: a, end: b, iterations: it, residual, ratios };
            return Attempt::Accepted(cur, report);
        }
        prev_dist = Some(dist);
    }
    Attempt::Rejected(format!("no convergence within {} iterations", opts.max_iter))
}

/// Solve `Y = M(Y)` on grid indices `0..=n_cells`.
///
/// `map(a, b, y)` receives the current iterate on window `[a, b]`
/// (`(b - a + 1) * m` values, first point equal to the window initial
/// value) and returns its image under the fixed point map.
pub(crate) fn windowed_picard<F>(
    n_cells: usize,
    m: usize,
    y0: &[f64],
    map: F,
    opts: &PicardOptions,
) -> Result<(Vec<f64>, PicardDiagnostics)>
where
    F: Fn(usize, usize, &[f64]) -> Vec<f64>,
{
    if !(opts.tol > 0.0) || opts.max_iter == 0 || opts.min_window_cells == 0 {
        return Err(RoughError::Parameter("Picard options need tol > 0, max_iter >= 1, min window >= 1".into()));
    }
    let mut diag = PicardDiagnostics::default();
    let mut values = Vec::with_capacity((n_cells + 1) * m);
    values.extend_from_slice(y0);
    let mut a = 0;
    let mut width = n_cells.max(1);
    while a < n_cells {
        let b = (a + width).min(n_cells);
        let y_a = values[a * m..(a + 1) * m].to_vec();
        match try_window(a, b, m, &y_a, &map, opts) {
            Attempt::Accepted(sol, report) => {
                values.extend_from_slice(&sol[m..]);
                diag.windows.push(report);
                a = b;
            }
            Attempt::Rejected(reason) => {
                let smallest = (b - a) <= opts.min_window_cells || width / 2 < opts.min_window_cells;
                diag.rejected.push((a, b, reason.clone()));
                if smallest {
                    return Err(RoughError::Convergence(format!(
                        "Picard iteration failed on minimal window [{a}, {b}]: {reason}; {} windows accepted, {} rejected",
                        diag.windows.len(),
                        diag.rejected.len()
                    )));
                }
                width /= 2;
            }
        }
    }
    Ok((values, diag))
}
