use statrs::function::gamma::ln_gamma;

use crate::error::{Result, RoughError};
use crate::lift::{DecayFit, RoughPath};
use crate::path::{norm, SamplePath};
use crate::smooth::mat_vec;

#[derive(Debug, Clone)]
pub struct LinearSeries {
    /// Partial sum through the truncation level at every grid point.
    pub path: SamplePath,
    /// Bound on the omitted levels over the whole interval.
    pub tail_bound: f64,
    /// `|Σ_{|w| = n} A_w y0 X^w_{0,T}|` for `n = 0..=depth`.
    pub level_terms: Vec<f64>,
}

/// Power series solution of `dY = Σ_i A_i Y dX^i` truncated at `depth`:
/// `Y_t = Σ_w A_{i_n} ⋯ A_{i_1} y0 X^w_{0,t}` over words `w = i_1 ⋯ i_n`.
///
/// The tail bound uses the factorial decay `|X^{(n)}_{s,t}| ≤ M^n |t-s|^{nα} / (β (nα)!)`
/// and `a = (Σ_i ‖A_i‖_F²)^{1/2}`:
/// `|y0| Σ_{n > depth} a^n M^n T^{nα} / (β (nα)!)`.
pub fn linear_rde_series(
    mats: &[Vec<f64>],
    x: &RoughPath,
    y0: &[f64],
    depth: usize,
    decay: &DecayFit,
) -> Result<LinearSeries> {
    let (d, m) = (x.dim(), y0.len());
    if mats.len() != d || mats.iter().any(|a| a.len() != m * m) {
        return Err(RoughError::Dimension(format!("need {d} matrices of size {m}x{m}")));
    }
    if depth > x.depth() {
        return Err(RoughError::Depth(format!(
            "series depth {depth} exceeds the driver depth {}; extend the driver first",
            x.depth()
        )));
    }

    // coefficients A_w y0, level by level in word order
    let mut coeffs: Vec<Vec<f64>> = vec![y0.to_vec()];
    let mut levels = vec![coeffs.clone()];
    for _ in 1..=depth {
        let mut next = Vec::with_capacity(coeffs.len() * d);
        for v in &coeffs {
            for a in mats {
                next.push(mat_vec(a, m, m, v));
            }
        }
        coeffs = next;
        levels.push(coeffs.clone());
    }

    let prefix = x.truncate(depth)?.prefix_products();
    let mut values = Vec::with_capacity(prefix.len() * m);
    let mut level_terms = vec![0.0; depth + 1];
    let last = prefix.len() - 1;
    for (k, p) in prefix.iter().enumerate() {
        let mut y = vec![0.0; m];
        for (n, lvl) in levels.iter().enumerate() {
            let mut term = vec![0.0; m];
            for (v, c) in lvl.iter().zip(p.level(n)) {
                for (t, vi) in term.iter_mut().zip(v) {
                    *t += c * vi;
                }
            }
            if k == last {
                level_terms[n] = norm(&term);
            }
            y.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
        }
        values.extend(y);
    }
    let path = SamplePath::from_flat(x.times().to_vec(), m, values)?;

    let a = mats.iter().map(|a| a.iter().map(|v| v * v).sum::<f64>()).sum::<f64>().sqrt();
    let span = x.times()[last] - x.times()[0];
    let tail_bound = series_tail(norm(y0), a * decay.m, decay.beta, span, x.alpha(), depth);
    Ok(LinearSeries { path, tail_bound, level_terms })
}

/// `c Σ_{n > depth} r^n T^{nα} / (β (nα)!)`, summed until the terms are
/// negligible.
fn series_tail(c: f64, r: f64, beta: f64, span: f64, alpha: f64, depth: usize) -> f64 {
    if c == 0.0 || r == 0.0 || span == 0.0 {
        return 0.0;
    }
    let log_term = |n: usize| {
        let na = n as f64 * alpha;
        n as f64 * r.ln() + na * span.ln() - beta.ln() - ln_gamma(1.0 + na)
    };
    let mut sum = 0.0;
    for n in depth + 1..depth + 100_000 {
        let t = log_term(n).exp();
        sum += t;
        // past the peak the terms decay superexponentially
        if n as f64 * alpha > r.powf(1.0 / alpha) * span + 1.0 && t <= 1e-17 * sum {
            break;
        }
    }
    c * sum
}
