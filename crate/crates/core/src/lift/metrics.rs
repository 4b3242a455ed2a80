use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{canonical_lift, RoughPath};
use crate::error::{Result, RoughError};
use crate::path::{check_exponent, dyadic_pairs, norm, PairFamily, SamplePath};
use crate::tensor::TruncatedTensor;

/// Per level `n = 1..=depth`, the grid sup of
/// `|X^{(n)}_{s,t} - Y^{(n)}_{s,t}| / (t-s)^{nα}` (`Y = 0` when absent).
fn level_diff_sups(x: &RoughPath, y: Option<&RoughPath>, alpha: f64, pairs: PairFamily) -> Vec<f64> {
    let (n_pts, depth) = (x.times().len(), x.depth());
    let times = x.times();
    let score = |i: usize, j: usize, a: &TruncatedTensor, b: Option<&TruncatedTensor>, out: &mut [f64]| {
        let h = times[j] - times[i];
        for n in 1..=depth {
            let v = match b {
                Some(b) => a.level(n).iter().zip(b.level(n)).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt(),
                None => norm(a.level(n)),
            };
            out[n - 1] = out[n - 1].max(v / h.powf(n as f64 * alpha));
        }
    };
    let merge = |mut a: Vec<f64>, b: Vec<f64>| {
        a.iter_mut().zip(b).for_each(|(p, q)| *p = p.max(q));
        a
    };
    match pairs.resolve(n_pts) {
        PairFamily::All => {
            let row = |i: usize| {
                let mut out = vec![0.0; depth];
                let mut ax = TruncatedTensor::unit(x.dim(), depth);
                let mut ay = ax.clone();
                let mut tmp = ax.clone();
                for j in (i + 1)..n_pts {
                    ax.mul_unchecked_into(&x.increments()[j - 1], depth, &mut tmp);
                    std::mem::swap(&mut ax, &mut tmp);
                    if let Some(y) = y {
                        ay.mul_unchecked_into(&y.increments()[j - 1], depth, &mut tmp);
                        std::mem::swap(&mut ay, &mut tmp);
                    }
                    score(i, j, &ax, y.map(|_| &ay), &mut out);
                }
                out
            };
            if n_pts > 256 {
                (0..n_pts).into_par_iter().map(row).reduce(|| vec![0.0; depth], merge)
            } else {
                (0..n_pts).map(row).fold(vec![0.0; depth], merge)
            }
        }
        _ => dyadic_pairs(n_pts)
            .into_par_iter()
            .map(|(i, j)| {
                let mut out = vec![0.0; depth];
                let yp = y.map(|y| y.product(i, j));
                score(i, j, &x.product(i, j), yp.as_ref(), &mut out);
                out
            })
            .reduce(|| vec![0.0; depth], merge),
    }
}

/// Grid sups `sup |X^{(n)}_{s,t}| / |t-s|^{nα}` for `n = 1..=depth`.
pub fn level_sups(x: &RoughPath, alpha: f64, pairs: PairFamily) -> Vec<f64> {
    level_diff_sups(x, None, alpha, pairs)
}

/// `max_n sup_{s<t} |X^{(n)}_{s,t}| / |t-s|^{nα}` over grid pairs.
pub fn homogeneous_norm(x: &RoughPath, alpha: f64) -> f64 {
    level_sups(x, alpha, PairFamily::Auto).into_iter().fold(0.0, f64::max)
}

/// Inhomogeneous distance `Σ_{n=1}^{L} sup |X^{(n)}_{s,t} - Y^{(n)}_{s,t}| / |t-s|^{nα}`
/// with `L = min(⌊1/α⌋, depth)`.
pub fn rho_alpha(x: &RoughPath, y: &RoughPath, alpha: f64) -> Result<f64> {
    check_exponent(alpha)?;
    if x.dim() != y.dim() || x.depth() != y.depth() {
        return Err(RoughError::Dimension(format!(
            "rough paths of shape (d={}, N={}) and (d={}, N={})",
            x.dim(),
            x.depth(),
            y.dim(),
            y.depth()
        )));
    }
    if x.times() != y.times() {
        return Err(RoughError::Dimension("rough paths live on different grids".into()));
    }
    let levels = ((1.0 / alpha).floor() as usize).clamp(1, x.depth());
    let sups = level_diff_sups(x, Some(y), alpha, PairFamily::Auto);
    Ok(sups[..levels].iter().sum())
}

/// `ρ_α` between canonical lifts of `x` sampled on successive dyadic
/// subgrids. Entry `k` compares the level `k0 + k` lift with the level
/// `k0 + k + 1` lift, both evaluated on the coarser grid. The grid of `x`
/// must have `2^K + 1` points; `k0 < K`.
pub fn successive_dyadic_rho(x: &SamplePath, depth: usize, alpha: f64, k0: u32) -> Result<Vec<f64>> {
    let cells = x.len() - 1;
    if !cells.is_power_of_two() {
        return Err(RoughError::Grid(format!("need 2^K cells, got {cells}")));
    }
    let top = cells.trailing_zeros();
    if k0 >= top {
        return Err(RoughError::Parameter(format!("coarsest level {k0} must be below {top}")));
    }
    let lift_at = |k: u32| canonical_lift(&x.subsample(1 << (top - k))?, depth, alpha);
    let mut out = Vec::new();
    let mut coarse = lift_at(k0)?;
    for k in k0..top {
        let fine = lift_at(k + 1)?;
        out.push(rho_alpha(&coarse, &fine.coarsen(2)?, alpha)?);
        coarse = fine;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeoClassical {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Both sides of
/// `α Σ_{j=0}^{n} s^{jα} t^{(n-j)α} / ((jα)! ((n-j)α)!) ≤ (s+t)^{nα} / (nα)!`
/// with `x! = Γ(1+x)`.
pub fn neo_classical_check(alpha: f64, n: usize, s: f64, t: f64) -> Result<NeoClassical> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(RoughError::Parameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(s > 0.0 && t > 0.0 && s.is_finite() && t.is_finite()) {
        return Err(RoughError::Parameter(format!("s and t must be positive and finite, got {s}, {t}")));
    }
    let fact = |x: f64| ln_gamma(1.0 + x);
    let lhs = alpha
        * (0..=n)
            .map(|j| {
                let (a, b) = (j as f64 * alpha, (n - j) as f64 * alpha);
                (a * s.ln() + b * t.ln() - fact(a) - fact(b)).exp()
            })
            .sum::<f64>();
    let na = n as f64 * alpha;
    let rhs = (na * (s + t).ln() - fact(na)).exp();
    Ok(NeoClassical { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::uniform_grid;

    fn wave(n: usize, c: f64) -> SamplePath {
        SamplePath::from_fn(uniform_grid(1.0, n), 2, |t| vec![c * (5.0 * t).sin(), c * t * t]).unwrap()
    }

    #[test]
    fn rho_is_a_distance() {
        let a = canonical_lift(&wave(24, 1.0), 2, 0.4).unwrap();
        let b = canonical_lift(&wave(24, 1.3), 2, 0.4).unwrap();
        let c = canonical_lift(&wave(24, -0.5), 2, 0.4).unwrap();
        assert_eq!(rho_alpha(&a, &a, 0.4).unwrap(), 0.0);
        let ab = rho_alpha(&a, &b, 0.4).unwrap();
        assert!((ab - rho_alpha(&b, &a, 0.4).unwrap()).abs() < 1e-12);
        assert!(ab <= rho_alpha(&a, &c, 0.4).unwrap() + rho_alpha(&c, &b, 0.4).unwrap() + 1e-10);
    }

    #[test]
    fn rho_level_cap() {
        // α = 0.6 keeps level 1 only
        let a = canonical_lift(&wave(8, 1.0), 2, 0.6).unwrap();
        let b = canonical_lift(&wave(8, 2.0), 2, 0.6).unwrap();
        let l1 = level_diff_sups(&a, Some(&b), 0.6, PairFamily::All)[0];
        assert_eq!(rho_alpha(&a, &b, 0.6).unwrap(), l1);
        let short = a.truncate(1).unwrap();
        assert!(matches!(rho_alpha(&a, &short, 0.6), Err(RoughError::Dimension(_))));
    }

    #[test]
    fn homogeneous_norm_of_segment() {
        // one unit segment in R^1: X^{(n)} = h^n / n!, ratio 1/n! at α = 1
        let x = SamplePath::from_fn(uniform_grid(1.0, 4), 1, |t| vec![t]).unwrap();
        let l = canonical_lift(&x, 3, 1.0).unwrap();
        let s = level_sups(&l, 1.0, PairFamily::All);
        assert!((s[0] - 1.0).abs() < 1e-14 && (s[1] - 0.5).abs() < 1e-14 && (s[2] - 1.0 / 6.0).abs() < 1e-14);
        assert!((homogeneous_norm(&l, 1.0) - 1.0).abs() < 1e-14);
        let zero = canonical_lift(&SamplePath::constant(uniform_grid(1.0, 4), &[0.0]).unwrap(), 3, 1.0).unwrap();
        assert_eq!(homogeneous_norm(&zero, 1.0), 0.0);
    }

    #[test]
    fn dyadic_pairs_agree_with_brute_force() {
        let l = canonical_lift(&wave(5000, 1.0), 2, 0.5).unwrap();
        let fast = level_sups(&l, 0.5, PairFamily::Dyadic);
        let brute = dyadic_pairs(5001)
            .into_iter()
            .map(|(i, j)| norm(l.evaluate_idx(i, j).unwrap().level(2)) / (l.times()[j] - l.times()[i]))
            .fold(0.0, f64::max);
        assert!((fast[1] - brute).abs() <= 1e-12 * brute);
    }

    #[test]
    fn neo_classical_examples() {
        for (n, s, t) in [(3usize, 1.0, 2.0), (7, 0.2, 5.0)] {
            let r = neo_classical_check(1.0, n, s, t).unwrap();
            assert!(r.holds && ((r.lhs - r.rhs) / r.rhs).abs() < 1e-12);
        }
        let r = neo_classical_check(0.5, 2, 1.0, 1.0).unwrap();
        // 0.5 (2/Γ(2) + 1/Γ(1.5)^2) vs 2/Γ(2)
        let g = std::f64::consts::PI.sqrt() / 2.0;
        assert!((r.lhs - 0.5 * (2.0 + 1.0 / (g * g))).abs() < 1e-13);
        assert!((r.rhs - 2.0).abs() < 1e-13 && r.holds);
        assert!(neo_classical_check(0.0, 1, 1.0, 1.0).is_err());
        assert!(neo_classical_check(0.5, 1, -1.0, 1.0).is_err());
    }

    #[test]
    fn smooth_lifts_converge() {
        let x = wave(1 << 8, 1.0);
        let r = successive_dyadic_rho(&x, 2, 0.5, 3).unwrap();
        assert_eq!(r.len(), 5);
        assert!(r.windows(2).all(|w| w[1] < w[0]));
    }
}
