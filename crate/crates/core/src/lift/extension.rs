use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::metrics::level_sups;
use super::RoughPath;
use crate::error::{Result, RoughError};
use crate::path::{Germ, PairFamily};
use crate::sewing::sew_refined;
use crate::stats::linear_fit;
use crate::tensor::{level_size, TruncatedTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendOptions {
    /// The output lives on the input grid coarsened by `2^k`; each output
    /// cell is sewn over `k` bisection levels of the input cells.
    pub refinement_levels: usize,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        Self { refinement_levels: 4 }
    }
}

/// Envelope `sup |X^{(n)}_{s,t}| / |t-s|^{nα} ≤ M^n / (β (nα)!)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub m: f64,
    pub beta: f64,
    /// Grid sups `sup |X^{(n)}_{s,t}| / |t-s|^{nα}` for `n = 1..=depth`.
    pub level_sups: Vec<f64>,
}

impl DecayFit {
    pub fn bound(&self, n: usize, alpha: f64) -> f64 {
        (n as f64 * self.m.ln() - self.beta.ln() - ln_gamma(1.0 + n as f64 * alpha)).exp()
    }

    /// Least-squares slope of `ln(s_n (nα)!)` in `n` gives `ln M`; the
    /// intercept is then lowered to the tightest envelope, giving `β`.
    pub fn fit(level_sups: Vec<f64>, alpha: f64) -> Self {
        let pts: Vec<(f64, f64)> = level_sups
            .iter()
            .enumerate()
            .filter(|(_, s)| **s > 0.0 && s.is_finite())
            .map(|(k, s)| {
                let n = (k + 1) as f64;
                (n, s.ln() + ln_gamma(1.0 + n * alpha))
            })
            .collect();
        if pts.is_empty() {
            return Self { m: 0.0, beta: 1.0, level_sups };
        }
        let slope = if pts.len() >= 2 {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            linear_fit(&x, &y).slope
        } else {
            pts[0].1 / pts[0].0
        };
        let c = pts.iter().map(|(n, y)| y - n * slope).fold(f64::NEG_INFINITY, f64::max);
        Self { m: slope.exp(), beta: (-c).exp(), level_sups }
    }
}

#[derive(Debug, Clone)]
pub struct Extension {
    pub rough: RoughPath,
    /// Largest Cauchy gap over output cells, per new level `N+1..=M`.
    pub cauchy_gaps: Vec<f64>,
    pub decay: DecayFit,
}

/// Germ `Ξ^{(n+1)}_{u,v} = Σ_{j=1}^{n} X^{(n+1-j)}_{0,u} ⊗ X^{(j)}_{u,v}` on
/// the fine grid, with `X_{u,v} = X_{0,u}^{-1} ⊗ X_{0,v}` from the
/// prefix products known through level `n`.
struct ExtensionGerm<'a> {
    times: &'a [f64],
    dim: usize,
    n: usize,
    prefix: &'a [TruncatedTensor],
    prefix_inv: &'a [TruncatedTensor],
}

impl Germ for ExtensionGerm<'_> {
    fn out_dim(&self) -> usize {
        level_size(self.dim, self.n + 1)
    }

    fn times(&self) -> &[f64] {
        self.times
    }

    fn eval_into(&self, i: usize, j: usize, out: &mut [f64]) {
        let (d, n) = (self.dim, self.n);
        let mut xuv = TruncatedTensor::zero(d, self.prefix[i].depth());
        self.prefix_inv[i].mul_unchecked_into(&self.prefix[j], n, &mut xuv);
        out.iter_mut().for_each(|x| *x = 0.0);
        let a = &self.prefix[i];
        for jj in 1..=n {
            let left = a.level(n + 1 - jj);
            let right = xuv.level(jj);
            let rs = right.len();
            for (ia, &av) in left.iter().enumerate() {
                if av == 0.0 {
                    continue;
                }
                for (o, &bv) in out[ia * rs..(ia + 1) * rs].iter_mut().zip(right) {
                    *o += av * bv;
                }
            }
        }
    }
}

/// Extend a rough path of depth `N` to depth `M > N` by sewing, one level
/// at a time.
///
/// Levels above `N` are taken to vanish on the input cells (their finest
/// scale). Output cells are blocks of `2^k` input cells; levels `≤ N` are
/// copied from the input, levels `N+1..=M` are `IΞ - Ξ` with `IΞ` sewn over
/// `k` bisection levels. Requires `N + 1 > 1/α` for the declared `α`.
///
/// For a path of genuine regularity `α` the neglected fine-cell levels
/// cost a relative error of order `2^{-k((n+1)α - 1)}` at level `n+1`.
pub fn lyons_extend(x: &RoughPath, depth: usize, opts: &ExtendOptions) -> Result<Extension> {
    let (d, big_n, alpha) = (x.dim(), x.depth(), x.alpha());
    if depth <= big_n {
        return Err(RoughError::Depth(format!("target depth {depth} must exceed the current depth {big_n}")));
    }
    if (big_n + 1) as f64 * alpha <= 1.0 {
        return Err(RoughError::Parameter(format!(
            "extension needs (N+1) alpha > 1, got N = {big_n}, alpha = {alpha}"
        )));
    }
    let k = opts.refinement_levels;
    if k == 0 || k >= usize::BITS as usize {
        return Err(RoughError::Resolution(format!("need at least one sewing refinement level, got {k}")));
    }
    let block = 1usize << k;
    let cells = x.n_cells();
    if cells % block != 0 || cells < block {
        return Err(RoughError::Resolution(format!(
            "{cells} grid cells cannot be sewn in blocks of 2^{k}; use a finer grid or fewer levels"
        )));
    }

    let times = x.times();
    let mut prefix: Vec<TruncatedTensor> = x.prefix_products().into_iter().map(|p| p.pad(depth)).collect();
    let n_out = cells / block;
    let mut out_incs: Vec<TruncatedTensor> = (0..n_out)
        .map(|c| x.product(c * block, (c + 1) * block).pad(depth))
        .collect();
    let mut cauchy_gaps = Vec::new();

    for n in big_n..depth {
        let prefix_inv: Vec<TruncatedTensor> = prefix
            .iter()
            .map(|p| p.truncate(n).and_then(|t| t.inverse()).map(|t| t.pad(depth)))
            .collect::<Result<_>>()?;
        let germ = ExtensionGerm { times, dim: d, n, prefix: &prefix, prefix_inv: &prefix_inv };

        let mut gap = 0.0f64;
        for (c, inc) in out_incs.iter_mut().enumerate() {
            let (s, t) = (c * block, (c + 1) * block);
            let res = sew_refined(&germ, s, t, &[s, t], k)?;
            let xi_st = germ.eval(s, t);
            for ((o, v), xi) in inc.level_mut(n + 1).iter_mut().zip(&res.value).zip(&xi_st) {
                *o = v - xi;
            }
            gap = gap.max(res.cauchy_gap);
        }
        cauchy_gaps.push(gap);

        // X^{(n+1)}_{0,u} = IΞ_{0,u}, since Ξ_{0,u} = 0.
        let mut acc = vec![0.0; level_size(d, n + 1)];
        let mut buf = acc.clone();
        let mut cumulative = Vec::with_capacity(cells);
        for u in 0..cells {
            germ.eval_into(u, u + 1, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b;
            }
            cumulative.push(acc.clone());
        }
        for (p, c) in prefix[1..].iter_mut().zip(cumulative) {
            p.level_mut(n + 1).copy_from_slice(&c);
        }
    }

    let out_times: Vec<f64> = times.iter().step_by(block).copied().collect();
    let rough = RoughPath::new(out_times, out_incs, alpha)?;
    let decay = DecayFit::fit(level_sups(&rough, alpha, PairFamily::Auto), alpha);
    Ok(Extension { rough, cauchy_gaps, decay })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::canonical_lift;
    use crate::path::{uniform_grid, SamplePath};

    fn arc(n: usize) -> SamplePath {
        SamplePath::from_fn(uniform_grid(1.0, n), 2, |t| vec![(2.0 * t).cos(), (2.0 * t).sin()]).unwrap()
    }

    /// Padded Chen product of the fine increments: the closed form of the
    /// finest-level sewing sum.
    fn padded_chen(x: &RoughPath, depth: usize, block: usize) -> Vec<TruncatedTensor> {
        (0..x.n_cells() / block)
            .map(|c| {
                let mut acc = TruncatedTensor::unit(x.dim(), depth);
                for inc in &x.increments()[c * block..(c + 1) * block] {
                    acc = acc.mul(&inc.pad(depth)).unwrap();
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_padded_chen_product() {
        let x = canonical_lift(&arc(64), 2, 0.9).unwrap();
        let ext = lyons_extend(&x, 4, &ExtendOptions { refinement_levels: 3 }).unwrap();
        for (a, b) in ext.rough.increments().iter().zip(padded_chen(&x, 4, 8)) {
            assert!(a.max_abs_diff(&b).unwrap() < 1e-13);
        }
    }

    #[test]
    fn level_three_of_arc() {
        let fine = 1 << 12;
        let x = canonical_lift(&arc(fine), 2, 0.9).unwrap();
        let ext = lyons_extend(&x, 3, &ExtendOptions { refinement_levels: 9 }).unwrap();
        // oracle: depth-3 canonical lift on a 16x finer mesh
        let oracle = canonical_lift(&arc(fine * 16), 3, 0.9).unwrap().coarsen(16 * 512).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in ext.rough.increments().iter().zip(oracle.increments()) {
            let diff: f64 = a.level(3).iter().zip(b.level(3)).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(diff / b.level_norm(3));
        }
        assert!(worst < 1e-5, "rel err {worst}");
        assert!(ext.rough.chen_residual(usize::MAX) < 1e-12);
    }

    #[test]
    fn lower_levels_are_copied() {
        let x = canonical_lift(&arc(32), 2, 0.9).unwrap();
        let ext = lyons_extend(&x, 3, &ExtendOptions { refinement_levels: 2 }).unwrap();
        for (c, inc) in ext.rough.increments().iter().enumerate() {
            let orig = x.evaluate_idx(4 * c, 4 * (c + 1)).unwrap();
            for n in 0..=2 {
                assert_eq!(inc.level(n), orig.level(n));
            }
        }
        let again = lyons_extend(&ext.rough, 5, &ExtendOptions { refinement_levels: 1 }).unwrap();
        for (c, inc) in again.rough.increments().iter().enumerate() {
            let orig = ext.rough.evaluate_idx(2 * c, 2 * (c + 1)).unwrap();
            for n in 0..=3 {
                assert_eq!(inc.level(n), orig.level(n));
            }
        }
    }

    #[test]
    fn scalar_extension_approaches_exponential() {
        let x = 0.8;
        let mut errs = Vec::new();
        for k in [6usize, 8, 10] {
            let path = SamplePath::from_fn(uniform_grid(1.0, 1 << k), 1, |t| vec![x * t]).unwrap();
            let l = canonical_lift(&path, 1, 0.6).unwrap().truncate(1).unwrap();
            let ext = lyons_extend(&l, 5, &ExtendOptions { refinement_levels: k }).unwrap();
            let top = &ext.rough.increments()[0];
            let err = (2..=5)
                .map(|n| {
                    let want = x.powi(n as i32) / (1..=n).product::<usize>() as f64;
                    ((top.level(n)[0] - want) / want).abs()
                })
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[2] < 1e-2);
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5);
    }

    #[test]
    fn argument_errors() {
        let x = canonical_lift(&arc(16), 2, 0.3).unwrap();
        assert!(matches!(lyons_extend(&x, 2, &ExtendOptions::default()), Err(RoughError::Depth(_))));
        assert!(matches!(lyons_extend(&x, 3, &ExtendOptions::default()), Err(RoughError::Parameter(_))));
        let y = x.clone().with_alpha(0.9).unwrap();
        assert!(matches!(lyons_extend(&y, 3, &ExtendOptions { refinement_levels: 0 }), Err(RoughError::Resolution(_))));
        assert!(matches!(lyons_extend(&y, 3, &ExtendOptions { refinement_levels: 5 }), Err(RoughError::Resolution(_))));
    }

    #[test]
    fn decay_fit_envelopes_sups() {
        let x = canonical_lift(&arc(256), 2, 0.9).unwrap();
        let ext = lyons_extend(&x, 5, &ExtendOptions { refinement_levels: 4 }).unwrap();
        let f = &ext.decay;
        assert!(f.m > 0.0 && f.beta > 0.0);
        for (k, s) in f.level_sups.iter().enumerate() {
            assert!(*s <= f.bound(k + 1, 0.9) * (1.0 + 1e-9));
        }
    }
}
