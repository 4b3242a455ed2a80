//! Compensated Riemann sums of two-parameter germs.
//!
//! Partitions are given as grid-index lists. Refinement bisects every cell
//! at its index midpoint, so successive partitions are nested.

use rayon::prelude::*;

use crate::error::{Result, RoughError};
use crate::path::{germ_delta_unchecked, norm, Germ};

/// Cells per chunk for the partition sum. Chunk boundaries depend only on
/// the partition, so the reduction order (and the result) does not depend
/// on the thread count.
const CHUNK: usize = 512;
const PAR_MIN_CELLS: usize = 8 * CHUNK;
/// Above this many `(s, u, t)` triples the norm estimate restricts `u` to
/// index midpoints.
pub const TRIPLE_LIMIT: usize = 10_000_000;
/// Default absolute tolerance for `sew_converged`.
pub const DEFAULT_ATOL: f64 = 1e-9;

fn check_partition<G: Germ + ?Sized>(xi: &G, s: usize, t: usize, partition: &[usize]) -> Result<()> {
    let n = xi.times().len();
    if partition.len() < 2 && s != t {
        return Err(RoughError::Partition("partition needs at least two points".into()));
    }
    if partition.first() != Some(&s) || partition.last() != Some(&t) {
        return Err(RoughError::Partition(format!(
            "partition does not start at index {s} and end at index {t}"
        )));
    }
    if partition.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RoughError::Partition("partition indices must be strictly increasing".into()));
    }
    if t >= n {
        return Err(RoughError::Partition(format!("index {t} outside grid of {n} points")));
    }
    Ok(())
}

fn chunk_sum<G: Germ + ?Sized>(xi: &G, cells: &[usize]) -> Vec<f64> {
    let dim = xi.out_dim();
    let mut acc = vec![0.0; dim];
    let mut buf = vec![0.0; dim];
    for w in cells.windows(2) {
        xi.eval_into(w[0], w[1], &mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b;
        }
    }
    acc
}

/// `Σ_{[u,v] ∈ P} Ξ_{u,v}` without validation.
pub(crate) fn partition_sum<G: Germ + ?Sized>(xi: &G, partition: &[usize]) -> Vec<f64> {
    let n_cells = partition.len().saturating_sub(1);
    let dim = xi.out_dim();
    if n_cells <= CHUNK {
        return chunk_sum(xi, partition);
    }
    // chunk k covers cells [k*CHUNK, (k+1)*CHUNK)
    let n_chunks = n_cells.div_ceil(CHUNK);
    let piece = |k: usize| {
        let lo = k * CHUNK;
        let hi = ((k + 1) * CHUNK).min(n_cells);
        chunk_sum(xi, &partition[lo..=hi])
    };
    let parts: Vec<Vec<f64>> = if n_cells >= PAR_MIN_CELLS {
        (0..n_chunks).into_par_iter().map(piece).collect()
    } else {
        (0..n_chunks).map(piece).collect()
    };
    let mut acc = vec![0.0; dim];
    for p in parts {
        for (a, b) in acc.iter_mut().zip(p) {
            *a += b;
        }
    }
    acc
}

/// `∫_P Ξ = Σ_{[u,v] ∈ P} Ξ_{u,v}` for a partition of `[t_s, t_t]`.
pub fn sew<G: Germ + ?Sized>(xi: &G, s: usize, t: usize, partition: &[usize]) -> Result<Vec<f64>> {
    check_partition(xi, s, t, partition)?;
    Ok(partition_sum(xi, partition))
}

/// Bisect every cell at its index midpoint. Returns `None` if some cell is
/// a single grid step and cannot be split.
pub fn refine(partition: &[usize]) -> Option<Vec<usize>> {
    let mut out = Vec::with_capacity(2 * partition.len());
    out.push(partition[0]);
    for w in partition.windows(2) {
        if w[1] - w[0] < 2 {
            return None;
        }
        out.push(w[0] + (w[1] - w[0]) / 2);
        out.push(w[1]);
    }
    Some(out)
}

/// Partition of `[s, t]` using every grid point.
pub fn full_partition(s: usize, t: usize) -> Vec<usize> {
    (s..=t).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SewResult {
    /// Sum over the finest partition reached.
    pub value: Vec<f64>,
    /// Largest norm difference between successive refinement levels.
    pub cauchy_gap: f64,
    /// Norm differences between level `k` and `k+1`.
    pub gaps: Vec<f64>,
    /// Partition sum at every level, coarsest first.
    pub level_values: Vec<Vec<f64>>,
    /// Mesh (largest cell width in time) at every level.
    pub meshes: Vec<f64>,
    pub converged: bool,
}

fn mesh(times: &[f64], partition: &[usize]) -> f64 {
    partition.windows(2).map(|w| times[w[1]] - times[w[0]]).fold(0.0, f64::max)
}

fn run_levels<G: Germ + ?Sized>(
    xi: &G,
    base: Vec<usize>,
    max_levels: Option<usize>,
    atol: Option<f64>,
) -> SewResult {
    let times = xi.times();
    let mut part = base;
    let mut level_values = vec![partition_sum(xi, &part)];
    let mut meshes = vec![mesh(times, &part)];
    let mut gaps = Vec::new();
    let mut converged = false;
    loop {
        if max_levels.is_some_and(|k| gaps.len() >= k) {
            break;
        }
        // Once a cell can no longer be bisected, finish with the full grid.
        let next = match refine(&part) {
            Some(p) => p,
            None if part.len() < part[part.len() - 1] - part[0] + 1 => full_partition(part[0], part[part.len() - 1]),
            None => break,
        };
        part = next;
        let v = partition_sum(xi, &part);
        let prev = level_values.last().unwrap();
        let gap = norm(&v.iter().zip(prev).map(|(a, b)| a - b).collect::<Vec<_>>());
        gaps.push(gap);
        level_values.push(v);
        meshes.push(mesh(times, &part));
        if atol.is_some_and(|tol| gap < tol) {
            converged = true;
            break;
        }
    }
    let cauchy_gap = gaps.iter().copied().fold(0.0, f64::max);
    SewResult {
        value: level_values.last().unwrap().clone(),
        cauchy_gap,
        gaps,
        level_values,
        meshes,
        converged,
    }
}

/// Sum over `k` successive bisections of `base`.
pub fn sew_refined<G: Germ + ?Sized>(
    xi: &G,
    s: usize,
    t: usize,
    base: &[usize],
    k: usize,
) -> Result<SewResult> {
    check_partition(xi, s, t, base)?;
    let mut p = base.to_vec();
    for level in 0..k {
        p = refine(&p).ok_or_else(|| {
            RoughError::Grid(format!(
                "grid too coarse for {k} refinements of the base partition (stopped at level {level})"
            ))
        })?;
    }
    Ok(run_levels(xi, base.to_vec(), Some(k), None))
}

/// Refine until successive levels differ by less than `atol` or the grid is
/// exhausted (the last level then uses every grid point). `converged` records which of the two happened.
pub fn sew_converged<G: Germ + ?Sized>(
    xi: &G,
    s: usize,
    t: usize,
    base: &[usize],
    atol: f64,
) -> Result<SewResult> {
    check_partition(xi, s, t, base)?;
    Ok(run_levels(xi, base.to_vec(), None, Some(atol)))
}

/// `Σ_{n≥2} n^{-s}` by a partial sum and an Euler–Maclaurin tail.
fn zeta_from_two(s: f64) -> f64 {
    const N: usize = 16;
    // B_{2k} / (2k)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let mut sum: f64 = (2..N).map(|n| (n as f64).powf(-s)).sum();
    let nf = N as f64;
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // f^{(2k-1)}(N) for f(x) = x^{-s} is -s(s+1)...(s+2k-2) N^{-s-2k+1}
    let mut rising = s;
    for (k, b) in B.iter().enumerate() {
        let order = 2 * k + 1;
        sum += b * rising * nf.powf(-s - order as f64);
        rising *= (s + order as f64) * (s + order as f64 + 1.0);
    }
    sum
}

/// Riemann zeta function for real `s > 1`.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(RoughError::Domain(format!("zeta diverges for s = {s} <= 1")));
    }
    if s.is_infinite() {
        return Ok(1.0);
    }
    Ok(1.0 + zeta_from_two(s))
}

/// `2^β (ζ(β) - 1) + 1`, the constant of the maximal inequality.
pub fn sewing_constant(beta: f64) -> Result<f64> {
    if !(beta > 1.0) {
        return Err(RoughError::Domain(format!("sewing constant needs beta > 1, got {beta}")));
    }
    if beta.is_infinite() {
        return Ok(2.0);
    }
    // 2^β Σ_{n≥2} n^{-β} = Σ_{n≥2} (2/n)^β; for large β summing directly
    // avoids the overflow of 2^β.
    if beta > 200.0 {
        return Ok(1.0 + (2..64).map(|n| (2.0 / n as f64).powf(beta)).sum::<f64>());
    }
    Ok(2f64.powf(beta) * zeta_from_two(beta) + 1.0)
}

/// Grid estimate of `‖δΞ‖_β` on `[t_s, t_t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaNorm {
    pub value: f64,
    pub triples: usize,
    /// True when `u` was restricted to index midpoints.
    pub midpoints_only: bool,
}

/// `sup |δΞ_{a,u,b}| / (t_b - t_a)^β` over grid triples inside `[s, t]`.
pub fn delta_norm<G: Germ + ?Sized>(xi: &G, beta: f64, s: usize, t: usize) -> DeltaNorm {
    let times = xi.times();
    let n = t - s + 1;
    let full_triples = if n >= 3 { n * (n - 1) * (n - 2) / 6 } else { 0 };
    let midpoints_only = full_triples > TRIPLE_LIMIT;
    let dim = xi.out_dim();

    // Germ table for every pair on moderately sized windows.
    let table: Option<Vec<f64>> = (n <= 1024).then(|| {
        let mut tab = vec![0.0; n * n * dim];
        tab.par_chunks_mut(n * dim).enumerate().for_each(|(a, row)| {
            for b in a..n {
                xi.eval_into(s + a, s + b, &mut row[b * dim..(b + 1) * dim]);
            }
        });
        tab
    });
    let delta = |a: usize, u: usize, b: usize| -> f64 {
        match &table {
            Some(tab) => {
                let at = |p: usize, q: usize| &tab[(p * n + q) * dim..(p * n + q + 1) * dim];
                let (ab, au, ub) = (at(a, b), at(a, u), at(u, b));
                (0..dim).map(|i| (ab[i] - au[i] - ub[i]).powi(2)).sum::<f64>().sqrt()
            }
            None => norm(&germ_delta_unchecked(xi, s + a, s + u, s + b)),
        }
    };
    let row = |a: usize| -> (f64, usize) {
        let mut best = 0.0f64;
        let mut count = 0;
        for b in (a + 2)..n {
            let scale = (times[s + b] - times[s + a]).powf(beta);
            if midpoints_only {
                best = best.max(delta(a, (a + b) / 2, b) / scale);
                count += 1;
            } else {
                for u in (a + 1)..b {
                    best = best.max(delta(a, u, b) / scale);
                }
                count += b - a - 1;
            }
        }
        (best, count)
    };
    let (value, triples) = (0..n)
        .into_par_iter()
        .map(row)
        .reduce(|| (0.0, 0), |x, y| (x.0.max(y.0), x.1 + y.1));
    DeltaNorm { value, triples, midpoints_only }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SewingBoundReport {
    /// `max_P |∫_P Ξ - Ξ_{s,t}|` over the bisection levels.
    pub lhs: f64,
    /// `C(β) ‖δΞ‖_β (t - s)^β`.
    pub rhs: f64,
    pub constant: f64,
    pub delta_norm: DeltaNorm,
    pub holds: bool,
}

/// Check the maximal inequality of the sewing construction on `[t_s, t_t]`.
///
/// Partitions are the nested bisections of `{s, t}` down to the grid.
pub fn sewing_bound_check<G: Germ + ?Sized>(xi: &G, beta: f64, s: usize, t: usize) -> Result<SewingBoundReport> {
    let constant = sewing_constant(beta)?;
    if s >= t || t >= xi.times().len() {
        return Err(RoughError::Partition(format!("bad interval indices {s}..{t}")));
    }
    let dn = delta_norm(xi, beta, s, t);
    let direct = xi.eval(s, t);
    let res = run_levels(xi, vec![s, t], None, None);
    let lhs = res
        .level_values
        .iter()
        .map(|v| norm(&v.iter().zip(&direct).map(|(a, b)| a - b).collect::<Vec<_>>()))
        .fold(0.0, f64::max);
    let times = xi.times();
    let rhs = constant * dn.value * (times[t] - times[s]).powf(beta);
    Ok(SewingBoundReport { lhs, rhs, constant, delta_norm: dn, holds: lhs <= rhs * (1.0 + 1e-12) + 1e-300 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{uniform_grid, FnGerm, IncrementGerm, SamplePath};
    use crate::stats::linear_fit;

    fn zeta_oracle(s: f64) -> f64 {
        let m = 1_000_000usize;
        let mut sum = 0.0;
        for n in (1..=m).rev() {
            sum += (n as f64).powf(-s);
        }
        sum + (m as f64 + 0.5).powf(1.0 - s) / (s - 1.0)
    }

    #[test]
    fn zeta_values() {
        let z2 = zeta(2.0).unwrap();
        assert!((z2 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
        for s in [1.05, 1.5, 2.5, 3.7] {
            assert!((zeta(s).unwrap() - zeta_oracle(s)).abs() < 1e-10, "s = {s}");
        }
        assert!(matches!(zeta(1.0), Err(RoughError::Domain(_))));
    }

    #[test]
    fn sewing_constant_values() {
        let c2 = sewing_constant(2.0).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((c2 - (2.0 * pi2 / 3.0 - 3.0)).abs() < 1e-12);
        let c15 = sewing_constant(1.5).unwrap();
        let want = 2f64.powf(1.5) * (zeta_oracle(1.5) - 1.0) + 1.0;
        assert!((c15 - want).abs() < 1e-9);
        assert!(matches!(sewing_constant(0.9), Err(RoughError::Domain(_))));
    }

    #[test]
    fn sewing_constant_decreases_to_two() {
        let mut prev = f64::INFINITY;
        for beta in [1.2, 2.0, 5.0, 20.0, 100.0, 300.0, 1000.0] {
            let c = sewing_constant(beta).unwrap();
            assert!(c <= prev);
            if beta <= 100.0 {
                assert!(c < prev);
            }
            prev = c;
        }
        assert!((prev - 2.0).abs() < 1e-12);
    }

    #[test]
    fn additive_germ_is_exact() {
        let x = SamplePath::from_fn(uniform_grid(1.0, 32), 2, |t| vec![t.sin(), t.powi(3)]).unwrap();
        let g = IncrementGerm(&x);
        let r = sew_refined(&g, 0, 32, &[0, 32], 5).unwrap();
        assert_eq!(r.cauchy_gap, 0.0);
        let want = x.increment_idx(0, 32);
        for (a, b) in r.value.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(sewing_bound_check(&g, 2.0, 0, 32).unwrap().lhs < 1e-15);
    }

    #[test]
    fn left_riemann_sum_of_identity() {
        let n = 64;
        let times = uniform_grid(1.0, n);
        let g = FnGerm::new(&times, 1, |i, j, out: &mut [f64]| out[0] = times[i] * (times[j] - times[i]));
        let v = sew(&g, 0, n, &full_partition(0, n)).unwrap();
        assert!((v[0] - (1.0 - 1.0 / n as f64) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn partition_errors() {
        let times = uniform_grid(1.0, 8);
        let g = FnGerm::new(&times, 1, |_, _, out: &mut [f64]| out[0] = 1.0);
        assert!(matches!(sew(&g, 0, 8, &[0, 4]), Err(RoughError::Partition(_))));
        assert!(matches!(sew(&g, 0, 8, &[0, 4, 4, 8]), Err(RoughError::Partition(_))));
        assert!(matches!(sew_refined(&g, 0, 8, &[0, 8], 4), Err(RoughError::Grid(_))));
        assert!(sew_refined(&g, 0, 8, &[0, 8], 3).is_ok());
    }

    #[test]
    fn young_gap_ratio_is_one_half() {
        let n = 1 << 12;
        let times = uniform_grid(1.0, n);
        let g = FnGerm::new(&times, 1, |i, j, out: &mut [f64]| {
            let (s, t) = (times[i], times[j]);
            out[0] = s.cos() * ((2.0 * t).sin() - (2.0 * s).sin());
        });
        let r = sew_refined(&g, 0, n, &[0, n], 12).unwrap();
        let lv: Vec<f64> = (4..r.gaps.len()).map(|k| k as f64).collect();
        let lg: Vec<f64> = r.gaps[4..].iter().map(|g| g.log2()).collect();
        let slope = linear_fit(&lv, &lg).slope;
        assert!((slope + 1.0).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn chunked_sum_matches_sequential() {
        let n = 10_000;
        let times = uniform_grid(1.0, n);
        let g = FnGerm::new(&times, 1, |i, j, out: &mut [f64]| out[0] = (times[i] * 7.0).sin() * (times[j] - times[i]));
        let p = full_partition(0, n);
        let a = partition_sum(&g, &p);
        let b = partition_sum(&g, &p);
        assert_eq!(a, b);
        let seq: f64 = p.windows(2).map(|w| g.eval(w[0], w[1])[0]).sum();
        assert!((a[0] - seq).abs() < 1e-12);
    }
}
