//! Truncated tensor algebra `T^N(R^d)`.
//!
//! An element is stored as `N + 1` dense coefficient blocks; block `n` holds
//! the `d^n` coefficients of `(R^d)^{⊗n}` in lexicographic multi-index order,
//! so the coefficient of the word `i_1 … i_n` (letters 1-based) sits at
//! offset `Σ_k (i_k - 1) d^{n-k}`.

mod word;

pub use word::{pairing, shuffle, shuffle_counts, FormalWordSum, Word};

use crate::error::{Result, RoughError};

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTensor {
    dim: usize,
    levels: Vec<Vec<f64>>,
}

/// Number of scalars in level `n` of a `d`-dimensional algebra.
pub fn level_size(dim: usize, n: usize) -> usize {
    dim.pow(n as u32)
}

impl TruncatedTensor {
    pub fn zero(dim: usize, depth: usize) -> Self {
        assert!(dim > 0, "tensor dimension must be positive");
        let levels = (0..=depth).map(|n| vec![0.0; level_size(dim, n)]).collect();
        Self { dim, levels }
    }

    /// The unit `1 = (1, 0, 0, …)`.
    pub fn unit(dim: usize, depth: usize) -> Self {
        let mut t = Self::zero(dim, depth);
        t.levels[0][0] = 1.0;
        t
    }

    pub fn from_levels(dim: usize, levels: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(RoughError::Dimension("dimension must be positive".into()));
        }
        if levels.is_empty() {
            return Err(RoughError::Depth("at least level 0 is required".into()));
        }
        for (n, block) in levels.iter().enumerate() {
            if block.len() != level_size(dim, n) {
                return Err(RoughError::Dimension(format!(
                    "level {n} has {} coefficients, expected {}",
                    block.len(),
                    level_size(dim, n)
                )));
            }
        }
        Ok(Self { dim, levels })
    }

    /// Group-like exponential of a level-1 vector: level `n` is `v^{⊗n}/n!`.
    pub fn exp(v: &[f64], depth: usize) -> Self {
        let dim = v.len();
        let mut t = Self::unit(dim, depth);
        for n in 1..=depth {
            let (lo, hi) = t.levels.split_at_mut(n);
            let prev = &lo[n - 1];
            let cur = &mut hi[0];
            let inv_n = 1.0 / n as f64;
            for (a, &p) in prev.iter().enumerate() {
                let base = a * dim;
                for (i, &vi) in v.iter().enumerate() {
                    cur[base + i] = p * vi * inv_n;
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.levels[n]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn scalar(&self) -> f64 {
        self.levels[0][0]
    }

    /// Frobenius norm of level `n`.
    pub fn level_norm(&self, n: usize) -> f64 {
        self.levels[n].iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(RoughError::Dimension(format!(
                "tensor dimensions {} and {} differ",
                self.dim, other.dim
            )));
        }
        if self.depth() != other.depth() {
            return Err(RoughError::Depth(format!(
                "tensor depths {} and {} differ",
                self.depth(),
                other.depth()
            )));
        }
        Ok(())
    }

    /// Truncated product `π_n(a ⊗ b) = Σ_{i+j=n} π_i(a) ⊗ π_j(b)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = Self::zero(self.dim, self.depth());
        self.mul_unchecked_into(other, self.depth(), &mut out);
        Ok(out)
    }

    /// Product of two tensors of equal shape, computing levels `0..=upto` only.
    pub(crate) fn mul_unchecked_into(&self, other: &Self, upto: usize, out: &mut Self) {
        let d = self.dim;
        for n in 0..=upto {
            let dst = &mut out.levels[n];
            dst.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..=n {
                let j = n - i;
                let a = &self.levels[i];
                let b = &other.levels[j];
                let bj = level_size(d, j);
                for (ia, &av) in a.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    let row = &mut dst[ia * bj..(ia + 1) * bj];
                    for (r, &bv) in row.iter_mut().zip(b) {
                        *r += av * bv;
                    }
                }
            }
        }
    }

    /// Inverse in the truncated algebra; requires a non-zero scalar part.
    pub fn inverse(&self) -> Result<Self> {
        let a0 = self.scalar();
        if a0 == 0.0 {
            return Err(RoughError::Numerical(
                "tensor with zero scalar part is not invertible".into(),
            ));
        }
        // a = a0 (1 + x)  =>  a^{-1} = a0^{-1} Σ_k (-x)^k
        let mut x = self.scale(1.0 / a0);
        x.levels[0][0] = 0.0;
        let neg_x = x.scale(-1.0);
        let mut acc = Self::unit(self.dim, self.depth());
        let mut power = Self::unit(self.dim, self.depth());
        let mut tmp = Self::zero(self.dim, self.depth());
        for _ in 0..self.depth() {
            power.mul_unchecked_into(&neg_x, self.depth(), &mut tmp);
            std::mem::swap(&mut power, &mut tmp);
            acc = acc.add(&power)?;
        }
        Ok(acc.scale(1.0 / a0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Self { dim: self.dim, levels })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        let levels = self
            .levels
            .iter()
            .map(|a| a.iter().map(|x| c * x).collect())
            .collect();
        Self { dim: self.dim, levels }
    }

    /// Drop levels above `depth`.
    pub fn truncate(&self, depth: usize) -> Result<Self> {
        if depth > self.depth() {
            return Err(RoughError::Depth(format!(
                "cannot truncate depth {} to larger depth {depth}",
                self.depth()
            )));
        }
        Ok(Self { dim: self.dim, levels: self.levels[..=depth].to_vec() })
    }

    /// Append zero levels up to `depth`.
    pub fn pad(&self, depth: usize) -> Self {
        let mut levels = self.levels.clone();
        for n in levels.len()..=depth {
            levels.push(vec![0.0; level_size(self.dim, n)]);
        }
        Self { dim: self.dim, levels }
    }

    /// Coefficient of a word in this tensor.
    pub fn coefficient(&self, word: &Word) -> Result<f64> {
        let n = word.len();
        if n > self.depth() {
            return Err(RoughError::Depth(format!(
                "word {word} of length {n} exceeds tensor depth {}",
                self.depth()
            )));
        }
        Ok(self.levels[n][word.index(self.dim)?])
    }

    /// Largest coefficient-wise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self
            .levels
            .iter()
            .flatten()
            .zip(other.levels.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Worst violation of the shuffle identity `<u,X><v,X> = <u ⧢ v, X>`
    /// over all word pairs of total length at most the depth. A tensor is
    /// group-like exactly when this vanishes and the scalar part is 1.
    pub fn group_like_defect(&self) -> f64 {
        let words = Word::all_up_to(self.dim, self.depth());
        let mut worst = (self.scalar() - 1.0).abs();
        for u in &words {
            for v in &words {
                if u.len() + v.len() > self.depth() || u.is_empty() || v.is_empty() {
                    continue;
                }
                let lhs = self.coefficient(u).unwrap() * self.coefficient(v).unwrap();
                let rhs = shuffle(u, v).pair(self).unwrap();
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    /// Flat row `d, N, level_0, level_1, …`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut row = Vec::with_capacity(2 + self.levels.iter().map(Vec::len).sum::<usize>());
        row.push(self.dim as f64);
        row.push(self.depth() as f64);
        for block in &self.levels {
            row.extend_from_slice(block);
        }
        row
    }

    pub fn from_flat(row: &[f64]) -> Result<Self> {
        if row.len() < 3 {
            return Err(RoughError::Parse("tensor row needs at least d, N and level 0".into()));
        }
        let (d, n) = (row[0], row[1]);
        if d < 1.0 || d.fract() != 0.0 || n < 0.0 || n.fract() != 0.0 {
            return Err(RoughError::Parse(format!("bad tensor header d={d}, N={n}")));
        }
        let (dim, depth) = (d as usize, n as usize);
        let mut levels = Vec::with_capacity(depth + 1);
        let mut offset = 2;
        for k in 0..=depth {
            let len = level_size(dim, k);
            let block = row.get(offset..offset + len).ok_or_else(|| {
                RoughError::Parse(format!("tensor row truncated in level {k}"))
            })?;
            levels.push(block.to_vec());
            offset += len;
        }
        if offset != row.len() {
            return Err(RoughError::Parse(format!(
                "tensor row has {} trailing values",
                row.len() - offset
            )));
        }
        Self::from_levels(dim, levels)
    }
}

/// `a ⊗ b` in `T^N(R^d)`.
pub fn tensor_mul(a: &TruncatedTensor, b: &TruncatedTensor) -> Result<TruncatedTensor> {
    a.mul(b)
}

/// Group-like exponential of `v` in `T^N(R^d)`; `v.len()` must equal `dim`.
pub fn exp_tensor(v: &[f64], dim: usize, depth: usize) -> Result<TruncatedTensor> {
    if v.len() != dim || dim == 0 {
        return Err(RoughError::Dimension(format!(
            "vector of length {} for dimension {dim}",
            v.len()
        )));
    }
    Ok(TruncatedTensor::exp(v, depth))
}
