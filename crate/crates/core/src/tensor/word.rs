use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::TruncatedTensor;
use crate::error::{Result, RoughError};

/// A word over the alphabet `{1, …, d}`; letters are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<u16>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: &[usize]) -> Result<Self> {
        let mut out = Vec::with_capacity(letters.len());
        for &l in letters {
            if l == 0 || l > u16::MAX as usize {
                return Err(RoughError::Parameter(format!("letter {l} is not a valid 1-based letter")));
            }
            out.push(l as u16);
        }
        Ok(Word(out))
    }

    pub fn letter(i: usize) -> Self {
        Word::new(&[i]).expect("letter must be positive")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&l| l as usize)
    }

    pub fn max_letter(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0) as usize
    }

    /// Lexicographic offset of this word inside its tensor level.
    pub fn index(&self, dim: usize) -> Result<usize> {
        let mut idx = 0usize;
        for l in self.letters() {
            if l > dim {
                return Err(RoughError::Dimension(format!(
                    "letter {l} of word {self} exceeds alphabet size {dim}"
                )));
            }
            idx = idx * dim + (l - 1);
        }
        Ok(idx)
    }

    /// Inverse of `index` for a word of length `len`.
    pub fn from_index(dim: usize, len: usize, mut idx: usize) -> Self {
        let mut letters = vec![0u16; len];
        for slot in letters.iter_mut().rev() {
            *slot = (idx % dim + 1) as u16;
            idx /= dim;
        }
        Word(letters)
    }

    pub fn split_at(&self, k: usize) -> (Word, Word) {
        (Word(self.0[..k].to_vec()), Word(self.0[k..].to_vec()))
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    fn with_letter(&self, l: u16) -> Word {
        let mut v = self.0.clone();
        v.push(l);
        Word(v)
    }

    fn pop_last(&self) -> (Word, u16) {
        let mut v = self.0.clone();
        let l = v.pop().expect("non-empty word");
        (Word(v), l)
    }

    pub fn all_of_length(dim: usize, len: usize) -> Vec<Word> {
        (0..dim.pow(len as u32)).map(|i| Word::from_index(dim, len, i)).collect()
    }

    pub fn all_up_to(dim: usize, max_len: usize) -> Vec<Word> {
        (0..=max_len).flat_map(|n| Word::all_of_length(dim, n)).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let sep = if self.0.iter().any(|&l| l > 9) { "." } else { "" };
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(sep))
    }
}

impl FromStr for Word {
    type Err = RoughError;

    /// Accepts `12`, `1.10.2` (for letters above 9), or `ε` / empty for the
    /// empty word.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "ε" || s.eq_ignore_ascii_case("e") {
            return Ok(Word::empty());
        }
        let letters: Vec<usize> = if s.contains('.') {
            s.split('.')
                .map(|p| p.parse::<usize>().map_err(|_| RoughError::Parse(format!("bad letter {p:?} in {s:?}"))))
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|x| x as usize)
                        .ok_or_else(|| RoughError::Parse(format!("bad letter {c:?} in {s:?}")))
                })
                .collect::<Result<_>>()?
        };
        Word::new(&letters).map_err(|e| RoughError::Parse(e.to_string()))
    }
}

/// Shuffle product with exact integer multiplicities.
pub fn shuffle_counts(u: &Word, v: &Word) -> BTreeMap<Word, u64> {
    let mut out = BTreeMap::new();
    shuffle_into(u, v, 1, &mut out);
    out
}

// ua ⧢ vb = (u ⧢ vb)a + (ua ⧢ v)b, with u ⧢ ε = ε ⧢ u = u
fn shuffle_into(u: &Word, v: &Word, mult: u64, out: &mut BTreeMap<Word, u64>) {
    if u.is_empty() || v.is_empty() {
        let w = if u.is_empty() { v.clone() } else { u.clone() };
        *out.entry(w).or_insert(0) += mult;
        return;
    }
    let (u0, a) = u.pop_last();
    let (v0, b) = v.pop_last();
    let mut left = BTreeMap::new();
    shuffle_into(&u0, v, 1, &mut left);
    for (w, c) in left {
        *out.entry(w.with_letter(a)).or_insert(0) += c * mult;
    }
    let mut right = BTreeMap::new();
    shuffle_into(u, &v0, 1, &mut right);
    for (w, c) in right {
        *out.entry(w.with_letter(b)).or_insert(0) += c * mult;
    }
}

/// `u ⧢ v` as a formal sum.
pub fn shuffle(u: &Word, v: &Word) -> FormalWordSum {
    let mut s = FormalWordSum::zero();
    for (w, c) in shuffle_counts(u, v) {
        s.add_term(w, c as f64);
    }
    s
}

/// Finitely supported linear combination of words; zero coefficients are
/// never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FormalWordSum {
    terms: BTreeMap<Word, f64>,
}

impl FormalWordSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_word(w: Word) -> Self {
        let mut s = Self::zero();
        s.add_term(w, 1.0);
        s
    }

    pub fn add_term(&mut self, w: Word, c: f64) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                if c != 0.0 {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &Word) -> f64 {
        self.terms.get(w).copied().unwrap_or(0.0)
    }

    pub fn max_len(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero();
        for (w, v) in self.terms() {
            out.add_term(w.clone(), c * v);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, v) in other.terms() {
            out.add_term(w.clone(), v);
        }
        out
    }

    /// Bilinear extension of the word shuffle.
    pub fn shuffle(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (u, a) in self.terms() {
            for (v, b) in other.terms() {
                for (w, c) in shuffle_counts(u, v) {
                    out.add_term(w, a * b * c as f64);
                }
            }
        }
        out
    }

    /// `⟨l, X⟩ = Σ_w l_w · X^w`.
    pub fn pair(&self, x: &TruncatedTensor) -> Result<f64> {
        let mut acc = 0.0;
        for (w, c) in self.terms() {
            acc += c * x.coefficient(w)?;
        }
        Ok(acc)
    }
}

impl From<Word> for FormalWordSum {
    fn from(w: Word) -> Self {
        FormalWordSum::from_word(w)
    }
}

/// `⟨l, X⟩`.
pub fn pairing(l: &FormalWordSum, x: &TruncatedTensor) -> Result<f64> {
    l.pair(x)
}

fn fmt_coeff(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c}")
    }
}

impl fmt::Display for FormalWordSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms().enumerate() {
            let sign = if c < 0.0 { "-" } else if k > 0 { "+" } else { "" };
            let mag = c.abs();
            if mag == 1.0 {
                write!(f, "{sign}{w}")?;
            } else {
                write!(f, "{sign}{}*{w}", fmt_coeff(mag))?;
            }
        }
        Ok(())
    }
}
