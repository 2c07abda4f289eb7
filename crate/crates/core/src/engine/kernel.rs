//! Residue-level evaluation of the pointwise coefficient formula.
//!
//! Every indicator in the formula compares a shifted residue of `k` with a
//! threshold `mo(p_i^{-1}, p_j)`. The shifts come from subsets of pairs, so
//! the inner loop is a handful of modular subtractions and comparisons.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::arith::{inv_residue, PrimeTuple};
use crate::error::{Error, Result};

use super::OrientationSet;

/// Largest number of primes the pointwise kernel accepts.
pub const MAX_KERNEL_PRIMES: usize = 7;

pub(crate) trait ModWord: Clone + Ord + Send + Sync + std::fmt::Debug {
    fn from_big(v: &BigUint) -> Self;
    fn sub_mod(&self, b: &Self, m: &Self) -> Self;
}

impl ModWord for u64 {
    fn from_big(v: &BigUint) -> Self {
        v.to_u64().expect("word-sized residue")
    }

    fn sub_mod(&self, b: &Self, m: &Self) -> Self {
        if self >= b {
            self - b
        } else {
            self + (m - b)
        }
    }
}

impl ModWord for BigUint {
    fn from_big(v: &BigUint) -> Self {
        v.clone()
    }

    fn sub_mod(&self, b: &Self, m: &Self) -> Self {
        if self >= b {
            self - b
        } else {
            self + m - b
        }
    }
}

/// Subsets `A` of pairs avoiding `i`, stored as their sign and the masks
/// `T_j(A) = {j' : {j, j'} ∈ A}` for every `j`.
#[derive(Debug, Clone)]
pub(crate) struct Subsets {
    pub signs: Vec<i8>,
    pub masks: Vec<u32>,
}

#[derive(Debug, Clone)]
pub(crate) struct Kernel<W> {
    pub n: usize,
    pub moduli: Vec<W>,
    /// `[i * n + j]` holds `mo(p_i^{-1}, p_j)`.
    pub thresholds: Vec<W>,
    /// `[(j << n) | mask]` holds `mo(Σ_{i ∈ mask} p_i^{-1}, p_j)`.
    pub shifts: Vec<W>,
    pub orient: Vec<bool>,
    /// `(-1)^{#{j : (j, i) ∈ S}}`.
    pub flips: Vec<i64>,
    pub subsets: Vec<Subsets>,
}

pub(crate) fn pair_subsets(n: usize, i: usize) -> Subsets {
    let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let mut pairs = Vec::new();
    for (a, &j1) in others.iter().enumerate() {
        for &j2 in &others[a + 1..] {
            pairs.push((j1, j2));
        }
    }
    let count = 1usize << pairs.len();
    let mut signs = Vec::with_capacity(count);
    let mut masks = vec![0u32; count * n];
    for bits in 0..count {
        let row = &mut masks[bits * n..(bits + 1) * n];
        let mut sign = 1i8;
        for (b, &(j1, j2)) in pairs.iter().enumerate() {
            if bits >> b & 1 == 1 {
                row[j1] |= 1 << j2;
                row[j2] |= 1 << j1;
                sign = -sign;
            }
        }
        signs.push(sign);
    }
    Subsets { signs, masks }
}

/// `mo(Σ_{i ∈ mask} p_i^{-1}, p_j)` for every `j` and every mask over `[n]`.
pub(crate) fn shift_table(t: &PrimeTuple) -> Result<Vec<BigUint>> {
    let n = t.len();
    let mut out = Vec::with_capacity(n << n);
    for j in 0..n {
        let pj = t.prime(j);
        let inv: Vec<BigUint> = (0..n)
            .map(|i| {
                if i == j {
                    Ok(BigUint::default())
                } else {
                    inv_residue(t.prime(i), pj)
                }
            })
            .collect::<Result<_>>()?;
        let base = out.len();
        out.push(BigUint::default());
        for mask in 1usize..(1 << n) {
            let low = mask.trailing_zeros() as usize;
            let v = (&out[base + (mask & (mask - 1))] + &inv[low]) % pj;
            out.push(v);
        }
    }
    Ok(out)
}

impl<W: ModWord> Kernel<W> {
    pub fn build(t: &PrimeTuple, s: &OrientationSet) -> Result<Self> {
        let n = t.len();
        if n > MAX_KERNEL_PRIMES {
            return Err(Error::unsupported(format!(
                "pointwise evaluation supports at most {MAX_KERNEL_PRIMES} primes, got {n}"
            )));
        }
        if s.len() != n {
            return Err(Error::invalid(format!(
                "orientation set is for {} primes, tuple has {n}",
                s.len()
            )));
        }
        let moduli: Vec<W> = t.primes().iter().map(W::from_big).collect();
        let mut thresholds = Vec::with_capacity(n * n);
        let mut orient = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    thresholds.push(W::from_big(&BigUint::default()));
                    orient.push(false);
                } else {
                    thresholds.push(W::from_big(&inv_residue(t.prime(i), t.prime(j))?));
                    orient.push(s.contains(i, j));
                }
            }
        }
        let shifts = shift_table(t)?.iter().map(W::from_big).collect();
        let flips = (0..n)
            .map(|i| {
                let back = (0..n).filter(|&j| j != i && !s.contains(i, j)).count();
                if back % 2 == 0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let subsets = (0..n).map(|i| pair_subsets(n, i)).collect();
        Ok(Kernel {
            n,
            moduli,
            thresholds,
            shifts,
            orient,
            flips,
            subsets,
        })
    }

    /// Whether the indicator for `(i, j)` holds at the shifted residue.
    #[inline]
    fn passes(&self, i: usize, j: usize, h: &W, mask: u32) -> bool {
        let n = self.n;
        let shifted = h.sub_mod(&self.shifts[(j << n) | mask as usize], &self.moduli[j]);
        let below = shifted < self.thresholds[i * n + j];
        below == self.orient[i * n + j]
    }

    /// The `i`-th summand; depends on `h` only through the coordinates `j ≠ i`.
    pub fn term(&self, i: usize, h: &[W]) -> i64 {
        let n = self.n;
        let sub = &self.subsets[i];
        let mut total = 0i64;
        for (a, &sign) in sub.signs.iter().enumerate() {
            let row = &sub.masks[a * n..(a + 1) * n];
            if (0..n).all(|j| j == i || self.passes(i, j, &h[j], row[j])) {
                total += i64::from(sign);
            }
        }
        total * self.flips[i]
    }

    pub fn eval(&self, h: &[W]) -> i64 {
        (0..self.n).map(|i| self.term(i, h)).sum()
    }

    /// Pass/fail bitsets over boundary indices: entry `[((j * n + i) << n) | mask]`
    /// has bit `x` set when the indicator for `(i, j)` holds at `boundaries[j][x]`
    /// shifted by `mask`.
    pub fn pass_bits(&self, boundaries: &[Vec<W>]) -> Vec<u64> {
        let n = self.n;
        let mut out = vec![0u64; (n * n) << n];
        for j in 0..n {
            assert!(boundaries[j].len() <= 64, "boundary count fits a word");
            for i in (0..n).filter(|&i| i != j) {
                for mask in 0u32..(1 << n) {
                    if mask >> i & 1 == 1 || mask >> j & 1 == 1 {
                        continue;
                    }
                    let mut bits = 0u64;
                    for (x, b) in boundaries[j].iter().enumerate() {
                        if self.passes(i, j, b, mask) {
                            bits |= 1 << x;
                        }
                    }
                    out[((j * n + i) << n) | mask as usize] = bits;
                }
            }
        }
        out
    }
}

/// Region-level evaluation from precomputed pass bitsets.
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub n: usize,
    pub bits: Vec<u64>,
    pub flips: Vec<i64>,
    pub subsets: Vec<Subsets>,
}

impl Grid {
    pub fn term(&self, i: usize, x: &[usize]) -> i64 {
        let n = self.n;
        let sub = &self.subsets[i];
        let mut total = 0i64;
        for (a, &sign) in sub.signs.iter().enumerate() {
            let row = &sub.masks[a * n..(a + 1) * n];
            let ok = (0..n).all(|j| {
                j == i || self.bits[((j * n + i) << n) | row[j] as usize] >> x[j] & 1 == 1
            });
            if ok {
                total += i64::from(sign);
            }
        }
        total * self.flips[i]
    }

    pub fn eval(&self, x: &[usize]) -> i64 {
        (0..self.n).map(|i| self.term(i, x)).sum()
    }
}
