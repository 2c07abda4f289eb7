//! Pointwise coefficients from residues, the region model, and the
//! three-prime classification.

mod kernel;
mod pqr;
mod profile;
mod region;
mod render;

pub use kernel::MAX_KERNEL_PRIMES;
pub use pqr::{balance_identity_holds, classify_pqr, figure_value, table_pqr, Pqr, PqrCase, RegionTable3};
pub use profile::{maclaurin_holds, residue_profile, DimensionProfile, ResidueProfile};
pub use region::{
    coeff_region_lookup, region_representative, region_scan_height, zero_by_prop, Region,
    RegionMap, ScanReport,
};
pub use render::{region_table_csv, table3_csv, table3_svg};

pub(crate) use kernel::{Grid, Kernel, ModWord};

use num_bigint::{BigInt, BigUint};
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::arith::{inv_residue, reduce, PrimeTuple};
use crate::error::{Error, Result};

/// A choice of one ordered pair from each `{(i, j), (j, i)}`, stored as an
/// `n × n` incidence matrix over 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientationSet {
    n: usize,
    has: Vec<bool>,
}

impl OrientationSet {
    /// `{(i, j) : i > j}`.
    pub fn default_for(n: usize) -> Self {
        let mut has = vec![false; n * n];
        for i in 0..n {
            for j in 0..i {
                has[i * n + j] = true;
            }
        }
        OrientationSet { n, has }
    }

    /// Bit `b` of `bits` picks `(i, j)` over `(j, i)` for the `b`-th pair
    /// `i < j` in lexicographic order; pairs past the 64th take `(j, i)`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        let mut has = vec![false; n * n];
        let mut b = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if b < 64 && bits >> b & 1 == 1 {
                    has[i * n + j] = true;
                } else {
                    has[j * n + i] = true;
                }
                b += 1;
            }
        }
        OrientationSet { n, has }
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut has = vec![false; n * n];
        for &(i, j) in pairs {
            if i >= n || j >= n || i == j {
                return Err(Error::invalid(format!("bad ordered pair ({i}, {j}) for {n} primes")));
            }
            if has[i * n + j] || has[j * n + i] {
                return Err(Error::invalid(format!("pair {{{i}, {j}}} oriented twice")));
            }
            has[i * n + j] = true;
        }
        let set = OrientationSet { n, has };
        for i in 0..n {
            for j in (i + 1)..n {
                if !set.contains(i, j) && !set.contains(j, i) {
                    return Err(Error::invalid(format!("pair {{{i}, {j}}} not oriented")));
                }
            }
        }
        Ok(set)
    }

    /// All `2^{C(n,2)}` orientation sets.
    pub fn all(n: usize) -> impl Iterator<Item = OrientationSet> {
        let pairs = n * n.saturating_sub(1) / 2;
        assert!(pairs < 64, "too many pairs to enumerate");
        (0..1u64 << pairs).map(move |bits| OrientationSet::from_bits(n, bits))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.has[i * self.n + j]
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        (0..n * n)
            .filter(|&c| self.has[c])
            .map(|c| (c / n, c % n))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub(crate) enum KernelKind {
    Small(Kernel<u64>),
    Big(Kernel<BigUint>),
}

/// Reusable pointwise evaluator for one tuple and orientation set.
#[derive(Debug, Clone)]
pub struct CoeffEvaluator {
    tuple: PrimeTuple,
    cofactor_inv: Vec<BigUint>,
    pub(crate) kernel: KernelKind,
}

impl CoeffEvaluator {
    pub fn new(t: &PrimeTuple, s: &OrientationSet) -> Result<Self> {
        let small = t.primes().iter().all(|p| p.bits() < 63);
        let kernel = if small {
            KernelKind::Small(Kernel::build(t, s)?)
        } else {
            KernelKind::Big(Kernel::build(t, s)?)
        };
        let cofactor_inv = (0..t.len())
            .map(|j| inv_residue(t.cofactor(j), t.prime(j)))
            .collect::<Result<_>>()?;
        Ok(CoeffEvaluator {
            tuple: t.clone(),
            cofactor_inv,
            kernel,
        })
    }

    pub fn tuple(&self) -> &PrimeTuple {
        &self.tuple
    }

    /// `h_j(k) = mo(k N_j^{-1}, p_j)` for every `j`.
    pub fn residues(&self, k: &BigInt) -> Vec<BigUint> {
        (0..self.tuple.len())
            .map(|j| {
                let p = self.tuple.prime(j);
                reduce(k, p) * &self.cofactor_inv[j] % p
            })
            .collect()
    }

    /// Coefficient of `x^k` in `P_N mod (1 - x^N)` for `0 <= k < N`.
    pub fn eval(&self, k: &BigInt) -> Result<i64> {
        let n = BigInt::from(self.tuple.product().clone());
        if k.is_negative() || k >= &n {
            return Err(Error::invalid(format!("exponent {k} outside [0, {n})")));
        }
        Ok(self.eval_residues(&self.residues(k)))
    }

    /// Same as `eval`, from the residue vector `h(k)`.
    pub fn eval_residues(&self, h: &[BigUint]) -> i64 {
        match &self.kernel {
            KernelKind::Small(kern) => {
                let w: Vec<u64> = h.iter().map(u64::from_big).collect();
                kern.eval(&w)
            }
            KernelKind::Big(kern) => kern.eval(h),
        }
    }

    /// The `i`-th summand of the formula at `h`.
    pub fn term_residues(&self, i: usize, h: &[BigUint]) -> i64 {
        match &self.kernel {
            KernelKind::Small(kern) => {
                let w: Vec<u64> = h.iter().map(u64::from_big).collect();
                kern.term(i, &w)
            }
            KernelKind::Big(kern) => kern.term(i, h),
        }
    }

    pub(crate) fn grid(&self, boundaries: &[Vec<BigUint>]) -> Grid {
        let (n, bits, flips, subsets) = match &self.kernel {
            KernelKind::Small(kern) => {
                let b: Vec<Vec<u64>> = boundaries
                    .iter()
                    .map(|v| v.iter().map(u64::from_big).collect())
                    .collect();
                (kern.n, kern.pass_bits(&b), kern.flips.clone(), kern.subsets.clone())
            }
            KernelKind::Big(kern) => (
                kern.n,
                kern.pass_bits(boundaries),
                kern.flips.clone(),
                kern.subsets.clone(),
            ),
        };
        Grid {
            n,
            bits,
            flips,
            subsets,
        }
    }
}

/// Coefficient of `x^k` in `P_N mod (1 - x^N)`, for `0 <= k < N`.
pub fn coeff_at(t: &PrimeTuple, k: &BigInt, s: &OrientationSet) -> Result<i64> {
    CoeffEvaluator::new(t, s)?.eval(k)
}
