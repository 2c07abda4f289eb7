use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::PrimeTuple;
use crate::error::{Error, Result};
use crate::oracle::degree_pn;

use super::kernel::shift_table;

/// Widest tuple for which the `2^{n-1}` residues per dimension are tabulated.
pub const MAX_PROFILE_PRIMES: usize = 16;

/// Residues `mo(Σ_{i ∈ T} p_i^{-1}, p_j)` for one dimension `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionProfile {
    pub prime: BigUint,
    /// Keyed by the bitmask of `T ⊆ [n] \ {j}`.
    pub values: BTreeMap<u32, BigUint>,
    /// Sorted distinct values.
    pub boundaries: Vec<BigUint>,
    /// Subsets landing on each boundary.
    pub labels: Vec<Vec<u32>>,
    /// Smallest gap between consecutive elements of the multiset plus `p_j`;
    /// zero when two subsets share a residue.
    pub gap: BigUint,
    pub distinct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueProfile {
    pub dims: Vec<DimensionProfile>,
    pub degree: BigInt,
    pub deg_lt_n: bool,
    /// `Σ 1/p_i < 2n/(n-1)`, which already forces `deg P_N < N`.
    pub maclaurin: bool,
    pub generic: bool,
}

impl ResidueProfile {
    pub fn boundaries(&self) -> Vec<Vec<BigUint>> {
        self.dims.iter().map(|d| d.boundaries.clone()).collect()
    }
}

pub fn maclaurin_holds(t: &PrimeTuple) -> bool {
    let n = t.len() as i64;
    t.reciprocal_sum() < BigRational::new(BigInt::from(2 * n), BigInt::from(n - 1))
}

pub fn residue_profile(t: &PrimeTuple) -> Result<ResidueProfile> {
    let n = t.len();
    if n > MAX_PROFILE_PRIMES {
        return Err(Error::unsupported(format!(
            "residue profiles support at most {MAX_PROFILE_PRIMES} primes, got {n}"
        )));
    }
    let shifts = shift_table(t)?;
    let mut dims = Vec::with_capacity(n);
    for j in 0..n {
        let mut values = BTreeMap::new();
        for mask in 0u32..(1 << n) {
            if mask >> j & 1 == 0 {
                values.insert(mask, shifts[(j << n) | mask as usize].clone());
            }
        }
        let mut sorted: Vec<(BigUint, u32)> = values.iter().map(|(m, v)| (v.clone(), *m)).collect();
        sorted.sort();
        let mut boundaries: Vec<BigUint> = Vec::new();
        let mut labels: Vec<Vec<u32>> = Vec::new();
        for (v, m) in &sorted {
            if boundaries.last() == Some(v) {
                labels.last_mut().expect("parallel").push(*m);
            } else {
                boundaries.push(v.clone());
                labels.push(vec![*m]);
            }
        }
        let prime = t.prime(j).clone();
        let distinct = boundaries.len() == sorted.len();
        let gap = if distinct {
            let mut g = &prime - boundaries.last().expect("nonempty");
            for w in boundaries.windows(2) {
                g = g.min(&w[1] - &w[0]);
            }
            g
        } else {
            BigUint::zero()
        };
        dims.push(DimensionProfile {
            prime,
            values,
            boundaries,
            labels,
            gap,
            distinct,
        });
    }
    let degree = degree_pn(t);
    let deg_lt_n = degree < BigInt::from(t.product().clone());
    let generic = deg_lt_n && dims.iter().all(|d| d.distinct);
    Ok(ResidueProfile {
        dims,
        degree,
        deg_lt_n,
        maclaurin: maclaurin_holds(t),
        generic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn worked_example() {
        let t = PrimeTuple::from_u64(&[5, 11, 23]).unwrap();
        let prof = residue_profile(&t).unwrap();
        assert_eq!(prof.dims[0].boundaries, big(&[0, 1, 2, 3]));
        assert_eq!(prof.dims[1].boundaries, big(&[0, 1, 9, 10]));
        assert_eq!(prof.dims[2].boundaries, big(&[0, 12, 14, 21]));
        assert_eq!(prof.dims[0].labels, vec![vec![0], vec![2], vec![4], vec![6]]);
        assert_eq!(prof.dims[0].gap, BigUint::from(1u32));
        assert_eq!(prof.dims[2].gap, BigUint::from(2u32));
        assert!(prof.generic && prof.deg_lt_n && prof.maclaurin);
    }

    #[test]
    fn two_primes() {
        let t = PrimeTuple::from_u64(&[2, 3]).unwrap();
        let prof = residue_profile(&t).unwrap();
        assert_eq!(prof.dims[0].boundaries, big(&[0, 1]));
        assert_eq!(prof.dims[1].boundaries, big(&[0, 2]));
        assert!(prof.generic);
    }

    #[test]
    fn ties_break_genericity() {
        let t = PrimeTuple::from_u64(&[5, 7, 11, 13]).unwrap();
        let prof = residue_profile(&t).unwrap();
        assert!(!prof.dims[0].distinct);
        assert_eq!(prof.dims[0].gap, BigUint::zero());
        assert_eq!(prof.dims[0].boundaries, big(&[0, 1, 2, 3, 4]));
        assert!(prof.deg_lt_n && !prof.generic);
        let t = PrimeTuple::from_u64(&[3, 5, 7]).unwrap();
        assert!(!residue_profile(&t).unwrap().generic);
    }

    #[test]
    fn maclaurin_is_sufficient() {
        let t = PrimeTuple::from_u64(&[2, 3, 5, 7, 11]).unwrap();
        let prof = residue_profile(&t).unwrap();
        assert!(prof.maclaurin && prof.deg_lt_n);
    }
}
