use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use super::{is_probable_prime, Primality, Rational};
use crate::error::{Error, Result};

/// An ordered tuple of `n >= 2` distinct primes with its product and the
/// cofactors `N_i = N / p_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTuple {
    primes: Vec<BigUint>,
    product: BigUint,
    cofactors: Vec<BigUint>,
}

impl PrimeTuple {
    pub fn new(primes: Vec<BigUint>) -> Result<Self> {
        Self::with_schedule(primes, &Primality::default())
    }

    pub fn with_schedule(primes: Vec<BigUint>, schedule: &Primality) -> Result<Self> {
        if primes.len() < 2 {
            return Err(Error::invalid(format!(
                "a prime tuple needs at least two primes, got {}",
                primes.len()
            )));
        }
        for p in &primes {
            if !is_probable_prime(p, schedule) {
                return Err(Error::invalid(format!("{p} is not prime")));
            }
        }
        Self::from_verified(primes)
    }

    /// Builds a tuple from values already known to be prime; only distinctness
    /// is rechecked.
    pub(crate) fn from_verified(primes: Vec<BigUint>) -> Result<Self> {
        for i in 0..primes.len() {
            for j in 0..i {
                if primes[i] == primes[j] {
                    return Err(Error::invalid(format!(
                        "prime {} appears more than once",
                        primes[i]
                    )));
                }
            }
        }
        let product: BigUint = primes.iter().product();
        let cofactors = primes.iter().map(|p| &product / p).collect();
        Ok(PrimeTuple {
            primes,
            product,
            cofactors,
        })
    }

    pub fn from_u64(primes: &[u64]) -> Result<Self> {
        Self::new(primes.iter().map(|&p| BigUint::from(p)).collect())
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn primes(&self) -> &[BigUint] {
        &self.primes
    }

    pub fn prime(&self, i: usize) -> &BigUint {
        &self.primes[i]
    }

    /// `N`, the product of all primes.
    pub fn product(&self) -> &BigUint {
        &self.product
    }

    /// `N_i = N / p_i`.
    pub fn cofactor(&self, i: usize) -> &BigUint {
        &self.cofactors[i]
    }

    /// `N_ij = N / (p_i p_j)`.
    pub fn cofactor2(&self, i: usize, j: usize) -> BigUint {
        &self.cofactors[i] / &self.primes[j]
    }

    /// The primes as machine words, when they all fit.
    pub fn primes_u64(&self) -> Option<Vec<u64>> {
        self.primes.iter().map(|p| p.to_u64()).collect()
    }

    /// `Σ 1/p_i`, exactly.
    pub fn reciprocal_sum(&self) -> Rational {
        self.primes
            .iter()
            .map(|p| Rational::new(One::one(), p.clone().into()))
            .fold(Rational::from_integer(0.into()), |a, b| a + b)
    }

    /// Whether `Σ 1/p_i < 1`.
    pub fn reciprocal_sum_below_one(&self) -> bool {
        self.reciprocal_sum() < Rational::from_integer(1.into())
    }

    /// Tuple with prime `i` removed, when at least two primes remain.
    pub fn without(&self, i: usize) -> Option<PrimeTuple> {
        if self.len() <= 2 {
            return None;
        }
        let mut primes = self.primes.clone();
        primes.remove(i);
        Some(Self::from_verified(primes).expect("subset of distinct primes"))
    }

    /// Tuple with `p` appended; `p` must already be known to be prime.
    pub(crate) fn with_appended(&self, p: BigUint) -> Result<PrimeTuple> {
        let mut primes = self.primes.clone();
        primes.push(p);
        Self::from_verified(primes)
    }

    /// Tuple with prime `i` replaced; `p` must already be known to be prime.
    pub(crate) fn with_replaced(&self, i: usize, p: BigUint) -> Result<PrimeTuple> {
        let mut primes = self.primes.clone();
        primes[i] = p;
        Self::from_verified(primes)
    }

    /// Primes as decimal strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.primes.iter().map(|p| p.to_string()).collect()
    }
}

impl fmt::Display for PrimeTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.primes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}
