//! Lifting a prime: coefficients of `P_{pN}` from coefficients of `P_N`.
//!
//! All three relations come from `(1 - x^N) P_{pN}(x) = P_N(x^p) Π (1 - x^{N_i})`.
//! The inner coefficients come from a pluggable [`CoeffProvider`].

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::arith::{inverse_mod, is_probable_prime, reduce, Primality, PrimeTuple};
use crate::engine::{CoeffEvaluator, OrientationSet};
use crate::error::{Error, Result};
use crate::oracle::{degree_pn, pq_coeff, CoeffVector};

/// Largest base whose `2^n` subset sums a lift precomputes.
pub const MAX_LIFT_BASE: usize = 20;

/// Source of exact coefficients `a_N(k)` for every integer `k`.
pub trait CoeffProvider {
    fn tuple(&self) -> &PrimeTuple;
    fn coeff(&self, k: &BigInt) -> Result<i64>;
}

impl<T: CoeffProvider + ?Sized> CoeffProvider for &T {
    fn tuple(&self) -> &PrimeTuple {
        (**self).tuple()
    }

    fn coeff(&self, k: &BigInt) -> Result<i64> {
        (**self).coeff(k)
    }
}

/// Dense expansion; zero outside `[0, deg]`.
pub struct DenseProvider {
    tuple: PrimeTuple,
    coeffs: CoeffVector,
}

impl DenseProvider {
    pub fn new(tuple: PrimeTuple, coeffs: CoeffVector) -> Result<Self> {
        if coeffs.is_reduced() || coeffs.modulus() != tuple.product() {
            return Err(Error::invalid("dense provider needs the unreduced expansion of its tuple"));
        }
        Ok(DenseProvider { tuple, coeffs })
    }
}

impl CoeffProvider for DenseProvider {
    fn tuple(&self) -> &PrimeTuple {
        &self.tuple
    }

    fn coeff(&self, k: &BigInt) -> Result<i64> {
        Ok(self.coeffs.at(k))
    }
}

/// Pointwise formula. Only valid when `deg P_N < N`, where `P_N` and its
/// reduction agree on `[0, N)` and vanish elsewhere.
pub struct ClosedFormProvider {
    evaluator: CoeffEvaluator,
    modulus: BigInt,
}

impl ClosedFormProvider {
    pub fn new(t: &PrimeTuple) -> Result<Self> {
        let modulus = BigInt::from(t.product().clone());
        if degree_pn(t) >= modulus {
            return Err(Error::invalid(format!(
                "closed form needs deg P_N < N, which fails for {t}"
            )));
        }
        Ok(ClosedFormProvider {
            evaluator: CoeffEvaluator::new(t, &OrientationSet::default_for(t.len()))?,
            modulus,
        })
    }
}

impl CoeffProvider for ClosedFormProvider {
    fn tuple(&self) -> &PrimeTuple {
        self.evaluator.tuple()
    }

    fn coeff(&self, k: &BigInt) -> Result<i64> {
        if k.is_negative() || k >= &self.modulus {
            return Ok(0);
        }
        self.evaluator.eval(k)
    }
}

/// Precomputed data for lifting by `p` over a base modulus `N`.
#[derive(Debug, Clone)]
struct LiftData {
    p: BigInt,
    n: BigInt,
    /// `((-1)^{|T|}, N_T)` for every `T ⊆ [n]`.
    subsets: Vec<(i64, BigInt)>,
    /// `p^{-1} mod N`.
    p_inv: BigInt,
    /// `N^{-1} mod p`.
    n_inv: BigInt,
    truncation_ok: bool,
}

impl LiftData {
    fn new(p: &BigUint, base: &PrimeTuple) -> Result<Self> {
        if base.primes().contains(p) {
            return Err(Error::invalid(format!("{p} already divides N = {}", base.product())));
        }
        if !is_probable_prime(p, &Primality::default()) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        let n = base.len();
        if n > MAX_LIFT_BASE {
            return Err(Error::Unsupported(format!(
                "lifting supports bases of at most {MAX_LIFT_BASE} primes, got {n}"
            )));
        }
        let mut subsets = Vec::with_capacity(1 << n);
        for mask in 0usize..(1 << n) {
            let mut sum = BigInt::zero();
            for i in (0..n).filter(|&i| mask >> i & 1 == 1) {
                sum += BigInt::from(base.cofactor(i).clone());
            }
            let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            subsets.push((sign, sum));
        }
        let big_n = base.product();
        let p_inv = inverse_mod(p, big_n).map_err(|g| Error::invalid(format!("gcd {g}")))?;
        let n_inv = inverse_mod(big_n, p).map_err(|g| Error::invalid(format!("gcd {g}")))?;
        Ok(LiftData {
            p: BigInt::from(p.clone()),
            n: BigInt::from(big_n.clone()),
            subsets,
            p_inv: BigInt::from(p_inv),
            n_inv: BigInt::from(n_inv),
            truncation_ok: base.reciprocal_sum_below_one(),
        })
    }

    fn delta_minus_n(&self, k: &BigInt, inner: &dyn Fn(&BigInt) -> Result<i64>) -> Result<i64> {
        let mut total = 0i64;
        for (sign, nt) in &self.subsets {
            let diff = k - nt;
            if diff.mod_floor(&self.p).is_zero() {
                total += sign * inner(&(diff / &self.p))?;
            }
        }
        Ok(total)
    }

    /// `m_x = (x - N·mo(x N^{-1}, p)) / p`.
    fn m(&self, x: &BigInt) -> BigInt {
        let c = BigInt::from(reduce(&(x * &self.n_inv), &self.p.magnitude().clone()));
        let num = x - &self.n * c;
        debug_assert!(num.mod_floor(&self.p).is_zero());
        num / &self.p
    }

    fn general(&self, k: &BigInt, inner: &dyn Fn(&BigInt) -> Result<i64>) -> Result<i64> {
        let mut total = 0i64;
        for (sign, nt) in &self.subsets {
            let m = self.m(&(k - nt));
            if !m.is_negative() {
                total += sign * inner(&m)?;
            }
        }
        Ok(total)
    }

    fn truncation_terms(&self, k: &BigInt, inner: &dyn Fn(&BigInt) -> Result<i64>) -> Result<Vec<TruncationTerm>> {
        if !self.truncation_ok {
            return Err(Error::invalid(
                "truncation needs the reciprocal sum of the base primes below 1",
            ));
        }
        let modulus = self.n.magnitude().clone();
        let mut terms = Vec::with_capacity(self.subsets.len());
        for (mask, (sign, nt)) in self.subsets.iter().enumerate() {
            let m = reduce(&((k - nt) * &self.p_inv), &modulus);
            let mb = BigInt::from(m.clone());
            let included = &self.p * &mb <= *k;
            let value = sign * inner(&mb)?;
            terms.push(TruncationTerm {
                subset: mask as u32,
                m,
                value,
                included,
            });
        }
        terms.sort_by(|a, b| a.m.cmp(&b.m).then(a.subset.cmp(&b.subset)));
        Ok(terms)
    }

    fn truncation(&self, k: &BigInt, inner: &dyn Fn(&BigInt) -> Result<i64>) -> Result<i64> {
        if k.is_negative() {
            return Ok(0);
        }
        Ok(self
            .truncation_terms(k, inner)?
            .iter()
            .filter(|t| t.included)
            .map(|t| t.value)
            .sum())
    }
}

/// One summand `(-1)^{|T|} a_N(m')` of the truncation formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationTerm {
    pub subset: u32,
    pub m: BigUint,
    /// Signed contribution.
    pub value: i64,
    /// Whether `p·m' <= k`.
    pub included: bool,
}

/// Lifting of a base provider by one new prime.
pub struct Lift<P> {
    data: LiftData,
    base: P,
    lifted: PrimeTuple,
}

impl<P: CoeffProvider> Lift<P> {
    pub fn new(p: &BigUint, base: P) -> Result<Self> {
        let data = LiftData::new(p, base.tuple())?;
        let lifted = base.tuple().with_appended(p.clone())?;
        Ok(Lift { data, base, lifted })
    }

    pub fn lifted(&self) -> &PrimeTuple {
        &self.lifted
    }

    fn inner(&self) -> impl Fn(&BigInt) -> Result<i64> + '_ {
        move |m| self.base.coeff(m)
    }

    /// `a_{pN}(k) - a_{pN}(k - N)`.
    pub fn delta_minus_n(&self, k: &BigInt) -> Result<i64> {
        self.data.delta_minus_n(k, &self.inner())
    }

    /// `a_{pN}(k) - a_{pN}(k - pN)`.
    pub fn general(&self, k: &BigInt) -> Result<i64> {
        self.data.general(k, &self.inner())
    }

    /// `a_{pN}(k)`, when the base reciprocal sum is below 1.
    pub fn truncation(&self, k: &BigInt) -> Result<i64> {
        self.data.truncation(k, &self.inner())
    }

    /// All summands ordered by `m'`; the included ones form a prefix.
    pub fn truncation_terms(&self, k: &BigInt) -> Result<Vec<TruncationTerm>> {
        self.data.truncation_terms(k, &self.inner())
    }
}

impl<P: CoeffProvider> CoeffProvider for Lift<P> {
    fn tuple(&self) -> &PrimeTuple {
        &self.lifted
    }

    fn coeff(&self, k: &BigInt) -> Result<i64> {
        self.truncation(k)
    }
}

pub fn delta_minus_n(p: &BigUint, base: &dyn CoeffProvider, k: &BigInt) -> Result<i64> {
    Lift::new(p, base)?.delta_minus_n(k)
}

pub fn coeff_via_general(p: &BigUint, base: &dyn CoeffProvider, k: &BigInt) -> Result<i64> {
    Lift::new(p, base)?.general(k)
}

pub fn coeff_via_truncation(p: &BigUint, base: &dyn CoeffProvider, k: &BigInt) -> Result<i64> {
    Lift::new(p, base)?.truncation(k)
}

/// Coefficients by repeated truncation from the first two primes, which
/// use the two-prime closed form. Memoized per level and exponent.
pub struct RecursiveProvider {
    tuple: PrimeTuple,
    /// `levels[l]` lifts the first `l + 2` primes by prime `l + 2`.
    levels: Vec<LiftData>,
    memo: Mutex<HashMap<(usize, BigInt), i64>>,
}

impl RecursiveProvider {
    pub fn new(t: &PrimeTuple) -> Result<Self> {
        let mut levels = Vec::new();
        for len in 2..t.len() {
            let base = PrimeTuple::new(t.primes()[..len].to_vec())?;
            if !base.reciprocal_sum_below_one() {
                return Err(Error::invalid(format!(
                    "recursive descent needs every proper prefix to have reciprocal sum below 1; {base} does not"
                )));
            }
            levels.push(LiftData::new(t.prime(len), &base)?);
        }
        Ok(RecursiveProvider {
            tuple: t.clone(),
            levels,
            memo: Mutex::new(HashMap::new()),
        })
    }

    /// Coefficient for the first `len` primes.
    fn at(&self, len: usize, k: &BigInt) -> Result<i64> {
        if k.is_negative() {
            return Ok(0);
        }
        if len == 2 {
            let pq = BigInt::from(self.tuple.prime(0) * self.tuple.prime(1));
            if k >= &pq {
                return Ok(0);
            }
            return pq_coeff(self.tuple.prime(0), self.tuple.prime(1), k);
        }
        let key = (len, k.clone());
        if let Some(&v) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(v);
        }
        let v = self.levels[len - 3].truncation(k, &|m| self.at(len - 1, m))?;
        self.memo.lock().expect("memo lock").insert(key, v);
        Ok(v)
    }
}

impl CoeffProvider for RecursiveProvider {
    fn tuple(&self) -> &PrimeTuple {
        &self.tuple
    }

    fn coeff(&self, k: &BigInt) -> Result<i64> {
        self.at(self.tuple.len(), k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::oracle::expand_pn;

    fn tuple(p: &[u64]) -> PrimeTuple {
        PrimeTuple::from_u64(p).unwrap()
    }

    fn dense(p: &[u64]) -> DenseProvider {
        let t = tuple(p);
        let v = expand_pn(&t, false, &Config::default()).unwrap();
        DenseProvider::new(t, v).unwrap()
    }

    fn b(k: i64) -> BigInt {
        BigInt::from(k)
    }

    #[test]
    fn delta_against_dense() {
        let base = dense(&[2, 3, 5]);
        let full = dense(&[2, 3, 5, 7]);
        let seven = BigUint::from(7u32);
        let lift = Lift::new(&seven, &base).unwrap();
        for k in -40..260 {
            let want = full.coeff(&b(k)).unwrap() - full.coeff(&b(k - 30)).unwrap();
            assert_eq!(lift.delta_minus_n(&b(k)).unwrap(), want, "k={k}");
        }
        assert_eq!(lift.delta_minus_n(&b(0)).unwrap(), 1);
    }

    #[test]
    fn general_against_dense_and_telescoping() {
        let base = dense(&[2, 3, 5]);
        let full = dense(&[2, 3, 5, 7]);
        let lift = Lift::new(&BigUint::from(7u32), &base).unwrap();
        assert_eq!(lift.general(&b(9)).unwrap(), full.coeff(&b(9)).unwrap());
        assert_eq!(lift.general(&b(-3)).unwrap(), 0);
        for k in -20..500 {
            let want = full.coeff(&b(k)).unwrap() - full.coeff(&b(k - 210)).unwrap();
            assert_eq!(lift.general(&b(k)).unwrap(), want, "k={k}");
            let tele: i64 = (0..7).map(|c| lift.delta_minus_n(&b(k - 30 * c)).unwrap()).sum();
            assert_eq!(tele, want);
        }
    }

    #[test]
    fn truncation_against_dense() {
        let base = dense(&[5, 11]);
        let lift = Lift::new(&BigUint::from(23u32), &base).unwrap();
        assert_eq!(lift.truncation(&b(71)).unwrap(), 1);
        let full = dense(&[5, 11, 23]);
        for k in -5..1400 {
            assert_eq!(lift.truncation(&b(k)).unwrap(), full.coeff(&b(k)).unwrap(), "k={k}");
        }
        let closed = ClosedFormProvider::new(&tuple(&[5, 11])).unwrap();
        assert_eq!(coeff_via_truncation(&BigUint::from(23u32), &closed, &b(71)).unwrap(), 1);
    }

    #[test]
    fn truncation_preconditions() {
        let base = dense(&[2, 3, 5]);
        let lift = Lift::new(&BigUint::from(7u32), &base).unwrap();
        assert!(lift.truncation(&b(3)).is_err());
        assert!(Lift::new(&BigUint::from(3u32), &base).is_err());
        assert!(Lift::new(&BigUint::from(9u32), &base).is_err());
    }

    #[test]
    fn included_terms_form_a_prefix() {
        let base = dense(&[5, 11]);
        let lift = Lift::new(&BigUint::from(23u32), &base).unwrap();
        for k in 0..1265 {
            let terms = lift.truncation_terms(&b(k)).unwrap();
            let cut = terms.iter().take_while(|t| t.included).count();
            assert!(terms[cut..].iter().all(|t| !t.included));
        }
    }

    #[test]
    fn recursive_descent() {
        let t = tuple(&[5, 11, 23]);
        let rec = RecursiveProvider::new(&t).unwrap();
        let full = dense(&[5, 11, 23]);
        for k in -3..1300 {
            assert_eq!(rec.coeff(&b(k)).unwrap(), full.coeff(&b(k)).unwrap(), "k={k}");
        }
        let t = tuple(&[5, 7, 11, 13]);
        let rec = RecursiveProvider::new(&t).unwrap();
        assert_eq!(rec.coeff(&b(233)).unwrap(), -2);
        assert!(RecursiveProvider::new(&tuple(&[2, 3, 5, 7])).is_err());
    }

    #[test]
    fn closed_form_provider_bounds() {
        assert!(ClosedFormProvider::new(&tuple(&[2, 3, 5, 7])).is_ok());
        let c = ClosedFormProvider::new(&tuple(&[3, 5])).unwrap();
        assert_eq!(c.coeff(&b(-1)).unwrap(), 0);
        assert_eq!(c.coeff(&b(15)).unwrap(), 0);
        assert_eq!(c.coeff(&b(0)).unwrap(), 1);
    }
}
