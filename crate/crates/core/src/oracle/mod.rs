//! Ground truth by dense expansion: `P_N(x)` is built from its defining
//! quotient with sparse multiplications and in-place power-series division.

mod identity;

pub use identity::{
    check_terms, decomposition_terms, two_prime_terms, verify_identity, Factor, Identity,
};

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{inv_residue, mo, PrimeTuple};
use crate::config::Config;
use crate::error::{Error, Result};

/// Dense coefficients of `P_N` (or of its reduction modulo `1 - x^N`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffVector {
    modulus: BigUint,
    coeffs: Vec<i64>,
    reduced: bool,
}

#[derive(Serialize, Deserialize)]
struct CoeffVectorJson {
    modulus: String,
    reduced: bool,
    coefficients: Vec<String>,
}

impl CoeffVector {
    pub fn new(modulus: BigUint, coeffs: Vec<i64>, reduced: bool) -> Self {
        CoeffVector {
            modulus,
            coeffs,
            reduced,
        }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient at any integer exponent; zero outside the stored range.
    pub fn at(&self, k: &BigInt) -> i64 {
        match k.to_usize() {
            Some(i) if i < self.coeffs.len() => self.coeffs[i],
            _ => 0,
        }
    }

    /// `index,coefficient` rows under a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.coeffs.len() * 6 + 20);
        out.push_str("index,coefficient\n");
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{i},{c}\n"));
        }
        out
    }

    /// JSON array of decimal strings.
    pub fn to_json_array(&self) -> String {
        let strings: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        serde_json::to_string(&strings).expect("strings serialize")
    }

    /// JSON object carrying the modulus and reduction flag alongside the array.
    pub fn to_json(&self) -> String {
        let doc = CoeffVectorJson {
            modulus: self.modulus.to_string(),
            reduced: self.reduced,
            coefficients: self.coeffs.iter().map(|c| c.to_string()).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CoeffVectorJson = serde_json::from_str(text)?;
        let modulus = doc
            .modulus
            .parse()
            .map_err(|_| Error::invalid(format!("bad modulus {}", doc.modulus)))?;
        let coeffs = doc
            .coefficients
            .iter()
            .map(|s| {
                s.parse::<i64>()
                    .map_err(|_| Error::invalid(format!("bad coefficient {s}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CoeffVector::new(modulus, coeffs, doc.reduced))
    }
}

/// `deg P_N = N - Σ N_i + Σ_{i<j} N_ij`.
pub fn degree_pn(t: &PrimeTuple) -> BigInt {
    let n = t.len();
    let mut deg = BigInt::from(t.product().clone());
    for i in 0..n {
        deg -= BigInt::from(t.cofactor(i).clone());
        for j in (i + 1)..n {
            deg += BigInt::from(t.cofactor2(i, j));
        }
    }
    deg
}

/// Dense expansion over raw primes; `n = 1` is allowed and gives
/// `(1 - x^p) / (1 - x)`.
pub(crate) fn expand_primes(primes: &[u64], cap: u64) -> Result<Vec<i64>> {
    let n = primes.len();
    let modulus = primes
        .iter()
        .try_fold(1u64, |acc, &p| acc.checked_mul(p))
        .ok_or_else(|| Error::resource("expansion modulus", "more than 64 bits", u64::MAX))?;
    let mut numerator = vec![modulus];
    for i in 0..n {
        for j in (i + 1)..n {
            numerator.push(modulus / primes[i] / primes[j]);
        }
    }
    let denominator: Vec<u64> = primes.iter().map(|p| modulus / p).collect();
    let num_deg: u64 = numerator.iter().sum();
    let den_deg: u64 = denominator.iter().sum();
    let deg = num_deg - den_deg;
    if deg + 1 > cap || num_deg + 1 > cap.saturating_mul(4) {
        return Err(Error::resource(
            format!("dense expansion of P_N for N = {modulus}"),
            format!("{} coefficients", deg + 1),
            cap,
        ));
    }
    let len = (num_deg + 1) as usize;
    let mut c = vec![0i64; len];
    c[0] = 1;
    let mut top = 0usize;
    for &e in &numerator {
        let e = e as usize;
        for k in (e..=top + e).rev() {
            c[k] -= c[k - e];
        }
        top += e;
    }
    for &e in &denominator {
        let e = e as usize;
        for k in e..len {
            c[k] = c[k]
                .checked_add(c[k - e])
                .ok_or_else(|| Error::resource("intermediate coefficient", "more than 64 bits", i64::MAX))?;
        }
    }
    let deg = deg as usize;
    assert!(
        c[deg + 1..].iter().all(|&x| x == 0),
        "division of the defining quotient left a remainder for primes {primes:?}"
    );
    c.truncate(deg + 1);
    Ok(c)
}

/// Exact coefficients of `P_N`, or of `P_N mod (1 - x^N)` when `reduced`.
pub fn expand_pn(t: &PrimeTuple, reduced: bool, cfg: &Config) -> Result<CoeffVector> {
    let deg = degree_pn(t);
    let needed = &deg + 1;
    if needed > BigInt::from(cfg.max_coefficients) {
        return Err(Error::resource(
            format!("dense expansion of P_N for N = {}", t.product()),
            format!("{needed} coefficients"),
            cfg.max_coefficients,
        ));
    }
    let primes = t
        .primes_u64()
        .ok_or_else(|| Error::resource("dense expansion prime size", "more than 64 bits", u64::MAX))?;
    let mut coeffs = expand_primes(&primes, cfg.max_coefficients)?;
    let modulus = t.product().clone();
    if reduced {
        let m = modulus.to_usize().expect("fits: modulus <= degree bound");
        if coeffs.len() > m {
            let mut folded = vec![0i64; m];
            for (k, c) in coeffs.iter().enumerate() {
                folded[k % m] += c;
            }
            while folded.last() == Some(&0) {
                folded.pop();
            }
            coeffs = folded;
        }
    }
    Ok(CoeffVector::new(modulus, coeffs, reduced))
}

/// Largest `|coefficient|` and the smallest index attaining it.
pub fn height_dense(v: &CoeffVector) -> Result<(u64, usize)> {
    if v.is_empty() {
        return Err(Error::invalid("height of an empty coefficient vector"));
    }
    let mut best = (0u64, 0usize);
    for (i, c) in v.coeffs().iter().enumerate() {
        let a = c.unsigned_abs();
        if a > best.0 {
            best = (a, i);
        }
    }
    Ok(best)
}

/// Closed form for two primes: for `0 <= k < pq` the coefficient of `x^k`
/// in `Φ_pq` is `{mo(k/p, q) < mo(1/p, q)} - {mo(k/q, p) >= mo(1/q, p)}`.
pub fn pq_coeff(p: &BigUint, q: &BigUint, k: &BigInt) -> Result<i64> {
    if p == q {
        return Err(Error::invalid("pq_coeff needs distinct primes"));
    }
    let pq = BigInt::from(p * q);
    if k < &BigInt::zero() || k >= &pq {
        return Err(Error::invalid(format!("exponent {k} outside [0, {pq})")));
    }
    let pb = BigInt::from(p.clone());
    let qb = BigInt::from(q.clone());
    let lhs = mo(k, &pb, q)? < inv_residue(p, q)?;
    let rhs = mo(k, &qb, p)? >= inv_residue(q, p)?;
    Ok(i64::from(lhs) - i64::from(rhs))
}

/// Coefficient sum `P_N(1)`.
pub fn coefficient_sum(v: &CoeffVector) -> i64 {
    v.coeffs().iter().sum()
}
