//! Exact integer arithmetic: modular residues of rationals, CRT, primality
//! and prime searches in arithmetic progressions.
//!
//! Moduli and primes are `BigUint`; exponents and numerators are `BigInt`
//! because intermediate values of the lifting recursions go negative.

mod prime;
mod tuple;

pub use prime::{first_primes, is_probable_prime, is_prime_u64, next_prime_in_ap, Primality};
pub use tuple::PrimeTuple;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact rational with reduced form and positive denominator.
pub type Rational = num_rational::BigRational;

/// Reduce a signed integer into `[0, m)`.
pub fn reduce(a: &BigInt, m: &BigUint) -> BigUint {
    let m = BigInt::from(m.clone());
    a.mod_floor(&m).to_biguint().expect("mod_floor is nonnegative")
}

/// Inverse of `a` modulo `m`, or the gcd that prevents it.
pub fn inverse_mod(a: &BigUint, m: &BigUint) -> std::result::Result<BigUint, BigUint> {
    if m.is_one() {
        return Ok(BigUint::zero());
    }
    let a = BigInt::from(a % m);
    let mb = BigInt::from(m.clone());
    let e = a.extended_gcd(&mb);
    if !e.gcd.is_one() {
        return Err(e.gcd.magnitude().clone());
    }
    Ok(e.x.mod_floor(&mb).to_biguint().expect("nonnegative"))
}

/// The least `k` in `[0, m)` with `k * den ≡ num (mod m)`.
pub fn mo(num: &BigInt, den: &BigInt, m: &BigUint) -> Result<BigUint> {
    if m < &BigUint::from(2u32) {
        return Err(Error::invalid(format!("modulus must be at least 2, got {m}")));
    }
    let d = reduce(den, m);
    let inv = inverse_mod(&d, m).map_err(|g| {
        Error::invalid(format!(
            "denominator {den} is not invertible modulo {m} (gcd {g})"
        ))
    })?;
    Ok((reduce(num, m) * inv) % m)
}

/// `mo` with the zero residue replaced by `m`, so the result lies in `[1, m]`.
pub fn mo_plus(num: &BigInt, den: &BigInt, m: &BigUint) -> Result<BigUint> {
    let r = mo(num, den, m)?;
    Ok(if r.is_zero() { m.clone() } else { r })
}

/// `mo(1, p, m)`: the residue of `p^{-1}` modulo `m`.
pub fn inv_residue(p: &BigUint, m: &BigUint) -> Result<BigUint> {
    mo(&BigInt::one(), &BigInt::from(p.clone()), m)
}

/// Unique `k` modulo the product of the moduli matching every `(residue, modulus)`.
pub fn crt(pairs: &[(BigUint, BigUint)]) -> Result<BigUint> {
    let mut acc = BigUint::zero();
    let mut modulus = BigUint::one();
    for (r, m) in pairs {
        if m.is_zero() {
            return Err(Error::invalid("zero modulus in crt"));
        }
        let g = modulus.gcd(m);
        if !g.is_one() {
            return Err(Error::invalid(format!(
                "crt moduli are not pairwise coprime (gcd {g} with modulus {m})"
            )));
        }
        // acc + modulus * t ≡ r (mod m)
        let r = r % m;
        let inv = inverse_mod(&modulus, m).expect("coprime");
        let diff = BigInt::from(r) - BigInt::from(&acc % m);
        let t = (reduce(&diff, m) * inv) % m;
        acc += &modulus * t;
        modulus *= m;
    }
    Ok(acc)
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
