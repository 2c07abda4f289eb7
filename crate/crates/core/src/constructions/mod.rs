//! Tuples with prescribed heights: enlarging regions, amplifying the height
//! by a central binomial factor, and building height-1 tuples.

mod amplify;
mod certificate;
mod enlarge;
mod height1;

pub use amplify::{amplify, Amplified};
pub use certificate::{
    cache_path, load_or_build, verify_certificate, Certificate, CertificateKind, Condition,
    TraceStep, Verification,
};
pub use enlarge::{enlarge, Enlarged};
pub use height1::construct_height1;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{binomial, inv_residue, next_prime_in_ap, PrimeTuple, Rational};
use crate::config::Config;
use crate::engine::residue_profile;
use crate::error::{Error, Result};

/// Fractional part of `Σ_{i ∈ T} (1 - mo(p_j^{-1}, p_i) / p_i)`.
pub fn z_value(t: &PrimeTuple, j: usize, subset: u32) -> Result<Rational> {
    let n = t.len();
    if n >= 32 {
        return Err(Error::unsupported(format!("subset masks cover at most 31 primes, got {n}")));
    }
    if j >= n || subset >> j & 1 == 1 || subset >> n != 0 {
        return Err(Error::invalid(format!(
            "subset {subset:#b} must avoid dimension {j} of a {n}-tuple"
        )));
    }
    let mut z = Rational::zero();
    for i in (0..n).filter(|&i| subset >> i & 1 == 1) {
        let r = inv_residue(t.prime(j), t.prime(i))?;
        z += Rational::one() - Rational::new(BigInt::from(r), BigInt::from(t.prime(i).clone()));
    }
    Ok(z.fract())
}

/// Subsets of `[n] \ {j}` ordered by their residue, or `None` on a tie.
pub(crate) fn residue_order(t: &PrimeTuple, j: usize) -> Result<Option<Vec<u32>>> {
    let prof = residue_profile(t)?;
    let d = &prof.dims[j];
    if !d.distinct {
        return Ok(None);
    }
    Ok(Some(d.labels.iter().map(|l| l[0]).collect()))
}

/// Subsets of `[n] \ {j}` ordered by `z_T`, or `None` on a tie.
pub(crate) fn z_order(t: &PrimeTuple, j: usize) -> Result<Option<Vec<u32>>> {
    let n = t.len();
    if n >= 32 {
        return Err(Error::unsupported(format!("subset masks cover at most 31 primes, got {n}")));
    }
    let mut zs = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask >> j & 1 == 0 {
            zs.push((z_value(t, j, mask)?, mask));
        }
    }
    zs.sort();
    if zs.windows(2).any(|w| w[0].0 == w[1].0) {
        return Ok(None);
    }
    Ok(Some(zs.into_iter().map(|(_, m)| m).collect()))
}

pub(crate) fn gap(t: &PrimeTuple, j: usize) -> Result<BigUint> {
    Ok(residue_profile(t)?.dims[j].gap.clone())
}

pub(crate) fn product_except(t: &PrimeTuple, j: usize) -> BigUint {
    t.cofactor(j).clone()
}

/// Smallest prime `p ≡ a (mod m)` with `p >= lower` accepted by `ok`,
/// retrying along the progression.
pub(crate) fn search_ap<F>(a: &BigUint, m: &BigUint, lower: &BigUint, cfg: &Config, mut ok: F) -> Result<BigUint>
where
    F: FnMut(&BigUint) -> Result<bool>,
{
    let mut lower = lower.clone();
    for _ in 0..cfg.max_ap_candidates {
        let p = next_prime_in_ap(a, m, &lower, cfg)?;
        if ok(&p)? {
            return Ok(p);
        }
        lower = p + 1u32;
    }
    Err(Error::resource(
        format!("accepted prime congruent to {a} mod {m}"),
        format!("more than {} progression primes", cfg.max_ap_candidates),
        cfg.max_ap_candidates,
    ))
}

/// Exact bounds on the largest height over tuples of `n` primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub n: u64,
    /// `n · 2^{C(n-2,2) - 1}`, valid when `deg P_N < N`.
    pub upper: String,
    /// Product of the first `n - 2` central binomial coefficients.
    pub lower: String,
    /// `2n / (n - 1)`.
    pub maclaurin_threshold: String,
    #[serde(skip)]
    pub upper_value: Rational,
    #[serde(skip)]
    pub lower_value: BigUint,
}

pub fn bounds_report(n: u64) -> Result<BoundsReport> {
    if n < 2 {
        return Err(Error::invalid(format!("bounds need n >= 2, got {n}")));
    }
    let c = if n >= 4 { (n - 2) * (n - 3) / 2 } else { 0 };
    let upper = Rational::from_integer(BigInt::from(n)) * pow2(c as i64 - 1);
    let mut lower = BigUint::one();
    for i in 1..=n.saturating_sub(2) {
        lower *= binomial(i, i / 2);
    }
    let threshold = Rational::new(BigInt::from(2 * n), BigInt::from(n - 1));
    Ok(BoundsReport {
        n,
        upper: upper.to_string(),
        lower: lower.to_string(),
        maclaurin_threshold: threshold.to_string(),
        upper_value: upper,
        lower_value: lower,
    })
}

fn pow2(e: i64) -> Rational {
    let two = Rational::from_integer(BigInt::from(2));
    if e >= 0 {
        num_traits::pow(two, e as usize)
    } else {
        num_traits::pow(two, (-e) as usize).recip()
    }
}

/// `⌈r⌉` for a nonnegative rational.
#[cfg(test)]
fn ceil(r: &Rational) -> BigInt {
    use num_integer::Integer;
    let (q, rem) = r.numer().div_rem(r.denom());
    if rem.is_zero() {
        q
    } else {
        q + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mo_plus;

    #[test]
    fn z_examples() {
        let t = PrimeTuple::from_u64(&[5, 11]).unwrap();
        assert_eq!(z_value(&t, 1, 0).unwrap(), Rational::zero());
        let z = z_value(&t, 1, 0b01).unwrap();
        assert_eq!(z, Rational::new(4.into(), 5.into()));
        assert_eq!(ceil(&(z * Rational::from_integer(11.into()))), BigInt::from(9));
        assert!(z_value(&t, 1, 0b10).is_err());
    }

    #[test]
    fn z_identity() {
        let t = PrimeTuple::from_u64(&[7, 11, 13, 17]).unwrap();
        for j in 0..4 {
            for mask in (0u32..16).filter(|m| m >> j & 1 == 0) {
                let z = z_value(&t, j, mask).unwrap();
                let mut recip = Rational::zero();
                let mut sum = BigInt::zero();
                for i in (0..4).filter(|&i| mask >> i & 1 == 1) {
                    recip += Rational::new(1.into(), BigInt::from(t.prime(i).clone()));
                    sum += BigInt::from(inv_residue(t.prime(i), t.prime(j)).unwrap());
                }
                let pj = Rational::from_integer(BigInt::from(t.prime(j).clone()));
                let total = &pj * &z + &recip;
                assert!(total.is_integer());
                if mask != 0 {
                    let want = mo_plus(&sum, &BigInt::one(), t.prime(j)).unwrap();
                    assert_eq!(ceil(&(pj * z)), BigInt::from(want));
                }
            }
        }
    }

    #[test]
    fn bounds() {
        let r = bounds_report(3).unwrap();
        assert_eq!((r.upper.as_str(), r.lower.as_str()), ("3/2", "1"));
        let r = bounds_report(4).unwrap();
        assert_eq!((r.upper.as_str(), r.lower.as_str()), ("4", "2"));
        let r = bounds_report(5).unwrap();
        assert_eq!((r.upper.as_str(), r.lower.as_str(), r.maclaurin_threshold.as_str()), ("20", "6", "5/2"));
        for n in 2..=12 {
            let r = bounds_report(n).unwrap();
            assert!(Rational::from_integer(BigInt::from(r.lower_value.clone())) <= r.upper_value);
        }
        assert!(bounds_report(1).is_err());
    }
}
