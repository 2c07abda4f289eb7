use std::collections::BTreeMap;
use std::ops::ControlFlow;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use crate::arith::{binomial, crt, inverse_mod, next_prime_in_ap, reduce, PrimeTuple, Rational};
use crate::config::Config;
use crate::engine::{residue_profile, CoeffEvaluator, OrientationSet, RegionMap};
use crate::error::{Error, Result};
use crate::recursion::{ClosedFormProvider, Lift};

use super::certificate::{join_tuple, Budget, Certificate, CertificateKind, Condition};
use super::enlarge::{self, enlarge, Enlarged};

/// A tuple one prime longer whose height is at least
/// `C(n-1, ⌊(n-1)/2⌋)` times the height of the input.
#[derive(Debug, Clone)]
pub struct Amplified {
    pub tuple: PrimeTuple,
    pub enlarged: Enlarged,
    pub base_height: u64,
    /// Signed coefficient on the chosen maximal cell of the enlarged tuple.
    pub max_coefficient: i64,
    pub q: BigUint,
    pub k_bar: BigUint,
    pub witness: BigUint,
    pub coefficient: i64,
    pub certificate: Certificate,
}

fn factor(n: usize) -> i64 {
    let s = n / 2;
    let sign = if (s + 1).is_multiple_of(2) { 1 } else { -1 };
    sign * binomial((n - 1) as u64, ((n - 1) / 2) as u64)
        .to_i64()
        .expect("small binomial")
}

/// `⌊c p_j'⌋` for every `j`.
fn shifts(t: &PrimeTuple, c: &Rational) -> Vec<BigUint> {
    t.primes()
        .iter()
        .map(|p| {
            (c * Rational::from_integer(BigInt::from(p.clone())))
                .floor()
                .to_integer()
                .to_biguint()
                .expect("nonnegative")
        })
        .collect()
}

struct Found {
    k_bar: BigUint,
    k: BigUint,
    value: i64,
    m: i64,
}

pub fn amplify(t: &PrimeTuple, cfg: &Config) -> Result<Amplified> {
    if !t.reciprocal_sum_below_one() {
        return Err(Error::invalid(format!("{t}: reciprocal sum is not below 1")));
    }
    let n = t.len();
    let base_height = RegionMap::new(t)?.scan(cfg)?.height;
    let enlarged = enlarge(t, cfg)?;
    let np = enlarged.tuple.clone();
    let big_n = np.product().clone();
    let map = RegionMap::new(&np)?;
    if !map.is_generic() {
        return Err(Error::ConstructionFailure(format!("enlarged tuple {np} is not generic")));
    }
    let scan = map.scan(cfg)?;
    if scan.height != base_height {
        return Err(Error::ConstructionFailure(format!(
            "enlarging changed the height from {base_height} to {}",
            scan.height
        )));
    }
    let w = shifts(&np, &enlarged.c);
    let pairs = (0..n)
        .map(|j| {
            let inv = inverse_mod(&w[j], np.prime(j))
                .map_err(|g| Error::ConstructionFailure(format!("shift {} shares {g} with {}", w[j], np.prime(j))))?;
            Ok((inv, np.prime(j).clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let a = crt(&pairs)?;
    let q = next_prime_in_ap(&a, &big_n, &(&big_n + 1u32), cfg)?;
    let q_inv = inverse_mod(&q, &big_n).expect("q > N' is prime");

    let evaluator = CoeffEvaluator::new(&np, &OrientationSet::default_for(n))?;
    let lift = Lift::new(&q, ClosedFormProvider::new(&np)?)?;
    let expected_factor = factor(n);
    let s = n / 2;
    let dims = &map.profile().dims;
    let mut probes = 0u64;
    let mut found: Option<Found> = None;
    let mut failure: Option<Error> = None;
    let mut rejected = Vec::new();

    map.for_each_cell(|x, v| {
        if v.unsigned_abs() != scan.height {
            return ControlFlow::Continue(());
        }
        probes += 1;
        if probes > cfg.max_region_probes {
            return ControlFlow::Break(());
        }
        let attempt = (|| -> Result<Option<Found>> {
            let mut k_big = BigUint::default();
            for j in 0..n {
                let u = &dims[j].boundaries[x[j]] + &w[j];
                let top = dims[j].boundaries.get(x[j] + 1).unwrap_or(&dims[j].prime);
                if &u >= top {
                    return Ok(None);
                }
                k_big += u * np.cofactor(j);
            }
            let k0 = BigInt::from(k_big % &big_n);
            let k_bar = reduce(&(&k0 * BigInt::from(q.clone())), &big_n);
            let mut lo: Option<BigInt> = None;
            let mut hi: Option<BigInt> = None;
            for mask in 0u32..(1 << n) {
                let mut e = k0.clone();
                let mut nt = BigInt::default();
                for j in (0..n).filter(|&j| mask >> j & 1 == 1) {
                    e -= BigInt::from(&w[j] * np.cofactor(j));
                    nt += BigInt::from(np.cofactor(j).clone());
                }
                let shifted = reduce(&((BigInt::from(k_bar.clone()) - nt) * BigInt::from(q_inv.clone())), &big_n);
                if e.is_negative() || BigInt::from(shifted) != e {
                    return Ok(None);
                }
                if evaluator.eval(&e)? != v {
                    return Ok(None);
                }
                let qe = &e * BigInt::from(q.clone());
                if mask.count_ones() as usize > s {
                    lo = Some(lo.map_or(qe.clone(), |l| l.max(qe.clone())));
                } else {
                    hi = Some(hi.map_or(qe.clone(), |h| h.min(qe.clone())));
                }
            }
            let (lo, hi) = (lo.expect("n >= 1"), hi.expect("empty set"));
            let start = lo.max(BigInt::from(k_bar.clone()));
            let nb = BigInt::from(big_n.clone());
            let k = &start + (BigInt::from(k_bar.clone()) - &start).mod_floor(&nb);
            if k >= hi {
                return Ok(None);
            }
            let value = lift.truncation(&k)?;
            Ok(Some(Found {
                k_bar,
                k: k.to_biguint().expect("nonnegative"),
                value,
                m: v,
            }))
        })();
        match attempt {
            Ok(Some(f)) if f.value == expected_factor * f.m => {
                found = Some(f);
                ControlFlow::Break(())
            }
            Ok(Some(f)) => {
                rejected.push(format!("cell {x:?}: a({}) = {}", f.k, f.value));
                ControlFlow::Continue(())
            }
            Ok(None) => ControlFlow::Continue(()),
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let found = found.ok_or_else(|| {
        Error::ConstructionFailure(format!(
            "no maximal cell of {np} produced the amplified coefficient (q = {q}, {probes} probes; {})",
            rejected.join("; ")
        ))
    })?;

    let tuple = np.with_appended(q.clone())?;
    let mut extra = BTreeMap::new();
    extra.insert("source".into(), join_tuple(t));
    extra.insert("c".into(), enlarged.c.to_string());
    extra.insert("q".into(), q.to_string());
    extra.insert("k_bar".into(), found.k_bar.to_string());
    extra.insert("base_height".into(), base_height.to_string());
    extra.insert("max_coefficient".into(), found.m.to_string());
    let mut certificate = Certificate {
        kind: CertificateKind::Amplified,
        primes: tuple.to_strings(),
        conditions: Vec::new(),
        height: None,
        witness: Some(found.k.to_string()),
        witness_coefficient: Some(found.value),
        trace: enlarged.certificate.trace.clone(),
        budget: Budget::from(cfg),
        extra,
    };
    certificate.conditions = conditions(&certificate, &tuple, cfg)?;
    if let Some(bad) = certificate.conditions.iter().find(|c| !c.holds) {
        return Err(Error::ConstructionFailure(format!("{} fails: {}", bad.name, bad.instance)));
    }
    let lifted = RegionMap::new(&tuple)?;
    if lifted.region_count() <= cfg.max_regions as u128 {
        certificate.height = Some(lifted.scan(cfg)?.height);
    }
    Ok(Amplified {
        tuple,
        enlarged,
        base_height,
        max_coefficient: found.m,
        q,
        k_bar: found.k_bar,
        witness: found.k,
        coefficient: found.value,
        certificate,
    })
}

/// Conditions of an amplified certificate, recomputed from its primes, the
/// recorded source tuple, `c`, and the recorded witness exponent.
pub(crate) fn conditions(cert: &Certificate, t: &PrimeTuple, cfg: &Config) -> Result<Vec<Condition>> {
    let n = t.len() - 1;
    let q = t.prime(n).clone();
    let np = PrimeTuple::new(t.primes()[..n].to_vec())?;
    let c = cert.extra_rational("c")?;
    let source = cert.extra_tuple("source")?;
    let mut out = enlarge::conditions(&source, &np, &c)?;

    let prof = residue_profile(t)?;
    out.push(Condition::new(
        "amplified reciprocal sum",
        format!("sum of 1/p = {} < 1", t.reciprocal_sum()),
        t.reciprocal_sum_below_one(),
    ));
    out.push(Condition::new(
        "amplified generic",
        format!("deg < N: {}, residues distinct: {}", prof.deg_lt_n, prof.dims.iter().all(|d| d.distinct)),
        prof.generic,
    ));
    out.push(Condition::new(
        "q > N'",
        format!("{q} > {}", np.product()),
        &q > np.product(),
    ));
    for (j, w) in shifts(&np, &c).iter().enumerate() {
        let got = inverse_mod(&q, np.prime(j)).unwrap_or_default();
        out.push(Condition::new(
            format!("q residue({})", j + 1),
            format!("mo(1/q, {}) = {got}, floor(c p') = {w}", np.prime(j)),
            &got == w,
        ));
    }
    let k: BigUint = cert
        .witness
        .as_deref()
        .ok_or_else(|| Error::invalid("amplified certificate lacks a witness"))?
        .parse()
        .map_err(|_| Error::invalid("witness is not an integer"))?;
    let height = RegionMap::new(&np)?.scan(cfg)?.height;
    let lift = Lift::new(&q, ClosedFormProvider::new(&np)?)?;
    let value = lift.truncation(&BigInt::from(k.clone()))?;
    let f = factor(n);
    out.push(Condition::new(
        "witness",
        format!(
            "a({k}) = {value}, height(P_N') = {height}, factor {f}, recorded {:?}",
            cert.witness_coefficient
        ),
        value.unsigned_abs() == f.unsigned_abs() * height && Some(value) == cert.witness_coefficient,
    ));
    Ok(out)
}
