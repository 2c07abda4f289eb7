use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::arith::{inv_residue, PrimeTuple};
use crate::config::Config;
use crate::engine::{residue_profile, RegionMap};
use crate::error::{Error, Result};

use super::certificate::{Budget, Certificate, CertificateKind, Condition, TraceStep};
use super::{product_except, search_ap};

/// `d(S_j)` for the tuple made of `primes`, where a single prime `p` has
/// residue set `{0}` and gap `p`.
fn gap_of(primes: &[BigUint], j: usize) -> Result<BigUint> {
    if primes.len() == 1 {
        return Ok(primes[0].clone());
    }
    let t = PrimeTuple::new(primes.to_vec())?;
    Ok(residue_profile(&t)?.dims[j].gap.clone())
}

/// Ordering conditions (a) and (b) for every `u < v`, the reciprocal sum
/// condition (c), and strict increase.
pub(crate) fn conditions(t: &PrimeTuple) -> Result<Vec<Condition>> {
    let p = t.primes();
    let n = p.len();
    let mut out = Vec::new();
    for v in 1..n {
        for u in 0..v {
            let (uu, vv) = (u + 1, v + 1);
            let lhs = inv_residue(&p[v], &p[u])?;
            let d = gap_of(&p[..v], u)?;
            out.push(Condition::new(
                format!("a({uu},{vv})"),
                format!("mo(1/p_{vv}, p_{uu}) = {lhs} < d(S_{uu}(p_1..p_{})) = {d}", vv - 1),
                lhs < d,
            ));
            let lhs = &p[v] - inv_residue(&p[u], &p[v])?;
            let mut sub = p[..u].to_vec();
            sub.push(p[v].clone());
            let d = gap_of(&sub, u)?;
            let args = if u == 0 { format!("p_{vv}") } else { format!("p_1..p_{u}, p_{vv}") };
            out.push(Condition::new(
                format!("b({uu},{vv})"),
                format!("p_{vv} - mo(1/p_{uu}, p_{vv}) = {lhs} < d(S_{vv}({args})) = {d}"),
                lhs < d,
            ));
        }
    }
    out.push(Condition::new(
        "c",
        format!("sum of 1/p_i = {} < 1", t.reciprocal_sum()),
        t.reciprocal_sum_below_one(),
    ));
    let increasing = p.windows(2).all(|w| w[0] < w[1]);
    out.push(Condition::new("increasing", t.to_string(), increasing));
    Ok(out)
}

fn ab_hold(t: &PrimeTuple) -> Result<bool> {
    Ok(conditions(t)?
        .iter()
        .filter(|c| c.name.starts_with('a') || c.name.starts_with('b'))
        .all(|c| c.holds))
}

/// Builds `p_1 < ... < p_n` satisfying the ordering conditions, one prime at
/// a time: lift the existing primes to open their gaps, then append a prime
/// congruent to 1 modulo their product.
pub fn construct_height1(n: usize, cfg: &Config) -> Result<Certificate> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 primes, got {n}")));
    }
    let mut cur = PrimeTuple::from_u64(&[2, 3])?;
    let mut trace = Vec::new();
    let two = BigUint::from(2u32);
    for m in 3..=n {
        for i in 0..m - 1 {
            let modulus = product_except(&cur, i);
            let a = cur.prime(i) % &modulus;
            let from = cur.prime(i).clone();
            let floor = if i == 0 {
                from.clone()
            } else {
                (&from).max(&(cur.prime(i - 1) * 2u32 + 1u32)).clone()
            };
            let prev = if i == 0 { None } else { Some(cur.prime(i - 1) * 2u32) };
            let p = search_ap(&a, &modulus, &floor, cfg, |p| {
                if prev.as_ref().is_some_and(|b| p <= b) {
                    return Ok(false);
                }
                let cand = cur.with_replaced(i, p.clone())?;
                Ok(residue_profile(&cand)?.dims[i].gap >= two && ab_hold(&cand)?)
            })?;
            if p != from {
                trace.push(TraceStep {
                    step: format!("lift for n={m}"),
                    position: i + 1,
                    from: from.to_string(),
                    to: p.to_string(),
                    residue: a.to_string(),
                    modulus: modulus.to_string(),
                });
                cur = cur.with_replaced(i, p)?;
            }
        }
        let modulus = cur.product().clone();
        let one = BigUint::from(1u32);
        let p = search_ap(&one, &modulus, &two, cfg, |p| {
            let cand = cur.with_appended(p.clone())?;
            Ok(cand.reciprocal_sum_below_one() && ab_hold(&cand)?)
        })?;
        trace.push(TraceStep {
            step: format!("append for n={m}"),
            position: m,
            from: String::new(),
            to: p.to_string(),
            residue: "1".into(),
            modulus: modulus.to_string(),
        });
        cur = cur.with_appended(p)?;
    }
    let conds = conditions(&cur)?;
    if let Some(bad) = conds.iter().find(|c| !c.holds) {
        return Err(Error::ConstructionFailure(format!("{} fails: {}", bad.name, bad.instance)));
    }
    let mut cert = Certificate {
        kind: CertificateKind::Height1,
        primes: cur.to_strings(),
        conditions: conds,
        height: None,
        witness: None,
        witness_coefficient: None,
        trace,
        budget: Budget::from(cfg),
        extra: BTreeMap::new(),
    };
    let map = RegionMap::new(&cur)?;
    if map.region_count() <= cfg.max_regions as u128 {
        let scan = map.scan(cfg)?;
        cert.height = Some(scan.height);
        cert.witness = Some(scan.witness.to_string());
        cert.witness_coefficient = Some(scan.witness_coefficient);
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::verify_certificate;

    #[test]
    fn small_cases() {
        let cfg = Config::default();
        let c2 = construct_height1(2, &cfg).unwrap();
        assert_eq!(c2.primes, vec!["2", "3"]);
        assert_eq!(c2.height, Some(1));
        let c3 = construct_height1(3, &cfg).unwrap();
        assert_eq!(c3.primes, vec!["5", "13", "131"]);
        assert_eq!(c3.height, Some(1));
        assert!(verify_certificate(&c3, &cfg).unwrap().ok);
        assert!(construct_height1(1, &cfg).is_err());
    }

    #[test]
    fn conditions_detect_bad_orders() {
        let t = PrimeTuple::from_u64(&[3, 5, 7]).unwrap();
        assert!(conditions(&t).unwrap().iter().any(|c| !c.holds));
    }
}
