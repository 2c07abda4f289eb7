use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};

use crate::arith::{PrimeTuple, Rational};
use crate::config::Config;
use crate::engine::residue_profile;
use crate::error::{Error, Result};

use super::certificate::{join_tuple, Budget, Certificate, CertificateKind, Condition, TraceStep};
use super::{gap, product_except, residue_order, search_ap, z_order};

/// Result of spreading the residues of every dimension apart.
#[derive(Debug, Clone)]
pub struct Enlarged {
    pub tuple: PrimeTuple,
    pub c: Rational,
    pub certificate: Certificate,
}

pub(crate) fn fmt_order(order: &[u32]) -> String {
    let sets: Vec<String> = order
        .iter()
        .map(|&m| {
            let items: Vec<String> = (0..32)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| (i + 1).to_string())
                .collect();
            format!("{{{}}}", items.join(","))
        })
        .collect();
    sets.join("<")
}

fn reference_orders(t: &PrimeTuple) -> Result<Vec<Vec<u32>>> {
    (0..t.len())
        .map(|j| {
            z_order(t, j)?.ok_or_else(|| {
                Error::invalid(format!(
                    "{t}: two subsets share a z value in dimension {}, so no order can be preserved",
                    j + 1
                ))
            })
        })
        .collect()
}

/// Replaces every prime by a larger one in the same class modulo the others
/// so that residue orders are kept and `⌊n/2⌋ + 1 < c·p_j' < d(S_j)`.
pub fn enlarge(t: &PrimeTuple, cfg: &Config) -> Result<Enlarged> {
    if !t.reciprocal_sum_below_one() {
        return Err(Error::invalid(format!("{t}: reciprocal sum is not below 1")));
    }
    let n = t.len();
    let reference = reference_orders(t)?;
    let mut cur = t.clone();
    let mut trace = Vec::new();
    let three = BigUint::from(3u32);

    for (j, want) in reference.iter().enumerate() {
        let m = product_except(&cur, j);
        let a = cur.prime(j) % &m;
        let from = cur.prime(j).clone();
        let p = search_ap(&a, &m, &(&from + 1u32), cfg, |p| {
            let cand = cur.with_replaced(j, p.clone())?;
            Ok(residue_order(&cand, j)?.as_ref() == Some(want) && gap(&cand, j)? >= three)
        })?;
        trace.push(TraceStep {
            step: "spread".into(),
            position: j + 1,
            from: from.to_string(),
            to: p.to_string(),
            residue: a.to_string(),
            modulus: m.to_string(),
        });
        cur = cur.with_replaced(j, p)?;
    }

    let top = cur.primes().iter().max().expect("nonempty").clone();
    let c = Rational::new(BigInt::from(1), BigInt::from(&top + 1u32));
    let s1 = (n / 2 + 1) as u32;
    let floor = BigUint::from(s1) * (&top + 1u32) + 1u32;
    for (j, want) in reference.iter().enumerate() {
        let m = product_except(&cur, j);
        let a = cur.prime(j) % &m;
        let from = cur.prime(j).clone();
        let lower = (&from + 1u32).max(floor.clone());
        let p = search_ap(&a, &m, &lower, cfg, |p| {
            let cand = cur.with_replaced(j, p.clone())?;
            if residue_order(&cand, j)?.as_ref() != Some(want) {
                return Ok(false);
            }
            let cp = &c * Rational::from_integer(BigInt::from(p.clone()));
            let d = Rational::from_integer(BigInt::from(gap(&cand, j)?));
            Ok(Rational::from_integer(s1.into()) < cp && cp < d)
        })?;
        trace.push(TraceStep {
            step: "scale".into(),
            position: j + 1,
            from: from.to_string(),
            to: p.to_string(),
            residue: a.to_string(),
            modulus: m.to_string(),
        });
        cur = cur.with_replaced(j, p)?;
    }

    let conds = conditions(t, &cur, &c)?;
    if let Some(bad) = conds.iter().find(|c| !c.holds) {
        return Err(Error::ConstructionFailure(format!("{} fails: {}", bad.name, bad.instance)));
    }
    let mut extra = BTreeMap::new();
    extra.insert("source".into(), join_tuple(t));
    extra.insert("c".into(), c.to_string());
    let certificate = Certificate {
        kind: CertificateKind::Enlarged,
        primes: cur.to_strings(),
        conditions: conds,
        height: None,
        witness: None,
        witness_coefficient: None,
        trace,
        budget: Budget::from(cfg),
        extra,
    };
    Ok(Enlarged {
        tuple: cur,
        c,
        certificate,
    })
}

/// Postconditions of [`enlarge`], recomputed from the two tuples and `c`.
pub(crate) fn conditions(source: &PrimeTuple, t: &PrimeTuple, c: &Rational) -> Result<Vec<Condition>> {
    let n = t.len();
    if source.len() != n {
        return Err(Error::invalid("source and enlarged tuples differ in length"));
    }
    let reference = reference_orders(source)?;
    let prof = residue_profile(t)?;
    let s1 = Rational::from_integer(BigInt::from(n / 2 + 1));
    let mut out = Vec::new();
    out.push(Condition::new(
        "reciprocal sum",
        format!("sum of 1/p_j' = {} < 1", t.reciprocal_sum()),
        t.reciprocal_sum_below_one(),
    ));
    out.push(Condition::new(
        "generic",
        format!("deg < N: {}, residues distinct: {}", prof.deg_lt_n, prof.dims.iter().all(|d| d.distinct)),
        prof.generic,
    ));
    for (j, want) in reference.iter().enumerate() {
        let k = j + 1;
        out.push(Condition::new(
            format!("larger({k})"),
            format!("{} > {}", t.prime(j), source.prime(j)),
            t.prime(j) > source.prime(j),
        ));
        let got = residue_order(t, j)?;
        out.push(Condition::new(
            format!("order({k})"),
            fmt_order(want),
            got.as_ref() == Some(want),
        ));
        let cp = c * Rational::from_integer(BigInt::from(t.prime(j).clone()));
        let d = &prof.dims[j].gap;
        let dr = Rational::from_integer(BigInt::from(d.clone()));
        out.push(Condition::new(
            format!("gap({k})"),
            format!("{s1} < c*p_{k}' = {cp} < d(S_{k}) = {d}"),
            s1 < cp && cp < dr,
        ));
    }
    Ok(out)
}
