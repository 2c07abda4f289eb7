//! Congruence checks modulo `x^N - 1`, with both sides expanded densely.
//!
//! Right-hand sides are lists of products of structured factors, so tests can
//! perturb a single exponent and watch the check fail.

use crate::arith::{inv_residue, PrimeTuple};
use crate::config::Config;
use crate::engine::OrientationSet;
use crate::error::{Error, Result};

use super::{expand_pn, expand_primes};

/// One factor of a product on the right-hand side of a congruence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    /// `±(x^{start·step} + x^{(start+1)·step} + ... )` with `count` terms.
    Geometric {
        step: u64,
        start: u64,
        count: u64,
        negate: bool,
    },
    /// `1 - x^exponent`.
    Binomial { exponent: u64 },
    /// `x^exponent`.
    Monomial { exponent: u64 },
    /// `Q(x^stride)` for a dense `Q`.
    Stretched { coeffs: Vec<i64>, stride: u64 },
}

/// Which congruence to check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Identity {
    /// Decomposition over an orientation set.
    Decomposition(OrientationSet),
    /// Two-prime split on a pair of distinct (0-based) indices.
    TwoPrime { i: usize, j: usize },
}

fn cyclic_mul(acc: &[i64], factor: &Factor) -> Vec<i64> {
    let m = acc.len() as u64;
    let mut out = vec![0i64; acc.len()];
    let add_shift = |shift: u64, coeff: i64, out: &mut Vec<i64>| {
        if coeff == 0 {
            return;
        }
        let s = (shift % m) as usize;
        let len = acc.len();
        for (k, &a) in acc.iter().enumerate() {
            if a != 0 {
                let idx = if k + s >= len { k + s - len } else { k + s };
                out[idx] += coeff * a;
            }
        }
    };
    match factor {
        Factor::Geometric {
            step,
            start,
            count,
            negate,
        } => {
            let sign = if *negate { -1 } else { 1 };
            for c in 0..*count {
                let e = ((start + c) % m) * (step % m) % m;
                add_shift(e, sign, &mut out);
            }
        }
        Factor::Binomial { exponent } => {
            add_shift(0, 1, &mut out);
            add_shift(*exponent, -1, &mut out);
        }
        Factor::Monomial { exponent } => add_shift(*exponent, 1, &mut out),
        Factor::Stretched { coeffs, stride } => {
            for (d, &c) in coeffs.iter().enumerate() {
                add_shift((d as u64 % m) * (stride % m) % m, c, &mut out);
            }
        }
    }
    out
}

/// True iff `Σ_terms Π factors ≡ lhs (mod x^m - 1)`; `lhs` may be shorter than `m`.
pub fn check_terms(m: usize, lhs: &[i64], terms: &[Vec<Factor>]) -> bool {
    let mut target = vec![0i64; m];
    for (k, c) in lhs.iter().enumerate() {
        target[k % m] += c;
    }
    let mut total = vec![0i64; m];
    for term in terms {
        let mut acc = vec![0i64; m];
        acc[0] = 1;
        for f in term {
            acc = cyclic_mul(&acc, f);
        }
        for (t, a) in total.iter_mut().zip(acc) {
            *t += a;
        }
    }
    total == target
}

fn small_tuple(t: &PrimeTuple) -> Result<Vec<u64>> {
    t.primes_u64()
        .filter(|_| t.product().bits() < 63)
        .ok_or_else(|| Error::resource("identity check modulus", "more than 63 bits", 1u64 << 63))
}

fn threshold(p: &[u64], i: usize, j: usize) -> u64 {
    let r = inv_residue(&p[i].into(), &p[j].into()).expect("distinct primes");
    r.try_into().expect("below p_j")
}

/// Right-hand side of the decomposition over `s`.
pub fn decomposition_terms(t: &PrimeTuple, s: &OrientationSet) -> Result<Vec<Vec<Factor>>> {
    let n = t.len();
    if s.len() != n {
        return Err(Error::invalid(format!(
            "orientation set is for {} primes, tuple has {n}",
            s.len()
        )));
    }
    let p = small_tuple(t)?;
    let modulus: u64 = p.iter().product();
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let mut term = vec![Factor::Geometric {
            step: modulus / p[i],
            start: 0,
            count: p[i],
            negate: false,
        }];
        for j in (0..n).filter(|&j| j != i) {
            let tij = threshold(&p, i, j);
            let step = modulus / p[j];
            if s.contains(i, j) {
                term.push(Factor::Geometric {
                    step,
                    start: 0,
                    count: tij,
                    negate: false,
                });
            } else {
                term.push(Factor::Geometric {
                    step,
                    start: tij,
                    count: p[j] - tij,
                    negate: true,
                });
            }
        }
        for j1 in (0..n).filter(|&j| j != i) {
            for j2 in (j1 + 1..n).filter(|&j| j != i) {
                term.push(Factor::Binomial {
                    exponent: modulus / p[j1] / p[j2],
                });
            }
        }
        terms.push(term);
    }
    Ok(terms)
}

/// Right-hand side of the two-prime split on `(i, j)`.
pub fn two_prime_terms(t: &PrimeTuple, i: usize, j: usize, cfg: &Config) -> Result<Vec<Vec<Factor>>> {
    let n = t.len();
    if i == j || i >= n || j >= n {
        return Err(Error::invalid(format!(
            "two-prime split needs distinct indices below {n}, got ({i}, {j})"
        )));
    }
    let p = small_tuple(t)?;
    let modulus: u64 = p.iter().product();
    let (ni, nj) = (modulus / p[i], modulus / p[j]);
    let a = threshold(&p, j, i);
    let b = threshold(&p, i, j);
    let rest = |skip: usize| -> Vec<u64> {
        p.iter()
            .enumerate()
            .filter(|&(k, _)| k != skip)
            .map(|(_, &q)| q)
            .collect()
    };
    let qi = expand_primes(&rest(i), cfg.max_coefficients)?;
    let qj = expand_primes(&rest(j), cfg.max_coefficients)?;

    let mut first = vec![
        Factor::Geometric {
            step: ni,
            start: 0,
            count: a,
            negate: false,
        },
        Factor::Stretched {
            coeffs: qi,
            stride: p[i],
        },
    ];
    let mut second = vec![
        Factor::Monomial { exponent: a * ni },
        Factor::Geometric {
            step: nj,
            start: b,
            count: p[j] - b,
            negate: true,
        },
        Factor::Stretched {
            coeffs: qj,
            stride: p[j],
        },
    ];
    for k in (0..n).filter(|&k| k != i && k != j) {
        first.push(Factor::Binomial {
            exponent: ni / p[k],
        });
        second.push(Factor::Binomial {
            exponent: nj / p[k],
        });
    }
    Ok(vec![first, second])
}

/// Expands both sides of the chosen congruence and compares them exactly.
pub fn verify_identity(t: &PrimeTuple, which: &Identity, cfg: &Config) -> Result<bool> {
    let lhs = expand_pn(t, true, cfg)?;
    let m = small_tuple(t)?.iter().product::<u64>() as usize;
    let terms = match which {
        Identity::Decomposition(s) => decomposition_terms(t, s)?,
        Identity::TwoPrime { i, j } => two_prime_terms(t, *i, *j, cfg)?,
    };
    Ok(check_terms(m, lhs.coeffs(), &terms))
}
