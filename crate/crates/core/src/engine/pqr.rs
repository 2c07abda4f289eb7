//! Three primes: the four orderings of residues and their coefficient tables.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::Serialize;

use crate::arith::{inv_residue, mo, PrimeTuple};
use crate::error::{Error, Result};

use super::{residue_profile, RegionMap};

/// `[x][y][z]` over interval indices along the `p`, `q` and `r` axes.
type Table = [[[i8; 4]; 4]; 4];

const CASE_ONE: Table = [
    [
        [ 1,  0,  0,  0],
        [ 0,  0,  0, -1],
        [ 0,  0,  1,  0],
        [ 0, -1,  0,  0],
    ],
    [
        [ 1,  0,  0,  1],
        [ 0,  0,  0,  0],
        [-1, -1,  0,  0],
        [ 0, -1,  0,  1],
    ],
    [
        [ 0,  0, -1,  0],
        [ 0,  1,  0,  0],
        [-1,  0,  0,  0],
        [ 0,  0,  0,  1],
    ],
    [
        [ 0, -1, -1,  0],
        [ 0,  0,  0,  0],
        [ 0,  0,  1,  1],
        [ 0, -1,  0,  1],
    ],
];

const CASE_TWO: Table = [
    [
        [ 1,  0,  0,  0],
        [ 0,  0,  0, -1],
        [ 0,  0,  1,  0],
        [ 0, -1,  0,  0],
    ],
    [
        [ 0,  0, -1, -1],
        [ 0,  1,  0, -1],
        [ 0,  1,  1,  0],
        [ 0,  0,  0,  0],
    ],
    [
        [ 0,  0, -1,  0],
        [ 0,  1,  0,  0],
        [-1,  0,  0,  0],
        [ 0,  0,  0,  1],
    ],
    [
        [ 0, -1, -1,  0],
        [ 0,  0,  0,  0],
        [ 0,  0,  1,  1],
        [ 0, -1,  0,  1],
    ],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PqrCase {
    One,
    Two,
    Three,
    Four,
}

impl PqrCase {
    pub fn number(self) -> u8 {
        match self {
            PqrCase::One => 1,
            PqrCase::Two => 2,
            PqrCase::Three => 3,
            PqrCase::Four => 4,
        }
    }

    fn reversed(self) -> bool {
        matches!(self, PqrCase::Three | PqrCase::Four)
    }

    fn base(self) -> &'static Table {
        match self {
            PqrCase::One | PqrCase::Three => &CASE_ONE,
            PqrCase::Two | PqrCase::Four => &CASE_TWO,
        }
    }
}

/// Case label and the roles: `perm[0]`, `perm[1]`, `perm[2]` are the input
/// positions playing `p`, `q` and `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Pqr {
    pub case: PqrCase,
    pub perm: [usize; 3],
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

struct Chains {
    // r line
    a: BigUint,
    b: BigUint,
    c: BigUint,
    // q line
    d: BigUint,
    e: BigUint,
    f: BigUint,
    // p line
    g: BigUint,
    h: BigUint,
    i: BigUint,
}

fn inv(x: &BigUint, m: &BigUint) -> BigUint {
    inv_residue(x, m).expect("distinct primes")
}

fn mo_plus_sum(x: &BigUint, y: &BigUint, m: &BigUint) -> BigUint {
    let s = (inv(x, m) + inv(y, m)) % m;
    if s.is_zero() {
        m.clone()
    } else {
        s
    }
}

fn chains(p: &BigUint, q: &BigUint, r: &BigUint) -> Chains {
    Chains {
        a: mo_plus_sum(p, q, r),
        b: inv(p, r),
        c: inv(q, r),
        d: inv(r, q),
        e: inv(p, q),
        f: mo_plus_sum(p, r, q),
        g: inv(q, p),
        h: inv(r, p),
        i: mo_plus_sum(q, r, p),
    }
}

fn holds(ch: &Chains, case: PqrCase) -> bool {
    match case {
        PqrCase::One => ch.a < ch.b && ch.b <= ch.c && ch.d <= ch.e && ch.e < ch.f && ch.g <= ch.h && ch.h < ch.i,
        PqrCase::Two => ch.a < ch.b && ch.b <= ch.c && ch.d <= ch.e && ch.e < ch.f && ch.h <= ch.g && ch.g < ch.i,
        PqrCase::Three => ch.a > ch.b && ch.b >= ch.c && ch.d >= ch.e && ch.e > ch.f && ch.g >= ch.h && ch.h > ch.i,
        PqrCase::Four => ch.a > ch.b && ch.b >= ch.c && ch.d >= ch.e && ch.e > ch.f && ch.h >= ch.g && ch.g > ch.i,
    }
}

/// First `(permutation, case)` whose chains hold, scanning permutations in
/// lexicographic order and cases in order. Triples with tied residues are
/// refused, since more than one labelling can then apply.
pub fn classify_pqr(p: &BigUint, q: &BigUint, r: &BigUint) -> Result<Pqr> {
    let t = PrimeTuple::new(vec![p.clone(), q.clone(), r.clone()])?;
    let prof = residue_profile(&t)?;
    if let Some(j) = prof.dims.iter().position(|d| !d.distinct) {
        return Err(Error::unsupported(format!(
            "{t} has tied residues modulo {}; the case is not determined",
            t.prime(j)
        )));
    }
    let primes = t.primes();
    for perm in PERMS {
        let ch = chains(&primes[perm[0]], &primes[perm[1]], &primes[perm[2]]);
        for case in [PqrCase::One, PqrCase::Two, PqrCase::Three, PqrCase::Four] {
            if holds(&ch, case) {
                return Ok(Pqr { case, perm });
            }
        }
    }
    panic!("{t} satisfies none of the four orderings");
}

/// Tabulated coefficient at role coordinates `(x_p, x_q, x_r)`.
pub fn figure_value(case: PqrCase, role_index: [usize; 3]) -> i8 {
    let [x, y, z] = if case.reversed() {
        role_index.map(|v| 3 - v)
    } else {
        role_index
    };
    case.base()[x][y][z]
}

/// The 64 region values of a generic triple, indexed in input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionTable3 {
    pub primes: [String; 3],
    pub pqr: Pqr,
    /// `(index, coefficient, lower-corner exponent)` in lexicographic order.
    pub entries: Vec<([usize; 3], i64, BigUint)>,
}

impl RegionTable3 {
    pub fn get(&self, index: [usize; 3]) -> i64 {
        self.entries[index[0] * 16 + index[1] * 4 + index[2]].1
    }
}

pub fn table_pqr(p: &BigUint, q: &BigUint, r: &BigUint) -> Result<RegionTable3> {
    let t = PrimeTuple::new(vec![p.clone(), q.clone(), r.clone()])?;
    let map = RegionMap::new(&t)?;
    if !map.is_generic() {
        return Err(Error::unsupported(format!("{t} is not generic")));
    }
    let pqr = classify_pqr(p, q, r)?;
    let mut entries = Vec::with_capacity(64);
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                let index = [x, y, z];
                let role = pqr.perm.map(|d| index[d]);
                let value = i64::from(figure_value(pqr.case, role));
                entries.push((index, value, map.corner(&index)?));
            }
        }
    }
    Ok(RegionTable3 {
        primes: [p.to_string(), q.to_string(), r.to_string()],
        pqr,
        entries,
    })
}

/// `pq(a+b) + pr(c+d) + qr(e+f) = 3pqr + p + q + r`, where `a, b` are the
/// inverses of `p, q` mod `r`, `c, d` those of `p, r` mod `q`, and `e, f`
/// those of `q, r` mod `p`.
pub fn balance_identity_holds(p: &BigUint, q: &BigUint, r: &BigUint) -> Result<bool> {
    let m = |x: &BigUint, y: &BigUint| -> Result<BigInt> {
        Ok(BigInt::from(mo(&BigInt::from(1), &BigInt::from(x.clone()), y)?))
    };
    let (pb, qb, rb) = (
        BigInt::from(p.clone()),
        BigInt::from(q.clone()),
        BigInt::from(r.clone()),
    );
    let lhs = &pb * &qb * (m(p, r)? + m(q, r)?)
        + &pb * &rb * (m(p, q)? + m(r, q)?)
        + &qb * &rb * (m(q, p)? + m(r, p)?);
    let rhs = BigInt::from(3) * &pb * &qb * &rb + &pb + &qb + &rb;
    Ok(lhs == rhs)
}
