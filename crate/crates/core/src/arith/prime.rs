use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::{Error, Result};

const SMALL_PRIMES: [u64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97,
];

/// Witness schedule for Miller-Rabin above 64 bits.
///
/// Each round with a random base has error probability at most 1/4, so the
/// default 40 rounds bounds the error by 2^-80.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Primality {
    pub rounds: u32,
    pub seed: u64,
}

impl Default for Primality {
    fn default() -> Self {
        let cfg = Config::default();
        Primality::from(&cfg)
    }
}

impl From<&Config> for Primality {
    fn from(cfg: &Config) -> Self {
        Primality {
            rounds: cfg.primality_rounds,
            seed: cfg.seed,
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit inputs (the first twelve prime bases
/// are a proven witness set below 3.3e24).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in SMALL_PRIMES.iter().take(12) {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Probable-prime test: exact below 2^64, seeded Miller-Rabin above.
pub fn is_probable_prime(n: &BigUint, schedule: &Primality) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in SMALL_PRIMES.iter() {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().expect("n > 1");
    let d = &n_minus_1 >> s;
    // Seed from the schedule and the candidate so each candidate gets its own
    // reproducible witnesses.
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&schedule.seed.to_le_bytes());
    let digits = n.to_u64_digits();
    for (i, chunk) in digits.iter().rev().take(3).enumerate() {
        seed[8 + 8 * i..16 + 8 * i].copy_from_slice(&chunk.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    'outer: for _ in 0..schedule.rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Smallest probable prime `p >= lower` with `p ≡ a (mod m)`.
pub fn next_prime_in_ap(a: &BigUint, m: &BigUint, lower: &BigUint, cfg: &Config) -> Result<BigUint> {
    if m.is_zero() {
        return Err(Error::invalid("progression modulus must be positive"));
    }
    let a = a % m;
    let g = a.gcd(m);
    if !g.is_one() {
        return Err(Error::invalid(format!(
            "residue {a} and modulus {m} share the factor {g}; the progression holds no primes"
        )));
    }
    let two = BigUint::from(2u32);
    let lower = if lower < &two { two } else { lower.clone() };
    // first candidate >= lower in the class of a
    let offset = (&a + m - (&lower % m)) % m;
    let mut candidate = &lower + offset;
    let schedule = Primality::from(cfg);
    for _ in 0..cfg.max_ap_candidates {
        if is_probable_prime(&candidate, &schedule) {
            return Ok(candidate);
        }
        candidate += m;
    }
    let last = if cfg.max_ap_candidates == 0 {
        candidate
    } else {
        candidate - m
    };
    Err(Error::resource(
        format!("prime search in {a} mod {m} (last candidate {last})"),
        cfg.max_ap_candidates,
        cfg.max_ap_candidates,
    ))
}

/// The first `count` primes, by sieving.
pub fn first_primes(count: usize) -> Vec<u64> {
    if count == 0 {
        return Vec::new();
    }
    let mut limit = 64usize;
    loop {
        let mut composite = vec![false; limit + 1];
        let mut out = Vec::new();
        for i in 2..=limit {
            if !composite[i] {
                out.push(i as u64);
                if out.len() == count {
                    return out;
                }
                let mut j = i * i;
                while j <= limit {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        limit *= 2;
    }
}
