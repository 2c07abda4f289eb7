//! Acceptance suite: one line per criterion. Run with
//! `cargo test -p pn-core --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pn_core::arith::{binomial, first_primes, is_prime_u64, mo};
use pn_core::constructions::{amplify, bounds_report, construct_height1, verify_certificate};
use pn_core::engine::{
    balance_identity_holds, classify_pqr, coeff_at, maclaurin_holds, region_scan_height,
    residue_profile, table_pqr, CoeffEvaluator, OrientationSet, PqrCase,
};
use pn_core::oracle::{degree_pn, expand_pn, height_dense, verify_identity, Identity};
use pn_core::recursion::{CoeffProvider, RecursiveProvider};
use pn_core::{Config, PrimeTuple};

const SEED: u64 = 20_100_917;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

trait Lib<T> {
    fn lib(self) -> Result<T, String>;
}

impl<T> Lib<T> for pn_core::Result<T> {
    fn lib(self) -> Result<T, String> {
        self.map_err(|e| e.to_string())
    }
}

/// Every height the suite measures, by number of primes.
#[derive(Default)]
struct Measured(BTreeMap<usize, Vec<u64>>);

impl Measured {
    fn add(&mut self, n: usize, h: u64) {
        self.0.entry(n).or_default().push(h);
    }
}

fn tuple(p: &[u64]) -> PrimeTuple {
    PrimeTuple::from_u64(p).expect("primes")
}

fn primes_below(n: u64) -> Vec<u64> {
    (2..n).filter(|&p| is_prime_u64(p)).collect()
}

fn big(k: u64) -> BigInt {
    BigInt::from(k)
}

/// Distinct primes from `pool`, in random order, accepted by `ok`.
fn sample(rng: &mut ChaCha8Rng, pool: &[u64], n: usize, ok: impl Fn(&[u64]) -> bool) -> Vec<u64> {
    loop {
        let pick: Vec<u64> = pool.choose_multiple(rng, n).copied().collect();
        if ok(&pick) {
            return pick;
        }
    }
}

/// Distinct primes with product below `bound`, chosen left to right.
fn sample_product_below(rng: &mut ChaCha8Rng, pool: &[u64], n: usize, bound: u64) -> Vec<u64> {
    'retry: loop {
        let mut out: Vec<u64> = Vec::new();
        let mut prod = 1u64;
        for left in (0..n).rev() {
            // leave room for `left` more primes of size at least 2
            let cap = bound / prod / (1 << left);
            let choices: Vec<u64> = pool
                .iter()
                .copied()
                .filter(|p| *p <= cap && !out.contains(p))
                .collect();
            let Some(&p) = choices.choose(rng) else { continue 'retry };
            out.push(p);
            prod *= p;
        }
        if prod < bound {
            return out;
        }
    }
}

fn generic(t: &PrimeTuple) -> bool {
    residue_profile(t).map(|p| p.generic).unwrap_or(false)
}

fn paper_values(m: &mut Measured) -> Outcome {
    let start = Instant::now();
    let cfg = Config::default();
    let t = tuple(&[5, 11, 23]);
    let k = big(71);
    let dense = expand_pn(&t, false, &cfg).lib()?;
    ensure!(dense.at(&k) == 1, "oracle a(71) = {}", dense.at(&k));
    for s in OrientationSet::all(3) {
        let v = coeff_at(&t, &k, &s).lib()?;
        ensure!(v == 1, "pointwise a(71) = {v} for S = {:?}", s.pairs());
    }
    let h = CoeffEvaluator::new(&t, &OrientationSet::default_for(3)).lib()?.residues(&k);
    let want: Vec<BigUint> = [2u32, 1, 13].map(BigUint::from).to_vec();
    ensure!(h == want, "h(71) = {h:?}");

    // (dimension, subset mask over positions, residue)
    let table = [
        (0, 0b010, 1u32),
        (0, 0b100, 2),
        (0, 0b110, 3),
        (1, 0b100, 1),
        (1, 0b001, 9),
        (1, 0b101, 10),
        (2, 0b011, 12),
        (2, 0b001, 14),
        (2, 0b010, 21),
    ];
    let prof = residue_profile(&t).lib()?;
    for (j, mask, want) in table {
        let got = &prof.dims[j].values[&mask];
        ensure!(*got == BigUint::from(want), "residue table dim {j} mask {mask:#b}: {got} != {want}");
    }
    m.add(3, height_dense(&dense).lib()?.0);

    let t4 = tuple(&[5, 7, 11, 13]);
    let k = big(233);
    let d4 = expand_pn(&t4, false, &cfg).lib()?;
    ensure!(d4.at(&k) == -2, "oracle a(233) = {}", d4.at(&k));
    let v = coeff_at(&t4, &k, &OrientationSet::default_for(4)).lib()?;
    ensure!(v == -2, "pointwise a(233) = {v}");
    let r = region_scan_height(&t4, &cfg).lib()?;
    ensure!(
        r.height == 2 && r.witness == BigUint::from(233u32),
        "region scan gives ({}, {})",
        r.height,
        r.witness
    );
    m.add(4, r.height);
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(1), "took {took:?}");
    Ok(format!("a(71)=1, a(233)=-2, scan (2,233), 9 residues, h(71)=(2,1,13), {took:.2?}"))
}

fn height_theorems(rng: &mut ChaCha8Rng, m: &mut Measured) -> Outcome {
    let start = Instant::now();
    let cfg = Config::default();
    let pool = primes_below(50_000);

    let mut seen = BTreeSet::new();
    while seen.len() < 200 {
        let mut p = sample_product_below(rng, &pool, 2, 100_000);
        p.sort();
        if !seen.insert(p.clone()) {
            continue;
        }
        let t = tuple(&p);
        let (h, _) = height_dense(&expand_pn(&t, false, &cfg).lib()?).lib()?;
        ensure!(h == 1, "{t} has height {h}");
        let r = region_scan_height(&t, &cfg).lib()?;
        ensure!(r.height == 1, "{t}: region scan height {}", r.height);
        m.add(2, h);
    }

    let mut seen = BTreeSet::new();
    while seen.len() < 100 {
        let mut p = sample_product_below(rng, &pool, 3, 1_000_000);
        p.sort();
        if !seen.insert(p.clone()) {
            continue;
        }
        let t = tuple(&p);
        let (h, w) = height_dense(&expand_pn(&t, false, &cfg).lib()?).lib()?;
        ensure!(h == 1, "{t} has height {h}");
        let r = region_scan_height(&t, &cfg).lib()?;
        ensure!(
            r.height == h && r.witness == BigUint::from(w),
            "{t}: scan ({}, {}) vs dense ({h}, {w})",
            r.height,
            r.witness
        );
        m.add(3, h);
    }

    let small = primes_below(200);
    let mut seen = BTreeSet::new();
    let mut twos = 0;
    while seen.len() < 50 {
        let p = sample(rng, &small, 4, |p| generic(&tuple(p)));
        let mut key = p.clone();
        key.sort();
        if !seen.insert(key) {
            continue;
        }
        let t = tuple(&p);
        let r = region_scan_height(&t, &cfg).lib()?;
        ensure!(r.height <= 2, "{t} has height {}", r.height);
        twos += usize::from(r.height == 2);
        m.add(4, r.height);
    }
    ensure!(twos > 0, "no 4-tuple reached height 2");
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(300), "took {took:?}");
    Ok(format!("200 pairs and 100 triples of height 1; 50 generic 4-tuples at most 2 ({twos} reach 2); {took:.2?}"))
}

fn three_algorithms(rng: &mut ChaCha8Rng, m: &mut Measured) -> Outcome {
    let cfg = Config::default();
    let pool = primes_below(20_000);
    let mut checked = 0u64;
    for case in 0..50 {
        let n = if case < 25 { 3 } else { 4 };
        let p = sample_product_below(rng, &pool, n, 100_000);
        let t = tuple(&p);
        let dense = expand_pn(&t, false, &cfg).lib()?;
        m.add(n, height_dense(&dense).lib()?.0);
        let sets: Vec<OrientationSet> = if n == 3 {
            OrientationSet::all(3).collect()
        } else {
            (0..8).map(|_| OrientationSet::from_bits(4, rng.gen_range(0..64))).collect()
        };
        let evals = sets
            .iter()
            .map(|s| CoeffEvaluator::new(&t, s))
            .collect::<pn_core::Result<Vec<_>>>()
            .lib()?;
        // descending order keeps every proper prefix below reciprocal sum 1
        let mut desc = p.clone();
        desc.sort_by(|a, b| b.cmp(a));
        let rec = RecursiveProvider::new(&tuple(&desc)).lib()?;
        let big_n = t.product().to_u64().expect("small");
        for k in 0..big_n {
            let k = big(k);
            let want = dense.at(&k);
            for (e, s) in evals.iter().zip(&sets) {
                let got = e.eval(&k).lib()?;
                ensure!(got == want, "{t} k={k} S={:?}: pointwise {got} vs oracle {want}", s.pairs());
            }
            let got = rec.coeff(&k).lib()?;
            ensure!(got == want, "{t} k={k}: truncation {got} vs oracle {want}");
            checked += 1;
        }
    }
    Ok(format!("50 tuples, {checked} exponents, zero mismatches"))
}

fn figure_fidelity(rng: &mut ChaCha8Rng, m: &mut Measured) -> Outcome {
    let cfg = Config::default();
    let pool: Vec<u64> = primes_below(120).into_iter().filter(|&p| p >= 5).collect();
    let mut per_case: BTreeMap<u8, Vec<Vec<u64>>> = BTreeMap::new();
    let mut tries = 0;
    while per_case.values().map(|v| v.len().min(10)).sum::<usize>() < 40 {
        tries += 1;
        ensure!(tries < 200_000, "rejection sampling stalled: {:?}", per_case.iter().map(|(c, v)| (c, v.len())).collect::<Vec<_>>());
        let p = sample(rng, &pool, 3, |_| true);
        let t = tuple(&p);
        if !generic(&t) {
            continue;
        }
        let b: Vec<BigUint> = p.iter().map(|&x| BigUint::from(x)).collect();
        let case = classify_pqr(&b[0], &b[1], &b[2]).lib()?.case.number();
        let bucket = per_case.entry(case).or_default();
        if bucket.len() < 10 && !bucket.contains(&p) {
            bucket.push(p);
        }
    }
    for (case, triples) in &per_case {
        for p in triples {
            let t = tuple(p);
            let b = t.primes();
            let table = table_pqr(&b[0], &b[1], &b[2]).lib()?;
            ensure!(table.entries.len() == 64, "{t}: {} entries", table.entries.len());
            let dense = expand_pn(&t, false, &cfg).lib()?;
            for (index, value, rep) in &table.entries {
                let want = dense.at(&BigInt::from(rep.clone()));
                ensure!(*value == want, "case {case} {t} cell {index:?} at {rep}: table {value}, oracle {want}");
            }
            m.add(3, height_dense(&dense).lib()?.0);
        }
    }
    let big_pool = primes_below(100_000);
    for _ in 0..1000 {
        let p = sample(rng, &big_pool, 3, |_| true);
        let b: Vec<BigUint> = p.iter().map(|&x| BigUint::from(x)).collect();
        ensure!(balance_identity_holds(&b[0], &b[1], &b[2]).lib()?, "balance identity fails for {p:?}");
    }
    let cases = [PqrCase::One, PqrCase::Two, PqrCase::Three, PqrCase::Four].map(|c| c.number());
    ensure!(cases.iter().all(|c| per_case[c].len() == 10), "missing cases");
    Ok(format!("10 triples in each of cases 1-4 ({tries} draws), 2560 cells; balance identity on 1000 triples"))
}

fn identity_suites(rng: &mut ChaCha8Rng) -> Outcome {
    let cfg = Config::default();
    let mut count = 0;
    for p in [[2u64, 3, 5], [3, 5, 7]] {
        let t = tuple(&p);
        for s in OrientationSet::all(3) {
            let pairs = s.pairs();
            ensure!(verify_identity(&t, &Identity::Decomposition(s), &cfg).lib()?, "decomposition fails on {t} for S = {pairs:?}");
            count += 1;
        }
        for i in 0..3 {
            for j in (0..3).filter(|&j| j != i) {
                ensure!(verify_identity(&t, &Identity::TwoPrime { i, j }, &cfg).lib()?, "two-prime identity fails on {t} for ({i},{j})");
                count += 1;
            }
        }
    }
    let mut pairs = 0;
    while pairs < 1000 {
        let p = rng.gen_range(2u64..4_000_000_000);
        let q = rng.gen_range(2u64..4_000_000_000);
        if p == q || !is_prime_u64(p) || !is_prime_u64(q) {
            continue;
        }
        let (bp, bq) = (big(p), big(q));
        let mp = BigInt::from(mo(&big(1), &bp, &BigUint::from(q)).lib()?);
        let mq = BigInt::from(mo(&big(1), &bq, &BigUint::from(p)).lib()?);
        ensure!(&bp * mp + &bq * mq == &bp * &bq + 1, "pq+1 fails for ({p}, {q})");
        pairs += 1;
    }
    Ok(format!("{count} identities on (2,3,5) and (3,5,7); pq+1 on 1000 pairs"))
}

/// Gating part and the informational n = 5 attempt.
fn constructions(m: &mut Measured) -> Result<(String, String), String> {
    let cfg = Config::default();
    let mut sizes = Vec::new();
    for n in 2..=4 {
        let cert = construct_height1(n, &cfg).lib()?;
        let t = cert.tuple().lib()?;
        let r = region_scan_height(&t, &cfg).lib()?;
        ensure!(r.height == 1, "height1({n}) = {t} has height {}", r.height);
        ensure!(verify_certificate(&cert, &cfg).lib()?.ok, "certificate for n={n} does not verify");
        m.add(n, r.height);
        sizes.push(cert.primes.last().map(|p| p.len()).unwrap_or(0));
    }

    let base = construct_height1(3, &cfg).lib()?.tuple().lib()?;
    let a = amplify(&base, &cfg).lib()?;
    ensure!(a.tuple.len() == 4, "amplified tuple has {} primes", a.tuple.len());
    ensure!(a.coefficient.abs() >= 2, "amplified coefficient {}", a.coefficient);
    let pointwise = coeff_at(&a.tuple, &BigInt::from(a.witness.clone()), &OrientationSet::default_for(4)).lib()?;
    ensure!(pointwise == a.coefficient, "pointwise value {pointwise} at the witness, construction says {}", a.coefficient);
    ensure!(verify_certificate(&a.certificate, &cfg).lib()?.ok, "amplified certificate does not verify");
    if let Some(h) = a.certificate.height {
        m.add(4, h);
    }

    for (n, upper, lower) in [(3, "3/2", "1"), (4, "4", "2"), (5, "20", "6")] {
        let b = bounds_report(n).lib()?;
        ensure!(b.upper == upper && b.lower == lower, "bounds({n}) = ({}, {})", b.upper, b.lower);
    }

    let start = Instant::now();
    let five = match construct_height1(5, &cfg).and_then(|c| Ok((c.tuple()?, c))) {
        Ok((t, _)) => match region_scan_height(&t, &cfg) {
            Ok(r) => {
                m.add(5, r.height);
                format!("height1(5) has height {} ({:.2?})", r.height, start.elapsed())
            }
            Err(e) => format!("height1(5) built, scan failed: {e}"),
        },
        Err(e) => format!("height1(5) failed: {e}"),
    };
    Ok((
        format!(
            "height1 n=2,3,4 scan to 1 (last prime {sizes:?} digits); amplify witness of {} digits has coefficient {}; bounds match",
            a.witness.to_string().len(),
            a.coefficient
        ),
        five,
    ))
}

fn degree_threshold(rng: &mut ChaCha8Rng) -> Outcome {
    let start = Instant::now();
    let primes = first_primes(176);
    let below = PrimeTuple::from_u64(&primes[..175]).lib()?;
    let at = PrimeTuple::from_u64(&primes).lib()?;
    let n175 = BigInt::from(below.product().clone());
    let n176 = BigInt::from(at.product().clone());
    ensure!(degree_pn(&below) < n175, "175 primes already reach deg >= N");
    ensure!(degree_pn(&at) >= n176, "176 primes still have deg < N");
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(10), "took {took:?}");

    let pool = first_primes(30);
    let (mut fast, mut exact) = (0, 0);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=6);
        let p = sample(rng, &pool[..(n + 6).min(30)], n, |_| true);
        let t = tuple(&p);
        let lt = degree_pn(&t) < BigInt::from(t.product().clone());
        let prof = residue_profile(&t).lib()?;
        ensure!(prof.deg_lt_n == lt, "{t}: profile says deg<N = {}", prof.deg_lt_n);
        if maclaurin_holds(&t) {
            fast += 1;
            ensure!(lt, "{t}: Maclaurin test passes but deg >= N");
        }
        exact += usize::from(lt);
    }
    Ok(format!("175 below, 176 at or above ({took:.2?}); Maclaurin fast path {fast}/1000, exact {exact}/1000, no contradiction"))
}

fn bounds_and_factor(m: &Measured) -> Outcome {
    let cfg = Config::default();
    let mut lines = Vec::new();
    for (&n, hs) in &m.0 {
        let b = bounds_report(n as u64).lib()?;
        let max = *hs.iter().max().expect("nonempty");
        for &h in hs {
            let hr = pn_core::Rational::from_integer(big(h));
            ensure!(hr <= b.upper_value, "n={n}: height {h} above upper bound {}", b.upper);
        }
        if n <= 4 {
            ensure!(BigUint::from(max) >= b.lower_value, "n={n}: largest measured {max} below lower bound {}", b.lower);
            lines.push(format!("n={n}: {} tuples, max {max} in [{}, {}]", hs.len(), b.lower, b.upper));
        } else {
            lines.push(format!("n={n}: {} tuples, max {max} <= {} (no amplified {n}-tuple, lower {} not attained)", hs.len(), b.upper, b.lower));
        }
    }
    for (start, label) in [(tuple(&[3, 5]), "(3,5)"), (construct_height1(3, &cfg).lib()?.tuple().lib()?, "height1(3)")] {
        let n = start.len() as u64;
        let a = amplify(&start, &cfg).lib()?;
        let factor = binomial(n - 1, (n - 1) / 2).to_i64().expect("small");
        let want = factor * a.base_height as i64;
        ensure!(a.coefficient.unsigned_abs() as i64 == want, "{label}: |coefficient| {} but factor {factor} times height {}", a.coefficient, a.base_height);
    }
    Ok(format!("{}; amplification factor exact from (3,5) and height1(3)", lines.join("; ")))
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut m = Measured::default();
    let mut failed = 0;
    let mut clock = Instant::now();
    let mut report = |id: &str, r: Outcome| {
        let took = clock.elapsed();
        clock = Instant::now();
        match &r {
            Ok(msg) => println!("PASS criterion {id}: {msg} [{took:.1?}]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {id}: {msg} [{took:.1?}]");
            }
        }
    };
    report("1 paper values", paper_values(&mut m));
    report("2 height theorems", height_theorems(&mut rng, &mut m));
    report("3 three algorithms", three_algorithms(&mut rng, &mut m));
    report("4 triple figures", figure_fidelity(&mut rng, &mut m));
    report("5 identities", identity_suites(&mut rng));
    match constructions(&mut m) {
        Ok((gating, five)) => {
            report("6 constructions", Ok(gating));
            println!("INFO criterion 6 (not gating): {five}");
        }
        Err(e) => report("6 constructions", Err(e)),
    }
    report("7 degree threshold", degree_threshold(&mut rng));
    report("8 bounds and amplification", bounds_and_factor(&m));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
