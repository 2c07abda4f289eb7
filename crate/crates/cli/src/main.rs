//! `pn`: coefficients, heights and constructions for `P_N` from the shell.
//!
//! Exit status: 0 success, 1 verification failure, 2 usage error, 3 budget
//! exceeded.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};

use pn_core::arith::Primality;
use pn_core::constructions::{
    amplify, bounds_report, construct_height1, load_or_build, verify_certificate, Certificate,
    CertificateKind,
};
use pn_core::engine::{
    classify_pqr, coeff_region_lookup, region_scan_height, table3_csv, table3_svg, table_pqr,
    OrientationSet, RegionMap,
};
use pn_core::oracle::{expand_pn, height_dense, verify_identity, Identity};
use pn_core::recursion::{ClosedFormProvider, CoeffProvider, RecursiveProvider};
use pn_core::{Config, Error, PrimeTuple};

#[derive(Parser)]
#[command(name = "pn", version, about = "Coefficients and heights of inclusion-exclusion polynomials P_N")]
struct Cli {
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Overrides for [`Config`]; flags beat `PN_*` variables, which beat `--config`.
#[derive(Args)]
struct BudgetArgs {
    /// File of `key=value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Region-scan worker threads.
    #[arg(long, global = true)]
    threads: Option<String>,
    #[arg(long, global = true)]
    max_coefficients: Option<String>,
    #[arg(long, global = true)]
    max_regions: Option<String>,
    #[arg(long, global = true)]
    max_ap_candidates: Option<String>,
    #[arg(long, global = true)]
    max_region_probes: Option<String>,
    #[arg(long, global = true)]
    primality_rounds: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Coefficient of x^k.
    Coeff {
        #[arg(long)]
        primes: String,
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        #[arg(long, value_enum, default_value_t = CoeffMethod::Closed)]
        method: CoeffMethod,
    },
    /// Dense expansion.
    Poly {
        #[arg(long)]
        primes: String,
        #[arg(long, value_enum, default_value_t = PolyFormat::Csv)]
        format: PolyFormat,
        /// Reduce modulo x^N - 1.
        #[arg(long)]
        reduced: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest absolute coefficient and the smallest exponent attaining it.
    Height {
        #[arg(long)]
        primes: String,
        #[arg(long, value_enum, default_value_t = HeightMethod::Region)]
        method: HeightMethod,
    },
    /// Case and roles of a generic triple.
    Classify3 {
        #[arg(long)]
        primes: String,
    },
    /// The 64-entry region table of a generic triple.
    Table3 {
        #[arg(long)]
        primes: String,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a certificate.
    Construct {
        #[arg(value_enum)]
        kind: ConstructKind,
        /// Number of primes in the result.
        #[arg(long)]
        n: Option<usize>,
        /// Input tuple for amplify.
        #[arg(long)]
        primes: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reuse verified certificates stored here.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Height bounds for n primes.
    Bounds {
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
    },
    /// Check a certificate file, or the polynomial identities of a tuple.
    Verify {
        certificate: Option<PathBuf>,
        #[arg(long, conflicts_with = "certificate")]
        identities: bool,
        #[arg(long, requires = "identities")]
        primes: Option<String>,
    },
    /// Timing of the coefficient methods on one tuple.
    Bench {
        #[arg(long)]
        primes: String,
        /// Exponents sampled evenly from [0, N).
        #[arg(long, default_value_t = 1000)]
        samples: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CoeffMethod {
    Closed,
    Recursive,
    Oracle,
    Region,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolyFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeightMethod {
    Dense,
    Region,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructKind {
    Height1,
    Amplify,
}

enum Failure {
    Verification(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_config(&cli.budget).map_err(Failure::from).and_then(|cfg| run(cli.cmd, &cfg));
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(msg)) => {
            print!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("pn: {e}");
            ExitCode::from(match e {
                Error::ConstructionFailure(_) => 1,
                Error::Resource { .. } => 3,
                _ => 2,
            })
        }
    }
}

fn load_config(args: &BudgetArgs) -> pn_core::Result<Config> {
    let mut cfg = Config::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("config file {}: {e}", path.display())))?;
        cfg.apply_kv(&text)?;
    }
    for key in Config::KEYS {
        if let Ok(v) = std::env::var(format!("PN_{}", key.to_uppercase())) {
            cfg.set(key, &v)?;
        }
    }
    let flags = [
        ("threads", &args.threads),
        ("max_coefficients", &args.max_coefficients),
        ("max_regions", &args.max_regions),
        ("max_ap_candidates", &args.max_ap_candidates),
        ("max_region_probes", &args.max_region_probes),
        ("primality_rounds", &args.primality_rounds),
        ("seed", &args.seed),
    ];
    for (key, v) in flags {
        if let Some(v) = v {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

fn parse_tuple(s: &str, cfg: &Config) -> pn_core::Result<PrimeTuple> {
    let primes = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<BigUint>()
                .map_err(|_| Error::InvalidInput(format!("{p:?} is not a nonnegative integer")))
        })
        .collect::<pn_core::Result<Vec<_>>>()?;
    PrimeTuple::with_schedule(primes, &Primality::from(cfg))
}

fn parse_int(s: &str) -> pn_core::Result<BigInt> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{s:?} is not an integer")))
}

fn emit(text: String, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(Error::from)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn run(cmd: Cmd, cfg: &Config) -> Outcome {
    match cmd {
        Cmd::Coeff { primes, k, method } => {
            let t = parse_tuple(&primes, cfg)?;
            let k = parse_int(&k)?;
            Ok(format!("{}\n", coeff(&t, &k, method, cfg)?))
        }
        Cmd::Poly {
            primes,
            format,
            reduced,
            out,
        } => {
            let t = parse_tuple(&primes, cfg)?;
            let v = expand_pn(&t, reduced, cfg)?;
            let text = match format {
                PolyFormat::Csv => v.to_csv(),
                PolyFormat::Json => v.to_json() + "\n",
            };
            emit(text, out.as_deref())
        }
        Cmd::Height { primes, method } => {
            let t = parse_tuple(&primes, cfg)?;
            let (h, w) = match method {
                HeightMethod::Dense => {
                    let (h, w) = height_dense(&expand_pn(&t, false, cfg)?)?;
                    (h, w.to_string())
                }
                HeightMethod::Region => {
                    let r = region_scan_height(&t, cfg)?;
                    (r.height, r.witness.to_string())
                }
            };
            Ok(format!("height={h} witness={w}\n"))
        }
        Cmd::Classify3 { primes } => {
            let t = triple(&primes, cfg)?;
            let p = t.primes();
            let c = classify_pqr(&p[0], &p[1], &p[2])?;
            Ok(format!(
                "case={} p={} q={} r={}\n",
                c.case.number(),
                p[c.perm[0]],
                p[c.perm[1]],
                p[c.perm[2]]
            ))
        }
        Cmd::Table3 {
            primes,
            format,
            out,
        } => {
            let t = triple(&primes, cfg)?;
            let p = t.primes();
            let table = table_pqr(&p[0], &p[1], &p[2])?;
            let text = match format {
                TableFormat::Csv => table3_csv(&table),
                TableFormat::Svg => table3_svg(&table, &RegionMap::new(&t)?),
            };
            emit(text, out.as_deref())
        }
        Cmd::Construct {
            kind,
            n,
            primes,
            out,
            cache_dir,
        } => {
            let cert = construct(kind, n, primes.as_deref(), cache_dir.as_deref(), cfg)?;
            emit(cert.to_json() + "\n", out.as_deref())
        }
        Cmd::Bounds { n } => {
            if n.is_empty() {
                return Err(Error::InvalidInput("bounds needs --n".into()).into());
            }
            let mut s = String::new();
            for n in n {
                let r = bounds_report(n)?;
                s += &serde_json::to_string(&r).map_err(Error::from)?;
                s.push('\n');
            }
            Ok(s)
        }
        Cmd::Verify {
            certificate,
            identities,
            primes,
        } => {
            if identities {
                let primes = primes.ok_or_else(|| Error::InvalidInput("--identities needs --primes".into()))?;
                verify_identities(&parse_tuple(&primes, cfg)?, cfg)
            } else {
                let path = certificate.ok_or_else(|| Error::InvalidInput("verify needs a certificate file or --identities".into()))?;
                let text = fs::read_to_string(&path)
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
                let cert = Certificate::from_json(&text)?;
                let v = verify_certificate(&cert, cfg)?;
                if v.ok {
                    Ok(format!("ok {} {}\n", cert.kind.name(), cert.primes.len()))
                } else {
                    let mut s = String::new();
                    for f in &v.failures {
                        let _ = writeln!(s, "FAIL {f}");
                    }
                    Err(Failure::Verification(s))
                }
            }
        }
        Cmd::Bench { primes, samples } => bench(&parse_tuple(&primes, cfg)?, samples, cfg),
    }
}

fn triple(primes: &str, cfg: &Config) -> pn_core::Result<PrimeTuple> {
    let t = parse_tuple(primes, cfg)?;
    if t.len() != 3 {
        return Err(Error::InvalidInput(format!("expected three primes, got {}", t.len())));
    }
    Ok(t)
}

fn coeff(t: &PrimeTuple, k: &BigInt, method: CoeffMethod, cfg: &Config) -> pn_core::Result<i64> {
    match method {
        CoeffMethod::Closed => ClosedFormProvider::new(t)?.coeff(k),
        CoeffMethod::Recursive => RecursiveProvider::new(t)?.coeff(k),
        CoeffMethod::Oracle => Ok(expand_pn(t, false, cfg)?.at(k)),
        CoeffMethod::Region => {
            if k.sign() == num_bigint::Sign::Minus || k >= &BigInt::from(t.product().clone()) {
                return Ok(0);
            }
            Ok(coeff_region_lookup(t, k)?.0)
        }
    }
}

fn construct(
    kind: ConstructKind,
    n: Option<usize>,
    primes: Option<&str>,
    cache: Option<&Path>,
    cfg: &Config,
) -> pn_core::Result<Certificate> {
    match kind {
        ConstructKind::Height1 => {
            let n = n.ok_or_else(|| Error::InvalidInput("construct height1 needs --n".into()))?;
            match cache {
                Some(dir) => load_or_build(dir, CertificateKind::Height1, n, cfg, || construct_height1(n, cfg)),
                None => construct_height1(n, cfg),
            }
        }
        ConstructKind::Amplify => match (primes, n) {
            (Some(p), None) => Ok(amplify(&parse_tuple(p, cfg)?, cfg)?.certificate),
            (None, Some(n)) => {
                if n < 3 {
                    return Err(Error::InvalidInput(format!("amplify --n needs n >= 3, got {n}")));
                }
                let build = || {
                    let base = construct_height1(n - 1, cfg)?.tuple()?;
                    Ok(amplify(&base, cfg)?.certificate)
                };
                match cache {
                    Some(dir) => load_or_build(dir, CertificateKind::Amplified, n, cfg, build),
                    None => build(),
                }
            }
            _ => Err(Error::InvalidInput("construct amplify needs exactly one of --primes or --n".into())),
        },
    }
}

fn verify_identities(t: &PrimeTuple, cfg: &Config) -> Outcome {
    let n = t.len();
    let mut s = String::new();
    let mut failed = false;
    let mut check = |name: String, id: Identity| -> pn_core::Result<()> {
        let ok = verify_identity(t, &id, cfg)?;
        failed |= !ok;
        let _ = writeln!(s, "{} {name}", if ok { "PASS" } else { "FAIL" });
        Ok(())
    };
    for set in OrientationSet::all(n) {
        let pairs: Vec<String> = set
            .pairs()
            .iter()
            .map(|(i, j)| format!("({},{})", i + 1, j + 1))
            .collect();
        check(format!("decomposition S={{{}}}", pairs.join(",")), Identity::Decomposition(set))?;
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                check(format!("two-prime i={} j={}", i + 1, j + 1), Identity::TwoPrime { i, j })?;
            }
        }
    }
    if failed {
        Err(Failure::Verification(s))
    } else {
        Ok(s)
    }
}

fn bench(t: &PrimeTuple, samples: u64, cfg: &Config) -> Outcome {
    let big_n = BigInt::from(t.product().clone());
    let samples = samples.max(1);
    let ks: Vec<BigInt> = (0..samples)
        .map(|i| &big_n * BigInt::from(i) / BigInt::from(samples))
        .collect();
    let mut rows: Vec<(&str, f64, Vec<i64>)> = Vec::new();
    let start = Instant::now();
    let dense = expand_pn(t, false, cfg)?;
    rows.push(("oracle", start.elapsed().as_secs_f64(), ks.iter().map(|k| dense.at(k)).collect()));
    let timed = |p: &dyn CoeffProvider| -> pn_core::Result<(f64, Vec<i64>)> {
        let start = Instant::now();
        let v = ks.iter().map(|k| p.coeff(k)).collect::<pn_core::Result<Vec<_>>>()?;
        Ok((start.elapsed().as_secs_f64(), v))
    };
    let (secs, v) = timed(&ClosedFormProvider::new(t)?)?;
    rows.push(("closed", secs, v));
    let (secs, v) = timed(&RecursiveProvider::new(t)?)?;
    rows.push(("recursive", secs, v));
    let reference = rows[0].2.clone();
    let mut s = String::from("method,exponents,seconds,agrees_with_oracle\n");
    for (name, secs, v) in &rows {
        let _ = writeln!(s, "{name},{},{secs:.6},{}", ks.len(), *v == reference);
    }
    if rows.iter().any(|r| r.2 != reference) {
        return Err(Failure::Verification(s));
    }
    Ok(s)
}
