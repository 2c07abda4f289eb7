use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::arith::{PrimeTuple, Rational};
use crate::config::Config;
use crate::engine::region_scan_height;
use crate::error::{Error, Result};

use super::{amplify, enlarge, height1};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    Height1,
    Amplified,
    Enlarged,
}

impl CertificateKind {
    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::Height1 => "height1",
            CertificateKind::Amplified => "amplified",
            CertificateKind::Enlarged => "enlarged",
        }
    }
}

/// One checked inequality, with the concrete numbers it compared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub instance: String,
    pub holds: bool,
}

impl Condition {
    pub(crate) fn new(name: impl Into<String>, instance: impl Into<String>, holds: bool) -> Self {
        Condition {
            name: name.into(),
            instance: instance.into(),
            holds,
        }
    }
}

/// A prime replacement made during construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: String,
    pub position: usize,
    pub from: String,
    pub to: String,
    /// The new prime is congruent to `residue` modulo `modulus`.
    pub residue: String,
    pub modulus: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_ap_candidates: u64,
    pub max_region_probes: u64,
    pub max_regions: u64,
}

impl From<&Config> for Budget {
    fn from(cfg: &Config) -> Self {
        Budget {
            max_ap_candidates: cfg.max_ap_candidates,
            max_region_probes: cfg.max_region_probes,
            max_regions: cfg.max_regions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub primes: Vec<String>,
    pub conditions: Vec<Condition>,
    pub height: Option<u64>,
    pub witness: Option<String>,
    pub witness_coefficient: Option<i64>,
    pub trace: Vec<TraceStep>,
    pub budget: Budget,
    /// Kind-specific data such as the constant `c` or the source tuple.
    pub extra: BTreeMap<String, String>,
}

impl Certificate {
    pub fn tuple(&self) -> Result<PrimeTuple> {
        parse_tuple(&self.primes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub(crate) fn extra_rational(&self, key: &str) -> Result<Rational> {
        let s = self
            .extra
            .get(key)
            .ok_or_else(|| Error::invalid(format!("certificate lacks field {key}")))?;
        parse_rational(s)
    }

    pub(crate) fn extra_tuple(&self, key: &str) -> Result<PrimeTuple> {
        let s = self
            .extra
            .get(key)
            .ok_or_else(|| Error::invalid(format!("certificate lacks field {key}")))?;
        let parts: Vec<String> = s.split(',').map(|x| x.trim().to_string()).collect();
        parse_tuple(&parts)
    }
}

pub(crate) fn parse_tuple(primes: &[String]) -> Result<PrimeTuple> {
    let primes = primes
        .iter()
        .map(|s| {
            s.parse::<BigUint>()
                .map_err(|_| Error::invalid(format!("not an integer: {s}")))
        })
        .collect::<Result<Vec<_>>>()?;
    PrimeTuple::new(primes)
}

pub(crate) fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::invalid(format!("not a rational: {s}"));
    match s.split_once('/') {
        Some((a, b)) => Ok(Rational::new(
            a.trim().parse::<BigInt>().map_err(|_| bad())?,
            b.trim().parse::<BigInt>().map_err(|_| bad())?,
        )),
        None => Ok(Rational::from_integer(s.trim().parse::<BigInt>().map_err(|_| bad())?)),
    }
}

pub(crate) fn join_tuple(t: &PrimeTuple) -> String {
    t.to_strings().join(",")
}

/// Outcome of re-deriving a certificate from its primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub ok: bool,
    pub failures: Vec<String>,
}

/// Recomputes every recorded condition and measurement from the primes
/// (plus the recorded source tuple and constant where the kind needs them).
pub fn verify_certificate(cert: &Certificate, cfg: &Config) -> Result<Verification> {
    let t = cert.tuple()?;
    let recomputed = match cert.kind {
        CertificateKind::Height1 => height1::conditions(&t)?,
        CertificateKind::Enlarged => {
            let source = cert.extra_tuple("source")?;
            let c = cert.extra_rational("c")?;
            enlarge::conditions(&source, &t, &c)?
        }
        CertificateKind::Amplified => amplify::conditions(cert, &t, cfg)?,
    };
    let mut failures = Vec::new();
    for c in &recomputed {
        if !c.holds {
            failures.push(format!("{} fails: {}", c.name, c.instance));
        }
    }
    if recomputed != cert.conditions {
        failures.push("recorded conditions differ from the recomputed ones".into());
    }
    if let Some(h) = cert.height {
        match region_scan_height(&t, cfg) {
            Ok(r) => {
                if r.height != h {
                    failures.push(format!("height {h} recorded, {} measured", r.height));
                }
                // amplified certificates carry the constructed witness instead
                let scanned = cert.kind != CertificateKind::Amplified;
                if scanned && cert.witness.as_deref() != Some(r.witness.to_string().as_str()) {
                    failures.push(format!("witness differs from measured {}", r.witness));
                }
            }
            Err(Error::Resource { .. }) if cert.kind == CertificateKind::Amplified => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Verification {
        ok: failures.is_empty(),
        failures,
    })
}

pub fn cache_path(dir: &Path, kind: CertificateKind, n: usize, cfg: &Config) -> PathBuf {
    dir.join(format!(
        "{}-n{}-b{}-s{}.json",
        kind.name(),
        n,
        cfg.max_ap_candidates,
        cfg.seed
    ))
}

/// Returns a cached certificate when it still verifies; otherwise builds,
/// verifies and stores a fresh one.
pub fn load_or_build<F>(dir: &Path, kind: CertificateKind, n: usize, cfg: &Config, build: F) -> Result<Certificate>
where
    F: FnOnce() -> Result<Certificate>,
{
    let path = cache_path(dir, kind, n, cfg);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(cert) = Certificate::from_json(&text) {
            if cert.kind == kind && verify_certificate(&cert, cfg)?.ok {
                return Ok(cert);
            }
        }
    }
    let cert = build()?;
    let check = verify_certificate(&cert, cfg)?;
    if !check.ok {
        return Err(Error::ConstructionFailure(check.failures.join("; ")));
    }
    fs::create_dir_all(dir)?;
    fs::write(&path, cert.to_json())?;
    Ok(cert)
}
