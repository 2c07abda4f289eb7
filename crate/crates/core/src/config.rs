use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Work limits and reproducibility knobs shared by every algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    /// Largest dense coefficient vector `expand_pn` will materialize.
    pub max_coefficients: u64,
    /// Largest number of regions a region scan may visit.
    pub max_regions: u64,
    /// Candidates tried by a single arithmetic-progression prime search.
    pub max_ap_candidates: u64,
    /// Maximal-height regions probed while searching for an amplification base point.
    pub max_region_probes: u64,
    /// Miller-Rabin rounds for inputs of 64 bits or more.
    pub primality_rounds: u32,
    /// Seed for the Miller-Rabin witness schedule.
    pub seed: u64,
    /// Worker threads for region scans. Results do not depend on this.
    pub threads: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_coefficients: 10_000_000,
            max_regions: 1 << 20,
            max_ap_candidates: 1_000_000,
            max_region_probes: 1 << 20,
            primality_rounds: 40,
            seed: 0x5eed_1e55,
            threads: 1,
        }
    }
}

impl Config {
    /// Field names accepted by [`Config::set`].
    pub const KEYS: [&'static str; 7] = [
        "max_coefficients",
        "max_regions",
        "max_ap_candidates",
        "max_region_probes",
        "primality_rounds",
        "seed",
        "threads",
    ];

    /// Sets one field from its decimal string form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |e: std::num::ParseIntError| Error::InvalidInput(format!("{key}={value}: {e}"));
        match key.trim() {
            "max_coefficients" => self.max_coefficients = value.parse().map_err(bad)?,
            "max_regions" => self.max_regions = value.parse().map_err(bad)?,
            "max_ap_candidates" => self.max_ap_candidates = value.parse().map_err(bad)?,
            "max_region_probes" => self.max_region_probes = value.parse().map_err(bad)?,
            "primality_rounds" => self.primality_rounds = value.parse().map_err(bad)?,
            "seed" => self.seed = value.parse().map_err(bad)?,
            "threads" => {
                let t: usize = value.parse().map_err(bad)?;
                if t == 0 {
                    return Err(Error::InvalidInput("threads must be at least 1".into()));
                }
                self.threads = t;
            }
            other => return Err(Error::InvalidInput(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("config line {}: expected key=value, got {line:?}", no + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_file() {
        let mut c = Config::default();
        c.apply_kv("# budgets\nmax_regions = 99\n\nseed=7 # fixed\n").unwrap();
        assert_eq!(c.max_regions, 99);
        assert_eq!(c.seed, 7);
        assert!(c.apply_kv("threads=0").is_err());
        assert!(c.apply_kv("colour=blue").is_err());
        assert!(c.apply_kv("max_regions").is_err());
        assert!(c.set("max_regions", "-1").is_err());
    }
}
