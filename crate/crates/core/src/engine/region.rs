use std::ops::ControlFlow;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{reduce, PrimeTuple};
use crate::config::Config;
use crate::error::{Error, Result};

use super::{residue_profile, CoeffEvaluator, Grid, OrientationSet, ResidueProfile};

/// A cell of the partition of residue space by the sorted boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Region {
    /// Interval index per dimension.
    pub index: Vec<usize>,
    /// Subsets defining the lower end of each interval.
    pub lower: Vec<Vec<u32>>,
    /// Subsets defining the upper end; empty when the interval runs up to `p_j`.
    pub upper: Vec<Vec<u32>>,
}

impl Region {
    /// Digits of the index, e.g. `211`.
    pub fn label(&self) -> String {
        self.index.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub height: u64,
    pub witness: BigUint,
    pub witness_coefficient: i64,
    pub witness_region: Vec<usize>,
    pub regions: u64,
    /// Cells attaining the height.
    pub maximal_cells: u64,
}

/// Region model of one tuple with `deg P_N < N`.
///
/// Boundaries are the distinct residues per dimension, so the cells refine
/// the relative-order classes even when two subsets share a residue. Ties
/// only matter to the combinatorial labels, which is why lookup and
/// representatives insist on a generic profile while scans do not.
#[derive(Debug, Clone)]
pub struct RegionMap {
    tuple: PrimeTuple,
    profile: ResidueProfile,
    evaluator: CoeffEvaluator,
    grid: Grid,
    /// `[j][x]` = `boundary_j(x) · N_j mod N`.
    corners: Vec<Vec<BigUint>>,
}

impl RegionMap {
    pub fn new(t: &PrimeTuple) -> Result<Self> {
        let profile = residue_profile(t)?;
        if !profile.deg_lt_n {
            return Err(Error::unsupported(format!(
                "deg P_N >= N for {t}; regions describe the reduced polynomial only, use coeff_at"
            )));
        }
        let evaluator = CoeffEvaluator::new(t, &OrientationSet::default_for(t.len()))?;
        let boundaries = profile.boundaries();
        let grid = evaluator.grid(&boundaries);
        let corners = boundaries
            .iter()
            .enumerate()
            .map(|(j, bs)| bs.iter().map(|b| b * t.cofactor(j) % t.product()).collect())
            .collect();
        Ok(RegionMap {
            tuple: t.clone(),
            profile,
            evaluator,
            grid,
            corners,
        })
    }

    pub fn tuple(&self) -> &PrimeTuple {
        &self.tuple
    }

    pub fn profile(&self) -> &ResidueProfile {
        &self.profile
    }

    pub fn is_generic(&self) -> bool {
        self.profile.generic
    }

    pub fn shape(&self) -> Vec<usize> {
        self.profile.dims.iter().map(|d| d.boundaries.len()).collect()
    }

    pub fn region_count(&self) -> u128 {
        self.shape().iter().map(|&b| b as u128).product()
    }

    fn require_generic(&self) -> Result<()> {
        if self.profile.generic {
            Ok(())
        } else {
            Err(Error::unsupported(format!(
                "{} is not generic; use coeff_at for pointwise values",
                self.tuple
            )))
        }
    }

    fn check_index(&self, index: &[usize]) -> Result<()> {
        let shape = self.shape();
        if index.len() != shape.len() || index.iter().zip(&shape).any(|(x, b)| x >= b) {
            return Err(Error::invalid(format!("region index {index:?} outside shape {shape:?}")));
        }
        Ok(())
    }

    pub fn region(&self, index: &[usize]) -> Result<Region> {
        self.check_index(index)?;
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for (d, &x) in self.profile.dims.iter().zip(index) {
            lower.push(d.labels[x].clone());
            upper.push(d.labels.get(x + 1).cloned().unwrap_or_default());
        }
        Ok(Region {
            index: index.to_vec(),
            lower,
            upper,
        })
    }

    /// Cell containing `h(k)`; any integer `k` is accepted and read modulo `N`.
    pub fn region_of(&self, k: &BigInt) -> Region {
        let h = self.evaluator.residues(k);
        let index: Vec<usize> = h
            .iter()
            .zip(&self.profile.dims)
            .map(|(hj, d)| d.boundaries.partition_point(|b| b <= hj) - 1)
            .collect();
        self.region(&index).expect("index from partition")
    }

    /// Coefficient on a cell, evaluated at its lower corner.
    pub fn value(&self, index: &[usize]) -> Result<i64> {
        self.check_index(index)?;
        Ok(self.grid.eval(index))
    }

    /// The `i`-th summand of the formula on a cell.
    pub fn term(&self, i: usize, index: &[usize]) -> Result<i64> {
        self.check_index(index)?;
        Ok(self.grid.term(i, index))
    }

    /// Exponent in `[0, N)` whose residues are the lower corner of the cell.
    pub fn corner(&self, index: &[usize]) -> Result<BigUint> {
        self.check_index(index)?;
        Ok(self.corner_unchecked(index))
    }

    fn corner_unchecked(&self, index: &[usize]) -> BigUint {
        let mut k = BigUint::zero();
        for (j, &x) in index.iter().enumerate() {
            k += &self.corners[j][x];
        }
        k % self.tuple.product()
    }

    pub fn representative(&self, r: &Region) -> Result<BigUint> {
        self.require_generic()?;
        self.corner(&r.index)
    }

    /// Coefficient of `x^k` by locating the cell; requires a generic profile.
    pub fn lookup(&self, k: &BigInt) -> Result<(i64, Region)> {
        self.require_generic()?;
        let n = BigInt::from(self.tuple.product().clone());
        if k.is_negative() || k >= &n {
            return Err(Error::invalid(format!("exponent {k} outside [0, {n})")));
        }
        let r = self.region_of(k);
        Ok((self.grid.eval(&r.index), r))
    }

    /// Calls `f` on every cell in lexicographic order of the index.
    pub fn for_each_cell<F>(&self, mut f: F)
    where
        F: FnMut(&[usize], i64) -> ControlFlow<()>,
    {
        let shape = self.shape();
        let mut x = vec![0usize; shape.len()];
        loop {
            if f(&x, self.grid.eval(&x)).is_break() {
                return;
            }
            if !advance(&mut x, &shape, 0) {
                return;
            }
        }
    }

    /// Height over all cells. The witness is the smallest lower-corner
    /// exponent among the cells attaining it.
    pub fn scan(&self, cfg: &Config) -> Result<ScanReport> {
        let count = self.region_count();
        if count > cfg.max_regions as u128 {
            return Err(Error::resource(
                format!("region scan of {}", self.tuple),
                format!("{count} regions"),
                cfg.max_regions,
            ));
        }
        let shape = self.shape();
        let chunk = |x0: usize| -> Partial {
            let mut part = Partial::default();
            let mut x = vec![0usize; shape.len()];
            x[0] = x0;
            loop {
                let v = self.grid.eval(&x);
                part.offer(v, &x, || self.corner_unchecked(&x));
                if !advance(&mut x, &shape, 1) {
                    break;
                }
            }
            part
        };
        let parts: Vec<Partial> = if cfg.threads > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| Error::resource("thread pool", e.to_string(), cfg.threads))?;
            pool.install(|| (0..shape[0]).into_par_iter().map(chunk).collect())
        } else {
            (0..shape[0]).map(chunk).collect()
        };
        let mut total = Partial::default();
        for p in parts {
            total.merge(p);
        }
        let best = total.best.expect("at least one cell");
        Ok(ScanReport {
            height: total.height,
            witness: best.0,
            witness_coefficient: best.1,
            witness_region: best.2,
            regions: count as u64,
            maximal_cells: total.cells,
        })
    }
}

/// Odometer step over digits `from..`, most significant first.
fn advance(x: &mut [usize], shape: &[usize], from: usize) -> bool {
    for d in (from..x.len()).rev() {
        x[d] += 1;
        if x[d] < shape[d] {
            return true;
        }
        x[d] = 0;
    }
    false
}

#[derive(Default)]
struct Partial {
    height: u64,
    cells: u64,
    best: Option<(BigUint, i64, Vec<usize>)>,
}

impl Partial {
    fn offer(&mut self, v: i64, x: &[usize], corner: impl FnOnce() -> BigUint) {
        let a = v.unsigned_abs();
        match &self.best {
            Some(_) if a < self.height => {}
            Some(best) if a == self.height => {
                self.cells += 1;
                let k = corner();
                if k < best.0 {
                    self.best = Some((k, v, x.to_vec()));
                }
            }
            _ => {
                self.height = a;
                self.cells = 1;
                self.best = Some((corner(), v, x.to_vec()));
            }
        }
    }

    fn merge(&mut self, other: Partial) {
        let Some(ob) = other.best else { return };
        if self.best.is_none() || other.height > self.height {
            *self = Partial {
                best: Some(ob),
                ..other
            };
            return;
        }
        if other.height == self.height {
            self.cells += other.cells;
            if ob.0 < self.best.as_ref().expect("set").0 {
                self.best = Some(ob);
            }
        }
    }
}

pub fn coeff_region_lookup(t: &PrimeTuple, k: &BigInt) -> Result<(i64, Region)> {
    RegionMap::new(t)?.lookup(k)
}

pub fn region_representative(t: &PrimeTuple, r: &Region) -> Result<BigUint> {
    RegionMap::new(t)?.representative(r)
}

/// Height of `P_N` from one evaluation per cell.
pub fn region_scan_height(t: &PrimeTuple, cfg: &Config) -> Result<ScanReport> {
    RegionMap::new(t)?.scan(cfg)
}

/// Sufficient test for a vanishing coefficient: for `0 < k < N_i`, if
/// `h_i(k)` is not among the residues of dimension `i` then `a_N(k) = 0`.
pub fn zero_by_prop(t: &PrimeTuple, k: &BigInt, i: usize) -> Result<bool> {
    if i >= t.len() {
        return Err(Error::invalid(format!("dimension {i} outside tuple of {}", t.len())));
    }
    let ni = BigInt::from(t.cofactor(i).clone());
    if !k.is_positive() || k >= &ni {
        return Err(Error::invalid(format!("exponent {k} outside (0, {ni})")));
    }
    let prof = residue_profile(t)?;
    if !prof.deg_lt_n {
        return Err(Error::invalid(format!("deg P_N >= N for {t}")));
    }
    let p = t.prime(i);
    let inv = crate::arith::inv_residue(t.cofactor(i), p)?;
    let h = reduce(k, p) * inv % p;
    Ok(prof.dims[i].boundaries.binary_search(&h).is_err())
}
