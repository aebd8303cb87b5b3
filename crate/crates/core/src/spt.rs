//! Overpartitions and the smallest-parts function `spt2`.
//!
//! `spt2(n)` counts the smallest parts over all overpartitions of `n` whose
//! smallest part is even and not overlined. Two independent routes compute
//! it:
//!
//! * [`spt2_enum`] walks every overpartition of `n` (small `n` only);
//! * [`spt2_series`] uses the generating function
//!   `sum_{s even} q^s / (1 - q^s)^2 * prod_{j > s} (1 + q^j) / (1 - q^j)`,
//!   where `q^s/(1-q^s)^2 = sum_k k q^{sk}` weights `k` copies of the
//!   smallest part `s` and the product is a free overpartition into parts
//!   larger than `s`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::series::CoeffRing;
use crate::IntSeries;

/// Largest `n` the enumeration oracle accepts by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 40;

/// Bumped whenever the generating-function computation changes; part of the
/// table cache key.
pub const GENFUNC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SptError {
    #[error("n = {n} exceeds the enumeration limit {limit}")]
    EnumerationLimit { n: usize, limit: usize },
    #[error("argument {needed} exceeds table bound {n_max}")]
    RangeExceeded { needed: usize, n_max: usize },
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("invalid overpartition: {0}")]
    InvalidOverpartition(String),
}

/// A partition in which the first occurrence of each part may be overlined.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Overpartition {
    /// Parts in non-increasing order.
    parts: Vec<u32>,
    /// Part values that carry an overline.
    overlined: BTreeSet<u32>,
}

impl Overpartition {
    pub fn new(mut parts: Vec<u32>, overlined: BTreeSet<u32>) -> Result<Self, SptError> {
        if parts.contains(&0) {
            return Err(SptError::InvalidOverpartition("parts must be positive".into()));
        }
        if let Some(v) = overlined.iter().find(|v| !parts.contains(v)) {
            return Err(SptError::InvalidOverpartition(format!(
                "overlined value {v} is not a part"
            )));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Overpartition { parts, overlined })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn overlined(&self) -> &BTreeSet<u32> {
        &self.overlined
    }

    pub fn total(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    pub fn smallest_part(&self) -> Option<u32> {
        self.parts.last().copied()
    }

    /// This overpartition's contribution to `spt2`: the multiplicity of the
    /// smallest part when it is even and not overlined, else zero.
    pub fn spt2_weight(&self) -> u64 {
        match self.smallest_part() {
            Some(s) if s % 2 == 0 && !self.overlined.contains(&s) => {
                self.parts.iter().filter(|&&p| p == s).count() as u64
            }
            _ => 0,
        }
    }
}

impl fmt::Display for Overpartition {
    /// Overlined parts are written with a combining overline, e.g. `3̄+1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "()");
        }
        let mut prev = None;
        for (i, &p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            let first = prev != Some(p);
            if first && self.overlined.contains(&p) {
                write!(f, "{p}\u{305}")?;
            } else {
                write!(f, "{p}")?;
            }
            prev = Some(p);
        }
        Ok(())
    }
}

/// Distinct part values with multiplicities, largest first.
type Blocks = Vec<(u32, u32)>;

/// Calls `visit(blocks)` once per partition of `n` (not overpartition).
fn for_each_partition(n: u32, visit: &mut dyn FnMut(&Blocks)) {
    fn go(rest: u32, max_part: u32, blocks: &mut Blocks, visit: &mut dyn FnMut(&Blocks)) {
        if rest == 0 {
            visit(blocks);
            return;
        }
        for part in (1..=max_part.min(rest)).rev() {
            for mult in 1..=rest / part {
                blocks.push((part, mult));
                go(rest - part * mult, part - 1, blocks, visit);
                blocks.pop();
            }
        }
    }
    go(n, n, &mut Vec::new(), visit);
}

/// Calls `visit(blocks, mask)` once per overpartition of `n`; bit `i` of
/// `mask` marks `blocks[i]` as overlined.
fn for_each_overpartition(n: u32, mut visit: impl FnMut(&Blocks, u64)) {
    for_each_partition(n, &mut |blocks| {
        for mask in 0..(1u64 << blocks.len()) {
            visit(blocks, mask);
        }
    });
}

fn check_limit(n: usize, limit: usize) -> Result<(), SptError> {
    if n > limit {
        return Err(SptError::EnumerationLimit { n, limit });
    }
    Ok(())
}

/// All overpartitions of `n`, each exactly once.
pub fn enumerate_overpartitions(n: usize) -> Result<Vec<Overpartition>, SptError> {
    enumerate_overpartitions_with_limit(n, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_overpartitions_with_limit(
    n: usize,
    limit: usize,
) -> Result<Vec<Overpartition>, SptError> {
    check_limit(n, limit)?;
    let mut out = Vec::new();
    for_each_overpartition(n as u32, |blocks, mask| {
        let parts = blocks
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat(v).take(m as usize))
            .collect();
        let overlined = blocks
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &(v, _))| v)
            .collect();
        out.push(Overpartition { parts, overlined });
    });
    Ok(out)
}

/// `spt2(n)` by walking every overpartition of `n`.
pub fn spt2_enum(n: usize) -> Result<u64, SptError> {
    spt2_enum_with_limit(n, DEFAULT_ENUMERATION_LIMIT)
}

pub fn spt2_enum_with_limit(n: usize, limit: usize) -> Result<u64, SptError> {
    check_limit(n, limit)?;
    let mut total = 0u64;
    for_each_overpartition(n as u32, |blocks, mask| {
        // The smallest part is the last block.
        if let Some(&(s, mult)) = blocks.last() {
            let overlined = mask >> (blocks.len() - 1) & 1 == 1;
            if s % 2 == 0 && !overlined {
                total += mult as u64;
            }
        }
    });
    Ok(total)
}

/// Number of overpartitions of `n`, by walking them.
pub fn count_overpartitions(n: usize) -> Result<u64, SptError> {
    check_limit(n, DEFAULT_ENUMERATION_LIMIT)?;
    let mut count = 0u64;
    for_each_overpartition(n as u32, |_, _| count += 1);
    Ok(count)
}

/// `sum_n spt2(n) q^n` to the given order via the generating function.
pub fn spt2_series(order: usize) -> IntSeries {
    let n = order;
    // prod_{j > s} (1 + q^j)/(1 - q^j), starting from s = n - 1 where it is 1.
    let mut free = vec![BigInt::zero(); n];
    let mut total = vec![BigInt::zero(); n];
    let mut scratch = vec![BigInt::zero(); n];
    if n > 0 {
        free[0] = BigInt::from(1);
    }
    for s in (2..n).rev() {
        if s % 2 == 0 {
            // scratch = q^s * free, then divide twice by (1 - q^s).
            for e in s..n {
                scratch[e].clone_from(&free[e - s]);
            }
            for _ in 0..2 {
                for e in 2 * s..n {
                    let (lo, hi) = scratch.split_at_mut(e);
                    hi[0] += &lo[e - s];
                }
            }
            for e in s..n {
                total[e] += &scratch[e];
            }
        }
        // Fold in part size s.
        for e in (s..n).rev() {
            let (lo, hi) = free.split_at_mut(e);
            hi[0] += &lo[e - s];
        }
        for e in s..n {
            let (lo, hi) = free.split_at_mut(e);
            hi[0] += &lo[e - s];
        }
    }
    IntSeries::from_coeffs(CoeffRing::INTEGERS, total)
}

/// Which computation produced a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Oracle {
    Enumeration,
    Genfunc,
}

/// Exact values `spt2(0..=N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spt2Table {
    values: Vec<BigInt>,
    oracle: Oracle,
}

impl Spt2Table {
    pub fn from_values(values: Vec<BigInt>, oracle: Oracle) -> Result<Self, SptError> {
        if values.is_empty() {
            return Err(SptError::InvalidTable("no values".into()));
        }
        if !values[0].is_zero() {
            return Err(SptError::InvalidTable("spt2(0) must be 0".into()));
        }
        if let Some(i) = values.iter().position(|v| v.is_negative()) {
            return Err(SptError::InvalidTable(format!("negative value at n = {i}")));
        }
        Ok(Spt2Table { values, oracle })
    }

    /// Table to `n_max` from the generating function.
    pub fn by_genfunc(n_max: usize) -> Self {
        let values = spt2_series(n_max + 1).into_coeffs();
        Spt2Table {
            values,
            oracle: Oracle::Genfunc,
        }
    }

    /// Table to `n_max` by enumeration; values are computed in parallel.
    pub fn by_enumeration(n_max: usize) -> Result<Self, SptError> {
        check_limit(n_max, DEFAULT_ENUMERATION_LIMIT)?;
        let values = (0..=n_max)
            .into_par_iter()
            .map(|n| spt2_enum(n).map(BigInt::from))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Spt2Table {
            values,
            oracle: Oracle::Enumeration,
        })
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn oracle(&self) -> Oracle {
        self.oracle
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Result<&BigInt, SptError> {
        self.values.get(n).ok_or(SptError::RangeExceeded {
            needed: n,
            n_max: self.n_max(),
        })
    }

    /// `spt2(n) mod m` as an integer in `[0, m)`.
    pub fn residue(&self, n: usize, m: u64) -> Result<u64, SptError> {
        use num_integer::Integer;
        use num_traits::ToPrimitive;
        Ok(self
            .get(n)?
            .mod_floor(&BigInt::from(m))
            .to_u64()
            .expect("residue fits in u64"))
    }

    /// The first `n_max + 1` values of a larger table.
    pub fn truncated(&self, n_max: usize) -> Result<Self, SptError> {
        self.get(n_max)?;
        Ok(Spt2Table {
            values: self.values[..=n_max].to_vec(),
            oracle: self.oracle,
        })
    }
}

/// `sum_n spt2(a n + b) q^n` to the given order.
pub fn progression_series(
    table: &Spt2Table,
    a: usize,
    b: usize,
    order: usize,
) -> Result<IntSeries, SptError> {
    if order > 0 {
        let needed = a * (order - 1) + b;
        if needed > table.n_max() {
            return Err(SptError::RangeExceeded {
                needed,
                n_max: table.n_max(),
            });
        }
    }
    let values: Vec<BigInt> = (0..order)
        .map(|n| table.values[a * n + b].clone())
        .collect();
    Ok(IntSeries::from_coeffs(CoeffRing::INTEGERS, values))
}
