//! Congruence claims for `spt2` checked against a table, and a scanner for
//! new ones.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{is_prime, padic_valuation, represent_x2_2y2, ArithError};
use crate::dissect::Status;
use crate::products::{theta_psi, ThetaArg};
use crate::series::CoeffRing;
use crate::spt::Spt2Table;
use crate::ResidueSeries;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("argument {needed} exceeds table bound {n_max}")]
    TableTooSmall { needed: usize, n_max: usize },
    #[error("invalid prime {p}: {reason}")]
    InvalidPrime { p: u64, reason: &'static str },
    #[error("invalid claim: {0}")]
    InvalidClaim(String),
    #[error(
        "family {family}: argument {argument} at j = {j}, n = {n} is not of the form 16u + 10"
    )]
    NonIntegralShift {
        family: String,
        j: u32,
        n: usize,
        argument: usize,
    },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn ensure_covers(table: &Spt2Table, needed: usize) -> Result<(), VerifyError> {
    if needed > table.n_max() {
        return Err(VerifyError::TableTooSmall {
            needed,
            n_max: table.n_max(),
        });
    }
    Ok(())
}

fn residue(table: &Spt2Table, n: usize, m: u64) -> u64 {
    table.residue(n, m).expect("index checked against table bound")
}

/// `(a, b, M)` as it appears in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ClaimId {
    pub a: usize,
    pub b: usize,
    #[serde(rename = "M")]
    pub modulus: u64,
}

/// `spt2(a n + b) = 0 (mod M)` for `0 <= n <= n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CongruenceClaim {
    pub a: usize,
    pub b: usize,
    pub modulus: u64,
    pub n_max: usize,
}

impl CongruenceClaim {
    pub fn new(a: usize, b: usize, modulus: u64, n_max: usize) -> Result<Self, VerifyError> {
        if a == 0 {
            return Err(VerifyError::InvalidClaim("step must be at least 1".into()));
        }
        if modulus < 2 {
            return Err(VerifyError::InvalidClaim("modulus must be at least 2".into()));
        }
        Ok(CongruenceClaim { a, b, modulus, n_max })
    }

    /// Every `n` with `a n + b <= bound`; `None` if even `n = 0` is out.
    pub fn up_to_argument(a: usize, b: usize, modulus: u64, bound: usize) -> Option<Self> {
        (b <= bound).then(|| CongruenceClaim {
            a,
            b,
            modulus,
            n_max: (bound - b) / a,
        })
    }

    pub fn id(&self) -> ClaimId {
        ClaimId {
            a: self.a,
            b: self.b,
            modulus: self.modulus,
        }
    }

    pub fn largest_argument(&self) -> usize {
        self.a * self.n_max + self.b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub n: usize,
    #[serde(rename = "value_mod_M")]
    pub value_mod_m: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimReport {
    pub claim: ClaimId,
    pub status: Status,
    pub witnesses_checked: usize,
    pub violations: Vec<Violation>,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.status.passed()
    }
}

pub fn verify_claim(c: &CongruenceClaim, t: &Spt2Table) -> Result<ClaimReport, VerifyError> {
    ensure_covers(t, c.largest_argument())?;
    let violations: Vec<Violation> = (0..=c.n_max)
        .filter_map(|n| {
            let v = residue(t, c.a * n + c.b, c.modulus);
            (v != 0).then_some(Violation { n, value_mod_m: v })
        })
        .collect();
    Ok(ClaimReport {
        claim: c.id(),
        status: status(violations.is_empty()),
        witnesses_checked: c.n_max + 1,
        violations,
    })
}

/// Congruences known before the families below, each checked for all
/// arguments up to `bound`.
pub fn prior_claims(bound: usize) -> Vec<CongruenceClaim> {
    [(3, 0, 3), (3, 1, 3), (5, 3, 5), (8, 3, 4), (16, 14, 4), (32, 28, 4)]
        .into_iter()
        .filter_map(|(a, b, m)| CongruenceClaim::up_to_argument(a, b, m, bound))
        .collect()
}

/// The six single mod-4 progressions, each for `0 <= n <= n_max`.
pub fn single_progression_claims(n_max: usize) -> Vec<CongruenceClaim> {
    [(36, 30), (48, 34), (64, 56), (72, 42), (80, 34), (80, 66)]
        .into_iter()
        .map(|(a, b)| CongruenceClaim {
            a,
            b,
            modulus: 4,
            n_max,
        })
        .collect()
}

/// `spt2(step 2^j n + offset 2^j) = 0 (mod M)` for `j <= j_max`, `n <= n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyClaim {
    pub name: String,
    pub step: usize,
    pub offset: usize,
    pub j_max: u32,
    pub n_max: usize,
    pub modulus: u64,
}

impl FamilyClaim {
    pub fn argument(&self, j: u32, n: usize) -> usize {
        (self.step * n + self.offset) << j
    }

    pub fn instance(&self, j: u32) -> CongruenceClaim {
        CongruenceClaim {
            a: self.step << j,
            b: self.offset << j,
            modulus: self.modulus,
            n_max: self.n_max,
        }
    }

    pub fn largest_argument(&self) -> usize {
        self.argument(self.j_max, self.n_max)
    }
}

/// The six mod-4 families indexed by `j`.
pub fn doubling_families(j_max: u32, n_max: usize) -> Vec<FamilyClaim> {
    [(16, 14), (36, 30), (48, 34), (72, 42), (80, 34), (80, 66)]
        .into_iter()
        .map(|(step, offset)| FamilyClaim {
            name: format!("2^j({step}n+{offset})"),
            step,
            offset,
            j_max,
            n_max,
            modulus: 4,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyCell {
    pub j: u32,
    pub n: usize,
    pub argument: usize,
    #[serde(rename = "value_mod_M")]
    pub value_mod_m: u64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub family: String,
    #[serde(rename = "M")]
    pub modulus: u64,
    pub status: Status,
    pub cells: Vec<FamilyCell>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.status.passed()
    }
}

pub fn verify_family(f: &FamilyClaim, t: &Spt2Table) -> Result<FamilyReport, VerifyError> {
    ensure_covers(t, f.largest_argument())?;
    let cells: Vec<FamilyCell> = (0..=f.j_max)
        .flat_map(|j| (0..=f.n_max).map(move |n| (j, n)))
        .map(|(j, n)| {
            let argument = f.argument(j, n);
            let v = residue(t, argument, f.modulus);
            FamilyCell {
                j,
                n,
                argument,
                value_mod_m: v,
                status: status(v == 0),
            }
        })
        .collect();
    Ok(FamilyReport {
        family: f.name.clone(),
        modulus: f.modulus,
        status: status(cells.iter().all(|c| c.status.passed())),
        cells,
    })
}

/// `spt2(32 p^(2k+1) m + 24 p^(2k+2)) = 0 (mod 4)` for `k <= k_max`,
/// `1 <= m <= m_max` with `p` not dividing `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeFamilyClaim {
    p: u64,
    pub k_max: u32,
    pub m_max: u64,
}

impl PrimeFamilyClaim {
    pub const MODULUS: u64 = 4;

    pub fn new(p: u64, k_max: u32, m_max: u64) -> Result<Self, VerifyError> {
        if !is_prime(p) {
            return Err(VerifyError::InvalidPrime {
                p,
                reason: "p must be prime",
            });
        }
        if !matches!(p % 8, 5 | 7) {
            return Err(VerifyError::InvalidPrime {
                p,
                reason: "p must be ≡ 5 or 7 (mod 8)",
            });
        }
        Ok(PrimeFamilyClaim { p, k_max, m_max })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `None` on overflow.
    pub fn argument(&self, k: u32, m: u64) -> Option<u64> {
        let odd = self.p.checked_pow(2 * k + 1)?;
        let even = odd.checked_mul(self.p)?;
        32u64
            .checked_mul(odd)?
            .checked_mul(m)?
            .checked_add(24u64.checked_mul(even)?)
    }

    /// `(k, m)` pairs covered by the claim.
    pub fn instances(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        (0..=self.k_max).flat_map(move |k| {
            (1..=self.m_max)
                .filter(move |m| m % self.p != 0)
                .map(move |m| (k, m))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeInstance {
    pub k: u32,
    pub m: u64,
    pub argument: u64,
    /// `(argument - 24) / 32`
    pub n_prime: u64,
    /// `4 n' + 3`
    pub form_value: u64,
    #[serde(rename = "value_mod_M")]
    pub value_mod_m: u64,
    /// Whether `4n' + 3 = x^2 + 2y^2` has a solution.
    pub representable: bool,
    /// `p`-adic valuation of `4n' + 3`.
    pub valuation: u32,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeFamilyReport {
    pub p: u64,
    pub k_max: u32,
    pub m_max: u64,
    pub status: Status,
    pub instances: Vec<PrimeInstance>,
}

impl PrimeFamilyReport {
    pub fn passed(&self) -> bool {
        self.status.passed()
    }
}

/// Checks every instance mod 4 and, alongside, that `4n' + 3` is not of
/// the form `x^2 + 2y^2` and has odd `p`-adic valuation.
pub fn verify_prime_family(
    f: &PrimeFamilyClaim,
    t: &Spt2Table,
) -> Result<PrimeFamilyReport, VerifyError> {
    let mut instances = Vec::new();
    for (k, m) in f.instances() {
        let argument = f.argument(k, m).ok_or(VerifyError::TableTooSmall {
            needed: usize::MAX,
            n_max: t.n_max(),
        })?;
        let index = usize::try_from(argument).unwrap_or(usize::MAX);
        ensure_covers(t, index)?;
        let n_prime = (argument - 24) / 32;
        let form_value = 4 * n_prime + 3;
        let value = residue(t, index, PrimeFamilyClaim::MODULUS);
        let representable = represent_x2_2y2(form_value).is_representable();
        let valuation = padic_valuation(&form_value, f.p)?;
        let ok = value == 0 && !representable && valuation % 2 == 1;
        instances.push(PrimeInstance {
            k,
            m,
            argument,
            n_prime,
            form_value,
            value_mod_m: value,
            representable,
            valuation,
            status: status(ok),
        });
    }
    Ok(PrimeFamilyReport {
        p: f.p,
        k_max: f.k_max,
        m_max: f.m_max,
        status: status(instances.iter().all(|i| i.status.passed())),
        instances,
    })
}

/// Default evidence threshold for [`scan`]; a heuristic against
/// coincidences, not a proof.
pub const DEFAULT_MIN_WITNESSES: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanHit {
    pub claim: ClaimId,
    pub witnesses_checked: usize,
    /// A reported progression with a smaller step that contains this one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsumed_by: Option<ClaimId>,
}

impl ScanHit {
    pub fn to_claim(&self) -> CongruenceClaim {
        CongruenceClaim {
            a: self.claim.a,
            b: self.claim.b,
            modulus: self.claim.modulus,
            n_max: self.witnesses_checked - 1,
        }
    }
}

/// Every progression `(a, b)` with `a <= a_max`, `b < a`, at least
/// `n_min` table entries, and `spt2(a n + b) = 0 (mod M)` for all of them.
/// Sorted by `(a, b)`.
pub fn scan(
    modulus: u64,
    a_max: usize,
    n_min: usize,
    t: &Spt2Table,
) -> Result<Vec<ScanHit>, VerifyError> {
    if modulus < 2 {
        return Err(VerifyError::InvalidClaim("modulus must be at least 2".into()));
    }
    ensure_covers(t, a_max.saturating_mul(n_min))?;
    let n_max = t.n_max();
    let residues: Vec<u64> = (0..=n_max).map(|n| residue(t, n, modulus)).collect();
    let mut hits: Vec<(usize, usize, usize)> = (1..=a_max)
        .into_par_iter()
        .flat_map_iter(|a| (0..a.min(n_max + 1)).map(move |b| (a, b)))
        .filter_map(|(a, b)| {
            let witnesses = (n_max - b) / a + 1;
            let holds = residues[b..].iter().step_by(a).all(|&v| v == 0);
            (witnesses >= n_min && holds).then_some((a, b, witnesses))
        })
        .collect();
    hits.sort_unstable();

    let found: HashSet<(usize, usize)> = hits.iter().map(|&(a, b, _)| (a, b)).collect();
    let id = |a, b| ClaimId { a, b, modulus };
    Ok(hits
        .into_iter()
        .map(|(a, b, witnesses)| ScanHit {
            claim: id(a, b),
            witnesses_checked: witnesses,
            subsumed_by: (1..a)
                .filter(|d| a % d == 0)
                .find(|&d| found.contains(&(d, b % d)))
                .map(|d| id(d, b % d)),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InductionCell {
    pub n: usize,
    pub argument: usize,
    pub u: usize,
    pub lower_argument: usize,
    pub lhs_mod_m: u64,
    pub rhs_mod_m: u64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InductionReport {
    pub family: String,
    pub j: u32,
    pub status: Status,
    pub cells: Vec<InductionCell>,
}

/// Replays the step from `j` to `j + 1` through
/// `spt2(16u + 10) = spt2(8u + 5) (mod 4)`: writes each `(j+1)`-argument
/// `A` as `16u + 10`, checks both legs, and checks `8u + 5` is the
/// `j`-argument.
pub fn verify_induction_step(
    f: &FamilyClaim,
    j: u32,
    t: &Spt2Table,
) -> Result<InductionReport, VerifyError> {
    ensure_covers(t, f.argument(j + 1, f.n_max))?;
    let mut cells = Vec::new();
    for n in 0..=f.n_max {
        let argument = f.argument(j + 1, n);
        if argument < 10 || (argument - 10) % 16 != 0 {
            return Err(VerifyError::NonIntegralShift {
                family: f.name.clone(),
                j,
                n,
                argument,
            });
        }
        let u = (argument - 10) / 16;
        let lower_argument = 8 * u + 5;
        let lhs = residue(t, argument, f.modulus);
        let rhs = residue(t, lower_argument, f.modulus);
        let ok = lhs == rhs && rhs == 0 && lower_argument == f.argument(j, n);
        cells.push(InductionCell {
            n,
            argument,
            u,
            lower_argument,
            lhs_mod_m: lhs,
            rhs_mod_m: rhs,
            status: status(ok),
        });
    }
    Ok(InductionReport {
        family: f.name.clone(),
        j,
        status: status(cells.iter().all(|c| c.status.passed())),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DoublingCell {
    pub n: usize,
    pub argument: usize,
    pub doubled: usize,
    #[serde(rename = "value_mod_M")]
    pub value_mod_m: u64,
    #[serde(rename = "doubled_mod_M")]
    pub doubled_mod_m: u64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DoublingReport {
    pub family: String,
    pub j: u32,
    pub status: Status,
    pub cells: Vec<DoublingCell>,
}

/// Checks `spt2(2x) = spt2(x) (mod M)` where `x` runs over the family's
/// `j`-arguments, so that `2x` is the `(j+1)`-argument.
pub fn verify_doubling_step(
    f: &FamilyClaim,
    j: u32,
    t: &Spt2Table,
) -> Result<DoublingReport, VerifyError> {
    ensure_covers(t, f.argument(j + 1, f.n_max))?;
    let cells: Vec<DoublingCell> = (0..=f.n_max)
        .map(|n| {
            let argument = f.argument(j, n);
            let doubled = f.argument(j + 1, n);
            let v = residue(t, argument, f.modulus);
            let w = residue(t, doubled, f.modulus);
            DoublingCell {
                n,
                argument,
                doubled,
                value_mod_m: v,
                doubled_mod_m: w,
                status: status(doubled == 2 * argument && v == w),
            }
        })
        .collect();
    Ok(DoublingReport {
        family: f.name.clone(),
        j,
        status: status(cells.iter().all(|c| c.status.passed())),
        cells,
    })
}

/// First exponent `e < order` with `e = 2 or 4 (mod 5)` where
/// `2 psi(q) - psi(-q)` is nonzero mod 4, if any.
pub fn triangular_residue_violation(order: usize) -> Option<usize> {
    let ring = CoeffRing::modulo(4);
    let plus: ResidueSeries = theta_psi(ThetaArg::Plus, ring, order);
    let minus: ResidueSeries = theta_psi(ThetaArg::Minus, ring, order);
    let s = plus.scale_i64(2).sub(&minus).expect("same ring and order");
    s.coeffs()
        .iter()
        .enumerate()
        .find(|&(e, &c)| matches!(e % 5, 2 | 4) && c != 0)
        .map(|(e, _)| e)
}
