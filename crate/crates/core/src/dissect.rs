//! m-dissection of q-series and the identity / congruence checkers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::coeff::Coefficient;
use crate::products::{expand_expr, ProductExpr};
use crate::series::{CoeffRing, Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DissectError {
    #[error("dissection modulus must be at least 1, got {0}")]
    ZeroModulus(usize),
    #[error("residue {r} is not below modulus {m}")]
    ResidueOutOfRange { m: usize, r: usize },
    #[error("expected {expected} parts, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Selects exponents `m*n + r` of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DissectionSpec {
    m: usize,
    r: usize,
}

impl DissectionSpec {
    pub fn new(m: usize, r: usize) -> Result<Self, DissectError> {
        if m == 0 {
            return Err(DissectError::ZeroModulus(m));
        }
        if r >= m {
            return Err(DissectError::ResidueOutOfRange { m, r });
        }
        Ok(DissectionSpec { m, r })
    }

    pub fn m(self) -> usize {
        self.m
    }

    pub fn r(self) -> usize {
        self.r
    }
}

impl fmt::Display for DissectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dissect {} {}", self.m, self.r)
    }
}

/// `sum c_n q^n  ->  sum c_{m n + r} q^n`.
///
/// The result has order `ceil((N - r) / m)`, which is zero when `r >= N`.
pub fn dissect<C: Coefficient>(a: &Series<C>, spec: DissectionSpec) -> Series<C> {
    let coeffs: Vec<C> = a
        .coeffs()
        .iter()
        .skip(spec.r)
        .step_by(spec.m)
        .cloned()
        .collect();
    Series::from_coeffs(a.ring(), coeffs)
}

/// Inverse of dissecting at every residue: `sum_r q^r parts[r](q^m)`.
///
/// The order is the first exponent that some part cannot supply.
pub fn reassemble<C: Coefficient>(parts: &[Series<C>], m: usize) -> Result<Series<C>, DissectError> {
    if m == 0 {
        return Err(DissectError::ZeroModulus(m));
    }
    if parts.len() != m {
        return Err(DissectError::LengthMismatch {
            expected: m,
            got: parts.len(),
        });
    }
    let ring = parts[0].ring();
    if let Some(p) = parts.iter().find(|p| p.ring() != ring) {
        return Err(SeriesError::RingMismatch {
            left: ring.modulus(),
            right: p.ring().modulus(),
        }
        .into());
    }
    let order = parts
        .iter()
        .enumerate()
        .map(|(r, p)| p.order() * m + r)
        .min()
        .unwrap_or(0);
    let coeffs = (0..order)
        .map(|e| parts[e % m].coeffs()[e / m].clone())
        .collect();
    Ok(Series::from_coeffs(ring, coeffs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn passed(self) -> bool {
        self == Status::Pass
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        })
    }
}

/// Result of comparing two series coefficientwise.
///
/// Coefficients are rendered as decimal strings since exact values can
/// exceed any fixed-width integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_bad_exponent: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs_coeff: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs_coeff: Option<String>,
    pub coefficients_compared: usize,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.status.passed()
    }
}

fn compare<C: Coefficient, D: Coefficient>(
    lhs: &Series<C>,
    rhs: &Series<D>,
    modulus: u64,
) -> CheckOutcome {
    let n = lhs.order().min(rhs.order());
    let m = BigInt::from(modulus);
    let norm = |x: BigInt| if modulus == 0 { x } else { x.mod_floor(&m) };
    for e in 0..n {
        let a = norm(lhs.coeffs()[e].to_bigint());
        let b = norm(rhs.coeffs()[e].to_bigint());
        if a != b {
            return CheckOutcome {
                status: Status::Fail,
                first_bad_exponent: Some(e),
                lhs_coeff: Some(a.to_string()),
                rhs_coeff: Some(b.to_string()),
                coefficients_compared: e + 1,
            };
        }
    }
    CheckOutcome {
        status: Status::Pass,
        first_bad_exponent: None,
        lhs_coeff: None,
        rhs_coeff: None,
        coefficients_compared: n,
    }
}

/// Passes iff every common coefficient agrees modulo `modulus`
/// (`0` = exact equality). Compares over the smaller of the two orders.
pub fn check_series_congruence<C: Coefficient, D: Coefficient>(
    lhs: &Series<C>,
    rhs: &Series<D>,
    modulus: u64,
) -> CheckOutcome {
    compare(lhs, rhs, modulus)
}

/// An eta-quotient identity, exact (`modulus == 0`) or modulo `modulus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityClaim {
    pub name: String,
    pub lhs: ProductExpr,
    pub rhs: ProductExpr,
    pub modulus: u64,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    #[serde(flatten)]
    pub outcome: CheckOutcome,
}

pub fn check_identity(claim: &IdentityClaim) -> Result<IdentityReport, SeriesError> {
    let ring = CoeffRing::new(claim.modulus)?;
    let outcome = if ring.is_exact() {
        let l: Series<BigInt> = expand_expr(&claim.lhs, ring, claim.order)?;
        let r: Series<BigInt> = expand_expr(&claim.rhs, ring, claim.order)?;
        compare(&l, &r, 0)
    } else {
        let l: Series<u64> = expand_expr(&claim.lhs, ring, claim.order)?;
        let r: Series<u64> = expand_expr(&claim.rhs, ring, claim.order)?;
        compare(&l, &r, claim.modulus)
    };
    Ok(IdentityReport {
        name: claim.name.clone(),
        outcome,
    })
}
