//! Truncated formal power series in one variable `q`.
//!
//! A [`Series`] of order `N` records the coefficients of `q^0 .. q^(N-1)`
//! exactly; everything from `q^N` on is unknown. Binary operations truncate
//! to the smaller order of their inputs and never extrapolate.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::coeff::{self, Coefficient};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("ring mismatch: modulus {left} vs {right}")]
    RingMismatch { left: u64, right: u64 },
    #[error("constant term {0} is not a unit of the coefficient ring")]
    NonUnitConstant(String),
    #[error("cannot reduce from modulus {from} to modulus {to}")]
    IncompatibleModulus { from: u64, to: u64 },
    #[error("exponent {exponent} is outside the truncation range (order {order})")]
    OutOfRange { exponent: usize, order: usize },
    #[error("invalid modulus {0}: expected 0 (exact) or at least 2")]
    InvalidModulus(u64),
    #[error("substitution power must be at least 1")]
    ZeroPower,
}

/// Coefficient ring of a series: exact integers (`modulus == 0`) or `Z/MZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CoeffRing {
    modulus: u64,
}

impl CoeffRing {
    pub const INTEGERS: CoeffRing = CoeffRing { modulus: 0 };

    pub fn new(modulus: u64) -> Result<Self, SeriesError> {
        if modulus == 1 {
            return Err(SeriesError::InvalidModulus(modulus));
        }
        Ok(CoeffRing { modulus })
    }

    /// `Z/MZ`; panics if `modulus < 2`.
    pub fn modulo(modulus: u64) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        CoeffRing { modulus }
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_exact(self) -> bool {
        self.modulus == 0
    }
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.modulus == 0 {
            write!(f, "Z")
        } else {
            write!(f, "Z/{}Z", self.modulus)
        }
    }
}

/// Truncated power series `c_0 + c_1 q + ... + c_{N-1} q^{N-1} + O(q^N)`.
#[derive(Clone, PartialEq)]
pub struct Series<C> {
    ring: CoeffRing,
    coeffs: Vec<C>,
}

impl<C: Coefficient> Series<C> {
    fn check_ring(ring: CoeffRing) {
        assert!(
            coeff::supports::<C>(ring.modulus),
            "coefficient type cannot represent ring {ring}"
        );
    }

    /// Builds a series from raw coefficients, reducing them into the ring.
    pub fn from_coeffs(ring: CoeffRing, coeffs: Vec<C>) -> Self {
        Self::check_ring(ring);
        let m = ring.modulus;
        let coeffs = if m == 0 {
            coeffs
        } else {
            coeffs
                .into_iter()
                .map(|c| C::from_bigint(&c.to_bigint(), m))
                .collect()
        };
        Series { ring, coeffs }
    }

    pub fn from_i64s(ring: CoeffRing, values: &[i64]) -> Self {
        Self::check_ring(ring);
        let coeffs = values
            .iter()
            .map(|&v| C::from_i64(v, ring.modulus))
            .collect();
        Series { ring, coeffs }
    }

    pub fn from_bigints(ring: CoeffRing, values: &[BigInt]) -> Self {
        Self::check_ring(ring);
        let coeffs = values
            .iter()
            .map(|v| C::from_bigint(v, ring.modulus))
            .collect();
        Series { ring, coeffs }
    }

    pub fn zero(ring: CoeffRing, order: usize) -> Self {
        Self::check_ring(ring);
        Series {
            ring,
            coeffs: vec![C::zero(); order],
        }
    }

    pub fn one(ring: CoeffRing, order: usize) -> Self {
        Self::monomial(ring, order, 0, 1)
    }

    /// `coeff * q^exponent`, truncated to `order`.
    pub fn monomial(ring: CoeffRing, order: usize, exponent: usize, coeff: i64) -> Self {
        let mut s = Self::zero(ring, order);
        if exponent < order {
            s.coeffs[exponent] = C::from_i64(coeff, ring.modulus);
        }
        s
    }

    /// Sparse constructor: sets the listed `(exponent, value)` pairs, adding
    /// repeated exponents together. Exponents at or past `order` are dropped.
    pub fn from_sparse(
        ring: CoeffRing,
        order: usize,
        terms: impl IntoIterator<Item = (usize, i64)>,
    ) -> Self {
        let mut s = Self::zero(ring, order);
        for (e, v) in terms {
            if e < order {
                s.coeffs[e].add_assign_mod(&C::from_i64(v, ring.modulus), ring.modulus);
            }
        }
        s
    }

    pub fn ring(&self) -> CoeffRing {
        self.ring
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn coefficient(&self, exponent: usize) -> Result<&C, SeriesError> {
        self.coeffs.get(exponent).ok_or(SeriesError::OutOfRange {
            exponent,
            order: self.order(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn same_ring(&self, other: &Self) -> Result<(), SeriesError> {
        if self.ring != other.ring {
            return Err(SeriesError::RingMismatch {
                left: self.ring.modulus,
                right: other.ring.modulus,
            });
        }
        Ok(())
    }

    pub fn truncate(&self, order: usize) -> Self {
        Series {
            ring: self.ring,
            coeffs: self.coeffs[..order.min(self.order())].to_vec(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_ring(other)?;
        let m = self.ring.modulus;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| {
                let mut c = a.clone();
                c.add_assign_mod(b, m);
                c
            })
            .collect();
        Ok(Series {
            ring: self.ring,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_ring(other)?;
        let m = self.ring.modulus;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| {
                let mut c = a.clone();
                c.sub_assign_mod(b, m);
                c
            })
            .collect();
        Ok(Series {
            ring: self.ring,
            coeffs,
        })
    }

    pub fn neg(&self) -> Self {
        let m = self.ring.modulus;
        Series {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|c| c.neg_mod(m)).collect(),
        }
    }

    pub fn scale(&self, factor: &C) -> Self {
        let m = self.ring.modulus;
        Series {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|c| c.mul_mod(factor, m)).collect(),
        }
    }

    pub fn scale_i64(&self, factor: i64) -> Self {
        self.scale(&C::from_i64(factor, self.ring.modulus))
    }

    /// Truncated Cauchy product (schoolbook).
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_ring(other)?;
        let order = self.order().min(other.order());
        // Iterate over the sparser operand in the outer loop.
        let nnz = |s: &Self| s.coeffs[..order].iter().filter(|c| !c.is_zero()).count();
        let (a, b) = if nnz(self) <= nnz(other) {
            (self, other)
        } else {
            (other, self)
        };
        Ok(Series {
            ring: self.ring,
            coeffs: C::convolve(&a.coeffs, &b.coeffs, order, self.ring.modulus),
        })
    }

    /// Multiplicative inverse to the same order.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let m = self.ring.modulus;
        let order = self.order();
        if order == 0 {
            return Ok(self.clone());
        }
        let inv0 = self.coeffs[0]
            .unit_inverse(m)
            .ok_or_else(|| SeriesError::NonUnitConstant(self.coeffs[0].to_string()))?;
        let neg_inv0 = inv0.neg_mod(m);
        let mut out: Vec<C> = Vec::with_capacity(order);
        out.push(inv0);
        let nonzero: Vec<usize> = (1..order).filter(|&k| !self.coeffs[k].is_zero()).collect();
        for n in 1..order {
            let mut acc = C::zero();
            for &k in nonzero.iter().take_while(|&&k| k <= n) {
                acc.add_assign_mod(&self.coeffs[k].mul_mod(&out[n - k], m), m);
            }
            out.push(acc.mul_mod(&neg_inv0, m));
        }
        Ok(Series {
            ring: self.ring,
            coeffs: out,
        })
    }

    /// Integer power; negative exponents go through [`Series::invert`].
    pub fn pow(&self, exponent: i64) -> Result<Self, SeriesError> {
        let base = if exponent < 0 {
            self.invert()?
        } else {
            self.clone()
        };
        let mut e = exponent.unsigned_abs();
        let mut result = Self::one(self.ring, self.order());
        let mut square = base;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&square)?;
            }
            e >>= 1;
            if e > 0 {
                square = square.mul(&square)?;
            }
        }
        Ok(result)
    }

    /// `sum c_n q^n  ->  sum c_n q^(m n)`, keeping the order.
    pub fn substitute_power(&self, m: usize) -> Result<Self, SeriesError> {
        if m == 0 {
            return Err(SeriesError::ZeroPower);
        }
        let order = self.order();
        let mut out = vec![C::zero(); order];
        for (n, c) in self.coeffs.iter().enumerate() {
            let e = n * m;
            if e >= order {
                break;
            }
            out[e] = c.clone();
        }
        Ok(Series {
            ring: self.ring,
            coeffs: out,
        })
    }

    /// Multiplies by `q^s`, keeping the order.
    pub fn shift(&self, s: usize) -> Self {
        let order = self.order();
        let mut out = vec![C::zero(); order];
        for n in s..order {
            out[n] = self.coeffs[n - s].clone();
        }
        Series {
            ring: self.ring,
            coeffs: out,
        }
    }

    /// Reduces into `Z/MZ` with the same coefficient type.
    pub fn reduce_mod(&self, modulus: u64) -> Result<Self, SeriesError> {
        self.reduce_into(modulus)
    }

    /// Reduces into `Z/MZ`, changing the coefficient representation.
    ///
    /// Allowed when the current ring is exact or its modulus is a multiple of
    /// `modulus`.
    pub fn reduce_into<D: Coefficient>(&self, modulus: u64) -> Result<Series<D>, SeriesError> {
        let from = self.ring.modulus;
        if modulus < 2 || (from != 0 && from % modulus != 0) {
            return Err(SeriesError::IncompatibleModulus { from, to: modulus });
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| D::from_bigint(&c.to_bigint(), modulus))
            .collect();
        Ok(Series {
            ring: CoeffRing::modulo(modulus),
            coeffs,
        })
    }

    /// Whether `self` and `other` agree on their common truncation range.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.ring == other.ring
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| a == b)
    }
}

impl<C: Coefficient> fmt::Debug for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[{}; order {}](", self.ring, self.order())?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl<C: Coefficient> fmt::Display for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}q")?,
                _ => write!(f, "{c}q^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.order())
    }
}
