//! Coefficient representations for truncated q-series.
//!
//! A [`Coefficient`] is an integer-like scalar that knows how to do ring
//! arithmetic either exactly (modulus `0`) or reduced modulo some `M >= 2`.
//! Two representations ship with the crate:
//!
//! * [`BigInt`]: arbitrary precision, valid for every ring.
//! * `u64`: fixed machine-word residues, valid only for modular rings.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Scalar type stored in a [`crate::Series`].
///
/// Every method takes the ring modulus explicitly (`0` = exact integers) and
/// leaves its result in canonical form: `[0, M)` for modular rings.
pub trait Coefficient:
    Clone + fmt::Debug + fmt::Display + PartialEq + Zero + One + Send + Sync + 'static
{
    /// Whether the type can represent unreduced integers (modulus `0`).
    const EXACT: bool;

    fn from_bigint(value: &BigInt, modulus: u64) -> Self;

    fn from_i64(value: i64, modulus: u64) -> Self {
        Self::from_bigint(&BigInt::from(value), modulus)
    }

    fn to_bigint(&self) -> BigInt;

    fn add_assign_mod(&mut self, rhs: &Self, modulus: u64);

    fn sub_assign_mod(&mut self, rhs: &Self, modulus: u64);

    fn neg_mod(&self, modulus: u64) -> Self;

    fn mul_mod(&self, rhs: &Self, modulus: u64) -> Self;

    /// Multiplicative inverse, if `self` is a unit of the ring.
    fn unit_inverse(&self, modulus: u64) -> Option<Self>;

    /// Truncated Cauchy product: the first `order` coefficients of `a * b`.
    ///
    /// Plain schoolbook convolution. Zero coefficients of `a` are skipped,
    /// which makes sparse eta-products cheap.
    fn convolve(a: &[Self], b: &[Self], order: usize, modulus: u64) -> Vec<Self>;
}

/// Whether a coefficient type can carry values of the given ring.
pub fn supports<C: Coefficient>(modulus: u64) -> bool {
    modulus != 1 && (modulus != 0 || C::EXACT)
}

fn reduce_big(value: BigInt, modulus: u64) -> BigInt {
    if modulus == 0 {
        value
    } else {
        value.mod_floor(&BigInt::from(modulus))
    }
}

impl Coefficient for BigInt {
    const EXACT: bool = true;

    fn from_bigint(value: &BigInt, modulus: u64) -> Self {
        reduce_big(value.clone(), modulus)
    }

    fn to_bigint(&self) -> BigInt {
        self.clone()
    }

    fn add_assign_mod(&mut self, rhs: &Self, modulus: u64) {
        *self += rhs;
        if modulus != 0 && (self.sign() == Sign::Minus || *self >= BigInt::from(modulus)) {
            *self = reduce_big(std::mem::take(self), modulus);
        }
    }

    fn sub_assign_mod(&mut self, rhs: &Self, modulus: u64) {
        *self -= rhs;
        if modulus != 0 && self.sign() == Sign::Minus {
            *self = reduce_big(std::mem::take(self), modulus);
        }
    }

    fn neg_mod(&self, modulus: u64) -> Self {
        reduce_big(-self, modulus)
    }

    fn mul_mod(&self, rhs: &Self, modulus: u64) -> Self {
        reduce_big(self * rhs, modulus)
    }

    fn unit_inverse(&self, modulus: u64) -> Option<Self> {
        if modulus == 0 {
            return (self.abs().is_one()).then(|| self.clone());
        }
        let m = BigInt::from(modulus);
        let egcd = self.extended_gcd(&m);
        egcd.gcd.is_one().then(|| egcd.x.mod_floor(&m))
    }

    fn convolve(a: &[Self], b: &[Self], order: usize, modulus: u64) -> Vec<Self> {
        let mut out = vec![BigInt::zero(); order];
        for (i, ai) in a.iter().enumerate().take(order) {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate().take(order - i) {
                if bj.is_zero() {
                    continue;
                }
                if ai.is_one() {
                    out[i + j] += bj;
                } else {
                    out[i + j] += ai * bj;
                }
            }
        }
        if modulus != 0 {
            for c in &mut out {
                *c = reduce_big(std::mem::take(c), modulus);
            }
        }
        out
    }
}

impl Coefficient for u64 {
    const EXACT: bool = false;

    fn from_bigint(value: &BigInt, modulus: u64) -> Self {
        debug_assert!(modulus >= 2, "u64 coefficients need a modular ring");
        reduce_big(value.clone(), modulus)
            .to_u64()
            .expect("residue fits in u64")
    }

    fn from_i64(value: i64, modulus: u64) -> Self {
        (value as i128).rem_euclid(modulus as i128) as u64
    }

    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }

    fn add_assign_mod(&mut self, rhs: &Self, modulus: u64) {
        *self = ((*self as u128 + *rhs as u128) % modulus as u128) as u64;
    }

    fn sub_assign_mod(&mut self, rhs: &Self, modulus: u64) {
        *self = ((*self as u128 + (modulus - rhs) as u128) % modulus as u128) as u64;
    }

    fn neg_mod(&self, modulus: u64) -> Self {
        if *self == 0 {
            0
        } else {
            modulus - self
        }
    }

    fn mul_mod(&self, rhs: &Self, modulus: u64) -> Self {
        ((*self as u128 * *rhs as u128) % modulus as u128) as u64
    }

    fn unit_inverse(&self, modulus: u64) -> Option<Self> {
        let inv = BigInt::from(*self).unit_inverse(modulus)?;
        inv.to_u64()
    }

    fn convolve(a: &[Self], b: &[Self], order: usize, modulus: u64) -> Vec<Self> {
        let m = modulus as u128;
        let mut acc = vec![0u128; order];
        // Residues below 2^32 give products below 2^64, so up to 2^64 of them
        // can be summed in a u128 before reducing.
        let small = modulus <= u32::MAX as u64;
        for (i, &ai) in a.iter().enumerate().take(order) {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate().take(order - i) {
                if bj == 0 {
                    continue;
                }
                let p = ai as u128 * bj as u128;
                let slot = &mut acc[i + j];
                if small {
                    *slot += p;
                } else {
                    *slot = (*slot + p % m) % m;
                }
            }
        }
        acc.into_iter().map(|c| (c % m) as u64).collect()
    }
}
