//! Truncated q-series arithmetic, eta-quotient expansion and checks for
//! congruences of `spt2`, the smallest-parts function of overpartitions
//! with even, non-overlined smallest part.

pub mod arith;
pub mod cache;
pub mod coeff;
pub mod dissect;
pub mod exprlang;
pub mod fixture;
pub mod products;
pub mod series;
pub mod spt;
pub mod verify;

use num_bigint::BigInt;

pub use coeff::Coefficient;
pub use series::{CoeffRing, Series, SeriesError};

/// Series with exact integer coefficients, or big-integer residues.
pub type IntSeries = Series<BigInt>;

/// Series over `Z/MZ` with word-sized residues.
pub type ResidueSeries = Series<u64>;
