//! Jacobi symbols, p-adic valuations and the form `x^2 + 2y^2`.

use num_integer::{Integer, Roots};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("Jacobi symbol needs an odd positive modulus, got {0}")]
    EvenOrNonPositiveModulus(u64),
    #[error("valuation of zero is undefined")]
    ZeroValuation,
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// Trial division; adequate for the sizes used here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Jacobi symbol `(a / n)` for odd `n >= 1`; the Legendre symbol when `n`
/// is prime.
pub fn jacobi(a: i64, n: u64) -> Result<i8, ArithError> {
    if n == 0 || n % 2 == 0 {
        return Err(ArithError::EvenOrNonPositiveModulus(n));
    }
    let n_i = n as i128;
    let mut a = (a as i128).rem_euclid(n_i);
    let mut n = n_i;
    let mut result = 1i8;
    while a != 0 {
        // (2/n) = -1 exactly when n = 3, 5 (mod 8)
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        // reciprocity: flip when both are 3 (mod 4)
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    Ok(if n == 1 { result } else { 0 })
}

/// Largest `e` with `p^e | n`.
pub fn padic_valuation<T>(n: &T, p: u64) -> Result<u32, ArithError>
where
    T: Integer + Clone + From<u64>,
{
    if n.is_zero() {
        return Err(ArithError::ZeroValuation);
    }
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    let p = T::from(p);
    let mut n = n.clone();
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Ok(e);
        }
        n = q;
        e += 1;
    }
}

/// A representation `n = x^2 + 2y^2` with `x, y >= 0`, or its absence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadFormWitness {
    pub n: u64,
    pub rep: Option<(u64, u64)>,
}

impl QuadFormWitness {
    pub fn is_representable(&self) -> bool {
        self.rep.is_some()
    }
}

/// Every `(x, y)` with `x, y >= 0` and `x^2 + 2y^2 = n`.
pub fn representations_x2_2y2(n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut y = 0u64;
    while 2 * y * y <= n {
        let rest = n - 2 * y * y;
        let x = rest.sqrt();
        if x * x == rest {
            out.push((x, y));
        }
        y += 1;
    }
    out
}

/// Exhaustive search for `n = x^2 + 2y^2`.
pub fn represent_x2_2y2(n: u64) -> QuadFormWitness {
    QuadFormWitness {
        n,
        rep: representations_x2_2y2(n).into_iter().next(),
    }
}

/// `n = x^2 + 2y^2` with both `x` and `y` odd.
pub fn represent_x2_2y2_odd(n: u64) -> Option<(u64, u64)> {
    representations_x2_2y2(n)
        .into_iter()
        .find(|&(x, y)| x % 2 == 1 && y % 2 == 1)
}
