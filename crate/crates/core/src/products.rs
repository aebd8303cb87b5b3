//! Eta-quotients and Ramanujan's theta functions.
//!
//! `f_k` denotes the infinite product `(q^k; q^k)_inf = prod_{n>=1} (1 - q^{kn})`.
//! An [`EtaMonomial`] is `c * q^s * prod_k f_k^{e_k}` with integer (possibly
//! negative) exponents, and a [`ProductExpr`] is a formal sum of them.
//!
//! The theta functions are the two specializations of the general
//! `f(a, b) = sum_{n in Z} a^{n(n+1)/2} b^{n(n-1)/2}` that appear here:
//! `phi(q) = f(q, q)` and `psi(q) = f(q, q^3)`. The general two-variable
//! form is not computed.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::coeff::Coefficient;
use crate::series::{CoeffRing, Series, SeriesError};
use crate::IntSeries;

/// Sign of the argument of a theta function: `phi(q)` versus `phi(-q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ThetaArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EtaMonomial {
    pub coeff: BigInt,
    pub qshift: usize,
    /// level `k` -> exponent of `f_k`; zero exponents are never stored.
    factors: BTreeMap<u32, i64>,
}

impl EtaMonomial {
    pub fn constant(coeff: impl Into<BigInt>) -> Self {
        EtaMonomial {
            coeff: coeff.into(),
            qshift: 0,
            factors: BTreeMap::new(),
        }
    }

    pub fn q_power(shift: usize) -> Self {
        EtaMonomial {
            qshift: shift,
            ..Self::constant(1)
        }
    }

    /// `f_level^exponent`.
    pub fn eta(level: u32, exponent: i64) -> Self {
        assert!(level >= 1, "eta level must be positive");
        Self::constant(1).with_factor(level, exponent)
    }

    /// Builds `coeff * q^qshift * prod f_k^e` from `(k, e)` pairs, merging
    /// repeated levels.
    pub fn new(
        coeff: impl Into<BigInt>,
        qshift: usize,
        factors: impl IntoIterator<Item = (u32, i64)>,
    ) -> Self {
        let mut m = EtaMonomial {
            qshift,
            ..Self::constant(coeff)
        };
        for (k, e) in factors {
            m = m.with_factor(k, e);
        }
        m
    }

    fn with_factor(mut self, level: u32, exponent: i64) -> Self {
        assert!(level >= 1, "eta level must be positive");
        let e = self.factors.entry(level).or_insert(0);
        *e += exponent;
        if *e == 0 {
            self.factors.remove(&level);
        }
        self
    }

    pub fn factors(&self) -> &BTreeMap<u32, i64> {
        &self.factors
    }

    pub fn exponent_of(&self, level: u32) -> i64 {
        self.factors.get(&level).copied().unwrap_or(0)
    }

    /// Same `q`-shift and factors; coefficients may differ.
    fn same_shape(&self, other: &Self) -> bool {
        self.qshift == other.qshift && self.factors == other.factors
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = EtaMonomial {
            coeff: &self.coeff * &other.coeff,
            qshift: self.qshift + other.qshift,
            factors: self.factors.clone(),
        };
        for (&k, &e) in &other.factors {
            out = out.with_factor(k, e);
        }
        out
    }

    /// Integer power. Negative powers require a unit coefficient and no
    /// `q`-shift, since the result must stay a power series with integer
    /// coefficients.
    pub fn pow(&self, exponent: i64) -> Option<Self> {
        if exponent < 0 && (self.qshift != 0 || !self.coeff.abs().is_one()) {
            return None;
        }
        let e = exponent.unsigned_abs();
        // For negative powers the coefficient is +-1, its own inverse.
        let coeff = num_traits::pow(self.coeff.clone(), e as usize);
        let qshift = self.qshift.checked_mul(e as usize)?;
        let factors = self
            .factors
            .iter()
            .map(|(&k, &x)| (k, x * exponent))
            .collect();
        Some(EtaMonomial {
            coeff,
            qshift,
            factors,
        })
    }

    /// Exact quotient `self / other`, if it is again a monomial.
    pub fn div(&self, other: &Self) -> Option<Self> {
        let inv = other.pow(-1)?;
        Some(self.mul(&inv))
    }
}

impl fmt::Display for EtaMonomial {
    /// Renders in the expression-language syntax, e.g. `-2*q*f2*f16^2/f8`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut num: Vec<String> = Vec::new();
        let c = self.coeff.abs();
        let unit = c.is_one();
        if !unit {
            num.push(c.to_string());
        }
        match self.qshift {
            0 => {}
            1 => num.push("q".into()),
            s => num.push(format!("q^{s}")),
        }
        let mut den = Vec::new();
        for (&k, &e) in &self.factors {
            let (list, e) = if e > 0 { (&mut num, e) } else { (&mut den, -e) };
            if e == 1 {
                list.push(format!("f{k}"));
            } else {
                list.push(format!("f{k}^{e}"));
            }
        }
        if self.coeff.is_negative() {
            write!(f, "-")?;
        }
        if num.is_empty() {
            write!(f, "1")?;
        } else {
            write!(f, "{}", num.join("*"))?;
        }
        for d in den {
            write!(f, "/{d}")?;
        }
        Ok(())
    }
}

/// Formal sum of eta monomials; the empty sum is zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ProductExpr {
    terms: Vec<EtaMonomial>,
}

impl ProductExpr {
    pub fn zero() -> Self {
        ProductExpr { terms: Vec::new() }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = EtaMonomial>) -> Self {
        let mut out = ProductExpr {
            terms: terms.into_iter().collect(),
        };
        out.normalize();
        out
    }

    pub fn terms(&self) -> &[EtaMonomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_monomial(&self) -> Option<&EtaMonomial> {
        match self.terms.as_slice() {
            [m] => Some(m),
            _ => None,
        }
    }

    /// Merges like terms, drops zero coefficients, keeps first-seen order.
    fn normalize(&mut self) {
        let mut merged: Vec<EtaMonomial> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.iter_mut().find(|m| m.same_shape(&t)) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|m| !m.coeff.is_zero());
        self.terms = merged;
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn neg(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|t| EtaMonomial {
            coeff: -&t.coeff,
            ..t.clone()
        }))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .flat_map(|a| other.terms.iter().map(move |b| a.mul(b))),
        )
    }

    /// Power of a sum. Negative powers are only defined for single monomials.
    pub fn pow(&self, exponent: i64) -> Option<Self> {
        if exponent < 0 {
            let m = self.as_monomial()?;
            return Some(Self::from_terms([m.pow(exponent)?]));
        }
        let mut out = Self::from_terms([EtaMonomial::constant(1)]);
        for _ in 0..exponent {
            out = out.mul(self);
        }
        Some(out)
    }

    /// Division by a single monomial with unit coefficient and no shift.
    pub fn div(&self, other: &Self) -> Option<Self> {
        let d = other.as_monomial()?.pow(-1)?;
        Some(self.mul(&Self::from_terms([d])))
    }
}

impl From<EtaMonomial> for ProductExpr {
    fn from(m: EtaMonomial) -> Self {
        ProductExpr::from_terms([m])
    }
}

impl fmt::Display for ProductExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let s = t.to_string();
            if i == 0 {
                write!(f, "{s}")?;
            } else if let Some(rest) = s.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {s}")?;
            }
        }
        Ok(())
    }
}

/// Pentagonal exponents `n(3n-1)/2` for `n = 0, 1, -1, 2, -2, ...` below
/// `bound`, paired with the sign `(-1)^n`.
fn pentagonal_terms(bound: usize) -> impl Iterator<Item = (usize, i64)> {
    (0i64..)
        .flat_map(|n| {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            let a = n * (3 * n - 1) / 2;
            let b = n * (3 * n + 1) / 2;
            // n = 0 yields exponent 0 only once.
            let second = (n > 0).then_some((b, sign));
            std::iter::once((a, sign)).chain(second)
        })
        .take_while(move |&(e, _)| (e as usize) < bound)
        .map(|(e, s)| (e as usize, s))
}

/// `f_level` to the given order via Euler's pentagonal number theorem.
pub fn expand_eta<C: Coefficient>(level: u32, ring: CoeffRing, order: usize) -> Series<C> {
    assert!(level >= 1, "eta level must be positive");
    let k = level as usize;
    let terms = pentagonal_terms(order.div_ceil(k).max(1))
        .map(|(e, s)| (e * k, s))
        .take_while(|&(e, _)| e < order);
    Series::from_sparse(ring, order, terms)
}

/// `phi(q) = 1 + 2 sum q^{n^2}` or `phi(-q) = 1 + 2 sum (-1)^n q^{n^2}`.
pub fn theta_phi<C: Coefficient>(arg: ThetaArg, ring: CoeffRing, order: usize) -> Series<C> {
    let terms = (1usize..)
        .map(|n| (n * n, n))
        .take_while(|&(e, _)| e < order)
        .map(|(e, n)| {
            let sign = if arg == ThetaArg::Minus && n % 2 == 1 { -1 } else { 1 };
            (e, 2 * sign)
        });
    Series::from_sparse(ring, order, std::iter::once((0, 1)).chain(terms))
}

/// `psi(q) = sum_{n>=0} q^{n(n+1)/2}`, or with alternating signs
/// `(-1)^{n(n+1)/2}` for `psi(-q)`.
pub fn theta_psi<C: Coefficient>(arg: ThetaArg, ring: CoeffRing, order: usize) -> Series<C> {
    let terms = (0usize..)
        .map(|n| n * (n + 1) / 2)
        .take_while(|&t| t < order)
        .map(|t| {
            let sign = if arg == ThetaArg::Minus && t % 2 == 1 { -1 } else { 1 };
            (t, sign)
        });
    Series::from_sparse(ring, order, terms)
}

/// `f_1^3 = sum_{n>=0} (-1)^n (2n+1) q^{n(n+1)/2}` (Jacobi).
pub fn cube_f1<C: Coefficient>(ring: CoeffRing, order: usize) -> Series<C> {
    let terms = (0usize..)
        .map(|n| (n * (n + 1) / 2, n))
        .take_while(|&(t, _)| t < order)
        .map(|(t, n)| {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            (t, sign * (2 * n as i64 + 1))
        });
    Series::from_sparse(ring, order, terms)
}

/// Exact `f_level` over the integers.
pub fn eta(level: u32, order: usize) -> IntSeries {
    expand_eta(level, CoeffRing::INTEGERS, order)
}

/// Expands eta-quotients at a fixed ring and order, memoizing powers of each
/// `f_k`. One expander per task; it is not shared across threads.
pub struct Expander<C> {
    ring: CoeffRing,
    order: usize,
    powers: HashMap<(u32, i64), Series<C>>,
}

impl<C: Coefficient> Expander<C> {
    pub fn new(ring: CoeffRing, order: usize) -> Self {
        Expander {
            ring,
            order,
            powers: HashMap::new(),
        }
    }

    pub fn ring(&self) -> CoeffRing {
        self.ring
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `f_level^exponent`; a negative power inverts the cached positive one.
    pub fn eta_power(&mut self, level: u32, exponent: i64) -> Result<&Series<C>, SeriesError> {
        if !self.powers.contains_key(&(level, exponent)) {
            let value = if exponent < 0 {
                self.eta_power(level, -exponent)?.invert()?
            } else if exponent == 0 {
                Series::one(self.ring, self.order)
            } else {
                expand_eta::<C>(level, self.ring, self.order).pow(exponent)?
            };
            self.powers.insert((level, exponent), value);
        }
        Ok(&self.powers[&(level, exponent)])
    }

    pub fn monomial(&mut self, m: &EtaMonomial) -> Result<Series<C>, SeriesError> {
        let mut acc: Option<Series<C>> = None;
        for (&k, &e) in m.factors() {
            let p = self.eta_power(k, e)?;
            acc = Some(match acc {
                None => p.clone(),
                Some(a) => a.mul(p)?,
            });
        }
        let base = acc.unwrap_or_else(|| Series::one(self.ring, self.order));
        let coeff = C::from_bigint(&m.coeff, self.ring.modulus());
        Ok(base.shift(m.qshift).scale(&coeff))
    }

    pub fn expr(&mut self, e: &ProductExpr) -> Result<Series<C>, SeriesError> {
        let mut sum = Series::zero(self.ring, self.order);
        for t in e.terms() {
            if t.qshift >= self.order {
                continue;
            }
            sum = sum.add(&self.monomial(t)?)?;
        }
        Ok(sum)
    }
}

/// One-shot expansion of a product expression.
pub fn expand_expr<C: Coefficient>(
    e: &ProductExpr,
    ring: CoeffRing,
    order: usize,
) -> Result<Series<C>, SeriesError> {
    Expander::new(ring, order).expr(e)
}

/// Eta-quotient form of a theta function, e.g. `phi(-q) = f1^2 / f2`.
pub fn theta_product(theta: Theta) -> EtaMonomial {
    match theta {
        Theta::Phi(ThetaArg::Plus) => EtaMonomial::new(1, 0, [(2, 5), (1, -2), (4, -2)]),
        Theta::Phi(ThetaArg::Minus) => EtaMonomial::new(1, 0, [(1, 2), (2, -1)]),
        Theta::Psi(ThetaArg::Plus) => EtaMonomial::new(1, 0, [(2, 2), (1, -1)]),
        Theta::Psi(ThetaArg::Minus) => EtaMonomial::new(1, 0, [(1, 1), (4, 1), (2, -1)]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theta {
    Phi(ThetaArg),
    Psi(ThetaArg),
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, arg) = match self {
            Theta::Phi(a) => ("phi", a),
            Theta::Psi(a) => ("psi", a),
        };
        let arg = match arg {
            ThetaArg::Plus => "q",
            ThetaArg::Minus => "-q",
        };
        write!(f, "{name}({arg})")
    }
}

/// Converts an exact series to `i64` coefficients; panics on overflow.
pub fn to_i64s(s: &IntSeries) -> Vec<i64> {
    s.coeffs()
        .iter()
        .map(|c| c.to_i64().expect("coefficient fits in i64"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ResidueSeries;

    const Z: CoeffRing = CoeffRing::INTEGERS;

    /// Partial product `prod_{n<=N} (1 - q^{kn})` computed term by term.
    fn naive_eta(k: usize, order: usize) -> Vec<i64> {
        let mut c = vec![0i64; order];
        c[0] = 1;
        let mut n = 1;
        while k * n < order {
            for e in (k * n..order).rev() {
                c[e] -= c[e - k * n];
            }
            n += 1;
        }
        c
    }

    fn expr(text: &str) -> ProductExpr {
        crate::exprlang::parse_product(text).unwrap()
    }

    #[test]
    fn eta_small_examples() {
        assert_eq!(
            to_i64s(&eta(1, 13)),
            vec![1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1]
        );
        assert_eq!(to_i64s(&eta(2, 5)), vec![1, 0, -1, 0, -1]);
        for k in [1, 5, 72, 500] {
            assert_eq!(to_i64s(&eta(k, 30))[0], 1);
        }
    }

    #[test]
    fn pentagonal_matches_naive_product() {
        for k in 1..=72 {
            assert_eq!(to_i64s(&eta(k, 300)), naive_eta(k as usize, 300), "level {k}");
        }
    }

    #[test]
    fn eta_order_one() {
        assert_eq!(to_i64s(&eta(3, 1)), vec![1]);
    }

    #[test]
    fn theta_examples() {
        assert_eq!(
            to_i64s(&theta_phi(ThetaArg::Plus, Z, 10)),
            vec![1, 2, 0, 0, 2, 0, 0, 0, 0, 2]
        );
        assert_eq!(
            to_i64s(&theta_psi(ThetaArg::Plus, Z, 11)),
            vec![1, 1, 0, 1, 0, 0, 1, 0, 0, 0, 1]
        );
        assert_eq!(
            to_i64s(&cube_f1(Z, 7)),
            vec![1, -3, 0, 5, 0, 0, -7]
        );
    }

    #[test]
    fn theta_product_forms() {
        let n = 500;
        let cases = [
            (Theta::Phi(ThetaArg::Plus), "f2^5/f1^2/f4^2"),
            (Theta::Phi(ThetaArg::Minus), "f1^2/f2"),
            (Theta::Psi(ThetaArg::Plus), "f2^2/f1"),
            (Theta::Psi(ThetaArg::Minus), "f1*f4/f2"),
        ];
        for (theta, text) in cases {
            let sum: IntSeries = match theta {
                Theta::Phi(a) => theta_phi(a, Z, n),
                Theta::Psi(a) => theta_psi(a, Z, n),
            };
            let prod: IntSeries = expand_expr(&expr(text), Z, n).unwrap();
            assert_eq!(sum, prod, "{theta}");
            let direct: IntSeries =
                expand_expr(&ProductExpr::from(theta_product(theta)), Z, n).unwrap();
            assert_eq!(sum, direct, "{theta}");
        }
    }

    #[test]
    fn psi_times_eta_is_f2_squared() {
        let psi: IntSeries = theta_psi(ThetaArg::Plus, Z, 100);
        let lhs = psi.mul(&eta(1, 100)).unwrap();
        assert_eq!(lhs, eta(2, 100).pow(2).unwrap());
    }

    #[test]
    fn psi_quotient_first_coefficients() {
        let s: IntSeries = expand_expr(&expr("f2^2/f1"), Z, 10).unwrap();
        assert_eq!(to_i64s(&s), vec![1, 1, 0, 1, 0, 0, 1, 0, 0, 0]);
    }

    #[test]
    fn psi_coefficients_are_triangular_indicators() {
        let n = 2000;
        let psi = to_i64s(&theta_psi(ThetaArg::Plus, Z, n));
        let triangular: Vec<usize> = (0..).map(|j| j * (j + 1) / 2).take_while(|&t| t < n).collect();
        for (e, &c) in psi.iter().enumerate() {
            assert_eq!(c == 1, triangular.contains(&e));
            assert!(c == 0 || c == 1);
        }
        assert!(triangular.iter().all(|t| [0, 1, 3].contains(&(t % 5))));
    }

    #[test]
    fn cube_matches_series_cube() {
        let f = eta(1, 300);
        let cube = f.mul(&f).unwrap().mul(&f).unwrap();
        assert_eq!(cube_f1::<BigInt>(Z, 300), cube);
        let c = to_i64s(&cube);
        let triangular: Vec<usize> = (0..30).map(|j| j * (j + 1) / 2).collect();
        for (e, &x) in c.iter().enumerate() {
            if !triangular.contains(&e) {
                assert_eq!(x, 0);
            }
        }
    }

    #[test]
    fn single_monomial_expansion() {
        let m = EtaMonomial::new(-1, 1, [(9, 1), (18, 1)]);
        let s: IntSeries = expand_expr(&m.clone().into(), Z, 20).unwrap();
        let expected = eta(9, 20).mul(&eta(18, 20)).unwrap().shift(1).neg();
        assert_eq!(s, expected);
        assert_eq!(m.to_string(), "-q*f9*f18");
    }

    #[test]
    fn empty_expression_is_zero() {
        let s: IntSeries = expand_expr(&ProductExpr::zero(), Z, 8).unwrap();
        assert!(s.is_zero());
        assert_eq!(s.order(), 8);
    }

    #[test]
    fn residue_expansion_matches_reduced_exact() {
        let e = expr("2*f8^2/f4 - f2^3*f4^2/f1^2");
        let exact: IntSeries = expand_expr(&e, Z, 200).unwrap();
        let fast: ResidueSeries = expand_expr(&e, CoeffRing::modulo(4), 200).unwrap();
        assert_eq!(exact.reduce_into::<u64>(4).unwrap(), fast);
    }

    #[test]
    fn monomial_algebra() {
        let a = EtaMonomial::new(2, 1, [(1, 2), (4, -1)]);
        let b = EtaMonomial::new(-1, 0, [(4, 1)]);
        assert_eq!(a.mul(&b), EtaMonomial::new(-2, 1, [(1, 2)]));
        assert!(a.pow(-1).is_none());
        assert_eq!(b.pow(-2), Some(EtaMonomial::new(1, 0, [(4, -2)])));
        let sum = ProductExpr::from_terms([a.clone(), a.clone()]);
        assert_eq!(sum.terms().len(), 1);
        assert_eq!(sum.terms()[0].coeff, BigInt::from(4));
        assert!(ProductExpr::from(a.clone()).sub(&a.into()).is_zero());
    }

    #[test]
    fn product_expr_display() {
        let e = ProductExpr::from_terms([
            EtaMonomial::new(1, 0, [(2, 1), (8, 5), (4, -2), (16, -2)]),
            EtaMonomial::new(-2, 1, [(2, 1), (16, 2), (8, -1)]),
        ]);
        assert_eq!(e.to_string(), "f2*f8^5/f4^2/f16^2 - 2*q*f2*f16^2/f8");
    }
}
