//! Fixture files: named identities and congruences between series, each
//! side optionally followed by dissection stages.
//!
//! ```text
//! # comment
//! name : SIDE == SIDE [mod M] [order N]
//! SIDE   = SOURCE { "|" "dissect" m r }
//! SOURCE = "spt2(" [a] "n" ["+" b] ")"        progression from the table
//!        | ("phisum" | "psisum") "(" ["-"] "q" ")" | "cubesum(q)"
//!        | expression                         eta-quotient, see `exprlang`
//! ```
//!
//! `order` is the number of coefficients each source is expanded to before
//! any dissection. Without `mod` the comparison is exact.

use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::coeff::Coefficient;
use crate::dissect::{check_series_congruence, dissect, DissectError, DissectionSpec, IdentityReport};
use crate::exprlang::{parse_product, ExprError};
use crate::products::{cube_f1, expand_expr, theta_phi, theta_psi, ProductExpr, ThetaArg};
use crate::series::{CoeffRing, Series, SeriesError};
use crate::spt::{progression_series, Spt2Table, SptError};

/// Order used when a fixture line omits `order`.
pub const DEFAULT_ORDER: usize = 500;

const BUILTIN: &str = include_str!("../fixtures/identities.fix");
const NEGATIVE: &str = include_str!("../fixtures/negative.fix");

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Expr { line: usize, source: ExprError },
    #[error("unknown fixture {0:?}")]
    Unknown(String),
    #[error("fixture {0:?} needs an spt2 table")]
    MissingTable(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Dissect(#[from] DissectError),
    #[error(transparent)]
    Spt(#[from] SptError),
}

/// Closed-form sums, expanded term by term rather than as products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumSeries {
    Phi(ThetaArg),
    Psi(ThetaArg),
    CubeF1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    /// `sum_n spt2(a n + b) q^n`
    Progression { a: usize, b: usize },
    Sum(SumSeries),
    Expr { text: String, expr: ProductExpr },
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Progression { a, b } => write!(f, "spt2({a}n+{b})"),
            Source::Sum(SumSeries::Phi(arg)) => write!(f, "phisum({})", arg_text(*arg)),
            Source::Sum(SumSeries::Psi(arg)) => write!(f, "psisum({})", arg_text(*arg)),
            Source::Sum(SumSeries::CubeF1) => f.write_str("cubesum(q)"),
            Source::Expr { text, .. } => f.write_str(text),
        }
    }
}

fn arg_text(arg: ThetaArg) -> &'static str {
    match arg {
        ThetaArg::Plus => "q",
        ThetaArg::Minus => "-q",
    }
}

/// A source followed by dissection stages, applied left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Side {
    pub source: Source,
    pub stages: Vec<DissectionSpec>,
}

impl Side {
    /// Largest table index needed to expand this side to `order`.
    pub fn table_bound(&self, order: usize) -> Option<usize> {
        match self.source {
            Source::Progression { a, b } if order > 0 => Some(a * (order - 1) + b),
            _ => None,
        }
    }

    /// Number of coefficients left after every stage.
    pub fn retained(&self, order: usize) -> usize {
        self.stages.iter().fold(order, |n, s| {
            if n > s.r() {
                (n - s.r()).div_ceil(s.m())
            } else {
                0
            }
        })
    }

    pub fn evaluate<C: Coefficient>(
        &self,
        ring: CoeffRing,
        order: usize,
        table: Option<&Spt2Table>,
        name: &str,
    ) -> Result<Series<C>, FixtureError> {
        let mut s: Series<C> = match &self.source {
            Source::Progression { a, b } => {
                let table = table.ok_or_else(|| FixtureError::MissingTable(name.to_string()))?;
                let exact = progression_series(table, *a, *b, order)?;
                Series::from_bigints(ring, exact.coeffs())
            }
            Source::Sum(SumSeries::Phi(arg)) => theta_phi(*arg, ring, order),
            Source::Sum(SumSeries::Psi(arg)) => theta_psi(*arg, ring, order),
            Source::Sum(SumSeries::CubeF1) => cube_f1(ring, order),
            Source::Expr { expr, .. } => expand_expr(expr, ring, order)?,
        };
        for &stage in &self.stages {
            s = dissect(&s, stage);
        }
        Ok(s)
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source)?;
        for s in &self.stages {
            write!(f, " | {s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub lhs: Side,
    pub rhs: Side,
    /// `0` for exact comparison.
    pub modulus: u64,
    pub order: usize,
}

impl Fixture {
    pub fn table_bound(&self, order: usize) -> Option<usize> {
        self.lhs.table_bound(order).max(self.rhs.table_bound(order))
    }

    /// Coefficients actually compared at the given source order.
    pub fn retained(&self, order: usize) -> usize {
        self.lhs.retained(order).min(self.rhs.retained(order))
    }

    /// Runs the comparison at `order`, or at the fixture's own order.
    pub fn run(
        &self,
        order: Option<usize>,
        table: Option<&Spt2Table>,
    ) -> Result<IdentityReport, FixtureError> {
        let order = order.unwrap_or(self.order);
        let ring = CoeffRing::new(self.modulus)?;
        let outcome = if ring.is_exact() {
            let l: Series<BigInt> = self.lhs.evaluate(ring, order, table, &self.name)?;
            let r: Series<BigInt> = self.rhs.evaluate(ring, order, table, &self.name)?;
            check_series_congruence(&l, &r, 0)
        } else {
            let l: Series<u64> = self.lhs.evaluate(ring, order, table, &self.name)?;
            let r: Series<u64> = self.rhs.evaluate(ring, order, table, &self.name)?;
            check_series_congruence(&l, &r, self.modulus)
        };
        Ok(IdentityReport {
            name: self.name.clone(),
            outcome,
        })
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} == {}", self.name, self.lhs, self.rhs)?;
        if self.modulus != 0 {
            write!(f, " mod {}", self.modulus)?;
        }
        write!(f, " order {}", self.order)
    }
}

fn syntax(line: usize, message: impl Into<String>) -> FixtureError {
    FixtureError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_number<T: std::str::FromStr>(line: usize, text: &str, what: &str) -> Result<T, FixtureError> {
    text.parse()
        .map_err(|_| syntax(line, format!("expected {what}, found {text:?}")))
}

fn parse_progression(line: usize, inner: &str) -> Result<Source, FixtureError> {
    let compact: String = inner.chars().filter(|c| !c.is_whitespace()).collect();
    let (step, offset) = compact
        .split_once('n')
        .ok_or_else(|| syntax(line, format!("expected `a n + b` in spt2({inner})")))?;
    let a = if step.is_empty() {
        1
    } else {
        parse_number(line, step, "a step")?
    };
    let b = match offset {
        "" => 0,
        rest => {
            let digits = rest
                .strip_prefix('+')
                .ok_or_else(|| syntax(line, format!("expected `+ b`, found {rest:?}")))?;
            parse_number(line, digits, "an offset")?
        }
    };
    if a == 0 {
        return Err(syntax(line, "progression step must be positive"));
    }
    Ok(Source::Progression { a, b })
}

fn parse_source(line: usize, text: &str) -> Result<Source, FixtureError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(inner) = text.trim().strip_prefix("spt2(").and_then(|t| t.strip_suffix(')')) {
        return parse_progression(line, inner);
    }
    let sum = match compact.as_str() {
        "phisum(q)" => Some(SumSeries::Phi(ThetaArg::Plus)),
        "phisum(-q)" => Some(SumSeries::Phi(ThetaArg::Minus)),
        "psisum(q)" => Some(SumSeries::Psi(ThetaArg::Plus)),
        "psisum(-q)" => Some(SumSeries::Psi(ThetaArg::Minus)),
        "cubesum(q)" => Some(SumSeries::CubeF1),
        _ => None,
    };
    if let Some(sum) = sum {
        return Ok(Source::Sum(sum));
    }
    let text = text.trim().to_string();
    let expr = parse_product(&text).map_err(|source| FixtureError::Expr { line, source })?;
    Ok(Source::Expr { text, expr })
}

/// `SOURCE { "|" dissect m r }`; `line` only labels errors.
pub fn parse_side(line: usize, text: &str) -> Result<Side, FixtureError> {
    let mut pieces = text.split('|');
    let source = parse_source(line, pieces.next().unwrap_or(""))?;
    let mut stages = Vec::new();
    for stage in pieces {
        let words: Vec<&str> = stage.split_whitespace().collect();
        match words.as_slice() {
            ["dissect", m, r] => {
                let m = parse_number(line, m, "a dissection modulus")?;
                let r = parse_number(line, r, "a residue")?;
                stages.push(DissectionSpec::new(m, r)?);
            }
            _ => return Err(syntax(line, format!("expected `dissect m r`, found {stage:?}"))),
        }
    }
    Ok(Side { source, stages })
}

/// Parses one non-comment line.
pub fn parse_line(line: usize, text: &str) -> Result<Fixture, FixtureError> {
    let (name, body) = text
        .split_once(':')
        .ok_or_else(|| syntax(line, "expected `name : LHS == RHS`"))?;
    let name = name.trim();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(syntax(line, format!("bad fixture name {name:?}")));
    }
    let (lhs, rest) = body
        .split_once("==")
        .ok_or_else(|| syntax(line, "missing `==`"))?;

    let mut words: Vec<&str> = rest.split_whitespace().collect();
    let mut modulus = None;
    let mut order = None;
    while words.len() >= 2 {
        let (key, value) = (words[words.len() - 2], words[words.len() - 1]);
        match key {
            "mod" if modulus.is_none() => modulus = Some(parse_number(line, value, "a modulus")?),
            "order" if order.is_none() => order = Some(parse_number(line, value, "an order")?),
            _ => break,
        }
        words.truncate(words.len() - 2);
    }
    let modulus: u64 = modulus.unwrap_or(0);
    if modulus == 1 {
        return Err(syntax(line, "modulus must be at least 2"));
    }
    Ok(Fixture {
        name: name.to_string(),
        lhs: parse_side(line, lhs)?,
        rhs: parse_side(line, &words.join(" "))?,
        modulus,
        order: order.unwrap_or(DEFAULT_ORDER),
    })
}

/// Parses a whole fixture file. `#` starts a comment.
pub fn parse_fixtures(text: &str) -> Result<Vec<Fixture>, FixtureError> {
    let mut out: Vec<Fixture> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fixture = parse_line(i + 1, body)?;
        if out.iter().any(|f| f.name == fixture.name) {
            return Err(syntax(i + 1, format!("duplicate fixture name {:?}", fixture.name)));
        }
        out.push(fixture);
    }
    Ok(out)
}

/// Fixtures that must pass.
pub fn builtin_fixtures() -> Vec<Fixture> {
    parse_fixtures(BUILTIN).expect("built-in fixture file parses")
}

/// Deliberately corrupted fixtures that must fail.
pub fn negative_controls() -> Vec<Fixture> {
    parse_fixtures(NEGATIVE).expect("negative-control fixture file parses")
}

/// Looks a name up among the built-in and negative-control fixtures.
pub fn find_fixture(name: &str) -> Result<Fixture, FixtureError> {
    builtin_fixtures()
        .into_iter()
        .chain(negative_controls())
        .find(|f| f.name == name)
        .ok_or_else(|| FixtureError::Unknown(name.to_string()))
}

/// Largest table index any of the fixtures needs.
pub fn table_bound(fixtures: &[Fixture], order: Option<usize>) -> Option<usize> {
    fixtures
        .iter()
        .filter_map(|f| f.table_bound(order.unwrap_or(f.order)))
        .max()
}

/// Runs fixtures concurrently; reports come back sorted by name.
pub fn run_all(
    fixtures: &[Fixture],
    order: Option<usize>,
    table: Option<&Spt2Table>,
) -> Result<Vec<IdentityReport>, FixtureError> {
    let mut reports = fixtures
        .par_iter()
        .map(|f| f.run(order, table))
        .collect::<Result<Vec<_>, _>>()?;
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spt::Spt2Table;

    #[test]
    fn parses_pipeline_line() {
        let f = parse_line(1, "x : spt2(16n+8) | dissect 2 1 == 2*f2^4*f8^2/(f1^2*f4) mod 4 order 40")
            .unwrap();
        assert_eq!(f.name, "x");
        assert_eq!(f.lhs.source, Source::Progression { a: 16, b: 8 });
        assert_eq!(f.lhs.stages, vec![DissectionSpec::new(2, 1).unwrap()]);
        assert_eq!(f.modulus, 4);
        assert_eq!(f.order, 40);
        assert_eq!(f.table_bound(40), Some(16 * 39 + 8));
        assert_eq!(f.retained(40), 20);
        let again = parse_line(1, &f.to_string()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn defaults_and_keyword_order() {
        let f = parse_line(3, "y : f1 == f1 order 7 mod 3").unwrap();
        assert_eq!((f.modulus, f.order), (3, 7));
        let f = parse_line(3, "y : f1 == f1").unwrap();
        assert_eq!((f.modulus, f.order), (0, DEFAULT_ORDER));
        let f = parse_line(3, "y : spt2(n) == spt2(3n)").unwrap();
        assert_eq!(f.rhs.source, Source::Progression { a: 3, b: 0 });
        assert_eq!(f.lhs.source, Source::Progression { a: 1, b: 0 });
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_fixtures("# c\n\nbad line\n").unwrap_err();
        assert!(matches!(err, FixtureError::Syntax { line: 3, .. }), "{err}");
        let err = parse_fixtures("a : f1 == f1^\n").unwrap_err();
        assert!(matches!(err, FixtureError::Expr { line: 1, .. }), "{err}");
        let err = parse_fixtures("a : f1 | cut 2 0 == f1\n").unwrap_err();
        assert!(matches!(err, FixtureError::Syntax { line: 1, .. }), "{err}");
        let err = parse_fixtures("a : f1 == f1\na : f2 == f2\n").unwrap_err();
        assert!(matches!(err, FixtureError::Syntax { line: 2, .. }), "{err}");
        assert!(parse_line(1, "a : f1 == f1 mod 1").is_err());
        assert!(parse_line(1, "a : spt2(0n+1) == f1").is_err());
    }

    #[test]
    fn builtin_files_parse_with_unique_names() {
        let good = builtin_fixtures();
        let bad = negative_controls();
        assert!(good.len() > 20);
        assert!(!bad.is_empty());
        for name in ["lemma1", "lemma2", "lemma3", "lemma4", "lemma5", "lemma6"] {
            assert!(good.iter().any(|f| f.name == name), "{name}");
        }
        assert!(bad.iter().any(|f| f.name == "lemma5-corrupted"));
        for f in good.iter().chain(&bad) {
            assert_eq!(parse_line(1, &f.to_string()).unwrap(), *f);
        }
        assert!(matches!(find_fixture("nope"), Err(FixtureError::Unknown(_))));
    }

    #[test]
    fn modular_pipelines_keep_enough_coefficients() {
        for f in builtin_fixtures().iter().filter(|f| f.modulus != 0) {
            assert!(f.retained(f.order) >= 150, "{} keeps {}", f.name, f.retained(f.order));
        }
    }

    #[test]
    fn sums_match_their_products() {
        let f = parse_fixtures(
            "a : phisum(q) == phi(q) order 200\n\
             b : psisum(-q) == psi(-q) order 200\n\
             c : cubesum(q) == f1^3 order 200\n",
        )
        .unwrap();
        for r in run_all(&f, None, None).unwrap() {
            assert!(r.outcome.passed(), "{r:?}");
        }
    }

    #[test]
    fn progression_needs_a_table() {
        let f = parse_line(1, "t : spt2(2n) == 0 mod 2 order 5").unwrap();
        assert!(matches!(f.run(None, None), Err(FixtureError::MissingTable(_))));
        let table = Spt2Table::by_genfunc(3);
        assert!(matches!(f.run(None, Some(&table)), Err(FixtureError::Spt(_))));
    }

    #[test]
    fn reports_sorted_by_name() {
        let f = parse_fixtures("b : f1 == f1 order 5\na : f2 == f1 order 5\n").unwrap();
        let r = run_all(&f, None, None).unwrap();
        assert_eq!(r[0].name, "a");
        assert!(!r[0].outcome.passed());
        assert_eq!(r[1].name, "b");
    }
}
