//! Surface syntax for eta-quotient expressions.
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = "-" unary | power ;
//! power    = atom [ "^" exponent ] ;
//! exponent = [ "-" ] integer ;
//! atom     = integer | "q" | "f" level | theta | "(" expr ")" ;
//! theta    = ("phi" | "psi") "(" [ "-" ] "q" ")" ;
//! ```
//!
//! `^` binds tighter than unary minus, so `-f1^2` is `-(f1^2)`; `*` and `/`
//! are left-associative. Whitespace is ignored. See `docs/grammar.md`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::products::{theta_product, EtaMonomial, ProductExpr, Theta, ThetaArg};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("cannot normalize expression: {0}")]
    Lower(String),
}

fn parse_err<T>(offset: usize, message: impl Into<String>) -> Result<T, ExprError> {
    Err(ExprError::Parse {
        offset,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprAst {
    Int(BigInt),
    Q,
    Eta(u32),
    Theta(Theta),
    Neg(Box<ExprAst>),
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, i64),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "integer {n}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = text[start..i].parse::<BigInt>().expect("digits");
                out.push((start, Tok::Int(n)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return parse_err(start, format!("unexpected character {ch:?}"));
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::Eof));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ExprError> {
        let (off, t) = self.bump();
        if t == want {
            Ok(())
        } else if want == Tok::RParen {
            parse_err(off, format!("unbalanced parenthesis: expected `)`, found {t}"))
        } else {
            parse_err(off, format!("expected {want}, found {t}"))
        }
    }

    fn expr(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = ExprAst::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = ExprAst::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = ExprAst::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = ExprAst::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ExprAst, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(ExprAst::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst, ExprError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let (off, t) = self.bump();
        let Tok::Int(n) = t else {
            return parse_err(off, format!("exponent must be an integer literal, found {t}"));
        };
        let n = if negative { -n } else { n };
        let e = i64::try_from(&n)
            .or_else(|_| parse_err(off, format!("exponent {n} out of range")))?;
        Ok(ExprAst::Pow(Box::new(base), e))
    }

    fn theta(&mut self, name: &str) -> Result<ExprAst, ExprError> {
        self.expect(Tok::LParen)?;
        let arg = if *self.peek() == Tok::Minus {
            self.bump();
            ThetaArg::Minus
        } else {
            ThetaArg::Plus
        };
        let (off, t) = self.bump();
        if t != Tok::Ident("q".into()) {
            return parse_err(off, format!("{name} takes `q` or `-q`, found {t}"));
        }
        self.expect(Tok::RParen)?;
        Ok(ExprAst::Theta(if name == "phi" {
            Theta::Phi(arg)
        } else {
            Theta::Psi(arg)
        }))
    }

    fn atom(&mut self) -> Result<ExprAst, ExprError> {
        let (off, t) = self.bump();
        match t {
            Tok::Int(n) => Ok(ExprAst::Int(n)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "q" => Ok(ExprAst::Q),
                "phi" | "psi" => self.theta(&name),
                _ => {
                    let level = name
                        .strip_prefix('f')
                        .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                        .and_then(|d| d.parse::<u32>().ok())
                        .filter(|&k| k >= 1);
                    match level {
                        Some(k) => Ok(ExprAst::Eta(k)),
                        None => parse_err(off, format!("unknown atom `{name}`")),
                    }
                }
            },
            Tok::RParen => parse_err(off, "unbalanced parenthesis: unexpected `)`"),
            other => parse_err(off, format!("expected an operand, found {other}")),
        }
    }
}

pub fn parse(text: &str) -> Result<ExprAst, ExprError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let ast = p.expr()?;
    match p.peek() {
        Tok::Eof => Ok(ast),
        Tok::RParen => parse_err(p.offset(), "unbalanced parenthesis: unexpected `)`"),
        t => parse_err(p.offset(), format!("unexpected {t}")),
    }
}

/// Normalizes an AST into a sum of eta monomials.
pub fn lower(ast: &ExprAst) -> Result<ProductExpr, ExprError> {
    Ok(match ast {
        ExprAst::Int(n) if n.is_zero() => ProductExpr::zero(),
        ExprAst::Int(n) => EtaMonomial::constant(n.clone()).into(),
        ExprAst::Q => EtaMonomial::q_power(1).into(),
        ExprAst::Eta(k) => EtaMonomial::eta(*k, 1).into(),
        ExprAst::Theta(t) => theta_product(*t).into(),
        ExprAst::Neg(x) => lower(x)?.neg(),
        ExprAst::Add(a, b) => lower(a)?.add(&lower(b)?),
        ExprAst::Sub(a, b) => lower(a)?.sub(&lower(b)?),
        ExprAst::Mul(a, b) => lower(a)?.mul(&lower(b)?),
        ExprAst::Div(a, b) => {
            let den = lower(b)?;
            lower(a)?.div(&den).ok_or_else(|| {
                ExprError::Lower(format!(
                    "denominator `{den}` is not an eta monomial with unit coefficient and no q-shift"
                ))
            })?
        }
        ExprAst::Pow(x, e) => {
            let base = lower(x)?;
            base.pow(*e).ok_or_else(|| {
                ExprError::Lower(format!("negative power of `{base}` is not an eta monomial"))
            })?
        }
    })
}

/// `lower(parse(text))`.
pub fn parse_product(text: &str) -> Result<ProductExpr, ExprError> {
    lower(&parse(text)?)
}

impl ExprAst {
    fn precedence(&self) -> u8 {
        match self {
            ExprAst::Add(..) | ExprAst::Sub(..) => 1,
            ExprAst::Mul(..) | ExprAst::Div(..) => 2,
            ExprAst::Neg(_) => 3,
            ExprAst::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            ExprAst::Int(n) => write!(f, "{n}"),
            ExprAst::Q => write!(f, "q"),
            ExprAst::Eta(k) => write!(f, "f{k}"),
            ExprAst::Theta(t) => write!(f, "{t}"),
            ExprAst::Neg(x) => {
                write!(f, "-")?;
                x.write_at(f, 3)
            }
            ExprAst::Add(a, b) | ExprAst::Sub(a, b) => {
                a.write_at(f, 1)?;
                write!(f, " {} ", if matches!(self, ExprAst::Add(..)) { '+' } else { '-' })?;
                b.write_at(f, 2)
            }
            ExprAst::Mul(a, b) | ExprAst::Div(a, b) => {
                a.write_at(f, 2)?;
                write!(f, "{}", if matches!(self, ExprAst::Mul(..)) { '*' } else { '/' })?;
                b.write_at(f, 3)
            }
            ExprAst::Pow(x, e) => {
                x.write_at(f, 5)?;
                write!(f, "^{e}")
            }
        }
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn offset_of(text: &str) -> usize {
        match parse(text) {
            Err(ExprError::Parse { offset, .. }) => offset,
            other => panic!("expected parse error for {text:?}, got {other:?}"),
        }
    }

    #[test]
    fn two_top_level_terms() {
        let ast = parse("2*f8^2/f4 - f2^3*f4^2/f1^2").unwrap();
        assert!(matches!(ast, ExprAst::Sub(..)));
        assert_eq!(lower(&ast).unwrap().terms().len(), 2);
    }

    #[test]
    fn q_to_the_zero_is_one() {
        let ast = parse("q^0").unwrap();
        assert_eq!(ast, ExprAst::Pow(Box::new(ExprAst::Q), 0));
        assert_eq!(lower(&ast).unwrap(), EtaMonomial::constant(1).into());
    }

    #[test]
    fn error_offsets() {
        assert_eq!(offset_of("f1^"), 3);
        assert_eq!(offset_of("(f1*f2"), 6);
        assert_eq!(offset_of("f1)"), 2);
        assert_eq!(offset_of("f1 $ f2"), 3);
        assert_eq!(offset_of("g3"), 0);
        assert_eq!(offset_of("f0"), 0);
        assert_eq!(offset_of("f1^q"), 3);
        assert_eq!(offset_of("phi(q^2)"), 5);
        assert_eq!(offset_of(""), 0);
    }

    #[test]
    fn error_messages_name_the_problem() {
        let msg = parse("(f1").unwrap_err().to_string();
        assert!(msg.contains("unbalanced"), "{msg}");
        let msg = parse("f1^f2").unwrap_err().to_string();
        assert!(msg.contains("exponent"), "{msg}");
        let msg = parse("chi(q)").unwrap_err().to_string();
        assert!(msg.contains("unknown atom"), "{msg}");
    }

    #[test]
    fn theta_atoms_lower_to_products() {
        assert_eq!(
            parse_product("psi(-q)").unwrap(),
            EtaMonomial::new(1, 0, [(1, 1), (4, 1), (2, -1)]).into()
        );
        assert_eq!(
            parse_product("phi(-q)").unwrap(),
            EtaMonomial::new(1, 0, [(1, 2), (2, -1)]).into()
        );
        assert_eq!(
            parse_product("(f1*f2)").unwrap(),
            EtaMonomial::new(1, 0, [(1, 1), (2, 1)]).into()
        );
    }

    #[test]
    fn caret_binds_tighter_than_unary_minus() {
        let ast = parse("-f1^2").unwrap();
        assert_eq!(
            ast,
            ExprAst::Neg(Box::new(ExprAst::Pow(Box::new(ExprAst::Eta(1)), 2)))
        );
    }

    #[test]
    fn division_is_left_associative() {
        let a = parse_product("f2^5/f1^2/f4^2").unwrap();
        let b = parse_product("f2^5/(f1^2*f4^2)").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_exponent_literal() {
        assert_eq!(parse_product("f1^-2").unwrap(), parse_product("1/f1^2").unwrap());
    }

    #[test]
    fn sums_distribute_and_powers_expand() {
        let e = parse_product("(f1 + q*f2)^2").unwrap();
        assert_eq!(e.terms().len(), 3);
        assert_eq!(parse_product("f1 - f1").unwrap(), ProductExpr::zero());
    }

    #[test]
    fn non_normalizable_constructs() {
        for text in ["1/(f1 + f2)", "f1/(2*f2)", "f1/q", "(f1+f2)^-1", "f1/0"] {
            assert!(
                matches!(parse_product(text), Err(ExprError::Lower(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn fixture_strings_round_trip() {
        for text in [
            "2*f8^2/f4 - f2^3*f4^2/f1^2",
            "f2*f8^5/(f4^2*f16^2) - 2*q*f2*f16^2/f8",
            "f6*f9^6/(f3*f18^3) + 4*q^3*f3^2*f18^6/(f6^2*f9^3) - 3*q*f9^3",
            "2*f1^3 - psi(-q)",
            "-(f1 - -f2)^3",
            "phi(q)^2 - 4*q*psi(q)^2*f1^-1",
        ] {
            let ast = parse(text).unwrap();
            let printed = ast.to_string();
            assert_eq!(parse(&printed).unwrap(), ast, "{text} -> {printed}");
        }
    }

    fn arb_ast() -> impl Strategy<Value = ExprAst> {
        let leaf = prop_oneof![
            (0u32..50).prop_map(|n| ExprAst::Int(n.into())),
            Just(ExprAst::Q),
            (1u32..40).prop_map(ExprAst::Eta),
            Just(ExprAst::Theta(Theta::Psi(ThetaArg::Minus))),
            Just(ExprAst::Theta(Theta::Phi(ThetaArg::Plus))),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|x| ExprAst::Neg(Box::new(x))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| ExprAst::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| ExprAst::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| ExprAst::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| ExprAst::Div(Box::new(a), Box::new(b))),
                (inner, -3i64..4).prop_map(|(x, e)| ExprAst::Pow(Box::new(x), e)),
            ]
        })
    }

    proptest! {
        #[test]
        fn pretty_print_reparses(ast in arb_ast()) {
            let printed = ast.to_string();
            prop_assert_eq!(parse(&printed).unwrap(), ast);
        }
    }
}
