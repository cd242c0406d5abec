//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor ("*" factor)* ;
//! factor := ["-"] atom ;
//! atom   := number | ident ["^" uint] | "(" expr ")" ["^" uint] ;
//! number := uint ["." digits] | uint "/" uint ;
//! ```
//!
//! A `/` is only accepted between two integer literals.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::rational::{decimal, Rational};
use super::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    /// Byte offset into the source text.
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("exponent must be a non-negative integer, found `{0}`")]
    BadExponent(String),
    #[error("not a polynomial: {0}")]
    NonPolynomial(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(String),
    Decimal(String, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Other(char),
}

fn tokenize(src: &str) -> Vec<(usize, Tok)> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = src[i..].chars().next().unwrap();
        let start = i;
        if ch.is_whitespace() {
            i += ch.len_utf8();
            continue;
        }
        if ch.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let whole = &src[start..i];
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Decimal(whole.to_string(), src[fs..i].to_string())));
            } else {
                out.push((start, Tok::Int(whole.to_string())));
            }
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            while i < bytes.len() {
                let c = src[i..].chars().next().unwrap();
                if c.is_alphanumeric() || c == '_' {
                    i += c.len_utf8();
                } else {
                    break;
                }
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
            continue;
        }
        let tok = match ch {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            other => Tok::Other(other),
        };
        out.push((start, tok));
        i += ch.len_utf8();
    }
    out
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { position: self.offset(), kind }
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.err(ParseErrorKind::Syntax(msg.into()))
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn dim(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = acc.add(&rhs).expect("same dimension");
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = acc.sub(&rhs).expect("same dimension");
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = acc.mul(&rhs).expect("same dimension");
                }
                Some(Tok::Slash) => {
                    return Err(self.err(ParseErrorKind::NonPolynomial(
                        "division is only allowed between integer literals".into(),
                    )))
                }
                Some(Tok::Int(_) | Tok::Decimal(..) | Tok::Ident(_) | Tok::LParen) => {
                    return Err(self.syntax("expected operator (multiplication must be written with `*`)"))
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial, ParseError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(self.atom()?.neg());
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        let start = self.offset();
        match self.bump() {
            Some(Tok::Int(digits)) => {
                let num: BigInt = digits.parse().expect("digit run");
                if matches!(self.peek(), Some(Tok::Slash)) {
                    self.bump();
                    let den = match self.bump() {
                        Some(Tok::Int(d)) => d.parse::<BigInt>().expect("digit run"),
                        Some(Tok::Ident(_) | Tok::LParen) => {
                            self.pos -= 1;
                            return Err(self.err(ParseErrorKind::NonPolynomial(
                                "division by a non-literal".into(),
                            )));
                        }
                        _ => {
                            self.pos -= 1;
                            return Err(self.syntax("expected integer denominator after `/`"));
                        }
                    };
                    if den.is_zero() {
                        return Err(ParseError {
                            position: start,
                            kind: ParseErrorKind::Syntax("zero denominator".into()),
                        });
                    }
                    return Ok(Polynomial::constant(self.dim(), Rational::new(num, den)));
                }
                self.reject_power_of_literal()?;
                Ok(Polynomial::constant(self.dim(), Rational::from_integer(num)))
            }
            Some(Tok::Decimal(whole, frac)) => {
                let value = decimal(&whole, &frac).filter(|_| !frac.is_empty()).ok_or_else(|| ParseError {
                    position: start,
                    kind: ParseErrorKind::Syntax("malformed decimal literal".into()),
                })?;
                if matches!(self.peek(), Some(Tok::Slash)) {
                    return Err(self.err(ParseErrorKind::NonPolynomial(
                        "division is only allowed between integer literals".into(),
                    )));
                }
                self.reject_power_of_literal()?;
                Ok(Polynomial::constant(self.dim(), value))
            }
            Some(Tok::Ident(name)) => {
                let index = self.vars.iter().position(|v| *v == name).ok_or(ParseError {
                    position: start,
                    kind: ParseErrorKind::UnknownVariable(name),
                })?;
                let base = Polynomial::var(self.dim(), index);
                self.power(base)
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => self.power(inner),
                    _ => {
                        self.pos -= 1;
                        Err(self.syntax("expected `)`"))
                    }
                }
            }
            Some(Tok::Other(c)) => Err(ParseError {
                position: start,
                kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
            }),
            Some(_) => Err(ParseError {
                position: start,
                kind: ParseErrorKind::Syntax("expected number, variable or `(`".into()),
            }),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn reject_power_of_literal(&self) -> Result<(), ParseError> {
        if matches!(self.peek(), Some(Tok::Caret)) {
            return Err(self.syntax("`^` may only follow a variable or parenthesised expression"));
        }
        Ok(())
    }

    fn power(&mut self, base: Polynomial) -> Result<Polynomial, ParseError> {
        if !matches!(self.peek(), Some(Tok::Caret)) {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let bad = |text: String| ParseError { position: at, kind: ParseErrorKind::BadExponent(text) };
        match self.bump() {
            Some(Tok::Int(digits)) => {
                let e: u32 = digits.parse().map_err(|_| bad(digits.clone()))?;
                Ok(base.pow(e))
            }
            Some(Tok::Decimal(w, f)) => Err(bad(format!("{w}.{f}"))),
            Some(Tok::Minus) => {
                let rest = match self.peek() {
                    Some(Tok::Int(d)) => d.clone(),
                    _ => String::new(),
                };
                Err(bad(format!("-{rest}")))
            }
            Some(Tok::Ident(name)) => Err(bad(name)),
            _ => {
                self.pos -= 1;
                Err(self.syntax("expected exponent after `^`"))
            }
        }
    }
}

/// Parses `src` over the ordered variable list `vars`.
pub fn parse_polynomial(src: &str, vars: &[String]) -> Result<Polynomial, ParseError> {
    let mut parser = Parser { toks: tokenize(src), pos: 0, end: src.len(), vars };
    if parser.toks.is_empty() {
        return Err(parser.syntax("empty expression"));
    }
    let p = parser.expr()?;
    if parser.pos < parser.toks.len() {
        return Err(match parser.peek() {
            Some(Tok::RParen) => parser.syntax("unbalanced `)`"),
            _ => parser.syntax("unexpected trailing input"),
        });
    }
    Ok(p)
}

/// Exact rational constant expression, e.g. a parsed `"-1/2"`.
pub fn parse_constant(src: &str) -> Result<Rational, ParseError> {
    let p = parse_polynomial(src, &[])?;
    Ok(if p.is_zero() { Rational::zero() } else { p.constant_term() })
}
