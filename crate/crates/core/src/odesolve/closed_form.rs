//! Closed forms `Σ_i p_i(t) e^{λ_i t}` and their canonical text form.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::dd::Dd;
use super::exact::ExpPoly;
use crate::poly::rational::{format_rational, parse_rational, to_f64};
use crate::poly::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Rational(Rational),
    Complex(Complex64),
}

impl Scalar {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Rational(r) => Complex64::new(to_f64(r), 0.0),
            Scalar::Complex(z) => *z,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Rational(r) => Some(r),
            Scalar::Complex(_) => None,
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Complex(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    fn is_negative(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_negative(),
            Scalar::Complex(z) => z.im == 0.0 && z.re < 0.0,
        }
    }

    fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Complex(z) => Scalar::Complex(-z),
        }
    }

    fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_one(),
            Scalar::Complex(z) => z.re == 1.0 && z.im == 0.0,
        }
    }

    /// Descending real part, then descending imaginary part.
    fn order_desc(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => b.cmp(a),
            _ => {
                let (a, b) = (self.to_complex(), other.to_complex());
                b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => f.write_str(&format_rational(r)),
            Scalar::Complex(z) if z.im == 0.0 => write!(f, "{}", z.re),
            Scalar::Complex(z) => {
                let sign = if z.im.is_sign_negative() { '-' } else { '+' };
                write!(f, "({}{sign}{}i)", z.re, z.im.abs())
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Rational(String),
    Complex([f64; 2]),
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Rational(r) => ScalarRepr::Rational(format_rational(r)),
            Scalar::Complex(z) => ScalarRepr::Complex([z.re, z.im]),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match ScalarRepr::deserialize(d)? {
            ScalarRepr::Rational(src) => parse_rational(&src)
                .map(Scalar::Rational)
                .ok_or_else(|| serde::de::Error::custom(format!("invalid rational {src:?}"))),
            ScalarRepr::Complex([re, im]) => Ok(Scalar::Complex(Complex64::new(re, im))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarKind {
    ExactRational,
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormTerm {
    pub lambda: Scalar,
    /// Polynomial coefficients in ascending degree of `t`.
    pub coeffs: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    terms: Vec<ClosedFormTerm>,
    scalar_kind: ScalarKind,
}

impl ClosedForm {
    /// Drops zero terms, trims trailing zero coefficients and sorts by descending λ.
    pub fn new(terms: Vec<ClosedFormTerm>, scalar_kind: ScalarKind) -> Self {
        let mut terms: Vec<ClosedFormTerm> = terms
            .into_iter()
            .filter_map(|mut t| {
                while t.coeffs.last().is_some_and(Scalar::is_zero) {
                    t.coeffs.pop();
                }
                (!t.coeffs.is_empty()).then_some(t)
            })
            .collect();
        terms.sort_by(|a, b| a.lambda.order_desc(&b.lambda));
        ClosedForm { terms, scalar_kind }
    }

    pub fn from_exp_poly(p: &ExpPoly) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|(lambda, coeffs)| ClosedFormTerm {
                lambda: Scalar::Rational(lambda.clone()),
                coeffs: coeffs.iter().cloned().map(Scalar::Rational).collect(),
            })
            .collect();
        ClosedForm::new(terms, ScalarKind::ExactRational)
    }

    pub fn terms(&self) -> &[ClosedFormTerm] {
        &self.terms
    }

    pub fn scalar_kind(&self) -> ScalarKind {
        self.scalar_kind
    }

    /// `(λ, coefficients)` pairs when every scalar is rational.
    pub fn exact_terms(&self) -> Option<Vec<(Rational, Vec<Rational>)>> {
        self.terms
            .iter()
            .map(|t| {
                let lambda = t.lambda.as_rational()?.clone();
                let coeffs = t.coeffs.iter().map(|c| c.as_rational().cloned()).collect::<Option<Vec<_>>>()?;
                Some((lambda, coeffs))
            })
            .collect()
    }

    /// Exact closed forms are summed in double-double precision so that large
    /// cancelling coefficients still give an accurate `f64`.
    pub fn eval(&self, t: f64) -> f64 {
        if let Some(terms) = self.exact_terms() {
            let td = Dd::from_f64(t);
            return terms
                .iter()
                .fold(Dd::ZERO, |acc, (lambda, coeffs)| {
                    let p = coeffs.iter().rev().fold(Dd::ZERO, |acc, c| acc * td + Dd::from_rational(c));
                    acc + p * (Dd::from_rational(lambda) * td).exp()
                })
                .to_f64();
        }
        self.terms
            .iter()
            .map(|term| {
                let p = term.coeffs.iter().rev().fold(Complex64::zero(), |acc, c| acc * t + c.to_complex());
                (p * (term.lambda.to_complex() * t).exp()).re
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("closed form serializes")
    }

    pub fn from_json(src: &str) -> serde_json::Result<Self> {
        serde_json::from_str(src)
    }
}

pub fn eval_closed_form(cf: &ClosedForm, t: f64) -> f64 {
    cf.eval(t)
}

fn power_of_t(d: usize) -> String {
    match d {
        0 => String::new(),
        1 => "t".into(),
        _ => format!("t^{d}"),
    }
}

/// `c*t^d` with unit coefficients elided.
fn monomial(c: &Scalar, d: usize) -> String {
    let t = power_of_t(d);
    if t.is_empty() {
        c.to_string()
    } else if c.is_one() {
        t
    } else if c.neg().is_one() {
        format!("-{t}")
    } else {
        format!("{c}*{t}")
    }
}

fn polynomial(coeffs: &[Scalar]) -> String {
    let mut out = String::new();
    for (d, c) in coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
        if out.is_empty() {
            out = monomial(c, d);
        } else if c.is_negative() {
            out += &format!(" - {}", monomial(&c.neg(), d));
        } else {
            out += &format!(" + {}", monomial(c, d));
        }
    }
    out
}

fn exponential(lambda: &Scalar) -> Option<String> {
    if lambda.is_zero() {
        None
    } else if lambda.is_one() {
        Some("exp(t)".into())
    } else if lambda.neg().is_one() {
        Some("exp(-t)".into())
    } else {
        Some(format!("exp({lambda}*t)"))
    }
}

/// A term as `(sign, text)`; single-monomial terms carry their sign outside.
fn render_term(term: &ClosedFormTerm) -> (bool, String) {
    let nonzero: Vec<(usize, &Scalar)> = term.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
    let exp = exponential(&term.lambda);
    if let [(d, c)] = nonzero[..] {
        let negative = c.is_negative();
        let mag = if negative { c.neg() } else { c.clone() };
        let text = match exp {
            None => monomial(&mag, d),
            Some(e) if d == 0 && mag.is_one() => e,
            Some(e) => format!("{}*{e}", monomial(&mag, d)),
        };
        return (negative, text);
    }
    let body = format!("({})", polynomial(&term.coeffs));
    (false, match exp {
        None => body,
        Some(e) => format!("{body}*{e}"),
    })
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            let (negative, text) = render_term(term);
            match (i, negative) {
                (0, true) => write!(f, "-{text}")?,
                (0, false) => f.write_str(&text)?,
                (_, true) => write!(f, " - {text}")?,
                (_, false) => write!(f, " + {text}")?,
            }
        }
        Ok(())
    }
}
