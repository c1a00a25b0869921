//! Polynomials in the level variable `n`.
//!
//! [`Poly`] holds nonnegative integer coefficients and is what parametric
//! generators store. [`RatPoly`] allows signed rational coefficients and is
//! used by the symbolic series tests.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Polynomial with nonnegative integer coefficients, `coeffs[k]` multiplies `n^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<BigUint>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: impl Into<BigUint>) -> Self {
        Poly::from_coeffs(vec![c.into()])
    }

    /// The monomial `n`.
    pub fn var() -> Self {
        Poly::from_coeffs(vec![BigUint::zero(), BigUint::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<BigUint>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, n: u64) -> BigUint {
        let x = BigUint::from(n);
        let mut acc = BigUint::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * &x + c;
        }
        acc
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = BigUint::zero();
        let coeffs = (0..len)
            .map(|k| self.coeffs.get(k).unwrap_or(&zero) + other.coeffs.get(k).unwrap_or(&zero))
            .collect();
        Poly::from_coeffs(coeffs)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![BigUint::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::from_coeffs(coeffs)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::constant(1u32);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Substitute `n -> n + shift`.
    pub fn shifted(&self, shift: u64) -> Poly {
        let s = Poly::from_coeffs(vec![BigUint::from(shift), BigUint::one()]);
        let mut out = Poly::zero();
        for c in self.coeffs.iter().rev() {
            out = out.mul(&s).add(&Poly::constant(c.clone()));
        }
        out
    }

    pub fn to_rat(&self) -> RatPoly {
        RatPoly::from_coeffs(
            self.coeffs
                .iter()
                .map(|c| BigRational::from_integer(BigInt::from(c.clone())))
                .collect(),
        )
    }

    /// Parse an expression over `n` built from nonnegative integer literals,
    /// `+`, `*`, `^` and parentheses.
    pub fn parse(text: &str) -> Result<Poly> {
        if text.contains('-') {
            return Err(Error::NegativeCoefficient(text.to_string()));
        }
        let tokens = tokenize(text)?;
        let mut p = Parser {
            tokens: &tokens,
            pos: 0,
            src: text,
        };
        let poly = p.expr()?;
        if p.pos != tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(poly)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (k, c.is_one()) {
                (0, _) => write!(f, "{c}")?,
                (1, true) => write!(f, "n")?,
                (1, false) => write!(f, "{c}*n")?,
                (_, true) => write!(f, "n^{k}")?,
                (_, false) => write!(f, "{c}*n^{k}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(BigUint),
    Var,
    Plus,
    Star,
    Caret,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => {}
            '+' => out.push(Token::Plus),
            '*' => out.push(Token::Star),
            '^' => out.push(Token::Caret),
            '(' => out.push(Token::Open),
            ')' => out.push(Token::Close),
            'n' => out.push(Token::Var),
            '0'..='9' => {
                let start = i;
                while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..=i].iter().collect();
                out.push(Token::Num(digits.parse().expect("digits")));
            }
            other => {
                return Err(Error::Expression {
                    expr: text.to_string(),
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Expression {
            expr: self.src.to_string(),
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        while self.peek() == Some(&Token::Plus) {
            self.pos += 1;
            acc = acc.add(&self.term()?);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            match self.peek() {
                Some(Token::Num(e)) => {
                    let e = e
                        .to_u32()
                        .filter(|&e| e <= 64)
                        .ok_or_else(|| self.error("exponent too large"))?;
                    self.pos += 1;
                    return Ok(base.pow(e));
                }
                _ => return Err(self.error("exponent must be an integer literal")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Poly::constant(v))
            }
            Some(Token::Var) => {
                self.pos += 1;
                Ok(Poly::var())
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(self.error("missing closing parenthesis"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.error("expected a literal, n, or a parenthesis")),
        }
    }
}

/// Polynomial with signed rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        RatPoly::from_coeffs(vec![c])
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs
            .last()
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = BigRational::zero();
        RatPoly::from_coeffs(
            (0..len)
                .map(|k| self.coeffs.get(k).unwrap_or(&zero) + other.coeffs.get(k).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> RatPoly {
        RatPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() || other.is_zero() {
            return RatPoly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        RatPoly::from_coeffs(coeffs)
    }

    /// Substitute `n -> n + shift` (shift may be negative).
    pub fn shifted(&self, shift: i64) -> RatPoly {
        let s = RatPoly::from_coeffs(vec![
            BigRational::from_integer(BigInt::from(shift)),
            BigRational::one(),
        ]);
        let mut out = RatPoly::zero();
        for c in self.coeffs.iter().rev() {
            out = out.mul(&s).add(&RatPoly::constant(c.clone()));
        }
        out
    }

    pub fn eval(&self, n: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * n + c;
        }
        acc
    }

    pub fn eval_int(&self, n: u64) -> BigRational {
        self.eval(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Smallest `n0 >= 1` with `p(n) >= 0` for every integer `n >= n0`, or
    /// `None` when the leading coefficient is negative or the root bound is
    /// too large to scan.
    pub fn nonneg_from(&self) -> Option<u64> {
        if self.is_zero() {
            return Some(1);
        }
        let lead = self.leading();
        if lead.is_negative() {
            return None;
        }
        // Cauchy bound: every real root lies below 1 + max |a_k / a_lead|.
        let mut bound = BigRational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let r = (c / &lead).abs();
            if r > bound {
                bound = r;
            }
        }
        let bound = (bound + BigRational::one()).ceil().to_integer().to_u64()?;
        if bound > 1_000_000 {
            return None;
        }
        let mut n = bound.max(1);
        while n >= 1 {
            if self.eval_int(n).is_negative() {
                return Some(n + 1);
            }
            n -= 1;
        }
        Some(1)
    }
}

impl RatPoly {
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Smallest `n0 <= limit` with `p(n) >= 0` for all integers `n >= n0`,
    /// established by checking that `p(limit + m)` has nonnegative
    /// coefficients. `None` when that check fails.
    pub fn nonneg_from_within(&self, limit: u64) -> Option<u64> {
        let limit = limit.max(1);
        if self
            .shifted(limit as i64)
            .coeffs
            .iter()
            .any(|c| c.is_negative())
        {
            return None;
        }
        let mut n = limit;
        while n > 1 && !self.eval_int(n - 1).is_negative() {
            n -= 1;
        }
        Some(n)
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            first = false;
            match (k, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "n")?,
                (1, false) => write!(f, "{a}*n")?,
                (_, true) => write!(f, "n^{k}")?,
                (_, false) => write!(f, "{a}*n^{k}")?,
            }
        }
        Ok(())
    }
}
