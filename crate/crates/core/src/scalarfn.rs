//! Scalar functions of one real variable `t`.
//!
//! Expressions are parsed from text into an [`Expr`] tree and evaluated
//! either on plain `f64` or on [`Dual`] numbers, which carry an exact forward
//! derivative alongside the value. Both evaluations go through the same
//! generic routine, so the value part of [`ScalarFunction::eval_dual`] is
//! bit-identical to [`ScalarFunction::eval`].
//!
//! Grammar:
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := "-" factor | atom ("^" exponent)? ;
//! atom   := number | "t" | "(" expr ")" | ("exp"|"log"|"sqrt") "(" expr ")" ;
//! exponent := "-"? number | "(" "-"? number ")" ;
//! ```

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Divisors smaller than this in magnitude are a domain error.
pub const MIN_DIVISOR: f64 = 1e-300;

/// Expression tree over the single variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sqrt(Box<Expr>),
}

/// A parsed function `t -> f(t)` together with the text it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFunction {
    ast: Expr,
    source: String,
}

/// Open interval `(lo, hi)` with `lo > 0`; `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainInterval {
    pub lo: f64,
    pub hi: f64,
}

impl DomainInterval {
    pub const DEFAULT: DomainInterval = DomainInterval { lo: 1e-6, hi: 1e6 };

    /// Largest value used when sampling an interval unbounded above.
    const SAMPLING_CAP: f64 = 1e6;

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || lo <= 0.0 || lo.is_infinite() {
            return Err(Error::InvalidInterval(format!("lower bound {lo} must be positive and finite")));
        }
        if hi.is_nan() || lo >= hi {
            return Err(Error::InvalidInterval(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo < t && t < self.hi
    }

    /// Finite upper end used for sampling.
    pub fn sampling_hi(&self) -> f64 {
        if self.hi.is_finite() {
            self.hi
        } else {
            Self::SAMPLING_CAP.max(self.lo * 1e12)
        }
    }

    /// Draws a point log-uniformly from the interval, strictly inside it.
    pub fn sample_log_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (a, b) = (self.lo.ln(), self.sampling_hi().ln());
        loop {
            let x = rng.random_range(a..b).exp();
            if self.contains(x) {
                return x;
            }
        }
    }
}

impl Default for DomainInterval {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for DomainInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.lo, self.hi)
    }
}

/// Forward-mode dual number `value + deriv * eps`, `eps^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    pub fn new(value: f64, deriv: f64) -> Self {
        Self { value, deriv }
    }

    pub fn variable(t: f64) -> Self {
        Self::new(t, 1.0)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.value + o.value, self.deriv + o.deriv)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.value - o.value, self.deriv - o.deriv)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.value * o.value, self.deriv * o.value + self.value * o.deriv)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let q = self.value / o.value;
        Dual::new(q, (self.deriv - q * o.deriv) / o.value)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.deriv)
    }
}

/// Arithmetic needed by the evaluator; implemented for `f64` and [`Dual`].
trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    fn value(self) -> f64;
    fn finite(self) -> bool;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn value(self) -> f64 {
        self
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

impl Scalar for Dual {
    fn constant(c: f64) -> Self {
        Dual::new(c, 0.0)
    }
    fn value(self) -> f64 {
        self.value
    }
    fn finite(self) -> bool {
        self.value.is_finite() && self.deriv.is_finite()
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        Dual::new(e, e * self.deriv)
    }
    fn ln(self) -> Self {
        Dual::new(self.value.ln(), self.deriv / self.value)
    }
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        Dual::new(r, self.deriv / (2.0 * r))
    }
    fn powf(self, p: f64) -> Self {
        let d = if p == 0.0 { 0.0 } else { p * self.value.powf(p - 1.0) * self.deriv };
        Dual::new(self.value.powf(p), d)
    }
}

impl Expr {
    fn eval_generic<S: Scalar>(&self, t: S) -> Result<S> {
        let at = t.value();
        let checked = |x: S, what: &str| -> Result<S> {
            if x.finite() {
                Ok(x)
            } else {
                Err(Error::domain(at, format!("{what} is not finite")))
            }
        };
        match self {
            Expr::Const(c) => Ok(S::constant(*c)),
            Expr::Var => Ok(t),
            Expr::Neg(a) => Ok(-a.eval_generic(t)?),
            Expr::Add(a, b) => checked(a.eval_generic(t)? + b.eval_generic(t)?, "sum"),
            Expr::Sub(a, b) => checked(a.eval_generic(t)? - b.eval_generic(t)?, "difference"),
            Expr::Mul(a, b) => checked(a.eval_generic(t)? * b.eval_generic(t)?, "product"),
            Expr::Div(a, b) => {
                let num = a.eval_generic(t)?;
                let den = b.eval_generic(t)?;
                if den.value().abs() < MIN_DIVISOR {
                    return Err(Error::domain(at, "division by zero"));
                }
                checked(num / den, "quotient")
            }
            Expr::Pow(a, p) => {
                let base = a.eval_generic(t)?;
                if base.value() < 0.0 && p.fract() != 0.0 {
                    return Err(Error::domain(at, format!("negative base to fractional power {p}")));
                }
                if base.value() == 0.0 && *p < 0.0 {
                    return Err(Error::domain(at, "zero to a negative power"));
                }
                checked(base.powf(*p), "power")
            }
            Expr::Exp(a) => checked(a.eval_generic(t)?.exp(), "exp"),
            Expr::Log(a) => {
                let x = a.eval_generic(t)?;
                if x.value().is_nan() || x.value() <= 0.0 {
                    return Err(Error::domain(at, format!("log of non-positive value {}", x.value())));
                }
                checked(x.ln(), "log")
            }
            Expr::Sqrt(a) => {
                let x = a.eval_generic(t)?;
                if x.value() < 0.0 {
                    return Err(Error::domain(at, format!("sqrt of negative value {}", x.value())));
                }
                checked(x.sqrt(), "sqrt")
            }
        }
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesised form; re-parsing it yields the same tree up to
    /// `Const(-c)` becoming `Neg(Const(c))`, which evaluates identically.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => write!(f, "t"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, p) => write!(f, "({a})^{p:?}"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

impl ScalarFunction {
    /// Parses `text` according to the module grammar.
    pub fn parse(text: &str) -> Result<Self> {
        let ast = Parser::new(text)?.parse_all()?;
        Ok(Self {
            ast,
            source: text.trim().to_string(),
        })
    }

    pub fn from_expr(ast: Expr) -> Self {
        let source = ast.to_string();
        Self { ast, source }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::domain(t, "argument is not finite"));
        }
        self.ast.eval_generic(t)
    }

    /// Evaluates and additionally requires `t` to lie in `domain`.
    pub fn eval_in(&self, t: f64, domain: &DomainInterval) -> Result<f64> {
        if !domain.contains(t) {
            return Err(Error::domain(t, format!("outside the domain {domain}")));
        }
        self.eval(t)
    }

    /// Value and exact derivative by forward-mode dual arithmetic.
    pub fn eval_dual(&self, t: f64) -> Result<(f64, f64)> {
        if !t.is_finite() {
            return Err(Error::domain(t, "argument is not finite"));
        }
        let d = self.ast.eval_generic(Dual::variable(t))?;
        Ok((d.value, d.deriv))
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.eval_dual(t).map(|(_, d)| d)
    }

    /// The companion `g(t) = t / f(t)`, built symbolically without simplification.
    ///
    /// The map is an involution on functions: the companion of `g` is `f`
    /// pointwise.
    pub fn companion(&self) -> ScalarFunction {
        ScalarFunction {
            ast: Expr::Div(Box::new(Expr::Var), Box::new(self.ast.clone())),
            source: format!("t/({})", self.source),
        }
    }
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}

impl std::str::FromStr for ScalarFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| Error::Syntax {
                        offset: start,
                        message: format!("malformed number `{lit}`"),
                    })?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Self {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> Error {
        Error::Syntax {
            offset: self.offset(),
            message: format!("expected {wanted}, found {}", self.peek()),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn parse_all(mut self) -> Result<Expr> {
        let e = self.expr()?;
        if *self.peek() != Tok::End {
            return Err(self.unexpected("operator or end of input"));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let p = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), p));
        }
        Ok(base)
    }

    /// Signed numeric literal, optionally parenthesised.
    fn exponent(&mut self) -> Result<f64> {
        let start = self.offset();
        let parenthesised = *self.peek() == Tok::LParen;
        if parenthesised {
            self.bump();
        }
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let value = match self.peek() {
            Tok::Num(x) => *x,
            Tok::Ident(_) | Tok::LParen => return Err(Error::NonConstantExponent { offset: start }),
            _ => return Err(self.unexpected("numeric exponent")),
        };
        self.bump();
        if parenthesised {
            if *self.peek() != Tok::RParen {
                return Err(Error::NonConstantExponent { offset: start });
            }
            self.bump();
        }
        Ok(if negative { -value } else { value })
    }

    fn atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(x) => Ok(Expr::Const(x)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "t" => Ok(Expr::Var),
                "exp" | "log" | "sqrt" => {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = Box::new(self.expr()?);
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(match name.as_str() {
                        "exp" => Expr::Exp(arg),
                        "log" => Expr::Log(arg),
                        _ => Expr::Sqrt(arg),
                    })
                }
                _ => Err(Error::UnknownIdentifier { name, offset }),
            },
            tok => Err(Error::Syntax {
                offset,
                message: format!("expected number, `t`, `(` or function, found {tok}"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> ScalarFunction {
        ScalarFunction::parse(s).unwrap()
    }

    #[test]
    fn parse_and_eval_basics() {
        assert_eq!(f("t").eval(3.0).unwrap(), 3.0);
        assert_eq!(f("t^2").eval(2.0).unwrap(), 4.0);
        assert_eq!(f("t/(1+t)").eval(1.0).unwrap(), 0.5);
        assert_eq!(f("exp(t)").eval(0.0).unwrap(), 1.0);
        assert_eq!(f("t^0.5").eval(4.0).unwrap(), 2.0);
        assert_eq!(f("t/(t^2)").eval(2.0).unwrap(), 0.5);
    }

    #[test]
    fn precedence() {
        assert_eq!(f("-t^2").eval(3.0).unwrap(), -9.0);
        assert_eq!(f("1 + 2 * t").eval(3.0).unwrap(), 7.0);
        assert_eq!(f("8 / 2 / 2").eval(1.0).unwrap(), 2.0);
        assert_eq!(f("2 - 3 - 4").eval(1.0).unwrap(), -5.0);
        assert_eq!(f("--t").eval(3.0).unwrap(), 3.0);
        assert_eq!(f("t^-1").eval(4.0).unwrap(), 0.25);
        assert_eq!(f("t^(-2)").eval(2.0).unwrap(), 0.25);
        assert_eq!(f(" 1.5e1 * t ").eval(2.0).unwrap(), 30.0);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        assert_eq!(
            ScalarFunction::parse("t + x").unwrap_err(),
            Error::UnknownIdentifier { name: "x".into(), offset: 4 }
        );
        assert_eq!(ScalarFunction::parse("t^t").unwrap_err(), Error::NonConstantExponent { offset: 2 });
        assert_eq!(ScalarFunction::parse("2^(t+1)").unwrap_err(), Error::NonConstantExponent { offset: 2 });
        assert!(matches!(ScalarFunction::parse("t +").unwrap_err(), Error::Syntax { offset: 3, .. }));
        assert!(matches!(ScalarFunction::parse("(t").unwrap_err(), Error::Syntax { offset: 2, .. }));
        assert!(matches!(ScalarFunction::parse("t $ 2").unwrap_err(), Error::Syntax { offset: 2, .. }));
        assert!(matches!(ScalarFunction::parse("t t").unwrap_err(), Error::Syntax { offset: 2, .. }));
        assert!(matches!(ScalarFunction::parse("t^2^3").unwrap_err(), Error::Syntax { offset: 3, .. }));
        assert!(matches!(ScalarFunction::parse("").unwrap_err(), Error::Syntax { offset: 0, .. }));
        assert!(matches!(ScalarFunction::parse("1..2").unwrap_err(), Error::Syntax { offset: 0, .. }));
    }

    #[test]
    fn domain_errors() {
        assert!(f("log(t)").eval(0.0).unwrap_err().is_domain());
        assert!(f("sqrt(t)").eval(-1.0).unwrap_err().is_domain());
        assert!(f("1/t").eval(0.0).unwrap_err().is_domain());
        assert!(f("1/t").eval(1e-301).unwrap_err().is_domain());
        assert!(f("t^0.5").eval(-4.0).unwrap_err().is_domain());
        assert!(f("exp(t)").eval(1000.0).unwrap_err().is_domain());
        assert!(f("sqrt(t)").eval_dual(0.0).unwrap_err().is_domain());
        assert_eq!(f("t^2").eval(-3.0).unwrap(), 9.0);
        let dom = DomainInterval::new(1.0, 2.0).unwrap();
        assert!(f("t").eval_in(2.0, &dom).unwrap_err().is_domain());
        assert_eq!(f("t").eval_in(1.5, &dom).unwrap(), 1.5);
    }

    #[test]
    fn dual_derivatives() {
        assert_eq!(f("t^2").eval_dual(3.0).unwrap(), (9.0, 6.0));
        let e = std::f64::consts::E;
        assert_eq!(f("exp(t)").eval_dual(1.0).unwrap(), (e, e));
        let (v, d) = f("log(t)").eval_dual(2.0).unwrap();
        assert_eq!((v, d), (2f64.ln(), 0.5));
        let (_, d) = f("sqrt(t)").eval_dual(4.0).unwrap();
        assert_eq!(d, 0.25);
        let (_, d) = f("1/t").eval_dual(2.0).unwrap();
        assert_eq!(d, -0.25);
        assert_eq!(f("3").eval_dual(2.0).unwrap(), (3.0, 0.0));
        assert_eq!(f("t^0").eval_dual(2.0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn power_derivative_against_central_difference() {
        // oracle: central difference, independent of the dual-number rules
        let func = f("t^1.7");
        let t = 2.0;
        let h = 1e-6;
        let fd = (func.eval(t + h).unwrap() - func.eval(t - h).unwrap()) / (2.0 * h);
        let (v, d) = func.eval_dual(t).unwrap();
        assert_eq!(v, 2f64.powf(1.7));
        assert!((d - 1.7 * 2f64.powf(0.7)).abs() <= 1e-12);
        assert!((d - fd).abs() <= 1e-5 * d.abs().max(1.0));
    }

    #[test]
    fn companion_pairs() {
        let g = f("t^2").companion();
        assert_eq!(g.eval(2.0).unwrap(), 0.5);
        let g = f("t").companion();
        assert_eq!(g.eval(7.3).unwrap(), 1.0);
        let g = f("1/t").companion();
        assert!((g.eval(3.0).unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(g.source(), "t/(1/t)");
        // involution, pointwise
        let ff = f("sqrt(t) + 1").companion().companion();
        for &t in &[0.1, 1.0, 5.0] {
            let a = ff.eval(t).unwrap();
            let b = f("sqrt(t) + 1").eval(t).unwrap();
            assert!((a - b).abs() <= 1e-14 * b.abs());
        }
    }

    #[test]
    fn printing_reparses_to_same_values() {
        for src in ["-t^2", "t/(1+t)", "exp(-t)*log(1+t)", "sqrt(t)^-1.5", "2.5e-3 - t", "-(3)"] {
            let a = f(src);
            let b = f(&a.to_string());
            for &t in &[0.3, 1.0, 2.7] {
                assert_eq!(a.eval(t).unwrap().to_bits(), b.eval(t).unwrap().to_bits(), "{src}");
            }
        }
        let neg = ScalarFunction::from_expr(Expr::Mul(Box::new(Expr::Const(-2.0)), Box::new(Expr::Var)));
        assert_eq!(f(&neg.to_string()).eval(3.0).unwrap(), -6.0);
    }

    #[test]
    fn interval_validation_and_sampling() {
        assert!(DomainInterval::new(0.0, 1.0).is_err());
        assert!(DomainInterval::new(2.0, 1.0).is_err());
        assert!(DomainInterval::new(1.0, f64::INFINITY).is_ok());
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let dom = DomainInterval::new(1e-3, 1e3).unwrap();
        for _ in 0..1000 {
            assert!(dom.contains(dom.sample_log_uniform(&mut rng)));
        }
        let open = DomainInterval::new(1.0, f64::INFINITY).unwrap();
        assert!(open.sample_log_uniform(&mut rng) < 1e6 + 1.0);
    }
}
