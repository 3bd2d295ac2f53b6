//! Polynomial expression language over the real coordinates
//! `x1, y1, ..., xn, yn` with complex sugar `z_k = x_k + i y_k`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' natural)?
//! atom   := number | 'i' | xK | yK | zK | func '(' expr ')' | '(' expr ')'
//! func   := Re | Im | conj | abs2
//! ```
//!
//! Division is accepted only by expressions free of variables.

use std::fmt;

use levitype_core::{Rational, TruncatedSeries};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct ParseError {
    /// 1-based character column, 0 when the error is not tied to a position.
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn at(column: usize, message: impl Into<String>) -> Self {
        ParseError {
            column,
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coord {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Re,
    Im,
    Conj,
    Abs2,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Re => "Re",
            Func::Im => "Im",
            Func::Conj => "conj",
            Func::Abs2 => "abs2",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "Re" => Func::Re,
            "Im" => Func::Im,
            "conj" => Func::Conj,
            "abs2" => Func::Abs2,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    /// The imaginary unit.
    I,
    /// Coordinate with 1-based index.
    Var(Coord, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Upper bound on the polynomial degree.
    pub fn degree_bound(&self) -> u32 {
        match self {
            Expr::Num(_) | Expr::I => 0,
            Expr::Var(..) => 1,
            Expr::Neg(a) | Expr::Call(Func::Re | Func::Im | Func::Conj, a) => a.degree_bound(),
            Expr::Call(Func::Abs2, a) => 2 * a.degree_bound(),
            Expr::Add(a, b) | Expr::Sub(a, b) => a.degree_bound().max(b.degree_bound()),
            Expr::Mul(a, b) => a.degree_bound() + b.degree_bound(),
            Expr::Div(a, _) => a.degree_bound(),
            Expr::Pow(a, e) => a.degree_bound() * e,
        }
    }

    fn has_variables(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::I => false,
            Expr::Var(..) => true,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.has_variables(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_variables() || b.has_variables()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    /// Expands into real and imaginary parts, each a series in `2n`
    /// variables truncated at `cap`.
    pub fn evaluate(&self, n: usize, cap: u32) -> Result<(TruncatedSeries, TruncatedSeries), ParseError> {
        let d = 2 * n;
        let zero = || TruncatedSeries::zero(d, cap);
        let var = |i: usize| TruncatedSeries::variable(d, cap, i).expect("index checked by the parser");
        Ok(match self {
            Expr::Num(c) => (TruncatedSeries::constant(d, cap, c.clone()), zero()),
            Expr::I => (zero(), TruncatedSeries::one(d, cap)),
            Expr::Var(kind, k) => {
                if *k == 0 || *k > n {
                    return Err(ParseError::at(0, format!("variable index {k} out of range for n = {n}")));
                }
                let (x, y) = (var(2 * k - 2), var(2 * k - 1));
                match kind {
                    Coord::X => (x, zero()),
                    Coord::Y => (y, zero()),
                    Coord::Z => (x, y),
                }
            }
            Expr::Neg(a) => {
                let (re, im) = a.evaluate(n, cap)?;
                (-&re, -&im)
            }
            Expr::Add(a, b) => {
                let ((ar, ai), (br, bi)) = (a.evaluate(n, cap)?, b.evaluate(n, cap)?);
                (&ar + &br, &ai + &bi)
            }
            Expr::Sub(a, b) => {
                let ((ar, ai), (br, bi)) = (a.evaluate(n, cap)?, b.evaluate(n, cap)?);
                (&ar - &br, &ai - &bi)
            }
            Expr::Mul(a, b) => complex_mul(&a.evaluate(n, cap)?, &b.evaluate(n, cap)?),
            Expr::Div(a, b) => {
                if b.has_variables() {
                    return Err(ParseError::at(0, format!("division by non-constant expression {b}")));
                }
                let (br, bi) = b.evaluate(n, cap)?;
                let (cr, ci) = (br.constant_term().unwrap_or_else(|_| Rational::zero()), bi.constant_term().unwrap_or_else(|_| Rational::zero()));
                let norm = &cr * &cr + &ci * &ci;
                if norm.is_zero() {
                    return Err(ParseError::at(0, format!("division by zero in {b}")));
                }
                let inv = (
                    TruncatedSeries::constant(d, cap, &cr / &norm),
                    TruncatedSeries::constant(d, cap, -(&ci / &norm)),
                );
                complex_mul(&a.evaluate(n, cap)?, &inv)
            }
            Expr::Pow(a, e) => {
                let base = a.evaluate(n, cap)?;
                let mut acc = (TruncatedSeries::one(d, cap), zero());
                for _ in 0..*e {
                    acc = complex_mul(&acc, &base);
                }
                acc
            }
            Expr::Call(f, a) => {
                let (re, im) = a.evaluate(n, cap)?;
                match f {
                    Func::Re => (re, zero()),
                    Func::Im => (im, zero()),
                    Func::Conj => (re, -&im),
                    Func::Abs2 => (&(&re * &re) + &(&im * &im), zero()),
                }
            }
        })
    }

    /// The real series of the expression; fails if it has an imaginary part.
    pub fn to_series(&self, n: usize, cap: u32) -> Result<TruncatedSeries, ParseError> {
        let (re, im) = self.evaluate(n, cap)?;
        if !im.is_zero() {
            return Err(ParseError::at(0, format!("expression {self} is not real-valued")));
        }
        Ok(re)
    }
}

fn complex_mul(
    a: &(TruncatedSeries, TruncatedSeries),
    b: &(TruncatedSeries, TruncatedSeries),
) -> (TruncatedSeries, TruncatedSeries) {
    (
        &(&a.0 * &b.0) - &(&a.1 * &b.1),
        &(&a.0 * &b.1) + &(&a.1 * &b.0),
    )
}

fn write_number(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        return write!(f, "{}", c.numer());
    }
    match terminating_decimal(c) {
        Some(s) => f.write_str(&s),
        None => write!(f, "({}/{})", c.numer(), c.denom()),
    }
}

/// Exact decimal expansion when the denominator has only factors 2 and 5.
fn terminating_decimal(c: &Rational) -> Option<String> {
    let mut den = c.denom().clone();
    let (two, five, ten) = (BigInt::from(2), BigInt::from(5), BigInt::from(10));
    let mut digits = 0usize;
    let mut scale = BigInt::one();
    while !den.is_one() {
        if (&den % &two).is_zero() {
            den /= &two;
        } else if (&den % &five).is_zero() {
            den /= &five;
        } else {
            return None;
        }
        digits += 1;
        scale *= &ten;
    }
    // scale may overshoot the minimum; trailing zeros are trimmed below
    let scaled = (c * Rational::from_integer(scale.clone())).to_integer();
    let neg = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    while s.len() <= digits {
        s.insert(0, '0');
    }
    let (int, frac) = s.split_at(s.len() - digits);
    let frac = frac.trim_end_matches('0');
    Some(format!("{}{}.{}", if neg { "-" } else { "" }, int, frac))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(c) if c.is_negative() => write!(f, "(-{})", Num(&-c)),
            Expr::Num(c) => write_number(f, c),
            Expr::I => f.write_str("i"),
            Expr::Var(kind, k) => {
                let c = match kind {
                    Coord::X => 'x',
                    Coord::Y => 'y',
                    Coord::Z => 'z',
                };
                write!(f, "{c}{k}")
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                child(f, a, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                child(f, a, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                child(f, b, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                child(f, a, 2)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                child(f, b, 3)
            }
            Expr::Pow(a, e) => {
                child(f, a, 5)?;
                write!(f, "^{e}")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Num<'a>(&'a Rational);

impl fmt::Display for Num<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_number(f, self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            let value = parse_decimal(&lit).ok_or_else(|| ParseError::at(col, format!("malformed number '{lit}'")))?;
            out.push((col, Tok::Num(value)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((col, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((col, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ParseError::at(col, format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

/// Parses `123`, `1.25` or `.5` exactly.
pub fn parse_decimal(lit: &str) -> Option<Rational> {
    let (int, frac) = match lit.split_once('.') {
        Some((a, b)) => (a, b),
        None => (lit, ""),
    };
    if (int.is_empty() && frac.is_empty()) || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = BigInt::from(10).pow(frac.len() as u32);
    Some(Rational::new(num, den))
}

/// Parses a signed rational: `-3`, `2/7`, `-0.125`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let value = match body.split_once('/') {
        Some((a, b)) => {
            let (a, b) = (parse_decimal(a.trim())?, parse_decimal(b.trim())?);
            if b.is_zero() {
                return None;
            }
            a / b
        }
        None => parse_decimal(body)?,
    };
    Some(if neg { -value } else { value })
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(c, _)| *c)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(ParseError::at(self.column(), format!("expected '{op}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek() == Some(&Tok::Op('/')) {
                let col = self.column();
                self.pos += 1;
                let rhs = self.unary()?;
                if rhs.has_variables() {
                    return Err(ParseError::at(col, "division is only allowed by a constant"));
                }
                lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let col = self.column();
        match self.toks.get(self.pos) {
            Some((_, Tok::Num(e))) if e.is_integer() && !e.is_negative() => {
                let e = u32::try_from(e.to_integer())
                    .map_err(|_| ParseError::at(col, "exponent is too large"))?;
                self.pos += 1;
                Ok(Expr::Pow(Box::new(base), e))
            }
            _ => Err(ParseError::at(col, "exponent must be a natural number")),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let col = self.column();
        let Some((_, tok)) = self.toks.get(self.pos).cloned() else {
            return Err(ParseError::at(col, "unexpected end of input"));
        };
        self.pos += 1;
        match tok {
            Tok::Num(c) => Ok(Expr::Num(c)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Op(c) => Err(ParseError::at(col, format!("unexpected '{c}'"))),
            Tok::Ident(name) => {
                if name == "i" {
                    return Ok(Expr::I);
                }
                if let Some(func) = Func::from_name(&name) {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(func, Box::new(e)));
                }
                let mut chars = name.chars();
                let kind = match chars.next() {
                    Some('x') => Coord::X,
                    Some('y') => Coord::Y,
                    Some('z') => Coord::Z,
                    _ => return Err(ParseError::at(col, format!("unknown identifier '{name}'"))),
                };
                let k: usize = chars
                    .as_str()
                    .parse()
                    .map_err(|_| ParseError::at(col, format!("unknown identifier '{name}'")))?;
                if k == 0 || k > self.n {
                    return Err(ParseError::at(col, format!("variable '{name}' out of range for n = {}", self.n)));
                }
                Ok(Expr::Var(kind, k))
            }
        }
    }
}

/// Parses `text` into an expression tree over `C^n`.
pub fn parse(text: &str, n: usize) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count() + 1,
        n,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ParseError::at(p.column(), "unexpected trailing input"));
    }
    Ok(e)
}

/// Parses and expands `text` into a real series truncated at `cap`.
pub fn parse_expression(text: &str, n: usize, cap: u32) -> Result<TruncatedSeries, ParseError> {
    parse(text, n)?.to_series(n, cap)
}

/// Coordinate names `x1, y1, ..., xn, yn` for pretty-printing series.
pub fn coordinate_names(n: usize) -> Vec<String> {
    (1..=n).flat_map(|k| [format!("x{k}"), format!("y{k}")]).collect()
}

/// Renders a series in the input language.
pub fn series_to_string(s: &TruncatedSeries, n: usize) -> String {
    let names = coordinate_names(n);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    s.display_with(&refs).to_string()
}
