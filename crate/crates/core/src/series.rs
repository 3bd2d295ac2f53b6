//! Truncated multivariate power series over exact rationals.
//!
//! A [`TruncatedSeries`] carries its degree cap explicitly together with the
//! highest degree through which its coefficients are known exactly. Formal
//! differentiation lowers that precision by one; products, sums and
//! compositions take the minimum of their inputs. Coefficients beyond the
//! known precision are never stored.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use crate::{Error, Rational, Result};

/// Exponent vector of a monomial.
///
/// Ordered graded-lexicographically: lower total degree first, and within a
/// degree the exponent of the first variable decides (`x1^2 < x1*x2 < x2^2`).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(SmallVec<[u8; 8]>);

impl MultiIndex {
    pub fn zero(nvars: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, nvars))
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut m = Self::zero(nvars);
        m.0[var] = 1;
        m
    }

    /// Panics if an exponent exceeds 255.
    pub fn new(exponents: &[u32]) -> Self {
        MultiIndex(
            exponents
                .iter()
                .map(|&e| u8::try_from(e).expect("exponent exceeds 255"))
                .collect(),
        )
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| u32::from(e)).sum()
    }

    pub fn exponent(&self, var: usize) -> u32 {
        u32::from(self.0[var])
    }

    fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn with_exponent(&self, var: usize, e: u32) -> MultiIndex {
        let mut m = self.clone();
        m.0[var] = e as u8;
        m
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact Taylor polynomial in `nvars` variables, truncated at total degree `cap`.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    nvars: usize,
    cap: u32,
    /// Highest degree known exactly; `-1` when not even the constant term is.
    exact: i32,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl TruncatedSeries {
    pub fn zero(nvars: usize, cap: u32) -> Self {
        assert!(cap <= 255, "degree cap exceeds 255");
        TruncatedSeries {
            nvars,
            cap,
            exact: cap as i32,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, cap: u32, c: Rational) -> Self {
        let mut s = Self::zero(nvars, cap);
        if !c.is_zero() {
            s.terms.insert(MultiIndex::zero(nvars), c);
        }
        s
    }

    pub fn one(nvars: usize, cap: u32) -> Self {
        Self::constant(nvars, cap, Rational::one())
    }

    /// The coordinate function of variable `var`.
    pub fn variable(nvars: usize, cap: u32, var: usize) -> Result<Self> {
        if var >= nvars {
            return Err(Error::VariableOutOfRange { var, nvars });
        }
        let mut s = Self::zero(nvars, cap);
        if cap >= 1 {
            s.terms.insert(MultiIndex::unit(nvars, var), Rational::one());
        }
        Ok(s)
    }

    /// Builds a series from `(exponents, coefficient)` pairs; terms above the
    /// cap are dropped and repeated exponents accumulate.
    pub fn from_terms<I>(nvars: usize, cap: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Rational)>,
    {
        let mut s = Self::zero(nvars, cap);
        for (m, c) in terms {
            if m.len() != nvars {
                return Err(Error::ShapeMismatch {
                    what: "multi-index length",
                    left: m.len(),
                    right: nvars,
                });
            }
            if m.degree() <= cap {
                s.accumulate(m, c);
            }
        }
        Ok(s)
    }

    /// Linear form `sum_i coeffs[i] * v_i`.
    pub fn linear(nvars: usize, cap: u32, coeffs: &[Rational]) -> Result<Self> {
        Self::from_terms(
            nvars,
            cap,
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (MultiIndex::unit(nvars, i), c.clone())),
        )
    }

    fn accumulate(&mut self, m: MultiIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Highest total degree whose coefficients are exact, if any.
    pub fn reliable_degree(&self) -> Option<u32> {
        u32::try_from(self.exact).ok()
    }

    pub(crate) fn exact_i32(&self) -> i32 {
        self.exact
    }

    /// Stored (nonzero, reliable) terms in graded lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &MultiIndex) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coefficient_of(&self, exponents: &[u32]) -> Rational {
        self.coefficient(&MultiIndex::new(exponents))
    }

    /// Value at the origin; fails when not even the constant term is known.
    pub fn constant_term(&self) -> Result<Rational> {
        if self.exact < 0 {
            return Err(Error::TruncationDepth {
                needed: 0,
                available: self.exact,
            });
        }
        Ok(self.coefficient(&MultiIndex::zero(self.nvars)))
    }

    /// True when every known coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest degree carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.terms.keys().next().map(MultiIndex::degree)
    }

    /// Highest degree carrying a nonzero coefficient.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    pub fn homogeneous_part(&self, d: u32) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter().filter(move |(m, _)| m.degree() == d)
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::ShapeMismatch {
                what: "number of variables",
                left: self.nvars,
                right: other.nvars,
            });
        }
        if self.cap != other.cap {
            return Err(Error::ShapeMismatch {
                what: "degree cap",
                left: self.cap as usize,
                right: other.cap as usize,
            });
        }
        Ok(())
    }

    fn with_precision(mut self, exact: i32) -> Self {
        let exact = exact.min(self.cap as i32).max(-1);
        if exact < self.exact {
            self.terms.retain(|m, _| (m.degree() as i32) <= exact);
        }
        self.exact = exact;
        self
    }

    /// Forgets every coefficient above degree `d`; the cap is unchanged.
    pub fn trimmed(&self, d: u32) -> Self {
        self.clone().with_precision(d.min(i32::MAX as u32) as i32)
    }

    /// Re-expresses the series under a different cap. Lowering the cap drops
    /// terms; raising it leaves the known precision where it was.
    pub fn recapped(&self, cap: u32) -> Self {
        assert!(cap <= 255, "degree cap exceeds 255");
        let mut s = self.clone();
        if cap < s.cap {
            s.terms.retain(|m, _| m.degree() <= cap);
            s.exact = s.exact.min(cap as i32);
        }
        s.cap = cap;
        s
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let exact = self.exact.min(other.exact);
        let mut out = self.clone().with_precision(exact);
        for (m, c) in &other.terms {
            if (m.degree() as i32) <= exact {
                out.accumulate(m.clone(), c.clone());
            }
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let exact = self.exact.min(other.exact);
        let mut out = self.clone().with_precision(exact);
        for (m, c) in &other.terms {
            if (m.degree() as i32) <= exact {
                out.accumulate(m.clone(), -c.clone());
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self {
            terms: BTreeMap::new(),
            ..self.clone()
        };
        if !c.is_zero() {
            out.terms = self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect();
        }
        out
    }

    /// Cauchy product, discarding everything above the known precision.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let exact = self.exact.min(other.exact);
        let mut out = Self::zero(self.nvars, self.cap).with_precision(exact);
        if exact < 0 {
            return Ok(out);
        }
        let limit = exact as u32;
        // terms are degree-ordered, so both loops can stop early
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            if da > limit {
                break;
            }
            for (mb, cb) in &other.terms {
                if da + mb.degree() > limit {
                    break;
                }
                out.accumulate(ma.plus(mb), ca * cb);
            }
        }
        Ok(out)
    }

    /// Formal partial derivative in variable `var`; precision drops by one.
    pub fn partial(&self, var: usize) -> Result<Self> {
        if var >= self.nvars {
            return Err(Error::VariableOutOfRange {
                var,
                nvars: self.nvars,
            });
        }
        let mut out = Self::zero(self.nvars, self.cap).with_precision(self.exact - 1);
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            out.terms
                .insert(m.with_exponent(var, e - 1), c * Rational::from_integer(e.into()));
        }
        Ok(out)
    }

    /// Directional derivative `sum_i v[i] * d/dv_i` along a constant vector.
    pub fn directional(&self, v: &[Rational]) -> Result<Self> {
        if v.len() != self.nvars {
            return Err(Error::ShapeMismatch {
                what: "direction length",
                left: v.len(),
                right: self.nvars,
            });
        }
        let mut out = Self::zero(self.nvars, self.cap).with_precision(self.exact - 1);
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            out = out.try_add(&self.partial(i)?.scale(vi))?;
        }
        Ok(out)
    }

    /// `f(g_1, ..., g_m)` for series `g_i` without constant term.
    ///
    /// Substitution runs through cached powers of each `g_i`; the result is
    /// exact through the smallest precision among `f` and the `g_i`.
    pub fn compose(&self, g: &[TruncatedSeries]) -> Result<Self> {
        if g.len() != self.nvars {
            return Err(Error::Arity {
                expected: self.nvars,
                got: g.len(),
            });
        }
        let Some(first) = g.first() else {
            // zero variables: f is a constant
            return Err(Error::Arity {
                expected: 1,
                got: 0,
            });
        };
        let (target_vars, cap) = (first.nvars, first.cap);
        if self.cap != cap {
            return Err(Error::ShapeMismatch {
                what: "degree cap",
                left: self.cap as usize,
                right: cap as usize,
            });
        }
        for (index, gi) in g.iter().enumerate() {
            first.check_shape(gi)?;
            if !gi.constant_term()?.is_zero() {
                return Err(Error::NonzeroConstantTerm { index });
            }
        }
        let exact = g.iter().map(|s| s.exact).fold(self.exact, i32::min);
        let mut out = Self::zero(target_vars, cap).with_precision(exact);
        if exact < 0 {
            return Ok(out);
        }
        let limit = exact as u32;
        let trimmed: Vec<Self> = g.iter().map(|s| s.trimmed(limit)).collect();
        let mut powers: Vec<Vec<Self>> = trimmed
            .iter()
            .map(|_| vec![Self::one(target_vars, cap).with_precision(exact)])
            .collect();
        for (m, c) in &self.terms {
            if m.degree() > limit {
                break;
            }
            let mut term = Self::constant(target_vars, cap, c.clone()).with_precision(exact);
            for (var, &e) in m.exponents().iter().enumerate() {
                let e = usize::from(e);
                if e == 0 {
                    continue;
                }
                while powers[var].len() <= e {
                    let next = powers[var].last().unwrap().try_mul(&trimmed[var])?;
                    powers[var].push(next);
                }
                term = term.try_mul(&powers[var][e])?;
                if term.is_zero() {
                    break;
                }
            }
            out = out.try_add(&term)?;
        }
        Ok(out)
    }

    /// Multiplicative inverse of a series with nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c = self.constant_term()?;
        if c.is_zero() {
            return Err(Error::NotInvertible);
        }
        let c_inv = c.recip();
        // f = c (1 - h) with h(0) = 0, so 1/f = c^-1 (1 + h + h^2 + ...)
        let one = Self::one(self.nvars, self.cap).with_precision(self.exact);
        let h = one.try_sub(&self.scale(&c_inv))?;
        let mut acc = one.clone();
        for _ in 0..self.exact.max(0) {
            acc = one.try_add(&h.try_mul(&acc)?)?;
        }
        Ok(acc.scale(&c_inv))
    }

    pub fn try_div(&self, unit: &Self) -> Result<Self> {
        self.try_mul(&unit.inverse()?)
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::one(self.nvars, self.cap).with_precision(self.exact);
        for _ in 0..e {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    /// `x -> f(x + shift)`, treating the stored terms as a polynomial.
    ///
    /// Exact only when the series is the full polynomial, i.e. nothing was
    /// truncated above the cap; callers translate before truncating.
    pub fn translated(&self, shift: &[Rational]) -> Result<Self> {
        if shift.len() != self.nvars {
            return Err(Error::ShapeMismatch {
                what: "shift length",
                left: shift.len(),
                right: self.nvars,
            });
        }
        let mut out = Self::zero(self.nvars, self.cap).with_precision(self.exact);
        for (m, c) in &self.terms {
            // expand prod_i (x_i + s_i)^{e_i}
            let mut partial: Vec<(MultiIndex, Rational)> =
                vec![(MultiIndex::zero(self.nvars), c.clone())];
            for (var, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let e = u32::from(e);
                let mut next = Vec::new();
                for (pm, pc) in &partial {
                    for j in 0..=e {
                        let coeff = pc
                            * Rational::from_integer(binomial(e, j))
                            * pow_rational(&shift[var], e - j);
                        if coeff.is_zero() {
                            continue;
                        }
                        next.push((pm.with_exponent(var, j), coeff));
                    }
                }
                partial = next;
            }
            for (pm, pc) in partial {
                if (pm.degree() as i32) <= out.exact {
                    out.accumulate(pm, pc);
                }
            }
        }
        Ok(out)
    }

    /// Value of the stored polynomial at a rational point.
    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.nvars {
            return Err(Error::ShapeMismatch {
                what: "point length",
                left: point.len(),
                right: self.nvars,
            });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (var, &e) in m.exponents().iter().enumerate() {
                if e != 0 {
                    t *= pow_rational(&point[var], u32::from(e));
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Equality of all coefficients through degree `d` (both sides must know them).
    pub fn eq_through(&self, other: &Self, d: u32) -> bool {
        if self.nvars != other.nvars || (self.exact.min(other.exact)) < d as i32 {
            return false;
        }
        let low = |s: &Self| -> Vec<(MultiIndex, Rational)> {
            s.terms
                .iter()
                .filter(|(m, _)| m.degree() <= d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect()
        };
        low(self) == low(other)
    }

    /// Renders the series with the given variable names.
    pub fn display_with<'a>(&'a self, names: &'a [&'a str]) -> SeriesDisplay<'a> {
        SeriesDisplay {
            series: self,
            names,
        }
    }
}

/// Coefficient-wise equality through the precision both sides know exactly.
impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        if self.nvars != other.nvars || self.cap != other.cap {
            return false;
        }
        let d = self.exact.min(other.exact);
        if d < 0 {
            return true;
        }
        self.eq_through(other, d as u32)
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub(crate) fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub(crate) fn pow_rational(x: &Rational, e: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl $tr<&TruncatedSeries> for &TruncatedSeries {
            type Output = TruncatedSeries;

            /// Panics on mismatched shapes; use the `try_` form to handle them.
            fn $method(self, rhs: &TruncatedSeries) -> TruncatedSeries {
                self.$try(rhs).expect("series shape mismatch")
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn neg(self) -> TruncatedSeries {
        self.scale(&-Rational::one())
    }
}

pub struct SeriesDisplay<'a> {
    series: &'a TruncatedSeries,
    names: &'a [&'a str],
}

impl fmt::Display for SeriesDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.series;
        if s.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in s.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let is_const = m.degree() == 0;
            if is_const || !abs.is_one() {
                write!(f, "{}", abs)?;
                if !is_const {
                    f.write_str("*")?;
                }
            }
            let mut first = true;
            for (var, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                match self.names.get(var) {
                    Some(name) => f.write_str(name)?,
                    None => write!(f, "v{}", var + 1)?,
                }
                if e > 1 {
                    write!(f, "^{}", e)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display_with(&[]).fmt(f)
    }
}
