//! Hypersurfaces, almost complex structures and vector-field calculus on
//! `R^{2n}` with coordinates ordered `(x1, y1, ..., xn, yn)`.
//!
//! The connection is the flat one of `R^{2n}`, so `∇_X Y` is the directional
//! derivative of `Y` along `X` and torsion-freeness reads
//! `∇_X Y - ∇_Y X = [X, Y]`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::linalg::{self, Matrix};
use crate::series::TruncatedSeries;
use crate::{Error, Rational, Result};

/// Real hypersurface `{phi = 0}` through the origin of `R^{2n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypersurface {
    n: usize,
    phi: TruncatedSeries,
}

impl Hypersurface {
    pub fn new(n: usize, phi: TruncatedSeries) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidHypersurface("dimension n must be positive".into()));
        }
        if phi.nvars() != 2 * n {
            return Err(Error::InvalidHypersurface(format!(
                "defining function has {} variables, expected {}",
                phi.nvars(),
                2 * n
            )));
        }
        if phi.cap() < 2 || phi.reliable_degree().unwrap_or(0) < 2 {
            return Err(Error::InvalidHypersurface(
                "defining function must be known through degree 2".into(),
            ));
        }
        if !phi.constant_term()?.is_zero() {
            return Err(Error::InvalidHypersurface("origin does not lie on M".into()));
        }
        let m = Hypersurface { n, phi };
        if linalg::is_zero_vec(&m.gradient_at_origin()) {
            return Err(Error::InvalidHypersurface("gradient of phi vanishes at 0".into()));
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn cap(&self) -> u32 {
        self.phi.cap()
    }

    pub fn phi(&self) -> &TruncatedSeries {
        &self.phi
    }

    pub fn gradient_at_origin(&self) -> Vec<Rational> {
        (0..self.dim())
            .map(|i| self.phi.coefficient(&crate::series::MultiIndex::unit(self.dim(), i)))
            .collect()
    }

    /// `dphi(0)(v)`.
    pub fn dphi_at_origin(&self, v: &[Rational]) -> Rational {
        linalg::dot(&self.gradient_at_origin(), v)
    }

    /// Hessian of `phi` at the origin.
    pub fn hessian_at_origin(&self) -> Matrix {
        let d = self.dim();
        let mut h = vec![vec![Rational::zero(); d]; d];
        for (m, c) in self.phi.homogeneous_part(2) {
            let vars: Vec<usize> = (0..d).filter(|&i| m.exponent(i) > 0).collect();
            match vars.as_slice() {
                [i] => h[*i][*i] = c * Rational::from_integer(2.into()),
                [i, j] => {
                    h[*i][*j] = c.clone();
                    h[*j][*i] = c.clone();
                }
                _ => unreachable!("degree two monomial"),
            }
        }
        h
    }

    /// `D^k phi(0)(v_1, ..., v_k)`.
    pub fn derivative_at_origin(&self, vectors: &[&[Rational]]) -> Result<Rational> {
        let mut f = self.phi.clone();
        for v in vectors {
            f = f.directional(v)?;
        }
        f.constant_term()
    }

    pub fn recapped(&self, cap: u32) -> Self {
        Hypersurface {
            n: self.n,
            phi: self.phi.recapped(cap),
        }
    }

    /// The same hypersurface cut out by `f * phi`; requires `f(0) > 0`.
    pub fn with_multiplier(&self, f: &TruncatedSeries) -> Result<Self> {
        if f.constant_term()? <= Rational::zero() {
            return Err(Error::InvalidHypersurface(
                "defining-function multiplier must be positive at 0".into(),
            ));
        }
        Hypersurface::new(self.n, self.phi.try_mul(f)?)
    }
}

/// The standard structure: `J e_{x_i} = e_{y_i}`, `J e_{y_i} = -e_{x_i}`.
pub fn standard_structure_matrix(n: usize) -> Matrix {
    let d = 2 * n;
    let mut j = vec![vec![Rational::zero(); d]; d];
    for i in 0..n {
        j[2 * i + 1][2 * i] = Rational::one();
        j[2 * i][2 * i + 1] = -Rational::one();
    }
    j
}

/// Almost complex structure on `R^{2n}`, stored as a `2n x 2n` matrix of
/// series (row-major) equal to the standard structure at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct ACStructure {
    n: usize,
    entries: Vec<TruncatedSeries>,
}

impl ACStructure {
    pub fn standard(n: usize, cap: u32) -> Self {
        let d = 2 * n;
        let entries = standard_structure_matrix(n)
            .into_iter()
            .flatten()
            .map(|c| TruncatedSeries::constant(d, cap, c))
            .collect();
        ACStructure { n, entries }
    }

    /// Validates `J(0) = J_std` and `J∘J = -I` through the known precision.
    pub fn new(n: usize, entries: Vec<TruncatedSeries>) -> Result<Self> {
        let j = Self::unchecked(n, entries)?;
        if j.at_origin()? != standard_structure_matrix(n) {
            return Err(Error::InvalidStructure("J(0) is not the standard structure".into()));
        }
        j.check_square()?;
        Ok(j)
    }

    /// Shape checks only; used while normalising a structure whose value at
    /// the origin is a nonstandard constant complex structure.
    pub fn unchecked(n: usize, entries: Vec<TruncatedSeries>) -> Result<Self> {
        let d = 2 * n;
        if entries.len() != d * d {
            return Err(Error::InvalidStructure(format!(
                "expected {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        for e in &entries {
            if e.nvars() != d || e.cap() != entries[0].cap() {
                return Err(Error::InvalidStructure("entries disagree in shape".into()));
            }
        }
        Ok(ACStructure { n, entries })
    }

    pub(crate) fn check_square(&self) -> Result<()> {
        let d = self.dim();
        let minus_one = TruncatedSeries::constant(d, self.cap(), -Rational::one());
        for r in 0..d {
            for c in 0..d {
                let mut acc = TruncatedSeries::zero(d, self.cap());
                for k in 0..d {
                    acc = acc.try_add(&self.entry(r, k).try_mul(self.entry(k, c))?)?;
                }
                let target = if r == c {
                    minus_one.clone()
                } else {
                    TruncatedSeries::zero(d, self.cap())
                };
                if acc != target {
                    return Err(Error::InvalidStructure(format!(
                        "J∘J differs from -I in entry ({r}, {c})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `A J_std A^{-1}` for a matrix of series `A` with `A(0) = I`.
    ///
    /// `A^{-1}` is the finite Neumann series in `I - A`, which has no constant
    /// term and is therefore nilpotent modulo the cap.
    pub fn conjugated_standard(n: usize, a: &[TruncatedSeries]) -> Result<Self> {
        let d = 2 * n;
        if a.len() != d * d {
            return Err(Error::InvalidStructure("conjugating matrix has wrong size".into()));
        }
        let cap = a[0].cap();
        let a = SeriesMatrix {
            d,
            entries: a.to_vec(),
        };
        if a.at_origin()? != linalg::identity(d) {
            return Err(Error::InvalidStructure("conjugating matrix must be I at 0".into()));
        }
        let id = SeriesMatrix::constant(d, cap, &linalg::identity(d));
        let nil = id.sub(&a)?;
        let mut inv = id.clone();
        for _ in 0..cap {
            inv = id.add(&nil.mul(&inv)?)?;
        }
        let jstd = SeriesMatrix::constant(d, cap, &standard_structure_matrix(n));
        let j = a.mul(&jstd)?.mul(&inv)?;
        ACStructure::new(n, j.entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn cap(&self) -> u32 {
        self.entries[0].cap()
    }

    pub fn reliable_degree(&self) -> Option<u32> {
        self.entries
            .iter()
            .map(TruncatedSeries::exact_i32)
            .min()
            .and_then(|e| u32::try_from(e).ok())
    }

    pub fn entry(&self, row: usize, col: usize) -> &TruncatedSeries {
        &self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[TruncatedSeries] {
        &self.entries
    }

    pub fn at_origin(&self) -> Result<Matrix> {
        let d = self.dim();
        (0..d)
            .map(|r| (0..d).map(|c| self.entry(r, c).constant_term()).collect())
            .collect()
    }

    /// True when every entry is constant.
    pub fn is_constant(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.terms().all(|(m, _)| m.degree() == 0))
    }

    pub fn recapped(&self, cap: u32) -> Self {
        ACStructure {
            n: self.n,
            entries: self.entries.iter().map(|e| e.recapped(cap)).collect(),
        }
    }

    pub fn trimmed(&self, d: u32) -> Self {
        ACStructure {
            n: self.n,
            entries: self.entries.iter().map(|e| e.trimmed(d)).collect(),
        }
    }

    /// Pointwise `J · V`, computed under the cap of `V`.
    pub fn apply(&self, v: &VectorField) -> Result<VectorField> {
        let d = self.dim();
        if v.dim() != d {
            return Err(Error::ShapeMismatch {
                what: "field dimension",
                left: v.dim(),
                right: d,
            });
        }
        if v.cap() != self.cap() {
            return self.recapped(v.cap()).apply(v);
        }
        let mut comps = Vec::with_capacity(d);
        for r in 0..d {
            let mut acc = TruncatedSeries::zero(d, self.cap());
            for (c, vc) in v.components().iter().enumerate() {
                let e = self.entry(r, c);
                if e.is_zero() && e.reliable_degree() == Some(e.cap()) {
                    continue;
                }
                acc = acc.try_add(&e.try_mul(vc)?)?;
            }
            comps.push(acc);
        }
        VectorField::new(comps)
    }

    /// `J(0) v`.
    pub fn apply_at_origin(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        Ok(linalg::mat_vec(&self.at_origin()?, v))
    }

    /// `(∇_v J)(0)`: entrywise derivative of `J` along a vector at the origin.
    pub fn derivative_at_origin(&self, v: &[Rational]) -> Result<Matrix> {
        let d = self.dim();
        (0..d)
            .map(|r| {
                (0..d)
                    .map(|c| self.entry(r, c).directional(v)?.constant_term())
                    .collect()
            })
            .collect()
    }

    /// Pulls `J` back along a point translation `x -> x + shift`.
    pub(crate) fn translated(&self, shift: &[Rational]) -> Result<Self> {
        Ok(ACStructure {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|e| e.translated(shift))
                .collect::<Result<_>>()?,
        })
    }
}

#[derive(Clone, Debug)]
struct SeriesMatrix {
    d: usize,
    entries: Vec<TruncatedSeries>,
}

impl SeriesMatrix {
    fn constant(d: usize, cap: u32, m: &Matrix) -> Self {
        SeriesMatrix {
            d,
            entries: m
                .iter()
                .flatten()
                .map(|c| TruncatedSeries::constant(d, cap, c.clone()))
                .collect(),
        }
    }

    fn at_origin(&self) -> Result<Matrix> {
        (0..self.d)
            .map(|r| {
                (0..self.d)
                    .map(|c| self.entries[r * self.d + c].constant_term())
                    .collect()
            })
            .collect()
    }

    fn add(&self, o: &Self) -> Result<Self> {
        Ok(SeriesMatrix {
            d: self.d,
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| a.try_add(b))
                .collect::<Result<_>>()?,
        })
    }

    fn sub(&self, o: &Self) -> Result<Self> {
        Ok(SeriesMatrix {
            d: self.d,
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| a.try_sub(b))
                .collect::<Result<_>>()?,
        })
    }

    fn mul(&self, o: &Self) -> Result<Self> {
        let d = self.d;
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                let mut acc = TruncatedSeries::zero(self.entries[0].nvars(), self.entries[0].cap());
                for k in 0..d {
                    let a = &self.entries[r * d + k];
                    let b = &o.entries[k * d + c];
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.try_add(&a.try_mul(b)?)?;
                }
                entries.push(acc);
            }
        }
        Ok(SeriesMatrix { d, entries })
    }
}

/// Vector field on `R^{2n}` given by its component series.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: Vec<TruncatedSeries>,
}

impl VectorField {
    pub fn new(comps: Vec<TruncatedSeries>) -> Result<Self> {
        let d = comps.len();
        if d == 0 || d % 2 != 0 {
            return Err(Error::ShapeMismatch {
                what: "field component count",
                left: d,
                right: 2 * d.div_ceil(2).max(1),
            });
        }
        for c in &comps {
            if c.nvars() != d {
                return Err(Error::ShapeMismatch {
                    what: "component variables",
                    left: c.nvars(),
                    right: d,
                });
            }
            if c.cap() != comps[0].cap() {
                return Err(Error::ShapeMismatch {
                    what: "degree cap",
                    left: c.cap() as usize,
                    right: comps[0].cap() as usize,
                });
            }
        }
        Ok(VectorField { comps })
    }

    pub fn constant(cap: u32, v: &[Rational]) -> Result<Self> {
        let d = v.len();
        VectorField::new(
            v.iter()
                .map(|c| TruncatedSeries::constant(d, cap, c.clone()))
                .collect(),
        )
    }

    pub fn zero(dim: usize, cap: u32) -> Self {
        VectorField {
            comps: vec![TruncatedSeries::zero(dim, cap); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn cap(&self) -> u32 {
        self.comps[0].cap()
    }

    pub fn components(&self) -> &[TruncatedSeries] {
        &self.comps
    }

    pub fn reliable_degree(&self) -> Option<u32> {
        self.comps
            .iter()
            .map(TruncatedSeries::exact_i32)
            .min()
            .and_then(|e| u32::try_from(e).ok())
    }

    pub fn at_origin(&self) -> Result<Vec<Rational>> {
        self.comps.iter().map(TruncatedSeries::constant_term).collect()
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        VectorField::new(
            self.comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a.try_add(b))
                .collect::<Result<_>>()?,
        )
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        VectorField::new(
            self.comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a.try_sub(b))
                .collect::<Result<_>>()?,
        )
    }

    /// Pointwise product with a function.
    pub fn scaled_by(&self, f: &TruncatedSeries) -> Result<Self> {
        VectorField::new(
            self.comps
                .iter()
                .map(|c| c.try_mul(f))
                .collect::<Result<_>>()?,
        )
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        VectorField {
            comps: self.comps.iter().map(|s| s.scale(c)).collect(),
        }
    }

    pub fn recapped(&self, cap: u32) -> Self {
        VectorField {
            comps: self.comps.iter().map(|c| c.recapped(cap)).collect(),
        }
    }

    pub fn trimmed(&self, d: u32) -> Self {
        VectorField {
            comps: self.comps.iter().map(|c| c.trimmed(d)).collect(),
        }
    }

    /// `X(f) = sum_j X_j ∂f/∂x_j`.
    pub fn derivative_of(&self, f: &TruncatedSeries) -> Result<TruncatedSeries> {
        let mut acc: Option<TruncatedSeries> = None;
        for (j, xj) in self.comps.iter().enumerate() {
            let term = xj.try_mul(&f.partial(j)?)?;
            acc = Some(match acc {
                None => term,
                Some(a) => a.try_add(&term)?,
            });
        }
        Ok(acc.expect("nonempty field"))
    }
}

/// `dphi(V) = <grad phi, V>` as a series.
pub fn dphi(m: &Hypersurface, v: &VectorField) -> Result<TruncatedSeries> {
    v.derivative_of(m.phi())
}

/// Normal field `N = grad phi` and its rotation `J N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub normal: VectorField,
    pub j_normal: VectorField,
}

pub fn gradient_frame(m: &Hypersurface, j: &ACStructure) -> Result<Frame> {
    let normal = VectorField::new(
        (0..m.dim())
            .map(|i| m.phi().partial(i))
            .collect::<Result<_>>()?,
    )?;
    let j_normal = j.apply(&normal)?;
    Ok(Frame { normal, j_normal })
}

/// Projects `V` onto the complex tangent bundle along `N` and `JN`.
///
/// Returns `X = V - aN - bJN` where `(a, b)` solve
/// `dphi(V) = a dphi(N) + b dphi(JN)`, `dphi(JV) = a dphi(JN) - b dphi(N)`,
/// so that `dphi(X)` and `dphi(JX)` vanish identically.
pub fn project_to_complex_tangent(
    v: &VectorField,
    m: &Hypersurface,
    j: &ACStructure,
) -> Result<VectorField> {
    let frame = gradient_frame(m, j)?;
    let p = dphi(m, &frame.normal)?;
    let q = dphi(m, &frame.j_normal)?;
    let r = dphi(m, v)?;
    let s = dphi(m, &j.apply(v)?)?;
    let det = p.try_mul(&p)?.try_add(&q.try_mul(&q)?)?;
    if det.constant_term()?.is_zero() {
        return Err(Error::InvalidHypersurface(
            "normal frame degenerates at the origin".into(),
        ));
    }
    let inv = det.inverse()?;
    let a = p.try_mul(&r)?.try_add(&q.try_mul(&s)?)?.try_mul(&inv)?;
    let b = q.try_mul(&r)?.try_sub(&p.try_mul(&s)?)?.try_mul(&inv)?;
    v.try_sub(&frame.normal.scaled_by(&a)?)?
        .try_sub(&frame.j_normal.scaled_by(&b)?)
}

/// Point-level version of the projection, for vectors at the origin.
pub fn project_vector_at_origin(
    v: &[Rational],
    m: &Hypersurface,
    j: &ACStructure,
) -> Result<Vec<Rational>> {
    let j0 = j.at_origin()?;
    let n0 = m.gradient_at_origin();
    let jn0 = linalg::mat_vec(&j0, &n0);
    let p = linalg::dot(&n0, &n0);
    let q = linalg::dot(&n0, &jn0);
    let r = linalg::dot(&n0, v);
    let s = linalg::dot(&n0, &linalg::mat_vec(&j0, v));
    let det = &p * &p + &q * &q;
    let a = (&p * &r + &q * &s) / &det;
    let b = (&q * &r - &p * &s) / &det;
    Ok(v.iter()
        .zip(n0.iter().zip(&jn0))
        .map(|(vi, (ni, jni))| vi - &a * ni - &b * jni)
        .collect())
}

/// True when `v` lies in `T_0 M ∩ J T_0 M`.
pub fn is_complex_tangent_at_origin(
    v: &[Rational],
    m: &Hypersurface,
    j: &ACStructure,
) -> Result<bool> {
    Ok(m.dphi_at_origin(v).is_zero() && m.dphi_at_origin(&j.apply_at_origin(v)?).is_zero())
}

/// Checks `dphi(X) ≡ 0` and `dphi(JX) ≡ 0` through the known precision.
pub fn ensure_complex_tangent(
    x: &VectorField,
    m: &Hypersurface,
    j: &ACStructure,
) -> Result<()> {
    if !dphi(m, x)?.is_zero() {
        return Err(Error::NotComplexTangent("dphi(X) does not vanish".to_string()));
    }
    if !dphi(m, &j.apply(x)?)?.is_zero() {
        return Err(Error::NotComplexTangent("dphi(JX) does not vanish".to_string()));
    }
    Ok(())
}

/// `∇_X Y` for the flat connection.
pub fn covariant_derivative(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if x.dim() != y.dim() {
        return Err(Error::ShapeMismatch {
            what: "field dimension",
            left: x.dim(),
            right: y.dim(),
        });
    }
    VectorField::new(
        y.components()
            .iter()
            .map(|yi| x.derivative_of(yi))
            .collect::<Result<_>>()?,
    )
}

/// `[X, Y] = ∇_X Y - ∇_Y X`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    covariant_derivative(x, y)?.try_sub(&covariant_derivative(y, x)?)
}

/// Evaluates `∇_{d_1}(∇_{d_2}(... ∇_{d_k} target))` at the origin.
///
/// Only the low-degree part of each intermediate field can influence the
/// final value, so everything is trimmed to the number of derivatives still
/// to be taken.
pub fn nested_derivative_at_origin(
    directions: &[&VectorField],
    target: &VectorField,
) -> Result<Vec<Rational>> {
    let k = directions.len() as u32;
    let mut w = target.trimmed(k);
    for (i, d) in directions.iter().rev().enumerate() {
        let remaining = k - i as u32 - 1;
        w = covariant_derivative(&d.trimmed(remaining), &w)?.trimmed(remaining);
    }
    w.at_origin().map_err(|_| Error::TruncationDepth {
        needed: k as i32,
        available: target.reliable_degree().map_or(-1, |d| d as i32),
    })
}

/// `D^{p,q}_X X(0)`: `X` differentiated `p` times along `X`, then `q` times
/// along `JX`, innermost first.
pub fn dpq_derivative(x: &VectorField, j: &ACStructure, p: u32, q: u32) -> Result<Vec<Rational>> {
    let jx = j.apply(x)?;
    let mut dirs: Vec<&VectorField> = Vec::new();
    dirs.extend(core::iter::repeat_n(&jx, q as usize));
    dirs.extend(core::iter::repeat_n(x, p as usize));
    nested_derivative_at_origin(&dirs, x)
}

/// The triangle `{D^{p,q}_X X(0) : p + q <= k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldJet {
    order: u32,
    entries: BTreeMap<(u32, u32), Vec<Rational>>,
}

impl FieldJet {
    /// Requires the complete triangle of entries for `p + q <= order`.
    pub fn new(order: u32, entries: BTreeMap<(u32, u32), Vec<Rational>>) -> Result<Self> {
        let expected = ((order + 1) * (order + 2) / 2) as usize;
        let complete = (0..=order).all(|s| (0..=s).all(|q| entries.contains_key(&(s - q, q))));
        if entries.len() != expected || !complete {
            return Err(Error::JetMismatch(format!(
                "field jet of order {order} needs {expected} entries"
            )));
        }
        Ok(FieldJet { order, entries })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn get(&self, p: u32, q: u32) -> Option<&[Rational]> {
        self.entries.get(&(p, q)).map(Vec::as_slice)
    }

    pub fn entries(&self) -> &BTreeMap<(u32, u32), Vec<Rational>> {
        &self.entries
    }

    /// The sub-jet of order `k`.
    pub fn truncated(&self, k: u32) -> FieldJet {
        FieldJet {
            order: k.min(self.order),
            entries: self
                .entries
                .iter()
                .filter(|((p, q), _)| p + q <= k)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }
}

/// `j^k_0(X)`.
pub fn field_jet(x: &VectorField, j: &ACStructure, k: u32) -> Result<FieldJet> {
    let available = x.reliable_degree().map_or(-1, |d| d as i32);
    if (k as i32) > available {
        return Err(Error::TruncationDepth {
            needed: k as i32,
            available,
        });
    }
    let x = x.trimmed(k);
    let jx = j.trimmed(k).apply(&x)?;
    let mut entries = BTreeMap::new();
    // chain along X first, then fan out along JX
    let mut along_x = x.clone();
    for p in 0..=k {
        if p > 0 {
            along_x = covariant_derivative(&x.trimmed(k - p), &along_x)?.trimmed(k - p);
        }
        let mut w = along_x.clone();
        for q in 0..=(k - p) {
            if q > 0 {
                let remaining = k - p - q;
                w = covariant_derivative(&jx.trimmed(remaining), &w)?.trimmed(remaining);
            }
            entries.insert((p, q), w.at_origin()?);
        }
    }
    FieldJet::new(k, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn var(i: usize, cap: u32) -> TruncatedSeries {
        TruncatedSeries::variable(4, cap, i).unwrap()
    }

    fn unit(i: usize) -> Vec<Rational> {
        let mut v = vec![q(0); 4];
        v[i] = q(1);
        v
    }

    fn sphere(cap: u32) -> Hypersurface {
        // 2 x2 + x1^2 + y1^2
        let phi = &(&var(2, cap).scale(&q(2)) + &(&var(0, cap) * &var(0, cap)))
            + &(&var(1, cap) * &var(1, cap));
        Hypersurface::new(2, phi).unwrap()
    }

    #[test]
    fn hypersurface_validation() {
        let phi = &var(0, 3) * &var(0, 3);
        assert!(matches!(
            Hypersurface::new(2, phi),
            Err(Error::InvalidHypersurface(_))
        ));
        let shifted = &var(2, 3) + &TruncatedSeries::one(4, 3);
        assert!(Hypersurface::new(2, shifted).is_err());
    }

    #[test]
    fn constant_gradient_frame() {
        let m = Hypersurface::new(2, var(2, 3).scale(&q(2))).unwrap();
        let j = ACStructure::standard(2, 3);
        let f = gradient_frame(&m, &j).unwrap();
        assert_eq!(f.normal.at_origin().unwrap(), vec![q(0), q(0), q(2), q(0)]);
        assert_eq!(f.j_normal.at_origin().unwrap(), vec![q(0), q(0), q(0), q(2)]);
    }

    #[test]
    fn polynomial_gradient_frame() {
        let m = sphere(3);
        let f = gradient_frame(&m, &ACStructure::standard(2, 3)).unwrap();
        let n = f.normal.components();
        assert_eq!(n[0], var(0, 3).scale(&q(2)).trimmed(2));
        assert_eq!(n[1], var(1, 3).scale(&q(2)).trimmed(2));
        assert_eq!(n[2], TruncatedSeries::constant(4, 3, q(2)).trimmed(2));
        assert!(n[3].is_zero());
    }

    #[test]
    fn projection_examples() {
        let j = ACStructure::standard(2, 4);
        let flat = Hypersurface::new(2, var(2, 4).scale(&q(2))).unwrap();
        let e1 = VectorField::constant(4, &unit(0)).unwrap();
        let x = project_to_complex_tangent(&e1, &flat, &j).unwrap();
        assert_eq!(x.at_origin().unwrap(), unit(0));
        let e3 = VectorField::constant(4, &unit(2)).unwrap();
        let x = project_to_complex_tangent(&e3, &flat, &j).unwrap();
        assert!(x.components().iter().all(TruncatedSeries::is_zero));

        let m = sphere(4);
        let x = project_to_complex_tangent(&e1, &m, &j).unwrap();
        assert_eq!(x.at_origin().unwrap(), unit(0));
        ensure_complex_tangent(&x, &m, &j).unwrap();
    }

    #[test]
    fn bracket_examples() {
        let cap = 3;
        let c1 = VectorField::constant(cap, &unit(0)).unwrap();
        let c2 = VectorField::constant(cap, &unit(1)).unwrap();
        assert!(lie_bracket(&c1, &c2)
            .unwrap()
            .components()
            .iter()
            .all(TruncatedSeries::is_zero));
        // Y = x1 ∂/∂y1
        let mut comps = vec![TruncatedSeries::zero(4, cap); 4];
        comps[1] = var(0, cap);
        let y = VectorField::new(comps).unwrap();
        let b = lie_bracket(&c1, &y).unwrap();
        assert_eq!(b.at_origin().unwrap(), unit(1));
        let d = covariant_derivative(&c1, &y).unwrap();
        assert_eq!(d.at_origin().unwrap(), unit(1));
        assert!(covariant_derivative(&y, &c2)
            .unwrap()
            .components()
            .iter()
            .all(TruncatedSeries::is_zero));
    }

    #[test]
    fn jets_of_constant_fields() {
        let j = ACStructure::standard(2, 4);
        let x = VectorField::constant(4, &unit(0)).unwrap();
        let jet = field_jet(&x, &j, 3).unwrap();
        assert_eq!(jet.get(0, 0).unwrap(), unit(0).as_slice());
        for ((p, q_), v) in jet.entries() {
            if p + q_ > 0 {
                assert!(linalg::is_zero_vec(v));
            }
        }
        let jet0 = field_jet(&x, &j, 0).unwrap();
        assert_eq!(jet0.entries().len(), 1);
        assert_eq!(dpq_derivative(&x, &j, 0, 0).unwrap(), unit(0));
    }

    #[test]
    fn jet_order_beyond_precision_fails() {
        let j = ACStructure::standard(2, 2);
        let x = VectorField::constant(2, &unit(0)).unwrap().trimmed(1);
        assert!(matches!(
            field_jet(&x, &j, 2),
            Err(Error::TruncationDepth { .. })
        ));
    }

    #[test]
    fn nonstandard_origin_is_rejected() {
        let mut entries = ACStructure::standard(1, 2).entries().to_vec();
        entries.swap(1, 2);
        assert!(matches!(
            ACStructure::new(1, entries),
            Err(Error::InvalidStructure(_))
        ));
    }
}
