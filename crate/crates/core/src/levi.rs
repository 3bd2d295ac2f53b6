//! The Levi form, its polar form, pointwise classification and the higher
//! order Levi forms `L^{p,q}`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::disks::{compose_phi_u, propagate_cr_jet};
use crate::geometry::{
    ensure_complex_tangent, lie_bracket, project_to_complex_tangent, project_vector_at_origin,
    ACStructure, Hypersurface, VectorField,
};
use crate::linalg::{self, Matrix};
use crate::series::factorial;
use crate::{ComplexRational, Error, Rational, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeviRoute {
    Bracket,
    Hessian,
}

impl fmt::Display for LeviRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LeviRoute::Bracket => "bracket",
            LeviRoute::Hessian => "hessian",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeviReport {
    pub value: Rational,
    pub route: LeviRoute,
    /// `dphi((∇_{JX} J) X - (∇_X J) JX)(0)`; zero for constant `J`.
    pub correction_term: Rational,
}

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

fn correction_at_origin(
    m: &Hypersurface,
    j: &ACStructure,
    v: &[Rational],
    w: &[Rational],
) -> Result<Rational> {
    let dw = j.derivative_at_origin(w)?;
    let dv = j.derivative_at_origin(v)?;
    let t: Vec<Rational> = linalg::mat_vec(&dw, v)
        .into_iter()
        .zip(linalg::mat_vec(&dv, w))
        .map(|(a, b)| a - b)
        .collect();
    Ok(m.dphi_at_origin(&t))
}

/// `dphi(J [A, B])(0)` with everything trimmed to first order.
fn bracket_term(
    m: &Hypersurface,
    j1: &ACStructure,
    a: &VectorField,
    b: &VectorField,
) -> Result<Rational> {
    let br = lie_bracket(&a.trimmed(1), &b.trimmed(1))?.trimmed(0);
    let jb = j1.apply(&br)?;
    Ok(m.dphi_at_origin(&jb.at_origin()?))
}

fn aligned(j: &ACStructure, x: &VectorField) -> ACStructure {
    j.recapped(x.cap()).trimmed(1)
}

/// `L(X) = dphi(J [X, JX])(0)`.
pub fn levi_form_bracket(m: &Hypersurface, j: &ACStructure, x: &VectorField) -> Result<LeviReport> {
    ensure_complex_tangent(x, &m.recapped(x.cap()), &j.recapped(x.cap()))?;
    let j1 = aligned(j, x);
    let x1 = x.trimmed(1);
    let jx = j1.apply(&x1)?;
    let value = bracket_term(m, &j1, &x1, &jx)?;
    let v = x.at_origin()?;
    let w = j.apply_at_origin(&v)?;
    Ok(LeviReport {
        value,
        route: LeviRoute::Bracket,
        correction_term: correction_at_origin(m, j, &v, &w)?,
    })
}

/// `L(X) = D^2 phi(X, X) + D^2 phi(JX, JX) + dphi((∇_{JX} J) X - (∇_X J) JX)`
/// at the origin; only `X(0)` enters.
pub fn levi_form_hessian(m: &Hypersurface, j: &ACStructure, x: &VectorField) -> Result<LeviReport> {
    ensure_complex_tangent(x, &m.recapped(x.cap()), &j.recapped(x.cap()))?;
    let v = x.at_origin()?;
    levi_form_hessian_at(m, j, &v)
}

/// Hessian route for a complex tangent vector at the origin.
pub fn levi_form_hessian_at(m: &Hypersurface, j: &ACStructure, v: &[Rational]) -> Result<LeviReport> {
    if !crate::geometry::is_complex_tangent_at_origin(v, m, j)? {
        return Err(Error::NotComplexTangent("vector is not complex tangent at 0".into()));
    }
    let w = j.apply_at_origin(v)?;
    let h = m.hessian_at_origin();
    let quad = |a: &[Rational]| linalg::dot(a, &linalg::mat_vec(&h, a));
    let correction_term = correction_at_origin(m, j, v, &w)?;
    Ok(LeviReport {
        value: quad(v) + quad(&w) + &correction_term,
        route: LeviRoute::Hessian,
        correction_term,
    })
}

/// Polar form
/// `Θ(X, Y) = ½ [dphi(J[X,JY] + J[Y,JX]) + i dphi(J[X,Y] + J[JX,JY])]` at 0.
pub fn levi_polar(
    m: &Hypersurface,
    j: &ACStructure,
    x: &VectorField,
    y: &VectorField,
) -> Result<ComplexRational> {
    let jc = j.recapped(x.cap());
    let mc = m.recapped(x.cap());
    ensure_complex_tangent(x, &mc, &jc)?;
    ensure_complex_tangent(y, &mc, &jc)?;
    let j1 = aligned(j, x);
    let (x1, y1) = (x.trimmed(1), y.trimmed(1));
    let (jx, jy) = (j1.apply(&x1)?, j1.apply(&y1)?);
    let re = bracket_term(m, &j1, &x1, &jy)? + bracket_term(m, &j1, &y1, &jx)?;
    let im = bracket_term(m, &j1, &x1, &y1)? + bracket_term(m, &j1, &jx, &jy)?;
    Ok(ComplexRational::new(re * half(), im * half()))
}

/// The polar form on a basis of the complex tangent space at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianLeviMatrix {
    pub basis: Vec<Vec<Rational>>,
    pub entries: Vec<Vec<ComplexRational>>,
}

impl HermitianLeviMatrix {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn is_hermitian(&self) -> bool {
        let k = self.size();
        (0..k).all(|a| (0..k).all(|b| self.entries[a][b] == self.entries[b][a].conj()))
    }

    /// `[[A, -B], [B, A]]` for entries `A + iB`.
    pub fn realified(&self) -> Matrix {
        let k = self.size();
        let mut r = vec![vec![Rational::zero(); 2 * k]; 2 * k];
        for a in 0..k {
            for b in 0..k {
                let e = &self.entries[a][b];
                r[a][b] = e.re.clone();
                r[a + k][b + k] = e.re.clone();
                r[a][b + k] = -e.im.clone();
                r[a + k][b] = e.im.clone();
            }
        }
        r
    }

    /// Complex inertia `(positive, negative, zero)`.
    pub fn inertia(&self) -> (usize, usize, usize) {
        let (p, n, z) = linalg::symmetric_inertia(&self.realified());
        (p / 2, n / 2, z / 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointClass {
    StrictlyPseudoconvex,
    PseudoconvexDegenerate,
    Indefinite,
    StrictlyPseudoconcave,
    PseudoconcaveDegenerate,
    LeviFlat,
}

impl PointClass {
    pub fn from_inertia(pos: usize, neg: usize, zero: usize) -> Self {
        match (pos, neg, zero) {
            (0, 0, _) => PointClass::LeviFlat,
            (_, 0, 0) => PointClass::StrictlyPseudoconvex,
            (_, 0, _) => PointClass::PseudoconvexDegenerate,
            (0, _, 0) => PointClass::StrictlyPseudoconcave,
            (0, _, _) => PointClass::PseudoconcaveDegenerate,
            _ => PointClass::Indefinite,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PointClass::StrictlyPseudoconvex => "strictly_pseudoconvex",
            PointClass::PseudoconvexDegenerate => "pseudoconvex_degenerate",
            PointClass::Indefinite => "indefinite",
            PointClass::StrictlyPseudoconcave => "strictly_pseudoconcave",
            PointClass::PseudoconcaveDegenerate => "pseudoconcave_degenerate",
            PointClass::LeviFlat => "levi_flat",
        }
    }

    pub fn is_pseudoconvex(self) -> bool {
        matches!(
            self,
            PointClass::StrictlyPseudoconvex | PointClass::PseudoconvexDegenerate | PointClass::LeviFlat
        )
    }
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub class: PointClass,
    pub matrix: HermitianLeviMatrix,
    pub inertia: (usize, usize, usize),
}

/// Complex tangent basis at the origin from projected coordinate directions,
/// as point vectors and as projected constant fields (first order suffices).
pub fn complex_tangent_basis(
    m: &Hypersurface,
    j: &ACStructure,
) -> Result<(Vec<Vec<Rational>>, Vec<VectorField>)> {
    let d = m.dim();
    let cap = 2;
    let (m2, j2) = (m.recapped(cap), j.recapped(cap));
    let j0 = j.at_origin()?;
    let mut span: Matrix = Vec::new();
    let mut points = Vec::new();
    let mut fields = Vec::new();
    for i in 0..d {
        if points.len() == m.n() - 1 {
            break;
        }
        let mut e = vec![Rational::zero(); d];
        e[i] = Rational::one();
        let t = project_vector_at_origin(&e, m, j)?;
        let mut trial = span.clone();
        trial.push(t.clone());
        trial.push(linalg::mat_vec(&j0, &t));
        if linalg::rank(&trial) == span.len() + 2 {
            span = trial;
            fields.push(project_to_complex_tangent(
                &VectorField::constant(cap, &e)?,
                &m2,
                &j2,
            )?);
            points.push(t);
        }
    }
    Ok((points, fields))
}

pub fn levi_matrix(m: &Hypersurface, j: &ACStructure) -> Result<HermitianLeviMatrix> {
    let (basis, fields) = complex_tangent_basis(m, j)?;
    let m2 = m.recapped(2);
    let entries = fields
        .iter()
        .map(|a| fields.iter().map(|b| levi_polar(&m2, j, a, b)).collect())
        .collect::<Result<_>>()?;
    Ok(HermitianLeviMatrix { basis, entries })
}

pub fn classify_point(m: &Hypersurface, j: &ACStructure) -> Result<Classification> {
    let matrix = levi_matrix(m, j)?;
    let inertia = matrix.inertia();
    Ok(Classification {
        class: PointClass::from_inertia(inertia.0, inertia.1, inertia.2),
        matrix,
        inertia,
    })
}

fn fact(n: u32) -> Rational {
    Rational::from_integer(factorial(n))
}

/// Trace of the disk with x-jet `(u_1, ..., u_s, 0)` and its Laplacian.
fn padded_laplacian(
    m: &Hypersurface,
    j: &ACStructure,
    x_jet: &[Vec<Rational>],
) -> Result<crate::TruncatedSeries> {
    let order = x_jet.len() as u32 + 1;
    if order > m.cap() {
        return Err(Error::TruncationDepth {
            needed: order as i32,
            available: m.cap() as i32,
        });
    }
    let mut padded = x_jet.to_vec();
    padded.push(vec![Rational::zero(); m.dim()]);
    let u = propagate_cr_jet(&padded, j)?;
    let trace = compose_phi_u(m, &u)?.series().clone();
    let xx = trace.partial(0)?.partial(0)?;
    let yy = trace.partial(1)?.partial(1)?;
    xx.try_add(&yy)
}

/// `L^{p,q}(u_1, ..., u_{p+q+1}) = ∂^{p+q}/∂x^p ∂y^q Δ(phi ∘ u)(0)` for the
/// disk with those x-derivatives and a vanishing `(p+q+2)`-th one.
pub fn higher_levi(
    m: &Hypersurface,
    j: &ACStructure,
    x_jet: &[Vec<Rational>],
    p: u32,
    q: u32,
) -> Result<Rational> {
    let s = (p + q + 1) as usize;
    if x_jet.len() < s {
        return Err(Error::Arity {
            expected: s,
            got: x_jet.len(),
        });
    }
    let lap = padded_laplacian(m, j, &x_jet[..s])?;
    Ok(lap.coefficient_of(&[p, q]) * fact(p) * fact(q))
}

/// Every `L^{p,q}` with `p + q <= top` from a single padded disk; entry `s`
/// holds `[L^{s,0}, L^{s-1,1}, ..., L^{0,s}]`.
pub fn higher_levi_all(
    m: &Hypersurface,
    j: &ACStructure,
    x_jet: &[Vec<Rational>],
    top: u32,
) -> Result<Vec<Vec<Rational>>> {
    let s = (top + 1) as usize;
    if x_jet.len() < s {
        return Err(Error::Arity {
            expected: s,
            got: x_jet.len(),
        });
    }
    let lap = padded_laplacian(m, j, &x_jet[..s])?;
    Ok((0..=top)
        .map(|d| {
            (0..=d)
                .map(|q| {
                    let p = d - q;
                    lap.coefficient_of(&[p, q]) * fact(p) * fact(q)
                })
                .collect()
        })
        .collect())
}

/// A closed-form evaluation next to the disk-route value.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormReport {
    pub p: u32,
    pub q: u32,
    /// The formula as usually printed.
    pub printed: Rational,
    /// The formula with its last term's second argument replaced by `i X_1`.
    pub corrected: Rational,
    pub disk_route: Rational,
    pub printed_agrees: bool,
    pub corrected_agrees: bool,
}

/// Closed forms for `L^{0,0}`, `L^{1,0}` and `L^{0,1}` under the standard
/// structure, where `i` acts as `J_std`.
pub fn higher_levi_closed_form(
    p: u32,
    q: u32,
    m: &Hypersurface,
    x: &[Vec<Rational>],
) -> Result<ClosedFormReport> {
    let needed = (p + q + 1) as usize;
    if !matches!((p, q), (0, 0) | (1, 0) | (0, 1)) {
        return Err(Error::UnsupportedClosedForm { p, q });
    }
    if x.len() < needed {
        return Err(Error::Arity {
            expected: needed,
            got: x.len(),
        });
    }
    let j = ACStructure::standard(m.n(), m.cap());
    let i = |v: &[Rational]| j.apply_at_origin(v);
    let d = |vs: &[&[Rational]]| m.derivative_at_origin(vs);
    let two = Rational::from_integer(2.into());
    let x1 = &x[0][..];
    let ix1 = i(x1)?;
    let (printed, corrected) = match (p, q) {
        (0, 0) => {
            let v = d(&[x1, x1])? + d(&[&ix1, &ix1])?;
            (v.clone(), v)
        }
        (1, 0) => {
            let x2 = &x[1][..];
            let ix2 = i(x2)?;
            let base = d(&[x1, x1, x1])? + d(&[x1, &ix1, &ix1])? + &two * d(&[x2, x1])?;
            (
                &base + &two * d(&[&ix2, &ix2])?,
                &base + &two * d(&[&ix2, &ix1])?,
            )
        }
        _ => {
            let x2 = &x[1][..];
            let ix2 = i(x2)?;
            let base = d(&[&ix1, x1, x1])? + d(&[&ix1, &ix1, &ix1])? + &two * d(&[&ix2, x1])?;
            (
                &base - &two * d(&[x2, &ix2])?,
                &base - &two * d(&[x2, &ix1])?,
            )
        }
    };
    let disk_route = higher_levi(m, &j, x, p, q)?;
    Ok(ClosedFormReport {
        p,
        q,
        printed_agrees: printed == disk_route,
        corrected_agrees: corrected == disk_route,
        printed,
        corrected,
        disk_route,
    })
}

impl fmt::Display for ClosedFormReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "L^{{{},{}}}: disk {} printed {} corrected {}",
            self.p, self.q, self.disk_route, self.printed, self.corrected
        )
    }
}

/// Formats a Gaussian rational as `a + bi`.
pub fn format_complex(c: &ComplexRational) -> alloc::string::String {
    if c.im.is_zero() {
        format!("{}", c.re)
    } else if c.re.is_zero() {
        format!("{}i", c.im)
    } else if c.im < Rational::zero() {
        format!("{} - {}i", c.re, -c.im.clone())
    } else {
        format!("{} + {}i", c.re, c.im)
    }
}
