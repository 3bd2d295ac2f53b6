//! Passing between disk jets and complex tangent fields.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::disks::{contact_order, propagate_cr_jet, DiskJet};
use crate::geometry::{
    field_jet, is_complex_tangent_at_origin, project_to_complex_tangent, ACStructure, FieldJet,
    Hypersurface, VectorField,
};
use crate::levi::complex_tangent_basis;
use crate::series::factorial;
use crate::{linalg, Error, Rational, Result, TruncatedSeries};

use super::commute::commutation_defect;

/// Complex multiplier `λ = re + i im` applied as `re T + im JT`.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier {
    pub re: TruncatedSeries,
    pub im: TruncatedSeries,
}

#[derive(Clone, Debug, PartialEq)]
pub enum JetExtension {
    /// The extended field and the multipliers `λ_i` of the tangent basis.
    Realizable {
        field: VectorField,
        multipliers: Vec<Multiplier>,
    },
    /// The top-order entry `(p, q)` leaves the complex tangent space.
    NotRealizable { p: u32, q: u32 },
}

/// Coordinates of `delta` in the real basis `{T_1, JT_1, T_2, JT_2, ...}`.
fn decompose(delta: &[Rational], basis: &[Vec<Rational>], j0: &linalg::Matrix) -> Option<Vec<Rational>> {
    let d = delta.len();
    let mut cols: Vec<Vec<Rational>> = Vec::new();
    for t in basis {
        cols.push(t.clone());
        cols.push(linalg::mat_vec(j0, t));
    }
    let a: linalg::Matrix = (0..d).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    match linalg::solve(&a, delta, cols.len()) {
        linalg::AffineSolution::Solved { particular, .. } => Some(particular),
        linalg::AffineSolution::Inconsistent => None,
    }
}

/// Linear forms `s, t` with `s(v) = 1, s(w) = 0, t(v) = 0, t(w) = 1`.
fn dual_forms(v: &[Rational], w: &[Rational]) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let g = [
        [linalg::dot(v, v), linalg::dot(v, w)],
        [linalg::dot(w, v), linalg::dot(w, w)],
    ];
    let det = &g[0][0] * &g[1][1] - &g[0][1] * &g[1][0];
    if det.is_zero() {
        return Err(Error::NotComplexTangent("base vector of the field vanishes".into()));
    }
    // s = a v + b w with Gram system; same for t
    let inv = [
        [&g[1][1] / &det, -&g[0][1] / &det],
        [-&g[1][0] / &det, &g[0][0] / &det],
    ];
    let combine = |a: &Rational, b: &Rational| -> Vec<Rational> {
        v.iter().zip(w).map(|(vi, wi)| a * vi + b * wi).collect()
    };
    Ok((combine(&inv[0][0], &inv[1][0]), combine(&inv[0][1], &inv[1][1])))
}

/// Tests whether `xi` (of order `k + 1`) is the jet of some complex tangent
/// field agreeing with `x1` to order `k`, and builds one when it is.
///
/// The correction is `sum_i Re(λ_i) T_i + Im(λ_i) J T_i` with `λ_i`
/// homogeneous of degree `k + 1` in the dual coordinates of `X1(0)` and
/// `J X1(0)`, so that the only new contribution to `D^{p,q}` at order
/// `k + 1` is `∂^p_v ∂^q_w λ_i (0)`.
pub fn jet_extension_test(
    m: &Hypersurface,
    j: &ACStructure,
    x1: &VectorField,
    xi: &FieldJet,
) -> Result<JetExtension> {
    let top = xi.order();
    if top == 0 {
        return Err(Error::JetMismatch("target jet must have positive order".into()));
    }
    let current = field_jet(x1, j, top)?;
    for (&(p, q), v) in xi.entries() {
        if p + q < top && current.get(p, q) != Some(v.as_slice()) {
            return Err(Error::JetMismatch(format!(
                "lower-order entry ({p}, {q}) differs from the field"
            )));
        }
    }
    let cap = x1.cap();
    let mc = m.recapped(cap);
    let jc = j.recapped(cap);
    let (basis, _) = complex_tangent_basis(m, j)?;
    let j0 = j.at_origin()?;
    let mut alphas: BTreeMap<(u32, u32), Vec<Rational>> = BTreeMap::new();
    for qq in 0..=top {
        let p = top - qq;
        let target = xi.get(p, qq).expect("complete jet");
        let delta: Vec<Rational> = target
            .iter()
            .zip(current.get(p, qq).expect("complete jet"))
            .map(|(a, b)| a - b)
            .collect();
        if !is_complex_tangent_at_origin(&delta, m, j)? {
            return Ok(JetExtension::NotRealizable { p, q: qq });
        }
        let coords = decompose(&delta, &basis, &j0)
            .ok_or_else(|| Error::TheoremViolation("tangent vector outside basis span".into()))?;
        alphas.insert((p, qq), coords);
    }
    let v = x1.at_origin()?;
    let w = j.apply_at_origin(&v)?;
    let (s_form, t_form) = dual_forms(&v, &w)?;
    let dim = m.dim();
    let s = TruncatedSeries::linear(dim, cap, &s_form)?;
    let t = TruncatedSeries::linear(dim, cap, &t_form)?;
    let s_pows: Vec<TruncatedSeries> =
        (0..=top).map(|e| s.pow(e)).collect::<Result<_>>()?;
    let t_pows: Vec<TruncatedSeries> =
        (0..=top).map(|e| t.pow(e)).collect::<Result<_>>()?;

    let mut field = x1.clone();
    let mut multipliers = Vec::new();
    for (i, ti) in basis.iter().enumerate() {
        let mut re = TruncatedSeries::zero(dim, cap);
        let mut im = TruncatedSeries::zero(dim, cap);
        for (&(p, q), coords) in &alphas {
            let (a, b) = (&coords[2 * i], &coords[2 * i + 1]);
            if a.is_zero() && b.is_zero() {
                continue;
            }
            let scale = Rational::one()
                / (Rational::from_integer(factorial(p)) * Rational::from_integer(factorial(q)));
            let mono = s_pows[p as usize].try_mul(&t_pows[q as usize])?;
            re = re.try_add(&mono.scale(&(a * &scale)))?;
            im = im.try_add(&mono.scale(&(b * &scale)))?;
        }
        if !(re.is_zero() && im.is_zero()) {
            let tf = project_to_complex_tangent(&VectorField::constant(cap, ti)?, &mc, &jc)?;
            let jtf = jc.apply(&tf)?;
            field = field
                .try_add(&tf.scaled_by(&re)?)?
                .try_add(&jtf.scaled_by(&im)?)?;
        }
        multipliers.push(Multiplier { re, im });
    }
    Ok(JetExtension::Realizable { field, multipliers })
}

/// Target jet `ξ_{p,q} = ∂^{p+q+1} u / ∂x^{p+1} ∂y^q (0)` of a disk.
pub fn disk_field_target(u: &DiskJet, k: u32) -> Result<FieldJet> {
    let mut entries = BTreeMap::new();
    for s in 0..=k {
        for q in 0..=s {
            entries.insert((s - q, q), u.derivative(s - q + 1, q));
        }
    }
    FieldJet::new(k, entries)
}

/// A complex tangent field whose `k`-jet is the derivative jet of `u`.
///
/// Requires a regular disk of contact order at least `k + 2`; the field is
/// built order by order through [`jet_extension_test`].
pub fn realize_field_from_disk(
    m: &Hypersurface,
    j: &ACStructure,
    u: &DiskJet,
    k: u32,
) -> Result<VectorField> {
    if u.order() < k + 1 {
        return Err(Error::TruncationDepth {
            needed: k as i32 + 1,
            available: u.order() as i32,
        });
    }
    let contact = contact_order(m, u)?;
    if !contact.is_at_least(k + 2) {
        return Err(Error::InsufficientContact {
            found: contact.lower_bound(),
            needed: k + 2,
        });
    }
    let cap = k + 1;
    if m.cap() < cap {
        return Err(Error::TruncationDepth {
            needed: cap as i32,
            available: m.cap() as i32,
        });
    }
    let mc = m.recapped(cap);
    let jc = j.recapped(cap);
    let target = disk_field_target(u, k)?;
    let mut x = project_to_complex_tangent(&VectorField::constant(cap, &u.derivative(1, 0))?, &mc, &jc)?;
    for order in 1..=k {
        match jet_extension_test(&mc, &jc, &x, &target.truncated(order))? {
            JetExtension::Realizable { field, .. } => x = field,
            JetExtension::NotRealizable { p, q } => {
                return Err(Error::TheoremViolation(format!(
                    "disk jet entry ({p}, {q}) is not realizable despite sufficient contact"
                )))
            }
        }
    }
    Ok(x)
}

/// The disk with `∂^m u/∂x^m (0) = X^m(0)` for `m <= k + 1`, where
/// `X^1 = X` and `X^{m+1} = ∇_X X^m`.
pub fn disk_from_commuting_field(
    m: &Hypersurface,
    j: &ACStructure,
    x: &VectorField,
    k: u32,
) -> Result<DiskJet> {
    let report = commutation_defect(x, j, k + 1)?;
    if !report.commutes_to(k + 1) {
        return Err(Error::CommutationDefect {
            order: report.max_vanishing_order,
        });
    }
    let jet = field_jet(x, j, k)?;
    let x_jet: Vec<Vec<Rational>> = (0..=k)
        .map(|p| jet.get(p, 0).expect("complete jet").to_vec())
        .collect();
    let u = propagate_cr_jet(&x_jet, j)?;
    let contact = contact_order(m, &u)?;
    if !contact.is_at_least(k + 2) {
        return Err(Error::TheoremViolation(format!(
            "commuting field gives contact {} < {}",
            contact.lower_bound(),
            k + 2
        )));
    }
    Ok(u)
}
