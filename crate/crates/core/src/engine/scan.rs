//! Moving a base point to the origin and scanning several points.

use alloc::format;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::geometry::{standard_structure_matrix, ACStructure, Hypersurface};
use crate::linalg::{self, Matrix};
use crate::series::MultiIndex;
use crate::{Error, Rational, Result, TruncatedSeries};

use super::search::{type_search_with, SearchOptions, TypeReport};

/// Nudges `point` onto `{phi = 0}` along a coordinate in which `phi` is
/// affine with constant slope; exact or nothing.
fn project_point(phi: &TruncatedSeries, point: &[Rational]) -> Result<Vec<Rational>> {
    let value = phi.evaluate(point)?;
    if value.is_zero() {
        return Ok(point.to_vec());
    }
    let d = phi.nvars();
    for i in 0..d {
        let slope = phi.coefficient(&MultiIndex::unit(d, i));
        if slope.is_zero() {
            continue;
        }
        let affine = phi
            .terms()
            .all(|(m, _)| m.exponent(i) == 0 || *m == MultiIndex::unit(d, i));
        if affine {
            let mut p = point.to_vec();
            p[i] -= value / slope;
            return Ok(p);
        }
    }
    Err(Error::PointNotOnHypersurface(format!(
        "phi = {value} at the point and no coordinate allows an exact projection"
    )))
}

/// `P = [v_1, J0 v_1, v_2, J0 v_2, ...]` from standard basis vectors, so
/// that `P^{-1} J0 P = J_std`.
fn standardizing_basis(j0: &Matrix) -> Result<Matrix> {
    let d = j0.len();
    let mut cols: Vec<Vec<Rational>> = Vec::new();
    for i in 0..d {
        let mut e = alloc::vec![Rational::zero(); d];
        e[i] = Rational::one();
        let je = linalg::mat_vec(j0, &e);
        let mut trial = cols.clone();
        trial.push(e.clone());
        trial.push(je.clone());
        if linalg::rank(&trial) == cols.len() + 2 {
            cols = trial;
        }
    }
    if cols.len() != d {
        return Err(Error::InvalidStructure("J(0) is not a complex structure".into()));
    }
    Ok((0..d).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect())
}

/// Recentred data: `phi`, `J` in coordinates where the point is the origin
/// and `J(0)` is standard, and the (possibly projected) original point.
#[derive(Clone, Debug)]
pub struct Recentered {
    pub point: Vec<Rational>,
    pub hypersurface: Hypersurface,
    pub structure: ACStructure,
}

/// Translates `phi` and `J` (full polynomials, cap at least their degree)
/// to `point`, conjugates `J(point)` to the standard structure, and then
/// truncates to `cap`.
pub fn recenter(
    n: usize,
    phi: &TruncatedSeries,
    j_entries: &[TruncatedSeries],
    point: &[Rational],
    cap: u32,
) -> Result<Recentered> {
    let d = 2 * n;
    if point.len() != d {
        return Err(Error::ShapeMismatch {
            what: "point length",
            left: point.len(),
            right: d,
        });
    }
    let point = project_point(phi, point)?;
    let phi_t = phi.translated(&point)?;
    let j_t = ACStructure::unchecked(n, j_entries.to_vec())?.translated(&point)?;
    let j0 = j_t.at_origin()?;
    let work = phi.cap().max(cap);
    let (phi_s, j_s) = if j0 == standard_structure_matrix(n) {
        (phi_t.recapped(work), j_t.recapped(work))
    } else {
        let p = standardizing_basis(&j0)?;
        let p_inv = linalg::inverse(&p).expect("basis is invertible");
        let lin: Vec<TruncatedSeries> = p
            .iter()
            .map(|row| TruncatedSeries::linear(d, work, row))
            .collect::<Result<_>>()?;
        let phi_s = phi_t.recapped(work).compose(&lin)?;
        let moved: Vec<TruncatedSeries> = j_t
            .entries()
            .iter()
            .map(|e| e.recapped(work).compose(&lin))
            .collect::<Result<_>>()?;
        // P^{-1} J(Px) P
        let mut out = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                let mut acc = TruncatedSeries::zero(d, work);
                for a in 0..d {
                    if p_inv[r][a].is_zero() {
                        continue;
                    }
                    for b in 0..d {
                        if p[b][c].is_zero() {
                            continue;
                        }
                        acc = acc.try_add(&moved[a * d + b].scale(&(&p_inv[r][a] * &p[b][c])))?;
                    }
                }
                out.push(acc);
            }
        }
        (phi_s, ACStructure::unchecked(n, out)?)
    };
    let hypersurface = Hypersurface::new(n, phi_s.recapped(cap))?;
    let structure = ACStructure::new(n, j_s.recapped(cap).entries().to_vec())?;
    Ok(Recentered {
        point,
        hypersurface,
        structure,
    })
}

/// Type at a single point of the hypersurface.
pub fn type_at_point(
    n: usize,
    phi: &TruncatedSeries,
    j_entries: &[TruncatedSeries],
    point: &[Rational],
    cap: u32,
    opts: &SearchOptions,
) -> Result<TypeReport> {
    let r = recenter(n, phi, j_entries, point, cap)?;
    let mut report = type_search_with(&r.hypersurface, &r.structure, opts)?;
    report.point = r.point;
    Ok(report)
}

/// Reports for each point, in input order.
pub fn scan_type(
    n: usize,
    phi: &TruncatedSeries,
    j_entries: &[TruncatedSeries],
    points: &[Vec<Rational>],
    cap: u32,
    opts: &SearchOptions,
) -> Vec<Result<TypeReport>> {
    points
        .iter()
        .map(|p| type_at_point(n, phi, j_entries, p, cap, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{flat, power_sphere};
    use crate::engine::Strategy;
    use crate::levi::{classify_point, PointClass};
    use alloc::vec;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn opts(k_max: u32) -> SearchOptions {
        SearchOptions {
            k_max,
            strategy: Strategy::ExactStaged,
            field_witness: false,
        }
    }

    #[test]
    fn quartic_scan_drops_to_two_off_the_axis() {
        let m = power_sphere(2, 8).unwrap();
        let j = ACStructure::standard(2, 8);
        let points: Vec<Vec<Rational>> = [q(0, 1), q(1, 2), q(1, 1)]
            .iter()
            .map(|t| vec![t.clone(), q(0, 1), -(t * t * t * t) / q(2, 1), q(0, 1)])
            .collect();
        let types: Vec<u32> = scan_type(2, m.phi(), j.entries(), &points, 6, &opts(4))
            .into_iter()
            .map(|r| r.unwrap().lower_bound)
            .collect();
        assert_eq!(types, vec![4, 2, 2]);
        let r = recenter(2, m.phi(), j.entries(), &points[1], 6).unwrap();
        assert_eq!(
            classify_point(&r.hypersurface, &r.structure).unwrap().class,
            PointClass::StrictlyPseudoconvex
        );
    }

    #[test]
    fn flat_points_reach_the_cap() {
        let m = flat(2, 6).unwrap();
        let j = ACStructure::standard(2, 6);
        let points = vec![vec![q(1, 3), q(-2, 1), q(0, 1), q(5, 1)]];
        for r in scan_type(2, m.phi(), j.entries(), &points, 6, &opts(4)) {
            assert!(r.unwrap().cap_reached);
        }
    }

    #[test]
    fn sphere_points_have_type_two() {
        let m = power_sphere(1, 6).unwrap();
        let j = ACStructure::standard(2, 6);
        let points = vec![vec![q(1, 1), q(1, 1), q(-1, 1), q(0, 1)], vec![q(0, 1), q(2, 1), q(-2, 1), q(7, 1)]];
        for r in scan_type(2, m.phi(), j.entries(), &points, 6, &opts(4)) {
            let r = r.unwrap();
            assert_eq!(r.lower_bound, 2);
            assert!(r.certified_exact);
        }
    }

    #[test]
    fn off_surface_point_is_projected_along_x2() {
        let m = power_sphere(1, 6).unwrap();
        let j = ACStructure::standard(2, 6);
        let r = recenter(2, m.phi(), j.entries(), &[q(1, 1), q(0, 1), q(0, 1), q(0, 1)], 6).unwrap();
        assert_eq!(r.point, vec![q(1, 1), q(0, 1), q(-1, 2), q(0, 1)]);
    }

    #[test]
    fn unprojectable_point_is_rejected() {
        // x2 enters nonlinearly, so no exact projection exists
        let m = power_sphere(1, 6).unwrap();
        let x2 = TruncatedSeries::variable(4, 6, 2).unwrap();
        let phi = m.phi().try_add(&x2.try_mul(&x2).unwrap()).unwrap();
        let j = ACStructure::standard(2, 6);
        let r = recenter(2, &phi, j.entries(), &[q(1, 1), q(0, 1), q(0, 1), q(0, 1)], 6);
        assert!(matches!(r, Err(Error::PointNotOnHypersurface(_))));
    }
}
