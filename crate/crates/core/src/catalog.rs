//! Reference hypersurfaces with known regular type, and a builder for
//! non-integrable structures conjugate to the standard one.

use alloc::vec::Vec;

use crate::geometry::{ACStructure, Hypersurface};
use crate::series::MultiIndex;
use crate::{Rational, Result, TruncatedSeries};

fn var(nvars: usize, cap: u32, i: usize) -> TruncatedSeries {
    TruncatedSeries::variable(nvars, cap, i).expect("index in range")
}

/// `|z_k|^2 = x_k^2 + y_k^2` (zero-based `k`).
pub fn abs2(n: usize, cap: u32, k: usize) -> TruncatedSeries {
    let (x, y) = (var(2 * n, cap, 2 * k), var(2 * n, cap, 2 * k + 1));
    &(&x * &x) + &(&y * &y)
}

/// `2 x_n` plus `extra`.
fn graph(n: usize, cap: u32, extra: &TruncatedSeries) -> Result<Hypersurface> {
    let lin = var(2 * n, cap, 2 * n - 2).scale(&Rational::from_integer(2.into()));
    Hypersurface::new(n, lin.try_add(extra)?)
}

/// `2 x_2 + |z_1|^{2m}` in `C^2`; regular type `2m`.
pub fn power_sphere(m: u32, cap: u32) -> Result<Hypersurface> {
    graph(2, cap, &abs2(2, cap, 0).pow(m)?)
}

/// `2 x_2 + Re(z_1^2)`: contains the disk `(z, -z^2/2)`.
pub fn harmonic(cap: u32) -> Result<Hypersurface> {
    let x = var(4, cap, 0);
    let y = var(4, cap, 1);
    graph(2, cap, &(&(&x * &x) - &(&y * &y)))
}

/// `2 x_n`.
pub fn flat(n: usize, cap: u32) -> Result<Hypersurface> {
    graph(n, cap, &TruncatedSeries::zero(2 * n, cap))
}

/// `2 x_3 + |z_1|^2 - |z_2|^2` in `C^3`.
pub fn indefinite(cap: u32) -> Result<Hypersurface> {
    graph(3, cap, &(&abs2(3, cap, 0) - &abs2(3, cap, 1)))
}

/// Expected behaviour of a catalog entry under the exact search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedType {
    /// Exact regular type, with whether the exact search certifies it.
    Finite { lower_bound: u32, certified: bool },
    /// Contact of every order up to the cap.
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub formula: &'static str,
    pub n: usize,
    pub build: fn(u32) -> Result<Hypersurface>,
    pub expected: ExpectedType,
}

pub fn catalog() -> Vec<CatalogEntry> {
    alloc::vec![
        CatalogEntry {
            name: "sphere",
            formula: "2*x2 + abs2(z1)",
            n: 2,
            build: |cap| power_sphere(1, cap),
            expected: ExpectedType::Finite { lower_bound: 2, certified: true },
        },
        CatalogEntry {
            name: "quartic",
            formula: "2*x2 + abs2(z1)^2",
            n: 2,
            build: |cap| power_sphere(2, cap),
            expected: ExpectedType::Finite { lower_bound: 4, certified: true },
        },
        CatalogEntry {
            name: "sextic",
            formula: "2*x2 + abs2(z1)^3",
            n: 2,
            build: |cap| power_sphere(3, cap),
            expected: ExpectedType::Finite { lower_bound: 6, certified: true },
        },
        CatalogEntry {
            name: "harmonic",
            formula: "2*x2 + Re(z1^2)",
            n: 2,
            build: harmonic,
            expected: ExpectedType::Unbounded,
        },
        CatalogEntry {
            name: "flat",
            formula: "2*x2",
            n: 2,
            build: |cap| flat(2, cap),
            expected: ExpectedType::Unbounded,
        },
        CatalogEntry {
            name: "indefinite",
            formula: "2*x3 + abs2(z1) - abs2(z2)",
            n: 3,
            build: indefinite,
            expected: ExpectedType::Unbounded,
        },
    ]
}

/// A linear entry `coefficient * v_var` of the perturbation `N` at `(row, col)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationTerm {
    pub row: usize,
    pub col: usize,
    pub var: usize,
    pub coefficient: Rational,
}

/// `J = A J_std A^{-1}` with `A = I + N`, `N` strictly lower triangular
/// with entries linear in the coordinates. Terms above the diagonal are
/// ignored so that `N` stays nilpotent.
pub fn perturbed_structure(n: usize, cap: u32, terms: &[PerturbationTerm]) -> Result<ACStructure> {
    let d = 2 * n;
    let mut a: Vec<TruncatedSeries> = (0..d * d)
        .map(|k| {
            if k / d == k % d {
                TruncatedSeries::one(d, cap)
            } else {
                TruncatedSeries::zero(d, cap)
            }
        })
        .collect();
    for t in terms.iter().filter(|t| t.row > t.col && t.row < d && t.var < d) {
        let entry = TruncatedSeries::from_terms(
            d,
            cap,
            [(MultiIndex::unit(d, t.var), t.coefficient.clone())],
        )?;
        let k = t.row * d + t.col;
        a[k] = a[k].try_add(&entry)?;
    }
    ACStructure::conjugated_standard(n, &a)
}

/// `c + sum_i l_i v_i`.
pub fn affine_multiplier(nvars: usize, cap: u32, c: Rational, l: &[Rational]) -> Result<TruncatedSeries> {
    TruncatedSeries::linear(nvars, cap, l)?.try_add(&TruncatedSeries::constant(nvars, cap, c))
}
