//! Formal pseudoholomorphic disks `u : (C, 0) -> (R^{2n}, 0)` and their
//! traces `phi ∘ u`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::geometry::{ACStructure, Hypersurface};
use crate::series::{factorial, MultiIndex, TruncatedSeries};
use crate::{linalg, ComplexRational, Error, Rational, Result};

fn fact(n: u32) -> Rational {
    Rational::from_integer(factorial(n))
}

/// Jet of order `k` of a formal `J`-holomorphic disk, stored as Taylor
/// coefficients `c_{p,q}` of `x^p y^q` for `1 <= p + q <= k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiskJet {
    dim: usize,
    order: u32,
    coeffs: BTreeMap<(u32, u32), Vec<Rational>>,
}

impl DiskJet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Taylor coefficient of `x^p y^q`.
    pub fn taylor(&self, p: u32, q: u32) -> Vec<Rational> {
        self.coeffs
            .get(&(p, q))
            .cloned()
            .unwrap_or_else(|| vec![Rational::zero(); self.dim])
    }

    /// `∂^{p+q} u / ∂x^p ∂y^q (0)`.
    pub fn derivative(&self, p: u32, q: u32) -> Vec<Rational> {
        let f = fact(p) * fact(q);
        self.taylor(p, q).into_iter().map(|c| c * &f).collect()
    }

    /// The x-derivatives `u_1, ..., u_k`.
    pub fn x_jet(&self) -> Vec<Vec<Rational>> {
        (1..=self.order).map(|m| self.derivative(m, 0)).collect()
    }

    pub fn is_regular(&self) -> bool {
        self.order >= 1 && !linalg::is_zero_vec(&self.taylor(1, 0))
    }

    /// Components as two-variable series `(x, y)` with cap equal to the order.
    pub fn components(&self) -> Vec<TruncatedSeries> {
        (0..self.dim)
            .map(|i| {
                TruncatedSeries::from_terms(
                    2,
                    self.order,
                    self.coeffs
                        .iter()
                        .map(|(&(p, q), v)| (MultiIndex::new(&[p, q]), v[i].clone())),
                )
                .expect("two-variable indices")
            })
            .collect()
    }

    /// The same disk known only through order `k`.
    pub fn truncated(&self, k: u32) -> DiskJet {
        DiskJet {
            dim: self.dim,
            order: k.min(self.order),
            coeffs: self
                .coeffs
                .iter()
                .filter(|((p, q), _)| p + q <= k)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }
}

/// Builds the unique formal solution of `∂u/∂y = J(u) ∂u/∂x` with
/// `∂^m u/∂x^m (0) = x_jet[m-1]`.
///
/// Coefficients are filled degree by degree. Within degree `d` the
/// coefficient of `x^p y^{q+1}` comes from the `x^p y^q` coefficient of
/// `J(u) ∂u/∂x`, whose only degree-`d` input is `J(0)` times the already
/// known `x^{p+1} y^q` coefficient.
pub fn propagate_cr_jet(x_jet: &[Vec<Rational>], j: &ACStructure) -> Result<DiskJet> {
    let dim = j.dim();
    let k = x_jet.len() as u32;
    for v in x_jet {
        if v.len() != dim {
            return Err(Error::ShapeMismatch {
                what: "disk vector dimension",
                left: v.len(),
                right: dim,
            });
        }
    }
    let available = j.reliable_degree().map_or(-1, |d| d as i32);
    if k >= 1 && available < k as i32 - 1 {
        return Err(Error::TruncationDepth {
            needed: k as i32 - 1,
            available,
        });
    }
    let jk = j.recapped(k.max(1));
    let mut coeffs: BTreeMap<(u32, u32), Vec<Rational>> = BTreeMap::new();
    let zero = vec![Rational::zero(); dim];
    for d in 1..=k {
        let f = fact(d);
        coeffs.insert(
            (d, 0),
            x_jet[d as usize - 1].iter().map(|c| c / &f).collect(),
        );
        // J(u) through degree d - 1 only needs u through degree d - 1
        let ju = compose_matrix(&jk, &coeffs, dim, k.max(1), d - 1)?;
        for q in 0..d {
            let p = d - 1 - q;
            let mut acc = zero.clone();
            for a in 0..=p {
                for b in 0..=q {
                    let r = p - a + 1;
                    let s = q - b;
                    let Some(c) = coeffs.get(&(r, s)) else { continue };
                    let scale = Rational::from_integer(r.into());
                    for row in 0..dim {
                        for col in 0..dim {
                            let e = ju[row * dim + col].coefficient_of(&[a, b]);
                            if !e.is_zero() && !c[col].is_zero() {
                                acc[row] += e * &c[col] * &scale;
                            }
                        }
                    }
                }
            }
            let div = Rational::from_integer((q + 1).into());
            coeffs.insert((p, q + 1), acc.into_iter().map(|c| c / &div).collect());
        }
    }
    coeffs.retain(|_, v| !linalg::is_zero_vec(v));
    Ok(DiskJet {
        dim,
        order: k,
        coeffs,
    })
}

/// Entries of `J(u)` for `u` truncated at degree `deg`.
fn compose_matrix(
    j: &ACStructure,
    coeffs: &BTreeMap<(u32, u32), Vec<Rational>>,
    dim: usize,
    cap: u32,
    deg: u32,
) -> Result<Vec<TruncatedSeries>> {
    let comps: Vec<TruncatedSeries> = (0..dim)
        .map(|i| {
            TruncatedSeries::from_terms(
                2,
                cap,
                coeffs
                    .iter()
                    .filter(|((p, q), _)| p + q <= deg)
                    .map(|(&(p, q), v)| (MultiIndex::new(&[p, q]), v[i].clone())),
            )
        })
        .collect::<Result<_>>()?;
    if j.is_constant() {
        return j
            .entries()
            .iter()
            .map(|e| Ok(TruncatedSeries::constant(2, cap, e.constant_term()?)))
            .collect();
    }
    let trimmed: Vec<TruncatedSeries> = comps.iter().map(|c| c.trimmed(deg)).collect();
    j.entries()
        .iter()
        .map(|e| e.trimmed(deg).compose(&trimmed))
        .collect()
}

/// Jet of `phi ∘ u` in the disk variables `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskTrace {
    series: TruncatedSeries,
}

impl DiskTrace {
    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }

    /// Highest total degree known exactly.
    pub fn order(&self) -> u32 {
        self.series.reliable_degree().unwrap_or(0)
    }

    /// `a_{p,q} = ∂^{p+q}(phi ∘ u)/∂x^p ∂y^q (0)`.
    pub fn a(&self, p: u32, q: u32) -> Rational {
        self.series.coefficient_of(&[p, q]) * fact(p) * fact(q)
    }

    /// Taylor coefficient of `x^p y^q`.
    pub fn taylor(&self, p: u32, q: u32) -> Rational {
        self.series.coefficient_of(&[p, q])
    }

    /// `Δ(phi ∘ u)(0) = a_{2,0} + a_{0,2}`.
    pub fn laplacian_at_origin(&self) -> Rational {
        self.a(2, 0) + self.a(0, 2)
    }
}

pub fn compose_phi_u(m: &Hypersurface, u: &DiskJet) -> Result<DiskTrace> {
    if m.dim() != u.dim() {
        return Err(Error::ShapeMismatch {
            what: "disk dimension",
            left: u.dim(),
            right: m.dim(),
        });
    }
    let cap = u.order().max(1);
    let phi = m.phi().recapped(cap);
    let comps: Vec<TruncatedSeries> = u.components().iter().map(|c| c.recapped(cap)).collect();
    Ok(DiskTrace {
        series: phi.compose(&comps)?,
    })
}

/// Contact order of a disk with the hypersurface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContactOrder {
    Exact(u32),
    /// Every coefficient up to degree `n - 1` vanishes.
    AtLeast(u32),
}

impl ContactOrder {
    /// The certified lower bound.
    pub fn lower_bound(self) -> u32 {
        match self {
            ContactOrder::Exact(d) | ContactOrder::AtLeast(d) => d,
        }
    }

    pub fn is_at_least(self, k: u32) -> bool {
        self.lower_bound() >= k
    }
}

pub fn contact_order(m: &Hypersurface, u: &DiskJet) -> Result<ContactOrder> {
    if !u.is_regular() {
        return Err(Error::NonRegularDisk);
    }
    let trace = compose_phi_u(m, u)?;
    Ok(match trace.series().valuation() {
        Some(d) => ContactOrder::Exact(d),
        None => ContactOrder::AtLeast(trace.order() + 1),
    })
}

/// Real and imaginary parts of `θ(x) = sum_j θ_j x^j` on the real axis.
fn theta_on_axis(theta: &[ComplexRational], cap: u32) -> Result<[TruncatedSeries; 2]> {
    let part = |im: bool| {
        TruncatedSeries::from_terms(
            2,
            cap,
            theta.iter().enumerate().map(|(j, c)| {
                let v = if im { c.im.clone() } else { c.re.clone() };
                (MultiIndex::new(&[j as u32 + 1, 0]), v)
            }),
        )
    };
    Ok([part(false)?, part(true)?])
}

/// Jet of `u ∘ θ` for a holomorphic reparametrization
/// `θ(z) = θ_1 z + θ_2 z^2 + ...` (coefficients listed from `θ_1`).
///
/// `u ∘ θ` is again `J`-holomorphic, so it is determined by its restriction
/// to the real axis; that restriction is composed directly and then
/// propagated.
pub fn reparametrize_disk_jet(
    u: &DiskJet,
    theta: &[ComplexRational],
    j: &ACStructure,
) -> Result<DiskJet> {
    if theta.first().is_none_or(|t| t.re.is_zero() && t.im.is_zero()) {
        return Err(Error::DegenerateReparametrization);
    }
    let cap = u.order().max(1);
    let axis = theta_on_axis(theta, cap)?;
    let comps = u.components();
    let restricted: Vec<TruncatedSeries> = comps
        .iter()
        .map(|c| c.compose(&axis))
        .collect::<Result<_>>()?;
    let x_jet: Vec<Vec<Rational>> = (1..=u.order())
        .map(|m| {
            let f = fact(m);
            restricted
                .iter()
                .map(|s| s.coefficient_of(&[m, 0]) * &f)
                .collect()
        })
        .collect();
    propagate_cr_jet(&x_jet, j)
}

/// Full two-variable composition `u(θ(x + iy))`, without re-propagation.
pub fn compose_disk_with_theta(u: &DiskJet, theta: &[ComplexRational]) -> Result<Vec<TruncatedSeries>> {
    let cap = u.order().max(1);
    let x = TruncatedSeries::variable(2, cap, 0)?;
    let y = TruncatedSeries::variable(2, cap, 1)?;
    // z^j as (re, im) pairs
    let mut re = TruncatedSeries::zero(2, cap);
    let mut im = TruncatedSeries::zero(2, cap);
    let (mut zr, mut zi) = (x.clone(), y.clone());
    for c in theta {
        re = re.try_add(&zr.scale(&c.re).try_sub(&zi.scale(&c.im))?)?;
        im = im.try_add(&zr.scale(&c.im).try_add(&zi.scale(&c.re))?)?;
        let nr = zr.try_mul(&x)?.try_sub(&zi.try_mul(&y)?)?;
        let ni = zr.try_mul(&y)?.try_add(&zi.try_mul(&x)?)?;
        zr = nr;
        zi = ni;
    }
    let g = [re, im];
    u.components().iter().map(|c| c.compose(&g)).collect()
}

/// Disk jet from explicit two-variable component series.
pub fn disk_from_components(comps: &[TruncatedSeries]) -> Result<DiskJet> {
    let dim = comps.len();
    let order = comps.first().map_or(0, TruncatedSeries::cap);
    let mut coeffs: BTreeMap<(u32, u32), Vec<Rational>> = BTreeMap::new();
    for (i, c) in comps.iter().enumerate() {
        if c.nvars() != 2 || c.cap() != order {
            return Err(Error::ShapeMismatch {
                what: "disk component",
                left: c.nvars(),
                right: 2,
            });
        }
        for (m, v) in c.terms() {
            if m.degree() == 0 {
                return Err(Error::NonzeroConstantTerm { index: i });
            }
            coeffs
                .entry((m.exponent(0), m.exponent(1)))
                .or_insert_with(|| vec![Rational::zero(); dim])[i] = v.clone();
        }
    }
    Ok(DiskJet { dim, order, coeffs })
}
