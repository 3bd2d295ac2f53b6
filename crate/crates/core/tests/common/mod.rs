#![allow(dead_code)]

use levitype_core::catalog::{perturbed_structure, PerturbationTerm};
use levitype_core::geometry::{project_to_complex_tangent, ACStructure, Hypersurface, VectorField};
use levitype_core::{MultiIndex, Rational, TruncatedSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x1e71_7e9e;

pub fn seed() -> u64 {
    std::env::var("LEVITYPE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed() ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    q(rng.random_range(-3..=3), rng.random_range(1..=3))
}

pub fn nonzero_rational(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let r = small_rational(rng);
        if r != q(0, 1) {
            return r;
        }
    }
}

pub fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<Rational> {
    (0..d).map(|_| small_rational(rng)).collect()
}

fn random_exponents(rng: &mut ChaCha8Rng, nvars: usize, degree: u32) -> Vec<u32> {
    let mut e = vec![0u32; nvars];
    for _ in 0..degree {
        e[rng.random_range(0..nvars)] += 1;
    }
    e
}

/// Random polynomial with `terms` monomials of degree in `lo..=hi`.
pub fn random_poly(
    rng: &mut ChaCha8Rng,
    nvars: usize,
    cap: u32,
    lo: u32,
    hi: u32,
    terms: usize,
) -> TruncatedSeries {
    let mut out = TruncatedSeries::zero(nvars, cap);
    for _ in 0..terms {
        let deg = rng.random_range(lo..=hi);
        let m = MultiIndex::new(&random_exponents(rng, nvars, deg));
        let t = TruncatedSeries::from_terms(nvars, cap, [(m, nonzero_rational(rng))]).unwrap();
        out = out.try_add(&t).unwrap();
    }
    out
}

/// `2 x_n + (random polynomial of degree 2..=max_deg)`.
pub fn random_hypersurface(rng: &mut ChaCha8Rng, n: usize, cap: u32, max_deg: u32) -> Hypersurface {
    let d = 2 * n;
    let lin = TruncatedSeries::variable(d, cap, d - 2)
        .unwrap()
        .scale(&q(2, 1));
    let extra = random_poly(rng, d, cap, 2, max_deg, 3 + 2 * n);
    Hypersurface::new(n, lin.try_add(&extra).unwrap()).unwrap()
}

pub fn random_perturbation(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> Vec<PerturbationTerm> {
    let d = 2 * n;
    (0..terms)
        .map(|_| {
            let row = rng.random_range(1..d);
            PerturbationTerm {
                row,
                col: rng.random_range(0..row),
                var: rng.random_range(0..d),
                coefficient: nonzero_rational(rng),
            }
        })
        .collect()
}

/// Conjugate of the standard structure by `I + N`, `N` linear and strictly
/// lower triangular, with at least one nonzero term.
pub fn random_perturbed_structure(rng: &mut ChaCha8Rng, n: usize, cap: u32) -> ACStructure {
    loop {
        let count = rng.random_range(1..=3);
        let terms = random_perturbation(rng, n, count);
        let j = perturbed_structure(n, cap, &terms).unwrap();
        if !j.is_constant() {
            return j;
        }
    }
}

pub fn random_structure(rng: &mut ChaCha8Rng, n: usize, cap: u32, perturbed: bool) -> ACStructure {
    if perturbed {
        random_perturbed_structure(rng, n, cap)
    } else {
        ACStructure::standard(n, cap)
    }
}

/// Random polynomial field of degree `<= max_deg`.
pub fn random_field(rng: &mut ChaCha8Rng, d: usize, cap: u32, max_deg: u32) -> VectorField {
    let comps = (0..d)
        .map(|_| {
            let c = TruncatedSeries::constant(d, cap, small_rational(rng));
            c.try_add(&random_poly(rng, d, cap, 1, max_deg.max(1), 2)).unwrap()
        })
        .collect();
    VectorField::new(comps).unwrap()
}

/// Projection of a random field onto the complex tangent bundle, with
/// nonzero value at the origin.
pub fn random_tangent_field(
    rng: &mut ChaCha8Rng,
    m: &Hypersurface,
    j: &ACStructure,
    cap: u32,
    max_deg: u32,
) -> VectorField {
    let mc = m.recapped(cap);
    let jc = j.recapped(cap);
    loop {
        let v = random_field(rng, m.dim(), cap, max_deg);
        let x = project_to_complex_tangent(&v, &mc, &jc).unwrap();
        if x.at_origin().unwrap().iter().any(|c| *c != q(0, 1)) {
            return x;
        }
    }
}

/// `J∘J + I` vanishes through the cap.
pub fn squares_to_minus_one(j: &ACStructure) -> bool {
    let d = j.dim();
    for r in 0..d {
        for c in 0..d {
            let mut acc = TruncatedSeries::zero(d, j.cap());
            for k in 0..d {
                acc = acc.try_add(&j.entry(r, k).try_mul(j.entry(k, c)).unwrap()).unwrap();
            }
            let expected = if r == c { q(-1, 1) } else { q(0, 1) };
            let residual = acc.try_sub(&TruncatedSeries::constant(d, j.cap(), expected)).unwrap();
            if !residual.is_zero() {
                return false;
            }
        }
    }
    true
}

pub fn report(criterion: u32, title: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion} [{}] {title}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}
