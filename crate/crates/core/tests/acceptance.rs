//! Acceptance suite. Each test prints one PASS/FAIL line for its criterion
//! and then asserts it. Randomized inputs are seeded from `LEVITYPE_SEED`.
//! Every numeric comparison is exact rational equality.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::*;
use levitype_core::catalog::{affine_multiplier, catalog, harmonic, power_sphere, ExpectedType};
use levitype_core::disks::{compose_phi_u, propagate_cr_jet};
use levitype_core::engine::{
    commutation_defect, cross_validate, realize_field_from_disk, type_at_point, type_search, SearchOptions,
    Strategy, TypeReport,
};
use levitype_core::geometry::{project_to_complex_tangent, ACStructure, Hypersurface, VectorField};
use levitype_core::levi::{classify_point, higher_levi, levi_form_bracket, levi_form_hessian};
use levitype_core::linalg::{self, AffineSolution};
use levitype_core::{Rational, TruncatedSeries};
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Wall-clock budget for one catalog type search plus validation.
const CATALOG_BUDGET: Duration = Duration::from_secs(60);
/// Largest `i + j + 2` checked by the master identity.
const MASTER_ORDER: u32 = 6;
/// Order through which propagated disks are compared with the oracle.
const CR_ORACLE_ORDER: u32 = 5;
/// Highest commutation order tested.
const COMMUTATION_ORDER: u32 = 4;
const KMAX_CATALOG: u32 = 8;

fn master_identity_holds(m: &Hypersurface, j: &ACStructure, x_jet: &[Vec<Rational>]) -> bool {
    let u = propagate_cr_jet(x_jet, j).unwrap();
    let trace = compose_phi_u(m, &u).unwrap();
    for s in 0..=MASTER_ORDER - 2 {
        for jj in 0..=s {
            let i = s - jj;
            let lhs = trace.a(i + 2, jj) + trace.a(i, jj + 2);
            let rhs = higher_levi(m, j, x_jet, i, jj).unwrap();
            if lhs != rhs {
                eprintln!("master identity fails at ({i}, {jj}): {lhs} vs {rhs}");
                return false;
            }
        }
    }
    true
}

/// Returns (routes agree, correction term nonzero).
fn routes_agree(m: &Hypersurface, j: &ACStructure, x: &VectorField) -> (bool, bool) {
    let b = levi_form_bracket(m, j, x).unwrap();
    let h = levi_form_hessian(m, j, x).unwrap();
    (b.value == h.value, !h.correction_term.is_zero())
}

fn random_x_jet(rng: &mut ChaCha8Rng, d: usize, len: u32) -> Vec<Vec<Rational>> {
    (0..len).map(|_| random_vector(rng, d)).collect()
}

#[test]
fn criterion_1_master_identity() {
    let mut rng = rng(1);
    let instances = 100;
    let mut ok = 0;
    let mut perturbed = 0;
    for t in 0..instances {
        let n = 2 + t % 2;
        let pert = t % 3 != 0;
        let m = random_hypersurface(&mut rng, n, MASTER_ORDER, 4);
        let j = random_structure(&mut rng, n, MASTER_ORDER, pert);
        perturbed += usize::from(pert);
        let x_jet = random_x_jet(&mut rng, 2 * n, MASTER_ORDER);
        ok += usize::from(master_identity_holds(&m, &j, &x_jet));
    }
    let pass = ok == instances;
    report(
        1,
        "master identity",
        pass,
        &format!("{ok}/{instances} instances exact ({perturbed} with perturbed J), i+j+2 <= {MASTER_ORDER}"),
    );
    assert!(pass);
}

#[test]
fn criterion_2_levi_route_agreement() {
    let mut rng = rng(2);
    let instances = 120;
    let (mut ok, mut corrected) = (0, 0);
    for t in 0..instances {
        let n = 2 + t % 2;
        let m = random_hypersurface(&mut rng, n, 3, 3);
        let j = random_structure(&mut rng, n, 3, t % 4 != 0);
        let x = random_tangent_field(&mut rng, &m, &j, 3, 2);
        let (agree, nonzero) = routes_agree(&m, &j, &x);
        ok += usize::from(agree);
        corrected += usize::from(nonzero);
    }
    let pass = ok == instances && corrected >= 10;
    report(
        2,
        "Levi route agreement",
        pass,
        &format!("{ok}/{instances} agree, correction term nonzero in {corrected}"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_scaling_and_covariance() {
    let mut rng = rng(3);
    let instances = 100;
    let (mut scaling, mut covariance, mut classes) = (0, 0, 0);
    for t in 0..instances {
        let n = 2 + t % 2;
        let d = 2 * n;
        let cap = 3;
        let m = random_hypersurface(&mut rng, n, cap, 3);
        let j = random_structure(&mut rng, n, cap, t % 2 == 0);
        let x = random_tangent_field(&mut rng, &m, &j, cap, 2);
        let base = levi_form_bracket(&m, &j, &x).unwrap().value;

        let (a0, b0) = (small_rational(&mut rng), small_rational(&mut rng));
        let alpha = affine_multiplier(d, cap, a0.clone(), &random_vector(&mut rng, d)).unwrap();
        let beta = affine_multiplier(d, cap, b0.clone(), &random_vector(&mut rng, d)).unwrap();
        let jx = j.apply(&x).unwrap();
        let y = x
            .scaled_by(&alpha)
            .unwrap()
            .try_add(&jx.scaled_by(&beta).unwrap())
            .unwrap();
        let scaled = levi_form_bracket(&m, &j, &y).unwrap().value;
        let factor = &a0 * &a0 + &b0 * &b0;
        scaling += usize::from(scaled == &factor * &base && levi_form_hessian(&m, &j, &y).unwrap().value == scaled);

        let c = q(rng.random_range(1..=5), rng.random_range(1..=3));
        let f = affine_multiplier(d, m.cap(), c.clone(), &random_vector(&mut rng, d)).unwrap();
        let mf = m.with_multiplier(&f).unwrap();
        let v = VectorField::constant(cap, &x.at_origin().unwrap()).unwrap();
        let xf = project_to_complex_tangent(&v, &mf.recapped(cap), &j.recapped(cap)).unwrap();
        let lf = levi_form_bracket(&mf, &j, &xf).unwrap().value;
        covariance += usize::from(lf == &c * &base);

        let before = classify_point(&m, &j).unwrap().class;
        let after = classify_point(&mf, &j).unwrap().class;
        classes += usize::from(before == after);
    }
    let pass = scaling == instances && covariance == instances && classes == instances;
    report(
        3,
        "scaling law and defining-function covariance",
        pass,
        &format!("scaling {scaling}/{instances}, covariance {covariance}/{instances}, classification {classes}/{instances}"),
    );
    assert!(pass);
}

fn catalog_reports() -> Vec<(String, Hypersurface, ACStructure, TypeReport, Duration)> {
    let cap = KMAX_CATALOG + 2;
    catalog()
        .into_iter()
        .map(|entry| {
            let start = Instant::now();
            let m = (entry.build)(cap).unwrap();
            let j = ACStructure::standard(entry.n, cap);
            let r = type_search(&m, &j, KMAX_CATALOG, Strategy::ExactStaged).unwrap();
            (entry.name.to_string(), m, j, r, start.elapsed())
        })
        .collect()
}

#[test]
fn criterion_4_catalog_types() {
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for ((name, _, _, r, elapsed), entry) in catalog_reports().into_iter().zip(catalog()) {
        let ok_type = match entry.expected {
            ExpectedType::Finite { lower_bound, certified } => {
                r.lower_bound == lower_bound && r.certified_exact == certified && !r.cap_reached
            }
            ExpectedType::Unbounded => r.cap_reached && r.lower_bound == KMAX_CATALOG && !r.certified_exact,
        };
        let ok_witness = r.witness_disk.is_some() && r.witness_field_jet.is_some();
        if !(ok_type && ok_witness && elapsed < CATALOG_BUDGET) {
            failures.push(name.clone());
        }
        summary.push(format!(
            "{name}={}{}",
            r.lower_bound,
            if r.cap_reached { "+" } else if r.certified_exact { "!" } else { "?" }
        ));
    }
    // the explicit disk (z, -z^2/2) on 2 x2 + Re(z1^2)
    let cap = KMAX_CATALOG + 2;
    let m = harmonic(cap).unwrap();
    let j = ACStructure::standard(2, cap);
    let r = type_search(&m, &j, KMAX_CATALOG, Strategy::ExactStaged).unwrap();
    let zero = q(0, 1);
    let expected_u1 = vec![q(1, 1), zero.clone(), zero.clone(), zero.clone()];
    let expected_u2 = vec![zero.clone(), zero.clone(), q(-1, 1), zero.clone()];
    let explicit = r.witness_x_jet.first() == Some(&expected_u1)
        && r.witness_x_jet.get(1) == Some(&expected_u2)
        && r.witness_x_jet[2..].iter().all(|v| linalg::is_zero_vec(v));
    if !explicit {
        failures.push("harmonic witness".into());
    }
    let pass = failures.is_empty();
    report(
        4,
        "catalog types",
        pass,
        &format!("{} (! certified, + cap reached); failures {failures:?}", summary.join(" ")),
    );
    assert!(pass);
}

/// `2 x2 + Re(a z1^2 + b z1^3) + (random terms of degree 3..=4)`, whose Levi
/// form vanishes at the origin for the standard structure.
fn degenerate_instance(rng: &mut ChaCha8Rng, cap: u32) -> Hypersurface {
    let d = 4;
    let x = TruncatedSeries::variable(d, cap, 0).unwrap();
    let y = TruncatedSeries::variable(d, cap, 1).unwrap();
    let (a, b) = (small_rational(rng), small_rational(rng));
    let re2 = &(&x * &x) - &(&y * &y);
    let re3 = &(&(&x * &x) * &x) - &(&(&x * &y) * &y).scale(&q(3, 1));
    let mut phi = TruncatedSeries::variable(d, cap, 2).unwrap().scale(&q(2, 1));
    phi = phi.try_add(&re2.scale(&a)).unwrap().try_add(&re3.scale(&b)).unwrap();
    phi = phi.try_add(&random_poly(rng, d, cap, 3, 4, 3)).unwrap();
    Hypersurface::new(2, phi).unwrap()
}

#[test]
fn criterion_5_cross_validation() {
    let mut validated = Vec::new();
    let mut failures = Vec::new();
    for (name, m, j, r, _) in catalog_reports() {
        match cross_validate(&m, &j, &r) {
            Ok(v) => validated.push(format!("{name}:k={}", v.k)),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    let mut rng = rng(5);
    let k_max = 6;
    let cap = k_max + 2;
    let (mut random_ok, mut deep) = (0, 0);
    let target = 25;
    let mut attempts = 0;
    while random_ok < target && attempts < 200 {
        attempts += 1;
        let m = degenerate_instance(&mut rng, cap);
        let j = random_structure(&mut rng, 2, cap, attempts % 3 == 0);
        let r = match type_search(&m, &j, k_max, Strategy::ExactStaged) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("random search: {e}"));
                continue;
            }
        };
        if r.witness_disk.is_none() {
            continue;
        }
        match cross_validate(&m, &j, &r) {
            Ok(_) => {
                random_ok += 1;
                deep += usize::from(r.lower_bound >= 3);
            }
            Err(e) => failures.push(format!("random: {e}")),
        }
    }
    let pass = failures.is_empty() && random_ok >= target;
    report(
        5,
        "cross-validation",
        pass,
        &format!(
            "catalog [{}]; random {random_ok}/{target} ({deep} with witness order >= 3); failures {failures:?}",
            validated.join(" ")
        ),
    );
    assert!(pass);
}

/// Constant part plus homogeneous terms of degree `>= lowest`.
fn graded_field(rng: &mut ChaCha8Rng, d: usize, cap: u32, lowest: u32) -> VectorField {
    let comps = (0..d)
        .map(|_| {
            TruncatedSeries::constant(d, cap, small_rational(rng))
                .try_add(&random_poly(rng, d, cap, lowest, cap - 1, 2))
                .unwrap()
        })
        .collect();
    VectorField::new(comps).unwrap()
}

#[test]
fn criterion_6_commutation_equivalence() {
    let mut rng = rng(6);
    let cap = COMMUTATION_ORDER;
    let mut fields: Vec<(VectorField, ACStructure, u32)> = Vec::new();
    for t in 0..50u32 {
        let n = 2 + (t % 2) as usize;
        let j = random_structure(&mut rng, n, cap, t % 4 == 3);
        let lowest = 1 + t % 3;
        fields.push((graded_field(&mut rng, 2 * n, cap, lowest), j, COMMUTATION_ORDER));
    }
    // fields realized along disks of high contact commute to high order
    let search_cap = 8;
    for m in [harmonic(search_cap).unwrap(), power_sphere(2, search_cap).unwrap()] {
        let j = ACStructure::standard(2, search_cap);
        let r = type_search(&m, &j, search_cap - 2, Strategy::ExactStaged).unwrap();
        let u = r.witness_disk.clone().unwrap();
        let k = (r.lower_bound - 2).min(COMMUTATION_ORDER - 1);
        let x = realize_field_from_disk(&m, &j, &u.truncated(k + 1), k).unwrap();
        fields.push((x, j.recapped(k + 1), k + 1));
    }
    let total = fields.len();
    let mut agree = 0;
    let mut histogram: BTreeMap<u32, usize> = BTreeMap::new();
    for (x, j, order) in &fields {
        let c = commutation_defect(x, j, *order).unwrap();
        let all_equal = c.criterion_orders.iter().all(|&o| o == c.max_vanishing_order);
        if c.criteria_agree && all_equal {
            agree += 1;
        } else {
            eprintln!("criteria disagree: {:?}", c.criterion_orders);
        }
        *histogram.entry(c.max_vanishing_order).or_default() += 1;
    }
    let pass = agree == total;
    report(
        6,
        "commutation criteria equivalence",
        pass,
        &format!("{agree}/{total} fields agree; vanishing-order histogram {histogram:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_7_semicontinuity_scan() {
    let k_max = 6;
    let cap = k_max + 2;
    let m = power_sphere(2, cap).unwrap();
    let j = ACStructure::standard(2, cap);
    let opts = SearchOptions {
        k_max,
        strategy: Strategy::ExactStaged,
        field_witness: true,
    };
    let ts = [q(0, 1), q(1, 4), q(-1, 4), q(1, 2), q(-1, 2), q(1, 1), q(-1, 1)];
    let mut ok = true;
    let mut types = Vec::new();
    for t in &ts {
        let t4 = t * t * t * t;
        let point = vec![t.clone(), q(0, 1), -(t4 / q(2, 1)), q(0, 1)];
        let r = type_at_point(2, m.phi(), j.entries(), &point, cap, &opts).unwrap();
        let expected = if t.is_zero() { 4 } else { 2 };
        ok &= r.lower_bound == expected && r.certified_exact;
        types.push(format!("t={t}:{}", r.lower_bound));
    }
    report(7, "semicontinuity scan", ok, &types.join(" "));
    assert!(ok);
}

/// Taylor coefficients of the solution of `u_y = J(u) u_x` with prescribed
/// x-derivatives, found degree by degree as the unique root of an affine
/// residual probed one unknown at a time.
fn cr_oracle(x_jet: &[Vec<Rational>], j: &ACStructure) -> BTreeMap<(u32, u32), Vec<Rational>> {
    let k = x_jet.len() as u32;
    let d = x_jet[0].len();
    let jk = j.recapped(k);
    let mut fact = q(1, 1);
    let mut known: BTreeMap<(u32, u32), Vec<Rational>> = BTreeMap::new();
    for deg in 1..=k {
        fact = fact * q(deg as i64, 1);
        known.insert((deg, 0), x_jet[deg as usize - 1].iter().map(|c| c / &fact).collect());
        let slots: Vec<(u32, u32)> = (1..=deg).map(|qq| (deg - qq, qq)).collect();
        let unknowns = slots.len() * d;
        let residual = |t: &[Rational]| -> Vec<Rational> {
            let mut c = known.clone();
            for (s, slot) in slots.iter().enumerate() {
                c.insert(*slot, t[s * d..(s + 1) * d].to_vec());
            }
            let u: Vec<TruncatedSeries> = (0..d)
                .map(|i| {
                    TruncatedSeries::from_terms(
                        2,
                        k,
                        c.iter().map(|(&(p, qq), v)| (levitype_core::MultiIndex::new(&[p, qq]), v[i].clone())),
                    )
                    .unwrap()
                })
                .collect();
            let ju: Vec<TruncatedSeries> = jk.entries().iter().map(|e| e.compose(&u).unwrap()).collect();
            let mut out = Vec::new();
            for p in 0..deg {
                let qq = deg - 1 - p;
                for r in 0..d {
                    let mut val = u[r].partial(1).unwrap().coefficient_of(&[p, qq]);
                    for col in 0..d {
                        let prod = ju[r * d + col].try_mul(&u[col].partial(0).unwrap().recapped(k)).unwrap();
                        val -= prod.coefficient_of(&[p, qq]);
                    }
                    out.push(val);
                }
            }
            out
        };
        let zero = vec![q(0, 1); unknowns];
        let r0 = residual(&zero);
        let mut cols = Vec::with_capacity(unknowns);
        for i in 0..unknowns {
            let mut e = zero.clone();
            e[i] = q(1, 1);
            let ri = residual(&e);
            cols.push(ri.iter().zip(&r0).map(|(a, b)| a - b).collect::<Vec<_>>());
        }
        let a: linalg::Matrix = (0..r0.len()).map(|row| cols.iter().map(|c| c[row].clone()).collect()).collect();
        let rhs: Vec<Rational> = r0.iter().map(|c| -c).collect();
        let AffineSolution::Solved { particular, rank } = linalg::solve(&a, &rhs, unknowns) else {
            panic!("CR system at degree {deg} is inconsistent");
        };
        assert_eq!(rank, unknowns, "CR system at degree {deg} is underdetermined");
        for (s, slot) in slots.iter().enumerate() {
            known.insert(*slot, particular[s * d..(s + 1) * d].to_vec());
        }
    }
    known
}

#[test]
fn criterion_8_non_integrable_smoke() {
    let mut rng = rng(8);
    let structures = 12;
    let (mut jets, mut squares, mut master, mut routes, mut corrected) = (0, 0, 0, 0, 0);
    for t in 0..structures {
        let n = 2 + t % 2;
        let cap = MASTER_ORDER;
        let j = random_perturbed_structure(&mut rng, n, cap);
        squares += usize::from(squares_to_minus_one(&j));
        let x_jet = random_x_jet(&mut rng, 2 * n, CR_ORACLE_ORDER);
        let u = propagate_cr_jet(&x_jet, &j).unwrap();
        let oracle = cr_oracle(&x_jet, &j);
        let matches = oracle.iter().all(|(&(p, qq), v)| u.taylor(p, qq) == *v);
        jets += usize::from(matches);

        let m = random_hypersurface(&mut rng, n, cap, 4);
        let x_jet = random_x_jet(&mut rng, 2 * n, MASTER_ORDER);
        master += usize::from(master_identity_holds(&m, &j, &x_jet));
        let m3 = m.recapped(3);
        let j3 = j.recapped(3);
        let x = random_tangent_field(&mut rng, &m3, &j3, 3, 2);
        let (agree, nonzero) = routes_agree(&m3, &j3, &x);
        routes += usize::from(agree);
        corrected += usize::from(nonzero);
    }
    let pass = jets == structures && squares == structures && master == structures && routes == structures;
    report(
        8,
        "non-integrable smoke test",
        pass,
        &format!(
            "{structures} structures: J^2=-I {squares}, CR jets vs oracle {jets}, master identity {master}, routes {routes} (correction nonzero {corrected})"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_padding_independence() {
    let mut rng = rng(9);
    let instances = 60;
    let mut ok = 0;
    for t in 0..instances {
        let n = 2 + t % 2;
        let s = (t % 4) as u32;
        let cap = s + 2;
        let m = random_hypersurface(&mut rng, n, 5, 4);
        let j = random_structure(&mut rng, n, cap, t % 2 == 0);
        let x_jet = random_x_jet(&mut rng, 2 * n, s + 1);
        let mut padded = x_jet.clone();
        padded.push(random_vector(&mut rng, 2 * n));
        let u = propagate_cr_jet(&padded, &j).unwrap();
        let trace = compose_phi_u(&m, &u).unwrap();
        let good = (0..=s).all(|qq| {
            let p = s - qq;
            let direct = trace.a(p + 2, qq) + trace.a(p, qq + 2);
            direct == higher_levi(&m, &j, &x_jet, p, qq).unwrap()
        });
        ok += usize::from(good);
    }
    let pass = ok == instances;
    report(
        9,
        "padding independence",
        pass,
        &format!("{ok}/{instances} instances exact for p+q <= 3"),
    );
    assert!(pass);
}
