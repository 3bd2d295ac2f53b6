mod common;

use common::*;
use levitype_core::catalog::{affine_multiplier, power_sphere};
use levitype_core::disks::{compose_phi_u, contact_order, propagate_cr_jet, reparametrize_disk_jet, ContactOrder};
use levitype_core::engine::{type_search, Strategy};
use levitype_core::geometry::{standard_structure_matrix, ACStructure, VectorField};
use levitype_core::levi::{higher_levi, higher_levi_all, levi_form_bracket};
use levitype_core::linalg;
use levitype_core::{ComplexRational, Rational, TruncatedSeries};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn seeded(s: u64) -> ChaCha8Rng {
    rng(s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(s in any::<u64>()) {
        let mut r = seeded(s);
        let (a, b, c) = (
            random_poly(&mut r, 3, 4, 0, 4, 4),
            random_poly(&mut r, 3, 4, 0, 4, 4),
            random_poly(&mut r, 3, 4, 0, 4, 4),
        );
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) - &b, a);
    }

    #[test]
    fn chain_rule(s in any::<u64>()) {
        let mut r = seeded(s);
        let cap = 5;
        let f = random_poly(&mut r, 2, cap, 0, 5, 5);
        let g: Vec<TruncatedSeries> = (0..2).map(|_| random_poly(&mut r, 3, cap, 1, 3, 3)).collect();
        let lhs = f.compose(&g).unwrap().partial(0).unwrap();
        let mut rhs = TruncatedSeries::zero(3, cap);
        for (i, gi) in g.iter().enumerate() {
            let dfi = f.partial(i).unwrap().compose(&g).unwrap();
            rhs = rhs.try_add(&dfi.try_mul(&gi.partial(0).unwrap()).unwrap()).unwrap();
        }
        prop_assert!(lhs.eq_through(&rhs, cap - 1));
    }

    #[test]
    fn composition_is_associative(s in any::<u64>()) {
        let mut r = seeded(s);
        let cap = 5;
        let f = random_poly(&mut r, 2, cap, 0, 4, 4);
        let g: Vec<TruncatedSeries> = (0..2).map(|_| random_poly(&mut r, 2, cap, 1, 3, 3)).collect();
        let h: Vec<TruncatedSeries> = (0..2).map(|_| random_poly(&mut r, 2, cap, 1, 3, 3)).collect();
        let gh: Vec<TruncatedSeries> = g.iter().map(|gi| gi.compose(&h).unwrap()).collect();
        prop_assert_eq!(f.compose(&g).unwrap().compose(&h).unwrap(), f.compose(&gh).unwrap());
    }

    #[test]
    fn truncation_commutes_with_products(s in any::<u64>()) {
        let mut r = seeded(s);
        let a = random_poly(&mut r, 2, 6, 0, 6, 5);
        let b = random_poly(&mut r, 2, 6, 0, 6, 5);
        let low = (&a * &b).recapped(3);
        prop_assert_eq!(low, &a.recapped(3) * &b.recapped(3));
    }

    #[test]
    fn standard_disks_are_holomorphic(s in any::<u64>()) {
        let mut r = seeded(s);
        let n = 2 + (s % 2) as usize;
        let j = ACStructure::standard(n, 5);
        let x_jet: Vec<Vec<Rational>> = (0..5).map(|_| random_vector(&mut r, 2 * n)).collect();
        let u = propagate_cr_jet(&x_jet, &j).unwrap();
        let j0 = standard_structure_matrix(n);
        for total in 1..=5u32 {
            let mut expected = x_jet[total as usize - 1].clone();
            for qq in 0..=total {
                prop_assert_eq!(u.derivative(total - qq, qq), expected.clone());
                expected = linalg::mat_vec(&j0, &expected);
            }
        }
    }

    #[test]
    fn contact_order_is_invariant(s in any::<u64>()) {
        let mut r = seeded(s);
        let cap = 6;
        let m = power_sphere(2, cap).unwrap();
        let j = if s % 2 == 0 { ACStructure::standard(2, cap) } else { random_perturbed_structure(&mut r, 2, cap) };
        let mut u1 = random_vector(&mut r, 4);
        u1[0] = nonzero_rational(&mut r);
        let mut x_jet = vec![u1];
        x_jet.extend((1..cap).map(|_| random_vector(&mut r, 4)));
        let u = propagate_cr_jet(&x_jet, &j).unwrap();
        let base = contact_order(&m, &u).unwrap();

        let theta = vec![
            ComplexRational::new(nonzero_rational(&mut r), small_rational(&mut r)),
            ComplexRational::new(small_rational(&mut r), small_rational(&mut r)),
        ];
        let v = reparametrize_disk_jet(&u, &theta, &j).unwrap();
        prop_assert_eq!(contact_order(&m, &v).unwrap(), base);

        let f = affine_multiplier(4, cap, q(r.random_range(1..=4), 1), &random_vector(&mut r, 4)).unwrap();
        prop_assert_eq!(contact_order(&m.with_multiplier(&f).unwrap(), &u).unwrap(), base);
    }

    #[test]
    fn levi_form_is_tensorial(s in any::<u64>()) {
        let mut r = seeded(s);
        let n = 2 + (s % 2) as usize;
        let cap = 3;
        let m = random_hypersurface(&mut r, n, cap, 3);
        let j = random_structure(&mut r, n, cap, s % 3 == 0);
        let x = random_tangent_field(&mut r, &m, &j, cap, 2);
        // W = f X' with f(0) = 0 is complex tangent and vanishes at 0
        let w = random_tangent_field(&mut r, &m, &j, cap, 2);
        let f = affine_multiplier(2 * n, cap, q(0, 1), &random_vector(&mut r, 2 * n)).unwrap();
        let y = x.try_add(&w.scaled_by(&f).unwrap()).unwrap();
        prop_assert_eq!(
            levi_form_bracket(&m, &j, &x).unwrap().value,
            levi_form_bracket(&m, &j, &y).unwrap().value
        );
    }

    #[test]
    fn higher_levi_all_matches_single_orders(s in any::<u64>()) {
        let mut r = seeded(s);
        let m = random_hypersurface(&mut r, 2, 5, 4);
        let j = random_structure(&mut r, 2, 5, s % 2 == 0);
        let x_jet: Vec<Vec<Rational>> = (0..4).map(|_| random_vector(&mut r, 4)).collect();
        let all = higher_levi_all(&m, &j, &x_jet, 3).unwrap();
        for (d, row) in all.iter().enumerate() {
            for (qq, value) in row.iter().enumerate() {
                let p = d - qq;
                prop_assert_eq!(value, &higher_levi(&m, &j, &x_jet, p as u32, qq as u32).unwrap());
            }
        }
    }
}

#[test]
fn laplacian_identity_on_random_disks() {
    let mut r = rng(40);
    for _ in 0..20 {
        let m = random_hypersurface(&mut r, 2, 3, 3);
        let j = random_structure(&mut r, 2, 3, true);
        let x_jet: Vec<Vec<Rational>> = (0..3).map(|_| random_vector(&mut r, 4)).collect();
        let u = propagate_cr_jet(&x_jet, &j).unwrap();
        let trace = compose_phi_u(&m, &u).unwrap();
        assert_eq!(higher_levi(&m, &j, &x_jet, 0, 0).unwrap(), trace.laplacian_at_origin());
    }
}

#[test]
fn reparametrized_witness_keeps_contact() {
    let m = power_sphere(2, 6).unwrap();
    let j = ACStructure::standard(2, 6);
    let r = type_search(&m, &j, 4, Strategy::ExactStaged).unwrap();
    let mut x_jet = r.witness_x_jet.clone();
    x_jet.resize(5, vec![q(0, 1); 4]);
    let u = propagate_cr_jet(&x_jet, &j).unwrap();
    let one = ComplexRational::new(q(1, 1), q(0, 1));
    let v = reparametrize_disk_jet(&u, &[one.clone(), one], &j).unwrap();
    assert_eq!(contact_order(&m, &v).unwrap(), ContactOrder::Exact(4));
    let two = ComplexRational::new(q(2, 1), q(0, 1));
    let s = power_sphere(1, 6).unwrap();
    let w = reparametrize_disk_jet(&u, &[two], &j).unwrap();
    assert_eq!(contact_order(&s, &w).unwrap(), ContactOrder::Exact(2));
}

/// In `C^2`, a field whose x-jet kills every `L^{p,q}` with `p + q <= k - 1`
/// keeps doing so after multiplication by `α + βJ`.
#[test]
fn gauge_multipliers_preserve_vanishing() {
    let cap = 7;
    let m = power_sphere(3, cap).unwrap();
    let j = ACStructure::standard(2, cap);
    let mut r = rng(41);
    for _ in 0..10 {
        let x = VectorField::constant(cap, &[q(1, 1), q(0, 1), q(0, 1), q(0, 1)]).unwrap();
        let alpha = affine_multiplier(4, cap, nonzero_rational(&mut r), &random_vector(&mut r, 4)).unwrap();
        let beta = affine_multiplier(4, cap, small_rational(&mut r), &random_vector(&mut r, 4)).unwrap();
        let y = x
            .scaled_by(&alpha)
            .unwrap()
            .try_add(&j.apply(&x).unwrap().scaled_by(&beta).unwrap())
            .unwrap();
        // x-jet of the flow of Y: Y(0), ∇_Y Y(0), ...
        let mut powers = vec![y.clone()];
        for _ in 1..4 {
            let next = levitype_core::geometry::covariant_derivative(&y, powers.last().unwrap()).unwrap();
            powers.push(next);
        }
        let x_jet: Vec<Vec<Rational>> = powers.iter().map(|p| p.at_origin().unwrap()).collect();
        let all = higher_levi_all(&m, &j, &x_jet, 3).unwrap();
        assert!(all.iter().flatten().all(|v| *v == q(0, 1)));
    }
}
