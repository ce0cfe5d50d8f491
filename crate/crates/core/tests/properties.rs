//! Invariance and structural properties on seeded random inputs.

use nalgebra::DMatrix;
use proptest::prelude::*;

use crproj::adaptation::{apply_block, apply_shear, corollary_cps_check, MixedTerms};
use crproj::convexity::{max_norm, pseudoconvexity, sclc_test, SecondOrderData};
use crproj::corpus::{random_block_motion, random_perturbed_quadric, random_sclc_data, random_shear_motion, rng};
use crproj::duality::{dual_second_order, selfdual_second_order, MatchOutcome};
use crproj::invariants::compute_k;
use crproj::pipeline::{analyze, Config};
use crproj::surface_io::{quadric_automorphism, regraph};
use crproj::Complex64;

fn close(a: &SecondOrderData, b: &SecondOrderData) -> f64 {
    max_norm(&(&a.p - &b.p)).max(max_norm(&(&a.l - &b.l)))
}

fn unordered(inertia: (usize, usize, usize)) -> (usize, usize, usize) {
    (inertia.0.max(inertia.1), inertia.0.min(inertia.1), inertia.2)
}

fn config() -> Config {
    Config { order: 5, pmax: 4, ..Config::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn block_motions_form_a_cocycle(seed in any::<u64>(), k in 1usize..4) {
        let mut r = rng(seed);
        let data = random_sclc_data(k, &mut r);
        let g1 = random_block_motion(k, &mut r);
        let g2 = random_block_motion(k, &mut r);
        let stepwise = apply_block(&apply_block(&data, &g1).unwrap(), &g2).unwrap();
        let direct = apply_block(&data, &g1.compose(&g2).unwrap()).unwrap();
        prop_assert!(close(&stepwise, &direct) < 1e-9 * (1.0 + max_norm(&direct.p) + max_norm(&direct.l)));
    }

    #[test]
    fn shears_fix_p_and_l(seed in any::<u64>(), k in 1usize..4) {
        let mut r = rng(seed);
        let data = random_sclc_data(k, &mut r);
        let mixed = MixedTerms {
            pam: nalgebra::DVector::from_fn(k, |i, _| Complex64::new(i as f64, 0.5)),
            pmm: Complex64::new(0.0, 0.3),
        };
        let (moved, _) = apply_shear(&data, &mixed, &random_shear_motion(k, &mut r));
        prop_assert!(close(&moved, &data) < 1e-12);
    }

    #[test]
    fn levi_inertia_is_block_invariant(
        seed in any::<u64>(),
        signs in prop::collection::vec(prop::sample::select(vec![-1.0, 0.0, 1.0]), 1..4),
    ) {
        let k = signs.len();
        let mut r = rng(seed);
        let base = random_sclc_data(k, &mut r);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(k, |i, _| Complex64::new(signs[i], 0.0)));
        let data = SecondOrderData::new(base.p.clone(), d * Complex64::new(0.0, -1.0));
        let g = random_block_motion(k, &mut r);
        let moved = apply_block(&data, &g).unwrap();
        let before = pseudoconvexity(&data);
        let after = pseudoconvexity(&moved);
        prop_assert_eq!(unordered(before.inertia()), unordered(after.inertia()));
    }

    #[test]
    fn dual_is_an_involution_preserving_sclc(seed in any::<u64>(), k in 1usize..4) {
        let data = random_sclc_data(k, &mut rng(seed));
        let dual = dual_second_order(&data).unwrap();
        prop_assert!(sclc_test(&dual.dual, seed).unwrap().sclc);
        let double = dual_second_order(&dual.dual).unwrap();
        prop_assert!(close(&double.dual, &data) < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn selfdual_outcome_is_block_invariant(seed in any::<u64>(), k in 1usize..3) {
        let mut r = rng(seed);
        let data = random_sclc_data(k, &mut r);
        let moved = apply_block(&data, &random_block_motion(k, &mut r)).unwrap();
        let a = selfdual_second_order(&data, seed).unwrap();
        let b = selfdual_second_order(&moved, seed).unwrap();
        prop_assert_eq!(a.outcome, b.outcome);
        if a.outcome == MatchOutcome::Match {
            prop_assert!(b.residual < 1e-6);
        }
    }

    #[test]
    fn regraph_preserves_levi_class(seed in any::<u64>()) {
        let mut r = rng(seed);
        let germ = random_perturbed_quadric(2, 5, 0.2, &mut r).unwrap();
        let k = DMatrix::from_fn(3, 3, |i, j| Complex64::new(0.1 * (i as f64 + 1.0), 0.05 * (j as f64 - 1.0)));
        let map = quadric_automorphism(&k).unwrap();
        let moved = regraph(&germ, &map).unwrap();
        let a = pseudoconvexity(&analyze(&germ, &config()).unwrap().data);
        let b = pseudoconvexity(&analyze(&moved, &config()).unwrap().data);
        prop_assert_eq!(a.class.is_definite(), b.class.is_definite());
        prop_assert_eq!(unordered(a.inertia()), unordered(b.inertia()));
    }

    #[test]
    fn adapted_random_germs_satisfy_frame_relations(seed in any::<u64>()) {
        let germ = random_perturbed_quadric(2, 5, 0.4, &mut rng(seed)).unwrap();
        let a = analyze(&germ, &config()).unwrap();
        let check = corollary_cps_check(&a.adapted.mc, &a.adapted.table);
        prop_assert!(check.passes(1e-8), "{check:?}");
        let p3 = a.p3.as_ref().unwrap();
        prop_assert!(p3.symmetry_residual() < 1e-8);
    }

    #[test]
    fn k_inverts_h_on_sclc_germs(seed in any::<u64>()) {
        let germ = random_perturbed_quadric(2, 5, 0.3, &mut rng(seed)).unwrap();
        let a = analyze(&germ, &config()).unwrap();
        let k = compute_k(&a.mc, &a.table).unwrap();
        prop_assert!(k.inverse_defect(&a.table) < 1e-9);
        prop_assert!(k.symmetry_residual() < 1e-8);
    }
}
