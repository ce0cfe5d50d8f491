use num_rational::Rational64;
use proptest::prelude::*;

use crproj::{ExactJet, Exponent, JetForm, RealJet};

const NV: usize = 3;

fn exponents(order: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for a in 0..=order {
        for b in 0..=order - a {
            for c in 0..=order - a - b {
                out.push(vec![a, b, c]);
            }
        }
    }
    out
}

fn exact_jet(order: u32) -> impl Strategy<Value = ExactJet> {
    let n = exponents(order).len();
    prop::collection::vec(-3i64..=3, n).prop_map(move |cs| {
        let terms = exponents(order).into_iter().zip(cs).map(|(e, c)| (e, Rational64::from_integer(c)));
        ExactJet::from_terms(NV, order, terms).unwrap()
    })
}

fn real_jet(order: u32) -> impl Strategy<Value = RealJet> {
    let n = exponents(order).len();
    prop::collection::vec(-1.0f64..1.0, n)
        .prop_map(move |cs| RealJet::from_terms(NV, order, exponents(order).into_iter().zip(cs)).unwrap())
}

/// Truncated product by explicit double loop over exponent vectors.
fn convolution(a: &ExactJet, b: &ExactJet) -> ExactJet {
    let order = a.order().min(b.order());
    let mut out = ExactJet::zero(NV, order);
    for ea in exponents(order) {
        for eb in exponents(order) {
            let sum: Vec<u32> = ea.iter().zip(&eb).map(|(x, y)| x + y).collect();
            if sum.iter().sum::<u32>() > order {
                continue;
            }
            let e = Exponent::from_slice(&sum).unwrap();
            let v = out.coeff(e) + a.coeff_of(&ea) * b.coeff_of(&eb);
            out.insert(e, v);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_convolution(a in exact_jet(4), b in exact_jet(3)) {
        prop_assert_eq!(&a * &b, convolution(&a, &b));
    }

    #[test]
    fn ring_axioms_hold_exactly(a in exact_jet(3), b in exact_jet(3), c in exact_jet(3)) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
    }

    #[test]
    fn reciprocal_is_inverse(a in exact_jet(4), c0 in prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3])) {
        let mut a = a;
        a.insert(Exponent::ZERO, Rational64::from_integer(c0));
        let inv = a.reciprocal().unwrap();
        prop_assert_eq!(&a * &inv, ExactJet::one(NV, 4));
    }

    #[test]
    fn truncation_order_is_minimum(a in exact_jet(4), b in exact_jet(2)) {
        prop_assert_eq!((&a + &b).order(), 2);
        prop_assert_eq!((&a * &b).order(), 2);
        prop_assert_eq!(a.partial(0).order(), 3);
    }

    #[test]
    fn mixed_partials_commute(a in exact_jet(4), i in 0..NV, j in 0..NV) {
        prop_assert_eq!(a.partial(i).partial(j), a.partial(j).partial(i));
    }

    #[test]
    fn leibniz_rule(a in exact_jet(4), b in exact_jet(4), i in 0..NV) {
        let lhs = (&a * &b).partial(i);
        let rhs = &(&a.partial(i) * &b) + &(&a * &b.partial(i));
        prop_assert_eq!(lhs, rhs.truncate(3));
    }

    #[test]
    fn exterior_derivative_squares_to_zero(a in real_jet(4)) {
        prop_assert!(JetForm::differential(&a).exterior_derivative().max_abs() == 0.0);
    }

    #[test]
    fn partials_match_central_differences(
        a in real_jet(4),
        x in prop::collection::vec(-0.5f64..0.5, NV),
        i in 0..NV,
    ) {
        let h = 1e-5;
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let fd = (a.eval(&xp) - a.eval(&xm)) / (2.0 * h);
        prop_assert!((fd - a.partial(i).eval(&x)).abs() < 1e-7);
    }

    #[test]
    fn composition_matches_evaluation(
        a in real_jet(4),
        subs in prop::collection::vec(real_jet(4), NV),
        x in prop::collection::vec(-1.0f64..1.0, NV),
    ) {
        let subs: Vec<RealJet> = subs
            .into_iter()
            .map(|mut s| {
                s.insert(Exponent::ZERO, 0.0);
                s
            })
            .collect();
        let composed = a.compose(&subs).unwrap();
        // Along the ray t·x the truncation error is O(t^5).
        let t = 1e-3;
        let p: Vec<f64> = x.iter().map(|v| v * t).collect();
        let inner: Vec<f64> = subs.iter().map(|s| s.eval(&p)).collect();
        let err = (composed.eval(&p) - a.eval(&inner)).abs();
        prop_assert!(err < 1e-12, "err {err:e}");
    }
}

#[test]
fn exact_coefficients_survive_composition() {
    let one = Rational64::from_integer(1);
    let half = Rational64::new(1, 2);
    let x = ExactJet::var(NV, 4, 0);
    let y = ExactJet::var(NV, 4, 1);
    let f = ExactJet::from_terms(NV, 4, [(vec![2, 0, 0], half), (vec![0, 1, 0], one)]).unwrap();
    let g = f.compose(&[&x + &y, &x * &y, ExactJet::zero(NV, 4)]).unwrap();
    let expected = &(&(&x * &x) + &(&y * &y)).scale(&half) + &(&x * &y).scale(&Rational64::from_integer(2));
    assert_eq!(g, expected);
}
