use num::{One, Zero};
use proptest::prelude::*;

use polypoisson::coord_reduction::{closed_tensor, coords, gauge_normalize, pushforward_check, TensorParams, TENSOR_NAMES};
use polypoisson::dynamics::transfer_invariants;
use polypoisson::exchange_algebra::{verify_structure, StructureCheck};
use polypoisson::gen_nu::{casimir_coeffs, quad_coeff};
use polypoisson::lattice_ops::{phi_equation, phi_special, phi_special_detailed};
use polypoisson::report::{render, Format, ReportDoc};
use polypoisson::sample::{random_nonvanishing, random_odd_kernel, random_polygon, random_seq, trial_rng};
use polypoisson::{BracketSpec, DPoly, Fields, PerSeq, Rational, Tensor};

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn bracket_is_antisymmetric_and_jacobi(seed in any::<u64>(), n in 3usize..6) {
        let phi = random_odd_kernel(n, &mut trial_rng(seed, 77));
        let spec = BracketSpec::standard(2, phi).unwrap();
        prop_assert!(verify_structure(&spec, StructureCheck::Antisymmetry, 1, seed).unwrap().is_zero());
        prop_assert!(verify_structure(&spec, StructureCheck::Jacobi, 1, seed).unwrap().is_zero());
        prop_assert!(verify_structure(&spec, StructureCheck::Momentum, 1, seed).unwrap().is_zero());
    }

    #[test]
    fn special_phi_is_odd_and_solves_its_equation(nu in 2usize..7, k in 0usize..6, n in 3usize..14) {
        prop_assume!(k < nu);
        let sol = phi_special_detailed(nu, k, n).unwrap();
        prop_assert!(sol.phi.is_odd());
        let (a, b) = phi_equation(nu, k);
        let lhs = a.kernel(n).compose(sol.phi.kernel()).unwrap();
        prop_assert_eq!(lhs, b.kernel(n));
    }

    #[test]
    fn linearity_holds_for_every_positive_k(nu in 2usize..6, k in 1usize..5, n in 3usize..12) {
        prop_assume!(k < nu);
        let phi = phi_special(nu, k, n).unwrap();
        prop_assert!(quad_coeff(nu, k, phi.kernel()).unwrap().is_zero());
    }

    #[test]
    fn casimir_choice_works_iff_coprime(nu in 2usize..6, n in 3usize..12) {
        let phi = phi_special(nu, 0, n).unwrap();
        let zero = casimir_coeffs(nu, phi.kernel()).unwrap().max_abs().is_zero();
        prop_assert_eq!(zero, gcd(nu, n) == 1);
    }

    #[test]
    fn fields_round_trip_through_polygons(seed in any::<u64>(), nu in 2usize..5, extra in 0usize..4) {
        let n = nu + extra.max(1);
        let mut rng = trial_rng(seed, 0);
        let mut a: Vec<PerSeq> = (1..nu).map(|_| random_seq(n, &mut rng)).collect();
        a.insert(0, random_nonvanishing(n, &mut rng));
        let f = Fields::new(a).unwrap();
        let back = coords(&f.polygon().unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn transfer_determinant_is_the_product_of_a0(seed in any::<u64>(), nu in 2usize..5, n in 3usize..7) {
        let f = coords(&random_polygon(nu, n, &mut trial_rng(seed, 1))).unwrap();
        let e = transfer_invariants(&f);
        let prod = f.a(0).values().iter().fold(Rational::one(), |p, x| p * x);
        prop_assert_eq!(e[nu - 1].clone(), prod);
    }

    #[test]
    fn gauge_reaches_any_beta_with_matching_product(seed in any::<u64>(), n in prop::sample::select(vec![3usize, 5, 7])) {
        let mut rng = trial_rng(seed, 2);
        let w = random_polygon(2, n, &mut rng);
        let prod: Rational = coords(&w).unwrap().rho().values().iter().product();
        let mut beta = random_nonvanishing(n, &mut rng).into_values();
        let rest: Rational = beta[1..].iter().product();
        beta[0] = prod / rest;
        let beta = PerSeq::new(beta).unwrap();
        let g = gauge_normalize(&w, &beta).unwrap();
        let f = coords(&g).unwrap();
        prop_assert_eq!(f.rho(), &beta);
    }

    #[test]
    fn miura_pushforward_holds(seed in any::<u64>(), n in prop::sample::select(vec![3usize, 5, 7, 9])) {
        prop_assert!(pushforward_check(&random_nonvanishing(n, &mut trial_rng(seed, 3))).unwrap().is_zero());
    }
}

#[test]
fn miura_pushforward_is_singular_for_even_periods() {
    for n in [4, 6, 8] {
        let u = random_nonvanishing(n, &mut trial_rng(0, 0));
        assert!(matches!(pushforward_check(&u), Err(polypoisson::Error::SingularOperator { nullity: 1 })));
    }
}

#[test]
fn tensors_round_trip_through_json() {
    let n = 5;
    let phi = random_odd_kernel(n, &mut trial_rng(1, 0));
    let beta = random_nonvanishing(n, &mut trial_rng(1, 1));
    let params = TensorParams::new(n).with_phi(phi).with_beta(beta);
    let mut rng = trial_rng(1, 2);
    for name in TENSOR_NAMES {
        let t = closed_tensor(name, &params).unwrap().tensor;
        let text = serde_json::to_string(&t).unwrap();
        let back: Tensor = serde_json::from_str(&text).unwrap();
        let point: Vec<PerSeq> = t.families().iter().map(|_| random_nonvanishing(n, &mut rng)).collect();
        assert_eq!(back.eval(&point).unwrap(), t.eval(&point).unwrap(), "{name}");
        let poly = t.to_poly().unwrap();
        let back: Tensor = serde_json::from_str(&serde_json::to_string(&Tensor::Poly(poly)).unwrap()).unwrap();
        assert_eq!(back.eval(&point).unwrap(), t.eval(&point).unwrap(), "{name} as polynomial");
    }
}

#[test]
fn dpoly_json_uses_string_rationals() {
    let p = DPoly::from_terms(&[(-1, 2), (3, -1)]);
    let text = serde_json::to_string(&p).unwrap();
    assert_eq!(text, r#"{"terms":{"-1":"2","3":"-1"}}"#);
    assert_eq!(serde_json::from_str::<DPoly>(&text).unwrap(), p);
}

#[test]
fn reports_round_trip() {
    let docs = vec![
        ReportDoc::exact("a", serde_json::json!({"N": 5}), Rational::zero(), 3),
        ReportDoc::exact("b", serde_json::Value::Null, Rational::new(7.into(), (-3).into()), 3),
    ];
    let text = render(&docs, Format::Json);
    assert!(text.contains("\"-7/3\""));
    let back: Vec<ReportDoc> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, docs);
    assert_eq!(render(&back, Format::Json), text);
}
