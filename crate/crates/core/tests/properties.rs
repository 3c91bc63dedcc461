use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use starkit::dynamics::flow_map;
use starkit::star::{bracket, damped_ad, star_commutator, star_product, BilinearStar};
use starkit::symbols::{approx_equal, Var};
use starkit::transition::DerivOperator;
use starkit::verify::{random_polynomial, random_symbol};
use starkit::{parse, Params, Symbol};

fn poly(seed: u64, degree: u32) -> Symbol {
    random_polynomial(&mut ChaCha8Rng::seed_from_u64(seed), degree)
}

fn close(a: &Symbol, b: &Symbol, tol: f64) -> bool {
    approx_equal(a, b, 1.0).unwrap().relative() <= tol
}

fn stars(gamma: f64, s: f64) -> Vec<BilinearStar> {
    let params = Params::default().with_gamma(gamma);
    vec![
        BilinearStar::moyal(params),
        BilinearStar::damped(gamma, params),
        BilinearStar::standard(params),
        BilinearStar::husimi(s, params),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn star_products_are_associative(seed in any::<u64>(), gamma in 0.0..0.5f64, s in 0.5..2.0f64) {
        let (f, g, h) = (poly(seed, 3), poly(seed ^ 1, 3), poly(seed ^ 2, 3));
        for star in stars(gamma, s) {
            let left = star_product(&star_product(&f, &g, &star).unwrap(), &h, &star).unwrap();
            let right = star_product(&f, &star_product(&g, &h, &star).unwrap(), &star).unwrap();
            prop_assert!(close(&left, &right, 1e-10), "{:?}", star.kind());
        }
    }

    #[test]
    fn conjugation_reverses_order_under_the_adjoint(seed in any::<u64>(), gamma in 0.0..0.5f64) {
        let (f, g) = (poly(seed, 3), poly(seed ^ 7, 3));
        for star in stars(gamma, 1.0) {
            let lhs = star_product(&f, &g, &star).unwrap().conjugate();
            let rhs = star_product(&g.conjugate(), &f.conjugate(), &star.adjoint()).unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-12), "{:?}", star.kind());
        }
    }

    #[test]
    fn star_unit_and_distributivity(seed in any::<u64>(), gamma in 0.0..0.5f64) {
        let (f, g, h) = (poly(seed, 3), poly(seed ^ 3, 3), poly(seed ^ 4, 3));
        for star in stars(gamma, 1.0) {
            let one = Symbol::one();
            prop_assert!(close(&star_product(&one, &f, &star).unwrap(), &f, 0.0));
            prop_assert!(close(&star_product(&f, &one, &star).unwrap(), &f, 0.0));
            let lhs = star_product(&f, &(&g + &h), &star).unwrap();
            let rhs = &star_product(&f, &g, &star).unwrap() + &star_product(&f, &h, &star).unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-12));
        }
    }

    #[test]
    fn commutators_reduce_to_brackets(seed in any::<u64>(), gamma in 0.0..0.5f64) {
        let params = Params::default().with_gamma(gamma).with_hbar(1e-6);
        let (f, g) = (poly(seed, 3), poly(seed ^ 5, 3));
        let to_classical = num_complex::Complex64::new(0.0, -1.0 / params.hbar);
        let moyal = star_commutator(&f, &g, &BilinearStar::moyal(params)).unwrap().scale(to_classical);
        prop_assert!(close(&moyal, &bracket(&f, &g, 0.0, &params), 1e-9));
        let damped = damped_ad(&f, &g, gamma, &params).unwrap().scale(to_classical);
        prop_assert!(close(&damped, &-bracket(&g, &f, gamma, &params), 1e-5));
    }

    #[test]
    fn printed_symbols_reparse(seed in any::<u64>()) {
        let f = random_symbol(&mut ChaCha8Rng::seed_from_u64(seed));
        let back = parse(&f.to_string()).unwrap();
        prop_assert!(approx_equal(&f, &back, 1e-10).unwrap().equal, "{}", f);
    }

    #[test]
    fn partial_derivatives_commute(seed in any::<u64>()) {
        let f = random_symbol(&mut ChaCha8Rng::seed_from_u64(seed));
        let qp = f.differentiate(Var::Q, 1).differentiate(Var::P, 1);
        let pq = f.differentiate(Var::P, 1).differentiate(Var::Q, 1);
        prop_assert!(approx_equal(&qp, &pq, 1e-12).unwrap().equal);
        prop_assert!(approx_equal(&qp, &f.mixed_derivative(1, 1), 1e-12).unwrap().equal);
    }

    #[test]
    fn pointwise_ring_axioms(seed in any::<u64>()) {
        let (f, g, h) = (poly(seed, 3), poly(seed ^ 9, 3), poly(seed ^ 11, 3));
        prop_assert!(close(&(&f * &g), &(&g * &f), 1e-14));
        prop_assert!(close(&(&f * &(&g + &h)), &(&(&f * &g) + &(&f * &h)), 1e-12));
        prop_assert!(close(&(&(&f * &g) * &h), &(&f * &(&g * &h)), 1e-12));
        prop_assert!((&f - &f).is_zero());
    }

    #[test]
    fn transition_inverse_round_trips(seed in any::<u64>(), gamma in 0.0..0.5f64) {
        let params = Params::default().with_gamma(gamma);
        let f = random_symbol(&mut ChaCha8Rng::seed_from_u64(seed));
        for op in [DerivOperator::damped(gamma, params), DerivOperator::standard(params)] {
            let back = op.inverse().apply(&op.apply(&f).unwrap()).unwrap();
            prop_assert!(close(&back, &f, 1e-10), "{:?}", op.kind());
        }
    }

    #[test]
    fn flow_maps_form_a_contracting_semigroup(t1 in -3.0..3.0f64, t2 in -3.0..3.0f64, gamma in 0.0..0.5f64) {
        let params = Params::default().with_gamma(gamma);
        let composed = flow_map(t1, &params).compose(&flow_map(t2, &params));
        let direct = flow_map(t1 + t2, &params);
        for (x, y) in [(1.0, 0.0), (0.0, 1.0), (0.3, -0.8)] {
            let (a, b) = (composed.apply(x, y), direct.apply(x, y));
            prop_assert!((a.0 - b.0).abs() + (a.1 - b.1).abs() < 1e-10);
        }
        let det = flow_map(t1, &params).det();
        prop_assert!((det - (-2.0 * gamma * t1).exp()).abs() < 1e-10 * det.max(1.0));
    }
}

#[test]
fn damped_product_is_not_conjugation_symmetric() {
    let params = Params::default().with_gamma(0.1);
    let star = BilinearStar::damped(0.1, params);
    let p = Symbol::p();
    let pp = star_product(&p, &p, &star).unwrap();
    assert!(!close(&pp.conjugate(), &pp, 1e-3));
    let moyal = star_product(&p, &p, &BilinearStar::moyal(params)).unwrap();
    assert!(close(&moyal.conjugate(), &moyal, 0.0));
}

#[test]
fn mixing_damping_rates_breaks_associativity() {
    let params = Params::default();
    let (s1, s2) = (BilinearStar::damped(0.1, params), BilinearStar::damped(0.3, params));
    let p = Symbol::p();
    let left = star_product(&star_product(&p, &p, &s1).unwrap(), &p, &s2).unwrap();
    let right = star_product(&p, &star_product(&p, &p, &s2).unwrap(), &s1).unwrap();
    assert!(!close(&left, &right, 1e-3));
    assert!(close(&left, &parse("p^3 - 0.7*i*p").unwrap(), 1e-14));
    assert!(close(&right, &parse("p^3 - 0.5*i*p").unwrap(), 1e-14));
}
