use hardyck::quadrature::{integrate, End, Integrand, QuadValue};
use hardyck::weights::{log_e_plus, parse_weight};
use hardyck::{Integrability, PolarSpace64, WeightExpr64};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn eval_examples() {
    assert!(close(WeightExpr64::power(-2.0).eval(2.0), 0.25, 1e-15));
    let l = WeightExpr64::logplus(1.0);
    assert!(close(l.eval(1e12), 1.0, 1e-11));
    assert!(l.eval(1e3) > 1.0);
    assert!(close(WeightExpr64::new(1.0, 0.0, 1.0, 2.0).eval(1.0), 2.0 * 1f64.exp(), 1e-15));
}

#[test]
fn power_transform_examples() {
    assert_eq!(WeightExpr64::power(2.0).power_transform(-1.0), WeightExpr64::power(-2.0));
    let constant = WeightExpr64::one().power_transform(1.0 - 2.0);
    assert_eq!(constant.power, 0.0);
    assert!(close(constant.eval(3.7), 1.0, 1e-15));
    let w = WeightExpr64::new(1.0, 2.0, 0.0, 1.0).power_transform(0.5);
    assert_eq!((w.power, w.logplus, w.exprate), (0.5, 1.0, 0.0));
}

#[test]
fn integrability_examples() {
    let hl = PolarSpace64::half_line();
    let w = WeightExpr64::power(-1.0);
    assert_eq!(w.integrability_class(&hl, End::Zero), Integrability::BorderlineDiverges);
    let w = WeightExpr64::new(-1.0, -2.0, 0.0, 1.0);
    assert_eq!(w.integrability_class(&hl, End::Zero), Integrability::BorderlineConverges);
    assert!(w.integrability_class(&hl, End::Zero).converges());
    for d in [1.0, 2.0, 3.5] {
        let sp = PolarSpace64::euclidean(d);
        assert!(!WeightExpr64::power(-d).integrability_class(&sp, End::Zero).converges());
    }
    let lg = PolarSpace64::local_global(2.0, 0.5);
    assert_eq!(WeightExpr64::exponential(-1.0).integrability_class(&lg, End::Infinity), Integrability::Converges);
}

#[test]
fn log_atom_is_stable_for_tiny_radii() {
    assert!(close(log_e_plus(1e-300), 300.0 * 10f64.ln(), 1e-12));
    assert!(close(log_e_plus(1.0), (1f64.exp() + 1.0).ln(), 1e-15));
}

#[test]
fn textual_form_parses_and_round_trips() {
    let w: WeightExpr64 = parse_weight("r^-1.5 * loge(1/r)^2 * exp(-0.5*r) * 3").unwrap();
    assert_eq!(w, WeightExpr64::new(-1.5, 2.0, -0.5, 3.0));
    let back: WeightExpr64 = w.to_string().parse().unwrap();
    assert_eq!(w, back);
    let partial: WeightExpr64 = "exp(2*r)".parse().unwrap();
    assert_eq!(partial, WeightExpr64::exponential(2.0));
    let err = parse_weight::<f64>("r^ * 2").unwrap_err();
    assert!(err.column >= 3, "{err}");
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn away_from(x: f64, c: f64, gap: f64) -> bool {
    (x - c).abs() > gap
}

proptest! {
    #![proptest_config(cfg(128))]

    #[test]
    fn power_transform_commutes_with_eval(
        a in -4.0f64..4.0, b in -3.0f64..3.0, k in -2.0f64..2.0, s in 0.1f64..10.0,
        t in -3.0f64..3.0, r in 1e-3f64..20.0,
    ) {
        let w = WeightExpr64::new(a, b, k, s);
        let lhs = w.power_transform(t).eval(r);
        let rhs = w.eval(r).powf(t);
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn textual_round_trip(a in -4.0f64..4.0, b in -3.0f64..3.0, k in -2.0f64..2.0, s in 0.1f64..10.0) {
        let w = WeightExpr64::new(a, b, k, s);
        let back: WeightExpr64 = w.to_string().parse().unwrap();
        prop_assert_eq!(w, back);
    }

    #[test]
    fn zero_class_agrees_with_quadrature(
        a in -2.5f64..1.0, b in -2.0f64..2.0, d in prop::sample::select(vec![1.0, 2.0, 3.0]),
    ) {
        let sp = PolarSpace64::euclidean(d);
        let net = a + d - 1.0;
        prop_assume!(away_from(net, -1.0, 0.25));
        let w = WeightExpr64::new(a, b, 0.0, 1.0);
        let f = Integrand::new(|r: f64| w.eval(r) * sp.density(r));
        let q = integrate(&f, 0.0, 1.0, 1e-9);
        let numeric_finite = matches!(q, Ok(ref v) if matches!(v.value, QuadValue::Finite(_)));
        prop_assert_eq!(w.integrability_class(&sp, End::Zero).converges(), numeric_finite);
    }

    #[test]
    fn infinity_class_agrees_with_quadrature(
        a in -3.0f64..2.0, k in -2.0f64..1.0,
        sp in prop_oneof![
            Just(PolarSpace64::euclidean(1.0)),
            Just(PolarSpace64::euclidean(3.0)),
            Just(PolarSpace64::local_global(2.0, 0.5)),
        ],
    ) {
        let rate = k + sp.global_rate();
        prop_assume!(away_from(rate, 0.0, 0.25));
        let w = WeightExpr64::new(a, 0.0, k, 1.0);
        let f = Integrand::new(|r: f64| w.eval(r) * sp.density(r));
        let q = integrate(&f, 1.0, f64::INFINITY, 1e-9);
        let numeric_finite = matches!(q, Ok(ref v) if matches!(v.value, QuadValue::Finite(_)));
        prop_assert_eq!(w.integrability_class(&sp, End::Infinity).converges(), numeric_finite);
    }
}
