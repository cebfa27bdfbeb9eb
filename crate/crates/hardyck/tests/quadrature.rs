use hardyck::quadrature::{cumulative, integrate, sup_search, End, Integrand, QuadError, QuadValue};
use hardyck::{InfClass, ZeroClass};
use proptest::prelude::*;

fn val(v: QuadValue<f64>) -> f64 {
    v.finite().expect("finite integral")
}

#[test]
fn exponential_on_half_line() {
    let f = Integrand::new(|r: f64| (-r).exp()).with_infinity_hint(InfClass::new(-1.0, 0.0));
    let r = integrate(&f, 0.0, f64::INFINITY, 1e-10).unwrap();
    assert!((val(r.value) - 1.0).abs() < 1e-10);
    assert!(r.abs_error_estimate < 1e-9);
}

#[test]
fn exponential_without_hints() {
    let f = Integrand::new(|r: f64| (-r).exp());
    let r = integrate(&f, 0.0, f64::INFINITY, 1e-10).unwrap();
    assert!((val(r.value) - 1.0).abs() < 1e-9);
}

#[test]
fn inverse_square_root_singularity() {
    let f = Integrand::new(|r: f64| r.powf(-0.5)).with_zero_hint(ZeroClass::new(-0.5, 0.0));
    let r = integrate(&f, 0.0, 1.0, 1e-10).unwrap();
    assert!((val(r.value) - 2.0).abs() < 1e-9);
}

#[test]
fn logarithmic_divergence_at_zero() {
    let f = Integrand::new(|r: f64| r.recip()).with_zero_hint(ZeroClass::new(-1.0, 0.0));
    let r = integrate(&f, 0.0, 1.0, 1e-10).unwrap();
    assert_eq!(r.value, QuadValue::Divergent(End::Zero));
}

#[test]
fn slowly_decaying_log_weight_converges_without_hints() {
    // In u = -ln r the integrand is e^{-0.27u} u^{1.66}: it rises until u ≈ 6
    // while the doubling windows make segment sums grow.
    let (a, b) = (-0.73f64, 1.66f64);
    let f = Integrand::new(move |r: f64| r.powf(a) * (std::f64::consts::E + 1.0 / r).ln().powf(b));
    let hinted = Integrand::new(move |r: f64| r.powf(a) * (std::f64::consts::E + 1.0 / r).ln().powf(b))
        .with_zero_hint(ZeroClass::new(a, b));
    let plain = val(integrate(&f, 0.0, 1.0, 1e-9).unwrap().value);
    let reference = val(integrate(&hinted, 0.0, 1.0, 1e-11).unwrap().value);
    assert!((plain - reference).abs() < 1e-7 * reference, "{plain} vs {reference}");
}

#[test]
fn divergence_at_infinity() {
    let f = Integrand::new(|r: f64| (1.0 + r).recip()).with_infinity_hint(InfClass::new(0.0, -1.0));
    assert_eq!(integrate(&f, 0.0, f64::INFINITY, 1e-10).unwrap().value, QuadValue::Divergent(End::Infinity));
}

#[test]
fn negative_integrand_is_rejected() {
    let f = Integrand::new(|r: f64| r - 0.5);
    assert!(matches!(integrate(&f, 0.0, 1.0, 1e-10), Err(QuadError::NonPositiveIntegrand { .. })));
}

#[test]
fn cumulative_examples() {
    let one = Integrand::new(|_: f64| 1.0);
    let c = cumulative(&one, &[1.0, 2.0, 3.0], 1e-12).unwrap();
    for (a, b) in c.iter().zip([1.0, 2.0, 3.0]) {
        assert!((a - b).abs() < 1e-12);
    }
    let lin = Integrand::new(|r: f64| r);
    let c = cumulative(&lin, &[1.0, 2.0], 1e-12).unwrap();
    assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] - 2.0).abs() < 1e-12);
    let sing = Integrand::new(|r: f64| r.powf(-0.5)).with_zero_hint(ZeroClass::new(-0.5, 0.0));
    assert!((cumulative(&sing, &[1.0], 1e-12).unwrap()[0] - 2.0).abs() < 1e-10);
    let div = Integrand::new(|r: f64| r.powi(-2)).with_zero_hint(ZeroClass::new(-2.0, 0.0));
    assert!(cumulative(&div, &[1.0], 1e-12).is_err());
}

#[test]
fn sup_search_examples() {
    let s = sup_search(|r: f64| Ok(r * (-r).exp()), 1e-6, 1e6, 1e-8).unwrap();
    assert!((val(s.sup) - (-1f64).exp()).abs() < 1e-12);
    assert!((s.argmax - 1.0).abs() < 1e-6);
    let s = sup_search(|_: f64| Ok(1.0), 1e-6, 1e6, 1e-8).unwrap();
    assert_eq!(val(s.sup), 1.0);
    let s = sup_search(|r: f64| Ok(r), 1e-8, 1e8, 1e-8).unwrap();
    assert_eq!(s.sup, QuadValue::Divergent(End::Infinity));
}

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn power_substitution_is_exact(s in -0.9f64..3.0) {
        let f = Integrand::new(move |r: f64| r.powf(s)).with_zero_hint(ZeroClass::new(s, 0.0));
        let v = val(integrate(&f, 0.0, 1.0, 1e-10).unwrap().value);
        prop_assert!((v - 1.0 / (s + 1.0)).abs() <= 1e-9 / (s + 1.0));
    }

    #[test]
    fn integral_is_monotone_in_upper_limit(b in 0.1f64..10.0, extra in 0.0f64..10.0, k in 0.1f64..3.0) {
        let f = Integrand::new(move |r: f64| r.sqrt() * (-k * r).exp());
        let lo = val(integrate(&f, 0.0, b, 1e-10).unwrap().value);
        let hi = val(integrate(&f, 0.0, b + extra, 1e-10).unwrap().value);
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn unimodal_argmax_is_located(c in 0.01f64..100.0) {
        // R e^{-R/c} peaks at R = c.
        let s = sup_search(move |r: f64| Ok(r * (-r / c).exp()), 1e-6, 1e6, 1e-9).unwrap();
        prop_assert!((s.argmax - c).abs() <= 1e-6 * c.max(1.0));
    }

    #[test]
    fn gamma_integrals(a in 0.5f64..5.0) {
        let f = Integrand::new(move |r: f64| r.powf(a - 1.0) * (-r).exp())
            .with_hints(Some(ZeroClass::new(a - 1.0, 0.0)), Some(InfClass::new(-1.0, a - 1.0)));
        let v = val(integrate(&f, 0.0, f64::INFINITY, 1e-11).unwrap().value);
        let g = statrs::function::gamma::gamma(a);
        prop_assert!((v - g).abs() <= 1e-9 * g);
    }
}
