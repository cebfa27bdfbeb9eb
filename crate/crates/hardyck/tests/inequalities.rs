use hardyck::hardy_core::HardyOptions;
use hardyck::inequalities::*;
use hardyck::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::*;

#[test]
fn validator_truth_table() {
    let mut admissible = [0usize; 4];
    let mut reductions = [0usize; 2];
    for (s, expected) in truth_table_samples(7, 500) {
        let v = validate(&s);
        assert_eq!(v.admissible, expected, "{s:?}: {:?}", v.violations);
        assert_eq!(v.admissible, v.violations.is_empty());
        let slot = match s.kind {
            InequalityKind::HardySobolev { .. } => 0,
            InequalityKind::CriticalHardy { .. } => 1,
            InequalityKind::Ckn { theta, .. } => {
                if let Some(red) = reduce(&s) {
                    // Reductions must not change admissibility.
                    assert_eq!(validate(&red).admissible, expected, "{:?} -> {:?}", s.kind, red.kind);
                    reductions[usize::from(theta != 1.0)] += 1;
                }
                2
            }
            _ => 3,
        };
        admissible[slot] += usize::from(expected);
    }
    assert!(admissible.iter().all(|&n| n > 0), "{admissible:?}");
    assert!(reductions.iter().all(|&n| n > 0), "{reductions:?}");
}

#[test]
fn ckn_theta_one_reduces_to_hardy_sobolev() {
    let kind = InequalityKind::Ckn { p: 2.0, q: 3.0, r: 4.0, theta: 1.0, a: -0.1, b: 0.3, alpha: 0.6 };
    let s = spec(kind, 1.0);
    let red = reduce(&s).unwrap();
    assert_eq!(red.kind, InequalityKind::HardySobolev { p: 2.0, q: 4.0, alpha: 0.6, beta: 0.4 });
    assert_eq!(validate(&s).admissible, validate(&red).admissible);

    let opts = CheckOptions::default();
    let inputs = [InputFamily::bump(0.2, 1.0)];
    let k = KernelBound64::noncompact(0.6, 1.0, 0.0, 0.0);
    let ckn = check_ckn(&s, &inputs, &k, &opts).unwrap();
    let hs = check_hardy_sobolev(&red, &inputs, &k, &opts).unwrap();
    for (x, y) in ckn.ratio.refinement_trend.iter().zip(&hs.refinement_trend) {
        assert!((x - y).abs() <= 1e-10 * y, "{x} vs {y}");
    }
    assert!(ckn.holder.iter().all(|h| h.pass));
}

#[test]
fn ckn_with_zero_weights_is_gagliardo_nirenberg() {
    let s = spec(InequalityKind::Ckn { p: 2.0, q: 2.0, r: 3.0, theta: 0.8, a: 0.0, b: 0.0, alpha: 0.5 }, 1.0);
    let red = reduce(&s).unwrap();
    assert_eq!(red.kind, InequalityKind::Gn { p: 2.0, q: 2.0, r: 3.0, theta: 0.8, alpha: 0.5 });
    assert_eq!(validate(&s).admissible, validate(&red).admissible);
    assert_eq!(validate(&s).conditions, validate(&red).conditions);
}

#[test]
fn hardy_sobolev_with_q_eq_p_is_hardy() {
    let s = spec(InequalityKind::HardySobolev { p: 2.0, q: 2.0, alpha: 0.4, beta: 0.8 }, 3.0);
    let red = reduce(&s).unwrap();
    assert_eq!(red.kind, InequalityKind::Hardy { p: 2.0, alpha: 0.4 });
    assert!(validate(&red).admissible);
}

#[test]
fn critical_boundary_probe() {
    let opts = HardyOptions::default();
    let b2 = |q: f64| {
        let s = spec(InequalityKind::CriticalHardy { p: 2.0, q, r: 3.0 }, 1.0);
        critical_hardy_b2(&s, 1.0, &opts).unwrap()
    };
    let below = b2(3.8);
    assert!(matches!(below.value, BValue::Finite(v) if v.is_finite() && v > 0.0), "{:?}", below.value);
    let above = b2(4.2);
    assert!(matches!(above.value, BValue::Divergent(_)), "{:?}", above.value);
}

#[test]
fn hardy_sobolev_refinement_stability() {
    let opts = CheckOptions::default();
    let inputs =
        [InputFamily::bump(0.0, 1.0), InputFamily::bump(1.5, 0.7), InputFamily::Gaussian { center: -1.0, width: 0.5 }];
    for set in STABLE_SETS {
        let s = hs_spec(set);
        assert!(validate(&s).admissible, "{set:?}");
        let k = KernelBound64::noncompact(set.2, 1.0, 0.0, 0.0);
        let rep = check_hardy_sobolev(&s, &inputs, &k, &opts).unwrap();
        assert_eq!(rep.refinement_trend.len(), 3);
        let lo = rep.refinement_trend.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rep.refinement_trend.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo < 1.1, "{set:?}: {:?}", rep.refinement_trend);
        assert_eq!(rep.verdict, RatioVerdict::Bounded);
    }
    for set in UNSTABLE_SETS {
        let s = hs_spec(set);
        assert!(!validate(&s).admissible, "{set:?}");
        let k = KernelBound64::noncompact(set.2, 1.0, 0.0, 0.0);
        let rep = check_hardy_sobolev(&s, &[InputFamily::concentrating(1.0)], &k, &opts).unwrap();
        for w in rep.refinement_trend.windows(2) {
            assert!(w[1] >= 2.0 * w[0], "{set:?}: {:?}", rep.refinement_trend);
        }
        assert_eq!(rep.verdict, RatioVerdict::Unbounded);
    }
}

#[test]
fn region_decomposition_bound() {
    let opts = CheckOptions::default();
    let base = opts.grid(1).unwrap();
    let inputs = [InputFamily::bump(0.0, 1.0), InputFamily::Gaussian { center: 0.5, width: 0.3 }, InputFamily::concentrating(1.0)];
    for set in STABLE_SETS.iter().chain(&UNSTABLE_SETS) {
        let s = hs_spec(*set);
        let k = KernelBound64::noncompact(set.2, 1.0, 0.0, 0.0);
        for input in &inputs {
            for level in 0..3 {
                let grid = base.refined(level);
                let reg = region_decomposition(&s, input, &k, &grid, level).unwrap();
                assert!(reg.bound_holds, "{set:?} {input:?} level {level}: {reg:?}");
                assert!(reg.lhs > 0.0);
            }
        }
    }
}

#[test]
fn holder_steps_on_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..1000 {
        let n = rng.gen_range(4..200);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let radii: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..10.0)).collect();
        let measure = rng.gen_range(0.001..1.0);
        let q: f64 = rng.gen_range(0.5..5.0);
        let theta: f64 = if case % 5 == 0 { 1.0 } else { rng.gen_range(0.05..1.0) };
        // θ > (r - q)/r means r < q/(1-θ).
        let r_max = if theta == 1.0 { 6.0 } else { (q / (1.0 - theta)).min(6.0) };
        let r = rng.gen_range(0.3..r_max * 0.999);
        let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let h = holder_ckn(&f, &radii, measure, q, r, theta, a, b);
        assert!(h.pass, "case {case}: {h:?}");

        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..20.0)).collect();
        let qu = rng.gen_range(1.05..6.0);
        let u = holder_uncertainty(&f, &w, measure, qu);
        assert!(u.pass, "case {case}: {u:?}");
    }
}

#[test]
fn uncertainty_on_grid_data() {
    let opts = CheckOptions::default();
    let grid = opts.grid(1).unwrap();
    let k = KernelBound64::noncompact(0.5, 1.0, 0.0, 0.0);
    let specs = [
        InequalityKind::Uncertainty { p: 2.0, q: 3.0, alpha: 0.5, beta: 0.2 },
        InequalityKind::UncertaintyCritical { p: 2.0, q: 3.0, r: 3.0 },
    ];
    for kind in specs {
        let s = spec(kind, 1.0);
        assert!(validate(&s).admissible);
        for input in [InputFamily::bump(0.0, 1.0), InputFamily::Gaussian { center: 1.0, width: 0.4 }] {
            let rep = check_uncertainty(&s, &input, &k, &grid).unwrap();
            assert!(rep.pass, "{kind:?}: {rep:?}");
            assert!(rep.kappa.is_finite() && rep.kappa > 0.0);
            assert!(rep.lhs * rep.kappa >= rep.rhs * (1.0 - 1e-12), "{rep:?}");
        }
    }
}

#[test]
fn hls_ratio_is_stable_for_admissible_exponents() {
    let s = spec(InequalityKind::Hls { p: 2.0, q: 2.0, alpha: 0.0, beta: 0.2, a1: 0.2, a2: 0.6 }, 1.0);
    assert!(validate(&s).admissible, "{:?}", validate(&s).violations);
    let k = KernelBound64::noncompact(0.5, 1.0, 0.0, 0.0);
    let rep = check_hls(&s, &InputFamily::bump(0.0, 1.0), &InputFamily::bump(0.5, 1.0), &k, &CheckOptions::default())
        .unwrap();
    assert!(rep.max_ratio.is_finite() && rep.max_ratio > 0.0);
    assert_ne!(rep.verdict, RatioVerdict::Unbounded, "{:?}", rep.refinement_trend);
}

#[test]
fn wrong_kind_is_rejected() {
    let s = spec(InequalityKind::CriticalHardy { p: 2.0, q: 3.0, r: 3.0 }, 1.0);
    let k = KernelBound64::noncompact(0.2, 1.0, 0.0, 0.0);
    let opts = CheckOptions::default();
    assert!(matches!(check_hardy_sobolev(&s, &[InputFamily::bump(0.0, 1.0)], &k, &opts), Err(CheckError::WrongKind { .. })));
    let s = spec(InequalityKind::Hardy { p: 2.0, alpha: 0.2 }, 1.0);
    assert!(matches!(critical_hardy_b2(&s, 1.0, &HardyOptions::default()), Err(CheckError::WrongKind { .. })));
}

#[test]
fn classify_trend_examples() {
    assert_eq!(classify_trend(&[1.0, 1.05, 1.08]), RatioVerdict::Bounded);
    assert_eq!(classify_trend(&[1.0, 2.1, 4.5]), RatioVerdict::Unbounded);
    assert_eq!(classify_trend(&[1.0, 1.5, 2.0]), RatioVerdict::Inconclusive);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn q_tilde_at_theta_one_is_r(q in 0.5f64..8.0, r in 0.5f64..8.0) {
        prop_assert!((q_tilde(q, r, 1.0) - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn hardy_sobolev_validation_matches(
        d in 1usize..4, p in 1.01f64..6.0, q in 1.01f64..8.0, alpha in -0.5f64..3.5, beta in -0.5f64..3.5,
    ) {
        let d = d as f64;
        let v = validate(&spec(InequalityKind::HardySobolev { p, q, alpha, beta }, d));
        prop_assert_eq!(v.admissible, hs_expected(d, p, q, alpha, beta));
    }

    #[test]
    fn hls_validation_matches(
        p in 1.01f64..6.0, q in 1.01f64..6.0, alpha in 0.0f64..1.0, beta in 0.0f64..1.0,
        a1 in 0.0f64..1.0, a2 in 0.0f64..1.0,
    ) {
        let v = validate(&spec(InequalityKind::Hls { p, q, alpha, beta, a1, a2 }, 1.0));
        prop_assert_eq!(v.admissible, hls_expected(1.0, p, q, alpha, beta, a1, a2));
    }
}
