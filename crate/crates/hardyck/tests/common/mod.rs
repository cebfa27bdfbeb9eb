//! Problem generators shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::PI;

use hardyck::hardy_core::{Direction, RadialTestFunction};
use hardyck::{HardyProblem64, InequalityKind, InequalitySpec64, KernelBound64, PolarSpace64, WeightExpr64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Half-line, `p = q = 2`, `Φ = r^{-2}`, `Ψ = 1`: B1 = 1, sharp constant 2.
pub fn classical() -> HardyProblem64 {
    HardyProblem64::new(PolarSpace64::half_line(), 2.0, 2.0, Direction::Inner, WeightExpr64::power(-2.0), WeightExpr64::one())
}

/// `Φ = 1`, `Ψ^{1-p'} = e^{-r}`: B2 = e^{-1/2} at R = 1.
pub fn exp_b2() -> HardyProblem64 {
    // p' = 2, so Psi = e^{r}.
    HardyProblem64::new(PolarSpace64::half_line(), 2.0, 2.0, Direction::Outer, WeightExpr64::one(), WeightExpr64::exponential(1.0))
}

/// `p = 4`, `q = 2`, `Φ = e^{-r}`, `Ψ^{1-p'} = e^{-r}`: B3 = 1/30.
pub fn exp_b3() -> HardyProblem64 {
    // p' = 4/3, so Psi^{-1/3} = e^{-r} means Psi = e^{3r}.
    HardyProblem64::new(PolarSpace64::half_line(), 4.0, 2.0, Direction::Inner, WeightExpr64::exponential(-1.0), WeightExpr64::exponential(3.0))
}

fn pair(space: PolarSpace64, p: f64, q: f64, dir: Direction, phi: WeightExpr64) -> HardyProblem64 {
    HardyProblem64::new(space, p, q, dir, phi, WeightExpr64::one())
}

/// Pairs with divergent B1 (inner, `p ≤ q`).
pub fn divergent_b1_pairs() -> Vec<HardyProblem64> {
    let hl = PolarSpace64::half_line;
    vec![
        pair(hl(), 2.0, 2.0, Direction::Inner, WeightExpr64::power(-4.0)),
        pair(hl(), 2.0, 2.0, Direction::Inner, WeightExpr64::power(-1.0)),
        pair(hl(), 2.0, 3.0, Direction::Inner, WeightExpr64::power(-6.0)),
        pair(PolarSpace64::euclidean(3.0), 2.0, 2.0, Direction::Inner, WeightExpr64::power(-4.0)),
        pair(PolarSpace64::hyperbolic(3.0), 2.0, 2.0, Direction::Inner, WeightExpr64::one()),
    ]
}

/// Pairs with divergent B3 (inner, `q < p`).
pub fn divergent_b3_pairs() -> Vec<HardyProblem64> {
    let hl = PolarSpace64::half_line;
    vec![
        pair(hl(), 4.0, 2.0, Direction::Inner, WeightExpr64::power(-4.0)),
        pair(hl(), 3.0, 2.0, Direction::Inner, WeightExpr64::power(-4.0)),
        pair(hl(), 4.0, 2.0, Direction::Inner, WeightExpr64::power(-1.0)),
        pair(PolarSpace64::euclidean(3.0), 4.0, 2.0, Direction::Inner, WeightExpr64::power(-6.0)),
        pair(PolarSpace64::hyperbolic(3.0), 4.0, 2.0, Direction::Inner, WeightExpr64::one()),
    ]
}

/// Pairs with divergent B2 or B4 (outer direction).
pub fn divergent_outer_pairs() -> Vec<HardyProblem64> {
    let hl = PolarSpace64::half_line;
    vec![
        pair(hl(), 2.0, 3.0, Direction::Outer, WeightExpr64::power(2.0)),
        pair(PolarSpace64::hyperbolic(3.0), 2.0, 2.0, Direction::Outer, WeightExpr64::one()),
        pair(hl(), 4.0, 2.0, Direction::Outer, WeightExpr64::power(2.0)),
        pair(PolarSpace64::hyperbolic(3.0), 4.0, 2.0, Direction::Outer, WeightExpr64::one()),
    ]
}

/// Admissible problem with power-exponential weights tuned to the growth of
/// the space, so that B is finite at both ends.
pub fn admissible(space: PolarSpace64, seed: u64) -> HardyProblem64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p: f64 = rng.gen_range(1.3..4.0);
    let q: f64 = p * rng.gen_range(1.0..2.0);
    let pc = p / (p - 1.0);
    let d = space.local_dim();
    let big = space.global_rate();
    let margin: f64 = rng.gen_range(0.2..1.5);
    if rng.gen_bool(0.5) {
        // Phi = r^{-a} e^{-lambda r}, Psi = 1; need (d - a)/q + d/p' >= 0 near zero.
        let a = rng.gen_range(0.0..(d + d * q / pc));
        let lambda = big * (1.0 + q / pc) + margin;
        HardyProblem64::new(space, p, q, Direction::Inner, WeightExpr64::new(-a, 0.0, -lambda, 1.0), WeightExpr64::one())
    } else {
        // Phi = r^a, Psi^{1-p'} = r^{-c} e^{-mu r}.
        let a = rng.gen_range(-0.9 * d..2.0);
        let c = rng.gen_range(0.0..d);
        let mu = big * (1.0 + pc / q) + margin;
        let psi = WeightExpr64::new(-c, 0.0, -mu, 1.0).power_transform(1.0 / (1.0 - pc));
        HardyProblem64::new(space, p, q, Direction::Outer, WeightExpr64::power(a), psi)
    }
}

pub fn sandwich_spaces() -> Vec<PolarSpace64> {
    vec![
        PolarSpace64::euclidean(1.0),
        PolarSpace64::euclidean(3.0),
        PolarSpace64::hyperbolic(3.0),
        PolarSpace64::local_global(2.0, 1.5),
    ]
}

pub fn sandwich_family() -> Vec<RadialTestFunction<f64>> {
    (0..6)
        .map(|s| RadialTestFunction::piecewise_random(100 + s, 7))
        .chain([0.5, 2.0].map(RadialTestFunction::near_extremizer))
        .chain([RadialTestFunction::power_bump(0.05, 1.0)])
        .collect()
}

pub fn yukawa(r: f64) -> f64 {
    (-r).exp() / (4.0 * PI * r)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Every kernel variant with default parameters.
pub fn default_kernels() -> Vec<KernelBound64> {
    let mut out = Vec::new();
    for (alpha, d) in [(0.5, 1.0), (1.0, 2.0), (1.5, 3.0), (2.0, 3.0), (0.3, 2.0)] {
        out.push(KernelBound64::noncompact(alpha, d, 0.0, 0.0));
        out.push(KernelBound64::noncompact(alpha, d, 1.0, 2.0));
        out.push(KernelBound64::compact(alpha, d));
    }
    for (alpha, d) in [(2.0, 3), (1.0, 1), (1.0, 2), (3.0, 3)] {
        out.push(KernelBound64::euclidean_bessel(alpha, d, 1.0));
    }
    out
}

/// Admissible `(p, q, r)` with `1/p + 1/r = 1 + 1/q`.
pub fn young_triples() -> [(f64, f64, f64); 5] {
    [(2.0, 2.0, 1.0), (1.5, 3.0, 1.5), (2.0, 4.0, 4.0 / 3.0), (4.0 / 3.0, 2.0, 4.0 / 3.0), (3.0, 6.0, 1.2)]
}

// Hypotheses written out directly from the theorem statements.

pub fn hs_expected(d: f64, p: f64, q: f64, alpha: f64, beta: f64) -> bool {
    let base = 0.0 <= beta && beta < d && 1.0 < p && 1.0 < q && q >= p;
    let part_i = 0.0 < alpha && alpha < d && 1.0 / p - 1.0 / q <= alpha / d - beta / (d * q);
    let part_ii = d / p <= alpha && alpha < d;
    base && (part_i || part_ii)
}

pub fn critical_expected(p: f64, q: f64, r: f64) -> bool {
    let pc = p / (p - 1.0);
    1.0 < p && p < r && p <= q && q < (r - 1.0) * pc
}

#[allow(clippy::too_many_arguments)]
pub fn ckn_expected(d: f64, p: f64, q: f64, r: f64, theta: f64, a: f64, b: f64, alpha: f64) -> bool {
    let den = q - (1.0 - theta) * r;
    1.0 < p
        && 0.0 < q
        && 0.0 < r
        && 0.0 < theta
        && theta <= 1.0
        && theta > (r - q) / r
        && p <= q * theta * r / den
        && 0.0 <= q * r * (b * (1.0 - theta) - a) / den
        && q * r * (b * (1.0 - theta) - a) / den < d
        && 1.0 / p - den / (q * r * theta) <= alpha / d - (b * (1.0 - theta) - a) / (theta * d)
        && 0.0 < alpha
        && alpha < d
}

#[allow(clippy::too_many_arguments)]
pub fn hls_expected(d: f64, p: f64, q: f64, alpha: f64, beta: f64, a1: f64, a2: f64) -> bool {
    1.0 < p
        && 1.0 < q
        && 0.0 <= alpha
        && alpha < d
        && 0.0 <= beta
        && beta < d / q
        && 0.0 <= a1
        && a1 < d * p / (p + q)
        && 0.0 < a2
        && a2 < d
        && 0.0 <= 1.0 / p - q / (p + q)
        && 1.0 / p - q / (p + q) <= alpha / d
        && 1.0 / q - p / (p + q) <= (a2 - a1) / d
}

pub fn spec(kind: InequalityKind<f64>, d: f64) -> InequalitySpec64 {
    InequalitySpec64::new(kind, PolarSpace64::euclidean(d))
}

fn pick(rng: &mut ChaCha8Rng, values: &[f64]) -> f64 {
    values[rng.gen_range(0..values.len())]
}

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

/// Randomized exponent grid cycling through Hardy–Sobolev, critical Hardy,
/// CKN (with `θ = 1` and `a = b = 0` cases) and HLS, paired with the expected
/// admissibility. Values sit on a quarter grid so that boundary cases occur.
pub fn truth_table_samples(seed: u64, n: usize) -> Vec<(InequalitySpec64, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exps = steps(0.75, 6.0, 0.25);
    let small = steps(-0.5, 3.5, 0.25);
    // 1/p ≥ q/(p+q) forces (p-1)(q-1) ≤ 1, so HLS exponents stay near 2.
    let near_two = steps(0.75, 3.0, 0.25);
    let thetas = [0.25, 0.5, 0.75, 1.0, 1.25];
    (0..n)
        .map(|i| {
            let d = pick(&mut rng, &[1.0, 2.0, 3.0]);
            let (kind, expected) = match i % 4 {
                0 => {
                    let (p, q, alpha, beta) =
                        (pick(&mut rng, &exps), pick(&mut rng, &exps), pick(&mut rng, &small), pick(&mut rng, &small));
                    (InequalityKind::HardySobolev { p, q, alpha, beta }, hs_expected(d, p, q, alpha, beta))
                }
                1 => {
                    let (p, q, r) = (pick(&mut rng, &exps), pick(&mut rng, &exps), pick(&mut rng, &exps));
                    (InequalityKind::CriticalHardy { p, q, r }, critical_expected(p, q, r))
                }
                2 => {
                    let (p, q, r) = (pick(&mut rng, &exps), pick(&mut rng, &exps), pick(&mut rng, &exps));
                    let theta = pick(&mut rng, &thetas);
                    let (a, b) =
                        if rng.gen_bool(0.25) { (0.0, 0.0) } else { (pick(&mut rng, &small) - 1.0, pick(&mut rng, &small)) };
                    let alpha = pick(&mut rng, &small);
                    (InequalityKind::Ckn { p, q, r, theta, a, b, alpha }, ckn_expected(d, p, q, r, theta, a, b, alpha))
                }
                _ => {
                    let (p, q) = (pick(&mut rng, &near_two), pick(&mut rng, &near_two));
                    let (alpha, beta, a1, a2) =
                        (pick(&mut rng, &small), pick(&mut rng, &small), pick(&mut rng, &small), pick(&mut rng, &small));
                    (InequalityKind::Hls { p, q, alpha, beta, a1, a2 }, hls_expected(d, p, q, alpha, beta, a1, a2))
                }
            };
            (spec(kind, d), expected)
        })
        .collect()
}

/// Admissible Hardy–Sobolev `(p, q, α, β)` in `d = 1`.
pub const STABLE_SETS: [(f64, f64, f64, f64); 5] =
    [(2.0, 4.0, 0.5, 0.0), (1.5, 3.0, 0.4, 0.2), (2.0, 2.0, 0.3, 0.6), (3.0, 6.0, 0.3, 0.3), (1.5, 6.0, 0.6, 0.0)];

/// Inadmissible sets whose ratio grows at least twofold per refinement.
pub const UNSTABLE_SETS: [(f64, f64, f64, f64); 2] = [(1.25, 8.0, 0.05, 0.0), (1.5, 12.0, 0.02, 0.6)];

pub fn hs_spec((p, q, alpha, beta): (f64, f64, f64, f64)) -> InequalitySpec64 {
    spec(InequalityKind::HardySobolev { p, q, alpha, beta }, 1.0)
}
