//! Characterizing constants B1–B4 of the radial two-weight Hardy inequalities
//! and direct evaluation of both sides on radial test functions.
//!
//! With `Φ = φ`, `w = ψ^{1-p'}` and surface density `S`:
//!
//! * B1 = sup_R (∫_R^∞ Φ S)^{1/q} (∫_0^R w S)^{1/p'}   (inner, `p ≤ q`)
//! * B2 = sup_R (∫_0^R Φ S)^{1/q} (∫_R^∞ w S)^{1/p'}   (outer, `p ≤ q`)
//! * B3 = ∫_0^∞ (∫_r^∞ Φ S)^{γ/q} (∫_0^r w S)^{γ/q'} w S dr   (inner, `q < p`)
//! * B4 = ∫_0^∞ (∫_0^r Φ S)^{γ/q} (∫_r^∞ w S)^{γ/q'} w S dr   (outer, `q < p`)
//!
//! where `1/γ = 1/q - 1/p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{InfClass, Limit, ZeroClass};
use crate::polar_space::PolarSpace;
use crate::quadrature::{
    integrate_with, sup_search, Anchor, Antiderivative, End, Integrand, QuadConfig, QuadError, QuadValue,
};
use crate::weights::WeightExpr;
use crate::{cst, Scalar};

/// Which ball the inner integral runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `∫_{B(a,|x|)} f`
    Inner,
    /// `∫_{X \ B(a,|x|)} f`
    Outer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    B1,
    B2,
    B3,
    B4,
}

impl std::fmt::Display for Which {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self)
    }
}

pub type BValue<T> = QuadValue<T>;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum HardyError {
    #[error("parameters outside the theorem's range: {0}")]
    Admissibility(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("right-hand side norm is zero")]
    ZeroDenominator,
}

/// An instance of the radial integral Hardy inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HardyProblem<T> {
    pub space: PolarSpace<T>,
    pub p: T,
    pub q: T,
    pub direction: Direction,
    pub phi: WeightExpr<T>,
    pub psi: WeightExpr<T>,
}

/// Numerical settings shared by the B computations and ratio evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardyOptions<T> {
    /// Relative quadrature tolerance.
    pub tol: T,
    /// Scan range for the supremum in B1/B2.
    pub r_min: T,
    pub r_max: T,
    /// Bracket width at which the golden-section refinement stops.
    pub refine_tol: T,
    /// Knots per decade of tabulated antiderivatives.
    pub per_decade: usize,
    /// Relative slack on the sandwich upper bound.
    pub upper_slack: T,
    /// Relative slack on the near-extremizer lower bound.
    pub lower_slack: T,
    /// Largest extremizer index tried when B diverges.
    pub fk_max: u32,
    /// Ratio that counts as confirmation of unboundedness.
    pub divergence_threshold: T,
}

impl<T: Scalar> Default for HardyOptions<T> {
    fn default() -> Self {
        HardyOptions {
            tol: cst(1e-10),
            r_min: cst(1e-8),
            r_max: cst(1e8),
            refine_tol: cst(1e-7),
            per_decade: 12,
            upper_slack: cst(1e-6),
            lower_slack: cst(1e-4),
            fk_max: 20,
            divergence_threshold: cst(1e3),
        }
    }
}

impl<T: Scalar> HardyOptions<T> {
    fn quad(&self) -> QuadConfig<T> {
        QuadConfig::with_tol(self.tol)
    }
}

/// A characterizing constant together with its diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct BReport<T> {
    pub which: Which,
    pub value: BValue<T>,
    /// Location of the supremum (B1/B2).
    pub argmax: Option<T>,
    pub error_estimate: T,
    /// `(p')^{1/p'} p^{1/q} B` (B1/B2, finite B).
    pub sandwich_upper: Option<T>,
}

impl<T: Scalar> BReport<T> {
    fn divergent(which: Which, end: End) -> Self {
        BReport { which, value: QuadValue::Divergent(end), argmax: None, error_estimate: T::infinity(), sandwich_upper: None }
    }
}

impl<T: Scalar> HardyProblem<T> {
    pub fn new(space: PolarSpace<T>, p: T, q: T, direction: Direction, phi: WeightExpr<T>, psi: WeightExpr<T>) -> Self {
        HardyProblem { space, p, q, direction, phi, psi }
    }

    /// Conjugate exponent `p' = p/(p-1)`.
    pub fn p_conj(&self) -> T {
        self.p / (self.p - T::one())
    }

    pub fn q_conj(&self) -> T {
        self.q / (self.q - T::one())
    }

    /// `γ` with `1/γ = 1/q - 1/p` (only for `q < p`).
    pub fn gamma(&self) -> Option<T> {
        if self.q < self.p {
            Some(T::one() / (T::one() / self.q - T::one() / self.p))
        } else {
            None
        }
    }

    /// Which constant characterizes this problem.
    pub fn which(&self) -> Which {
        match (self.p <= self.q, self.direction) {
            (true, Direction::Inner) => Which::B1,
            (true, Direction::Outer) => Which::B2,
            (false, Direction::Inner) => Which::B3,
            (false, Direction::Outer) => Which::B4,
        }
    }

    /// `ψ^{1-p'}`.
    pub fn dual_weight(&self) -> WeightExpr<T> {
        self.psi.power_transform(T::one() - self.p_conj())
    }

    /// `(p')^{1/p'} p^{1/q}`.
    pub fn sandwich_factor(&self) -> T {
        let pp = self.p_conj();
        pp.powf(pp.recip()) * self.p.powf(self.q.recip())
    }

    fn check_exponents(&self) -> Result<(), HardyError> {
        let ok = |x: T| x.is_finite();
        if !(self.p > T::one()) || !ok(self.p) {
            return Err(HardyError::Admissibility(format!("p = {} must lie in (1, ∞)", self.p)));
        }
        if !(self.q > T::one()) || !ok(self.q) {
            return Err(HardyError::Admissibility(format!("q = {} must lie in (1, ∞)", self.q)));
        }
        Ok(())
    }

    /// `w · S` as an integrand with asymptotic hints.
    pub fn weighted_density(&self, w: WeightExpr<T>) -> Integrand<'_, T> {
        let space = &self.space;
        let zc = w.zero_class().mul(space.zero_class());
        let ic = w.inf_class().mul(space.inf_class());
        Integrand::new(move |r: T| (w.ln_eval(r) + space.ln_density(r)).exp()).with_hints(Some(zc), Some(ic))
    }

    fn classes(&self, w: &WeightExpr<T>) -> (ZeroClass<T>, InfClass<T>) {
        (w.zero_class().mul(self.space.zero_class()), w.inf_class().mul(self.space.inf_class()))
    }

    /// Upper end of numeric scans: keeps `e^{rate r}` factors representable.
    fn scan_cap(&self, base: T) -> T {
        let (_, pi) = self.classes(&self.phi);
        let (_, wi) = self.classes(&self.dual_weight());
        let rate = pi.rate.abs().max(wi.rate.abs());
        if rate > T::zero() {
            base.min(cst::<T>(600.0) / rate)
        } else {
            base
        }
    }
}

fn quad_value<T: Scalar>(
    f: &Integrand<'_, T>,
    a: T,
    b: T,
    cfg: &QuadConfig<T>,
) -> Result<(T, T), QuadError> {
    let r = integrate_with(f, a, b, cfg)?;
    Ok(match r.value {
        QuadValue::Finite(v) => (v, r.abs_error_estimate),
        QuadValue::Divergent(_) => (T::infinity(), T::infinity()),
    })
}

/// `ln ∫_a^b w S`, integrated relative to the value at the finite positive
/// endpoint so that results beyond the floating point range stay usable.
fn ln_weighted_integral<T: Scalar>(
    pb: &HardyProblem<T>,
    w: WeightExpr<T>,
    a: T,
    b: T,
    cfg: &QuadConfig<T>,
) -> Result<T, QuadError> {
    let space = &pb.space;
    let x0 = if a > T::zero() { a } else { b };
    let c = w.ln_eval(x0) + space.ln_density(x0);
    let c = if c.is_finite() { c } else { T::zero() };
    let zc = w.zero_class().mul(space.zero_class());
    let ic = w.inf_class().mul(space.inf_class());
    let f = Integrand::new(move |r: T| (w.ln_eval(r) + space.ln_density(r) - c).exp()).with_hints(Some(zc), Some(ic));
    let (v, _) = quad_value(&f, a, b, cfg)?;
    Ok(c + v.ln())
}

/// `F1^{1/q} F2^{1/p'}` with the conventions `0 · x = 0` and `∞ · y = ∞` (`y > 0`).
fn product<T: Scalar>(f1: T, e1: T, f2: T, e2: T) -> T {
    if f1 == T::zero() || f2 == T::zero() {
        return T::zero();
    }
    if f1.is_infinite() || f2.is_infinite() {
        return T::infinity();
    }
    (e1 * f1.ln() + e2 * f2.ln()).exp()
}

fn sup_report<T: Scalar, G>(
    pb: &HardyProblem<T>,
    which: Which,
    mut g: G,
    opts: &HardyOptions<T>,
) -> Result<BReport<T>, HardyError>
where
    G: FnMut(T) -> Result<(T, T), QuadError>,
{
    let r_max = pb.scan_cap(opts.r_max);
    let res = sup_search(|r| g(r).map(|v| v.0), opts.r_min, r_max, opts.refine_tol)?;
    match res.sup {
        QuadValue::Divergent(end) => Ok(BReport::divergent(which, end)),
        QuadValue::Finite(v) => {
            let (_, rel) = g(res.argmax)?;
            Ok(BReport {
                which,
                value: QuadValue::Finite(v),
                argmax: Some(res.argmax),
                error_estimate: v * rel,
                sandwich_upper: Some(pb.sandwich_factor() * v),
            })
        }
    }
}

fn infinite_limit_zero<T: Scalar>(parts: &[(Option<ZeroClass<T>>, T)]) -> Option<bool> {
    let mut acc = ZeroClass::constant();
    for &(c, e) in parts {
        acc = acc.mul(c?.powf(e));
    }
    Some(acc.limit() == Limit::Infinite)
}

fn infinite_limit_inf<T: Scalar>(parts: &[(Option<InfClass<T>>, T)]) -> Option<bool> {
    let mut acc = InfClass::constant();
    for &(c, e) in parts {
        acc = acc.mul(c?.powf(e));
    }
    Some(acc.limit() == Limit::Infinite)
}

/// B1 for the inner inequality with `1 < p ≤ q < ∞`.
pub fn compute_b1<T: Scalar>(pb: &HardyProblem<T>, opts: &HardyOptions<T>) -> Result<BReport<T>, HardyError> {
    pb.check_exponents()?;
    if pb.q < pb.p || pb.direction != Direction::Inner {
        return Err(HardyError::Admissibility("B1 needs p ≤ q and the inner direction".into()));
    }
    let w = pb.dual_weight();
    let (iq, ip) = (pb.q.recip(), pb.p_conj().recip());
    let (phz, phi_i) = pb.classes(&pb.phi);
    let (wz, wi) = pb.classes(&w);
    if !phi_i.integrability().converges() {
        return Ok(BReport::divergent(Which::B1, End::Infinity));
    }
    if !wz.integrability().converges() {
        return Ok(BReport::divergent(Which::B1, End::Zero));
    }
    if infinite_limit_zero(&[(phz.upper_integral(), iq), (wz.primitive(), ip)]) == Some(true) {
        return Ok(BReport::divergent(Which::B1, End::Zero));
    }
    if infinite_limit_inf(&[(phi_i.tail(), iq), (wi.lower_integral(), ip)]) == Some(true) {
        return Ok(BReport::divergent(Which::B1, End::Infinity));
    }
    let fphi = pb.weighted_density(pb.phi);
    let fw = pb.weighted_density(w);
    let cfg = opts.quad();
    sup_report(
        pb,
        Which::B1,
        |r| {
            let (a, ea) = quad_value(&fphi, r, T::infinity(), &cfg)?;
            let (b, eb) = quad_value(&fw, T::zero(), r, &cfg)?;
            Ok((product(a, iq, b, ip), rel_err(a, ea) * iq + rel_err(b, eb) * ip))
        },
        opts,
    )
}

/// B2 for the outer inequality with `1 < p ≤ q < ∞`.
pub fn compute_b2<T: Scalar>(pb: &HardyProblem<T>, opts: &HardyOptions<T>) -> Result<BReport<T>, HardyError> {
    pb.check_exponents()?;
    if pb.q < pb.p || pb.direction != Direction::Outer {
        return Err(HardyError::Admissibility("B2 needs p ≤ q and the outer direction".into()));
    }
    let w = pb.dual_weight();
    let (iq, ip) = (pb.q.recip(), pb.p_conj().recip());
    let (phz, phi_i) = pb.classes(&pb.phi);
    let (wz, wi) = pb.classes(&w);
    if !phz.integrability().converges() {
        return Ok(BReport::divergent(Which::B2, End::Zero));
    }
    if !wi.integrability().converges() {
        return Ok(BReport::divergent(Which::B2, End::Infinity));
    }
    if infinite_limit_zero(&[(phz.primitive(), iq), (wz.upper_integral(), ip)]) == Some(true) {
        return Ok(BReport::divergent(Which::B2, End::Zero));
    }
    if infinite_limit_inf(&[(phi_i.lower_integral(), iq), (wi.tail(), ip)]) == Some(true) {
        return Ok(BReport::divergent(Which::B2, End::Infinity));
    }
    let fphi = pb.weighted_density(pb.phi);
    let fw = pb.weighted_density(w);
    let cfg = opts.quad();
    sup_report(
        pb,
        Which::B2,
        |r| {
            let (a, ea) = quad_value(&fphi, T::zero(), r, &cfg)?;
            let (b, eb) = quad_value(&fw, r, T::infinity(), &cfg)?;
            Ok((product(a, iq, b, ip), rel_err(a, ea) * iq + rel_err(b, eb) * ip))
        },
        opts,
    )
}

fn rel_err<T: Scalar>(v: T, e: T) -> T {
    if v > T::zero() && v.is_finite() {
        e / v
    } else {
        T::zero()
    }
}

fn integral_functional<T: Scalar>(
    pb: &HardyProblem<T>,
    which: Which,
    opts: &HardyOptions<T>,
) -> Result<BReport<T>, HardyError> {
    pb.check_exponents()?;
    let gamma = pb
        .gamma()
        .ok_or_else(|| HardyError::Admissibility(format!("{which} needs q < p")))?;
    let w = pb.dual_weight();
    let (eq, eqc) = (gamma / pb.q, gamma / pb.q_conj());
    let (phz, phi_i) = pb.classes(&pb.phi);
    let (wz, wi) = pb.classes(&w);
    let inner = which == Which::B3;

    // Factors that are infinite for every r.
    if inner {
        if !phi_i.integrability().converges() {
            return Ok(BReport::divergent(which, End::Infinity));
        }
        if !wz.integrability().converges() {
            return Ok(BReport::divergent(which, End::Zero));
        }
    } else {
        if !phz.integrability().converges() {
            return Ok(BReport::divergent(which, End::Zero));
        }
        if !wi.integrability().converges() {
            return Ok(BReport::divergent(which, End::Infinity));
        }
    }
    let (hz, hi) = if inner {
        (
            phz.upper_integral().zip(wz.primitive()).map(|(a, b)| a.powf(eq).mul(b.powf(eqc)).mul(wz)),
            phi_i.tail().zip(wi.lower_integral()).map(|(a, b)| a.powf(eq).mul(b.powf(eqc)).mul(wi)),
        )
    } else {
        (
            phz.primitive().zip(wz.upper_integral()).map(|(a, b)| a.powf(eq).mul(b.powf(eqc)).mul(wz)),
            phi_i.lower_integral().zip(wi.tail()).map(|(a, b)| a.powf(eq).mul(b.powf(eqc)).mul(wi)),
        )
    };
    if let Some(c) = hz {
        if !c.integrability().converges() {
            return Ok(BReport::divergent(which, End::Zero));
        }
    }
    if let Some(c) = hi {
        if !c.integrability().converges() {
            return Ok(BReport::divergent(which, End::Infinity));
        }
    }

    let cfg = opts.quad();
    let lo = opts.r_min;
    let hi_r = pb.scan_cap(opts.r_max);
    let mut per_decade = opts.per_decade.max(4);
    let mut previous: Option<T> = None;
    for _ in 0..3 {
        let (a1, a2) = if inner {
            (Anchor::Upper(T::infinity()), Anchor::Lower(T::zero()))
        } else {
            (Anchor::Lower(T::zero()), Anchor::Upper(T::infinity()))
        };
        let f1 = Antiderivative::new(pb.weighted_density(pb.phi), a1, lo, hi_r, per_decade, &[], opts.tol)?;
        let f2 = Antiderivative::new(pb.weighted_density(w), a2, lo, hi_r, per_decade, &[], opts.tol)?;
        let space = &pb.space;
        let h = Integrand::new(|r: T| {
            let (x, y) = match (f1.eval(r), f2.eval(r)) {
                (Ok(x), Ok(y)) => (x, y),
                _ => return T::nan(),
            };
            if x == T::zero() || y == T::zero() {
                return T::zero();
            }
            (eq * x.ln() + eqc * y.ln() + w.ln_eval(r) + space.ln_density(r)).exp()
        })
        .with_hints(hz, hi);
        let res = integrate_with(&h, T::zero(), T::infinity(), &cfg)?;
        match res.value {
            QuadValue::Divergent(end) => return Ok(BReport::divergent(which, end)),
            QuadValue::Finite(v) => {
                if let Some(prev) = previous {
                    let change = (v - prev).abs();
                    if change <= cst::<T>(1e-8) * v.abs() {
                        return Ok(BReport {
                            which,
                            value: QuadValue::Finite(v),
                            argmax: None,
                            error_estimate: res.abs_error_estimate.max(change),
                            sandwich_upper: None,
                        });
                    }
                }
                previous = Some(v);
            }
        }
        per_decade *= 2;
    }
    let v = previous.unwrap_or(T::nan());
    Ok(BReport { which, value: QuadValue::Finite(v), argmax: None, error_estimate: cst::<T>(1e-8) * v, sandwich_upper: None })
}

/// B3 for the inner inequality with `1 < q < p < ∞`.
pub fn compute_b3<T: Scalar>(pb: &HardyProblem<T>, opts: &HardyOptions<T>) -> Result<BReport<T>, HardyError> {
    if pb.direction != Direction::Inner {
        return Err(HardyError::Admissibility("B3 needs the inner direction".into()));
    }
    integral_functional(pb, Which::B3, opts)
}

/// B4 for the outer inequality with `1 < q < p < ∞`.
pub fn compute_b4<T: Scalar>(pb: &HardyProblem<T>, opts: &HardyOptions<T>) -> Result<BReport<T>, HardyError> {
    if pb.direction != Direction::Outer {
        return Err(HardyError::Admissibility("B4 needs the outer direction".into()));
    }
    integral_functional(pb, Which::B4, opts)
}

/// The constant matching the problem's exponents and direction.
pub fn compute_b<T: Scalar>(pb: &HardyProblem<T>, opts: &HardyOptions<T>) -> Result<BReport<T>, HardyError> {
    match pb.which() {
        Which::B1 => compute_b1(pb, opts),
        Which::B2 => compute_b2(pb, opts),
        Which::B3 => compute_b3(pb, opts),
        Which::B4 => compute_b4(pb, opts),
    }
}

/// Shapes of radial test functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestKind<T> {
    /// `ψ^{1-p'}` on `(0, R)` (inner) or `(R, ∞)` (outer).
    NearExtremizer { r: T },
    /// Extremizing sequence on `(2^{-k}, 2^k)`.
    FkExtremizer { k: u32 },
    /// `r^{-(d+a)/p + ε}` on `(0, R)`, with `a` the power of `ψ`.
    PowerBump { eps: T, r: T },
    /// Step function with random heights on log-uniform knots in `[10^-2, 10^2]`.
    PiecewiseRandom { seed: u64, knots: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RadialTestFunction<T> {
    #[serde(flatten)]
    pub kind: TestKind<T>,
    #[serde(default = "one_default")]
    pub scale: T,
}

fn one_default<T: Scalar>() -> T {
    T::one()
}

impl<T: Scalar> RadialTestFunction<T> {
    pub fn new(kind: TestKind<T>) -> Self {
        RadialTestFunction { kind, scale: T::one() }
    }

    pub fn near_extremizer(r: T) -> Self {
        Self::new(TestKind::NearExtremizer { r })
    }

    pub fn fk(k: u32) -> Self {
        Self::new(TestKind::FkExtremizer { k })
    }

    pub fn power_bump(eps: T, r: T) -> Self {
        Self::new(TestKind::PowerBump { eps, r })
    }

    pub fn piecewise_random(seed: u64, knots: usize) -> Self {
        Self::new(TestKind::PiecewiseRandom { seed, knots })
    }

    pub fn scaled(mut self, c: T) -> Self {
        self.scale = self.scale * c;
        self
    }
}

/// A test function realized for a given problem.
struct Profile<'a, T> {
    /// `ln f`, `-∞` off the support.
    ln_f: Box<dyn Fn(T) -> T + 'a>,
    lo: T,
    hi: T,
    breaks: Vec<T>,
    /// Class of `f` near zero (when `lo == 0`).
    zero: Option<ZeroClass<T>>,
    /// Class of `f` near infinity (when `hi == ∞`).
    inf: Option<InfClass<T>>,
}

fn indicator<T: Scalar>(r: T, lo: T, hi: T) -> bool {
    r > lo && r < hi
}

fn weight_profile<'a, T: Scalar>(w: WeightExpr<T>, scale: T, lo: T, hi: T) -> Profile<'a, T> {
    Profile {
        ln_f: Box::new(move |r| if indicator(r, lo, hi) { scale.ln() + w.ln_eval(r) } else { T::neg_infinity() }),
        lo,
        hi,
        breaks: vec![],
        zero: Some(w.zero_class()),
        inf: Some(w.inf_class()),
    }
}

/// Argmax over `[a, b]` of the truncated B1/B2 functional.
fn truncated_argmax<T: Scalar>(pb: &HardyProblem<T>, a: T, b: T, opts: &HardyOptions<T>) -> Result<Option<T>, HardyError> {
    let w = pb.dual_weight();
    let fphi = pb.weighted_density(pb.phi);
    let fw = pb.weighted_density(w);
    let cfg = opts.quad();
    let (iq, ip) = (pb.q.recip(), pb.p_conj().recip());
    let inner = pb.direction == Direction::Inner;
    let res = sup_search(
        |r| {
            let (x, y) = if inner {
                (quad_value(&fphi, r, T::infinity(), &cfg)?.0, quad_value(&fw, a, r, &cfg)?.0)
            } else {
                (quad_value(&fphi, T::zero(), r, &cfg)?.0, quad_value(&fw, r, b, &cfg)?.0)
            };
            Ok(product(x, iq, y, ip))
        },
        a * cst(1.0001),
        b * cst(0.9999),
        opts.refine_tol.max(a * cst(1e-6)),
    )?;
    Ok(match res.sup {
        QuadValue::Finite(_) => Some(res.argmax),
        QuadValue::Divergent(_) => None,
    })
}

fn realize<'a, T: Scalar>(
    pb: &'a HardyProblem<T>,
    tf: &RadialTestFunction<T>,
    opts: &HardyOptions<T>,
) -> Result<Profile<'a, T>, HardyError> {
    let s = tf.scale;
    let inner = pb.direction == Direction::Inner;
    let w = pb.dual_weight();
    match tf.kind {
        TestKind::NearExtremizer { r } => Ok(if inner {
            weight_profile(w, s, T::zero(), r)
        } else {
            weight_profile(w, s, r, T::infinity())
        }),
        TestKind::PowerBump { eps, r } => {
            let e = -(pb.space.local_dim() + pb.psi.power) / pb.p + eps;
            Ok(Profile {
                ln_f: Box::new(move |x| if indicator(x, T::zero(), r) { s.ln() + e * x.ln() } else { T::neg_infinity() }),
                lo: T::zero(),
                hi: r,
                breaks: vec![],
                zero: Some(ZeroClass::new(e, T::zero())),
                inf: None,
            })
        }
        TestKind::PiecewiseRandom { seed, knots } => {
            let n = knots.max(2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ks: Vec<T> = (0..n).map(|_| cst::<T>(10f64.powf(rng.gen_range(-2.0..2.0)))).collect();
            ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let hs: Vec<T> = (0..n - 1).map(|_| cst::<T>(rng.gen_range(0.05..1.0))).collect();
            let (lo, hi) = (ks[0], ks[n - 1]);
            let kc = ks.clone();
            Ok(Profile {
                ln_f: Box::new(move |x| {
                    if !indicator(x, lo, hi) {
                        return T::neg_infinity();
                    }
                    let i = kc.partition_point(|&k| k <= x).saturating_sub(1).min(hs.len() - 1);
                    (s * hs[i]).ln()
                }),
                lo,
                hi,
                breaks: ks,
                zero: None,
                inf: None,
            })
        }
        TestKind::FkExtremizer { k } => {
            let a = cst::<T>(2.0).powi(-(k as i32));
            let b = cst::<T>(2.0).powi(k as i32);
            match pb.gamma() {
                None => {
                    let fallback = weight_profile(w, s, a, b);
                    let (pz, pi) = pb.classes(&pb.phi);
                    let phi_total_infinite = if inner { !pi.integrability().converges() } else { !pz.integrability().converges() };
                    if phi_total_infinite {
                        return Ok(fallback);
                    }
                    Ok(match truncated_argmax(pb, a, b, opts)? {
                        Some(rk) if inner => weight_profile(w, s, a, rk),
                        Some(rk) => weight_profile(w, s, rk, b),
                        None => fallback,
                    })
                }
                Some(gamma) => {
                    let e1 = gamma / (pb.p * pb.q);
                    let e2 = gamma / (pb.p * pb.q_conj());
                    let (pz, pi) = pb.classes(&pb.phi);
                    let infinite = if inner { !pi.integrability().converges() } else { !pz.integrability().converges() };
                    if infinite {
                        return Ok(weight_profile(w, s, a, b));
                    }
                    let (an1, an2) = if inner {
                        (Anchor::Upper(T::infinity()), Anchor::Lower(a))
                    } else {
                        (Anchor::Lower(T::zero()), Anchor::Upper(b))
                    };
                    let f1 = Antiderivative::new(pb.weighted_density(pb.phi), an1, a, b, opts.per_decade, &[], opts.tol)?;
                    let f2 = Antiderivative::new(pb.weighted_density(w), an2, a, b, opts.per_decade, &[], opts.tol)?;
                    Ok(Profile {
                        ln_f: Box::new(move |x| {
                            if !indicator(x, a, b) {
                                return T::neg_infinity();
                            }
                            let (u, v) = match (f1.eval(x), f2.eval(x)) {
                                (Ok(u), Ok(v)) => (u, v),
                                _ => return T::nan(),
                            };
                            if u == T::zero() || v == T::zero() {
                                return T::neg_infinity();
                            }
                            s.ln() + e1 * u.ln() + e2 * v.ln() + w.ln_eval(x)
                        }),
                        lo: a,
                        hi: b,
                        breaks: vec![],
                        zero: None,
                        inf: None,
                    })
                }
            }
        }
    }
}

fn pieces<T: Scalar>(lo: T, hi: T, breaks: &[T]) -> Vec<(T, T)> {
    let mut pts = vec![lo];
    for &b in breaks {
        if b > lo && b < hi {
            pts.push(b);
        }
    }
    pts.push(hi);
    pts.windows(2).filter(|w| w[0] < w[1]).map(|w| (w[0], w[1])).collect()
}

fn sum_pieces<T: Scalar>(f: &Integrand<'_, T>, ps: &[(T, T)], cfg: &QuadConfig<T>) -> Result<T, QuadError> {
    let mut acc = T::zero();
    for &(a, b) in ps {
        let (v, _) = quad_value(f, a, b, cfg)?;
        if v.is_infinite() {
            return Ok(T::infinity());
        }
        acc = acc + v;
    }
    Ok(acc)
}

/// Largest finite value of a log-integrand on a log grid over `(lo, hi)`,
/// used to rescale integrands whose values leave the floating point range.
fn log_scale<T: Scalar>(g: impl Fn(T) -> T, lo: T, hi: T) -> T {
    let a = if lo > T::zero() { lo } else { hi.min(T::one()) * cst(1e-8) };
    let b = if hi.is_finite() { hi } else { a.max(T::one()) * cst(1e8) };
    let n = 96;
    let mut best = T::neg_infinity();
    for i in 0..=n {
        let t = cst::<T>(i as f64 / n as f64);
        let r = (a.ln() + t * (b.ln() - a.ln())).exp();
        let v = g(r);
        if v.is_finite() && v > best {
            best = v;
        }
    }
    if best.is_finite() {
        best
    } else {
        T::zero()
    }
}

fn ln_add<T: Scalar>(x: T, y: T) -> T {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if lo == T::neg_infinity() || hi == T::infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln` of [`lhs`], finite even where the value itself over- or underflows.
pub fn ln_lhs<T: Scalar>(pb: &HardyProblem<T>, tf: &RadialTestFunction<T>, opts: &HardyOptions<T>) -> Result<T, HardyError> {
    let prof = realize(pb, tf, opts)?;
    let cfg = opts.quad();
    let space = &pb.space;
    let (phz, phi_i) = pb.classes(&pb.phi);
    let q = pb.q;
    let fs_zero = prof.zero.map(|c| c.mul(space.zero_class()));
    let fs_inf = prof.inf.map(|c| c.mul(space.inf_class()));
    let ln_f = &prof.ln_f;
    let fs = Integrand::new(move |r: T| {
        let v = ln_f(r);
        if v == T::neg_infinity() {
            T::zero()
        } else {
            (v + space.ln_density(r)).exp()
        }
    })
    .with_hints(fs_zero, fs_inf);
    let inner = pb.direction == Direction::Inner;
    let tab_lo = if prof.lo > T::zero() { prof.lo } else { prof.hi.min(cst(1e8)) * cst(1e-12) };
    let tab_hi = if prof.hi.is_finite() { prof.hi } else { prof.lo.max(cst(1e-8)) * cst(1e12) };
    let anchor = if inner { Anchor::Lower(prof.lo) } else { Anchor::Upper(prof.hi) };
    let big = Antiderivative::new(fs, anchor, tab_lo, tab_hi, opts.per_decade, &prof.breaks, opts.tol)?;
    let total = big.eval(if inner { prof.hi } else { prof.lo })?;
    if total == T::zero() {
        return Ok(T::neg_infinity());
    }
    if total.is_infinite() {
        return Ok(T::infinity());
    }

    // Inside the support.
    let (hz, hinf) = if inner {
        (fs_zero.and_then(|c| c.primitive()).map(|c| c.powf(q).mul(phz)), Some(phi_i))
    } else {
        (Some(phz), fs_inf.and_then(|c| c.tail()).map(|c| c.powf(q).mul(phi_i)))
    };
    let phi = pb.phi;
    let ln_h = |r: T| match big.eval(r) {
        Ok(v) if v == T::zero() => T::neg_infinity(),
        Ok(v) => q * v.ln() + phi.ln_eval(r) + space.ln_density(r),
        Err(_) => T::nan(),
    };
    let c = log_scale(ln_h, prof.lo, prof.hi);
    let h = Integrand::new(|r: T| (ln_h(r) - c).exp()).with_hints(hz, hinf);
    let acc = c + sum_pieces(&h, &pieces(prof.lo, prof.hi, &prof.breaks), &cfg)?.ln();

    // Outside the support the inner integral is constant.
    let ln_rest = if inner && prof.hi.is_finite() {
        ln_weighted_integral(pb, pb.phi, prof.hi, T::infinity(), &cfg)?
    } else if !inner && prof.lo > T::zero() {
        ln_weighted_integral(pb, pb.phi, T::zero(), prof.lo, &cfg)?
    } else {
        T::neg_infinity()
    };
    Ok(ln_add(acc, q * total.ln() + ln_rest))
}

/// `∫_0^∞ (∫_{B_r} f S)^q Φ S dr` (inner) or with the complement (outer).
/// Returns `+∞` when the integral diverges.
pub fn lhs<T: Scalar>(pb: &HardyProblem<T>, tf: &RadialTestFunction<T>, opts: &HardyOptions<T>) -> Result<T, HardyError> {
    Ok(ln_lhs(pb, tf, opts)?.exp())
}

/// `ln` of [`rhs_norm`].
pub fn ln_rhs_norm<T: Scalar>(pb: &HardyProblem<T>, tf: &RadialTestFunction<T>, opts: &HardyOptions<T>) -> Result<T, HardyError> {
    let prof = realize(pb, tf, opts)?;
    let cfg = opts.quad();
    let space = &pb.space;
    let psi = pb.psi;
    let p = pb.p;
    let ln_f = &prof.ln_f;
    let zc = prof.zero.map(|c| c.powf(p).mul(psi.zero_class()).mul(space.zero_class()));
    let ic = prof.inf.map(|c| c.powf(p).mul(psi.inf_class()).mul(space.inf_class()));
    let ln_g = move |r: T| {
        let v = ln_f(r);
        if v == T::neg_infinity() {
            T::neg_infinity()
        } else {
            p * v + psi.ln_eval(r) + space.ln_density(r)
        }
    };
    let c = log_scale(ln_g, prof.lo, prof.hi);
    let g = Integrand::new(move |r: T| (ln_g(r) - c).exp()).with_hints(zc, ic);
    let s = sum_pieces(&g, &pieces(prof.lo, prof.hi, &prof.breaks), &cfg)?;
    Ok((c + s.ln()) / p)
}

/// `(∫ f^p ψ S)^{1/p}`.
pub fn rhs_norm<T: Scalar>(pb: &HardyProblem<T>, tf: &RadialTestFunction<T>, opts: &HardyOptions<T>) -> Result<T, HardyError> {
    Ok(ln_rhs_norm(pb, tf, opts)?.exp())
}

/// `lhs^{1/q} / rhs_norm`, evaluated in log space.
pub fn ratio<T: Scalar>(pb: &HardyProblem<T>, tf: &RadialTestFunction<T>, opts: &HardyOptions<T>) -> Result<T, HardyError> {
    let den = ln_rhs_norm(pb, tf, opts)?;
    if den == T::neg_infinity() {
        return Err(HardyError::ZeroDenominator);
    }
    if den == T::infinity() {
        return Err(HardyError::Admissibility("test function has infinite right-hand side".into()));
    }
    let num = ln_lhs(pb, tf, opts)?;
    Ok((num / pb.q - den).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// B diverges and the extremizing sequence exceeded the threshold.
    DivergenceConfirmed,
    /// B diverges but no tested function exceeded the threshold.
    DivergenceUnconfirmed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport<T> {
    pub b: BReport<T>,
    /// Ratios of the supplied family (zero functions skipped), in order.
    pub ratios: Vec<T>,
    /// Ratio of the near-extremizer at the argmax (B1/B2).
    pub near_extremizer_ratio: Option<T>,
    /// Extremizer ratios `k = 1, 2, ...` (divergent B only).
    pub fk_ratios: Vec<T>,
    /// Largest ratio seen: an empirical lower bound on the best constant.
    pub max_ratio: T,
    pub verdict: Verdict,
}

/// Checks `B ≤ C ≤ (p')^{1/p'} p^{1/q} B` against a family of test functions,
/// or, when B diverges, looks for unbounded ratios along the extremizers.
///
/// For `q < p` no sharp bracket is available; a finite B passes when every
/// ratio is finite.
pub fn sandwich_check<T: Scalar>(
    pb: &HardyProblem<T>,
    family: &[RadialTestFunction<T>],
    opts: &HardyOptions<T>,
) -> Result<SandwichReport<T>, HardyError> {
    let b = compute_b(pb, opts)?;
    let mut ratios = Vec::new();
    for tf in family {
        match ratio(pb, tf, opts) {
            Ok(r) => ratios.push(r),
            Err(HardyError::ZeroDenominator) => {}
            Err(e) => return Err(e),
        }
    }
    let mut max_ratio = ratios.iter().copied().fold(T::zero(), T::max);
    match b.value {
        QuadValue::Finite(bv) => {
            let mut ok = ratios.iter().all(|r| r.is_finite());
            let mut near = None;
            if let (Some(ub), Some(arg)) = (b.sandwich_upper, b.argmax) {
                let nr = ratio(pb, &RadialTestFunction::near_extremizer(arg), opts)?;
                max_ratio = max_ratio.max(nr);
                near = Some(nr);
                let limit = ub * (T::one() + opts.upper_slack);
                ok = ok && ratios.iter().all(|&r| r <= limit) && nr <= limit;
                ok = ok && nr >= bv * (T::one() - opts.lower_slack);
            }
            Ok(SandwichReport {
                b,
                ratios,
                near_extremizer_ratio: near,
                fk_ratios: vec![],
                max_ratio,
                verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            })
        }
        QuadValue::Divergent(_) => {
            let mut fk = Vec::new();
            let mut confirmed = ratios.iter().any(|&r| r > opts.divergence_threshold);
            for k in 1..=opts.fk_max {
                if confirmed {
                    break;
                }
                let r = match ratio(pb, &RadialTestFunction::fk(k), opts) {
                    Ok(r) => r,
                    Err(HardyError::ZeroDenominator) => continue,
                    Err(e) => return Err(e),
                };
                fk.push(r);
                max_ratio = max_ratio.max(r);
                confirmed = r > opts.divergence_threshold;
            }
            Ok(SandwichReport {
                b,
                ratios,
                near_extremizer_ratio: None,
                fk_ratios: fk,
                max_ratio,
                verdict: if confirmed { Verdict::DivergenceConfirmed } else { Verdict::DivergenceUnconfirmed },
            })
        }
    }
}

/// `B(R)` of B1/B2 at a single radius (`+∞` where a factor diverges).
pub fn b_profile<T: Scalar>(pb: &HardyProblem<T>, r: T, opts: &HardyOptions<T>) -> Result<T, HardyError> {
    let w = pb.dual_weight();
    let fphi = pb.weighted_density(pb.phi);
    let fw = pb.weighted_density(w);
    let cfg = opts.quad();
    let (iq, ip) = (pb.q.recip(), pb.p_conj().recip());
    let (a, b) = match pb.direction {
        Direction::Inner => (quad_value(&fphi, r, T::infinity(), &cfg)?.0, quad_value(&fw, T::zero(), r, &cfg)?.0),
        Direction::Outer => (quad_value(&fphi, T::zero(), r, &cfg)?.0, quad_value(&fw, r, T::infinity(), &cfg)?.0),
    };
    Ok(product(a, iq, b, ip))
}
