//! Admissibility of the weighted Sobolev-type inequalities, reductions between
//! them, and numerical ratio checks in convolution form `f = g ∗ G`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::polar_space::PolarSpace;
use crate::Scalar;

mod checks;
pub mod grid;

pub use checks::{
    check_ckn, check_critical_hardy, check_hardy_sobolev, check_hls, check_uncertainty, critical_hardy_b2,
    critical_hardy_problem, holder_ckn, holder_uncertainty, region_decomposition, CheckError, CheckOptions, CknReport,
    HolderReport, RegionShares, UncertaintyReport,
};
pub use grid::{Grid, GridError, InputFamily};

/// The inequality families and their exponents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InequalityKind<T> {
    /// `‖f/|x|^{β/q}‖_q ≲ ‖f‖_{L^p_α}`
    HardySobolev { p: T, q: T, alpha: T, beta: T },
    /// `‖f/|x|^α‖_p ≲ ‖f‖_{L^p_α}`
    Hardy { p: T, alpha: T },
    /// `‖f/(log(e+1/|x|)^{r/q}|x|^{d/q})‖_q ≲ ‖f‖_{L^p_{d/p}}`
    CriticalHardy { p: T, q: T, r: T },
    /// `‖|x|^a f‖_r ≲ ‖f‖_{L^p_α}^θ ‖|x|^b f‖_q^{1-θ}`
    Ckn { p: T, q: T, r: T, theta: T, a: T, b: T, alpha: T },
    /// `‖f‖_r ≲ ‖f‖_{L^p_α}^θ ‖f‖_q^{1-θ}`
    Gn { p: T, q: T, r: T, theta: T, alpha: T },
    /// Logarithmic endpoint of the CKN family at `α = d/p1`.
    CriticalCkn { p1: T, q1: T, r1: T, theta: T, a: T, r: T },
    /// Bilinear form with kernel `G_{a2}` and weights `|x|^{-a1}`, `|y|^{-β}`.
    Hls { p: T, q: T, alpha: T, beta: T, a1: T, a2: T },
    /// `‖f‖_{L^p_α} ‖|x|^{β/q} f‖_{q'} ≳ ‖f‖_2^2`
    Uncertainty { p: T, q: T, alpha: T, beta: T },
    /// Critical variant with the logarithmic weight.
    UncertaintyCritical { p: T, q: T, r: T },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalitySpec<T> {
    pub kind: InequalityKind<T>,
    pub space: PolarSpace<T>,
    #[serde(default)]
    pub char_rate: T,
}

/// Outcome of [`validate`]: derived exponents and every condition's truth value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validation<T> {
    pub admissible: bool,
    pub derived: BTreeMap<String, T>,
    pub conditions: Vec<(String, bool)>,
    pub violations: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioVerdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

/// Ratios of a checker over a sequence of refinements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport<T> {
    /// Ratio per input at the finest level.
    pub ratios: Vec<T>,
    pub max_ratio: T,
    /// `max_ratio` at each refinement level.
    pub refinement_trend: Vec<T>,
    pub verdict: RatioVerdict,
}

impl<T: Scalar> RatioReport<T> {
    /// Classifies a refinement trend: bounded if it varies by less than 10%,
    /// unbounded if it at least doubles on two successive steps.
    pub fn from_trend(ratios: Vec<T>, trend: Vec<T>) -> Self {
        let max_ratio = trend.iter().copied().fold(T::zero(), T::max);
        RatioReport { ratios, max_ratio, verdict: classify_trend(&trend), refinement_trend: trend }
    }
}

pub fn classify_trend<T: Scalar>(trend: &[T]) -> RatioVerdict {
    if trend.len() < 2 {
        return RatioVerdict::Inconclusive;
    }
    let two = T::one() + T::one();
    let mut run = 0;
    for w in trend.windows(2) {
        if w[0] > T::zero() && w[1] >= two * w[0] {
            run += 1;
            if run >= 2 {
                return RatioVerdict::Unbounded;
            }
        } else {
            run = 0;
        }
    }
    let hi = trend.iter().copied().fold(T::neg_infinity(), T::max);
    let lo = trend.iter().copied().fold(T::infinity(), T::min);
    if hi == T::zero() || (hi.is_finite() && hi - lo < crate::cst::<T>(0.1) * hi) {
        RatioVerdict::Bounded
    } else {
        RatioVerdict::Inconclusive
    }
}

impl<T: Scalar> InequalitySpec<T> {
    pub fn new(kind: InequalityKind<T>, space: PolarSpace<T>) -> Self {
        InequalitySpec { kind, space, char_rate: T::zero() }
    }

    pub fn with_char_rate(mut self, rate: T) -> Self {
        self.char_rate = rate;
        self
    }

    pub fn dim(&self) -> T {
        self.space.local_dim()
    }
}

struct Conditions<T> {
    derived: BTreeMap<String, T>,
    list: Vec<(String, bool)>,
}

impl<T: Scalar> Conditions<T> {
    fn new() -> Self {
        Conditions { derived: BTreeMap::new(), list: vec![] }
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.list.push((name.to_string(), ok));
    }

    fn derive(&mut self, name: &str, v: T) {
        self.derived.insert(name.to_string(), v);
    }

    fn finish(self) -> Validation<T> {
        let violations: Vec<String> = self.list.iter().filter(|c| !c.1).map(|c| c.0.clone()).collect();
        Validation { admissible: violations.is_empty(), derived: self.derived, conditions: self.list, violations }
    }
}

fn conj<T: Scalar>(p: T) -> T {
    p / (p - T::one())
}

/// `q̃ = qrθ / (q - (1-θ) r)`.
pub fn q_tilde<T: Scalar>(q: T, r: T, theta: T) -> T {
    q * r * theta / (q - (T::one() - theta) * r)
}

fn exponent_range<T: Scalar>(c: &mut Conditions<T>, name: &str, p: T) {
    c.check(&format!("1 < {name} < ∞"), p > T::one() && p.is_finite());
}

/// Evaluates every hypothesis of the theorem matching `spec.kind`.
/// Never fails; violated conditions are listed by name.
pub fn validate<T: Scalar>(spec: &InequalitySpec<T>) -> Validation<T> {
    let d = spec.dim();
    let one = T::one();
    let zero = T::zero();
    let mut c = Conditions::new();
    match spec.kind {
        InequalityKind::HardySobolev { p, q, alpha, beta } => {
            exponent_range(&mut c, "p", p);
            exponent_range(&mut c, "q", q);
            c.derive("p_conj", conj(p));
            c.derive("q_conj", conj(q));
            c.check("0 ≤ β < d", beta >= zero && beta < d);
            c.check("q ≥ p", q >= p);
            let part_i = alpha > zero && alpha < d && one / p - one / q <= alpha / d - beta / (d * q);
            let part_ii = d / p <= alpha && alpha < d;
            c.check("0 < α < d and 1/p - 1/q ≤ α/d - β/(dq), or d/p ≤ α < d", part_i || part_ii);
        }
        InequalityKind::Hardy { p, alpha } => {
            exponent_range(&mut c, "p", p);
            c.derive("p_conj", conj(p));
            c.check("0 ≤ α < d/p", alpha >= zero && alpha < d / p);
        }
        InequalityKind::CriticalHardy { p, q, r } => {
            exponent_range(&mut c, "p", p);
            let pc = conj(p);
            c.derive("p_conj", pc);
            c.derive("q_max", (r - one) * pc);
            c.check("p < r < ∞", r > p && r.is_finite());
            c.check("p ≤ q < (r-1)p'", q >= p && q < (r - one) * pc);
        }
        InequalityKind::Ckn { p, q, r, theta, a, b, alpha } => ckn_conditions(&mut c, d, p, q, r, theta, a, b, alpha),
        InequalityKind::Gn { p, q, r, theta, alpha } => ckn_conditions(&mut c, d, p, q, r, theta, zero, zero, alpha),
        InequalityKind::CriticalCkn { p1, q1, r1, theta, a: _, r } => {
            exponent_range(&mut c, "p1", p1);
            let pc = conj(p1);
            c.derive("p1_conj", pc);
            c.check("p1 < r < ∞", r > p1 && r.is_finite());
            c.check("0 < q1 < ∞", q1 > zero && q1.is_finite());
            c.check("0 < r1 < ∞", r1 > zero && r1.is_finite());
            c.check("0 < θ ≤ 1", theta > zero && theta <= one);
            c.check("θ > (r1 - q1)/r1", theta > (r1 - q1) / r1);
            let qt = q_tilde(q1, r1, theta);
            c.derive("q1_tilde", qt);
            c.derive("q_max", (r - one) * pc);
            c.check("p1 ≤ q̃1 < (r-1)p1'", qt >= p1 && qt < (r - one) * pc);
        }
        InequalityKind::Hls { p, q, alpha, beta, a1, a2 } => {
            exponent_range(&mut c, "p", p);
            exponent_range(&mut c, "q", q);
            c.derive("s", (p + q) / (p * q));
            c.check("0 ≤ α < d", alpha >= zero && alpha < d);
            c.check("0 ≤ β < d/q", beta >= zero && beta < d / q);
            c.check("0 ≤ a1 < dp/(p+q)", a1 >= zero && a1 < d * p / (p + q));
            c.check("0 < a2 < d", a2 > zero && a2 < d);
            let s = one / p - q / (p + q);
            c.check("0 ≤ 1/p - q/(p+q) ≤ α/d", s >= zero && s <= alpha / d);
            c.check("1/q - p/(p+q) ≤ (a2 - a1)/d", one / q - p / (p + q) <= (a2 - a1) / d);
        }
        InequalityKind::Uncertainty { p, q, alpha, beta } => {
            exponent_range(&mut c, "p", p);
            exponent_range(&mut c, "q", q);
            c.derive("p_conj", conj(p));
            c.derive("q_conj", conj(q));
            c.check("0 ≤ β < d", beta >= zero && beta < d);
            c.check("0 < α < d", alpha > zero && alpha < d);
            c.check("q ≥ p", q >= p);
            c.check("1/p - 1/q ≤ α/d - β/(dq)", one / p - one / q <= alpha / d - beta / (d * q));
        }
        InequalityKind::UncertaintyCritical { p, q, r } => {
            exponent_range(&mut c, "p", p);
            let pc = conj(p);
            c.derive("p_conj", pc);
            c.derive("q_conj", conj(q));
            c.derive("q_max", (r - one) * pc);
            c.check("p < r < ∞", r > p && r.is_finite());
            c.check("p ≤ q < (r-1)p'", q >= p && q < (r - one) * pc);
        }
    }
    c.finish()
}

#[allow(clippy::too_many_arguments)]
fn ckn_conditions<T: Scalar>(c: &mut Conditions<T>, d: T, p: T, q: T, r: T, theta: T, a: T, b: T, alpha: T) {
    let one = T::one();
    let zero = T::zero();
    exponent_range(c, "p", p);
    c.derive("p_conj", conj(p));
    c.check("0 < q < ∞", q > zero && q.is_finite());
    c.check("0 < r < ∞", r > zero && r.is_finite());
    c.check("0 < θ ≤ 1", theta > zero && theta <= one);
    c.check("θ > (r - q)/r", theta > (r - q) / r);
    let den = q - (one - theta) * r;
    let qt = q_tilde(q, r, theta);
    c.derive("q_tilde", qt);
    c.check("p ≤ q̃", den > zero && p <= qt);
    let m = b * (one - theta) - a;
    let w = q * r * m / den;
    c.derive("weight_exponent", w);
    c.check("0 ≤ qr(b(1-θ) - a)/(q - (1-θ)r) < d", w >= zero && w < d);
    c.check(
        "1/p - (q - (1-θ)r)/(qrθ) ≤ α/d - (b(1-θ) - a)/(θd)",
        one / p - den / (q * r * theta) <= alpha / d - m / (theta * d),
    );
    c.check("0 < α < d", alpha > zero && alpha < d);
}

/// The special case an inequality reduces to, if any:
/// CKN with `θ = 1` is Hardy–Sobolev with `q = r`, `β = -ar`;
/// CKN with `a = b = 0` is Gagliardo–Nirenberg;
/// Hardy–Sobolev with `q = p`, `β = αp` is Hardy.
pub fn reduce<T: Scalar>(spec: &InequalitySpec<T>) -> Option<InequalitySpec<T>> {
    let kind = match spec.kind {
        InequalityKind::Ckn { p, r, theta, a, alpha, .. } if theta == T::one() => {
            InequalityKind::HardySobolev { p, q: r, alpha, beta: -a * r }
        }
        InequalityKind::Ckn { p, q, r, theta, a, b, alpha } if a == T::zero() && b == T::zero() => {
            InequalityKind::Gn { p, q, r, theta, alpha }
        }
        InequalityKind::HardySobolev { p, q, alpha, beta } if q == p && beta == alpha * p => {
            InequalityKind::Hardy { p, alpha }
        }
        _ => return None,
    };
    Some(InequalitySpec { kind, space: spec.space.clone(), char_rate: spec.char_rate })
}
