//! One-dimensional integration over subintervals of `(0, ∞)`.
//!
//! Finite pieces use global adaptive Gauss–Kronrod (21 points). Infinite
//! pieces and the end `r = 0` are mapped to `t = ln r` and handled by
//! successive segments of doubling width; each new segment is compared with an
//! extrapolated tail built from the integrand's asymptotic hint (or, without
//! a hint, from the sampled log-slope). Divergence is a result, not an error.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{exponent_sign, InfClass, ZeroClass};
use crate::{cst, to_f64, Scalar};

/// Endpoint of `(0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Zero,
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuadValue<T> {
    Finite(T),
    Divergent(End),
}

impl<T: Scalar> QuadValue<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            QuadValue::Finite(v) => Some(v),
            QuadValue::Divergent(_) => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, QuadValue::Divergent(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<T> {
    pub value: QuadValue<T>,
    pub abs_error_estimate: T,
    pub evaluations: usize,
}

impl<T: Scalar> QuadResult<T> {
    pub fn finite(&self) -> Option<T> {
        self.value.finite()
    }

    pub fn is_divergent(&self) -> bool {
        self.value.is_divergent()
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("integrand is negative or NaN at r = {r}")]
    NonPositiveIntegrand { r: f64 },
    #[error("integrand is infinite at r = {r}")]
    NonFiniteIntegrand { r: f64 },
    #[error("tolerance {tol} not met within {evaluations} evaluations")]
    NoConvergence { tol: f64, evaluations: usize },
    #[error("invalid integration range [{a}, {b}] or tolerance")]
    InvalidRange { a: f64, b: f64 },
    #[error("integral diverges at {end:?}")]
    Divergent { end: End },
    #[error("evaluation failed: {0}")]
    EvaluationFailure(String),
}

/// A nonnegative function on `(0, ∞)` with optional endpoint hints.
///
/// The hints describe the asymptotic class of `eval` near zero and near
/// infinity. They steer the tail extrapolation and the divergence verdict;
/// a wrong hint can produce a wrong verdict, so only pass hints derived from
/// the closed form of the integrand.
pub struct Integrand<'a, T> {
    eval: Box<dyn Fn(T) -> T + 'a>,
    pub singularity_hint_zero: Option<ZeroClass<T>>,
    pub decay_hint_infinity: Option<InfClass<T>>,
}

impl<'a, T: Scalar> Integrand<'a, T> {
    pub fn new(f: impl Fn(T) -> T + 'a) -> Self {
        Integrand { eval: Box::new(f), singularity_hint_zero: None, decay_hint_infinity: None }
    }

    pub fn with_zero_hint(mut self, c: ZeroClass<T>) -> Self {
        self.singularity_hint_zero = Some(c);
        self
    }

    pub fn with_infinity_hint(mut self, c: InfClass<T>) -> Self {
        self.decay_hint_infinity = Some(c);
        self
    }

    pub fn with_hints(mut self, z: Option<ZeroClass<T>>, i: Option<InfClass<T>>) -> Self {
        self.singularity_hint_zero = z;
        self.decay_hint_infinity = i;
        self
    }

    #[inline]
    pub fn eval(&self, r: T) -> T {
        (self.eval)(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig<T> {
    /// Relative tolerance.
    pub tol: T,
    pub max_evals: usize,
}

impl<T: Scalar> Default for QuadConfig<T> {
    fn default() -> Self {
        QuadConfig { tol: cst(1e-9), max_evals: 4_000_000 }
    }
}

impl<T: Scalar> QuadConfig<T> {
    pub fn with_tol(tol: T) -> Self {
        QuadConfig { tol, ..Default::default() }
    }
}

// Gauss–Kronrod 10/21 abscissae and weights.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_996,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Largest `|ln r|` the scalar type represents comfortably.
fn log_range<T: Scalar>() -> T {
    T::max_value().ln() - cst(10.0)
}

struct Ctx<'f, 'a, T> {
    f: &'f Integrand<'a, T>,
    evals: Cell<usize>,
    max_evals: usize,
}

impl<'f, 'a, T: Scalar> Ctx<'f, 'a, T> {
    fn sample(&self, r: T) -> Result<T, QuadError> {
        let n = self.evals.get() + 1;
        self.evals.set(n);
        if n > self.max_evals {
            return Err(QuadError::NoConvergence { tol: f64::NAN, evaluations: n });
        }
        let v = self.f.eval(r);
        if v.is_nan() || v < T::zero() {
            return Err(QuadError::NonPositiveIntegrand { r: to_f64(r) });
        }
        if v.is_infinite() {
            return Err(QuadError::NonFiniteIntegrand { r: to_f64(r) });
        }
        Ok(v)
    }

    /// Integrand in `t = ln r`: `f(e^t) e^t`.
    fn sample_log(&self, t: T) -> Result<T, QuadError> {
        let r = t.exp();
        if r == T::zero() {
            return Ok(T::zero());
        }
        let v = self.sample(r)? * r;
        if v.is_infinite() {
            return Err(QuadError::NonFiniteIntegrand { r: to_f64(r) });
        }
        Ok(v)
    }
}

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

fn gk21<T: Scalar, H>(h: &mut H, a: T, b: T) -> Result<Panel<T>, QuadError>
where
    H: FnMut(T) -> Result<T, QuadError>,
{
    let half = cst::<T>(0.5);
    let center = half * (a + b);
    let hl = half * (b - a);
    let fc = h(center)?;
    let mut resg = T::zero();
    let mut resk = cst::<T>(WGK[10]) * fc;
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..5 {
        let jt = 2 * j + 1;
        let x = hl * cst(XGK[jt]);
        let f1 = h(center - x)?;
        let f2 = h(center + x)?;
        fv1[jt] = f1;
        fv2[jt] = f2;
        resg = resg + cst::<T>(WG[j]) * (f1 + f2);
        resk = resk + cst::<T>(WGK[jt]) * (f1 + f2);
    }
    for j in 0..5 {
        let jt = 2 * j;
        let x = hl * cst(XGK[jt]);
        let f1 = h(center - x)?;
        let f2 = h(center + x)?;
        fv1[jt] = f1;
        fv2[jt] = f2;
        resk = resk + cst::<T>(WGK[jt]) * (f1 + f2);
    }
    let reskh = resk * half;
    let mut resasc = cst::<T>(WGK[10]) * (fc - reskh).abs();
    let mut resabs = cst::<T>(WGK[10]) * fc.abs();
    for j in 0..10 {
        resasc = resasc + cst::<T>(WGK[j]) * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
        resabs = resabs + cst::<T>(WGK[j]) * (fv1[j].abs() + fv2[j].abs());
    }
    let dh = hl.abs();
    let value = resk * hl;
    resasc = resasc * dh;
    resabs = resabs * dh;
    let mut err = ((resk - resg) * hl).abs();
    if resasc != T::zero() && err != T::zero() {
        let s = (cst::<T>(200.0) * err / resasc).powf(cst(1.5));
        err = resasc * if s < T::one() { s } else { T::one() };
    }
    let floor = cst::<T>(50.0) * T::epsilon() * resabs;
    if err < floor {
        err = floor;
    }
    Ok(Panel { a, b, value, err })
}

/// Global adaptive bisection until the summed error meets
/// `max(abs_tol, rel_tol * |I|)`.
fn adaptive<T: Scalar, H>(h: &mut H, a: T, b: T, rel_tol: T, abs_tol: T) -> Result<(T, T), QuadError>
where
    H: FnMut(T) -> Result<T, QuadError>,
{
    const MAX_PANELS: usize = 2000;
    let mut panels = vec![gk21(h, a, b)?];
    loop {
        let total: T = panels.iter().map(|p| p.value).sum();
        let err: T = panels.iter().map(|p| p.err).sum();
        // Below this level values are subnormal and carry no relative accuracy.
        let floor = T::min_positive_value() / T::epsilon();
        let target = (rel_tol * total.abs()).max(abs_tol).max(floor);
        if err <= target {
            return Ok((total, err));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| if p.err > acc.1 { (i, p.err) } else { acc });
        let worst = panels.swap_remove(idx);
        let mid = cst::<T>(0.5) * (worst.a + worst.b);
        let tiny = (worst.b - worst.a).abs() <= cst::<T>(64.0) * T::epsilon() * worst.a.abs().max(worst.b.abs());
        if tiny || panels.len() + 2 > MAX_PANELS {
            panels.push(worst);
            let total: T = panels.iter().map(|p| p.value).sum();
            let err: T = panels.iter().map(|p| p.err).sum();
            if err <= cst::<T>(10.0) * target {
                return Ok((total, err));
            }
            return Err(QuadError::NoConvergence { tol: to_f64(rel_tol), evaluations: 0 });
        }
        panels.push(gk21(h, worst.a, mid)?);
        panels.push(gk21(h, mid, worst.b)?);
    }
}

/// Asymptotic model of a tail in the extension variable `u`.
#[derive(Clone, Copy, Debug)]
enum UClass<T> {
    /// `e^{-k u} u^b (ln u)^c`
    Power { k: T, b: T, c: T },
    /// `r^s e^{-λ r}` with `λ > 0`, in the original variable at infinity.
    SuperExp { lambda: T, s: T },
}

impl<T: Scalar> UClass<T> {
    fn divergent(&self) -> bool {
        match *self {
            UClass::Power { k, b, c } => match exponent_sign(k) {
                -1 => true,
                1 => false,
                _ => match exponent_sign(b + T::one()) {
                    1 => true,
                    -1 => false,
                    _ => exponent_sign(c + T::one()) >= 0,
                },
            },
            UClass::SuperExp { .. } => false,
        }
    }
}

fn laguerre_factor<T: Scalar>(k: T, b: T, u: T) -> T {
    // (1/k) ∫_0^∞ e^{-v} (1 + v/(k u))^b dv
    if b == T::zero() {
        return T::one() / k;
    }
    let ku = k * u;
    let mut h = |v: T| -> Result<T, QuadError> { Ok((-v).exp() * (T::one() + v / ku).powf(b)) };
    let upper = cst::<T>(60.0) + cst::<T>(4.0) * b.abs();
    match adaptive(&mut h, T::zero(), upper, cst(1e-12), T::zero()) {
        Ok((v, _)) => v / k,
        Err(_) => T::nan(),
    }
}

/// Extrapolated value of the remaining tail beyond `u`, given `g(u)` and `r`
/// (the original variable at `u`).
fn tail_estimate<T: Scalar>(class: UClass<T>, g_u: T, u: T, r: T) -> Option<T> {
    if g_u == T::zero() {
        return Some(T::zero());
    }
    match class {
        UClass::Power { k, b, c } => match exponent_sign(k) {
            1 => {
                let v = g_u * laguerre_factor(k, b, u);
                if v.is_finite() {
                    Some(v)
                } else {
                    None
                }
            }
            0 if exponent_sign(b + T::one()) < 0 => Some(g_u * u / (-b - T::one())),
            0 if exponent_sign(b + T::one()) == 0 && exponent_sign(c + T::one()) < 0 && u > T::one() => {
                Some(g_u * u * u.ln() / (-c - T::one()))
            }
            _ => None,
        },
        UClass::SuperExp { lambda, s } => {
            // g_u = f(r) r; bound ∫_r^∞ f ≤ f(r) / (λ - max(s,0)/r).
            let denom = lambda - s.max(T::zero()) / r;
            if denom > T::zero() {
                Some(g_u / r / denom)
            } else {
                None
            }
        }
    }
}

enum Ext<T> {
    Done { sum: T, err: T },
    Divergent,
}

/// Integrates the segment sequence `[u0, u0+w0], [.., +2w0], ...` of
/// `g(u)` until the tail is negligible, divergence is established, or the
/// representable range is exhausted.
fn extend<T: Scalar, G>(
    g: &mut G,
    to_r: &dyn Fn(T) -> T,
    hint: Option<UClass<T>>,
    u0: T,
    base_total: T,
    tol: T,
) -> Result<Ext<T>, QuadError>
where
    G: FnMut(T) -> Result<T, QuadError>,
{
    let umax = log_range::<T>();
    let mut u = u0;
    let mut w = cst::<T>(2.0);
    let mut sum = T::zero();
    let mut err = T::zero();
    let mut last: Option<T> = None;
    let mut grow_count = 0usize;
    let mut zero_run = 0usize;
    let mut prev_tail: Option<T> = None;

    // Tail estimate straight away if the window already touches the limit.
    if u >= umax {
        let gu = g(u)?;
        let class = hint.unwrap_or(UClass::Power { k: T::one(), b: T::zero(), c: T::zero() });
        return match tail_estimate(class, gu, u, to_r(u)) {
            Some(t) => Ok(Ext::Done { sum: t, err: t }),
            None => Ok(Ext::Divergent),
        };
    }

    loop {
        let u1 = (u + w).min(umax);
        let running = (base_total + sum).abs();
        let abs_tol = cst::<T>(0.125) * tol * running;
        let (seg, seg_err) = match adaptive(g, u, u1, tol * cst(0.125), abs_tol) {
            Ok(v) => v,
            Err(QuadError::NonFiniteIntegrand { .. }) => return Ok(Ext::Divergent),
            Err(e) => return Err(e),
        };
        sum = sum + seg;
        err = err + seg_err;
        let running = (base_total + sum).abs();

        let gu = match g(u1) {
            Ok(v) => v,
            Err(QuadError::NonFiniteIntegrand { .. }) => return Ok(Ext::Divergent),
            Err(e) => return Err(e),
        };
        if gu == T::zero() && seg == T::zero() {
            zero_run += 1;
            if zero_run >= 2 {
                return Ok(Ext::Done { sum, err });
            }
        } else {
            zero_run = 0;
        }

        let hinted = hint.is_some();
        let class = match hint {
            Some(c) => c,
            None => {
                let d = (w * cst(0.5)).min(T::one());
                let gm = g(u1 - d)?;
                if gu > T::zero() && gm > T::zero() {
                    UClass::Power { k: (gm.ln() - gu.ln()) / d, b: T::zero(), c: T::zero() }
                } else {
                    UClass::Power { k: T::one(), b: T::zero(), c: T::zero() }
                }
            }
        };

        if let Some(prev) = last {
            if seg > T::zero() && seg >= cst::<T>(0.97) * prev {
                grow_count += 1;
            } else {
                grow_count = 0;
            }
        }
        last = Some(seg);

        // Doubling windows make segment sums grow for slowly decaying tails too,
        // so growth only counts while the tail estimate is not shrinking.
        let mut shrinking = false;
        if class.divergent() {
            let needed = if hinted { 1 } else { 2 };
            if grow_count >= needed {
                return Ok(Ext::Divergent);
            }
        } else if let Some(tail) = tail_estimate(class, gu, u1, to_r(u1)) {
            shrinking = prev_tail.is_some_and(|pt| tail < cst::<T>(0.9) * pt);
            let tail_err = match prev_tail {
                Some(pt) => (pt - (seg + tail)).abs(),
                None => tail,
            };
            prev_tail = Some(tail);
            if tail <= cst::<T>(0.05) * tol * running {
                return Ok(Ext::Done { sum: sum + tail, err: err + tail.min(tail_err) });
            }
            let deep = u1 >= cst(20.0);
            if hinted && deep && tail_err <= cst::<T>(0.1) * tol * running {
                return Ok(Ext::Done { sum: sum + tail, err: err + tail_err });
            }
            if u1 >= umax {
                if tail_err <= tol * running {
                    return Ok(Ext::Done { sum: sum + tail, err: err + tail_err });
                }
                return Err(QuadError::NoConvergence { tol: to_f64(tol), evaluations: 0 });
            }
        }
        if grow_count >= 2 && !hinted && !shrinking {
            return Ok(Ext::Divergent);
        }
        if u1 >= umax {
            if grow_count >= 1 {
                return Ok(Ext::Divergent);
            }
            return Err(QuadError::NoConvergence { tol: to_f64(tol), evaluations: 0 });
        }
        u = u1;
        w = w * cst(2.0);
    }
}

fn zero_uclass<T: Scalar>(c: ZeroClass<T>) -> UClass<T> {
    UClass::Power { k: c.power + T::one(), b: c.log, c: c.loglog }
}

fn inf_uclass<T: Scalar>(c: InfClass<T>) -> UClass<T> {
    match exponent_sign(c.rate) {
        -1 => UClass::SuperExp { lambda: -c.rate, s: c.power },
        1 => UClass::Power { k: -T::one(), b: T::zero(), c: T::zero() },
        _ => UClass::Power { k: -(c.power + T::one()), b: c.log, c: T::zero() },
    }
}

/// `∫_a^b f(r) dr` with the default evaluation budget.
pub fn integrate<T: Scalar>(f: &Integrand<'_, T>, a: T, b: T, tol: T) -> Result<QuadResult<T>, QuadError> {
    integrate_with(f, a, b, &QuadConfig::with_tol(tol))
}

pub fn integrate_with<T: Scalar>(
    f: &Integrand<'_, T>,
    a: T,
    b: T,
    cfg: &QuadConfig<T>,
) -> Result<QuadResult<T>, QuadError> {
    let tol = cfg.tol;
    if !(a >= T::zero()) || !(a < b) || !(tol > T::zero()) || a.is_infinite() {
        return Err(QuadError::InvalidRange { a: to_f64(a), b: to_f64(b) });
    }
    let ctx = Ctx { f, evals: Cell::new(0), max_evals: cfg.max_evals };
    let fix_budget = |e: QuadError, ctx: &Ctx<'_, '_, T>| match e {
        QuadError::NoConvergence { .. } => QuadError::NoConvergence { tol: to_f64(tol), evaluations: ctx.evals.get() },
        other => other,
    };
    let finish = |value: QuadValue<T>, err: T, ctx: &Ctx<'_, '_, T>| QuadResult {
        value,
        abs_error_estimate: err,
        evaluations: ctx.evals.get(),
    };

    let lr = log_range::<T>();
    if a > T::zero() && b.is_finite() {
        let res = if b / a <= cst(8.0) {
            let mut h = |r: T| ctx.sample(r);
            adaptive(&mut h, a, b, tol, T::zero())
        } else {
            let mut h = |t: T| ctx.sample_log(t);
            adaptive(&mut h, a.ln(), b.ln(), tol, T::zero())
        };
        let (v, e) = res.map_err(|e| fix_budget(e, &ctx))?;
        return Ok(finish(QuadValue::Finite(v), e, &ctx));
    }

    let window = cst::<T>(4.0);
    let (lo, hi) = if a > T::zero() {
        (a.ln(), a.ln() + window)
    } else if b.is_finite() {
        (b.ln() - window, b.ln())
    } else {
        (-cst::<T>(3.0), cst::<T>(3.0))
    };
    let lo = lo.max(-lr);
    let hi = hi.min(lr);
    let mut total = T::zero();
    let mut err = T::zero();
    if lo < hi {
        let mut h = |t: T| ctx.sample_log(t);
        let (v, e) = adaptive(&mut h, lo, hi, tol * cst(0.25), T::zero()).map_err(|e| fix_budget(e, &ctx))?;
        total = v;
        err = e;
    }

    if a == T::zero() {
        let mut g = |u: T| ctx.sample_log(-u);
        let to_r = |u: T| (-u).exp();
        let hint = f.singularity_hint_zero.map(zero_uclass);
        match extend(&mut g, &to_r, hint, -lo, total, tol).map_err(|e| fix_budget(e, &ctx))? {
            Ext::Done { sum, err: e } => {
                total = total + sum;
                err = err + e;
            }
            Ext::Divergent => return Ok(finish(QuadValue::Divergent(End::Zero), T::infinity(), &ctx)),
        }
    }
    if b.is_infinite() {
        let mut g = |u: T| ctx.sample_log(u);
        let to_r = |u: T| u.exp();
        let hint = f.decay_hint_infinity.map(inf_uclass);
        match extend(&mut g, &to_r, hint, hi, total, tol).map_err(|e| fix_budget(e, &ctx))? {
            Ext::Done { sum, err: e } => {
                total = total + sum;
                err = err + e;
            }
            Ext::Divergent => return Ok(finish(QuadValue::Divergent(End::Infinity), T::infinity(), &ctx)),
        }
    }
    Ok(finish(QuadValue::Finite(total), err, &ctx))
}

/// Prefix integrals `F(r_i) = ∫_0^{r_i} f` on an increasing grid.
pub fn cumulative<T: Scalar>(f: &Integrand<'_, T>, grid: &[T], tol: T) -> Result<Vec<T>, QuadError> {
    let mut out = Vec::with_capacity(grid.len());
    let mut prev = T::zero();
    let mut acc = T::zero();
    for (i, &r) in grid.iter().enumerate() {
        if !(r > prev) || (i > 0 && !(r > grid[i - 1])) {
            return Err(QuadError::InvalidRange { a: to_f64(prev), b: to_f64(r) });
        }
        let res = integrate(f, prev, r, tol)?;
        match res.value {
            QuadValue::Finite(v) => acc = acc + v,
            QuadValue::Divergent(end) => return Err(QuadError::Divergent { end }),
        }
        out.push(acc);
        prev = r;
    }
    Ok(out)
}

/// Result of [`sup_search`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupResult<T> {
    pub sup: QuadValue<T>,
    pub argmax: T,
    pub evaluations: usize,
}

/// Points in the coarse scan of [`sup_search`].
pub const SUP_SCAN_POINTS: usize = 65;

/// Supremum of `g` over `[r_min, r_max]`: log-spaced scan, then golden-section
/// refinement around the best scan point until the bracket is narrower than
/// `refine_tol`.
///
/// Reports divergence at an end when `g` increases monotonically into it and
/// its value there is at least `10^6` times the scan median.
pub fn sup_search<T: Scalar, G>(mut g: G, r_min: T, r_max: T, refine_tol: T) -> Result<SupResult<T>, QuadError>
where
    G: FnMut(T) -> Result<T, QuadError>,
{
    if !(r_min > T::zero()) || !(r_max > r_min) || !r_max.is_finite() {
        return Err(QuadError::InvalidRange { a: to_f64(r_min), b: to_f64(r_max) });
    }
    let mut evals = 0usize;
    let mut call = |r: T, evals: &mut usize| -> Result<T, QuadError> {
        *evals += 1;
        let v = g(r)?;
        if v.is_nan() {
            return Err(QuadError::EvaluationFailure(format!("NaN at R = {}", to_f64(r))));
        }
        Ok(v)
    };
    let n = SUP_SCAN_POINTS;
    let (l0, l1) = (r_min.ln(), r_max.ln());
    let step = (l1 - l0) / T::from_usize(n - 1).unwrap();
    let xs: Vec<T> = (0..n).map(|i| l0 + step * T::from_usize(i).unwrap()).collect();
    let mut vals = Vec::with_capacity(n);
    for (i, &x) in xs.iter().enumerate() {
        let v = call(x.exp(), &mut evals)?;
        if v.is_infinite() {
            let end = if i < n / 2 { End::Zero } else { End::Infinity };
            return Ok(SupResult { sup: QuadValue::Divergent(end), argmax: x.exp(), evaluations: evals });
        }
        vals.push(v);
    }
    let imax = (0..n).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });

    let mut sorted = vals.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[n / 2];
    let run = 8.min(n - 1);
    let threshold = cst::<T>(1e6) * median;
    if imax == n - 1 && (n - 1 - run..n - 1).all(|i| vals[i + 1] >= vals[i]) && vals[n - 1] >= threshold {
        return Ok(SupResult { sup: QuadValue::Divergent(End::Infinity), argmax: r_max, evaluations: evals });
    }
    if imax == 0 && (0..run).all(|i| vals[i] >= vals[i + 1]) && vals[0] >= threshold {
        return Ok(SupResult { sup: QuadValue::Divergent(End::Zero), argmax: r_min, evaluations: evals });
    }

    let mut best = (xs[imax], vals[imax]);
    let mut lo = xs[imax.saturating_sub(1)];
    let mut hi = xs[(imax + 1).min(n - 1)];
    let ratio = cst::<T>(0.618_033_988_749_894_8);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let mut fc = call(c.exp(), &mut evals)?;
    let mut fd = call(d.exp(), &mut evals)?;
    for _ in 0..200 {
        if fc > best.1 {
            best = (c, fc);
        }
        if fd > best.1 {
            best = (d, fd);
        }
        if hi.exp() - lo.exp() <= refine_tol {
            break;
        }
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = call(c.exp(), &mut evals)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = call(d.exp(), &mut evals)?;
        }
    }
    if fc > best.1 {
        best = (c, fc);
    }
    if fd > best.1 {
        best = (d, fd);
    }
    if best.1.is_infinite() {
        return Ok(SupResult { sup: QuadValue::Divergent(End::Infinity), argmax: best.0.exp(), evaluations: evals });
    }
    Ok(SupResult { sup: QuadValue::Finite(best.1), argmax: best.0.exp(), evaluations: evals })
}

/// Which side a tabulated antiderivative is anchored on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Anchor<T> {
    /// `r -> ∫_a^r f`
    Lower(T),
    /// `r -> ∫_r^b f` (`b` may be infinite)
    Upper(T),
}

/// Antiderivative tabulated on a log-spaced grid of knots.
///
/// Lookups add a single short integral from the nearest knot, so repeated
/// evaluation is cheap and keeps the full relative accuracy even where the
/// antiderivative is tiny compared with its total.
pub struct Antiderivative<'a, T> {
    f: Integrand<'a, T>,
    anchor: Anchor<T>,
    knots: Vec<T>,
    cum: Vec<T>,
    cfg: QuadConfig<T>,
}

impl<'a, T: Scalar> Antiderivative<'a, T> {
    /// Tabulates on `[lo, hi]` with `per_decade` knots per decade, plus the
    /// given breakpoints (discontinuities of `f`).
    pub fn new(
        f: Integrand<'a, T>,
        anchor: Anchor<T>,
        lo: T,
        hi: T,
        per_decade: usize,
        breakpoints: &[T],
        tol: T,
    ) -> Result<Self, QuadError> {
        let cfg = QuadConfig::with_tol(tol);
        let (lo, hi) = match anchor {
            Anchor::Lower(a) => (lo.max(a), hi),
            Anchor::Upper(b) => (lo, hi.min(b)),
        };
        let mut knots = Vec::new();
        if lo > T::zero() && hi > lo && hi.is_finite() {
            let decades = (hi / lo).log10();
            let n = ((decades * T::from_usize(per_decade.max(1)).unwrap()).ceil().to_usize().unwrap_or(1)).max(1);
            let step = (hi.ln() - lo.ln()) / T::from_usize(n).unwrap();
            for i in 0..=n {
                knots.push((lo.ln() + step * T::from_usize(i).unwrap()).exp());
            }
            knots[0] = lo;
            knots[n] = hi;
        }
        for &bp in breakpoints {
            if bp > lo && bp < hi {
                knots.push(bp);
            }
        }
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * b.abs());

        let mut cum = vec![T::zero(); knots.len()];
        let piece = |a: T, b: T| -> Result<T, QuadError> {
            if !(a < b) {
                return Ok(T::zero());
            }
            let r = integrate_with(&f, a, b, &cfg)?;
            Ok(r.finite().unwrap_or(T::infinity()))
        };
        if !knots.is_empty() {
            match anchor {
                Anchor::Lower(a) => {
                    cum[0] = piece(a, knots[0])?;
                    for i in 1..knots.len() {
                        cum[i] = cum[i - 1] + piece(knots[i - 1], knots[i])?;
                    }
                }
                Anchor::Upper(b) => {
                    let n = knots.len();
                    cum[n - 1] = piece(knots[n - 1], b)?;
                    for i in (0..n - 1).rev() {
                        cum[i] = cum[i + 1] + piece(knots[i], knots[i + 1])?;
                    }
                }
            }
        }
        Ok(Antiderivative { f, anchor, knots, cum, cfg })
    }

    fn piece(&self, a: T, b: T) -> Result<T, QuadError> {
        if !(a < b) {
            return Ok(T::zero());
        }
        let r = integrate_with(&self.f, a, b, &self.cfg)?;
        Ok(r.finite().unwrap_or(T::infinity()))
    }

    /// Value of the antiderivative at `r` (`+∞` if the integral diverges).
    pub fn eval(&self, r: T) -> Result<T, QuadError> {
        let n = self.knots.len();
        match self.anchor {
            Anchor::Lower(a) => {
                if r <= a {
                    return Ok(T::zero());
                }
                if n == 0 || r < self.knots[0] {
                    return self.piece(a, r);
                }
                let i = self.knots.partition_point(|&k| k <= r) - 1;
                Ok(self.cum[i] + self.piece(self.knots[i], r)?)
            }
            Anchor::Upper(b) => {
                if r >= b {
                    return Ok(T::zero());
                }
                if n == 0 || r >= self.knots[n - 1] {
                    return self.piece(r, b);
                }
                if r < self.knots[0] {
                    return Ok(self.cum[0] + self.piece(r, self.knots[0])?);
                }
                let i = self.knots.partition_point(|&k| k <= r);
                Ok(self.cum[i] + self.piece(r, self.knots[i])?)
            }
        }
    }

    /// Total `∫_a^∞ f` (lower anchor) or `∫_0^b f` (upper anchor).
    pub fn total(&self) -> Result<T, QuadError> {
        match self.anchor {
            Anchor::Lower(a) => {
                let last = self.knots.last().copied();
                match last {
                    Some(k) => Ok(self.cum[self.cum.len() - 1] + self.piece(k, T::infinity())?),
                    None => self.piece(a, T::infinity()),
                }
            }
            Anchor::Upper(b) => match self.knots.first().copied() {
                Some(k) => Ok(self.cum[0] + self.piece(T::zero(), k)?),
                None => self.piece(T::zero(), b),
            },
        }
    }
}
