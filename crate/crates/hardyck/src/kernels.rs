//! Bessel-type convolution kernels: radial majorants, the exact Euclidean
//! kernel via subordination, tail integrability and Young's inequality on
//! the integer lattice.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{InfClass, Integrability};
use crate::polar_space::PolarSpace;
use crate::quadrature::{integrate, Integrand, QuadError, QuadValue};
use crate::{cst, to_f64, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelVariant<T> {
    /// `r^{α-d}` (or `log(1/r)` when `α = d`) on `(0,1]`,
    /// `e^{rate r/2} e^{-c' r}` beyond.
    Noncompact { alpha: T, d: T, c_prime: T, char_rate: T },
    /// `r^{α-d}` on `(0, diameter]`.
    Compact { alpha: T, d: T, diameter: T },
    /// `(1/Γ(α/2)) ∫_0^∞ t^{α/2-1} e^{-ct} (4πt)^{-d/2} e^{-r²/4t} dt`.
    EuclideanBessel { alpha: T, d: u32, c: T },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct KernelBound<T> {
    pub variant: KernelVariant<T>,
    /// Normalization `C`.
    #[serde(default = "unit")]
    pub c_norm: T,
}

fn unit<T: Scalar>() -> T {
    T::one()
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("invalid kernel parameters: {0}")]
    Parameter(String),
    #[error("r = {r} lies outside the kernel's domain")]
    OutsideDomain { r: f64 },
    #[error("exponents violate the scaling relation: {0}")]
    Exponent(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

impl<T: Scalar> KernelBound<T> {
    /// Noncompact majorant with `c' = 4 (rate/2 + κ)`, where `κ` is the
    /// exponential volume growth rate (at least 1/4 so `c' > 0`).
    pub fn noncompact(alpha: T, d: T, char_rate: T, kappa: T) -> Self {
        let c_prime = (cst::<T>(4.0) * (char_rate / cst(2.0) + kappa)).max(T::one());
        Self::new(KernelVariant::Noncompact { alpha, d, c_prime, char_rate })
    }

    /// Compact majorant on a model of diameter `π`.
    pub fn compact(alpha: T, d: T) -> Self {
        Self::new(KernelVariant::Compact { alpha, d, diameter: T::PI() })
    }

    pub fn euclidean_bessel(alpha: T, d: u32, c: T) -> Self {
        Self::new(KernelVariant::EuclideanBessel { alpha, d, c })
    }

    pub fn new(variant: KernelVariant<T>) -> Self {
        KernelBound { variant, c_norm: T::one() }
    }

    pub fn with_norm(mut self, c: T) -> Self {
        self.c_norm = c;
        self
    }

    /// The same kernel family with order `α` replaced.
    pub fn with_alpha(mut self, a: T) -> Self {
        match &mut self.variant {
            KernelVariant::Noncompact { alpha, .. }
            | KernelVariant::Compact { alpha, .. }
            | KernelVariant::EuclideanBessel { alpha, .. } => *alpha = a,
        }
        self
    }

    /// Order `α` of the kernel.
    pub fn alpha(&self) -> T {
        match self.variant {
            KernelVariant::Noncompact { alpha, .. }
            | KernelVariant::Compact { alpha, .. }
            | KernelVariant::EuclideanBessel { alpha, .. } => alpha,
        }
    }

    pub fn dim(&self) -> T {
        match self.variant {
            KernelVariant::Noncompact { d, .. } | KernelVariant::Compact { d, .. } => d,
            KernelVariant::EuclideanBessel { d, .. } => cst(d as f64),
        }
    }

    /// Radius beyond which the kernel is not defined.
    pub fn support_radius(&self) -> T {
        match self.variant {
            KernelVariant::Compact { diameter, .. } => diameter,
            _ => T::infinity(),
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let bad = |m: &str| Err(KernelError::Parameter(m.to_string()));
        if !(self.c_norm > T::zero()) || !self.c_norm.is_finite() {
            return bad("normalization must be positive");
        }
        match self.variant {
            KernelVariant::Noncompact { alpha, d, c_prime, char_rate } => {
                if !(d > T::zero()) || !(alpha > T::zero()) || alpha > d {
                    return bad("noncompact kernel needs 0 < α ≤ d");
                }
                if !(c_prime > T::zero()) || !(char_rate >= T::zero()) {
                    return bad("noncompact kernel needs c' > 0 and rate ≥ 0");
                }
            }
            KernelVariant::Compact { alpha, d, diameter } => {
                if !(d > T::zero()) || !(alpha > T::zero()) || !(alpha < d) {
                    return bad("compact kernel needs 0 < α < d");
                }
                if !(diameter > T::zero()) {
                    return bad("diameter must be positive");
                }
            }
            KernelVariant::EuclideanBessel { alpha, d, c } => {
                if !(alpha > T::zero()) || d == 0 || !(c > T::zero()) {
                    return bad("Bessel kernel needs α > 0, d ≥ 1 and c > 0");
                }
            }
        }
        Ok(())
    }
}

/// Value of the kernel majorant at radius `r`.
pub fn eval_kernel_bound<T: Scalar>(kb: &KernelBound<T>, r: T) -> Result<T, KernelError> {
    kb.validate()?;
    if !(r > T::zero()) {
        return Err(KernelError::OutsideDomain { r: to_f64(r) });
    }
    let c = kb.c_norm;
    match kb.variant {
        KernelVariant::Noncompact { alpha, d, c_prime, char_rate } => {
            if r <= T::one() {
                if alpha == d {
                    Ok(c * (-r.ln()))
                } else {
                    Ok(c * r.powf(alpha - d))
                }
            } else {
                Ok(c * ((char_rate / cst(2.0) - c_prime) * r).exp())
            }
        }
        KernelVariant::Compact { alpha, d, diameter } => {
            if r > diameter {
                Err(KernelError::OutsideDomain { r: to_f64(r) })
            } else {
                Ok(c * r.powf(alpha - d))
            }
        }
        KernelVariant::EuclideanBessel { alpha, d, c: mass } => {
            Ok(c * eval_bessel_euclidean(alpha, cst(d as f64), mass, r, cst(1e-10))?)
        }
    }
}

/// Euclidean Bessel potential kernel `G_α^c(r)` by the subordination integral
/// with `C(α) = 1/Γ(α/2)`.
pub fn eval_bessel_euclidean<T: Scalar>(alpha: T, d: T, c: T, r: T, tol: T) -> Result<T, KernelError> {
    if !(alpha > T::zero()) || !(c > T::zero()) || !(r > T::zero()) || !(d > T::zero()) {
        return Err(KernelError::Parameter("Bessel kernel needs α, c, r, d > 0".into()));
    }
    let half = cst::<T>(0.5);
    let power = alpha * half - T::one() - d * half;
    let ln_norm = -(d * half) * (cst::<T>(4.0) * T::PI()).ln() - cst::<T>(statrs::function::gamma::ln_gamma(to_f64(alpha * half)));
    let r2 = r * r / cst(4.0);
    let ln_f = move |t: T| power * t.ln() - c * t - r2 / t + ln_norm;
    // Split at the peak; below it substitute t = 1/u so the e^{-r²/4t} decay
    // becomes an exponential tail.
    let t0 = (power + (power * power + cst::<T>(4.0) * c * r2).sqrt()) / (cst::<T>(2.0) * c);
    let upper = Integrand::new(move |t: T| ln_f(t).exp()).with_infinity_hint(InfClass::new(-c, power));
    let lower = Integrand::new(move |u: T| (ln_f(u.recip()) - cst::<T>(2.0) * u.ln()).exp())
        .with_infinity_hint(InfClass::new(-r2, -power - cst(2.0)));
    let mut total = T::zero();
    for v in [integrate(&upper, t0, T::infinity(), tol)?.value, integrate(&lower, t0.recip(), T::infinity(), tol)?.value] {
        match v {
            QuadValue::Finite(v) => total = total + v,
            QuadValue::Divergent(end) => return Err(KernelError::Quadrature(QuadError::Divergent { end })),
        }
    }
    Ok(total)
}

/// Exponential rates of the modular function and the character along `|x|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRates<T> {
    pub modular_rate: T,
    pub char_rate: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailVerdict<T> {
    pub verdict: Integrability,
    /// `ln ∫_{2^k}^{2^{k+1}} (e^{-λ r})^{1} S(r) dr` for `k = 0, 1, ...`.
    pub ln_shells: Vec<T>,
    /// Whether the trend of the shell sums agrees with the verdict.
    pub numeric_agrees: bool,
}

/// Integrability of `(δ^a χ^s e^{-c'|x|})^{r}` outside the unit ball.
///
/// With `δ ≈ e^{ρ_δ r}` and `χ ≈ e^{ρ_χ r}` the integrand is `e^{-λ r}` with
/// `λ = r (c' - a ρ_δ - s ρ_χ)`, integrable against `S` iff `λ > κ`.
pub fn tail_integrability<T: Scalar>(
    a: T,
    s: T,
    c_prime: T,
    r_exp: T,
    rates: &TailRates<T>,
    space: &PolarSpace<T>,
) -> Result<TailVerdict<T>, KernelError> {
    let lambda = r_exp * (c_prime - a * rates.modular_rate - s * rates.char_rate);
    let class = InfClass::new(-lambda, T::zero()).mul(space.inf_class());
    let verdict = class.integrability();
    let ln_shells = shell_sums(lambda, space, 12)?;
    let n = ln_shells.len();
    let last = ln_shells[n - 1] - ln_shells[n - 2];
    let numeric_converges = last < -T::one() || ln_shells[n - 1] == T::neg_infinity();
    Ok(TailVerdict { verdict, ln_shells, numeric_agrees: numeric_converges == verdict.converges() })
}

/// Log shell integrals `ln ∫_{2^k}^{2^{k+1}} e^{-λ r} S(r) dr`, `k = 0..shells`.
pub fn shell_sums<T: Scalar>(lambda: T, space: &PolarSpace<T>, shells: usize) -> Result<Vec<T>, KernelError> {
    let mut out = Vec::with_capacity(shells);
    let g = |r: T| -lambda * r + space.ln_density(r);
    for k in 0..shells {
        let lo = cst::<T>(2.0).powi(k as i32);
        let hi = lo * cst(2.0);
        let m = (0..=16)
            .map(|i| g(lo + (hi - lo) * cst::<T>(i as f64 / 16.0)))
            .fold(T::neg_infinity(), T::max);
        let f = Integrand::new(move |r: T| (g(r) - m).exp());
        let v = integrate(&f, lo, hi, cst(1e-10))?.value.finite().unwrap_or(T::infinity());
        out.push(m + v.ln());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YoungReport<T> {
    pub lhs: T,
    pub rhs: T,
    pub pass: bool,
}

fn lattice_norm<T: Scalar>(v: &[T], p: T) -> T {
    v.iter().map(|x| x.abs().powf(p)).sum::<T>().powf(p.recip())
}

/// Discrete convolution on the integer lattice.
pub fn convolve<T: Scalar>(f: &[T], g: &[T]) -> Vec<T> {
    if f.is_empty() || g.is_empty() {
        return vec![];
    }
    let mut out = vec![T::zero(); f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        if a == T::zero() {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = out[i + j] + a * b;
        }
    }
    out
}

/// `‖f∗g‖_q ≤ ‖f‖_p ‖ǧ‖_r^{r/p'} ‖g‖_r^{r/q}` for `1/p + 1/r = 1 + 1/q`.
pub fn young_check<T: Scalar>(f: &[T], g: &[T], p: T, q: T, r: T) -> Result<YoungReport<T>, KernelError> {
    if !(p > T::one()) || !(q >= p) || !q.is_finite() || !(r >= T::one()) {
        return Err(KernelError::Exponent(format!("need 1 < p ≤ q < ∞ and r ≥ 1, got p={p}, q={q}, r={r}")));
    }
    let gap = p.recip() + r.recip() - T::one() - q.recip();
    if gap.abs() > cst(1e-12) {
        return Err(KernelError::Exponent(format!("1/p + 1/r - 1 - 1/q = {gap}")));
    }
    if f.iter().chain(g).any(|x| !(*x >= T::zero()) || !x.is_finite()) {
        return Err(KernelError::Parameter("sequences must be finite and nonnegative".into()));
    }
    let conv = convolve(f, g);
    let lhs = lattice_norm(&conv, q);
    let g_check: Vec<T> = g.iter().rev().copied().collect();
    let pc = p / (p - T::one());
    let rhs = lattice_norm(f, p) * lattice_norm(&g_check, r).powf(r / pc) * lattice_norm(g, r).powf(r / q);
    Ok(YoungReport { lhs, rhs, pass: lhs <= rhs * (T::one() + cst(1e-12)) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let k = KernelBound::<f64>::new(KernelVariant::Compact { alpha: 1.0, d: 3.0, diameter: 3.0 });
        assert!((eval_kernel_bound(&k, 0.5).unwrap() - 4.0).abs() < 1e-14);
        let k = KernelBound::new(KernelVariant::Noncompact { alpha: 2.0, d: 2.0, c_prime: 1.0, char_rate: 0.0 });
        assert!((eval_kernel_bound(&k, 0.5).unwrap() - 2f64.ln()).abs() < 1e-14);
        let k = KernelBound::new(KernelVariant::Noncompact { alpha: 1.0, d: 2.0, c_prime: 2.0, char_rate: 0.0 });
        assert!((eval_kernel_bound(&k, 2.0).unwrap() - (-4f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn compact_outside_domain() {
        let k = KernelBound::<f64>::compact(0.5, 1.0);
        assert!(matches!(eval_kernel_bound(&k, 4.0), Err(KernelError::OutsideDomain { .. })));
    }

    #[test]
    fn young_small_cases() {
        let r = young_check::<f64>(&[1.0], &[1.0], 2.0, 2.0, 1.0).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15 && (r.rhs - 1.0).abs() < 1e-15 && r.pass);
        let r = young_check(&[1.0, 1.0], &[1.0, 1.0], 2.0, 2.0, 1.0).unwrap();
        assert!((r.lhs - 6f64.sqrt()).abs() < 1e-14);
        assert!((r.rhs - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(young_check(&[1.0], &[1.0], 2.0, 3.0, 1.0).is_err());
    }
}
