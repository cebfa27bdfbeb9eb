//! Model spaces described by their radial surface density `S(r)`.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{InfClass, ZeroClass};
use crate::quadrature::{integrate, Integrand};
use crate::{cst, to_f64, Scalar};

/// Closed form of the surface density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Density<T> {
    /// `σ r^{d-1}`
    Euclidean { d: T },
    /// `σ r^{Q-1}`
    Homogeneous { q: T },
    /// `σ sinh(r)^{n-1}`
    Hyperbolic { n: T },
    /// `σ r^{d-1}` on `(0,1]`, `σ e^{κ(r-1)}` beyond.
    LocalGlobal { d: T, kappa: T },
}

/// A metric measure space reduced to its radial density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarSpace<T> {
    pub name: String,
    pub density: Density<T>,
    /// Sphere constant `σ`.
    pub sigma: T,
}

/// Surface area of the unit sphere in `R^d`, `2 π^{d/2} / Γ(d/2)`.
pub fn unit_sphere_area<T: Scalar>(d: T) -> T {
    let d = to_f64(d);
    cst(2.0 * std::f64::consts::PI.powf(d / 2.0) / statrs::function::gamma::gamma(d / 2.0))
}

impl<T: Scalar> PolarSpace<T> {
    pub fn euclidean(d: T) -> Self {
        PolarSpace { name: format!("euclidean{}", d), density: Density::Euclidean { d }, sigma: unit_sphere_area(d) }
    }

    /// `(0, ∞)` with Lebesgue measure: `S ≡ 1`.
    pub fn half_line() -> Self {
        PolarSpace { name: "half_line".into(), density: Density::Euclidean { d: T::one() }, sigma: T::one() }
    }

    pub fn homogeneous(q: T, sigma: T) -> Self {
        PolarSpace { name: format!("homogeneous{}", q), density: Density::Homogeneous { q }, sigma }
    }

    pub fn hyperbolic(n: T) -> Self {
        PolarSpace { name: format!("hyperbolic{}", n), density: Density::Hyperbolic { n }, sigma: unit_sphere_area(n) }
    }

    pub fn local_global(d: T, kappa: T) -> Self {
        PolarSpace {
            name: format!("local_global{}_{}", d, kappa),
            density: Density::LocalGlobal { d, kappa },
            sigma: unit_sphere_area(d),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_sigma(mut self, sigma: T) -> Self {
        self.sigma = sigma;
        self
    }

    /// Local dimension `d`: `V(r) ≈ r^d` on `(0, 1]`.
    pub fn local_dim(&self) -> T {
        match self.density {
            Density::Euclidean { d } => d,
            Density::Homogeneous { q } => q,
            Density::Hyperbolic { n } => n,
            Density::LocalGlobal { d, .. } => d,
        }
    }

    /// Exponential growth rate `D` of `V(r)` for large `r` (zero for
    /// polynomial growth).
    pub fn global_rate(&self) -> T {
        match self.density {
            Density::Euclidean { .. } | Density::Homogeneous { .. } => T::zero(),
            Density::Hyperbolic { n } => n - T::one(),
            Density::LocalGlobal { kappa, .. } => kappa,
        }
    }

    /// `ln S(r)`, stable for very small and very large `r`.
    pub fn ln_density(&self, r: T) -> T {
        let one = T::one();
        let ls = self.sigma.ln();
        match self.density {
            Density::Euclidean { d } => ls + (d - one) * r.ln(),
            Density::Homogeneous { q } => ls + (q - one) * r.ln(),
            Density::Hyperbolic { n } => {
                let lsinh = if r > cst(20.0) {
                    r - cst::<T>(2.0).ln() + (-(-(cst::<T>(2.0) * r)).exp()).ln_1p()
                } else {
                    r.sinh().ln()
                };
                ls + (n - one) * lsinh
            }
            Density::LocalGlobal { d, kappa } => {
                if r <= one {
                    ls + (d - one) * r.ln()
                } else {
                    ls + kappa * (r - one)
                }
            }
        }
    }

    /// Surface density `S(r)`.
    pub fn density(&self, r: T) -> T {
        let one = T::one();
        match self.density {
            Density::Euclidean { d } => self.sigma * r.powf(d - one),
            Density::Homogeneous { q } => self.sigma * r.powf(q - one),
            Density::Hyperbolic { n } => {
                if r > cst(20.0) {
                    self.ln_density(r).exp()
                } else {
                    self.sigma * r.sinh().powf(n - one)
                }
            }
            Density::LocalGlobal { d, kappa } => {
                if r <= one {
                    self.sigma * r.powf(d - one)
                } else {
                    self.sigma * (kappa * (r - one)).exp()
                }
            }
        }
    }

    /// Ball volume `V(r) = ∫_0^r S`.
    pub fn volume(&self, r: T) -> T {
        let one = T::one();
        let s = self.sigma;
        match self.density {
            Density::Euclidean { d } => s * r.powf(d) / d,
            Density::Homogeneous { q } => s * r.powf(q) / q,
            Density::LocalGlobal { d, kappa } => {
                if r <= one {
                    s * r.powf(d) / d
                } else if kappa == T::zero() {
                    s / d + s * (r - one)
                } else {
                    s / d + s * ((kappa * (r - one)).exp() - one) / kappa
                }
            }
            Density::Hyperbolic { n } => {
                let two = cst::<T>(2.0);
                if n == one {
                    s * r
                } else if n == two {
                    s * (r.cosh() - one)
                } else if n == cst(3.0) {
                    s * ((two * r).sinh() / cst(4.0) - r / two)
                } else {
                    let f = Integrand::new(|x: T| self.density(x)).with_zero_hint(self.zero_class());
                    integrate(&f, T::zero(), r, cst(1e-12))
                        .ok()
                        .and_then(|q| q.finite())
                        .unwrap_or(T::nan())
                }
            }
        }
    }

    /// Asymptotic class of `S` at zero.
    pub fn zero_class(&self) -> ZeroClass<T> {
        ZeroClass::new(self.local_dim() - T::one(), T::zero())
    }

    /// Asymptotic class of `S` at infinity.
    pub fn inf_class(&self) -> InfClass<T> {
        match self.density {
            Density::Euclidean { d } => InfClass::new(T::zero(), d - T::one()),
            Density::Homogeneous { q } => InfClass::new(T::zero(), q - T::one()),
            Density::Hyperbolic { n } => InfClass::new(n - T::one(), T::zero()),
            Density::LocalGlobal { kappa, .. } => InfClass::new(kappa, T::zero()),
        }
    }
}

/// Radial envelope `e^{s · rate · r}` of a power of a positive character.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterSurrogate<T> {
    pub rate: T,
    pub exponent: T,
}

impl<T: Scalar> CharacterSurrogate<T> {
    pub fn new(rate: T, exponent: T) -> Self {
        CharacterSurrogate { rate, exponent }
    }

    pub fn factor(&self, r: T) -> T {
        character_factor(self, r)
    }
}

pub fn character_factor<T: Scalar>(cs: &CharacterSurrogate<T>, r: T) -> T {
    (cs.exponent * cs.rate * r).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_constants() {
        assert!((unit_sphere_area(1.0_f64) - 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(2.0_f64) - 2.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(3.0_f64) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn hyperbolic_log_density_matches_direct() {
        let h = PolarSpace::<f64>::hyperbolic(3.0);
        for &r in &[0.1, 1.0, 19.9, 20.1, 25.0] {
            let direct = h.sigma * (r as f64).sinh().powi(2);
            assert!((h.ln_density(r).exp() / direct - 1.0).abs() < 1e-12, "r = {r}");
        }
    }
}
