//! Endpoint asymptotic classes of radial functions.
//!
//! Near zero a function is described by `r^power * L^log * (ln L)^loglog`
//! with `L = log(e + 1/r)`; near infinity by `e^{rate r} * r^power * (ln r)^log`.
//! The classes are closed under products, real powers and (when the result is
//! representable) integration, which is what the divergence verdicts need.

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Sign of an exponent, with a dead zone that absorbs rounding in exponent
/// arithmetic (e.g. `(p-1)(1-p')` should be exactly `-1`).
pub fn exponent_sign<T: Scalar>(x: T) -> i8 {
    let eps = T::epsilon().sqrt() * crate::cst(0.01);
    if x > eps {
        1
    } else if x < -eps {
        -1
    } else {
        0
    }
}

fn lex_sign(signs: [i8; 3]) -> i8 {
    signs.into_iter().find(|&s| s != 0).unwrap_or(0)
}

/// Integrability of a function at one endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrability {
    Converges,
    Diverges,
    /// Power part is critical, decided by the logarithmic factor.
    BorderlineConverges,
    BorderlineDiverges,
}

impl Integrability {
    pub fn converges(self) -> bool {
        matches!(self, Integrability::Converges | Integrability::BorderlineConverges)
    }
}

/// Limit behaviour of a class at its endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Limit {
    Zero,
    Finite,
    Infinite,
}

fn limit_from(s: i8) -> Limit {
    match s {
        1 => Limit::Infinite,
        -1 => Limit::Zero,
        _ => Limit::Finite,
    }
}

/// Class near `r = 0`: `r^power * L^log * (ln L)^loglog`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroClass<T> {
    pub power: T,
    pub log: T,
    pub loglog: T,
}

impl<T: Scalar> ZeroClass<T> {
    pub fn new(power: T, log: T) -> Self {
        ZeroClass { power, log, loglog: T::zero() }
    }

    pub fn constant() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn mul(self, o: Self) -> Self {
        ZeroClass {
            power: self.power + o.power,
            log: self.log + o.log,
            loglog: self.loglog + o.loglog,
        }
    }

    pub fn powf(self, t: T) -> Self {
        ZeroClass { power: self.power * t, log: self.log * t, loglog: self.loglog * t }
    }

    pub fn integrability(&self) -> Integrability {
        match exponent_sign(self.power + T::one()) {
            1 => Integrability::Converges,
            -1 => Integrability::Diverges,
            _ => match lex_sign([exponent_sign(self.log + T::one()), exponent_sign(self.loglog + T::one()), 1]) {
                -1 => Integrability::BorderlineConverges,
                _ => Integrability::BorderlineDiverges,
            },
        }
    }

    /// Class of `r -> ∫_0^r f` when `f` is integrable at zero.
    pub fn primitive(&self) -> Option<Self> {
        let k = self.power + T::one();
        match exponent_sign(k) {
            1 => Some(ZeroClass { power: k, ..*self }),
            -1 => None,
            _ => match exponent_sign(self.log + T::one()) {
                -1 => Some(ZeroClass { power: T::zero(), log: self.log + T::one(), loglog: self.loglog }),
                1 => None,
                _ if exponent_sign(self.loglog + T::one()) < 0 => {
                    Some(ZeroClass { power: T::zero(), log: T::zero(), loglog: self.loglog + T::one() })
                }
                _ => None,
            },
        }
    }

    /// Class of `r -> ∫_r^1 f` when `f` is not integrable at zero.
    pub fn growth(&self) -> Option<Self> {
        let k = self.power + T::one();
        match exponent_sign(k) {
            -1 => Some(ZeroClass { power: k, ..*self }),
            1 => None,
            _ => match exponent_sign(self.log + T::one()) {
                1 => Some(ZeroClass { power: T::zero(), log: self.log + T::one(), loglog: self.loglog }),
                -1 => None,
                _ if exponent_sign(self.loglog + T::one()) > 0 => {
                    Some(ZeroClass { power: T::zero(), log: T::zero(), loglog: self.loglog + T::one() })
                }
                _ => None,
            },
        }
    }

    /// Class of `r -> ∫_r^c f` for a fixed `c`: constant when integrable,
    /// otherwise the growth class.
    pub fn upper_integral(&self) -> Option<Self> {
        if self.integrability().converges() {
            Some(Self::constant())
        } else {
            self.growth()
        }
    }

    pub fn limit(&self) -> Limit {
        limit_from(lex_sign([
            -exponent_sign(self.power),
            exponent_sign(self.log),
            exponent_sign(self.loglog),
        ]))
    }
}

/// Class near infinity: `e^{rate r} * r^power * (ln r)^log`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfClass<T> {
    pub rate: T,
    pub power: T,
    pub log: T,
}

impl<T: Scalar> InfClass<T> {
    pub fn new(rate: T, power: T) -> Self {
        InfClass { rate, power, log: T::zero() }
    }

    pub fn constant() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn mul(self, o: Self) -> Self {
        InfClass { rate: self.rate + o.rate, power: self.power + o.power, log: self.log + o.log }
    }

    pub fn powf(self, t: T) -> Self {
        InfClass { rate: self.rate * t, power: self.power * t, log: self.log * t }
    }

    pub fn integrability(&self) -> Integrability {
        match exponent_sign(self.rate) {
            -1 => Integrability::Converges,
            1 => Integrability::Diverges,
            _ => match exponent_sign(self.power + T::one()) {
                -1 => Integrability::Converges,
                1 => Integrability::Diverges,
                _ if exponent_sign(self.log + T::one()) < 0 => Integrability::BorderlineConverges,
                _ => Integrability::BorderlineDiverges,
            },
        }
    }

    /// Class of `R -> ∫_R^∞ f` when `f` is integrable at infinity.
    pub fn tail(&self) -> Option<Self> {
        match exponent_sign(self.rate) {
            -1 => Some(*self),
            1 => None,
            _ => match exponent_sign(self.power + T::one()) {
                -1 => Some(InfClass { power: self.power + T::one(), ..*self }),
                1 => None,
                _ if exponent_sign(self.log + T::one()) < 0 => {
                    Some(InfClass { rate: T::zero(), power: T::zero(), log: self.log + T::one() })
                }
                _ => None,
            },
        }
    }

    /// Class of `R -> ∫_1^R f` when `f` is not integrable at infinity.
    pub fn growth(&self) -> Option<Self> {
        match exponent_sign(self.rate) {
            1 => Some(*self),
            -1 => None,
            _ => match exponent_sign(self.power + T::one()) {
                1 => Some(InfClass { power: self.power + T::one(), ..*self }),
                -1 => None,
                _ if exponent_sign(self.log + T::one()) > 0 => {
                    Some(InfClass { rate: T::zero(), power: T::zero(), log: self.log + T::one() })
                }
                _ => None,
            },
        }
    }

    /// Class of `R -> ∫_c^R f`: constant when integrable, else the growth class.
    pub fn lower_integral(&self) -> Option<Self> {
        if self.integrability().converges() {
            Some(Self::constant())
        } else {
            self.growth()
        }
    }

    pub fn limit(&self) -> Limit {
        limit_from(lex_sign([
            exponent_sign(self.rate),
            exponent_sign(self.power),
            exponent_sign(self.log),
        ]))
    }
}
