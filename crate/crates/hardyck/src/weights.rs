//! Radial weights `scale · r^a · (log(e + 1/r))^b · e^{κ r}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use crate::asymptotics::Integrability;
use crate::asymptotics::{InfClass, ZeroClass};
use crate::polar_space::PolarSpace;
use crate::quadrature::End;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightExpr<T> {
    /// Exponent of `r`.
    pub power: T,
    /// Exponent of `log(e + 1/r)`.
    pub logplus: T,
    /// Rate of `e^{κ r}`.
    pub exprate: T,
    pub scale: T,
}

impl<T: Scalar> Default for WeightExpr<T> {
    fn default() -> Self {
        Self::one()
    }
}

impl<T: Scalar> WeightExpr<T> {
    pub fn new(power: T, logplus: T, exprate: T, scale: T) -> Self {
        WeightExpr { power, logplus, exprate, scale }
    }

    pub fn one() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    pub fn power(a: T) -> Self {
        Self::new(a, T::zero(), T::zero(), T::one())
    }

    pub fn exponential(k: T) -> Self {
        Self::new(T::zero(), T::zero(), k, T::one())
    }

    pub fn logplus(b: T) -> Self {
        Self::new(T::zero(), b, T::zero(), T::one())
    }

    pub fn scaled(mut self, s: T) -> Self {
        self.scale = self.scale * s;
        self
    }

    /// Pointwise product.
    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.power + o.power, self.logplus + o.logplus, self.exprate + o.exprate, self.scale * o.scale)
    }

    pub fn eval(&self, r: T) -> T {
        let v = self.ln_eval(r).exp();
        if !v.is_nan() {
            return v;
        }
        let mut v = self.scale;
        if self.power != T::zero() {
            v = v * r.powf(self.power);
        }
        if self.logplus != T::zero() {
            v = v * log_e_plus(r).powf(self.logplus);
        }
        if self.exprate != T::zero() {
            v = v * (self.exprate * r).exp();
        }
        v
    }

    /// `ln` of [`eval`](Self::eval), without intermediate overflow.
    pub fn ln_eval(&self, r: T) -> T {
        let mut v = self.scale.ln();
        if self.power != T::zero() {
            v = v + self.power * r.ln();
        }
        if self.logplus != T::zero() {
            v = v + self.logplus * log_e_plus(r).ln();
        }
        if self.exprate != T::zero() {
            v = v + self.exprate * r;
        }
        v
    }

    /// `w^t`: every exponent is multiplied by `t`, the scale raised to `t`.
    pub fn power_transform(&self, t: T) -> Self {
        Self::new(self.power * t, self.logplus * t, self.exprate * t, self.scale.powf(t))
    }

    pub fn zero_class(&self) -> ZeroClass<T> {
        ZeroClass::new(self.power, self.logplus)
    }

    pub fn inf_class(&self) -> InfClass<T> {
        InfClass::new(self.exprate, self.power)
    }

    /// Integrability of `w · S` at one end of `(0, ∞)`.
    pub fn integrability_class(&self, space: &PolarSpace<T>, end: End) -> Integrability {
        match end {
            End::Zero => self.zero_class().mul(space.zero_class()).integrability(),
            End::Infinity => self.inf_class().mul(space.inf_class()).integrability(),
        }
    }
}

/// `log(e + 1/r)`, computed without overflow for tiny `r`.
pub fn log_e_plus<T: Scalar>(r: T) -> T {
    let e = T::E();
    let inv = r.recip();
    if inv.is_infinite() || inv > crate::cst(1e15) {
        // log(1/r) + log(1 + e r)
        -r.ln() + (e * r).ln_1p()
    } else {
        (e + inv).ln()
    }
}

pub fn integrability_class<T: Scalar>(w: &WeightExpr<T>, space: &PolarSpace<T>, end: End) -> Integrability {
    w.integrability_class(space, end)
}

impl<T: Scalar> fmt::Display for WeightExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r^{} * loge(1/r)^{} * exp({}*r) * {}", self.power, self.logplus, self.exprate, self.scale)
    }
}

/// Parse failure with a 1-based column into the weight string.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct WeightParseError {
    pub column: usize,
    pub message: String,
}

struct Parser<'s> {
    src: &'s [u8],
    pos: usize,
}

impl<'s> Parser<'s> {
    fn err<R>(&self, msg: impl Into<String>) -> Result<R, WeightParseError> {
        Err(WeightParseError { column: self.pos + 1, message: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), WeightParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn number<T: Scalar>(&mut self) -> Result<T, WeightParseError> {
        self.skip_ws();
        let start = self.pos;
        let b = self.src;
        let mut i = self.pos;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let digits_start = i;
        while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
            i += 1;
        }
        if i == digits_start {
            return self.err("expected a number");
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                j += 1;
            }
            let exp_digits = j;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            if j > exp_digits {
                i = j;
            }
        }
        let text = std::str::from_utf8(&b[start..i]).unwrap_or("");
        match text.parse::<T>() {
            Ok(v) if v.is_finite() => {
                self.pos = i;
                Ok(v)
            }
            _ => self.err(format!("invalid number `{text}`")),
        }
    }

    fn exponent<T: Scalar>(&mut self) -> Result<T, WeightParseError> {
        if self.eat("(") {
            let v = self.number()?;
            self.expect(")")?;
            Ok(v)
        } else {
            self.number()
        }
    }

    fn factor<T: Scalar>(&mut self, w: &mut WeightExpr<T>) -> Result<(), WeightParseError> {
        match self.peek() {
            None => self.err("expected a factor"),
            Some(b'r') => {
                self.pos += 1;
                let a = if self.eat("^") { self.exponent()? } else { T::one() };
                w.power = w.power + a;
                Ok(())
            }
            Some(b'l') => {
                self.expect("loge")?;
                self.expect("(")?;
                self.expect("1")?;
                self.expect("/")?;
                self.expect("r")?;
                self.expect(")")?;
                let b = if self.eat("^") { self.exponent()? } else { T::one() };
                w.logplus = w.logplus + b;
                Ok(())
            }
            Some(b'e') => {
                self.expect("exp")?;
                self.expect("(")?;
                let k = if self.eat("-r") {
                    -T::one()
                } else if self.eat("r") {
                    T::one()
                } else {
                    let k = self.number()?;
                    self.expect("*")?;
                    self.expect("r")?;
                    k
                };
                self.expect(")")?;
                w.exprate = w.exprate + k;
                Ok(())
            }
            Some(c) if c.is_ascii_digit() || c == b'.' || c == b'+' || c == b'-' => {
                let at = self.pos;
                let s: T = self.number()?;
                if !(s > T::zero()) {
                    self.pos = at;
                    return self.err("scale must be positive");
                }
                w.scale = w.scale * s;
                Ok(())
            }
            Some(c) => self.err(format!("unexpected character `{}`", c as char)),
        }
    }
}

/// Parses `r^a * loge(1/r)^b * exp(k*r) * s`. Factors may appear in any order,
/// may repeat (exponents add), and may be omitted.
pub fn parse_weight<T: Scalar>(s: &str) -> Result<WeightExpr<T>, WeightParseError> {
    let mut p = Parser { src: s.as_bytes(), pos: 0 };
    let mut w = WeightExpr::one();
    p.factor(&mut w)?;
    loop {
        match p.peek() {
            None => return Ok(w),
            Some(b'*') => {
                p.pos += 1;
                p.factor(&mut w)?;
            }
            Some(_) => return p.err("expected `*` or end of weight"),
        }
    }
}

impl<T: Scalar> FromStr for WeightExpr<T> {
    type Err = WeightParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_weight(s)
    }
}

impl<T: Scalar> Serialize for WeightExpr<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de, T: Scalar> Deserialize<'de> for WeightExpr<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_weight(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_variants() {
        let w: WeightExpr<f64> = "r^-2".parse().unwrap();
        assert_eq!(w, WeightExpr::power(-2.0));
        let w: WeightExpr<f64> = "exp(-r) * 3 * r".parse().unwrap();
        assert_eq!(w, WeightExpr::new(1.0, 0.0, -1.0, 3.0));
        let w: WeightExpr<f64> = "loge(1/r)^(-3) * r^-1".parse().unwrap();
        assert_eq!(w, WeightExpr::new(-1.0, -3.0, 0.0, 1.0));
        let w: WeightExpr<f64> = "exp(2.5*r)".parse().unwrap();
        assert_eq!(w.exprate, 2.5);
        let w: WeightExpr<f64> = "1".parse().unwrap();
        assert_eq!(w, WeightExpr::one());
    }

    #[test]
    fn parse_errors_carry_column() {
        let e = "r^2 * q".parse::<WeightExpr<f64>>().unwrap_err();
        assert_eq!(e.column, 7);
        let e = "r^ * 2".parse::<WeightExpr<f64>>().unwrap_err();
        assert_eq!(e.column, 4);
        let e = "r^2 r".parse::<WeightExpr<f64>>().unwrap_err();
        assert_eq!(e.column, 5);
        let e = "-2".parse::<WeightExpr<f64>>().unwrap_err();
        assert_eq!(e.column, 1);
        assert!("".parse::<WeightExpr<f64>>().is_err());
    }

    #[test]
    fn log_atom_far_from_origin() {
        let w = WeightExpr::<f64>::logplus(1.0);
        assert!((w.eval(1e12) - 1.0).abs() < 1e-11);
        assert!((log_e_plus(1e-300_f64) - (1e300_f64).ln()).abs() < 1e-12);
    }
}
