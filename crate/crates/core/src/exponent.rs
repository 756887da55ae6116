//! Lebesgue exponents in `[1, ∞]`.

use core::fmt;

#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// An exponent `p ∈ [1, ∞]`. Serialized as a number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::invalid(
                "p",
                alloc::format!("exponent {p} is outside [1, inf]"),
            ));
        }
        Ok(Exponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_two(self) -> bool {
        self.0 == 2.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        struct ExponentVisitor;

        impl Visitor<'_> for ExponentVisitor {
            type Value = Exponent;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number >= 1 or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> core::result::Result<Exponent, E> {
                Exponent::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> core::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> core::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> core::result::Result<Exponent, E> {
                parse_exponent(v).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ExponentVisitor)
    }
}

/// Parses `"2"`, `"1.5"`, `"inf"`, `"infinity"` or `"∞"`.
pub fn parse_exponent(text: &str) -> Result<Exponent> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
        return Ok(Exponent::INFINITY);
    }
    let p: f64 = t
        .parse()
        .map_err(|_| Error::invalid("p", alloc::format!("cannot parse exponent `{t}`")))?;
    Exponent::new(p)
}

/// Weighted power mean `(Σ w |a|^p)^{1/p}`, or `max |a|` for `p = ∞`.
/// Rescales by the largest term so large or tiny magnitudes do not overflow.
pub(crate) fn weighted_power_sum<I>(values: I, weight: f64, p: Exponent) -> f64
where
    I: Iterator<Item = f64> + Clone,
{
    let max = values.clone().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 || p.is_infinite() {
        return max;
    }
    let p = p.value();
    let sum: f64 = values.map(|v| (v.abs() / max).powf(p)).sum();
    max * (weight * sum).powf(1.0 / p)
}
