//! Serde form of an exponent p ∈ [1, ∞]: finite values as numbers, ∞ as the
//! string "inf".

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;

pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
    if p.is_infinite() && *p > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*p)
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(ExponentVisitor)
}

struct ExponentVisitor;

impl<'de> Visitor<'de> for ExponentVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or \"inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse(v).ok_or_else(|| E::custom(format!("invalid exponent {v:?}")))
    }
}

/// Parses "inf", "infinity", "∞" or a decimal number.
pub fn parse(v: &str) -> Option<f64> {
    match v.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Some(f64::INFINITY),
        other => other.parse().ok(),
    }
}

#[derive(Serialize, Deserialize)]
struct Wrapped(#[serde(with = "self")] f64);

pub mod vec {
    use super::Wrapped;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let w: Vec<Wrapped> = v.iter().map(|&p| Wrapped(p)).collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let w: Vec<Wrapped> = Vec::deserialize(d)?;
        Ok(w.into_iter().map(|w| w.0).collect())
    }
}
