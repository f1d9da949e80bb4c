//! SI and geometric (G = c = 1, lengths in metres) unit handling.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const G_SI: f64 = 6.674_30e-11;
pub const C_SI: f64 = 299_792_458.0;
/// Heliocentric gravitational constant GM_sun in m^3 s^-2.
pub const GM_SUN_SI: f64 = 1.327_124_400_18e20;
pub const M_SUN_KG: f64 = GM_SUN_SI / G_SI;
/// Solar mass as a length, GM_sun / c^2.
pub const M_SUN_GEOMETRIC: f64 = GM_SUN_SI / (C_SI * C_SI);
pub const AU_M: f64 = 1.495_978_707e11;
pub const DAY_S: f64 = 86_400.0;
pub const YEAR_S: f64 = 365.25 * DAY_S;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimension {
    Mass,
    Length,
    Time,
    Dimensionless,
}

/// A number with an explicit unit, e.g. `1.4 Msun`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: &str) -> Self {
        Self {
            value,
            unit: unit.to_string(),
        }
    }

    /// Parse `"<number><unit>"` with optional whitespace.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let split = text
            .char_indices()
            .find(|&(i, ch)| ch.is_ascii_alphabetic() && !is_exponent_marker(text, i))
            .map(|(i, _)| i)
            .unwrap_or(text.len());
        let (num, unit) = text.split_at(split);
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("cannot parse quantity '{text}'")))?;
        Ok(Self {
            value,
            unit: unit.trim().to_string(),
        })
    }

    /// Value in geometric units (metres for mass, length and time).
    pub fn to_geometric(&self, dim: Dimension) -> Result<f64> {
        if !self.value.is_finite() {
            return Err(Error::NonFinite(format!("quantity {} {}", self.value, self.unit)));
        }
        Ok(self.value * factor(dim, &self.unit)?)
    }

    /// Value in SI (kg, m, s).
    pub fn to_si(&self, dim: Dimension) -> Result<f64> {
        let g = self.to_geometric(dim)?;
        Ok(g / factor(dim, si_unit(dim))?)
    }
}

fn is_exponent_marker(text: &str, i: usize) -> bool {
    let bytes = text.as_bytes();
    let ch = bytes[i] as char;
    if ch != 'e' && ch != 'E' {
        return false;
    }
    let prev_digit = i > 0 && (bytes[i - 1] as char).is_ascii_digit() || i > 0 && bytes[i - 1] == b'.';
    let next_ok = bytes
        .get(i + 1)
        .map(|&b| (b as char).is_ascii_digit() || b == b'-' || b == b'+')
        .unwrap_or(false);
    prev_digit && next_ok
}

fn si_unit(dim: Dimension) -> &'static str {
    match dim {
        Dimension::Mass => "kg",
        Dimension::Length => "m",
        Dimension::Time => "s",
        Dimension::Dimensionless => "",
    }
}

/// Multiplier taking a value in `unit` to geometric metres.
pub fn factor(dim: Dimension, unit: &str) -> Result<f64> {
    let f = match (dim, unit) {
        (Dimension::Mass, "kg") => G_SI / (C_SI * C_SI),
        (Dimension::Mass, "Msun") => M_SUN_GEOMETRIC,
        (Dimension::Mass, "m") => 1.0,
        (Dimension::Length, "m") => 1.0,
        (Dimension::Length, "km") => 1e3,
        (Dimension::Length, "AU") => AU_M,
        (Dimension::Length, "Msun") => M_SUN_GEOMETRIC,
        (Dimension::Time, "s") => C_SI,
        (Dimension::Time, "day") => DAY_S * C_SI,
        (Dimension::Time, "yr") => YEAR_S * C_SI,
        (Dimension::Time, "m") => 1.0,
        (Dimension::Dimensionless, "" | "1") => 1.0,
        _ => return Err(Error::UnknownUnit(format!("{unit} (for {dim:?})"))),
    };
    Ok(f)
}

pub fn kg_to_geometric(kg: f64) -> f64 {
    kg * G_SI / (C_SI * C_SI)
}

pub fn geometric_to_kg(m: f64) -> f64 {
    m * C_SI * C_SI / G_SI
}

pub fn seconds_to_geometric(s: f64) -> f64 {
    s * C_SI
}

pub fn geometric_to_seconds(m: f64) -> f64 {
    m / C_SI
}
