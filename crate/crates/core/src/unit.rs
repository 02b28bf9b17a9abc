//! Values on the closed unit interval.
//!
//! Every mental and physical quantity in the model is a fraction. [`UnitValue`]
//! makes the range part of the type: the only ways to build one either clamp
//! ([`clamp_unit`]) or reject ([`UnitValue::new`]).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct UnitValue(f64);

impl UnitValue {
    pub const ZERO: UnitValue = UnitValue(0.0);
    pub const ONE: UnitValue = UnitValue(1.0);

    /// Accepts `x` only if it already lies in `[0, 1]`.
    pub fn new(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NonFinite("unit value"));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::data(format!("{x} is outside [0, 1]")));
        }
        Ok(UnitValue(x))
    }

    /// Clamps a value that is known to be finite. NaN maps to zero.
    #[inline]
    pub(crate) fn saturate(x: f64) -> Self {
        debug_assert!(x.is_finite(), "saturate({x})");
        UnitValue(if x >= 1.0 { 1.0 } else if x > 0.0 { x } else { 0.0 })
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `1 - self`.
    #[inline]
    pub fn complement(self) -> Self {
        UnitValue(1.0 - self.0)
    }
}

impl From<UnitValue> for f64 {
    fn from(u: UnitValue) -> f64 {
        u.0
    }
}

impl TryFrom<f64> for UnitValue {
    type Error = Error;

    fn try_from(x: f64) -> Result<Self> {
        UnitValue::new(x)
    }
}

impl fmt::Display for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Clamps `x` into `[0, 1]`.
///
/// Fails on NaN or infinite input, which always indicates a bug or a bad
/// parameter upstream.
pub fn clamp_unit(x: f64) -> Result<UnitValue> {
    if !x.is_finite() {
        return Err(Error::NonFinite("clamp_unit"));
    }
    Ok(UnitValue::saturate(x))
}

/// `Σ wᵢvᵢ / Σ wᵢ`, or `fallback` when the weights sum to zero.
///
/// This is the reference form of emotion diffusion: `values` are the
/// neighbours' fear levels and `weights` the empathy each neighbour carries.
pub fn empathy_weighted_mean(
    values: &[UnitValue],
    weights: &[f64],
    fallback: UnitValue,
) -> Result<UnitValue> {
    if values.len() != weights.len() {
        return Err(Error::config(format!(
            "empathy_weighted_mean: {} values but {} weights",
            values.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::config(format!("empathy weight {w} must be finite and >= 0")));
    }
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return Ok(fallback);
    }
    let weighted: f64 = values.iter().zip(weights).map(|(v, w)| v.get() * w).sum();
    clamp_unit(weighted / total)
}
