//! Seeded randomness.
//!
//! Each replication owns one [`SimRng`], a ChaCha8 stream keyed by a seed
//! derived from `(base_seed, replication_index)`. Every Gaussian draw uses the
//! Box-Muller transform on exactly two 64-bit outputs and discards the paired
//! variate, so the number of stream outputs consumed by a run depends only on
//! the scenario, never on the values drawn.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unit::UnitValue;

/// The random stream used throughout a replication.
pub type SimRng = ChaCha8Rng;

/// A normal distribution `N(mean, std²)`.
///
/// In scenario files a spec is written either as a bare number (a constant,
/// `std = 0`) or as a `[mean, std]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianRepr", into = "GaussianRepr")]
pub struct GaussianSpec {
    mean: f64,
    std: f64,
}

impl GaussianSpec {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !mean.is_finite() || !std.is_finite() {
            return Err(Error::NonFinite("gaussian spec"));
        }
        if std < 0.0 {
            return Err(Error::config(format!("standard deviation {std} is negative")));
        }
        Ok(GaussianSpec { mean, std })
    }

    /// Degenerate distribution at `value`.
    pub const fn constant(value: f64) -> Self {
        GaussianSpec { mean: value, std: 0.0 }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn is_zero(&self) -> bool {
        self.mean == 0.0 && self.std == 0.0
    }

    pub fn with_mean(self, mean: f64) -> Result<Self> {
        GaussianSpec::new(mean, self.std)
    }
}

impl fmt::Display for GaussianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N({}, {}²)", self.mean, self.std)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GaussianRepr {
    Constant(f64),
    Pair([f64; 2]),
}

impl TryFrom<GaussianRepr> for GaussianSpec {
    type Error = Error;

    fn try_from(repr: GaussianRepr) -> Result<Self> {
        match repr {
            GaussianRepr::Constant(x) => GaussianSpec::new(x, 0.0),
            GaussianRepr::Pair([m, s]) => GaussianSpec::new(m, s),
        }
    }
}

impl From<GaussianSpec> for GaussianRepr {
    fn from(g: GaussianSpec) -> Self {
        if g.std == 0.0 {
            GaussianRepr::Constant(g.mean)
        } else {
            GaussianRepr::Pair([g.mean, g.std])
        }
    }
}

/// Identifies one replication of a Monte Carlo ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub replication_index: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, replication_index: u64) -> Self {
        SeedSpec { base_seed, replication_index }
    }

    /// `splitmix64(base_seed ^ splitmix64(replication_index))`.
    ///
    /// This mixing function is part of the reproducibility contract; changing
    /// it changes every published trajectory.
    pub fn derived_seed(&self) -> u64 {
        splitmix64(self.base_seed ^ splitmix64(self.replication_index))
    }

    pub fn rng(&self) -> SimRng {
        SimRng::seed_from_u64(self.derived_seed())
    }
}

/// The SplitMix64 finalizer (Steele, Lea and Flood).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform on `(0, 1]` from one stream output (53 random bits).
#[inline]
fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One standard normal variate; consumes exactly two stream outputs.
#[inline]
pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    let u1 = open_unit(rng);
    let u2 = open_unit(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Draws `mean + std·z` and clamps to `[0, 1]`.
///
/// Clamping rather than rejection keeps the draw count fixed; it piles a
/// little probability mass onto 0 and 1 when the mean sits near a bound.
pub fn sample_truncated_gaussian(spec: GaussianSpec, rng: &mut impl RngCore) -> UnitValue {
    let z = standard_normal(rng);
    UnitValue::saturate(spec.mean + spec.std * z)
}
