//! Mass-media forcing.
//!
//! Each step the media deliver a fraction `n` of event-related coverage, of
//! which a fraction `n_pos` is positive in tone. Three profiles are provided:
//! constant coverage, a damped exponential for sudden events and a Gaussian
//! pulse for events that unfold gradually. Profile curves are evaluated at
//! `τ = t / t_scale` and clamped to `[0, 1]`; both shaped curves peak above 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::{sample_truncated_gaussian, GaussianSpec, SimRng};
use crate::unit::{clamp_unit, UnitValue};

/// Shape of the event-related coverage curve `N(τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MediaKind {
    /// `N = n`.
    Constant { n: f64 },
    /// `N(τ) = a·e^(−b·τ) + c`.
    DampedExponential { a: f64, b: f64, c: f64 },
    /// `N(τ) = a·e^(−(τ − t0)² / w) + c`.
    GaussianPulse { a: f64, t0: f64, w: f64, c: f64 },
}

impl MediaKind {
    pub const SUDDEN: MediaKind = MediaKind::DampedExponential { a: 2.5, b: 3.0, c: 0.04 };
    pub const GRADUAL: MediaKind = MediaKind::GaussianPulse { a: 1.0, t0: 50.0, w: 50.0, c: 0.06 };

    /// Time scale applied when the scenario does not set one.
    pub fn default_t_scale(&self) -> f64 {
        match self {
            MediaKind::DampedExponential { .. } => 100.0,
            _ => 1.0,
        }
    }

    /// Unclamped curve value at scaled time `tau`.
    pub fn raw(&self, tau: f64) -> f64 {
        match *self {
            MediaKind::Constant { n } => n,
            MediaKind::DampedExponential { a, b, c } => a * (-b * tau).exp() + c,
            MediaKind::GaussianPulse { a, t0, w, c } => a * (-(tau - t0).powi(2) / w).exp() + c,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MediaKind::Constant { n } => n.is_finite(),
            MediaKind::DampedExponential { a, b, c } => [a, b, c].iter().all(|x| x.is_finite()),
            MediaKind::GaussianPulse { a, t0, w, c } => {
                [a, t0, c].iter().all(|x| x.is_finite()) && w.is_finite() && w > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid media parameters {self:?}")))
        }
    }
}

/// Tone of the coverage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PositiveFraction {
    Fixed(UnitValue),
    /// Drawn once per replication; [`media_signal`] itself uses the clamped mean.
    Random(GaussianSpec),
    /// One value per step; steps past the end reuse the last entry.
    Schedule(Vec<UnitValue>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaProfile {
    pub kind: MediaKind,
    pub t_scale: f64,
    pub positive: PositiveFraction,
}

impl MediaProfile {
    pub fn new(kind: MediaKind, positive: PositiveFraction) -> Result<Self> {
        let profile = MediaProfile { t_scale: kind.default_t_scale(), kind, positive };
        profile.validate()?;
        Ok(profile)
    }

    /// Constant coverage `n` with fixed tone `n_pos`.
    pub fn constant(n: UnitValue, n_pos: UnitValue) -> Self {
        MediaProfile {
            kind: MediaKind::Constant { n: n.get() },
            t_scale: 1.0,
            positive: PositiveFraction::Fixed(n_pos),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()?;
        if !(self.t_scale.is_finite() && self.t_scale > 0.0) {
            return Err(Error::config(format!("media t_scale {} must be > 0", self.t_scale)));
        }
        if let PositiveFraction::Schedule(s) = &self.positive {
            if s.is_empty() {
                return Err(Error::config("media positive schedule is empty"));
            }
        }
        Ok(())
    }

    pub fn signal(&self, t: usize) -> Result<MediaSample> {
        media_signal(self, t, self.t_scale)
    }

    /// Replaces a random tone by one draw from `rng`.
    pub fn realize(&self, rng: &mut SimRng) -> MediaProfile {
        let mut out = self.clone();
        if let PositiveFraction::Random(spec) = self.positive {
            out.positive = PositiveFraction::Fixed(sample_truncated_gaussian(spec, rng));
        }
        out
    }
}

/// Media output for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediaSample {
    /// Fraction of coverage that is event-related.
    pub n: UnitValue,
    /// Fraction of that coverage that is positive.
    pub n_pos: UnitValue,
}

/// Evaluates `profile` at step `t`, with time divided by `t_scale`.
pub fn media_signal(profile: &MediaProfile, t: usize, t_scale: f64) -> Result<MediaSample> {
    if !(t_scale.is_finite() && t_scale > 0.0) {
        return Err(Error::config(format!("media t_scale {t_scale} must be > 0")));
    }
    let n = clamp_unit(profile.kind.raw(t as f64 / t_scale))?;
    let n_pos = match &profile.positive {
        PositiveFraction::Fixed(p) => *p,
        PositiveFraction::Random(spec) => clamp_unit(spec.mean())?,
        PositiveFraction::Schedule(s) => *s.get(t).or(s.last()).ok_or_else(|| {
            Error::config("media positive schedule is empty")
        })?,
    };
    Ok(MediaSample { n, n_pos })
}
