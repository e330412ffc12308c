//! Seeded synthetic interval series with cointegrated bounds.
//!
//! ```text
//! L_t = level + a t + b sin(2πt/12) + ε_t
//! R_t = max(0.01, μ + φ (R_{t-1} - μ) + η_t)
//! U_t = L_t + R_t
//! ```
//!
//! The spread `R_t` is stationary, so the two bounds share one stochastic trend.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval_ts::{Interval, IntervalSeries, Scale, YearMonth};

pub const MIN_LENGTH: usize = 48;
const RADIUS_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub length: usize,
    pub level: f64,
    pub trend_slope: f64,
    pub seasonal_amplitude: f64,
    /// Long-run mean of the spread.
    pub radius_mean: f64,
    pub radius_ar: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            length: 144,
            level: 10.0,
            trend_slope: 0.05,
            seasonal_amplitude: 2.0,
            radius_mean: 1.5,
            radius_ar: 0.6,
            noise_sd: 0.3,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.length < MIN_LENGTH {
            return Err(Error::InvalidParameter(format!("length must be at least {MIN_LENGTH}, got {}", self.length)));
        }
        if !(0.0..1.0).contains(&self.radius_ar) {
            return Err(Error::InvalidParameter(format!("radius AR coefficient {} outside [0, 1)", self.radius_ar)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise stddev {} must be finite and >= 0", self.noise_sd)));
        }
        if !(self.radius_mean > 0.0 && self.radius_mean.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius mean {} must be positive", self.radius_mean)));
        }
        if ![self.level, self.trend_slope, self.seasonal_amplitude].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

/// Monthly series starting January 2000.
pub fn generate(spec: &SyntheticSpec) -> Result<IntervalSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut radius = spec.radius_mean;
    let mut intervals = Vec::with_capacity(spec.length);
    for t in 0..spec.length {
        let tf = t as f64;
        let season = spec.seasonal_amplitude * (2.0 * std::f64::consts::PI * tf / 12.0).sin();
        let lower = spec.level + spec.trend_slope * tf + season + noise.sample(&mut rng);
        radius = (spec.radius_mean + spec.radius_ar * (radius - spec.radius_mean) + noise.sample(&mut rng))
            .max(RADIUS_FLOOR);
        intervals.push(Interval::new(lower, lower + radius)?);
    }
    IntervalSeries::from_start(YearMonth::new(2000, 1)?, intervals, Scale::Raw)
}
