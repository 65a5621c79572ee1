//! Signal magnitude area, energy-expenditure extrapolation, activity level
//! classification and per-level duration accounting.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::{LinearAccelSample, Window};
use crate::sensor_model::ActivityLevel;

/// Slope of the SMA → VO₂ regression.
pub const EE_SLOPE: f64 = 1.1;
/// Intercept of the SMA → VO₂ regression.
pub const EE_INTERCEPT: f64 = 5.7;

/// Upper (inclusive) SMA bound of each non-vigorous level, m/s².
pub const SEDENTARY_MAX: f64 = 1.5;
pub const LOW_MAX: f64 = 9.0;
pub const MODERATE_MAX: f64 = 18.0;

pub const MS_PER_HOUR: u64 = 3_600_000;

#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum ActivityError {
    #[error("window {index} is partial ({len} samples)")]
    PartialWindow { index: u64, len: usize },
    #[error("negative SMA {0}")]
    NegativeSma(f64),
}

/// Mean over samples of `|x| + |y| + |z|`. Zero for an empty slice.
pub fn sma_of(samples: &[LinearAccelSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.linear.abs_sum()).sum::<f64>() / samples.len() as f64
}

/// SMA of a full window, m/s².
pub fn compute_sma(window: &Window) -> Result<f64, ActivityError> {
    if window.partial {
        return Err(ActivityError::PartialWindow { index: window.index, len: window.samples.len() });
    }
    Ok(sma_of(&window.samples))
}

/// VO₂ extrapolated from SMA (same units as the regression it comes from).
pub fn extrapolate_ee(sma: f64) -> Result<f64, ActivityError> {
    if sma < 0.0 || sma.is_nan() {
        return Err(ActivityError::NegativeSma(sma));
    }
    Ok(EE_SLOPE * sma + EE_INTERCEPT)
}

/// Half-open intervals: `[0, 1.5]`, `(1.5, 9]`, `(9, 18]`, `(18, ∞)`.
///
/// An SMA of exactly zero is sedentary.
pub fn classify_level(sma: f64) -> ActivityLevel {
    if sma <= SEDENTARY_MAX {
        ActivityLevel::Sedentary
    } else if sma <= LOW_MAX {
        ActivityLevel::Low
    } else if sma <= MODERATE_MAX {
        ActivityLevel::Moderate
    } else {
        ActivityLevel::Vigorous
    }
}

/// Per-window activity output.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowFeatures {
    pub index: u64,
    pub start_ms: u64,
    pub end_ms: u64,
    /// Timestamp of the window's last sample.
    pub close_ms: u64,
    pub sma: f64,
    pub ee_vo2: f64,
    pub level: ActivityLevel,
    pub degraded: bool,
}

impl WindowFeatures {
    pub fn from_window(window: &Window) -> Result<Self, ActivityError> {
        let sma = compute_sma(window)?;
        Ok(Self {
            index: window.index,
            start_ms: window.start_ms,
            end_ms: window.end_ms,
            close_ms: window.close_ms(),
            sma,
            ee_vo2: extrapolate_ee(sma)?,
            level: classify_level(sma),
            degraded: window.degraded,
        })
    }
}

/// Window counts per level, indexed by [`ActivityLevel::index`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub sedentary: u64,
    pub low: u64,
    pub moderate: u64,
    pub vigorous: u64,
}

impl LevelCounts {
    pub fn get(&self, level: ActivityLevel) -> u64 {
        match level {
            ActivityLevel::Sedentary => self.sedentary,
            ActivityLevel::Low => self.low,
            ActivityLevel::Moderate => self.moderate,
            ActivityLevel::Vigorous => self.vigorous,
        }
    }

    pub fn increment(&mut self, level: ActivityLevel) {
        let slot = match level {
            ActivityLevel::Sedentary => &mut self.sedentary,
            ActivityLevel::Low => &mut self.low,
            ActivityLevel::Moderate => &mut self.moderate,
            ActivityLevel::Vigorous => &mut self.vigorous,
        };
        *slot += 1;
    }

    pub fn total(&self) -> u64 {
        self.sedentary + self.low + self.moderate + self.vigorous
    }
}

/// Running per-level counters and durations, plus hour-of-session aggregates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelLedger {
    window_ms: u64,
    counters: LevelCounts,
    current: Option<ActivityLevel>,
    hourly: BTreeMap<u64, LevelCounts>,
}

impl LevelLedger {
    pub fn new(window_ms: u64) -> Self {
        Self { window_ms, counters: LevelCounts::default(), current: None, hourly: BTreeMap::new() }
    }

    pub fn update(&mut self, features: &WindowFeatures) {
        self.counters.increment(features.level);
        self.current = Some(features.level);
        self.hourly.entry(features.start_ms / MS_PER_HOUR).or_default().increment(features.level);
    }

    pub fn counter(&self, level: ActivityLevel) -> u64 {
        self.counters.get(level)
    }

    pub fn counters(&self) -> LevelCounts {
        self.counters
    }

    /// `counter × window_ms` for the level.
    pub fn duration_ms(&self, level: ActivityLevel) -> u64 {
        self.counters.get(level) * self.window_ms
    }

    pub fn current_level(&self) -> Option<ActivityLevel> {
        self.current
    }

    pub fn hourly(&self) -> &BTreeMap<u64, LevelCounts> {
        &self.hourly
    }

    pub fn total_windows(&self) -> u64 {
        self.counters.total()
    }

    pub fn window_ms(&self) -> u64 {
        self.window_ms
    }
}

/// Functional form of [`LevelLedger::update`].
pub fn ledger_update(mut ledger: LevelLedger, features: &WindowFeatures) -> LevelLedger {
    ledger.update(features);
    ledger
}

/// `HH:MM:SS`, truncating sub-second remainders. Hours are not wrapped.
pub fn format_duration(ms: u64) -> String {
    let secs = ms / 1000;
    format!("{:02}:{:02}:{:02}", secs / 3600, (secs / 60) % 60, secs % 60)
}
