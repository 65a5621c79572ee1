//! Respiratory comfort band for ambient temperature and humidity.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::sensor_model::{AmbientReading, ConfigError};

/// Inclusive comfort band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientBand {
    pub temp_low_f: f64,
    pub temp_high_f: f64,
    pub rh_low_pct: f64,
    pub rh_high_pct: f64,
}

impl Default for AmbientBand {
    fn default() -> Self {
        Self { temp_low_f: 69.0, temp_high_f: 79.0, rh_low_pct: 35.0, rh_high_pct: 50.0 }
    }
}

impl AmbientBand {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.temp_low_f < self.temp_high_f && self.rh_low_pct < self.rh_high_pct {
            Ok(())
        } else {
            Err(ConfigError::AmbientBand)
        }
    }
}

/// Set of violated band bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Violations(u8);

impl Violations {
    pub const NONE: Violations = Violations(0);
    pub const TEMP_LOW: Violations = Violations(1);
    pub const TEMP_HIGH: Violations = Violations(1 << 1);
    pub const RH_LOW: Violations = Violations(1 << 2);
    pub const RH_HIGH: Violations = Violations(1 << 3);

    const NAMES: [(Violations, &'static str); 4] = [
        (Violations::TEMP_LOW, "TempLow"),
        (Violations::TEMP_HIGH, "TempHigh"),
        (Violations::RH_LOW, "RhLow"),
        (Violations::RH_HIGH, "RhHigh"),
    ];

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, other: Violations) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn union(self, other: Violations) -> Violations {
        Violations(self.0 | other.0)
    }

    pub fn insert(&mut self, other: Violations) {
        self.0 |= other.0;
    }

    pub fn names(self) -> impl Iterator<Item = &'static str> {
        Self::NAMES.into_iter().filter(move |(v, _)| self.contains(*v)).map(|(_, n)| n)
    }

    pub fn bits(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Violations {
    /// `|`-separated names, empty when in band.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, name) in self.names().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            f.write_str(name)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientVerdict {
    pub t_ms: u64,
    pub in_band: bool,
    pub violations: Violations,
}

pub fn evaluate_ambient(t_ms: u64, reading: AmbientReading, band: &AmbientBand) -> AmbientVerdict {
    let mut v = Violations::NONE;
    if reading.temp_f < band.temp_low_f {
        v.insert(Violations::TEMP_LOW);
    }
    if reading.temp_f > band.temp_high_f {
        v.insert(Violations::TEMP_HIGH);
    }
    if reading.rh_pct < band.rh_low_pct {
        v.insert(Violations::RH_LOW);
    }
    if reading.rh_pct > band.rh_high_pct {
        v.insert(Violations::RH_HIGH);
    }
    AmbientVerdict { t_ms, in_band: v.is_empty(), violations: v }
}

/// Maximal run of out-of-band verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutOfBandEpisode {
    pub start_ms: u64,
    /// Timestamp of the last out-of-band verdict in the run.
    pub end_ms: u64,
    pub violations: Violations,
    pub verdicts: u64,
}

#[derive(Clone, Debug, Default)]
pub struct EpisodeTracker {
    open: Option<OutOfBandEpisode>,
}

impl EpisodeTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the episode closed by an in-band verdict, if any.
    pub fn push(&mut self, verdict: &AmbientVerdict) -> Option<OutOfBandEpisode> {
        if verdict.in_band {
            return self.open.take();
        }
        match &mut self.open {
            Some(ep) => {
                ep.end_ms = verdict.t_ms;
                ep.violations.insert(verdict.violations);
                ep.verdicts += 1;
            }
            None => {
                self.open = Some(OutOfBandEpisode {
                    start_ms: verdict.t_ms,
                    end_ms: verdict.t_ms,
                    violations: verdict.violations,
                    verdicts: 1,
                });
            }
        }
        None
    }

    pub fn open_episode(&self) -> Option<&OutOfBandEpisode> {
        self.open.as_ref()
    }

    pub fn finish(&mut self) -> Option<OutOfBandEpisode> {
        self.open.take()
    }
}

pub fn track_episodes<'a, I>(verdicts: I) -> Vec<OutOfBandEpisode>
where
    I: IntoIterator<Item = &'a AmbientVerdict>,
{
    let mut tracker = EpisodeTracker::new();
    let mut out: Vec<_> = verdicts.into_iter().filter_map(|v| tracker.push(v)).collect();
    out.extend(tracker.finish());
    out
}
