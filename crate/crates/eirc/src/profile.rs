//! Synthetic activity profile file.
//!
//! ```toml
//! seed = 42                  # optional, default 0
//! ambient_period_ms = 10000  # optional
//! initial_tilt_deg = 0.0     # optional
//! initial_temp_f = 72.0      # optional
//! initial_rh_pct = 40.0      # optional
//! mag_field = [0.0, -40.0, 20.0]  # optional, µT at upright
//!
//! [[bout]]
//! level = "Moderate"         # or: sma = 13.5
//! duration_ms = 60000
//! noise = 0.2                # optional, m/s²
//! seed = 7                   # optional per-bout override
//! tilt = [{ at_ms = 30000, deg = 45.0 }]
//! ambient = [{ at_ms = 30000, temp_f = 85.0, rh_pct = 40.0 }]
//! ```

use std::fs;
use std::path::Path;

use eirc_core::synth::{ActivityProfile, AmbientKey, Bout, BoutTarget, TiltKey};
use eirc_core::{ActivityLevel, AmbientReading, Vec3};
use serde::Deserialize;

use crate::FormatError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    seed: Option<u64>,
    ambient_period_ms: Option<u64>,
    initial_tilt_deg: Option<f64>,
    initial_temp_f: Option<f64>,
    initial_rh_pct: Option<f64>,
    mag_field: Option<[f64; 3]>,
    #[serde(default)]
    bout: Vec<BoutFile>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoutFile {
    level: Option<String>,
    sma: Option<f64>,
    duration_ms: u64,
    #[serde(default)]
    noise: f64,
    seed: Option<u64>,
    #[serde(default)]
    tilt: Vec<TiltFile>,
    #[serde(default)]
    ambient: Vec<AmbientFile>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TiltFile {
    at_ms: u64,
    deg: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmbientFile {
    at_ms: u64,
    temp_f: f64,
    rh_pct: f64,
}

fn bout_from_file(i: usize, b: BoutFile) -> Result<Bout, String> {
    let target = match (b.level, b.sma) {
        (Some(level), None) => {
            BoutTarget::Level(level.parse::<ActivityLevel>().map_err(|_| format!("bout {i}: unknown level `{level}`"))?)
        }
        (None, Some(sma)) => BoutTarget::Sma(sma),
        _ => return Err(format!("bout {i}: give exactly one of `level` or `sma`")),
    };
    Ok(Bout {
        target,
        duration_ms: b.duration_ms,
        tilt: b.tilt.iter().map(|t| TiltKey { at_ms: t.at_ms, tilt_deg: t.deg }).collect(),
        ambient: b
            .ambient
            .iter()
            .map(|a| AmbientKey { at_ms: a.at_ms, reading: AmbientReading { temp_f: a.temp_f, rh_pct: a.rh_pct } })
            .collect(),
        noise: b.noise,
        seed: b.seed,
    })
}

/// Parses a profile. Semantic checks (durations, SMA feasibility) happen in
/// [`eirc_core::synth::generate`].
pub fn parse_profile(text: &str) -> Result<ActivityProfile, String> {
    let file: ProfileFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let bouts = file.bout.into_iter().enumerate().map(|(i, b)| bout_from_file(i, b)).collect::<Result<_, _>>()?;
    let mut p = ActivityProfile::new(file.seed.unwrap_or(0), bouts);
    if let Some(v) = file.ambient_period_ms {
        p.ambient_period_ms = v;
    }
    if let Some(v) = file.initial_tilt_deg {
        p.initial_tilt_deg = v;
    }
    if let Some(v) = file.initial_temp_f {
        p.initial_ambient.temp_f = v;
    }
    if let Some(v) = file.initial_rh_pct {
        p.initial_ambient.rh_pct = v;
    }
    if let Some([x, y, z]) = file.mag_field {
        p.mag_field = Vec3::new(x, y, z);
    }
    Ok(p)
}

pub fn load_profile(path: &Path) -> Result<ActivityProfile, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    parse_profile(&text).map_err(|e| FormatError::invalid(path, e))
}
