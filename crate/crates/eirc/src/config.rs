//! Engine configuration file.
//!
//! Flat TOML `key = value` pairs; every key is optional and overrides the
//! built-in default. Unknown keys are rejected.
//!
//! ```toml
//! window_ms = 5000
//! samples_per_window = 25
//! filter_alpha = 0.833
//! fusion_weight = 0.98
//! vertical_axis = "y"
//! posture_thresholds = [20.0, 60.0, 120.0]
//! temp_low_f = 69.0
//! temp_high_f = 79.0
//! rh_low_pct = 35.0
//! rh_high_pct = 50.0
//! ambient_stale_ms = 300000
//! vigorous_cum_ms = 600000
//! adverse_exertion_min_level = "Moderate"
//! adverse_ambient_consecutive_windows = 2
//! post_exertion_lean_window_ms = 60000
//! ```

use std::fs;
use std::path::Path;

use eirc_core::{ActivityLevel, Axis, EngineConfig, PostureThresholds};
use serde::Deserialize;

use crate::FormatError;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub window_ms: Option<u64>,
    pub samples_per_window: Option<usize>,
    pub filter_alpha: Option<f64>,
    pub fusion_weight: Option<f64>,
    pub vertical_axis: Option<Axis>,
    pub posture_thresholds: Option<[f64; 3]>,
    pub temp_low_f: Option<f64>,
    pub temp_high_f: Option<f64>,
    pub rh_low_pct: Option<f64>,
    pub rh_high_pct: Option<f64>,
    pub ambient_stale_ms: Option<u64>,
    pub vigorous_cum_ms: Option<u64>,
    pub adverse_exertion_min_level: Option<String>,
    pub adverse_ambient_consecutive_windows: Option<u32>,
    pub post_exertion_lean_window_ms: Option<u64>,
}

impl ConfigFile {
    pub fn apply(&self, mut c: EngineConfig) -> Result<EngineConfig, String> {
        macro_rules! set {
            ($($key:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$key { c.$($dst).+ = v; })*
            };
        }
        set! {
            window_ms => window_ms,
            samples_per_window => samples_per_window,
            filter_alpha => filter_alpha,
            fusion_weight => fusion_weight,
            vertical_axis => vertical_axis,
            temp_low_f => ambient.temp_low_f,
            temp_high_f => ambient.temp_high_f,
            rh_low_pct => ambient.rh_low_pct,
            rh_high_pct => ambient.rh_high_pct,
            ambient_stale_ms => ambient_stale_ms,
            vigorous_cum_ms => rules.vigorous_cum_ms,
            adverse_ambient_consecutive_windows => rules.adverse_ambient_consecutive_windows,
            post_exertion_lean_window_ms => rules.post_exertion_lean_window_ms,
        }
        if let Some(t) = self.posture_thresholds {
            c.posture = PostureThresholds::from_array(t).map_err(|e| e.to_string())?;
        }
        if let Some(level) = &self.adverse_exertion_min_level {
            c.rules.adverse_exertion_min_level =
                level.parse::<ActivityLevel>().map_err(|_| format!("unknown activity level `{level}`"))?;
        }
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }
}

pub fn parse_config(text: &str) -> Result<EngineConfig, String> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| e.to_string())?;
    file.apply(EngineConfig::default())
}

pub fn load_config(path: &Path) -> Result<EngineConfig, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    parse_config(&text).map_err(|e| FormatError::invalid(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_defaults() {
        assert_eq!(parse_config("").unwrap(), EngineConfig::default());
    }

    #[test]
    fn documented_example_is_defaults() {
        let doc: String = include_str!("config.rs")
            .lines()
            .skip_while(|l| !l.starts_with("//! ```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| format!("{}\n", l.trim_start_matches("//!").trim_start()))
            .collect();
        assert!(doc.contains("window_ms"));
        assert_eq!(parse_config(&doc).unwrap(), EngineConfig::default());
    }

    #[test]
    fn overrides_apply() {
        let c = parse_config(
            "vigorous_cum_ms = 60000\nvertical_axis = \"z\"\nadverse_exertion_min_level = \"vigorous\"\ntemp_high_f = 80.5\n",
        )
        .unwrap();
        assert_eq!(c.rules.vigorous_cum_ms, 60_000);
        assert_eq!(c.vertical_axis, Axis::Z);
        assert_eq!(c.rules.adverse_exertion_min_level, ActivityLevel::Vigorous);
        assert_eq!(c.ambient.temp_high_f, 80.5);
    }

    #[test]
    fn unknown_and_invalid_keys_fail() {
        assert!(parse_config("window = 5000\n").is_err());
        assert!(parse_config("samples_per_window = 0\n").is_err());
        assert!(parse_config("filter_alpha = 1.5\n").is_err());
        assert!(parse_config("posture_thresholds = [60.0, 20.0, 120.0]\n").is_err());
        assert!(parse_config("adverse_exertion_min_level = \"extreme\"\n").is_err());
    }
}
