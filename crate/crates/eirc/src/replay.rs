//! File-to-file session processing.

use std::fs;
use std::path::{Path, PathBuf};

use eirc_core::monitor::AlertDetail;
use eirc_core::{
    format_duration, Alert, Engine, EngineConfig, EngineError, SensorRecord, SessionSummary, WindowReport,
};
use thiserror::Error;

use crate::features::write_features;
use crate::records::read_session;
use crate::summary::{write_summary, SessionSummaryFile};
use crate::{FormatError, Precision};

pub const FEATURES_FILE: &str = "features.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Runs records through a fresh engine, handing each alert to `on_alert` as
/// soon as its window closes.
pub fn process(
    config: &EngineConfig,
    records: impl IntoIterator<Item = SensorRecord>,
    mut on_alert: impl FnMut(&Alert),
) -> Result<(Vec<WindowReport>, SessionSummary), EngineError> {
    let mut engine = Engine::new(config.clone())?;
    let mut reports = Vec::new();
    let mut take = |batch: Vec<WindowReport>, reports: &mut Vec<WindowReport>| {
        for r in batch {
            r.alerts.iter().for_each(&mut on_alert);
            reports.push(r);
        }
    };
    for rec in records {
        let batch = engine.push(rec)?;
        take(batch, &mut reports);
    }
    let batch = engine.flush()?;
    take(batch, &mut reports);
    Ok((reports, engine.summary()))
}

pub struct ReplayOutput {
    pub records: Vec<SensorRecord>,
    pub reports: Vec<WindowReport>,
    pub summary: SessionSummary,
    pub features_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Reads `input`, processes it and writes `features.csv` and `summary.json`
/// into `out_dir`.
pub fn replay_file(
    input: &Path,
    config: &EngineConfig,
    out_dir: &Path,
    precision: Precision,
    on_alert: impl FnMut(&Alert),
) -> Result<ReplayOutput, ReplayError> {
    let records = read_session(input)?;
    let (reports, summary) = process(config, records.iter().copied(), on_alert)?;
    fs::create_dir_all(out_dir).map_err(|e| FormatError::io(out_dir, e))?;

    let features_path = out_dir.join(FEATURES_FILE);
    let mut buf = Vec::new();
    write_features(&mut buf, &reports, precision)
        .and_then(|_| fs::write(&features_path, &buf))
        .map_err(|e| FormatError::io(&features_path, e))?;

    let summary_path = out_dir.join(SUMMARY_FILE);
    let file = SessionSummaryFile::new(config.clone(), Some(FEATURES_FILE.into()), summary.clone());
    write_summary(&summary_path, &file)?;

    Ok(ReplayOutput { records, reports, summary, features_path, summary_path })
}

/// One `key=value` line per alert, for scripts.
pub fn alert_line(a: &Alert) -> String {
    let mut s = format!("alert t_ms={} kind={} window={} level={}", a.t_ms, a.kind(), a.window_index, a.level);
    match a.detail {
        AlertDetail::VigorousDuration { cumulative_ms } => s += &format!(" cumulative_ms={cumulative_ms}"),
        AlertDetail::AdverseAmbientExertion { verdict, consecutive_windows } => {
            s += &format!(" violations={} consecutive_windows={consecutive_windows}", verdict.violations)
        }
        AlertDetail::PostExertionLean { tilt_deg, posture, since_vigorous_ms } => {
            s += &format!(" posture={posture} tilt_deg={tilt_deg:.1} since_vigorous_ms={since_vigorous_ms}")
        }
    }
    s
}

pub fn alert_human(a: &Alert) -> String {
    let when = format_duration(a.t_ms);
    let what = match a.detail {
        AlertDetail::VigorousDuration { cumulative_ms } => {
            format!("vigorous activity has totalled {}", format_duration(cumulative_ms))
        }
        AlertDetail::AdverseAmbientExertion { verdict, consecutive_windows } => format!(
            "{} exertion while ambient out of comfort band ({}) for {consecutive_windows} windows",
            a.level, verdict.violations
        ),
        AlertDetail::PostExertionLean { tilt_deg, posture, since_vigorous_ms } => {
            format!("{posture} posture ({tilt_deg:.1} deg) {} s after vigorous activity", since_vigorous_ms / 1000)
        }
    };
    format!("[{when}] {}: {what} (window {})", a.kind(), a.window_index)
}
