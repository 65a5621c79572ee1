//! Session summary file.
//!
//! Pretty-printed JSON whose keys always appear in declaration order:
//! `format`, `features_table`, `config`, then the summary itself
//! (`window_ms`, `windows`, ... `alerts`). Durations are given both in
//! milliseconds and as `HH:MM:SS`.

use std::fs;
use std::path::Path;

use eirc_core::{EngineConfig, SessionSummary};
use serde::{Deserialize, Serialize};

use crate::FormatError;

pub const SUMMARY_FORMAT: &str = "eirc-summary/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummaryFile {
    pub format: String,
    /// Features table written alongside, relative to the summary file.
    pub features_table: Option<String>,
    pub config: EngineConfig,
    pub summary: SessionSummary,
}

impl SessionSummaryFile {
    pub fn new(config: EngineConfig, features_table: Option<String>, summary: SessionSummary) -> Self {
        Self { format: SUMMARY_FORMAT.into(), features_table, config, summary }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn write_summary(path: &Path, file: &SessionSummaryFile) -> Result<(), FormatError> {
    fs::write(path, file.to_json()).map_err(|e| FormatError::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<SessionSummaryFile, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let file = SessionSummaryFile::from_json(&text).map_err(|e| FormatError::invalid(path, e))?;
    if file.format != SUMMARY_FORMAT {
        return Err(FormatError::invalid(path, format!("unsupported format `{}`", file.format)));
    }
    Ok(file)
}
