//! File formats, session replay and plot-data export around `eirc-core`.
//!
//! Every format here is plain UTF-8 text with LF line endings:
//!
//! - [`records`]: sensor record CSV (`t_ms,channel,v1,v2,v3`)
//! - [`features`]: per-window feature table
//! - [`summary`]: session summary JSON
//! - [`config`]: engine configuration TOML
//! - [`profile`]: synthetic activity profile TOML
//! - [`truth`]: ground-truth sidecar CSV written next to generated records
//! - [`plot`]: plot-ready CSV series
//! - [`replay`]: file-to-file session processing

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use eirc_core::Channel;
use thiserror::Error;

pub mod config;
pub mod features;
pub mod plot;
pub mod profile;
pub mod records;
pub mod replay;
pub mod summary;
pub mod truth;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {channel} timestamp {t_ms} is not after previous {prev_ms}")]
    NonMonotonic { channel: Channel, line: usize, t_ms: u64, prev_ms: u64 },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

impl FormatError {
    pub fn io(path: &Path, err: io::Error) -> Self {
        FormatError::Io { path: path.to_path_buf(), message: err.to_string() }
    }

    pub fn invalid(path: &Path, message: impl fmt::Display) -> Self {
        FormatError::Invalid { path: path.to_path_buf(), message: message.to_string() }
    }

    /// Line number for parse and ordering errors.
    pub fn line(&self) -> Option<usize> {
        match self {
            FormatError::Parse { line, .. } | FormatError::NonMonotonic { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// How floating-point columns are written.
///
/// `Shortest` prints the shortest decimal that parses back to the same
/// `f64`, so nothing is lost on re-reading.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Precision {
    #[default]
    Shortest,
    Fixed(usize),
}

impl Precision {
    pub fn format(self, v: f64) -> String {
        match self {
            Precision::Shortest => format!("{v}"),
            Precision::Fixed(n) => format!("{v:.n$}"),
        }
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("shortest") {
            return Ok(Precision::Shortest);
        }
        match s.parse::<usize>() {
            Ok(n) if n <= 17 => Ok(Precision::Fixed(n)),
            _ => Err(format!("precision must be `shortest` or 0..=17 decimals, got `{s}`")),
        }
    }
}
