//! Per-window feature table.
//!
//! | column     | unit / values                                   |
//! |------------|-------------------------------------------------|
//! | `index`    | window number from 0                            |
//! | `start_ms` | timestamp of the first sample                   |
//! | `sma`      | m/s²                                            |
//! | `ee_vo2`   | ml O₂·kg⁻¹·min⁻¹                                |
//! | `level`    | Sedentary, Low, Moderate, Vigorous              |
//! | `tilt_deg` | degrees from upright, empty before any IMU data |
//! | `posture`  | Upright, Leaning, Lying, Inverted or empty      |
//! | `temp_f`   | latest ambient temperature, °F, or empty        |
//! | `rh_pct`   | latest relative humidity, %, or empty           |
//! | `in_band`  | `true`/`false`, empty without ambient data      |
//! | `degraded` | `true` when the window had a sampling gap       |

use std::io::{self, Write};
use std::str::FromStr;

use eirc_core::{ActivityLevel, PostureClass, WindowReport};

use crate::{FormatError, Precision};

pub const FEATURES_HEADER: &str = "index,start_ms,sma,ee_vo2,level,tilt_deg,posture,temp_f,rh_pct,in_band,degraded";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureRow {
    pub index: u64,
    pub start_ms: u64,
    pub sma: f64,
    pub ee_vo2: f64,
    pub level: ActivityLevel,
    pub tilt_deg: Option<f64>,
    pub posture: Option<PostureClass>,
    pub temp_f: Option<f64>,
    pub rh_pct: Option<f64>,
    pub in_band: Option<bool>,
    pub degraded: bool,
}

impl From<&WindowReport> for FeatureRow {
    fn from(r: &WindowReport) -> Self {
        let f = &r.features;
        FeatureRow {
            index: f.index,
            start_ms: f.start_ms,
            sma: f.sma,
            ee_vo2: f.ee_vo2,
            level: f.level,
            tilt_deg: r.posture.map(|p| p.tilt_deg),
            posture: r.posture.map(|p| p.posture),
            temp_f: r.ambient.map(|a| a.temp_f),
            rh_pct: r.ambient.map(|a| a.rh_pct),
            in_band: r.verdict.map(|v| v.in_band),
            degraded: f.degraded,
        }
    }
}

pub fn write_feature_rows<W: Write>(out: &mut W, rows: &[FeatureRow], precision: Precision) -> io::Result<()> {
    writeln!(out, "{FEATURES_HEADER}")?;
    let num = |v: Option<f64>| v.map(|v| precision.format(v)).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            r.start_ms,
            precision.format(r.sma),
            precision.format(r.ee_vo2),
            r.level,
            num(r.tilt_deg),
            r.posture.map(|p| p.as_str()).unwrap_or_default(),
            num(r.temp_f),
            num(r.rh_pct),
            r.in_band.map(|b| if b { "true" } else { "false" }).unwrap_or_default(),
            r.degraded,
        )?;
    }
    Ok(())
}

pub fn write_features<W: Write>(out: &mut W, reports: &[WindowReport], precision: Precision) -> io::Result<()> {
    let rows: Vec<FeatureRow> = reports.iter().map(FeatureRow::from).collect();
    write_feature_rows(out, &rows, precision)
}

fn field<T: FromStr>(line: usize, name: &str, s: &str) -> Result<T, FormatError> {
    s.parse().map_err(|_| FormatError::Parse { line, message: format!("invalid {name} `{s}`") })
}

fn optional<T: FromStr>(line: usize, name: &str, s: &str) -> Result<Option<T>, FormatError> {
    if s.is_empty() {
        Ok(None)
    } else {
        field(line, name, s).map(Some)
    }
}

pub fn parse_features(text: &str) -> Result<Vec<FeatureRow>, FormatError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == FEATURES_HEADER => {}
        _ => return Err(FormatError::Parse { line: 1, message: format!("header must be `{FEATURES_HEADER}`") }),
    }
    lines
        .map(|(i, line)| {
            let n = i + 1;
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 11 {
                return Err(FormatError::Parse { line: n, message: format!("expected 11 columns, found {}", c.len()) });
            }
            Ok(FeatureRow {
                index: field(n, "index", c[0])?,
                start_ms: field(n, "start_ms", c[1])?,
                sma: field(n, "sma", c[2])?,
                ee_vo2: field(n, "ee_vo2", c[3])?,
                level: field(n, "level", c[4])?,
                tilt_deg: optional(n, "tilt_deg", c[5])?,
                posture: optional(n, "posture", c[6])?,
                temp_f: optional(n, "temp_f", c[7])?,
                rh_pct: optional(n, "rh_pct", c[8])?,
                in_band: optional(n, "in_band", c[9])?,
                degraded: field(n, "degraded", c[10])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(index: u64) -> FeatureRow {
        FeatureRow {
            index,
            start_ms: index * 5000,
            sma: 2.663409,
            ee_vo2: 8.62975,
            level: ActivityLevel::Low,
            tilt_deg: Some(12.5),
            posture: Some(PostureClass::Upright),
            temp_f: Some(72.0),
            rh_pct: Some(40.0),
            in_band: Some(true),
            degraded: false,
        }
    }

    fn render(rows: &[FeatureRow]) -> String {
        let mut buf = Vec::new();
        write_feature_rows(&mut buf, rows, Precision::Shortest).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn two_windows_give_two_rows() {
        let text = render(&[row(0), row(1)]);
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().nth(1).unwrap(), "0,0,2.663409,8.62975,Low,12.5,Upright,72,40,true,false");
    }

    #[test]
    fn empty_stream_is_header_only() {
        assert_eq!(render(&[]), format!("{FEATURES_HEADER}\n"));
    }

    #[test]
    fn absent_values_are_empty_cells() {
        let mut r = row(3);
        r.tilt_deg = None;
        r.posture = None;
        r.temp_f = None;
        r.rh_pct = None;
        r.in_band = None;
        let text = render(&[r]);
        assert!(text.ends_with("3,15000,2.663409,8.62975,Low,,,,,,false\n"));
        assert_eq!(parse_features(&text).unwrap(), [r]);
    }

    #[test]
    fn rows_parse_back() {
        let mut r = row(7);
        r.sma = 0.1 + 0.2;
        r.in_band = Some(false);
        r.degraded = true;
        assert_eq!(parse_features(&render(&[row(0), r])).unwrap(), [row(0), r]);
    }
}
