//! Plot-ready CSV series.
//!
//! - `ambient.csv`: `t_ms,temp_f,rh_pct,in_band`, one row per ambient record
//! - `activity.csv`: `start_ms,sma,ee_vo2,level`, one row per window
//! - `hourly.csv`: `hour,sedentary,low,moderate,vigorous` window counts
//! - `posture.csv`: `start_ms,tilt_deg,posture`, windows with orientation

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use eirc_core::{evaluate_ambient, AmbientBand, Reading, SensorRecord, SessionSummary, WindowReport};

use crate::{FormatError, Precision};

pub fn write_ambient<W: Write>(
    out: &mut W,
    records: &[SensorRecord],
    band: &AmbientBand,
    precision: Precision,
) -> io::Result<()> {
    writeln!(out, "t_ms,temp_f,rh_pct,in_band")?;
    for r in records {
        if let Reading::Ambient(a) = r.reading {
            let v = evaluate_ambient(r.t_ms, a, band);
            writeln!(out, "{},{},{},{}", r.t_ms, precision.format(a.temp_f), precision.format(a.rh_pct), v.in_band)?;
        }
    }
    Ok(())
}

pub fn write_activity<W: Write>(out: &mut W, reports: &[WindowReport], precision: Precision) -> io::Result<()> {
    writeln!(out, "start_ms,sma,ee_vo2,level")?;
    for r in reports {
        let f = &r.features;
        writeln!(out, "{},{},{},{}", f.start_ms, precision.format(f.sma), precision.format(f.ee_vo2), f.level)?;
    }
    Ok(())
}

pub fn write_hourly<W: Write>(out: &mut W, summary: &SessionSummary) -> io::Result<()> {
    writeln!(out, "hour,sedentary,low,moderate,vigorous")?;
    for (hour, c) in &summary.hourly {
        writeln!(out, "{hour},{},{},{},{}", c.sedentary, c.low, c.moderate, c.vigorous)?;
    }
    Ok(())
}

pub fn write_posture<W: Write>(out: &mut W, reports: &[WindowReport], precision: Precision) -> io::Result<()> {
    writeln!(out, "start_ms,tilt_deg,posture")?;
    for r in reports {
        if let Some(p) = r.posture {
            writeln!(out, "{},{},{}", r.features.start_ms, precision.format(p.tilt_deg), p.posture)?;
        }
    }
    Ok(())
}

/// Writes all four series into `dir` and returns their paths.
pub fn export_plot(
    dir: &Path,
    records: &[SensorRecord],
    reports: &[WindowReport],
    summary: &SessionSummary,
    band: &AmbientBand,
    precision: Precision,
) -> Result<Vec<PathBuf>, FormatError> {
    fs::create_dir_all(dir).map_err(|e| FormatError::io(dir, e))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, body: &dyn Fn(&mut Vec<u8>) -> io::Result<()>| {
        let path = dir.join(name);
        let mut buf = Vec::new();
        body(&mut buf).and_then(|_| fs::write(&path, &buf)).map_err(|e| FormatError::io(&path, e))?;
        written.push(path);
        Ok::<_, FormatError>(())
    };
    emit("ambient.csv", &|b| write_ambient(b, records, band, precision))?;
    emit("activity.csv", &|b| write_activity(b, reports, precision))?;
    emit("hourly.csv", &|b| write_hourly(b, summary))?;
    emit("posture.csv", &|b| write_posture(b, reports, precision))?;
    Ok(written)
}
