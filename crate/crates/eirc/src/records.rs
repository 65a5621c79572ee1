//! Sensor record files.
//!
//! One record per line, header mandatory, UTF-8 with LF line endings and `.`
//! as the decimal separator:
//!
//! ```text
//! t_ms,channel,v1,v2,v3
//! 0,Accel,0.01,9.80665,-0.02
//! 0,Gyro,0,0,0
//! 0,Mag,0,-40,20
//! 0,Ambient,72,40,
//! ```
//!
//! Accel is m/s², Gyro rad/s, Mag µT. Ambient carries `temp_f,rh_pct` and an
//! empty third value.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use eirc_core::sensor_model::{validate_record, RecordError};
use eirc_core::{AmbientReading, Channel, Reading, SensorRecord, Vec3};

use crate::{FormatError, Precision};

pub const RECORD_HEADER: &str = "t_ms,channel,v1,v2,v3";

fn parse_error(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line, message: message.into() }
}

fn parse_line(line_no: usize, line: &str) -> Result<SensorRecord, FormatError> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 5 {
        return Err(parse_error(line_no, format!("expected 5 fields, found {}", fields.len())));
    }
    let t_ms: u64 =
        fields[0].parse().map_err(|_| parse_error(line_no, format!("invalid timestamp `{}`", fields[0])))?;
    let channel: Channel = fields[1].parse().map_err(|e| parse_error(line_no, format!("{e}")))?;
    let num = |i: usize| -> Result<f64, FormatError> {
        fields[i]
            .parse::<f64>()
            .map_err(|_| parse_error(line_no, format!("invalid number `{}` in v{}", fields[i], i - 1)))
    };
    let reading = match channel {
        Channel::Ambient => {
            if !fields[4].is_empty() {
                return Err(parse_error(line_no, "Ambient records leave v3 empty"));
            }
            Reading::Ambient(AmbientReading { temp_f: num(2)?, rh_pct: num(3)? })
        }
        Channel::Accel => Reading::Accel(Vec3::new(num(2)?, num(3)?, num(4)?)),
        Channel::Gyro => Reading::Gyro(Vec3::new(num(2)?, num(3)?, num(4)?)),
        Channel::Mag => Reading::Mag(Vec3::new(num(2)?, num(3)?, num(4)?)),
    };
    Ok(SensorRecord::new(t_ms, reading))
}

/// Parses a record file and returns all records merged by timestamp, ties
/// broken by channel order Accel < Gyro < Mag < Ambient.
pub fn parse_records(text: &str) -> Result<Vec<SensorRecord>, FormatError> {
    if text.is_empty() {
        return Err(parse_error(1, "missing header"));
    }
    if !text.ends_with('\n') {
        let last = text.lines().count();
        return Err(parse_error(last, "unterminated final line (truncated file?)"));
    }
    let mut per_channel: [Vec<SensorRecord>; 4] = Default::default();
    let mut last_t: [Option<(u64, usize)>; 4] = [None; 4];
    for (i, line) in text.split_terminator('\n').enumerate() {
        let line_no = i + 1;
        if line.ends_with('\r') {
            return Err(parse_error(line_no, "CR line ending; LF expected"));
        }
        if i == 0 {
            if line != RECORD_HEADER {
                return Err(parse_error(1, format!("header must be `{RECORD_HEADER}`")));
            }
            continue;
        }
        let rec = parse_line(line_no, line)?;
        let slot = rec.channel().index();
        let prev = last_t[slot].map(|(t, _)| t);
        let rec = validate_record(rec, prev).map_err(|e| match e {
            RecordError::NonMonotonicTimestamp { channel, t_ms, prev_ms } => {
                FormatError::NonMonotonic { channel, line: line_no, t_ms, prev_ms }
            }
            other => parse_error(line_no, other.to_string()),
        })?;
        last_t[slot] = Some((rec.t_ms, line_no));
        per_channel[slot].push(rec);
    }
    Ok(merge_channels(per_channel))
}

/// k-way merge of per-channel, individually sorted streams.
fn merge_channels(channels: [Vec<SensorRecord>; 4]) -> Vec<SensorRecord> {
    let total = channels.iter().map(Vec::len).sum();
    let mut heads = [0usize; 4];
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        let next = (0..4)
            .filter(|&c| heads[c] < channels[c].len())
            .min_by_key(|&c| (channels[c][heads[c]].t_ms, c))
            .expect("records remain");
        out.push(channels[next][heads[next]]);
        heads[next] += 1;
    }
    out
}

pub fn read_session(path: &Path) -> Result<Vec<SensorRecord>, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    parse_records(&text)
}

pub fn write_records<W: Write>(out: &mut W, records: &[SensorRecord], precision: Precision) -> io::Result<()> {
    writeln!(out, "{RECORD_HEADER}")?;
    let f = |v: f64| precision.format(v);
    for r in records {
        match r.reading {
            Reading::Accel(v) | Reading::Gyro(v) | Reading::Mag(v) => {
                writeln!(out, "{},{},{},{},{}", r.t_ms, r.channel(), f(v.x), f(v.y), f(v.z))?
            }
            Reading::Ambient(a) => writeln!(out, "{},Ambient,{},{},", r.t_ms, f(a.temp_f), f(a.rh_pct))?,
        }
    }
    Ok(())
}
