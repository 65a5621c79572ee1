//! Ground-truth sidecar for generated sessions.
//!
//! Columns: `index,start_ms,bout,level,target_sma,tilt_deg,posture,in_band,transition`.
//! `transition` marks windows whose content straddles a bout or posture
//! change; they are excluded from label-agreement scoring.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use eirc_core::synth::TruthWindow;

use crate::features::FeatureRow;
use crate::Precision;

pub const TRUTH_HEADER: &str = "index,start_ms,bout,level,target_sma,tilt_deg,posture,in_band,transition";

/// `session.csv` → `session.truth.csv`.
pub fn truth_path(records: &Path) -> PathBuf {
    records.with_extension("truth.csv")
}

pub fn write_truth<W: Write>(out: &mut W, truth: &[TruthWindow], precision: Precision) -> io::Result<()> {
    writeln!(out, "{TRUTH_HEADER}")?;
    for t in truth {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            t.index,
            t.start_ms,
            t.bout,
            t.level,
            precision.format(t.target_sma),
            precision.format(t.tilt_deg),
            t.posture,
            t.in_band,
            t.transition
        )?;
    }
    Ok(())
}

/// Level and posture agreement between a replay and its ground truth over
/// non-transition windows.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Agreement {
    pub scored: usize,
    pub level_matches: usize,
    pub posture_matches: usize,
}

impl Agreement {
    pub fn level_rate(&self) -> f64 {
        if self.scored == 0 {
            return 1.0;
        }
        self.level_matches as f64 / self.scored as f64
    }
}

pub fn agreement(truth: &[TruthWindow], rows: &[FeatureRow]) -> Agreement {
    let mut a = Agreement::default();
    for (t, r) in truth.iter().zip(rows).filter(|(t, _)| !t.transition) {
        debug_assert_eq!(t.index, r.index);
        a.scored += 1;
        a.level_matches += usize::from(t.level == r.level);
        a.posture_matches += usize::from(Some(t.posture) == r.posture);
    }
    a
}
