//! Session state, warning rules and the session summary.
//!
//! Three independent, edge-triggered rules:
//!
//! * `VigorousDuration` fires once when cumulative vigorous time reaches
//!   `vigorous_cum_ms`; it re-arms only after
//!   [`SessionState::reset_vigorous_cumulative`].
//! * `AdverseAmbientExertion` fires when the window level is at least
//!   `adverse_exertion_min_level` while the ambient snapshot has been out of
//!   band for `adverse_ambient_consecutive_windows` windows in a row. It
//!   re-arms once that condition stops holding.
//! * `PostExertionLean` fires when the posture enters Leaning or Lying within
//!   `post_exertion_lean_window_ms` of the close of an earlier vigorous window.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::activity::{format_duration, LevelCounts, LevelLedger, WindowFeatures};
use crate::ambient::{AmbientVerdict, EpisodeTracker, OutOfBandEpisode};
use crate::posture::PostureEstimate;
use crate::sensor_model::{ActivityLevel, ConfigError, PostureClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorRules {
    pub vigorous_cum_ms: u64,
    pub adverse_exertion_min_level: ActivityLevel,
    pub adverse_ambient_consecutive_windows: u32,
    pub post_exertion_lean_window_ms: u64,
}

impl Default for MonitorRules {
    fn default() -> Self {
        Self {
            vigorous_cum_ms: 600_000,
            adverse_exertion_min_level: ActivityLevel::Moderate,
            adverse_ambient_consecutive_windows: 2,
            post_exertion_lean_window_ms: 60_000,
        }
    }
}

impl MonitorRules {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.vigorous_cum_ms == 0 {
            return Err(ConfigError::MonitorRule("vigorous_cum_ms"));
        }
        if self.adverse_ambient_consecutive_windows == 0 {
            return Err(ConfigError::MonitorRule("adverse_ambient_consecutive_windows"));
        }
        if self.post_exertion_lean_window_ms == 0 {
            return Err(ConfigError::MonitorRule("post_exertion_lean_window_ms"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlertKind {
    VigorousDuration,
    AdverseAmbientExertion,
    PostExertionLean,
}

impl AlertKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AlertKind::VigorousDuration => "VigorousDuration",
            AlertKind::AdverseAmbientExertion => "AdverseAmbientExertion",
            AlertKind::PostExertionLean => "PostExertionLean",
        }
    }
}

impl fmt::Display for AlertKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kind-specific trigger context.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AlertDetail {
    VigorousDuration { cumulative_ms: u64 },
    AdverseAmbientExertion { verdict: AmbientVerdict, consecutive_windows: u32 },
    PostExertionLean { tilt_deg: f64, posture: PostureClass, since_vigorous_ms: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    pub t_ms: u64,
    pub window_index: u64,
    pub level: ActivityLevel,
    pub detail: AlertDetail,
}

impl Alert {
    pub fn kind(&self) -> AlertKind {
        match self.detail {
            AlertDetail::VigorousDuration { .. } => AlertKind::VigorousDuration,
            AlertDetail::AdverseAmbientExertion { .. } => AlertKind::AdverseAmbientExertion,
            AlertDetail::PostExertionLean { .. } => AlertKind::PostExertionLean,
        }
    }
}

/// Window counts per posture class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostureCounts {
    pub upright: u64,
    pub leaning: u64,
    pub lying: u64,
    pub inverted: u64,
    /// Windows closed before any orientation estimate existed.
    pub unknown: u64,
}

impl PostureCounts {
    fn record(&mut self, posture: Option<PostureClass>) {
        let slot = match posture {
            Some(PostureClass::Upright) => &mut self.upright,
            Some(PostureClass::Leaning) => &mut self.leaning,
            Some(PostureClass::Lying) => &mut self.lying,
            Some(PostureClass::Inverted) => &mut self.inverted,
            None => &mut self.unknown,
        };
        *slot += 1;
    }
}

fn is_lean(p: Option<PostureClass>) -> bool {
    matches!(p, Some(PostureClass::Leaning | PostureClass::Lying))
}

/// Everything accumulated over a session.
#[derive(Clone, Debug)]
pub struct SessionState {
    ledger: LevelLedger,
    alerts: Vec<Alert>,
    vigorous_cum_ms: u64,
    vigorous_armed: bool,
    out_of_band_run: u32,
    adverse_active: bool,
    last_vigorous_close_ms: Option<u64>,
    prev_posture: Option<PostureClass>,
    posture_counts: PostureCounts,
    episodes: Vec<OutOfBandEpisode>,
    episode_tracker: EpisodeTracker,
    degraded_windows: u64,
    stale_ambient_windows: u64,
    partial_windows: u64,
}

impl SessionState {
    pub fn new(window_ms: u64) -> Self {
        Self {
            ledger: LevelLedger::new(window_ms),
            alerts: Vec::new(),
            vigorous_cum_ms: 0,
            vigorous_armed: true,
            out_of_band_run: 0,
            adverse_active: false,
            last_vigorous_close_ms: None,
            prev_posture: None,
            posture_counts: PostureCounts::default(),
            episodes: Vec::new(),
            episode_tracker: EpisodeTracker::new(),
            degraded_windows: 0,
            stale_ambient_windows: 0,
            partial_windows: 0,
        }
    }

    pub fn ledger(&self) -> &LevelLedger {
        &self.ledger
    }

    pub fn alerts(&self) -> &[Alert] {
        &self.alerts
    }

    pub fn vigorous_cumulative_ms(&self) -> u64 {
        self.vigorous_cum_ms
    }

    /// Clears the cumulative vigorous counter and re-arms its alert.
    pub fn reset_vigorous_cumulative(&mut self) {
        self.vigorous_cum_ms = 0;
        self.vigorous_armed = true;
    }

    /// Feeds one raw ambient verdict into the episode tracker.
    pub fn record_ambient(&mut self, verdict: &AmbientVerdict) {
        self.episodes.extend(self.episode_tracker.push(verdict));
    }

    pub fn note_stale_ambient(&mut self) {
        self.stale_ambient_windows += 1;
    }

    pub fn note_partial_window(&mut self) {
        self.partial_windows += 1;
    }

    /// Closed episodes followed by the one still open, if any.
    pub fn episodes(&self) -> Vec<OutOfBandEpisode> {
        let mut out = self.episodes.clone();
        out.extend(self.episode_tracker.open_episode().copied());
        out
    }
}

/// Accounts one full window and evaluates the warning rules against it.
///
/// `posture` and `ambient` are the snapshots taken when the window closed.
pub fn monitor_step(
    session: &mut SessionState,
    window: &WindowFeatures,
    posture: Option<&PostureEstimate>,
    ambient: Option<&AmbientVerdict>,
    rules: &MonitorRules,
) -> Vec<Alert> {
    let mut fired = Vec::new();
    let window_ms = session.ledger.window_ms();
    session.ledger.update(window);
    session.posture_counts.record(posture.map(|p| p.posture));
    if window.degraded {
        session.degraded_windows += 1;
    }

    let alert = |detail| Alert { t_ms: window.close_ms, window_index: window.index, level: window.level, detail };

    if window.level == ActivityLevel::Vigorous {
        session.vigorous_cum_ms += window_ms;
        if session.vigorous_armed && session.vigorous_cum_ms >= rules.vigorous_cum_ms {
            session.vigorous_armed = false;
            fired.push(alert(AlertDetail::VigorousDuration { cumulative_ms: session.vigorous_cum_ms }));
        }
    }

    match ambient {
        Some(v) if !v.in_band => session.out_of_band_run += 1,
        _ => session.out_of_band_run = 0,
    }
    let adverse = window.level >= rules.adverse_exertion_min_level
        && session.out_of_band_run >= rules.adverse_ambient_consecutive_windows;
    if adverse && !session.adverse_active {
        if let Some(&verdict) = ambient {
            fired.push(alert(AlertDetail::AdverseAmbientExertion {
                verdict,
                consecutive_windows: session.out_of_band_run,
            }));
        }
    }
    session.adverse_active = adverse;

    let current = posture.map(|p| p.posture);
    if is_lean(current) && !is_lean(session.prev_posture) {
        if let (Some(p), Some(vig)) = (posture, session.last_vigorous_close_ms) {
            let since = window.close_ms.saturating_sub(vig);
            if since <= rules.post_exertion_lean_window_ms {
                fired.push(alert(AlertDetail::PostExertionLean {
                    tilt_deg: p.tilt_deg,
                    posture: p.posture,
                    since_vigorous_ms: since,
                }));
            }
        }
    }
    if current.is_some() {
        session.prev_posture = current;
    }
    if window.level == ActivityLevel::Vigorous {
        session.last_vigorous_close_ms = Some(window.close_ms);
    }

    session.alerts.extend_from_slice(&fired);
    fired
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: ActivityLevel,
    pub windows: u64,
    pub duration_ms: u64,
    /// `HH:MM:SS`
    pub duration: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub window_ms: u64,
    pub windows: u64,
    pub degraded_windows: u64,
    pub stale_ambient_windows: u64,
    pub partial_windows: u64,
    pub current_level: Option<ActivityLevel>,
    pub levels: Vec<LevelSummary>,
    /// Hour of session → windows per level.
    pub hourly: BTreeMap<u64, LevelCounts>,
    pub posture_occupancy: PostureCounts,
    pub ambient_episodes: Vec<OutOfBandEpisode>,
    pub alerts: Vec<Alert>,
}

pub fn session_summary(session: &SessionState) -> SessionSummary {
    let ledger = &session.ledger;
    SessionSummary {
        window_ms: ledger.window_ms(),
        windows: ledger.total_windows(),
        degraded_windows: session.degraded_windows,
        stale_ambient_windows: session.stale_ambient_windows,
        partial_windows: session.partial_windows,
        current_level: ledger.current_level(),
        levels: ActivityLevel::ALL
            .into_iter()
            .map(|level| LevelSummary {
                level,
                windows: ledger.counter(level),
                duration_ms: ledger.duration_ms(level),
                duration: format_duration(ledger.duration_ms(level)),
            })
            .collect(),
        hourly: ledger.hourly().clone(),
        posture_occupancy: session.posture_counts,
        ambient_episodes: session.episodes(),
        alerts: session.alerts.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activity::{classify_level, extrapolate_ee};
    use crate::ambient::{evaluate_ambient, AmbientBand};
    use crate::sensor_model::AmbientReading;
    use proptest::prelude::*;

    const SMA: [f64; 4] = [0.5, 5.0, 13.5, 25.0];

    fn features(index: u64, level: ActivityLevel) -> WindowFeatures {
        let sma = SMA[level.index()];
        let start_ms = index * 5000;
        WindowFeatures {
            index,
            start_ms,
            end_ms: start_ms + 5000,
            close_ms: start_ms + 4800,
            sma,
            ee_vo2: extrapolate_ee(sma).unwrap(),
            level: classify_level(sma),
            degraded: false,
        }
    }

    fn upright(t_ms: u64) -> PostureEstimate {
        PostureEstimate { t_ms, tilt_deg: 5.0, posture: PostureClass::Upright }
    }

    fn ambient(t_ms: u64, temp_f: f64) -> AmbientVerdict {
        evaluate_ambient(t_ms, AmbientReading { temp_f, rh_pct: 40.0 }, &AmbientBand::default())
    }

    fn run(levels: &[ActivityLevel], rules: &MonitorRules) -> SessionState {
        let mut s = SessionState::new(5000);
        for (i, &l) in levels.iter().enumerate() {
            let f = features(i as u64, l);
            monitor_step(&mut s, &f, Some(&upright(f.close_ms)), Some(&ambient(f.start_ms, 72.0)), rules);
        }
        s
    }

    #[test]
    fn vigorous_ten_minutes_fires_once() {
        let rules = MonitorRules::default();
        let mut s = SessionState::new(5000);
        let mut hits = Vec::new();
        for i in 0..200 {
            let f = features(i, ActivityLevel::Vigorous);
            let fired = monitor_step(&mut s, &f, Some(&upright(f.close_ms)), Some(&ambient(f.start_ms, 72.0)), &rules);
            hits.extend(fired.iter().map(|a| (i + 1, a.kind())));
        }
        assert_eq!(hits, [(120, AlertKind::VigorousDuration)]);
        assert_eq!(s.alerts()[0].detail, AlertDetail::VigorousDuration { cumulative_ms: 600_000 });
    }

    #[test]
    fn vigorous_rearms_after_reset() {
        let rules = MonitorRules { vigorous_cum_ms: 10_000, ..MonitorRules::default() };
        let mut s = SessionState::new(5000);
        let mut count = 0;
        for i in 0..10 {
            let f = features(i, ActivityLevel::Vigorous);
            count += monitor_step(&mut s, &f, None, None, &rules).len();
            if i == 4 {
                s.reset_vigorous_cumulative();
            }
        }
        assert_eq!(count, 2);
    }

    #[test]
    fn adverse_ambient_fires_at_second_window() {
        let rules = MonitorRules::default();
        let mut s = SessionState::new(5000);
        let f0 = features(0, ActivityLevel::Moderate);
        let f1 = features(1, ActivityLevel::Moderate);
        assert!(monitor_step(&mut s, &f0, Some(&upright(4800)), Some(&ambient(0, 60.0)), &rules).is_empty());
        let fired = monitor_step(&mut s, &f1, Some(&upright(9800)), Some(&ambient(5000, 60.0)), &rules);
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].kind(), AlertKind::AdverseAmbientExertion);
        assert_eq!(fired[0].window_index, 1);
        // sustained condition does not repeat
        let f2 = features(2, ActivityLevel::Moderate);
        assert!(monitor_step(&mut s, &f2, None, Some(&ambient(10_000, 60.0)), &rules).is_empty());
    }

    #[test]
    fn adverse_ambient_needs_exertion() {
        let rules = MonitorRules::default();
        let mut s = SessionState::new(5000);
        for i in 0..5 {
            let f = features(i, ActivityLevel::Low);
            assert!(monitor_step(&mut s, &f, None, Some(&ambient(f.start_ms, 60.0)), &rules).is_empty());
        }
    }

    #[test]
    fn benign_session_is_silent() {
        let s = run(&[ActivityLevel::Sedentary; 500], &MonitorRules::default());
        assert!(s.alerts().is_empty());
    }

    #[test]
    fn lean_after_vigorous() {
        let rules = MonitorRules::default();
        let mut s = SessionState::new(5000);
        let lean = |t| PostureEstimate { t_ms: t, tilt_deg: 40.0, posture: PostureClass::Leaning };
        let f0 = features(0, ActivityLevel::Vigorous);
        assert!(monitor_step(&mut s, &f0, Some(&upright(4800)), None, &rules).is_empty());
        let f1 = features(1, ActivityLevel::Low);
        let fired = monitor_step(&mut s, &f1, Some(&lean(9800)), None, &rules);
        assert_eq!(fired.len(), 1);
        assert_eq!(
            fired[0].detail,
            AlertDetail::PostExertionLean { tilt_deg: 40.0, posture: PostureClass::Leaning, since_vigorous_ms: 5000 }
        );
        // staying lean does not re-fire
        let f2 = features(2, ActivityLevel::Low);
        assert!(monitor_step(&mut s, &f2, Some(&lean(14_800)), None, &rules).is_empty());
    }

    #[test]
    fn lean_long_after_vigorous_is_ignored() {
        let rules = MonitorRules::default();
        let mut levels = alloc::vec![ActivityLevel::Vigorous];
        levels.extend([ActivityLevel::Sedentary; 13]);
        let mut s = run(&levels, &rules);
        let f = features(14, ActivityLevel::Sedentary);
        let lean = PostureEstimate { t_ms: f.close_ms, tilt_deg: 40.0, posture: PostureClass::Leaning };
        assert!(monitor_step(&mut s, &f, Some(&lean), None, &rules).is_empty());
    }

    #[test]
    fn empty_summary() {
        let summary = session_summary(&SessionState::new(5000));
        assert_eq!(summary.windows, 0);
        assert!(summary.levels.iter().all(|l| l.windows == 0 && l.duration == "00:00:00"));
        assert!(summary.hourly.is_empty() && summary.alerts.is_empty() && summary.ambient_episodes.is_empty());
        assert_eq!(summary.current_level, None);
    }

    #[test]
    fn sedentary_summary() {
        let summary = session_summary(&run(&[ActivityLevel::Sedentary; 25], &MonitorRules::default()));
        let durations: Vec<_> = summary.levels.iter().map(|l| l.duration.as_str()).collect();
        assert_eq!(durations, ["00:02:05", "00:00:00", "00:00:00", "00:00:00"]);
        assert_eq!(summary.posture_occupancy.upright, 25);
    }

    #[test]
    fn two_hour_session_has_two_hour_keys() {
        let summary = session_summary(&run(&[ActivityLevel::Low; 1440], &MonitorRules::default()));
        assert_eq!(summary.hourly.keys().copied().collect::<Vec<_>>(), [0, 1]);
        assert_eq!(summary.hourly[&1].low, 720);
    }

    #[test]
    fn open_episode_is_reported() {
        let mut s = SessionState::new(5000);
        s.record_ambient(&ambient(0, 72.0));
        s.record_ambient(&ambient(1000, 90.0));
        assert_eq!(s.episodes().len(), 1);
        s.record_ambient(&ambient(2000, 72.0));
        s.record_ambient(&ambient(3000, 50.0));
        let eps = session_summary(&s).ambient_episodes;
        assert_eq!(eps.iter().map(|e| e.start_ms).collect::<Vec<_>>(), [1000, 3000]);
    }

    fn level_strategy() -> impl Strategy<Value = ActivityLevel> {
        prop::sample::select(ActivityLevel::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn alerts_are_deterministic(levels in prop::collection::vec(level_strategy(), 0..300)) {
            let rules = MonitorRules { vigorous_cum_ms: 50_000, ..MonitorRules::default() };
            let (a, b) = (run(&levels, &rules), run(&levels, &rules));
            prop_assert_eq!(a.alerts(), b.alerts());
        }

        #[test]
        fn larger_vigorous_threshold_never_adds_alerts(
            levels in prop::collection::vec(level_strategy(), 0..300),
            a in 1u64..400_000,
            b in 1u64..400_000,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let count = |t| run(&levels, &MonitorRules { vigorous_cum_ms: t, ..MonitorRules::default() })
                .alerts().iter().filter(|x| x.kind() == AlertKind::VigorousDuration).count();
            prop_assert!(count(hi) <= count(lo));
        }
    }
}
