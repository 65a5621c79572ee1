//! Record-at-a-time engine running every stage in timestamp order.

use alloc::vec::Vec;

use thiserror::Error;

use crate::activity::{ActivityError, WindowFeatures};
use crate::ambient::{evaluate_ambient, AmbientVerdict};
use crate::monitor::{monitor_step, session_summary, Alert, SessionState, SessionSummary};
use crate::posture::{PostureError, PostureEstimate, PostureTracker};
use crate::preprocess::{AmbientSnapshot, HighPass, NonFiniteSample, Window, WindowAssembler};
use crate::sensor_model::{
    AmbientReading, ConfigError, EngineConfig, Reading, RecordError, SensorRecord, StreamValidator, Vec3,
};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Sample(#[from] NonFiniteSample),
    #[error(transparent)]
    Activity(#[from] ActivityError),
}

/// Everything known about one completed window.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowReport {
    pub features: WindowFeatures,
    pub posture: Option<PostureEstimate>,
    pub ambient: Option<AmbientReading>,
    pub verdict: Option<AmbientVerdict>,
    pub ambient_stale: bool,
    pub alerts: Vec<Alert>,
}

/// Streaming engine. Feed records in merged timestamp order with
/// [`push`](Self::push), then call [`flush`](Self::flush) at end of input.
#[derive(Clone, Debug)]
pub struct Engine {
    config: EngineConfig,
    validator: StreamValidator,
    high_pass: HighPass,
    assembler: WindowAssembler,
    posture: PostureTracker,
    session: SessionState,
    last_accel: Option<Vec3>,
    last_mag: Option<Vec3>,
    gyro_seen: bool,
    zero_accel_skips: u64,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self, EngineError> {
        config.validate()?;
        Ok(Self {
            validator: StreamValidator::new(),
            high_pass: HighPass::new(config.filter_alpha),
            assembler: WindowAssembler::new(&config),
            posture: PostureTracker::new(config.fusion_weight, config.vertical_axis, config.posture),
            session: SessionState::new(config.window_ms),
            last_accel: None,
            last_mag: None,
            gyro_seen: false,
            zero_accel_skips: 0,
            config,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn session(&self) -> &SessionState {
        &self.session
    }

    pub fn session_mut(&mut self) -> &mut SessionState {
        &mut self.session
    }

    /// Orientation updates skipped because the accelerometer read exactly zero.
    pub fn zero_accel_skips(&self) -> u64 {
        self.zero_accel_skips
    }

    /// Processes one record; returns reports of windows that closed on the way.
    pub fn push(&mut self, record: SensorRecord) -> Result<Vec<WindowReport>, EngineError> {
        let record = self.validator.accept(record)?;
        let t = record.t_ms;
        let mut reports = Vec::new();
        if let Some(w) = self.assembler.advance(t) {
            reports.push(self.close_window(w)?);
        }

        match record.reading {
            Reading::Accel(raw) => {
                let sample = self.high_pass.step(t, raw)?;
                self.last_accel = Some(raw);
                if !self.gyro_seen {
                    self.update_posture(t, Vec3::ZERO);
                }
                if let Some(w) = self.assembler.push(sample) {
                    reports.push(self.close_window(w)?);
                }
            }
            Reading::Gyro(rate) => {
                self.gyro_seen = true;
                self.update_posture(t, rate);
            }
            Reading::Mag(m) => self.last_mag = Some(m),
            Reading::Ambient(reading) => {
                let verdict = evaluate_ambient(t, reading, &self.config.ambient);
                self.session.record_ambient(&verdict);
                self.assembler.observe_ambient(AmbientSnapshot { t_ms: t, reading });
            }
        }
        Ok(reports)
    }

    /// Closes out the stream. Partial trailing windows are counted, not classified.
    pub fn flush(&mut self) -> Result<Vec<WindowReport>, EngineError> {
        let mut out = Vec::new();
        for w in self.assembler.flush() {
            if w.partial {
                self.session.note_partial_window();
            } else {
                out.push(self.close_window(w)?);
            }
        }
        Ok(out)
    }

    pub fn summary(&self) -> SessionSummary {
        session_summary(&self.session)
    }

    fn update_posture(&mut self, t: u64, gyro: Vec3) {
        let Some(accel) = self.last_accel else { return };
        match self.posture.update(t, accel, gyro, self.last_mag) {
            Ok(est) => self.assembler.observe_tilt(est),
            Err(PostureError::ZeroAccelVector) => self.zero_accel_skips += 1,
            // timestamps are validated per channel, but accel-driven and
            // gyro-driven updates can share a millisecond
            Err(PostureError::NonPositiveStep) => {}
            Err(PostureError::NonUnitVector(_)) => unreachable!("fusion renormalizes every step"),
        }
    }

    fn close_window(&mut self, window: Window) -> Result<WindowReport, EngineError> {
        let features = WindowFeatures::from_window(&window)?;
        let verdict = window.ambient.map(|a| evaluate_ambient(a.t_ms, a.reading, &self.config.ambient));
        let ambient_stale =
            window.ambient.is_some_and(|a| features.close_ms.saturating_sub(a.t_ms) > self.config.ambient_stale_ms);
        if ambient_stale {
            self.session.note_stale_ambient();
        }
        let alerts =
            monitor_step(&mut self.session, &features, window.tilt.as_ref(), verdict.as_ref(), &self.config.rules);
        Ok(WindowReport {
            features,
            posture: window.tilt,
            ambient: window.ambient.map(|a| a.reading),
            verdict,
            ambient_stale,
            alerts,
        })
    }
}

/// Runs a whole record stream through a fresh engine.
pub fn run_session<I>(config: EngineConfig, records: I) -> Result<(Vec<WindowReport>, SessionSummary), EngineError>
where
    I: IntoIterator<Item = SensorRecord>,
{
    let mut engine = Engine::new(config)?;
    let mut reports = Vec::new();
    for r in records {
        reports.extend(engine.push(r)?);
    }
    reports.extend(engine.flush()?);
    Ok((reports, engine.summary()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitor::AlertKind;
    use crate::sensor_model::{ActivityLevel, PostureClass};
    use crate::synth::{generate, ActivityProfile, AmbientKey, Bout, BoutTarget, TiltKey};
    use alloc::vec;

    fn profile(bouts: Vec<Bout>) -> ActivityProfile {
        ActivityProfile::new(11, bouts)
    }

    #[test]
    fn rejects_out_of_order_records() {
        let mut e = Engine::new(EngineConfig::default()).unwrap();
        e.push(SensorRecord::new(200, Reading::Accel(Vec3::new(0.0, 9.8, 0.0)))).unwrap();
        let err = e.push(SensorRecord::new(200, Reading::Accel(Vec3::new(0.0, 9.8, 0.0)))).unwrap_err();
        assert!(matches!(err, EngineError::Record(RecordError::NonMonotonicTimestamp { .. })));
    }

    #[test]
    fn accel_only_stream_still_gets_posture() {
        let records = (0..50).map(|i| SensorRecord::new(i * 200, Reading::Accel(Vec3::new(0.0, 0.0, 9.81))));
        let (reports, summary) = run_session(EngineConfig::default(), records).unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[1].posture.unwrap().posture, PostureClass::Lying);
        assert_eq!(summary.windows, 2);
        assert_eq!(summary.partial_windows, 0);
    }

    #[test]
    fn partial_tail_is_counted() {
        let records = (0..30).map(|i| SensorRecord::new(i * 200, Reading::Accel(Vec3::new(0.0, 9.81, 0.0))));
        let (reports, summary) = run_session(EngineConfig::default(), records).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(summary.partial_windows, 1);
    }

    #[test]
    fn ambient_step_gives_one_episode() {
        let mut b = Bout::new(BoutTarget::Level(ActivityLevel::Low), 120_000);
        b.ambient.push(AmbientKey { at_ms: 60_000, reading: AmbientReading { temp_f: 85.0, rh_pct: 40.0 } });
        let session = generate(&profile(vec![b]), &EngineConfig::default()).unwrap();
        let (_, summary) = run_session(EngineConfig::default(), session.records).unwrap();
        assert_eq!(summary.ambient_episodes.len(), 1);
        assert_eq!(summary.ambient_episodes[0].start_ms, 60_000);
    }

    #[test]
    fn synthetic_labels_round_trip() {
        let mut lean = Bout::new(BoutTarget::Level(ActivityLevel::Sedentary), 60_000);
        lean.tilt.push(TiltKey { at_ms: 10_000, tilt_deg: 40.0 });
        let bouts = vec![
            Bout::new(BoutTarget::Level(ActivityLevel::Low), 60_000),
            Bout::new(BoutTarget::Level(ActivityLevel::Moderate), 60_000),
            Bout::new(BoutTarget::Level(ActivityLevel::Vigorous), 60_000),
            lean,
        ];
        let config = EngineConfig::default();
        let session = generate(&profile(bouts), &config).unwrap();
        let (reports, summary) = run_session(config, session.records).unwrap();
        assert_eq!(reports.len(), session.truth.len());
        let steady: Vec<_> = reports.iter().zip(&session.truth).filter(|(_, t)| !t.transition).collect();
        let agree = steady.iter().filter(|(r, t)| r.features.level == t.level).count();
        assert!(agree * 100 >= steady.len() * 95, "{agree}/{}", steady.len());
        let posture_agree = steady.iter().filter(|(r, t)| r.posture.map(|p| p.posture) == Some(t.posture)).count();
        assert_eq!(posture_agree, steady.len());
        assert!(summary.alerts.iter().any(|a| a.kind() == AlertKind::PostExertionLean));
    }

    #[test]
    fn sustained_vigorous_raises_one_alert() {
        let session = generate(
            &profile(vec![Bout::new(BoutTarget::Level(ActivityLevel::Vigorous), 660_000)]),
            &EngineConfig::default(),
        )
        .unwrap();
        let (_, summary) = run_session(EngineConfig::default(), session.records).unwrap();
        let kinds: Vec<_> = summary.alerts.iter().map(|a| a.kind()).collect();
        assert_eq!(kinds, [AlertKind::VigorousDuration]);
    }
}
