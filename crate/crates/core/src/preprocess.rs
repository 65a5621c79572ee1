//! Gravity removal and tumbling-window assembly.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::posture::PostureEstimate;
use crate::sensor_model::{AmbientReading, EngineConfig, Vec3};

/// Gravity-free acceleration sample, m/s².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearAccelSample {
    pub t_ms: u64,
    pub linear: Vec3,
}

impl LinearAccelSample {
    pub fn new(t_ms: u64, linear: Vec3) -> Self {
        Self { t_ms, linear }
    }
}

/// Running low-pass estimate of gravity. Starts empty and latches onto the
/// first raw sample.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GravityState {
    estimate: Option<Vec3>,
}

impl GravityState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_estimate(estimate: Vec3) -> Self {
        Self { estimate: Some(estimate) }
    }

    pub fn estimate(&self) -> Option<Vec3> {
        self.estimate
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("non-finite accelerometer sample")]
pub struct NonFiniteSample;

/// One step of the gravity high-pass:
/// `gravity <- alpha * gravity + (1 - alpha) * raw`, `linear = raw - gravity`.
pub fn high_pass(raw: Vec3, state: GravityState, alpha: f64) -> Result<(Vec3, GravityState), NonFiniteSample> {
    if !raw.is_finite() {
        return Err(NonFiniteSample);
    }
    let gravity = match state.estimate {
        None => raw,
        Some(g) => g * alpha + raw * (1.0 - alpha),
    };
    Ok((raw - gravity, GravityState::from_estimate(gravity)))
}

/// Streaming wrapper around [`high_pass`].
#[derive(Clone, Debug)]
pub struct HighPass {
    alpha: f64,
    state: GravityState,
}

impl HighPass {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, state: GravityState::new() }
    }

    pub fn step(&mut self, t_ms: u64, raw: Vec3) -> Result<LinearAccelSample, NonFiniteSample> {
        let (linear, state) = high_pass(raw, self.state, self.alpha)?;
        self.state = state;
        Ok(LinearAccelSample::new(t_ms, linear))
    }

    pub fn state(&self) -> GravityState {
        self.state
    }
}

/// Latest ambient reading and when it arrived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientSnapshot {
    pub t_ms: u64,
    pub reading: AmbientReading,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub index: u64,
    pub start_ms: u64,
    pub end_ms: u64,
    pub samples: Vec<LinearAccelSample>,
    pub ambient: Option<AmbientSnapshot>,
    pub tilt: Option<PostureEstimate>,
    /// Trailing window emitted by [`WindowAssembler::flush`] with fewer samples.
    pub partial: bool,
    /// At least one inter-sample gap exceeded three nominal periods.
    pub degraded: bool,
}

impl Window {
    /// Timestamp of the last sample, i.e. when the window was complete.
    pub fn close_ms(&self) -> u64 {
        self.samples.last().map_or(self.start_ms, |s| s.t_ms)
    }
}

/// Groups linear-acceleration samples into non-overlapping windows of
/// `samples_per_window` samples.
///
/// A full window is held back until a later timestamp is observed (through
/// [`advance`](Self::advance) or [`push`](Self::push)) so that ambient and tilt
/// snapshots stamped at or before `end_ms` are attached to it.
#[derive(Clone, Debug)]
pub struct WindowAssembler {
    window_ms: u64,
    samples_per_window: usize,
    max_gap_ms: u64,
    next_index: u64,
    buffer: Vec<LinearAccelSample>,
    buffer_degraded: bool,
    last_t: Option<u64>,
    pending: Option<Window>,
    ambient: Option<AmbientSnapshot>,
    tilt: Option<PostureEstimate>,
}

impl WindowAssembler {
    pub fn new(config: &EngineConfig) -> Self {
        Self {
            window_ms: config.window_ms,
            samples_per_window: config.samples_per_window,
            max_gap_ms: 3 * config.sample_period_ms(),
            next_index: 0,
            buffer: Vec::with_capacity(config.samples_per_window),
            buffer_degraded: false,
            last_t: None,
            pending: None,
            ambient: None,
            tilt: None,
        }
    }

    pub fn observe_ambient(&mut self, snapshot: AmbientSnapshot) {
        self.ambient = Some(snapshot);
    }

    pub fn observe_tilt(&mut self, estimate: PostureEstimate) {
        self.tilt = Some(estimate);
    }

    /// Releases the held window once time has moved past its end.
    pub fn advance(&mut self, now_ms: u64) -> Option<Window> {
        match &self.pending {
            Some(w) if now_ms > w.end_ms => self.release(),
            _ => None,
        }
    }

    /// Adds a sample; may release the previously completed window.
    pub fn push(&mut self, sample: LinearAccelSample) -> Option<Window> {
        let mut released = self.advance(sample.t_ms);
        if let Some(prev) = self.last_t {
            if sample.t_ms.saturating_sub(prev) > self.max_gap_ms {
                self.buffer_degraded = true;
            }
        }
        self.last_t = Some(sample.t_ms);
        self.buffer.push(sample);
        if self.buffer.len() == self.samples_per_window {
            let window = self.take_buffer(false);
            let ready_now = window.close_ms() > window.end_ms;
            // only one window is held; with very dense samples the previous
            // one may still be waiting for its end_ms
            if self.pending.is_some() {
                released = self.release();
            }
            self.pending = Some(window);
            if ready_now && released.is_none() {
                released = self.release();
            }
        }
        released
    }

    /// Emits the held full window and, if samples remain, a partial one.
    pub fn flush(&mut self) -> Vec<Window> {
        let mut out = Vec::new();
        if let Some(w) = self.release() {
            out.push(w);
        }
        if !self.buffer.is_empty() {
            let mut w = self.take_buffer(true);
            w.ambient = self.ambient;
            w.tilt = self.tilt;
            out.push(w);
        }
        out
    }

    fn release(&mut self) -> Option<Window> {
        let mut w = self.pending.take()?;
        w.ambient = self.ambient;
        w.tilt = self.tilt;
        Some(w)
    }

    fn take_buffer(&mut self, partial: bool) -> Window {
        let samples = core::mem::replace(&mut self.buffer, Vec::with_capacity(self.samples_per_window));
        let start_ms = samples[0].t_ms;
        let w = Window {
            index: self.next_index,
            start_ms,
            end_ms: start_ms + self.window_ms,
            samples,
            ambient: None,
            tilt: None,
            partial,
            degraded: self.buffer_degraded,
        };
        self.next_index += 1;
        self.buffer_degraded = false;
        w
    }
}

/// Assembles a complete stream, flushing at the end.
pub fn window_assemble<I>(samples: I, config: &EngineConfig) -> Vec<Window>
where
    I: IntoIterator<Item = LinearAccelSample>,
{
    let mut asm = WindowAssembler::new(config);
    let mut out: Vec<Window> = samples.into_iter().filter_map(|s| asm.push(s)).collect();
    out.extend(asm.flush());
    out
}
