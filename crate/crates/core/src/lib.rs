//! Streaming activity-level, energy-expenditure, posture and ambient-comfort
//! monitoring over trunk-worn smartphone sensor records.
//!
//! The crate is `no_std` (with `alloc`) and performs no IO. Records go in
//! through [`pipeline::Engine`]; per-window reports, alerts and a session
//! summary come out.
//!
//! Stages:
//!
//! - [`preprocess`]: gravity high-pass and tumbling windows
//! - [`activity`]: SMA, VO₂ extrapolation, level classification, durations
//! - [`posture`]: complementary orientation filter and tilt classes
//! - [`ambient`]: temperature/humidity comfort band and episodes
//! - [`monitor`]: warning rules and the session summary
//! - [`synth`]: seeded synthetic sessions with ground truth

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod activity;
pub mod ambient;
pub mod golden;
pub mod monitor;
pub mod pipeline;
pub mod posture;
pub mod preprocess;
pub mod sensor_model;
pub mod synth;

pub use activity::{classify_level, compute_sma, extrapolate_ee, format_duration, LevelLedger, WindowFeatures};
pub use ambient::{evaluate_ambient, AmbientBand, AmbientVerdict, OutOfBandEpisode, Violations};
pub use monitor::{Alert, AlertDetail, AlertKind, MonitorRules, SessionState, SessionSummary};
pub use pipeline::{run_session, Engine, EngineError, WindowReport};
pub use posture::{PostureEstimate, PostureThresholds};
pub use sensor_model::{
    ActivityLevel, AmbientReading, Axis, Channel, EngineConfig, PostureClass, Reading, SensorRecord, Vec3,
};
