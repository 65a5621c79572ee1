//! Domain types shared by every stage of the pipeline.
//!
//! Axis convention follows a phone strapped to the trunk: `z` points forward,
//! `y` up/down and `x` sideways. Timestamps are milliseconds since session
//! start.

use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ambient::AmbientBand;
use crate::monitor::MonitorRules;
use crate::posture::PostureThresholds;

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.806_65;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    /// Unit vector in the same direction, or `None` for a zero (or non-finite) vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Sum of absolute components.
    pub fn abs_sum(self) -> f64 {
        self.x.abs() + self.y.abs() + self.z.abs()
    }

    pub fn axis(self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    /// Rotates `self` by `angle` radians about the unit vector `axis` (right-hand rule).
    pub fn rotated(self, axis: Vec3, angle: f64) -> Vec3 {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        self * c + axis.cross(self) * s + axis * (axis.dot(self) * (1.0 - c))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn unit(self) -> Vec3 {
        match self {
            Axis::X => Vec3::new(1.0, 0.0, 0.0),
            Axis::Y => Vec3::new(0.0, 1.0, 0.0),
            Axis::Z => Vec3::new(0.0, 0.0, 1.0),
        }
    }
}

/// Sensor channel. The derived order is the tie-break order used when
/// merging channels that share a timestamp.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    Accel,
    Gyro,
    Mag,
    Ambient,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Accel, Channel::Gyro, Channel::Mag, Channel::Ambient];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Accel => "Accel",
            Channel::Gyro => "Gyro",
            Channel::Mag => "Mag",
            Channel::Ambient => "Ambient",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown channel `{0}`")]
pub struct UnknownChannel(pub alloc::string::String);

impl FromStr for Channel {
    type Err = UnknownChannel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Channel::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| UnknownChannel(s.into()))
    }
}

/// Temperature (°F) and relative humidity (%) from the ambient sensors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientReading {
    pub temp_f: f64,
    pub rh_pct: f64,
}

/// Channel-dependent payload of a [`SensorRecord`].
///
/// Accel in m/s², Gyro in rad/s, Mag in µT.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Reading {
    Accel(Vec3),
    Gyro(Vec3),
    Mag(Vec3),
    Ambient(AmbientReading),
}

impl Reading {
    pub fn channel(&self) -> Channel {
        match self {
            Reading::Accel(_) => Channel::Accel,
            Reading::Gyro(_) => Channel::Gyro,
            Reading::Mag(_) => Channel::Mag,
            Reading::Ambient(_) => Channel::Ambient,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorRecord {
    pub t_ms: u64,
    pub reading: Reading,
}

impl SensorRecord {
    pub fn new(t_ms: u64, reading: Reading) -> Self {
        Self { t_ms, reading }
    }

    pub fn channel(&self) -> Channel {
        self.reading.channel()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RecordError {
    #[error("{channel} timestamp {t_ms} ms does not follow previous {prev_ms} ms")]
    NonMonotonicTimestamp { channel: Channel, t_ms: u64, prev_ms: u64 },
    #[error("{channel} value {field} = {value} out of range")]
    OutOfRangeValue { channel: Channel, field: &'static str, value: f64 },
    #[error("{channel} value {field} is not finite")]
    NonFiniteValue { channel: Channel, field: &'static str },
}

/// Accepts `rec` iff its values are in range and it strictly follows `prev_t`,
/// the previous timestamp seen on the same channel.
pub fn validate_record(rec: SensorRecord, prev_t: Option<u64>) -> Result<SensorRecord, RecordError> {
    let channel = rec.channel();
    let finite = |field: &'static str, v: f64| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(RecordError::NonFiniteValue { channel, field })
        }
    };
    match rec.reading {
        Reading::Accel(v) | Reading::Gyro(v) | Reading::Mag(v) => {
            finite("x", v.x)?;
            finite("y", v.y)?;
            finite("z", v.z)?;
        }
        Reading::Ambient(a) => {
            finite("temp_f", a.temp_f)?;
            finite("rh_pct", a.rh_pct)?;
            if !(0.0..=100.0).contains(&a.rh_pct) {
                return Err(RecordError::OutOfRangeValue { channel, field: "rh_pct", value: a.rh_pct });
            }
        }
    }
    if let Some(prev) = prev_t {
        if rec.t_ms <= prev {
            return Err(RecordError::NonMonotonicTimestamp { channel, t_ms: rec.t_ms, prev_ms: prev });
        }
    }
    Ok(rec)
}

/// Tracks the last accepted timestamp per channel.
#[derive(Clone, Debug, Default)]
pub struct StreamValidator {
    last: [Option<u64>; 4],
}

impl StreamValidator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn accept(&mut self, rec: SensorRecord) -> Result<SensorRecord, RecordError> {
        let slot = &mut self.last[rec.channel().index()];
        let rec = validate_record(rec, *slot)?;
        *slot = Some(rec.t_ms);
        Ok(rec)
    }

    pub fn last_seen(&self, channel: Channel) -> Option<u64> {
        self.last[channel.index()]
    }
}

/// Activity levels in increasing intensity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActivityLevel {
    Sedentary,
    Low,
    Moderate,
    Vigorous,
}

impl ActivityLevel {
    pub const ALL: [ActivityLevel; 4] =
        [ActivityLevel::Sedentary, ActivityLevel::Low, ActivityLevel::Moderate, ActivityLevel::Vigorous];

    pub fn as_str(self) -> &'static str {
        match self {
            ActivityLevel::Sedentary => "Sedentary",
            ActivityLevel::Low => "Low",
            ActivityLevel::Moderate => "Moderate",
            ActivityLevel::Vigorous => "Vigorous",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ActivityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown activity level `{0}`")]
pub struct UnknownLevel(pub alloc::string::String);

impl FromStr for ActivityLevel {
    type Err = UnknownLevel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActivityLevel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownLevel(s.into()))
    }
}

/// Trunk posture classes ordered by tilt from vertical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PostureClass {
    Upright,
    Leaning,
    Lying,
    Inverted,
}

impl PostureClass {
    pub const ALL: [PostureClass; 4] =
        [PostureClass::Upright, PostureClass::Leaning, PostureClass::Lying, PostureClass::Inverted];

    pub fn as_str(self) -> &'static str {
        match self {
            PostureClass::Upright => "Upright",
            PostureClass::Leaning => "Leaning",
            PostureClass::Lying => "Lying",
            PostureClass::Inverted => "Inverted",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PostureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown posture class `{0}`")]
pub struct UnknownPosture(pub alloc::string::String);

impl FromStr for PostureClass {
    type Err = UnknownPosture;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PostureClass::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownPosture(s.into()))
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConfigError {
    #[error("window_ms must be positive")]
    ZeroWindow,
    #[error("samples_per_window must be positive")]
    ZeroSamples,
    #[error("window_ms {window_ms} is not a whole multiple of samples_per_window {samples}")]
    FractionalPeriod { window_ms: u64, samples: usize },
    #[error("{name} = {value} must lie strictly inside (0, 1)")]
    FractionOutOfRange { name: &'static str, value: f64 },
    #[error("posture thresholds must be strictly increasing inside [0, 180]")]
    PostureThresholds,
    #[error("ambient band bounds must satisfy low < high")]
    AmbientBand,
    #[error("monitor rule `{0}` must be positive")]
    MonitorRule(&'static str),
}

/// Everything the streaming engine needs to know up front.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub window_ms: u64,
    pub samples_per_window: usize,
    /// Gravity low-pass coefficient of the high-pass stage.
    pub filter_alpha: f64,
    /// Gyro weight of the complementary orientation filter.
    pub fusion_weight: f64,
    /// Device axis aligned with gravity when the wearer stands upright.
    pub vertical_axis: Axis,
    pub posture: PostureThresholds,
    pub ambient: AmbientBand,
    /// Ambient snapshots older than this at window close are flagged stale.
    pub ambient_stale_ms: u64,
    pub rules: MonitorRules,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            window_ms: 5000,
            samples_per_window: 25,
            filter_alpha: 0.833,
            fusion_weight: 0.98,
            vertical_axis: Axis::Y,
            posture: PostureThresholds::default(),
            ambient: AmbientBand::default(),
            ambient_stale_ms: 300_000,
            rules: MonitorRules::default(),
        }
    }
}

impl EngineConfig {
    /// Nominal spacing between consecutive accelerometer samples.
    pub fn sample_period_ms(&self) -> u64 {
        self.window_ms / self.samples_per_window as u64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.window_ms == 0 {
            return Err(ConfigError::ZeroWindow);
        }
        if self.samples_per_window == 0 {
            return Err(ConfigError::ZeroSamples);
        }
        if !self.window_ms.is_multiple_of(self.samples_per_window as u64) {
            return Err(ConfigError::FractionalPeriod { window_ms: self.window_ms, samples: self.samples_per_window });
        }
        for (name, value) in [("filter_alpha", self.filter_alpha), ("fusion_weight", self.fusion_weight)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(ConfigError::FractionOutOfRange { name, value });
            }
        }
        self.posture.validate()?;
        self.ambient.validate()?;
        self.rules.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accel(t: u64, v: (f64, f64, f64)) -> SensorRecord {
        SensorRecord::new(t, Reading::Accel(Vec3::new(v.0, v.1, v.2)))
    }

    fn ambient(t: u64, temp_f: f64, rh_pct: f64) -> SensorRecord {
        SensorRecord::new(t, Reading::Ambient(AmbientReading { temp_f, rh_pct }))
    }

    #[test]
    fn accepts_increasing_accel() {
        let rec = accel(200, (0.0, 0.0, 9.81));
        assert_eq!(validate_record(rec, Some(0)), Ok(rec));
    }

    #[test]
    fn accepts_in_band_ambient() {
        let rec = ambient(100, 72.0, 40.0);
        assert_eq!(validate_record(rec, None), Ok(rec));
    }

    #[test]
    fn rejects_equal_timestamp() {
        let err = validate_record(accel(100, (0.0, 0.0, 9.81)), Some(100)).unwrap_err();
        assert!(matches!(err, RecordError::NonMonotonicTimestamp { t_ms: 100, prev_ms: 100, .. }));
    }

    #[test]
    fn rejects_humidity_over_100() {
        let err = validate_record(ambient(0, 72.0, 120.0), None).unwrap_err();
        assert!(matches!(err, RecordError::OutOfRangeValue { field: "rh_pct", .. }));
    }

    #[test]
    fn rejects_nan() {
        let err = validate_record(accel(0, (f64::NAN, 0.0, 0.0)), None).unwrap_err();
        assert!(matches!(err, RecordError::NonFiniteValue { channel: Channel::Accel, field: "x" }));
    }

    #[test]
    fn validator_is_per_channel() {
        let mut v = StreamValidator::new();
        v.accept(accel(200, (0.0, 0.0, 9.8))).unwrap();
        // another channel at an earlier time is fine
        v.accept(ambient(100, 70.0, 40.0)).unwrap();
        assert!(v.accept(accel(200, (0.0, 0.0, 9.8))).is_err());
        assert_eq!(v.last_seen(Channel::Accel), Some(200));
    }

    #[test]
    fn default_geometry_is_200ms() {
        let cfg = EngineConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.sample_period_ms(), 200);
        assert_eq!(cfg.window_ms, 5000);
        assert_eq!(cfg.samples_per_window, 25);
    }

    #[test]
    fn rejects_fractional_period() {
        let cfg = EngineConfig { samples_per_window: 24, ..EngineConfig::default() };
        assert!(matches!(cfg.validate(), Err(ConfigError::FractionalPeriod { .. })));
    }

    #[test]
    fn rejects_alpha_outside_unit_interval() {
        let cfg = EngineConfig { filter_alpha: 1.0, ..EngineConfig::default() };
        assert!(matches!(cfg.validate(), Err(ConfigError::FractionOutOfRange { name: "filter_alpha", .. })));
    }

    #[test]
    fn channel_order_is_tie_break_order() {
        assert!(Channel::Accel < Channel::Gyro);
        assert!(Channel::Gyro < Channel::Mag);
        assert!(Channel::Mag < Channel::Ambient);
        assert_eq!("Mag".parse::<Channel>(), Ok(Channel::Mag));
        assert!("mag".parse::<Channel>().is_err());
    }

    #[test]
    fn rotation_about_x() {
        let r = Vec3::new(0.0, 0.0, 1.0).rotated(Axis::X.unit(), core::f64::consts::FRAC_PI_2);
        assert!((r - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-12);
    }
}
