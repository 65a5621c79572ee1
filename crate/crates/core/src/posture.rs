//! Orientation fusion and trunk posture.
//!
//! The orientation state tracks the direction of the accelerometer's
//! at-rest reading (the "gravity direction") in the device frame. Tilt is the
//! angle between that direction and the configured vertical device axis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sensor_model::{Axis, ConfigError, PostureClass, Vec3};

const UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum PostureError {
    #[error("accelerometer vector is zero; orientation left unchanged")]
    ZeroAccelVector,
    #[error("vector norm {0} is not 1")]
    NonUnitVector(f64),
    #[error("time step must be positive")]
    NonPositiveStep,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientationState {
    /// Unit gravity direction in the device frame; `None` until the first accel sample.
    gravity: Option<Vec3>,
    /// Tilt-compensated magnetic heading, degrees in `[0, 360)`. Informational.
    pub heading_deg: f64,
    pub last_t_ms: Option<u64>,
    /// Gyro weight `w`; the accelerometer gets `1 - w`.
    pub weight: f64,
}

impl OrientationState {
    pub fn new(weight: f64) -> Self {
        Self { gravity: None, heading_deg: 0.0, last_t_ms: None, weight }
    }

    /// State with a known gravity direction (normalized here).
    pub fn with_gravity(gravity: Vec3, weight: f64) -> Result<Self, PostureError> {
        let g = gravity.normalized().ok_or(PostureError::ZeroAccelVector)?;
        Ok(Self { gravity: Some(g), ..Self::new(weight) })
    }

    pub fn gravity(&self) -> Option<Vec3> {
        self.gravity
    }
}

/// One complementary-filter step.
///
/// The gravity estimate is rotated by the gyro rate over `dt_s`, then blended
/// toward the normalized accelerometer vector with weight `1 - w` and
/// renormalized. An uninitialized state latches onto the accelerometer.
pub fn fuse_step(
    state: OrientationState,
    accel: Vec3,
    gyro: Vec3,
    mag: Option<Vec3>,
    dt_s: f64,
) -> Result<OrientationState, PostureError> {
    if dt_s.is_nan() || dt_s <= 0.0 {
        return Err(PostureError::NonPositiveStep);
    }
    let measured = accel.normalized().ok_or(PostureError::ZeroAccelVector)?;
    let gravity = match state.gravity {
        None => measured,
        Some(g) => {
            let rate = gyro.norm();
            let propagated = match gyro.normalized() {
                Some(axis) => g.rotated(axis, rate * dt_s),
                None => g,
            };
            let w = state.weight;
            // antipodal propagated/measured vectors cannot be blended; keep the gyro
            (propagated * w + measured * (1.0 - w)).normalized().unwrap_or(propagated)
        }
    };
    let heading_deg = mag.and_then(|m| tilt_compensated_heading(gravity, m)).unwrap_or(state.heading_deg);
    Ok(OrientationState { gravity: Some(gravity), heading_deg, last_t_ms: state.last_t_ms, weight: state.weight })
}

/// Heading of the horizontal magnetic field relative to the device's forward
/// (`z`) axis projected onto the horizontal plane.
fn tilt_compensated_heading(up: Vec3, mag: Vec3) -> Option<f64> {
    let horizontal = |v: Vec3| v - up * up.dot(v);
    let forward = horizontal(Axis::Z.unit()).normalized()?;
    let m = horizontal(mag).normalized()?;
    let right = up.cross(forward);
    let deg = libm::atan2(m.dot(right), m.dot(forward)).to_degrees();
    Some(if deg < 0.0 { deg + 360.0 } else { deg })
}

/// Angle between the unit gravity direction and the vertical device axis, degrees.
pub fn tilt_from_gravity(gravity_unit: Vec3, vertical: Axis) -> Result<f64, PostureError> {
    let n = gravity_unit.norm();
    if n.is_nan() || (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(PostureError::NonUnitVector(n));
    }
    let c = gravity_unit.axis(vertical).clamp(-1.0, 1.0);
    Ok(libm::acos(c).to_degrees())
}

/// Lower bounds (degrees) of Leaning, Lying and Inverted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostureThresholds {
    pub leaning_deg: f64,
    pub lying_deg: f64,
    pub inverted_deg: f64,
}

impl Default for PostureThresholds {
    fn default() -> Self {
        Self { leaning_deg: 20.0, lying_deg: 60.0, inverted_deg: 120.0 }
    }
}

impl PostureThresholds {
    pub fn as_array(&self) -> [f64; 3] {
        [self.leaning_deg, self.lying_deg, self.inverted_deg]
    }

    pub fn from_array(a: [f64; 3]) -> Result<Self, ConfigError> {
        let t = Self { leaning_deg: a[0], lying_deg: a[1], inverted_deg: a[2] };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let [a, b, c] = self.as_array();
        if 0.0 <= a && a < b && b < c && c <= 180.0 {
            Ok(())
        } else {
            Err(ConfigError::PostureThresholds)
        }
    }
}

/// Upright `[0, a)`, Leaning `[a, b)`, Lying `[b, c)`, Inverted `[c, 180]`.
pub fn classify_posture(tilt_deg: f64, thresholds: &PostureThresholds) -> PostureClass {
    if tilt_deg < thresholds.leaning_deg {
        PostureClass::Upright
    } else if tilt_deg < thresholds.lying_deg {
        PostureClass::Leaning
    } else if tilt_deg < thresholds.inverted_deg {
        PostureClass::Lying
    } else {
        PostureClass::Inverted
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostureEstimate {
    pub t_ms: u64,
    pub tilt_deg: f64,
    pub posture: PostureClass,
}

/// Streaming orientation tracker that yields a posture estimate per fused sample.
#[derive(Clone, Debug)]
pub struct PostureTracker {
    state: OrientationState,
    vertical: Axis,
    thresholds: PostureThresholds,
}

impl PostureTracker {
    pub fn new(weight: f64, vertical: Axis, thresholds: PostureThresholds) -> Self {
        Self { state: OrientationState::new(weight), vertical, thresholds }
    }

    pub fn state(&self) -> &OrientationState {
        &self.state
    }

    /// Fuses one IMU sample taken at `t_ms`. The first call only initializes.
    pub fn update(
        &mut self,
        t_ms: u64,
        accel: Vec3,
        gyro: Vec3,
        mag: Option<Vec3>,
    ) -> Result<PostureEstimate, PostureError> {
        let dt_s = match self.state.last_t_ms {
            Some(prev) if t_ms > prev => (t_ms - prev) as f64 / 1000.0,
            Some(_) => return Err(PostureError::NonPositiveStep),
            // first sample: nothing to integrate yet
            None => 1.0,
        };
        let mut next = fuse_step(self.state, accel, gyro, mag, dt_s)?;
        next.last_t_ms = Some(t_ms);
        self.state = next;
        let gravity = next.gravity.expect("fuse_step always sets gravity");
        let tilt_deg = tilt_from_gravity(gravity, self.vertical)?;
        Ok(PostureEstimate { t_ms, tilt_deg, posture: classify_posture(tilt_deg, &self.thresholds) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_PI_2, PI};
    use proptest::prelude::*;

    #[test]
    fn stationary_converges_to_accel_direction() {
        let mut s = OrientationState::new(0.98);
        for _ in 0..100 {
            s = fuse_step(s, Vec3::new(0.0, 0.0, 9.81), Vec3::ZERO, Some(Vec3::new(20.0, 0.0, -40.0)), 0.2).unwrap();
        }
        let g = s.gravity().unwrap();
        assert!((g - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-3);
    }

    #[test]
    fn stationary_from_wrong_start_converges() {
        let mut s = OrientationState::with_gravity(Vec3::new(0.0, 1.0, 0.0), 0.9).unwrap();
        for _ in 0..100 {
            s = fuse_step(s, Vec3::new(0.0, 0.0, 9.81), Vec3::ZERO, None, 0.2).unwrap();
        }
        assert!((s.gravity().unwrap() - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-3);
    }

    #[test]
    fn zero_weight_follows_accel() {
        let s = OrientationState::with_gravity(Vec3::new(0.0, 1.0, 0.0), 0.0).unwrap();
        let a = Vec3::new(1.0, 2.0, 2.0);
        let s = fuse_step(s, a, Vec3::new(0.3, 0.0, 0.0), None, 0.2).unwrap();
        assert!((s.gravity().unwrap() - a * (1.0 / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn gyro_only_rotation_matches_closed_form() {
        // Closed-form oracle: rotating +z by +90° about +x yields -y.
        let steps = 100;
        let total = FRAC_PI_2;
        let dt = 0.01;
        let rate = total / (steps as f64 * dt);
        let mut s = OrientationState::with_gravity(Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap();
        for _ in 0..steps {
            s = fuse_step(s, Vec3::new(0.0, 0.0, 9.81), Vec3::new(rate, 0.0, 0.0), None, dt).unwrap();
        }
        let expected = Vec3::new(0.0, -libm::sin(total), libm::cos(total));
        assert!((s.gravity().unwrap() - expected).norm() < 1e-2);
        assert!((s.gravity().unwrap() - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-2);
    }

    #[test]
    fn zero_accel_is_rejected() {
        let s = OrientationState::new(0.98);
        assert_eq!(fuse_step(s, Vec3::ZERO, Vec3::ZERO, None, 0.2), Err(PostureError::ZeroAccelVector));
    }

    #[test]
    fn canonical_tilts() {
        assert_eq!(tilt_from_gravity(Vec3::new(0.0, 1.0, 0.0), Axis::Y), Ok(0.0));
        assert_eq!(tilt_from_gravity(Vec3::new(0.0, 0.0, 1.0), Axis::Y), Ok(90.0));
        assert_eq!(tilt_from_gravity(Vec3::new(0.0, -1.0, 0.0), Axis::Y), Ok(180.0));
        assert_eq!(tilt_from_gravity(Vec3::new(0.0, 0.0, 1.0), Axis::Z), Ok(0.0));
    }

    #[test]
    fn non_unit_is_rejected() {
        assert!(matches!(tilt_from_gravity(Vec3::new(0.0, 2.0, 0.0), Axis::Y), Err(PostureError::NonUnitVector(_))));
    }

    #[test]
    fn default_partition() {
        let t = PostureThresholds::default();
        assert_eq!(classify_posture(10.0, &t), PostureClass::Upright);
        assert_eq!(classify_posture(45.0, &t), PostureClass::Leaning);
        assert_eq!(classify_posture(90.0, &t), PostureClass::Lying);
        assert_eq!(classify_posture(150.0, &t), PostureClass::Inverted);
        assert_eq!(classify_posture(20.0, &t), PostureClass::Leaning);
        assert_eq!(classify_posture(180.0, &t), PostureClass::Inverted);
    }

    #[test]
    fn thresholds_must_increase() {
        assert!(PostureThresholds::from_array([20.0, 20.0, 120.0]).is_err());
        assert!(PostureThresholds::from_array([10.0, 50.0, 181.0]).is_err());
        assert!(PostureThresholds::from_array([10.0, 50.0, 100.0]).is_ok());
    }

    #[test]
    fn heading_follows_yaw() {
        // field pointing along +z (forward) while upright -> heading 0
        let up = Vec3::new(0.0, 1.0, 0.0);
        assert_abs_diff_eq!(tilt_compensated_heading(up, Vec3::new(0.0, -40.0, 20.0)).unwrap(), 0.0, epsilon = 1e-9);
        let h = tilt_compensated_heading(up, Vec3::new(20.0, -40.0, 0.0)).unwrap();
        assert_abs_diff_eq!(h, 90.0, epsilon = 1e-9);
    }

    #[test]
    fn tracker_recovers_stationary_tilt() {
        let mut tracker = PostureTracker::new(0.98, Axis::Y, PostureThresholds::default());
        let theta = 35.0f64.to_radians();
        let a = Vec3::new(0.0, libm::cos(theta), libm::sin(theta)) * 9.81;
        let mut last = None;
        for k in 0..10 {
            last = Some(tracker.update(k * 200, a, Vec3::ZERO, None).unwrap());
        }
        let est = last.unwrap();
        assert_abs_diff_eq!(est.tilt_deg, 35.0, epsilon = 2.0);
        assert_eq!(est.posture, PostureClass::Leaning);
    }

    proptest! {
        #[test]
        fn fusion_keeps_unit_norm(
            steps in prop::collection::vec(((-20.0f64..20.0, -20.0f64..20.0, 0.5f64..20.0), (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)), 1..50),
            w in 0.01f64..0.99,
        ) {
            let mut s = OrientationState::new(w);
            for ((ax, ay, az), (gx, gy, gz)) in steps {
                s = fuse_step(s, Vec3::new(ax, ay, az), Vec3::new(gx, gy, gz), None, 0.05).unwrap();
                prop_assert!((s.gravity().unwrap().norm() - 1.0).abs() < 1e-6);
            }
        }

        #[test]
        fn tilt_invariant_under_vertical_rotation(theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI), psi in 0.0f64..(2.0 * PI)) {
            let g = Vec3::new(libm::sin(theta) * libm::cos(phi), libm::cos(theta), libm::sin(theta) * libm::sin(phi));
            let r = g.rotated(Axis::Y.unit(), psi);
            let (a, b) = (tilt_from_gravity(g, Axis::Y).unwrap(), tilt_from_gravity(r, Axis::Y).unwrap());
            prop_assert!((a - b).abs() < 1e-6);
            prop_assert!((0.0..=180.0).contains(&a));
        }

        #[test]
        fn posture_partition_is_monotone(a in 0.0f64..=180.0, b in 0.0f64..=180.0) {
            let t = PostureThresholds::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(classify_posture(lo, &t) <= classify_posture(hi, &t));
        }
    }
}
