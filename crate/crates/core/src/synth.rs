//! Seeded synthetic sessions with per-window ground truth.
//!
//! Each bout drives the three accelerometer axes with sinusoids whose
//! frequencies are `k / samples_per_window` cycles per sample, with `k`
//! coprime to the window length. Every window therefore samples each
//! sinusoid at equally spaced phases and its mean absolute value is `2A/π`
//! up to a fraction of a percent. Amplitudes are pre-scaled by the gain of
//! the gravity high-pass at that frequency so that the engine's SMA lands on
//! the bout target. Gravity for the scripted tilt is added on top, with
//! matching gyro and magnetometer channels.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::activity::{classify_level, LOW_MAX, MODERATE_MAX, SEDENTARY_MAX};
use crate::ambient::evaluate_ambient;
use crate::posture::classify_posture;
use crate::sensor_model::{
    ActivityLevel, AmbientReading, Axis, EngineConfig, PostureClass, Reading, SensorRecord, Vec3, STANDARD_GRAVITY,
};

/// Nominal SMA used when a bout names a level rather than a value.
///
/// The first three are range midpoints; the vigorous range is unbounded so
/// its nominal value sits one moderate-width above the lower bound.
pub fn level_midpoint(level: ActivityLevel) -> f64 {
    match level {
        ActivityLevel::Sedentary => SEDENTARY_MAX / 2.0,
        ActivityLevel::Low => (SEDENTARY_MAX + LOW_MAX) / 2.0,
        ActivityLevel::Moderate => (LOW_MAX + MODERATE_MAX) / 2.0,
        ActivityLevel::Vigorous => MODERATE_MAX + (MODERATE_MAX - LOW_MAX),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoutTarget {
    Level(ActivityLevel),
    Sma(f64),
}

impl BoutTarget {
    pub fn sma(self) -> f64 {
        match self {
            BoutTarget::Level(l) => level_midpoint(l),
            BoutTarget::Sma(s) => s,
        }
    }
}

/// Tilt (degrees from upright, leaning forward) from `at_ms` into the bout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltKey {
    pub at_ms: u64,
    pub tilt_deg: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientKey {
    pub at_ms: u64,
    pub reading: AmbientReading,
}

/// Scripts are step functions; a bout without keys keeps the previous value.
#[derive(Clone, Debug, PartialEq)]
pub struct Bout {
    pub target: BoutTarget,
    pub duration_ms: u64,
    pub tilt: Vec<TiltKey>,
    pub ambient: Vec<AmbientKey>,
    /// Half-width of uniform accelerometer noise, m/s².
    pub noise: f64,
    /// Overrides the seed derived from the profile seed.
    pub seed: Option<u64>,
}

impl Bout {
    pub fn new(target: BoutTarget, duration_ms: u64) -> Self {
        Self { target, duration_ms, tilt: Vec::new(), ambient: Vec::new(), noise: 0.0, seed: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActivityProfile {
    pub seed: u64,
    pub ambient_period_ms: u64,
    /// Earth field at upright orientation, device frame, µT.
    pub mag_field: Vec3,
    pub initial_tilt_deg: f64,
    pub initial_ambient: AmbientReading,
    pub bouts: Vec<Bout>,
}

impl ActivityProfile {
    pub fn new(seed: u64, bouts: Vec<Bout>) -> Self {
        Self {
            seed,
            ambient_period_ms: 10_000,
            mag_field: Vec3::new(0.0, -40.0, 20.0),
            initial_tilt_deg: 0.0,
            initial_ambient: AmbientReading { temp_f: 72.0, rh_pct: 40.0 },
            bouts,
        }
    }

    pub fn duration_ms(&self) -> u64 {
        self.bouts.iter().map(|b| b.duration_ms).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SynthError {
    #[error("bout {bout}: zero SMA target is unreachable with noise amplitude {noise}")]
    InfeasibleTarget { bout: usize, noise: f64 },
    #[error("bout {bout}: {reason}")]
    InvalidBout { bout: usize, reason: &'static str },
    #[error("invalid profile: {0}")]
    InvalidProfile(&'static str),
}

/// Intended labels for one full window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthWindow {
    pub index: u64,
    pub start_ms: u64,
    pub bout: usize,
    pub level: ActivityLevel,
    pub target_sma: f64,
    /// Scripted tilt of the latest IMU sample at or before the window end.
    pub tilt_deg: f64,
    pub posture: PostureClass,
    /// Verdict of the latest scripted ambient record at or before the window end.
    pub in_band: bool,
    /// A bout or tilt change falls inside this window or the one before it.
    pub transition: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSession {
    pub records: Vec<SensorRecord>,
    pub truth: Vec<TruthWindow>,
}

/// Per-axis sinusoid of one bout.
#[derive(Clone, Copy, Debug)]
struct Oscillator {
    amplitude: f64,
    omega: f64,
    phase: f64,
}

/// Magnitude response of the gravity high-pass at `omega` rad/sample.
///
/// linear[n] = alpha * (raw[n] - gravity[n-1]) gives
/// H(z) = alpha (1 - z⁻¹) / (1 - alpha z⁻¹).
pub fn high_pass_gain(alpha: f64, omega: f64) -> f64 {
    let num = alpha * 2.0 * libm::fabs(libm::sin(omega / 2.0));
    let re = 1.0 - alpha * libm::cos(omega);
    let im = alpha * libm::sin(omega);
    num / libm::sqrt(re * re + im * im)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Cycles-per-window choices in the upper half of the band below Nyquist.
fn frequency_choices(n: usize) -> Vec<usize> {
    let lo = (n / 4).max(1);
    let hi = n.div_ceil(2);
    let ks: Vec<usize> = (lo..hi).filter(|&k| gcd(k, n) == 1).collect();
    if ks.is_empty() {
        alloc::vec![1]
    } else {
        ks
    }
}

fn bout_rng(profile: &ActivityProfile, index: usize) -> ChaCha8Rng {
    let seed = profile.bouts[index]
        .seed
        .unwrap_or_else(|| profile.seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    ChaCha8Rng::seed_from_u64(seed)
}

fn oscillators(target: f64, n: usize, alpha: f64, rng: &mut ChaCha8Rng) -> [Oscillator; 3] {
    let ks = frequency_choices(n);
    let weights: [f64; 3] = core::array::from_fn(|_| rng.gen_range(0.5..1.5));
    let total: f64 = weights.iter().sum();
    core::array::from_fn(|axis| {
        let k = ks[rng.gen_range(0..ks.len())];
        let omega = 2.0 * PI * k as f64 / n as f64;
        let phase = rng.gen_range(0.0..2.0 * PI);
        // mean |A sin| over equally spaced phases is 2A/pi
        let share = target * weights[axis] / total;
        Oscillator { amplitude: share * FRAC_PI_2 / high_pass_gain(alpha, omega), omega, phase }
    })
}

fn upright_rotation(tilt_deg: f64) -> impl Fn(Vec3) -> Vec3 {
    let angle = tilt_deg.to_radians();
    move |v| v.rotated(Axis::X.unit(), angle)
}

/// Step-function lookup over globally timed keys sorted by time.
fn value_at<T: Copy>(keys: &[(u64, T)], t_ms: u64, initial: T) -> T {
    match keys.partition_point(|&(at, _)| at <= t_ms) {
        0 => initial,
        i => keys[i - 1].1,
    }
}

fn validate(profile: &ActivityProfile, config: &EngineConfig) -> Result<(), SynthError> {
    config.validate().map_err(|_| SynthError::InvalidProfile("engine configuration is invalid"))?;
    if profile.bouts.is_empty() {
        return Err(SynthError::InvalidProfile("no bouts"));
    }
    if profile.ambient_period_ms == 0 {
        return Err(SynthError::InvalidProfile("ambient_period_ms must be positive"));
    }
    if !profile.mag_field.is_finite() || !profile.initial_tilt_deg.is_finite() {
        return Err(SynthError::InvalidProfile("non-finite initial state"));
    }
    let ok_reading = |r: &AmbientReading| r.temp_f.is_finite() && (0.0..=100.0).contains(&r.rh_pct);
    if !ok_reading(&profile.initial_ambient) {
        return Err(SynthError::InvalidProfile("initial ambient reading out of range"));
    }
    for (i, b) in profile.bouts.iter().enumerate() {
        let bad = |reason| Err(SynthError::InvalidBout { bout: i, reason });
        let target = b.target.sma();
        if b.duration_ms == 0 {
            return bad("duration must be positive");
        }
        if !target.is_finite() || target < 0.0 {
            return bad("target SMA must be a non-negative number");
        }
        if !b.noise.is_finite() || b.noise < 0.0 {
            return bad("noise amplitude must be a non-negative number");
        }
        if target == 0.0 && b.noise > 0.0 {
            return Err(SynthError::InfeasibleTarget { bout: i, noise: b.noise });
        }
        if b.tilt.iter().any(|k| k.at_ms >= b.duration_ms || !(0.0..=180.0).contains(&k.tilt_deg)) {
            return bad("tilt key outside bout or tilt outside [0, 180]");
        }
        if b.ambient.iter().any(|k| k.at_ms >= b.duration_ms || !ok_reading(&k.reading)) {
            return bad("ambient key outside bout or reading out of range");
        }
        if b.tilt.windows(2).any(|w| w[0].at_ms >= w[1].at_ms) || b.ambient.windows(2).any(|w| w[0].at_ms >= w[1].at_ms)
        {
            return bad("script keys must be strictly increasing in time");
        }
    }
    Ok(())
}

/// Generates the session described by `profile` at the sampling geometry of `config`.
pub fn generate(profile: &ActivityProfile, config: &EngineConfig) -> Result<SyntheticSession, SynthError> {
    validate(profile, config)?;
    let period = config.sample_period_ms();
    let n = config.samples_per_window;
    let dt_s = period as f64 / 1000.0;

    let mut bout_starts = Vec::with_capacity(profile.bouts.len());
    let mut tilt_keys: Vec<(u64, f64)> = Vec::new();
    let mut ambient_keys: Vec<(u64, AmbientReading)> = Vec::new();
    let mut start = 0;
    for b in &profile.bouts {
        bout_starts.push(start);
        tilt_keys.extend(b.tilt.iter().map(|k| (start + k.at_ms, k.tilt_deg)));
        ambient_keys.extend(b.ambient.iter().map(|k| (start + k.at_ms, k.reading)));
        start += b.duration_ms;
    }
    let total_ms = start;
    let bout_of = |t: u64| bout_starts.partition_point(|&s| s <= t) - 1;

    let mut rngs: Vec<ChaCha8Rng> = (0..profile.bouts.len()).map(|i| bout_rng(profile, i)).collect();
    let oscs: Vec<[Oscillator; 3]> = profile
        .bouts
        .iter()
        .zip(rngs.iter_mut())
        .map(|(b, rng)| oscillators(b.target.sma(), n, config.filter_alpha, rng))
        .collect();

    let samples = total_ms.div_ceil(period);
    let mut records = Vec::with_capacity(samples as usize * 3 + (total_ms / profile.ambient_period_ms) as usize + 1);
    let mut prev_tilt = value_at(&tilt_keys, 0, profile.initial_tilt_deg);
    for k in 0..samples {
        let t = k * period;
        let b = bout_of(t);
        let tilt = value_at(&tilt_keys, t, profile.initial_tilt_deg);
        let rotate = upright_rotation(tilt);
        let gravity = rotate(Axis::Y.unit()) * STANDARD_GRAVITY;
        let osc = &oscs[b];
        let phase = |o: &Oscillator| o.amplitude * libm::sin(o.omega * k as f64 + o.phase);
        let mut linear = Vec3::new(phase(&osc[0]), phase(&osc[1]), phase(&osc[2]));
        let noise = profile.bouts[b].noise;
        if noise > 0.0 {
            let rng = &mut rngs[b];
            linear = linear
                + Vec3::new(
                    rng.gen_range(-noise..=noise),
                    rng.gen_range(-noise..=noise),
                    rng.gen_range(-noise..=noise),
                );
        }
        let gyro = Vec3::new((tilt - prev_tilt).to_radians() / dt_s, 0.0, 0.0);
        prev_tilt = tilt;
        records.push(SensorRecord::new(t, Reading::Accel(gravity + linear)));
        records.push(SensorRecord::new(t, Reading::Gyro(gyro)));
        records.push(SensorRecord::new(t, Reading::Mag(rotate(profile.mag_field))));
    }
    let ambient_times = (0..).map(|i| i * profile.ambient_period_ms).take_while(|&t| t < total_ms);
    for t in ambient_times.clone() {
        let reading = value_at(&ambient_keys, t, profile.initial_ambient);
        records.push(SensorRecord::new(t, Reading::Ambient(reading)));
    }
    records.sort_by_key(|r| (r.t_ms, r.channel()));

    // every bout start after the first and every tilt change; t = 0 covers the filter latch
    let mut changes: Vec<u64> = bout_starts.clone();
    let mut last_tilt = profile.initial_tilt_deg;
    for &(at, tilt) in &tilt_keys {
        if tilt != last_tilt {
            changes.push(at);
        }
        last_tilt = tilt;
    }
    let window_ms = config.window_ms;
    let full_windows = samples / n as u64;
    let truth = (0..full_windows)
        .map(|w| {
            let start_ms = w * n as u64 * period;
            let end_ms = start_ms + window_ms;
            // snapshots include records stamped exactly at end_ms
            let last_imu = end_ms.min((samples - 1) * period);
            let bout = bout_of(start_ms);
            let target_sma = profile.bouts[bout].target.sma();
            let tilt_deg = value_at(&tilt_keys, last_imu, profile.initial_tilt_deg);
            let last_ambient = ambient_times.clone().take_while(|&t| t <= end_ms).last().unwrap_or(0);
            let reading = value_at(&ambient_keys, last_ambient, profile.initial_ambient);
            let transition = changes.iter().any(|&c| c + window_ms > start_ms && c < end_ms);
            TruthWindow {
                index: w,
                start_ms,
                bout,
                level: classify_level(target_sma),
                target_sma,
                tilt_deg,
                posture: classify_posture(tilt_deg, &config.posture),
                in_band: evaluate_ambient(last_ambient, reading, &config.ambient).in_band,
                transition,
            }
        })
        .collect();

    Ok(SyntheticSession { records, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activity::sma_of;
    use crate::preprocess::{window_assemble, HighPass};
    use approx::assert_abs_diff_eq;

    fn accel_samples(session: &SyntheticSession, alpha: f64) -> Vec<crate::preprocess::LinearAccelSample> {
        let mut hp = HighPass::new(alpha);
        session
            .records
            .iter()
            .filter_map(|r| match r.reading {
                Reading::Accel(v) => Some(hp.step(r.t_ms, v).unwrap()),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn high_pass_gain_matches_simulation() {
        // Oracle: drive the filter with a long sinusoid and measure steady-state amplitude.
        let alpha = 0.833;
        for k in [7usize, 9, 12] {
            let omega = 2.0 * PI * k as f64 / 25.0;
            let mut hp = HighPass::new(alpha);
            let mut peak: f64 = 0.0;
            for i in 0..5000 {
                let out = hp.step(i, Vec3::new(libm::sin(omega * i as f64), 0.0, 0.0)).unwrap();
                if i > 4000 {
                    peak = peak.max(out.linear.x.abs());
                }
            }
            // sampled peak underestimates the true amplitude by at most 1 - cos(pi/25)
            let gain = high_pass_gain(alpha, omega);
            assert!(peak <= gain + 1e-9 && peak >= gain * libm::cos(PI / 25.0) - 1e-9, "k={k} peak={peak} gain={gain}");
        }
    }

    #[test]
    fn frequencies_are_coprime_with_window() {
        assert_eq!(frequency_choices(25), [6, 7, 8, 9, 11, 12]);
        assert!(frequency_choices(4).iter().all(|&k| gcd(k, 4) == 1));
    }

    #[test]
    fn moderate_bout_hits_target() {
        let config = EngineConfig::default();
        let mut bout = Bout::new(BoutTarget::Sma(13.5), 60_000);
        bout.noise = 0.02;
        let session = generate(&ActivityProfile::new(7, alloc::vec![bout]), &config).unwrap();
        let windows = window_assemble(accel_samples(&session, config.filter_alpha), &config);
        assert_eq!(windows.len(), 12);
        let within = windows.iter().filter(|w| (sma_of(&w.samples) / 13.5 - 1.0).abs() <= 0.05).count();
        assert!(within * 10 >= windows.len() * 9, "{within}/12 windows within 5%");
        for (w, t) in windows.iter().zip(&session.truth) {
            if !t.transition {
                assert_abs_diff_eq!(sma_of(&w.samples), 13.5, epsilon = 13.5 * 0.05);
            }
        }
    }

    #[test]
    fn zero_amplitude_bout_is_still() {
        let config = EngineConfig::default();
        let session =
            generate(&ActivityProfile::new(1, alloc::vec![Bout::new(BoutTarget::Sma(0.0), 30_000)]), &config).unwrap();
        let windows = window_assemble(accel_samples(&session, config.filter_alpha), &config);
        assert_eq!(windows.len(), 6);
        for w in &windows {
            let sma = sma_of(&w.samples);
            assert!(sma < 0.05);
            assert_eq!(classify_level(sma), ActivityLevel::Sedentary);
        }
    }

    #[test]
    fn zero_target_with_noise_is_infeasible() {
        let mut bout = Bout::new(BoutTarget::Sma(0.0), 10_000);
        bout.noise = 0.1;
        let err = generate(&ActivityProfile::new(1, alloc::vec![bout]), &EngineConfig::default()).unwrap_err();
        assert_eq!(err, SynthError::InfeasibleTarget { bout: 0, noise: 0.1 });
    }

    #[test]
    fn invalid_bouts_are_rejected() {
        let config = EngineConfig::default();
        let zero = Bout::new(BoutTarget::Level(ActivityLevel::Low), 0);
        assert!(matches!(
            generate(&ActivityProfile::new(1, alloc::vec![zero]), &config),
            Err(SynthError::InvalidBout { .. })
        ));
        let mut late = Bout::new(BoutTarget::Level(ActivityLevel::Low), 5000);
        late.tilt.push(TiltKey { at_ms: 5000, tilt_deg: 30.0 });
        assert!(generate(&ActivityProfile::new(1, alloc::vec![late]), &config).is_err());
        assert!(matches!(generate(&ActivityProfile::new(1, Vec::new()), &config), Err(SynthError::InvalidProfile(_))));
    }

    #[test]
    fn same_seed_same_session() {
        let config = EngineConfig::default();
        let mut bout = Bout::new(BoutTarget::Level(ActivityLevel::Vigorous), 20_000);
        bout.noise = 0.1;
        let profile = ActivityProfile::new(42, alloc::vec![bout]);
        assert_eq!(generate(&profile, &config), generate(&profile, &config));
        let other = ActivityProfile { seed: 43, ..profile.clone() };
        assert_ne!(generate(&profile, &config).unwrap().records, generate(&other, &config).unwrap().records);
    }

    #[test]
    fn records_are_merged_in_order() {
        let session = generate(
            &ActivityProfile::new(3, alloc::vec![Bout::new(BoutTarget::Level(ActivityLevel::Low), 20_000)]),
            &EngineConfig::default(),
        )
        .unwrap();
        assert!(session.records.windows(2).all(|w| (w[0].t_ms, w[0].channel()) < (w[1].t_ms, w[1].channel())));
        assert_eq!(session.records.iter().filter(|r| matches!(r.reading, Reading::Ambient(_))).count(), 2);
    }

    #[test]
    fn truth_marks_transitions() {
        let mut b2 = Bout::new(BoutTarget::Level(ActivityLevel::Moderate), 20_000);
        b2.tilt.push(TiltKey { at_ms: 7_000, tilt_deg: 40.0 });
        let profile =
            ActivityProfile::new(5, alloc::vec![Bout::new(BoutTarget::Level(ActivityLevel::Low), 20_000), b2]);
        let session = generate(&profile, &EngineConfig::default()).unwrap();
        let flags: Vec<bool> = session.truth.iter().map(|t| t.transition).collect();
        // window 0 (start), 4 (bout change), 5 and 6 (tilt change at 27 s)
        assert_eq!(flags, [true, false, false, false, true, true, true, false]);
        assert_eq!(session.truth[7].posture, PostureClass::Leaning);
        assert_eq!(session.truth[4].level, ActivityLevel::Moderate);
    }

    #[test]
    fn level_midpoints() {
        assert_eq!(level_midpoint(ActivityLevel::Moderate), 13.5);
        for l in ActivityLevel::ALL {
            assert_eq!(classify_level(level_midpoint(l)), l);
        }
    }
}
