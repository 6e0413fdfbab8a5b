//! Seeded synthetic trace generation for the six slip cases.
//!
//! Each case builder synthesizes a deterministic signal skeleton in f64,
//! draws its scalar parameters from the seeded stream in a fixed order,
//! then applies per-sample Gaussian noise. Samples that carry a hard
//! signature guarantee (impact peaks, free-fall and airborne intervals)
//! are excluded from the noise pass so the guarantee holds for every seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::case::CaseLabel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;
use crate::trace::{unwrap_angles, wrap_azimuth, wrap_pitch, wrap_roll, SensorTrace};

/// Canonical sample rate of generated traces.
pub const CANONICAL_RATE_HZ: f64 = 50.0;
/// Canonical length of generated traces.
pub const CANONICAL_LEN: usize = 256;

/// Closed interval for a drawn model parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange<S: Scalar> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> ParamRange<S> {
    pub fn new(lo: S, hi: S) -> Self {
        ParamRange { lo, hi }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(Error::InvalidParams(format!(
                "range {name} must satisfy lo <= hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (lo, hi) = (self.lo.to_f64(), self.hi.to_f64());
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..hi)
        }
    }
}

/// Tunable motion-model parameters shared by all case builders.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionModelParams<S: Scalar> {
    pub gravity: S,
    pub noise_sigma_accel: S,
    pub noise_sigma_angle: S,
    /// Impact peak magnitude for B and F, m/s².
    pub impact_peak: ParamRange<S>,
    /// Slope angle for C and D, degrees.
    pub incline_angle: ParamRange<S>,
    /// Free-fall duration for F, seconds.
    pub free_fall_duration: ParamRange<S>,
    /// Accumulated rotation for E, degrees.
    pub flip_rotation: ParamRange<S>,
    /// Placement transient duration for A, seconds.
    pub settle_time: ParamRange<S>,
}

impl<S: Scalar> Default for MotionModelParams<S> {
    fn default() -> Self {
        let g = 9.81;
        let r = |lo: f64, hi: f64| ParamRange::new(S::from_f64(lo), S::from_f64(hi));
        MotionModelParams {
            gravity: S::from_f64(g),
            noise_sigma_accel: S::from_f64(0.15),
            noise_sigma_angle: S::from_f64(0.5),
            impact_peak: r(2.0 * g, 5.0 * g),
            incline_angle: r(15.0, 35.0),
            free_fall_duration: r(0.3, 0.8),
            flip_rotation: r(220.0, 400.0),
            settle_time: r(0.2, 0.6),
        }
    }
}

impl<S: Scalar> MotionModelParams<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.gravity > S::zero()) || !self.gravity.is_finite() {
            return Err(Error::InvalidParams("gravity must be positive and finite".into()));
        }
        for (sigma, name) in [
            (self.noise_sigma_accel, "noise_sigma_accel"),
            (self.noise_sigma_angle, "noise_sigma_angle"),
        ] {
            if !(sigma >= S::zero()) || !sigma.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be >= 0")));
            }
        }
        self.impact_peak.validate("impact_peak")?;
        self.incline_angle.validate("incline_angle")?;
        self.free_fall_duration.validate("free_fall_duration")?;
        self.flip_rotation.validate("flip_rotation")?;
        self.settle_time.validate("settle_time")?;
        Ok(())
    }
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// Ramp in over the first 15% of the unit interval and out over the last 15%.
fn trapezoid(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        0.0
    } else if u < 0.15 {
        u / 0.15
    } else if u > 0.85 {
        (1.0 - u) / 0.15
    } else {
        1.0
    }
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn scale3(v: [f64; 3], s: f64) -> [f64; 3] {
    [v[0] * s, v[1] * s, v[2] * s]
}

struct Skeleton {
    accel: Vec<[f64; 3]>,
    orient: Vec<[f64; 3]>,
    /// Samples whose accel channels skip the noise pass.
    accel_noise_mask: Vec<bool>,
}

impl Skeleton {
    fn resting(n: usize, g: f64, az0: f64, pitch0: f64, roll0: f64) -> Self {
        Skeleton {
            accel: vec![[0.0, 0.0, g]; n],
            orient: vec![[az0, pitch0, roll0]; n],
            accel_noise_mask: vec![false; n],
        }
    }
}

/// Event start for an event of `len` samples, jittered within the middle
/// 60% of an `n`-sample window.
fn jittered_start(rng: &mut ChaCha8Rng, n: usize, len: usize) -> usize {
    let lo = (0.2 * n as f64).ceil() as usize;
    let hi = ((0.8 * n as f64).floor() as usize).saturating_sub(len).max(lo + 1);
    rng.random_range(lo..hi)
}

fn draw_initial_orientation(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let az0 = rng.random_range(0.0..360.0);
    let pitch0 = rng.random_range(-6.0..6.0);
    let roll0 = rng.random_range(-6.0..6.0);
    (az0, pitch0, roll0)
}

fn build_normal_touch_keep<S: Scalar>(
    rng: &mut ChaCha8Rng,
    params: &MotionModelParams<S>,
    n: usize,
    rate: f64,
) -> Skeleton {
    let g = params.gravity.to_f64();
    let (az0, pitch0, roll0) = draw_initial_orientation(rng);
    let settle = params.settle_time.draw(rng);
    let amp = rng.random_range(0.5..1.5);
    let len = ((settle * rate).round() as usize).max(2);
    let s0 = jittered_start(rng, n, len);
    let mut sk = Skeleton::resting(n, g, az0, pitch0, roll0);
    for k in s0..(s0 + len).min(n) {
        let u = (k - s0 + 1) as f64 / (len + 1) as f64;
        let bump = amp * (std::f64::consts::PI * u).sin();
        sk.accel[k][2] = g + bump;
        sk.accel[k][0] = 0.25 * bump * (2.0 * std::f64::consts::PI * u).sin();
        sk.accel[k][1] = -0.2 * bump * (2.0 * std::f64::consts::PI * u).sin();
    }
    sk
}

fn build_accidental_keep<S: Scalar>(
    rng: &mut ChaCha8Rng,
    params: &MotionModelParams<S>,
    n: usize,
    _rate: f64,
) -> Skeleton {
    let g = params.gravity.to_f64();
    let (az0, pitch0, roll0) = draw_initial_orientation(rng);
    let peak = params.impact_peak.draw(rng);
    let t0 = jittered_start(rng, n, 4);
    let jolt = rng.random_range(2.0..8.0);
    let dx = rng.random_range(-0.3..0.3);
    let dy = rng.random_range(-0.3..0.3);
    let mut sk = Skeleton::resting(n, g, az0, pitch0, roll0);
    let dir = normalize3([dx, dy, 1.0]);
    // The peak sample carries the exact drawn magnitude.
    sk.accel[t0] = scale3(dir, peak);
    sk.accel_noise_mask[t0] = true;
    for (off, frac) in [(1usize, 0.35), (2, 0.12)] {
        if t0 + off < n {
            let extra = scale3(dir, frac * (peak - g));
            sk.accel[t0 + off] = [extra[0], extra[1], g + extra[2]];
        }
    }
    // Orientation jolts then returns to the resting pose.
    for k in t0..(t0 + 13).min(n) {
        let v = (k - t0) as f64 / 12.0;
        let wob = jolt * (std::f64::consts::PI * v).sin() * (-2.0 * v).exp();
        sk.orient[k][1] = pitch0 + wob;
        sk.orient[k][2] = roll0 - 0.6 * wob;
    }
    sk
}

fn build_complete_slip<S: Scalar>(
    rng: &mut ChaCha8Rng,
    params: &MotionModelParams<S>,
    n: usize,
    rate: f64,
) -> Skeleton {
    let g = params.gravity.to_f64();
    let (az0, pitch0, roll0) = draw_initial_orientation(rng);
    let incline = params.incline_angle.draw(rng);
    let dur = rng.random_range(2.4..3.0);
    let gain = rng.random_range(0.6..0.95);
    let len = (dur * rate).round() as usize;
    let s0 = jittered_start(rng, n, len);
    let mut sk = Skeleton::resting(n, g, az0, pitch0, roll0);
    for k in s0..n {
        let u = ((k - s0) as f64 / len as f64).min(1.0);
        // Tilt reaches the full incline at 70% of the slide, then holds;
        // the drift phase spans at least 1.6 s for any draw.
        let theta = incline * smoothstep(u / 0.7);
        sk.orient[k][1] = pitch0 - theta;
        let theta_r = theta.to_radians();
        let envelope = 0.25 + 0.75 * (u / 0.25).min(1.0);
        sk.accel[k][0] = gain * g * theta_r.sin() * envelope;
        sk.accel[k][2] = g * theta_r.cos();
    }
    sk
}

fn build_slip_till_tipping_point<S: Scalar>(
    rng: &mut ChaCha8Rng,
    params: &MotionModelParams<S>,
    n: usize,
    rate: f64,
) -> Skeleton {
    let g = params.gravity.to_f64();
    let (az0, pitch0, roll0) = draw_initial_orientation(rng);
    let incline = params.incline_angle.draw(rng);
    let frac = rng.random_range(0.35..0.6);
    let dur = rng.random_range(1.0..1.8);
    let len = (dur * rate).round() as usize;
    let s0 = jittered_start(rng, n, len);
    let tilt = incline * frac;
    let mut sk = Skeleton::resting(n, g, az0, pitch0, roll0);
    for k in s0..n {
        let u = ((k - s0) as f64 / len as f64).min(1.0);
        let theta = tilt * smoothstep(u);
        sk.orient[k][1] = pitch0 - theta;
        let theta_r = theta.to_radians();
        sk.accel[k][0] = g * theta_r.sin();
        sk.accel[k][2] = g * theta_r.cos();
    }
    sk
}

fn build_flip<S: Scalar>(
    rng: &mut ChaCha8Rng,
    params: &MotionModelParams<S>,
    n: usize,
    rate: f64,
) -> Skeleton {
    let g = params.gravity.to_f64();
    let (az0, pitch0, roll0) = draw_initial_orientation(rng);
    let rot = params.flip_rotation.draw(rng);
    let dur = rng.random_range(0.5..1.0);
    let len = (dur * rate).round() as usize;
    let s0 = jittered_start(rng, n, len + 4);
    let air_base = rng.random_range(1.8..3.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let az_drift = rng.random_range(-40.0..40.0);
    let catch = rng.random_range(1.2 * g..1.8 * g);
    let mut sk = Skeleton::resting(n, g, az0, pitch0, roll0);
    for k in s0..(s0 + len).min(n) {
        let u = (k - s0) as f64 / len as f64;
        let psi = rot.to_radians() * u;
        // Airborne magnitude stays within [1.4, 3.4]: never free-fall-like.
        let mag = air_base + 0.4 * (2.0 * std::f64::consts::PI * 3.0 * u + phase).sin();
        sk.accel[k] = scale3(normalize3([psi.sin(), 0.2, psi.cos()]), mag);
        sk.accel_noise_mask[k] = true;
        sk.orient[k][0] = az0 + az_drift * smoothstep(u);
        sk.orient[k][1] = pitch0 + rot * smoothstep(u);
        sk.orient[k][2] = roll0 + 10.0 * (2.0 * std::f64::consts::PI * 2.0 * u).sin() * trapezoid(u);
    }
    let land = (s0 + len).min(n - 1);
    sk.accel[land] = scale3(normalize3([0.1, -0.1, 1.0]), catch);
    if land + 1 < n {
        sk.accel[land + 1] = [0.0, 0.0, g + 0.3 * (catch - g)];
    }
    for k in land..n {
        sk.orient[k][0] = az0 + az_drift;
        sk.orient[k][1] = pitch0 + rot;
        sk.orient[k][2] = roll0;
    }
    sk
}

fn build_fall<S: Scalar>(
    rng: &mut ChaCha8Rng,
    params: &MotionModelParams<S>,
    n: usize,
    rate: f64,
) -> Skeleton {
    let g = params.gravity.to_f64();
    let (az0, pitch0, roll0) = draw_initial_orientation(rng);
    let dur = params.free_fall_duration.draw(rng);
    let peak = params.impact_peak.draw(rng);
    let len = ((dur * rate).round() as usize).max(2);
    let s0 = jittered_start(rng, n, len + 4);
    let residual = rng.random_range(0.15..0.45);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let tumble_p: f64 = rng.random_range(60.0..160.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    let tumble_r = rng.random_range(40.0..120.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    let dx = rng.random_range(-0.3..0.3);
    let dy = rng.random_range(-0.3..0.3);
    let pitch_f = rng.random_range(-10.0..10.0);
    let roll_f = rng.random_range(-10.0..10.0);
    let mut sk = Skeleton::resting(n, g, az0, pitch0, roll0);
    let dt = 1.0 / rate;
    for k in s0..(s0 + len).min(n) {
        let u = (k - s0) as f64 / len as f64;
        // Residual magnitude stays well below 1 m/s² throughout the fall.
        let mag = residual * (0.6 + 0.4 * (2.0 * std::f64::consts::PI * 2.5 * u + phase).sin());
        let psi = (k - s0) as f64 * dt * tumble_p.to_radians();
        sk.accel[k] = scale3(normalize3([psi.sin(), 0.3, psi.cos()]), mag);
        sk.accel_noise_mask[k] = true;
        sk.orient[k][1] = pitch0 + tumble_p * (k - s0) as f64 * dt;
        sk.orient[k][2] = roll0 + tumble_r * (k - s0) as f64 * dt;
    }
    let ti = (s0 + len).min(n - 1);
    let dir = normalize3([dx, dy, 1.0]);
    sk.accel[ti] = scale3(dir, peak);
    sk.accel_noise_mask[ti] = true;
    for (off, frac) in [(1usize, 0.35), (2, 0.12)] {
        if ti + off < n {
            let extra = scale3(dir, frac * (peak - g));
            sk.accel[ti + off] = [extra[0], extra[1], g + extra[2]];
        }
    }
    for k in ti..n {
        sk.orient[k] = [az0, pitch_f, roll_f];
    }
    sk
}

/// Generate one canonical trace for a case. Pure in (case, seed, params).
pub fn generate_trace<S: Scalar>(
    case: CaseLabel,
    seed_value: u64,
    params: &MotionModelParams<S>,
) -> Result<SensorTrace<S>> {
    params.validate()?;
    let n = CANONICAL_LEN;
    let rate = CANONICAL_RATE_HZ;
    let mut rng = seed::rng_from_seed(seed_value);
    let mut sk = match case {
        CaseLabel::NormalTouchKeep => build_normal_touch_keep(&mut rng, params, n, rate),
        CaseLabel::AccidentalKeep => build_accidental_keep(&mut rng, params, n, rate),
        CaseLabel::CompleteSlip => build_complete_slip(&mut rng, params, n, rate),
        CaseLabel::SlipTillTippingPoint => build_slip_till_tipping_point(&mut rng, params, n, rate),
        CaseLabel::Flip => build_flip(&mut rng, params, n, rate),
        CaseLabel::Fall => build_fall(&mut rng, params, n, rate),
    };
    let sigma_a = params.noise_sigma_accel.to_f64();
    if sigma_a > 0.0 {
        let dist = Normal::new(0.0, sigma_a).expect("validated sigma");
        for k in 0..n {
            // always consume three draws so the stream stays aligned
            let draw = [dist.sample(&mut rng), dist.sample(&mut rng), dist.sample(&mut rng)];
            if !sk.accel_noise_mask[k] {
                for (dst, d) in sk.accel[k].iter_mut().zip(draw) {
                    *dst += d;
                }
            }
        }
    }
    let sigma_o = params.noise_sigma_angle.to_f64();
    if sigma_o > 0.0 {
        let dist = Normal::new(0.0, sigma_o).expect("validated sigma");
        for k in 0..n {
            for c in 0..3 {
                sk.orient[k][c] += dist.sample(&mut rng);
            }
        }
    }
    let accel: Vec<[S; 3]> = sk
        .accel
        .iter()
        .map(|a| [S::from_f64(a[0]), S::from_f64(a[1]), S::from_f64(a[2])])
        .collect();
    let orient: Vec<[S; 3]> = sk
        .orient
        .iter()
        .map(|o| {
            [
                wrap_azimuth(S::from_f64(o[0])),
                wrap_pitch(S::from_f64(o[1])),
                wrap_roll(S::from_f64(o[2])),
            ]
        })
        .collect();
    SensorTrace::new(case, 0, S::from_f64(rate), accel, orient)
}

/// Per-trace seed derived from (master_seed, case, sample_id).
pub fn trace_seed(master_seed: u64, case: CaseLabel, sample_id: u32) -> u64 {
    seed::derive(master_seed, &[case.index() as u64, sample_id as u64])
}

/// Generate `samples_per_case` traces for each of the six cases, in case
/// order with sample_ids 0..samples_per_case per case.
pub fn generate_dataset<S: Scalar>(
    samples_per_case: usize,
    master_seed: u64,
    params: &MotionModelParams<S>,
) -> Result<Vec<SensorTrace<S>>> {
    if samples_per_case == 0 {
        return Err(Error::InvalidArgument("samples_per_case must be >= 1".into()));
    }
    params.validate()?;
    let mut out = Vec::with_capacity(6 * samples_per_case);
    for case in CaseLabel::ALL {
        for sample_id in 0..samples_per_case as u32 {
            let mut trace = generate_trace(case, trace_seed(master_seed, case, sample_id), params)?;
            trace.sample_id = sample_id;
            out.push(trace);
        }
    }
    Ok(out)
}

/// Per-sample total acceleration magnitudes.
pub fn accel_magnitudes<S: Scalar>(trace: &SensorTrace<S>) -> Vec<S> {
    (0..trace.len()).map(|k| trace.accel_magnitude(k)).collect()
}

/// Minimum over sliding windows of the windowed mean |a|.
pub fn min_windowed_accel<S: Scalar>(trace: &SensorTrace<S>, window_secs: f64) -> S {
    let mags = accel_magnitudes(trace);
    let w = ((window_secs * trace.sample_rate_hz.to_f64()).round() as usize)
        .clamp(1, mags.len());
    mags.windows(w)
        .map(|win| win.iter().copied().sum::<S>() / S::from_usize(w))
        .fold(S::infinity(), |acc, m| if m < acc { m } else { acc })
}

/// Longest contiguous run with |a| below `threshold`: (start, length).
pub fn longest_low_accel_run<S: Scalar>(trace: &SensorTrace<S>, threshold: S) -> (usize, usize) {
    let mags = accel_magnitudes(trace);
    let (mut best, mut best_start) = (0usize, 0usize);
    let (mut run, mut run_start) = (0usize, 0usize);
    for (k, &m) in mags.iter().enumerate() {
        if m < threshold {
            if run == 0 {
                run_start = k;
            }
            run += 1;
            if run > best {
                best = run;
                best_start = run_start;
            }
        } else {
            run = 0;
        }
    }
    (best_start, best)
}

/// True when the trace shows a free-fall interval of at least
/// `min_low_secs` below `low_threshold`, followed within `within_secs`
/// by a sample at or above `spike_threshold`.
pub fn has_free_fall_signature<S: Scalar>(
    trace: &SensorTrace<S>,
    low_threshold: S,
    min_low_secs: f64,
    spike_threshold: S,
    within_secs: f64,
) -> bool {
    let rate = trace.sample_rate_hz.to_f64();
    let need = (min_low_secs * rate).round() as usize;
    let (start, len) = longest_low_accel_run(trace, low_threshold);
    if len < need {
        return false;
    }
    let mags = accel_magnitudes(trace);
    let search_end = (start + len + (within_secs * rate).round() as usize).min(mags.len());
    mags[start + len..search_end].iter().any(|&m| m >= spike_threshold)
}

/// Total accumulated rotation of an angle series: max |unwrapped - first|.
pub fn accumulated_rotation<S: Scalar>(series: &[S]) -> S {
    let unwrapped = unwrap_angles(series);
    let first = unwrapped[0];
    unwrapped
        .iter()
        .map(|&v| (v - first).abs())
        .fold(S::zero(), |acc, d| if d > acc { d } else { acc })
}

/// Longest same-direction drift of a smoothed, strided angle series:
/// returns (duration in seconds, total absolute change over the run).
/// Smoothing and striding make the scan robust to per-sample noise.
pub fn longest_monotone_drift<S: Scalar>(
    series: &[S],
    rate_hz: f64,
    smooth_secs: f64,
    dead_band: f64,
) -> (f64, f64) {
    let vals: Vec<f64> = unwrap_angles(series).into_iter().map(Scalar::to_f64).collect();
    let w = ((smooth_secs * rate_hz).round() as usize).clamp(1, vals.len());
    let smoothed: Vec<f64> = vals
        .windows(w)
        .map(|win| win.iter().sum::<f64>() / w as f64)
        .collect();
    let stride = w.max(1);
    let strided: Vec<f64> = smoothed.iter().step_by(stride).copied().collect();
    let stride_secs = stride as f64 / rate_hz;
    let (mut best_len, mut best_change) = (0usize, 0.0f64);
    let (mut run_len, mut run_change, mut run_sign) = (0usize, 0.0f64, 0i8);
    for d in strided.windows(2).map(|p| p[1] - p[0]) {
        let sign = if d > dead_band {
            1
        } else if d < -dead_band {
            -1
        } else {
            0
        };
        if sign != 0 && sign == run_sign {
            run_len += 1;
            run_change += d.abs();
        } else if sign != 0 {
            run_sign = sign;
            run_len = 1;
            run_change = d.abs();
        } else {
            run_sign = 0;
            run_len = 0;
            run_change = 0.0;
        }
        if run_len > best_len || (run_len == best_len && run_change > best_change) {
            best_len = run_len;
            best_change = run_change;
        }
    }
    (best_len as f64 * stride_secs, best_change)
}
