//! The nine per-axis features and the 54-value per-sample vector.
//!
//! Ordering is sensor-major (accel then orient), axis-major within a sensor
//! (x/azimuth, y/pitch, z/roll) and feature-major within an axis
//! (mean, variance, rms, zcr, fft1..fft5). `feature_names` is the
//! authoritative column order for all downstream files.

use crate::error::{Error, Result};
use crate::fft;
use crate::scalar::Scalar;
use crate::trace::SensorTrace;

/// Features per axis.
pub const FEATURES_PER_AXIS: usize = 9;
/// Axes per sensor.
pub const AXES_PER_SENSOR: usize = 3;
/// Sensors per trace (accelerometer, orientation).
pub const SENSOR_COUNT: usize = 2;
/// Total features per sample: 2 sensors x 3 axes x 9 features.
pub const FEATURE_COUNT: usize = SENSOR_COUNT * AXES_PER_SENSOR * FEATURES_PER_AXIS;

/// Minimum canonical trace length for feature extraction.
pub const MIN_TRACE_LEN: usize = 16;

const FEATURE_SUFFIXES: [&str; FEATURES_PER_AXIS] =
    ["mean", "variance", "rms", "zcr", "fft1", "fft2", "fft3", "fft4", "fft5"];
const AXIS_NAMES: [[&str; 3]; 2] = [["x", "y", "z"], ["azimuth", "pitch", "roll"]];
const SENSOR_NAMES: [&str; 2] = ["accel", "orient"];

/// Arithmetic mean of the series.
pub fn mean<S: Scalar>(series: &[S]) -> Result<S> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(series.iter().copied().sum::<S>() / S::from_usize(series.len()))
}

/// Population variance (divisor N), two-pass.
pub fn variance<S: Scalar>(series: &[S]) -> Result<S> {
    let m = mean(series)?;
    let ss = series.iter().map(|&x| (x - m) * (x - m)).sum::<S>();
    Ok(ss / S::from_usize(series.len()))
}

/// Root-mean-square `sqrt(sum(x^2) / N)`.
pub fn rms<S: Scalar>(series: &[S]) -> Result<S> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let ss = series.iter().map(|&x| x * x).sum::<S>();
    Ok((ss / S::from_usize(series.len())).sqrt())
}

/// Zero-crossing count: adjacent pairs with opposite effective signs,
/// where the effective sign of 0 is positive.
pub fn zcr<S: Scalar>(series: &[S]) -> Result<usize> {
    if series.len() < 2 {
        return Err(Error::TooShort("zcr needs at least 2 samples".into()));
    }
    let positive = |x: S| x >= S::zero();
    Ok(series
        .windows(2)
        .filter(|w| positive(w[0]) != positive(w[1]))
        .count())
}

/// Magnitudes of DFT bins 1..5 (DC excluded), no normalization.
///
/// Power-of-two lengths go through the radix-2 transform; other lengths
/// evaluate the five bins directly.
pub fn fft5<S: Scalar>(series: &[S]) -> Result<[S; 5]> {
    let n = series.len();
    if n < MIN_TRACE_LEN {
        return Err(Error::TooShort(format!("fft5 needs at least {MIN_TRACE_LEN} samples, got {n}")));
    }
    let mut out = [S::zero(); 5];
    if n.is_power_of_two() {
        let (re, im) = fft::real_dft(series)?;
        for (i, slot) in out.iter_mut().enumerate() {
            let k = i + 1;
            *slot = (re[k] * re[k] + im[k] * im[k]).sqrt();
        }
    } else {
        for (i, slot) in out.iter_mut().enumerate() {
            let (re, im) = fft::dft_bin(series, i + 1);
            *slot = (re * re + im * im).sqrt();
        }
    }
    Ok(out)
}

/// The 54-value representation of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<S: Scalar> {
    values: Vec<S>,
}

impl<S: Scalar> FeatureVector<S> {
    pub fn from_values(values: Vec<S>) -> Result<Self> {
        if values.len() != FEATURE_COUNT {
            return Err(Error::ShapeMismatch(format!(
                "feature vector has {} values, expected {FEATURE_COUNT}",
                values.len()
            )));
        }
        Ok(FeatureVector { values })
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    /// Value at (sensor, axis, feature) in the documented ordering.
    pub fn at(&self, sensor: usize, axis: usize, feature: usize) -> S {
        self.values[feature_index(sensor, axis, feature)]
    }
}

/// Flat index of (sensor, axis, feature) in the documented ordering.
pub fn feature_index(sensor: usize, axis: usize, feature: usize) -> usize {
    debug_assert!(sensor < SENSOR_COUNT && axis < AXES_PER_SENSOR && feature < FEATURES_PER_AXIS);
    sensor * AXES_PER_SENSOR * FEATURES_PER_AXIS + axis * FEATURES_PER_AXIS + feature
}

/// The 54 column names, e.g. `accel_x_fft3`, in vector order.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(FEATURE_COUNT);
    for (s, sensor) in SENSOR_NAMES.iter().enumerate() {
        for axis in AXIS_NAMES[s] {
            for suffix in FEATURE_SUFFIXES {
                names.push(format!("{sensor}_{axis}_{suffix}"));
            }
        }
    }
    names
}

fn axis_features<S: Scalar>(series: &[S]) -> Result<[S; FEATURES_PER_AXIS]> {
    let spectrum = fft5(series)?;
    Ok([
        mean(series)?,
        variance(series)?,
        rms(series)?,
        S::from_usize(zcr(series)?),
        spectrum[0],
        spectrum[1],
        spectrum[2],
        spectrum[3],
        spectrum[4],
    ])
}

/// Extract the 54-value feature vector of one canonical trace.
pub fn extract_sample_features<S: Scalar>(trace: &SensorTrace<S>) -> Result<FeatureVector<S>> {
    if trace.len() < MIN_TRACE_LEN {
        return Err(Error::TooShort(format!(
            "feature extraction needs at least {MIN_TRACE_LEN} samples, got {}",
            trace.len()
        )));
    }
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    for axis in 0..AXES_PER_SENSOR {
        values.extend(axis_features(&trace.accel_axis(axis))?);
    }
    for axis in 0..AXES_PER_SENSOR {
        values.extend(axis_features(&trace.orient_axis(axis))?);
    }
    FeatureVector::from_values(values)
}
