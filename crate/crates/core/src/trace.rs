//! Sensor trace types and angle normalization.

use crate::case::CaseLabel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Wrap an angle into the azimuth range `[0, 360)`.
pub fn wrap_azimuth<S: Scalar>(x: S) -> S {
    let full = S::from_f64(360.0);
    let mut r = x % full;
    if r < S::zero() {
        r += full;
    }
    // rounding can land exactly on 360 for tiny negative inputs
    if r >= full {
        S::zero()
    } else {
        r
    }
}

/// Wrap an angle into the pitch range `[-180, 180]`.
pub fn wrap_pitch<S: Scalar>(x: S) -> S {
    let half = S::from_f64(180.0);
    wrap_azimuth(x + half) - half
}

/// Fold an angle into the roll range `[-90, 90]`.
///
/// Roll reflects rather than wraps: readings past +/-90 fold back, the
/// behaviour of an asin-derived angle.
pub fn wrap_roll<S: Scalar>(x: S) -> S {
    let p = wrap_pitch(x);
    let quarter = S::from_f64(90.0);
    let half = S::from_f64(180.0);
    if p > quarter {
        half - p
    } else if p < -quarter {
        -half - p
    } else {
        p
    }
}

/// Wrap one orientation triple `(azimuth, pitch, roll)` into canonical ranges.
pub fn wrap_orientation<S: Scalar>(o: [S; 3]) -> [S; 3] {
    [wrap_azimuth(o[0]), wrap_pitch(o[1]), wrap_roll(o[2])]
}

/// Unwrap a wrapped angle series (period 360) into a continuous one.
///
/// Jumps larger than half a period between adjacent samples are treated as
/// wrap-arounds.
pub fn unwrap_angles<S: Scalar>(series: &[S]) -> Vec<S> {
    let full = S::from_f64(360.0);
    let half = S::from_f64(180.0);
    let mut out = Vec::with_capacity(series.len());
    let mut offset = S::zero();
    for (k, &w) in series.iter().enumerate() {
        if k > 0 {
            let mut d = w - series[k - 1];
            while d > half {
                d -= full;
                offset -= full;
            }
            while d < -half {
                d += full;
                offset += full;
            }
        }
        out.push(w + offset);
    }
    out
}

/// A parsed trace with its raw, possibly non-uniform timestamps.
///
/// Produced by [`crate::ingest::parse_trace`]; regularized into a
/// [`SensorTrace`] by [`crate::ingest::resample_window`].
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrace<S: Scalar> {
    pub case: CaseLabel,
    pub sample_id: u32,
    /// Strictly increasing timestamps in seconds.
    pub t: Vec<S>,
    pub accel: Vec<[S; 3]>,
    pub orient: Vec<[S; 3]>,
}

impl<S: Scalar> RawTrace<S> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn duration(&self) -> S {
        if self.t.len() < 2 {
            S::zero()
        } else {
            *self.t.last().unwrap() - self.t[0]
        }
    }
}

/// A canonical fixed-rate trace: one labeled sample of the dataset.
///
/// Sample `k` is at `k / sample_rate_hz` seconds. `accel` is in m/s^2,
/// `orient` holds `(azimuth, pitch, roll)` in degrees, wrapped into
/// `[0, 360)`, `[-180, 180]` and `[-90, 90]` respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrace<S: Scalar> {
    pub case: CaseLabel,
    pub sample_id: u32,
    pub sample_rate_hz: S,
    pub accel: Vec<[S; 3]>,
    pub orient: Vec<[S; 3]>,
}

impl<S: Scalar> SensorTrace<S> {
    /// Validates the length and rate invariants.
    pub fn new(
        case: CaseLabel,
        sample_id: u32,
        sample_rate_hz: S,
        accel: Vec<[S; 3]>,
        orient: Vec<[S; 3]>,
    ) -> Result<Self> {
        if !(sample_rate_hz > S::zero()) {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if accel.len() != orient.len() {
            return Err(Error::ShapeMismatch(format!(
                "accel has {} samples, orient has {}",
                accel.len(),
                orient.len()
            )));
        }
        if accel.len() < 2 {
            return Err(Error::TooShort("trace needs at least 2 samples".into()));
        }
        Ok(SensorTrace { case, sample_id, sample_rate_hz, accel, orient })
    }

    pub fn len(&self) -> usize {
        self.accel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accel.is_empty()
    }

    /// Timestamp of sample `k` in seconds.
    pub fn time_at(&self, k: usize) -> S {
        S::from_usize(k) / self.sample_rate_hz
    }

    /// Total acceleration magnitude `|a|` at sample `k`.
    pub fn accel_magnitude(&self, k: usize) -> S {
        let [x, y, z] = self.accel[k];
        (x * x + y * y + z * z).sqrt()
    }

    /// One acceleration axis as a series (0 = x, 1 = y, 2 = z).
    pub fn accel_axis(&self, axis: usize) -> Vec<S> {
        self.accel.iter().map(|a| a[axis]).collect()
    }

    /// One orientation angle as a series (0 = azimuth, 1 = pitch, 2 = roll).
    pub fn orient_axis(&self, axis: usize) -> Vec<S> {
        self.orient.iter().map(|o| o[axis]).collect()
    }

    /// View as a raw trace with explicit timestamps, for re-resampling.
    pub fn to_raw(&self) -> RawTrace<S> {
        RawTrace {
            case: self.case,
            sample_id: self.sample_id,
            t: (0..self.len()).map(|k| self.time_at(k)).collect(),
            accel: self.accel.clone(),
            orient: self.orient.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn azimuth_wraps_into_range() {
        assert_eq!(wrap_azimuth(0.0f64), 0.0);
        assert_eq!(wrap_azimuth(360.0f64), 0.0);
        assert_eq!(wrap_azimuth(-1.0f64), 359.0);
        assert_eq!(wrap_azimuth(725.0f64), 5.0);
        assert_eq!(wrap_azimuth(359.5f64), 359.5);
    }

    #[test]
    fn pitch_wraps_into_range() {
        assert_eq!(wrap_pitch(0.0f64), 0.0);
        assert_eq!(wrap_pitch(180.0f64), -180.0);
        assert_eq!(wrap_pitch(-180.0f64), -180.0);
        assert_eq!(wrap_pitch(190.0f64), -170.0);
        assert_eq!(wrap_pitch(-190.0f64), 170.0);
    }

    #[test]
    fn roll_folds_into_range() {
        assert_eq!(wrap_roll(45.0f64), 45.0);
        assert_eq!(wrap_roll(91.0f64), 89.0);
        assert_eq!(wrap_roll(-91.0f64), -89.0);
        assert_eq!(wrap_roll(180.0f64), 0.0);
        assert_eq!(wrap_roll(-180.0f64), 0.0);
        assert_eq!(wrap_roll(90.0f64), 90.0);
    }

    #[test]
    fn unwrap_removes_wraparound_jumps() {
        let wrapped = [350.0f64, 355.0, 0.0, 5.0, 10.0];
        let u = unwrap_angles(&wrapped);
        assert_eq!(u, vec![350.0, 355.0, 360.0, 365.0, 370.0]);

        let down = [10.0f64, 5.0, 355.0];
        assert_eq!(unwrap_angles(&down), vec![10.0, 5.0, -5.0]);
    }

    #[test]
    fn trace_invariants_enforced() {
        let case = CaseLabel::NormalTouchKeep;
        let acc = vec![[0.0f64; 3]; 3];
        let ori = vec![[0.0f64; 3]; 3];
        assert!(SensorTrace::new(case, 0, 50.0, acc.clone(), ori.clone()).is_ok());
        assert!(SensorTrace::new(case, 0, 0.0, acc.clone(), ori.clone()).is_err());
        assert!(SensorTrace::new(case, 0, 50.0, acc.clone(), ori[..2].to_vec()).is_err());
        assert!(SensorTrace::new(case, 0, 50.0, acc[..1].to_vec(), ori[..1].to_vec()).is_err());
    }
}
