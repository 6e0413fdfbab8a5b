//! Parse, serialize and regularize trace files.
//!
//! Trace files are UTF-8 CSV with header `t,ax,ay,az,azimuth,pitch,roll`,
//! `.` decimal separator and `\n` newlines. Files follow the naming
//! convention `<case letter>_<sample_id>.csv` inside a dataset directory.

use std::path::{Path, PathBuf};

use crate::case::CaseLabel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trace::{unwrap_angles, wrap_orientation, RawTrace, SensorTrace};

/// Exact header line of a trace file.
pub const TRACE_HEADER: &str = "t,ax,ay,az,azimuth,pitch,roll";

/// Parse trace text into a raw trace, preserving its original timing.
///
/// Angle fields are wrapped into their canonical ranges. Line numbers in
/// errors are 1-based and count the header line.
pub fn parse_trace<S: Scalar>(source: &str, case: CaseLabel, sample_id: u32) -> Result<RawTrace<S>> {
    let mut lines = source.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == TRACE_HEADER => {}
        Some((_, header)) => {
            return Err(Error::MalformedRow {
                line: 1,
                detail: format!("expected header `{TRACE_HEADER}`, got `{}`", header.trim_end()),
            })
        }
        None => return Err(Error::TooShort("empty trace file".into())),
    }

    let mut t: Vec<S> = Vec::new();
    let mut accel = Vec::new();
    let mut orient = Vec::new();
    for (idx, raw_line) in lines {
        let line_no = idx + 1;
        let line = raw_line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::MalformedRow {
                line: line_no,
                detail: format!("expected 7 columns, got {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 7];
        for (i, f) in fields.iter().enumerate() {
            vals[i] = f.trim().parse::<f64>().map_err(|_| Error::MalformedRow {
                line: line_no,
                detail: format!("unparsable number `{f}`"),
            })?;
        }
        let ts = S::from_f64(vals[0]);
        if let Some(&prev) = t.last() {
            if !(ts > prev) {
                return Err(Error::NonMonotonicTime { line: line_no });
            }
        }
        t.push(ts);
        accel.push([S::from_f64(vals[1]), S::from_f64(vals[2]), S::from_f64(vals[3])]);
        orient.push(wrap_orientation([
            S::from_f64(vals[4]),
            S::from_f64(vals[5]),
            S::from_f64(vals[6]),
        ]));
    }

    if t.len() < 2 {
        return Err(Error::TooShort(format!("{} data rows, need at least 2", t.len())));
    }
    Ok(RawTrace { case, sample_id, t, accel, orient })
}

/// Format a value at 9 significant digits, the trace-file precision.
fn fmt_sig9(v: f64) -> String {
    format!("{:.8e}", v)
}

/// Serialize a canonical trace to trace-file text.
///
/// Numeric fields are written at 9 significant digits, so
/// serialize -> parse -> serialize is a text fixpoint.
pub fn serialize_trace<S: Scalar>(trace: &SensorTrace<S>) -> String {
    let mut out = String::with_capacity(32 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for k in 0..trace.len() {
        let [ax, ay, az] = trace.accel[k];
        let [azm, pit, rol] = trace.orient[k];
        out.push_str(&fmt_sig9(trace.time_at(k).to_f64()));
        for v in [ax, ay, az, azm, pit, rol] {
            out.push(',');
            out.push_str(&fmt_sig9(v.to_f64()));
        }
        out.push('\n');
    }
    out
}

/// Linear interpolation of every channel onto a uniform grid.
///
/// The grid starts at the trace's first timestamp and has exactly `length`
/// points spaced `1 / rate_hz` apart; grid points past the end of the trace
/// hold the last value. Angle channels are interpolated on their unwrapped
/// representation and re-wrapped; grid points that land exactly on a source
/// sample take that sample's value unchanged, which makes the operation
/// idempotent on already-canonical traces.
pub fn resample_window<S: Scalar>(
    raw: &RawTrace<S>,
    rate_hz: S,
    length: usize,
) -> Result<SensorTrace<S>> {
    if !(rate_hz > S::zero()) {
        return Err(Error::InvalidArgument("resample rate must be positive".into()));
    }
    if length < 2 {
        return Err(Error::InvalidArgument("resample length must be at least 2".into()));
    }
    if raw.len() < 2 {
        return Err(Error::InvalidArgument("trace needs at least 2 samples".into()));
    }
    if !(raw.duration() > S::zero()) {
        return Err(Error::InvalidArgument("trace duration must be positive".into()));
    }

    let n = raw.len();
    let t0 = raw.t[0];
    let unwrapped: [Vec<S>; 3] = [
        unwrap_angles(&raw.orient.iter().map(|o| o[0]).collect::<Vec<_>>()),
        unwrap_angles(&raw.orient.iter().map(|o| o[1]).collect::<Vec<_>>()),
        unwrap_angles(&raw.orient.iter().map(|o| o[2]).collect::<Vec<_>>()),
    ];

    let mut accel = Vec::with_capacity(length);
    let mut orient = Vec::with_capacity(length);
    let mut seg = 0usize; // grid times are increasing, so the cursor only advances
    for k in 0..length {
        let tau = t0 + S::from_usize(k) / rate_hz;
        while seg + 2 < n && raw.t[seg + 1] < tau {
            seg += 1;
        }
        let (i, j) = (seg, seg + 1);
        if tau >= raw.t[n - 1] {
            accel.push(raw.accel[n - 1]);
            orient.push(raw.orient[n - 1]);
        } else if tau == raw.t[i] {
            accel.push(raw.accel[i]);
            orient.push(raw.orient[i]);
        } else if tau == raw.t[j] {
            accel.push(raw.accel[j]);
            orient.push(raw.orient[j]);
        } else {
            // a + w (b - a) is exact for constant channels, unlike the
            // symmetric (1 - w) a + w b form.
            let w = (tau - raw.t[i]) / (raw.t[j] - raw.t[i]);
            let a = raw.accel[i];
            let b = raw.accel[j];
            accel.push([
                a[0] + w * (b[0] - a[0]),
                a[1] + w * (b[1] - a[1]),
                a[2] + w * (b[2] - a[2]),
            ]);
            orient.push(wrap_orientation([
                unwrapped[0][i] + w * (unwrapped[0][j] - unwrapped[0][i]),
                unwrapped[1][i] + w * (unwrapped[1][j] - unwrapped[1][i]),
                unwrapped[2][i] + w * (unwrapped[2][j] - unwrapped[2][i]),
            ]));
        }
    }

    SensorTrace::new(raw.case, raw.sample_id, rate_hz, accel, orient)
}

/// Resample an existing canonical trace onto a new grid.
pub fn resample_trace<S: Scalar>(
    trace: &SensorTrace<S>,
    rate_hz: S,
    length: usize,
) -> Result<SensorTrace<S>> {
    resample_window(&trace.to_raw(), rate_hz, length)
}

/// File name for a trace inside a dataset directory.
pub fn trace_file_name(case: CaseLabel, sample_id: u32) -> String {
    format!("{}_{}.csv", case.letter(), sample_id)
}

/// Parse a `<case letter>_<sample_id>.csv` file name.
pub fn parse_trace_file_name(name: &str) -> Option<(CaseLabel, u32)> {
    let stem = name.strip_suffix(".csv")?;
    let (letter, id) = stem.split_once('_')?;
    let case = letter.parse::<CaseLabel>().ok()?;
    let sample_id = id.parse::<u32>().ok()?;
    Some((case, sample_id))
}

/// List the trace files in a dataset directory, sorted by (case, sample_id).
///
/// Files that do not follow the naming convention (such as `manifest.csv`)
/// are ignored.
pub fn scan_dataset_dir(dir: &Path) -> Result<Vec<(CaseLabel, u32, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
            if let Some((case, sample_id)) = parse_trace_file_name(name) {
                out.push((case, sample_id, path));
            }
        }
    }
    out.sort_by_key(|(case, id, _)| (*case, *id));
    Ok(out)
}

/// Read and parse one trace file.
pub fn read_trace_file<S: Scalar>(path: &Path, case: CaseLabel, sample_id: u32) -> Result<RawTrace<S>> {
    let text = std::fs::read_to_string(path)?;
    parse_trace(&text, case, sample_id)
}
