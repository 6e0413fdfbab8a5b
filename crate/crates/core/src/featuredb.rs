//! Labeled feature matrices: assembly, standardization, persistence and
//! the correlation validity check.

use std::fmt::Write as _;
use std::path::Path;

use crate::case::CaseLabel;
use crate::error::{Error, Result};
use crate::features::{self, FeatureVector, FEATURE_COUNT};
use crate::scalar::Scalar;
use crate::trace::SensorTrace;

/// One labeled row of the feature database.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow<S: Scalar> {
    pub case: CaseLabel,
    pub sample_id: u32,
    pub features: FeatureVector<S>,
}

/// Rows-by-54 labeled feature matrix, grouped by case in label order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<S: Scalar> {
    rows: Vec<FeatureRow<S>>,
    column_names: Vec<String>,
}

impl<S: Scalar> FeatureMatrix<S> {
    /// Build from rows, enforcing ordering and uniqueness invariants.
    pub fn new(mut rows: Vec<FeatureRow<S>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("feature matrix needs at least one row".into()));
        }
        rows.sort_by_key(|r| (r.case, r.sample_id));
        for pair in rows.windows(2) {
            if pair[0].case == pair[1].case && pair[0].sample_id == pair[1].sample_id {
                return Err(Error::DuplicateSample {
                    case: pair[1].case,
                    sample_id: pair[1].sample_id,
                });
            }
        }
        Ok(FeatureMatrix { rows, column_names: features::feature_names() })
    }

    pub fn rows(&self) -> &[FeatureRow<S>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Indices of the rows labeled with `case`, in stored order.
    pub fn case_rows(&self, case: CaseLabel) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.case == case)
            .map(|(i, _)| i)
            .collect()
    }

    /// Total number of stored feature values (rows x 54).
    pub fn value_count(&self) -> usize {
        self.rows.len() * FEATURE_COUNT
    }

    /// Sub-matrix restricted to the given row indices.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let rows = indices
            .iter()
            .map(|&i| {
                self.rows.get(i).cloned().ok_or_else(|| {
                    Error::InvalidArgument(format!("row index {i} out of range"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FeatureMatrix::new(rows)
    }
}

/// Extract one feature row per trace; rows come out sorted by
/// (case, sample_id).
pub fn build_database<S: Scalar>(traces: &[SensorTrace<S>]) -> Result<FeatureMatrix<S>> {
    if traces.is_empty() {
        return Err(Error::InvalidArgument("no traces to extract features from".into()));
    }
    let rows = traces
        .iter()
        .map(|t| {
            Ok(FeatureRow {
                case: t.case,
                sample_id: t.sample_id,
                features: features::extract_sample_features(t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::new(rows)
}

/// Per-column z-score parameters fitted on a designated row subset.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams<S: Scalar> {
    pub mean: Vec<S>,
    pub std: Vec<S>,
    /// Columns whose fit-set std was zero; passed through unchanged.
    pub constant_columns: Vec<bool>,
}

impl<S: Scalar> StandardizationParams<S> {
    /// No-op parameters for `n` columns.
    pub fn identity(n: usize) -> Self {
        StandardizationParams {
            mean: vec![S::zero(); n],
            std: vec![S::one(); n],
            constant_columns: vec![false; n],
        }
    }

    pub fn apply(&self, row: &[S]) -> Result<Vec<S>> {
        if row.len() != self.mean.len() {
            return Err(Error::ShapeMismatch(format!(
                "row has {} values, params cover {}",
                row.len(),
                self.mean.len()
            )));
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect())
    }
}

/// Z-score all rows using moments computed over `fit_rows` only.
/// Zero-std columns are flagged and passed through unchanged.
pub fn standardize<S: Scalar>(
    matrix: &FeatureMatrix<S>,
    fit_rows: &[usize],
) -> Result<(FeatureMatrix<S>, StandardizationParams<S>)> {
    if fit_rows.is_empty() {
        return Err(Error::EmptyFitSet);
    }
    for &i in fit_rows {
        if i >= matrix.len() {
            return Err(Error::InvalidArgument(format!("fit row index {i} out of range")));
        }
    }
    let n_fit = S::from_usize(fit_rows.len());
    let mut mean = vec![S::zero(); FEATURE_COUNT];
    let mut std = vec![S::zero(); FEATURE_COUNT];
    let mut constant = vec![false; FEATURE_COUNT];
    for c in 0..FEATURE_COUNT {
        let m = fit_rows.iter().map(|&i| matrix.rows[i].features.values()[c]).sum::<S>() / n_fit;
        let var = fit_rows
            .iter()
            .map(|&i| {
                let d = matrix.rows[i].features.values()[c] - m;
                d * d
            })
            .sum::<S>()
            / n_fit;
        let s = var.sqrt();
        if s > S::zero() {
            mean[c] = m;
            std[c] = s;
        } else {
            mean[c] = S::zero();
            std[c] = S::one();
            constant[c] = true;
        }
    }
    let params = StandardizationParams { mean, std, constant_columns: constant };
    let rows = matrix
        .rows
        .iter()
        .map(|r| {
            Ok(FeatureRow {
                case: r.case,
                sample_id: r.sample_id,
                features: FeatureVector::from_values(params.apply(r.features.values())?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((FeatureMatrix::new(rows)?, params))
}

/// Pearson correlation of two equal-length vectors; None when either is
/// degenerate (zero variance).
pub fn pearson<S: Scalar>(a: &[S], b: &[S]) -> Option<S> {
    debug_assert_eq!(a.len(), b.len());
    let n = S::from_usize(a.len());
    let ma = a.iter().copied().sum::<S>() / n;
    let mb = b.iter().copied().sum::<S>() / n;
    let mut cov = S::zero();
    let mut va = S::zero();
    let mut vb = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == S::zero() || vb == S::zero() {
        return None;
    }
    let r = cov / (va * vb).sqrt();
    Some(r.min(S::one()).max(-S::one()))
}

/// Averaged row-pair correlations, per case pair and pooled.
#[derive(Debug, Clone)]
pub struct CorrelationReport<S: Scalar> {
    pub intra_case_mean: S,
    pub inter_case_mean: S,
    /// Symmetric 6x6 matrix of mean correlation per case pair.
    pub pair_means: [[S; 6]; 6],
    /// Rows excluded because their 54-vector had zero variance.
    pub degenerate_rows: usize,
}

impl<S: Scalar> CorrelationReport<S> {
    /// Human-readable summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "correlation validity check");
        let _ = writeln!(out, "  intra-case mean: {:.4}", self.intra_case_mean.to_f64());
        let _ = writeln!(out, "  inter-case mean: {:.4}", self.inter_case_mean.to_f64());
        let _ = writeln!(out, "  degenerate rows excluded: {}", self.degenerate_rows);
        let _ = writeln!(
            out,
            "  intra > inter: {}",
            if self.intra_case_mean > self.inter_case_mean { "yes" } else { "no" }
        );
        out.push('\n');
        let _ = write!(out, "case");
        for case in CaseLabel::ALL {
            let _ = write!(out, "{:>8}", case.letter());
        }
        out.push('\n');
        for (i, case) in CaseLabel::ALL.iter().enumerate() {
            let _ = write!(out, "{:<4}", case.letter());
            for j in 0..6 {
                let _ = write!(out, "{:>8.4}", self.pair_means[i][j].to_f64());
            }
            out.push('\n');
        }
        out
    }

    /// Machine-readable CSV of the 6x6 pair-mean matrix.
    pub fn pair_means_csv(&self) -> String {
        let mut out = String::from("case");
        for case in CaseLabel::ALL {
            let _ = write!(out, ",{}", case.letter());
        }
        out.push('\n');
        for (i, case) in CaseLabel::ALL.iter().enumerate() {
            let _ = write!(out, "{}", case.letter());
            for j in 0..6 {
                let _ = write!(out, ",{}", fmt_sig17(self.pair_means[i][j]));
            }
            out.push('\n');
        }
        out
    }
}

/// Mean Pearson correlation between every pair of rows, bucketed by case
/// pair. Expects a standardized matrix with at least 2 rows per case.
pub fn validate_correlation<S: Scalar>(matrix: &FeatureMatrix<S>) -> Result<CorrelationReport<S>> {
    for case in CaseLabel::ALL {
        let have = matrix.case_rows(case).len();
        if have < 2 {
            return Err(Error::InsufficientClassRows { case, have, need: 2 });
        }
    }
    let degenerate: Vec<bool> = matrix
        .rows
        .iter()
        .map(|r| {
            let v = r.features.values();
            let m = v.iter().copied().sum::<S>() / S::from_usize(v.len());
            v.iter().all(|&x| x == m)
        })
        .collect();
    let mut sums = [[S::zero(); 6]; 6];
    let mut counts = [[0usize; 6]; 6];
    for (i, (ri, &deg_i)) in matrix.rows.iter().zip(&degenerate).enumerate() {
        if deg_i {
            continue;
        }
        for (rj, &deg_j) in matrix.rows.iter().zip(&degenerate).skip(i + 1) {
            if deg_j {
                continue;
            }
            let r = pearson(ri.features.values(), rj.features.values())
                .expect("non-degenerate rows");
            let (a, b) = (ri.case.index(), rj.case.index());
            sums[a][b] += r;
            counts[a][b] += 1;
            if a != b {
                sums[b][a] += r;
                counts[b][a] += 1;
            }
        }
    }
    let mut pair_means = [[S::zero(); 6]; 6];
    let mut intra_sum = S::zero();
    let mut intra_n = 0usize;
    let mut inter_sum = S::zero();
    let mut inter_n = 0usize;
    for a in 0..6 {
        for b in 0..6 {
            if counts[a][b] > 0 {
                pair_means[a][b] = sums[a][b] / S::from_usize(counts[a][b]);
            }
            if b >= a {
                if a == b {
                    intra_sum += sums[a][b];
                    intra_n += counts[a][b];
                } else {
                    inter_sum += sums[a][b];
                    inter_n += counts[a][b];
                }
            }
        }
    }
    if intra_n == 0 || inter_n == 0 {
        return Err(Error::InvalidArgument(
            "all rows of some case are degenerate; correlation undefined".into(),
        ));
    }
    Ok(CorrelationReport {
        intra_case_mean: intra_sum / S::from_usize(intra_n),
        inter_case_mean: inter_sum / S::from_usize(inter_n),
        pair_means,
        degenerate_rows: degenerate.iter().filter(|&&d| d).count(),
    })
}

/// 17-significant-digit decimal rendering; round-trips bit-exactly.
pub fn fmt_sig17<S: Scalar>(v: S) -> String {
    format!("{:.16e}", v.to_f64())
}

/// Serialize the matrix as CSV with header `case,sample_id,<54 names>`.
pub fn to_csv_string<S: Scalar>(matrix: &FeatureMatrix<S>) -> String {
    let mut out = String::from("case,sample_id");
    for name in matrix.column_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for row in matrix.rows() {
        let _ = write!(out, "{},{}", row.case.letter(), row.sample_id);
        for &v in row.features.values() {
            out.push(',');
            out.push_str(&fmt_sig17(v));
        }
        out.push('\n');
    }
    out
}

/// Parse a matrix from the CSV schema produced by [`to_csv_string`].
pub fn from_csv_str<S: Scalar>(source: &str) -> Result<FeatureMatrix<S>> {
    let mut lines = source.lines().enumerate();
    let expected_header = {
        let mut h = String::from("case,sample_id");
        for name in features::feature_names() {
            h.push(',');
            h.push_str(&name);
        }
        h
    };
    match lines.next() {
        Some((_, line)) if line.trim_end() == expected_header => {}
        Some((_, line)) => {
            return Err(Error::SchemaMismatch {
                detail: format!("unexpected header: {line:?}"),
                row: Some(1),
            });
        }
        None => {
            return Err(Error::SchemaMismatch { detail: "empty file".into(), row: None });
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let row_no = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 + FEATURE_COUNT {
            return Err(Error::SchemaMismatch {
                detail: format!("expected {} columns, got {}", 2 + FEATURE_COUNT, fields.len()),
                row: Some(row_no),
            });
        }
        let case = fields[0]
            .chars()
            .next()
            .filter(|_| fields[0].len() == 1)
            .and_then(CaseLabel::from_letter)
            .ok_or_else(|| Error::SchemaMismatch {
                detail: format!("unknown case label {:?}", fields[0]),
                row: Some(row_no),
            })?;
        let sample_id: u32 = fields[1].parse().map_err(|_| Error::SchemaMismatch {
            detail: format!("bad sample_id {:?}", fields[1]),
            row: Some(row_no),
        })?;
        let mut values = Vec::with_capacity(FEATURE_COUNT);
        for f in &fields[2..] {
            let v: f64 = f.parse().map_err(|_| Error::SchemaMismatch {
                detail: format!("bad feature value {f:?}"),
                row: Some(row_no),
            })?;
            values.push(S::from_f64(v));
        }
        rows.push(FeatureRow { case, sample_id, features: FeatureVector::from_values(values)? });
    }
    if rows.is_empty() {
        return Err(Error::SchemaMismatch { detail: "no data rows".into(), row: None });
    }
    FeatureMatrix::new(rows)
}

/// Write the matrix CSV to a file.
pub fn save_matrix<S: Scalar>(matrix: &FeatureMatrix<S>, destination: &Path) -> Result<()> {
    std::fs::write(destination, to_csv_string(matrix))?;
    Ok(())
}

/// Read a matrix CSV from a file.
pub fn load_matrix<S: Scalar>(source: &Path) -> Result<FeatureMatrix<S>> {
    from_csv_str(&std::fs::read_to_string(source)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_dataset, MotionModelParams};

    fn row(case: CaseLabel, id: u32, values: Vec<f64>) -> FeatureRow<f64> {
        FeatureRow { case, sample_id: id, features: FeatureVector::from_values(values).unwrap() }
    }

    fn constant_row(case: CaseLabel, id: u32, fill: f64) -> FeatureRow<f64> {
        row(case, id, vec![fill; FEATURE_COUNT])
    }

    #[test]
    fn build_database_sorts_and_sizes() {
        let params = MotionModelParams::default();
        let mut traces = generate_dataset::<f64>(2, 9, &params).unwrap();
        traces.reverse();
        let db = build_database(&traces).unwrap();
        assert_eq!(db.len(), 12);
        assert_eq!(db.value_count(), 12 * 54);
        let order: Vec<(CaseLabel, u32)> = db.rows().iter().map(|r| (r.case, r.sample_id)).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
        assert!(db.rows().iter().all(|r| r.features.values().iter().all(|v| v.is_finite())));
    }

    #[test]
    fn duplicates_are_rejected() {
        let rows = vec![
            constant_row(CaseLabel::Fall, 3, 1.0),
            constant_row(CaseLabel::Fall, 3, 2.0),
        ];
        assert!(matches!(
            FeatureMatrix::new(rows),
            Err(Error::DuplicateSample { case: CaseLabel::Fall, sample_id: 3 })
        ));
    }

    fn two_row_matrix() -> FeatureMatrix<f64> {
        let mut v1 = vec![0.0; FEATURE_COUNT];
        let mut v2 = vec![0.0; FEATURE_COUNT];
        v1[0] = 1.0;
        v2[0] = 3.0;
        FeatureMatrix::new(vec![
            row(CaseLabel::NormalTouchKeep, 0, v1),
            row(CaseLabel::NormalTouchKeep, 1, v2),
        ])
        .unwrap()
    }

    #[test]
    fn standardize_maps_two_values_to_unit_scores() {
        let m = two_row_matrix();
        let (z, params) = standardize(&m, &[0, 1]).unwrap();
        assert_eq!(z.rows()[0].features.values()[0], -1.0);
        assert_eq!(z.rows()[1].features.values()[0], 1.0);
        assert!(!params.constant_columns[0]);
        // constant columns unchanged and flagged
        assert!(params.constant_columns[1]);
        assert_eq!(z.rows()[0].features.values()[1], 0.0);
        assert!(matches!(standardize(&m, &[]), Err(Error::EmptyFitSet)));
    }

    #[test]
    fn standardized_fit_columns_have_zero_mean_unit_std() {
        let params = MotionModelParams::default();
        let traces = generate_dataset::<f64>(3, 4, &params).unwrap();
        let db = build_database(&traces).unwrap();
        let fit: Vec<usize> = (0..db.len()).collect();
        let (z, p) = standardize(&db, &fit).unwrap();
        for c in 0..FEATURE_COUNT {
            if p.constant_columns[c] {
                continue;
            }
            let col: Vec<f64> = z.rows().iter().map(|r| r.features.values()[c]).collect();
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / col.len() as f64;
            assert!(m.abs() < 1e-12, "column {c} mean {m}");
            assert!((var.sqrt() - 1.0).abs() < 1e-12, "column {c} std {}", var.sqrt());
        }
    }

    #[test]
    fn pearson_basics() {
        let a = [1.0f64, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((pearson(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&a, &[5.0; 4]).is_none());
    }

    #[test]
    fn identical_rows_per_case_give_intra_one() {
        let mut rows = Vec::new();
        for (i, case) in CaseLabel::ALL.iter().enumerate() {
            for id in 0..2u32 {
                let mut v: Vec<f64> = (0..FEATURE_COUNT).map(|k| (k as f64).sin()).collect();
                v[i] += 10.0;
                rows.push(row(*case, id, v));
            }
        }
        let report = validate_correlation(&FeatureMatrix::new(rows).unwrap()).unwrap();
        assert!((report.intra_case_mean - 1.0).abs() < 1e-12);
        assert!(report.inter_case_mean < 1.0);
        assert_eq!(report.degenerate_rows, 0);
    }

    #[test]
    fn orthogonal_rows_correlate_to_zero() {
        let mut v1: Vec<f64> = Vec::with_capacity(FEATURE_COUNT);
        let mut v2: Vec<f64> = Vec::with_capacity(FEATURE_COUNT);
        for k in 0..52 {
            v1.push(if k % 2 == 0 { 1.0 } else { -1.0 });
            v2.push(if k % 4 < 2 { 1.0 } else { -1.0 });
        }
        v1.extend([1.0, -1.0]);
        v2.extend([0.0, 0.0]);
        assert!(pearson(&v1, &v2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn degenerate_rows_are_excluded_and_counted() {
        let mut rows = Vec::new();
        for case in CaseLabel::ALL {
            let base: Vec<f64> =
                (0..FEATURE_COUNT).map(|k| ((k + case.index()) as f64).cos()).collect();
            let mut other = base.clone();
            other[7] += 0.5;
            rows.push(row(case, 0, base));
            rows.push(row(case, 1, other));
        }
        rows.push(constant_row(CaseLabel::Fall, 9, 3.25));
        let report = validate_correlation(&FeatureMatrix::new(rows).unwrap()).unwrap();
        assert_eq!(report.degenerate_rows, 1);
    }

    #[test]
    fn correlation_requires_two_rows_per_case() {
        let rows = vec![
            constant_row(CaseLabel::NormalTouchKeep, 0, 1.0),
            constant_row(CaseLabel::NormalTouchKeep, 1, 2.0),
        ];
        assert!(matches!(
            validate_correlation(&FeatureMatrix::new(rows).unwrap()),
            Err(Error::InsufficientClassRows { .. })
        ));
    }

    #[test]
    fn synthetic_intra_exceeds_inter() {
        let params = MotionModelParams::default();
        let traces = generate_dataset::<f64>(4, 17, &params).unwrap();
        let db = build_database(&traces).unwrap();
        let fit: Vec<usize> = (0..db.len()).collect();
        let (z, _) = standardize(&db, &fit).unwrap();
        let report = validate_correlation(&z).unwrap();
        assert!(
            report.intra_case_mean > report.inter_case_mean,
            "intra {} vs inter {}",
            report.intra_case_mean,
            report.inter_case_mean
        );
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let params = MotionModelParams::default();
        let traces = generate_dataset::<f64>(2, 23, &params).unwrap();
        let db = build_database(&traces).unwrap();
        let text = to_csv_string(&db);
        let back: FeatureMatrix<f64> = from_csv_str(&text).unwrap();
        assert_eq!(db, back);
        assert_eq!(to_csv_string(&back), text);
    }

    #[test]
    fn schema_errors_carry_row_numbers() {
        let db = two_row_matrix();
        let text = to_csv_string(&db);
        // drop last column of the first data row
        let mut lines: Vec<&str> = text.lines().collect();
        let trimmed = lines[1].rsplit_once(',').unwrap().0;
        lines[1] = trimmed;
        let broken = lines.join("\n");
        match from_csv_str::<f64>(&broken) {
            Err(Error::SchemaMismatch { row: Some(2), .. }) => {}
            other => panic!("expected SchemaMismatch at row 2, got {other:?}"),
        }
        // unknown case letter
        let replaced = text.replacen("A,", "G,", 1);
        match from_csv_str::<f64>(&replaced) {
            Err(Error::SchemaMismatch { row: Some(2), detail }) => {
                assert!(detail.contains('G'), "{detail}");
            }
            other => panic!("expected SchemaMismatch for case G, got {other:?}"),
        }
        // wrong header
        match from_csv_str::<f64>(&text.replacen("case,", "klass,", 1)) {
            Err(Error::SchemaMismatch { row: Some(1), .. }) => {}
            other => panic!("expected header mismatch, got {other:?}"),
        }
    }

    #[test]
    fn save_and_load_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let db = two_row_matrix();
        save_matrix(&db, &path).unwrap();
        let back: FeatureMatrix<f64> = load_matrix(&path).unwrap();
        assert_eq!(db, back);
    }
}
