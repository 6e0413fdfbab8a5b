//! Stratified splitting, pairwise evaluation over all 15 case pairs and
//! 4 network kinds, and the summary table arithmetic.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::case::CaseLabel;
use crate::error::{Error, Result};
use crate::featuredb::{fmt_sig17, standardize, FeatureMatrix};
use crate::nnets::{one_hot, train, GaConfig, NetworkKind, NetworkModel, TrainConfig};
use crate::scalar::Scalar;
use crate::seed::{derive, rng_from_seed};

/// Seed stream tags used when deriving per-stage seeds.
const SPLIT_STREAM: u64 = 11;
const TRAIN_STREAM: u64 = 12;

/// Row-index partition of a feature matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// Per class present in the matrix, send round(fraction * count) rows to
/// train and the rest to test, membership chosen by seeded shuffle.
pub fn stratified_split<S: Scalar>(
    matrix: &FeatureMatrix<S>,
    train_fraction: f64,
    seed: u64,
) -> Result<SplitPlan> {
    if !(0.0 < train_fraction && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for case in CaseLabel::ALL {
        let mut idx = matrix.case_rows(case);
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            return Err(Error::InsufficientClassRows { case, have: idx.len(), need: 2 });
        }
        idx.shuffle(&mut rng);
        let n_train = (train_fraction * idx.len() as f64).round() as usize;
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan { train, test, seed })
}

/// Outcome of one (pair, kind) task: the fitted model (standardization
/// baked in, label 1 = second case of the pair) and its held-out accuracy.
#[derive(Debug, Clone)]
pub struct PairOutcome<S: Scalar> {
    pub model: NetworkModel<S>,
    pub accuracy: f64,
}

/// Evaluate one (pair, kind) task: split, standardize on the training
/// rows, train, and score the held-out rows.
///
/// The split and the weight initialization both derive from `seed`;
/// `cfg.seed` itself is not used.
pub fn evaluate_pair_detailed<S: Scalar>(
    matrix: &FeatureMatrix<S>,
    pair: (CaseLabel, CaseLabel),
    kind: NetworkKind,
    cfg: &TrainConfig,
    ga: Option<&GaConfig>,
    train_fraction: f64,
    seed: u64,
) -> Result<PairOutcome<S>> {
    let mut indices = matrix.case_rows(pair.0);
    indices.extend(matrix.case_rows(pair.1));
    let sub = matrix.select(&indices)?;
    let plan = stratified_split(&sub, train_fraction, derive(seed, &[SPLIT_STREAM]))?;
    let (standardized, params) = standardize(&sub, &plan.train)?;
    let label_of = |case: CaseLabel| usize::from(case == pair.1);
    let x: Vec<Vec<S>> = plan
        .train
        .iter()
        .map(|&i| standardized.rows()[i].features.values().to_vec())
        .collect();
    let labels: Vec<usize> = plan.train.iter().map(|&i| label_of(sub.rows()[i].case)).collect();
    let y = one_hot(&labels);
    let train_cfg = TrainConfig { seed: derive(seed, &[TRAIN_STREAM]), ..cfg.clone() };
    let mut model = train(kind, &x, &y, &train_cfg, ga)?;
    model.standardization = params;
    let mut correct = 0usize;
    for &i in &plan.test {
        let (label, _) = model.predict(sub.rows()[i].features.values())?;
        if label == label_of(sub.rows()[i].case) {
            correct += 1;
        }
    }
    let accuracy = 100.0 * correct as f64 / plan.test.len() as f64;
    Ok(PairOutcome { model, accuracy })
}

/// [`evaluate_pair_detailed`] without keeping the model.
pub fn evaluate_pair<S: Scalar>(
    matrix: &FeatureMatrix<S>,
    pair: (CaseLabel, CaseLabel),
    kind: NetworkKind,
    cfg: &TrainConfig,
    ga: Option<&GaConfig>,
    train_fraction: f64,
    seed: u64,
) -> Result<f64> {
    evaluate_pair_detailed(matrix, pair, kind, cfg, ga, train_fraction, seed)
        .map(|outcome| outcome.accuracy)
}

/// The 15 x 4 accuracy table with its row, column and grand averages.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceTable {
    pub pairs: Vec<(CaseLabel, CaseLabel)>,
    pub entries: Vec<[f64; 4]>,
    pub row_averages: Vec<f64>,
    pub column_averages: [f64; 4],
    pub grand_average: f64,
}

impl PerformanceTable {
    /// Build from raw entries in pair order AB..EF, computing all averages.
    pub fn from_entries(entries: Vec<[f64; 4]>) -> Result<Self> {
        let pairs = CaseLabel::pairs();
        if entries.len() != pairs.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} pair rows, got {}",
                pairs.len(),
                entries.len()
            )));
        }
        for (i, row) in entries.iter().enumerate() {
            for &v in row {
                if !(0.0..=100.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!(
                        "accuracy {v} out of [0, 100] in row {i}"
                    )));
                }
            }
        }
        let row_averages: Vec<f64> =
            entries.iter().map(|r| r.iter().sum::<f64>() / 4.0).collect();
        let mut column_averages = [0.0; 4];
        for row in &entries {
            for (c, &v) in row.iter().enumerate() {
                column_averages[c] += v;
            }
        }
        for c in &mut column_averages {
            *c /= entries.len() as f64;
        }
        let grand_average =
            entries.iter().flatten().sum::<f64>() / (entries.len() * 4) as f64;
        Ok(PerformanceTable { pairs, entries, row_averages, column_averages, grand_average })
    }

    pub fn pair_name(&self, row: usize) -> String {
        let (a, b) = self.pairs[row];
        format!("{}{}", a.letter(), b.letter())
    }

    /// Report table with 2-decimal display rounding.
    pub fn markdown(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "| Pair |");
        for kind in NetworkKind::ALL {
            let _ = write!(out, " {kind} (%) |");
        }
        let _ = writeln!(out, " Average on cases (%) |");
        let _ = writeln!(out, "|------|{}", "------|".repeat(5));
        for (i, row) in self.entries.iter().enumerate() {
            let _ = write!(out, "| {} |", self.pair_name(i));
            for v in row {
                let _ = write!(out, " {v:.2} |");
            }
            let _ = writeln!(out, " {:.2} |", self.row_averages[i]);
        }
        let _ = write!(out, "| Average |");
        for v in self.column_averages {
            let _ = write!(out, " {v:.2} |");
        }
        let _ = writeln!(out, " {:.2} |", self.grand_average);
        out
    }

    /// Machine-readable CSV with unrounded values.
    pub fn csv(&self) -> String {
        let mut out = String::from("pair");
        for kind in NetworkKind::ALL {
            let _ = write!(out, ",{}", kind.to_string().to_ascii_lowercase());
        }
        out.push_str(",row_average\n");
        for (i, row) in self.entries.iter().enumerate() {
            let _ = write!(out, "{}", self.pair_name(i));
            for &v in row {
                let _ = write!(out, ",{}", fmt_sig17(v));
            }
            let _ = writeln!(out, ",{}", fmt_sig17(self.row_averages[i]));
        }
        let _ = write!(out, "average");
        for v in self.column_averages {
            let _ = write!(out, ",{}", fmt_sig17(v));
        }
        let _ = writeln!(out, ",{}", fmt_sig17(self.grand_average));
        out
    }

    /// Parse the [`csv`](Self::csv) format. Stored averages are discarded
    /// and recomputed from the entries.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = lines
            .next()
            .ok_or_else(|| Error::SchemaMismatch { detail: "empty table file".into(), row: None })?
            .1;
        let mut expected = String::from("pair");
        for kind in NetworkKind::ALL {
            let _ = write!(expected, ",{}", kind.to_string().to_ascii_lowercase());
        }
        expected.push_str(",row_average");
        if header.trim_end() != expected {
            return Err(Error::SchemaMismatch {
                detail: format!("unexpected header {header:?}"),
                row: Some(1),
            });
        }
        let pairs = CaseLabel::pairs();
        let mut entries: Vec<[f64; 4]> = Vec::with_capacity(pairs.len());
        for (idx, line) in lines {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols[0] == "average" {
                break;
            }
            if entries.len() == pairs.len() {
                return Err(Error::SchemaMismatch {
                    detail: "more pair rows than pairs".into(),
                    row: Some(idx + 1),
                });
            }
            let (a, b) = pairs[entries.len()];
            let want = format!("{}{}", a.letter(), b.letter());
            if cols[0] != want {
                return Err(Error::SchemaMismatch {
                    detail: format!("expected pair {want}, found {:?}", cols[0]),
                    row: Some(idx + 1),
                });
            }
            if cols.len() != 6 {
                return Err(Error::SchemaMismatch {
                    detail: format!("expected 6 columns, found {}", cols.len()),
                    row: Some(idx + 1),
                });
            }
            let mut row = [0.0; 4];
            for (c, slot) in row.iter_mut().enumerate() {
                *slot = cols[c + 1].parse::<f64>().map_err(|_| Error::SchemaMismatch {
                    detail: format!("bad accuracy {:?}", cols[c + 1]),
                    row: Some(idx + 1),
                })?;
            }
            entries.push(row);
        }
        if entries.is_empty() {
            return Err(Error::SchemaMismatch { detail: "empty table".into(), row: None });
        }
        Self::from_entries(entries)
    }
}

fn task_list() -> Vec<(usize, usize)> {
    let n_pairs = CaseLabel::pairs().len();
    let mut tasks = Vec::with_capacity(n_pairs * 4);
    for p in 0..n_pairs {
        for k in 0..4 {
            tasks.push((p, k));
        }
    }
    tasks
}

fn require_all_cases<S: Scalar>(matrix: &FeatureMatrix<S>) -> Result<()> {
    for case in CaseLabel::ALL {
        let have = matrix.case_rows(case).len();
        if have < 2 {
            return Err(Error::InsufficientClassRows { case, have, need: 2 });
        }
    }
    Ok(())
}

fn assemble(results: Vec<(usize, usize, f64)>) -> Result<PerformanceTable> {
    let mut entries = vec![[0.0; 4]; CaseLabel::pairs().len()];
    for (p, k, acc) in results {
        entries[p][k] = acc;
    }
    PerformanceTable::from_entries(entries)
}

/// Evaluate all 15 pairs x 4 kinds concurrently. Each task's seed is a
/// pure function of (master_seed, pair index, kind index), so the result
/// is identical to [`run_full_matrix_serial`].
pub fn run_full_matrix<S: Scalar>(
    matrix: &FeatureMatrix<S>,
    cfg: &TrainConfig,
    ga: &GaConfig,
    train_fraction: f64,
    master_seed: u64,
) -> Result<PerformanceTable> {
    require_all_cases(matrix)?;
    let pairs = CaseLabel::pairs();
    let results: Vec<(usize, usize, f64)> = task_list()
        .into_par_iter()
        .map(|(p, k)| {
            let kind = NetworkKind::ALL[k];
            let seed = derive(master_seed, &[p as u64, k as u64]);
            let acc =
                evaluate_pair(matrix, pairs[p], kind, cfg, Some(ga), train_fraction, seed)?;
            Ok((p, k, acc))
        })
        .collect::<Result<_>>()?;
    assemble(results)
}

/// Serial twin of [`run_full_matrix`]; bit-identical output.
pub fn run_full_matrix_serial<S: Scalar>(
    matrix: &FeatureMatrix<S>,
    cfg: &TrainConfig,
    ga: &GaConfig,
    train_fraction: f64,
    master_seed: u64,
) -> Result<PerformanceTable> {
    require_all_cases(matrix)?;
    let pairs = CaseLabel::pairs();
    let results: Vec<(usize, usize, f64)> = task_list()
        .into_iter()
        .map(|(p, k)| {
            let kind = NetworkKind::ALL[k];
            let seed = derive(master_seed, &[p as u64, k as u64]);
            let acc =
                evaluate_pair(matrix, pairs[p], kind, cfg, Some(ga), train_fraction, seed)?;
            Ok((p, k, acc))
        })
        .collect::<Result<_>>()?;
    assemble(results)
}

/// Entry-wise mean of several tables (multi-seed aggregation).
pub fn average_tables(tables: &[PerformanceTable]) -> Result<PerformanceTable> {
    if tables.is_empty() {
        return Err(Error::InvalidArgument("no tables to average".into()));
    }
    let n = tables.len() as f64;
    let entries: Vec<[f64; 4]> = (0..tables[0].entries.len())
        .map(|p| {
            let mut row = [0.0; 4];
            for t in tables {
                for (c, v) in row.iter_mut().enumerate() {
                    *v += t.entries[p][c];
                }
            }
            row.map(|v| v / n)
        })
        .collect();
    PerformanceTable::from_entries(entries)
}

/// Kinds sorted by descending column average; exact ties fall back to
/// column order.
pub fn rank_networks(table: &PerformanceTable) -> Vec<NetworkKind> {
    let mut order: Vec<NetworkKind> = NetworkKind::ALL.to_vec();
    order.sort_by(|a, b| {
        table.column_averages[b.index()]
            .partial_cmp(&table.column_averages[a.index()])
            .expect("finite averages")
            .then(a.index().cmp(&b.index()))
    });
    order
}
