//! Acceptance gate: nine numbered end-to-end checks with pinned tolerances.
//! Each test prints one `criterion N: PASS` line (visible with
//! `cargo test --test acceptance -- --nocapture`) and panics with a
//! `criterion N FAIL` message otherwise.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng;

use slipdet_core::eval::{
    rank_networks, run_full_matrix, run_full_matrix_serial, stratified_split,
};
use slipdet_core::featuredb::{build_database, validate_correlation};
use slipdet_core::features::{fft5, rms, variance, FEATURE_COUNT};
use slipdet_core::nnets::{compute_loss_and_gradients, one_hot};
use slipdet_core::seed::rng_from_seed;
use slipdet_core::synth::generate_dataset;
use slipdet_core::{
    CaseLabel, FeatureMatrix, GaConfig, MotionModelParams, NetworkKind, NetworkModel,
    PerformanceTable, TrainConfig,
};

const MASTER_SEEDS: [u64; 3] = [42, 7, 1234];

/// Default 120-row feature database plus the time it took to build.
fn default_db() -> &'static (FeatureMatrix, Duration) {
    static DB: OnceLock<(FeatureMatrix, Duration)> = OnceLock::new();
    DB.get_or_init(|| {
        let started = Instant::now();
        let traces = generate_dataset(20, 42, &MotionModelParams::default()).expect("synthesis");
        let db = build_database(&traces).expect("feature extraction");
        (db, started.elapsed())
    })
}

/// One full 15 x 4 matrix per master seed, plus the combined wall time.
fn seed_tables() -> &'static (Vec<PerformanceTable>, Duration) {
    static TABLES: OnceLock<(Vec<PerformanceTable>, Duration)> = OnceLock::new();
    TABLES.get_or_init(|| {
        let (db, _) = default_db();
        let cfg = TrainConfig::default();
        let ga = GaConfig::default();
        let started = Instant::now();
        let tables = MASTER_SEEDS
            .iter()
            .map(|&s| run_full_matrix(db, &cfg, &ga, 0.7, s).expect("full matrix"))
            .collect();
        (tables, started.elapsed())
    })
}

#[test]
fn criterion_1_database_cardinalities() {
    let (db, build_time) = default_db();
    assert_eq!(db.len(), 120, "criterion 1 FAIL: expected 120 rows, got {}", db.len());
    assert_eq!(
        db.value_count(),
        6480,
        "criterion 1 FAIL: expected 6 * 20 * 54 = 6480 values, got {}",
        db.value_count()
    );
    let split = stratified_split(db, 0.7, 42).expect("stratified split");
    assert_eq!(split.train.len(), 84, "criterion 1 FAIL: train rows {}", split.train.len());
    assert_eq!(split.test.len(), 36, "criterion 1 FAIL: test rows {}", split.test.len());
    assert_eq!(split.train.len() * FEATURE_COUNT, 4536);
    assert_eq!(split.test.len() * FEATURE_COUNT, 1944);
    assert!(
        *build_time < Duration::from_secs(5),
        "criterion 1 FAIL: database build took {build_time:?}, budget 5 s"
    );
    println!(
        "criterion 1: PASS (6480 values, split 84/36 rows = 4536/1944 values, built in {build_time:?})"
    );
}

/// Fixed 15 x 4 accuracy fixture pinning the summarization arithmetic.
/// Rows follow pair order AB..EF, columns follow report column order.
#[rustfmt::skip]
const REFERENCE_ACCURACIES: [[f64; 4]; 15] = [
    [ 66.67, 58.33, 41.66, 58.33],
    [ 66.67, 66.66, 50.00, 58.33],
    [ 91.66, 50.00, 50.00, 75.00],
    [ 83.33, 50.00, 50.00, 58.33],
    [100.00, 50.00, 58.33, 50.00],
    [ 66.66, 50.00, 41.66, 41.66],
    [ 75.00, 58.33, 41.66, 58.33],
    [ 58.33, 58.33, 50.00, 66.66],
    [ 58.33, 50.00, 50.00, 58.33],
    [ 75.00, 41.66, 50.00, 41.66],
    [ 83.33, 41.66, 50.00, 50.00],
    [ 58.33, 50.00, 50.00, 41.66],
    [ 50.00, 50.00, 41.66, 58.33],
    [ 58.33, 41.66, 41.66, 66.66],
    [ 58.33, 58.33, 50.00, 50.00],
];

#[test]
fn criterion_2_reference_table_arithmetic() {
    let started = Instant::now();
    let table = PerformanceTable::from_entries(REFERENCE_ACCURACIES.to_vec()).expect("fixture");
    let expected_columns = [69.998, 51.664, 47.775, 55.552];
    for (c, want) in expected_columns.iter().enumerate() {
        let got = table.column_averages[c];
        assert!(
            (got - want).abs() <= 0.001,
            "criterion 2 FAIL: column {c} average {got} differs from {want}"
        );
    }
    for (row, want) in [(0usize, 56.247), (2usize, 66.665)] {
        let got = table.row_averages[row];
        assert!(
            (got - want).abs() <= 0.001,
            "criterion 2 FAIL: {} row average {got} differs from {want}",
            table.pair_name(row)
        );
    }
    assert!(
        (table.grand_average - 56.247).abs() <= 0.001,
        "criterion 2 FAIL: grand average {}",
        table.grand_average
    );
    let ranking = rank_networks(&table);
    let want = vec![
        NetworkKind::PatternNet,
        NetworkKind::CascadeNet,
        NetworkKind::Feedforward,
        NetworkKind::FitNet,
    ];
    assert_eq!(ranking, want, "criterion 2 FAIL: wrong ranking");
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "criterion 2 FAIL: took {elapsed:?}, budget 1 s");
    println!(
        "criterion 2: PASS (columns {:?} within 0.001, grand {:.3}, ranking {:?})",
        table.column_averages, table.grand_average, ranking
    );
}

#[test]
fn criterion_3_accuracy_quantization() {
    let (tables, _) = seed_tables();
    let quantum = 100.0 / 12.0;
    for (row, entries) in tables[0].entries.iter().enumerate() {
        for &v in entries {
            let snapped = (v / quantum).round() * quantum;
            assert!(
                (snapped - v).abs() <= 1e-9,
                "criterion 3 FAIL: {} accuracy {v} is not a multiple of 100/12",
                tables[0].pair_name(row)
            );
        }
    }
    println!("criterion 3: PASS (all 60 default-run accuracies sit on the 100/12 grid)");
}

fn naive_dft_magnitude(series: &[f64], bin: usize) -> f64 {
    let n = series.len() as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    for (i, &v) in series.iter().enumerate() {
        let angle = -2.0 * std::f64::consts::PI * (bin * i) as f64 / n;
        re += v * angle.cos();
        im += v * angle.sin();
    }
    re.hypot(im)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[test]
fn criterion_4_feature_oracles() {
    let started = Instant::now();
    let mut rng = rng_from_seed(0x0404);
    let mut max_dft = 0.0f64;
    let mut max_var = 0.0f64;
    let mut max_rms = 0.0f64;
    for _ in 0..100 {
        let series: Vec<f64> = (0..256).map(|_| rng.random_range(-5.0..5.0)).collect();
        let bins = fft5(&series).expect("fft5");
        for (k, &got) in bins.iter().enumerate() {
            max_dft = max_dft.max((got - naive_dft_magnitude(&series, k + 1)).abs());
        }
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        let var_oracle =
            series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / series.len() as f64;
        let rms_oracle =
            (series.iter().map(|v| v * v).sum::<f64>() / series.len() as f64).sqrt();
        max_var = max_var.max(rel_diff(variance(&series).expect("variance"), var_oracle));
        max_rms = max_rms.max(rel_diff(rms(&series).expect("rms"), rms_oracle));
    }
    assert!(max_dft <= 1e-9, "criterion 4 FAIL: fft5 vs naive DFT deviates by {max_dft:.3e}");
    assert!(max_var <= 1e-12, "criterion 4 FAIL: variance relative error {max_var:.3e}");
    assert!(max_rms <= 1e-12, "criterion 4 FAIL: rms relative error {max_rms:.3e}");
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "criterion 4 FAIL: took {elapsed:?}, budget 10 s");
    println!(
        "criterion 4: PASS (dft abs {max_dft:.2e}, variance rel {max_var:.2e}, rms rel {max_rms:.2e})"
    );
}

#[test]
fn criterion_5_gradient_checks() {
    let started = Instant::now();
    let eps = 1e-5;
    let mut rng = rng_from_seed(0x0505);
    let mut worst = 0.0f64;
    for kind in NetworkKind::ALL {
        for _ in 0..10 {
            let input_width = rng.random_range(4..=10);
            let batch = rng.random_range(2..=5);
            let mut model: NetworkModel = NetworkModel::new(kind, input_width, rng.random());
            let x: Vec<Vec<f64>> = (0..batch)
                .map(|_| (0..input_width).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let labels: Vec<usize> = (0..batch).map(|_| rng.random_range(0..2usize)).collect();
            let y = one_hot(&labels);
            let (_, analytic) = compute_loss_and_gradients(&model, &x, &y).expect("gradients");
            let base = model.flat_params();
            let mut probe = base.clone();
            for p in 0..base.len() {
                probe[p] = base[p] + eps;
                model.set_flat_params(&probe).expect("probe up");
                let (loss_hi, _) = compute_loss_and_gradients(&model, &x, &y).expect("loss+");
                probe[p] = base[p] - eps;
                model.set_flat_params(&probe).expect("probe down");
                let (loss_lo, _) = compute_loss_and_gradients(&model, &x, &y).expect("loss-");
                probe[p] = base[p];
                let numeric = (loss_hi - loss_lo) / (2.0 * eps);
                let a = analytic[p];
                if a.abs() < 1e-8 && numeric.abs() < 1e-8 {
                    continue;
                }
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs());
                worst = worst.max(rel);
                assert!(
                    rel <= 1e-4,
                    "criterion 5 FAIL: {kind} parameter {p} analytic {a:.6e} vs numeric {numeric:.6e} (rel {rel:.3e})"
                );
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(30), "criterion 5 FAIL: took {elapsed:?}, budget 30 s");
    println!("criterion 5: PASS (40 configurations, worst relative gradient error {worst:.2e})");
}

#[test]
fn criterion_6_classifier_sanity() {
    let (tables, elapsed) = seed_tables();
    let af = CaseLabel::pairs()
        .iter()
        .position(|&p| p == (CaseLabel::NormalTouchKeep, CaseLabel::Fall))
        .expect("AF pair");
    let ten_of_twelve = 1000.0 / 12.0;
    let mut pattern_means = Vec::new();
    for (&seed, table) in MASTER_SEEDS.iter().zip(tables) {
        let pattern = table.column_averages[NetworkKind::PatternNet.index()];
        assert!(
            pattern >= 85.0,
            "criterion 6 FAIL: seed {seed} PatternNet mean {pattern:.2} below 85"
        );
        for kind in NetworkKind::ALL {
            let mean = table.column_averages[kind.index()];
            assert!(
                mean >= 60.0,
                "criterion 6 FAIL: seed {seed} {kind} mean {mean:.2} below 60"
            );
        }
        let af_acc = table.entries[af][NetworkKind::PatternNet.index()];
        assert!(
            af_acc + 1e-9 >= ten_of_twelve,
            "criterion 6 FAIL: seed {seed} AF PatternNet {af_acc:.2} below 10/12"
        );
        pattern_means.push(pattern);
    }
    assert!(
        *elapsed < Duration::from_secs(120),
        "criterion 6 FAIL: three full matrices took {elapsed:?}, budget 2 min"
    );
    println!(
        "criterion 6: PASS (PatternNet means {pattern_means:.2?} across seeds {MASTER_SEEDS:?}, {elapsed:?})"
    );
}

#[test]
fn criterion_7_correlation_property() {
    let (db, _) = default_db();
    let report = validate_correlation(db).expect("correlation");
    assert!(
        report.intra_case_mean > report.inter_case_mean,
        "criterion 7 FAIL: intra-case mean {} does not exceed inter-case mean {}",
        report.intra_case_mean,
        report.inter_case_mean
    );
    println!(
        "criterion 7: PASS (intra-case mean {:.4} > inter-case mean {:.4})",
        report.intra_case_mean, report.inter_case_mean
    );
}

fn run_slipdet(args: &[String]) {
    let out = Command::new(env!("CARGO_BIN_EXE_slipdet"))
        .args(args)
        .output()
        .expect("run slipdet");
    assert!(
        out.status.success(),
        "slipdet {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path_arg(root: &Path, name: &str) -> String {
    root.join(name).display().to_string()
}

#[test]
fn criterion_8_determinism() {
    let dirs = [tempfile::tempdir().expect("tempdir"), tempfile::tempdir().expect("tempdir")];
    for dir in &dirs {
        let root = dir.path();
        let args = |parts: &[&str]| parts.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        run_slipdet(&args(&[
            "synth",
            "--out",
            &path_arg(root, "traces"),
            "--seed",
            "3",
            "--samples-per-case",
            "4",
        ]));
        run_slipdet(&args(&[
            "extract",
            "--in",
            &path_arg(root, "traces"),
            "--out",
            &path_arg(root, "features.csv"),
        ]));
        run_slipdet(&args(&[
            "eval",
            "--features",
            &path_arg(root, "features.csv"),
            "--out",
            &path_arg(root, "report.md"),
            "--seed",
            "3",
            "--plot",
        ]));
    }
    for name in ["features.csv", "report.md", "report.csv", "report.svg"] {
        let first = std::fs::read(dirs[0].path().join(name)).expect(name);
        let second = std::fs::read(dirs[1].path().join(name)).expect(name);
        assert!(first == second, "criterion 8 FAIL: {name} differs between identical runs");
    }

    let traces = generate_dataset(4, 3, &MotionModelParams::default()).expect("synthesis");
    let db = build_database(&traces).expect("feature extraction");
    let cfg = TrainConfig::default();
    let ga = GaConfig::default();
    let parallel = run_full_matrix(&db, &cfg, &ga, 0.7, 3).expect("parallel matrix");
    let serial = run_full_matrix_serial(&db, &cfg, &ga, 0.7, 3).expect("serial matrix");
    assert_eq!(parallel, serial, "criterion 8 FAIL: parallel and serial tables differ");
    println!(
        "criterion 8: PASS (feature CSV, report CSV/MD and SVG byte-identical; parallel == serial)"
    );
}

/// Plain MLP oracle: each layer sees only its direct predecessor, taken from
/// the trailing weight columns of the corresponding cascade layer.
fn plain_mlp_forward(model: &NetworkModel, x: &[f64]) -> Vec<f64> {
    let mut h = x.to_vec();
    let last = model.layers.len() - 1;
    for (k, layer) in model.layers.iter().enumerate() {
        let direct = model.widths[k];
        let start = model.widths[..=k].iter().sum::<usize>() - direct;
        let mut z: Vec<f64> = layer
            .weights
            .iter()
            .zip(&layer.biases)
            .map(|(row, &b)| {
                row[start..].iter().zip(&h).map(|(w, v)| w * v).sum::<f64>() + b
            })
            .collect();
        if k == last {
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in z.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in z.iter_mut() {
                *v /= sum;
            }
        } else {
            for v in z.iter_mut() {
                *v = v.tanh();
            }
        }
        h = z;
    }
    h
}

#[test]
fn criterion_9_cascade_reduction() {
    let mut model: NetworkModel = NetworkModel::new(NetworkKind::CascadeNet, 54, 0x0909);
    model.zero_skip_weights();
    let mut rng = rng_from_seed(0x0910);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x: Vec<f64> = (0..54).map(|_| rng.random_range(-3.0..3.0)).collect();
        let got = model.forward(&x).expect("cascade forward");
        let want = plain_mlp_forward(&model, &x);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    assert!(worst <= 1e-12, "criterion 9 FAIL: outputs deviate by {worst:.3e}");
    println!("criterion 9: PASS (max |cascade - plain MLP| = {worst:.2e} over 100 inputs)");
}
