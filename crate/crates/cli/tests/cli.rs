//! Black-box tests of the `slipdet` binary: exit codes, file layout and the
//! wording of the messages scripts are expected to grep for.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use slipdet_core::ingest::TRACE_HEADER;
use slipdet_core::{CaseLabel, NetworkKind, NetworkModel};

fn slipdet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slipdet")).args(args).output().expect("run slipdet")
}

fn slipdet_ok(args: &[&str]) -> String {
    let out = slipdet(args);
    assert!(
        out.status.success(),
        "slipdet {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn s(path: PathBuf) -> String {
    path.display().to_string()
}

/// synth + extract into a tempdir, returning (root, features path).
fn synthesized_features(samples_per_case: u32) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().expect("tempdir");
    let root = dir.path().to_path_buf();
    let traces = s(root.join("traces"));
    let per_case = samples_per_case.to_string();
    slipdet_ok(&["synth", "--out", &traces, "--seed", "11", "--samples-per-case", &per_case]);
    let features = root.join("features.csv");
    slipdet_ok(&["extract", "--in", &traces, "--out", &s(features.clone())]);
    (dir, features)
}

#[test]
fn synth_writes_traces_manifest_and_plots() {
    let dir = tempfile::tempdir().expect("tempdir");
    let traces = dir.path().join("traces");
    let stdout = slipdet_ok(&[
        "synth",
        "--out",
        &s(traces.clone()),
        "--seed",
        "3",
        "--samples-per-case",
        "1",
        "--plot",
    ]);
    assert!(stdout.contains("wrote 6 traces"), "unexpected stdout: {stdout}");
    for case in CaseLabel::ALL {
        let csv = read(&traces.join(format!("{}_0.csv", case.letter())));
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(lines.count(), 256, "case {} sample count", case.letter());
        let svg = read(&traces.join(format!("{}_0.svg", case.letter())));
        assert!(svg.starts_with("<svg"), "case {} plot", case.letter());
    }
    let manifest = read(&traces.join("manifest.csv"));
    assert_eq!(manifest.lines().count(), 7, "header plus one line per trace");
    assert!(manifest.starts_with("case,sample_id,seed\n"));
    assert!(read(&traces.join("run_manifest.txt")).contains("subcommand = synth"));
}

#[test]
fn synth_rerun_is_byte_identical() {
    let mut payloads = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().expect("tempdir");
        let traces = dir.path().join("traces");
        slipdet_ok(&["synth", "--out", &s(traces.clone()), "--seed", "8", "--samples-per-case", "1"]);
        payloads.push((read(&traces.join("D_0.csv")), read(&traces.join("run_manifest.txt"))));
    }
    assert_eq!(payloads[0], payloads[1]);
}

#[test]
fn config_file_overrides_motion_params() {
    let dir = tempfile::tempdir().expect("tempdir");
    let root = dir.path();
    let config = root.join("params.txt");
    std::fs::write(&config, "# heavier planet\ngravity = 24.5\n").expect("write config");
    slipdet_ok(&["synth", "--out", &s(root.join("plain")), "--seed", "5", "--samples-per-case", "1"]);
    slipdet_ok(&[
        "synth",
        "--out",
        &s(root.join("heavy")),
        "--seed",
        "5",
        "--samples-per-case",
        "1",
        "--config",
        &s(config.clone()),
    ]);
    let plain = read(&root.join("plain").join("F_0.csv"));
    let heavy = read(&root.join("heavy").join("F_0.csv"));
    assert_ne!(plain, heavy, "gravity override must change the synthesized traces");

    std::fs::write(&config, "warp_factor = 9\n").expect("write config");
    let out = slipdet(&[
        "synth",
        "--out",
        &s(root.join("broken")),
        "--samples-per-case",
        "1",
        "--config",
        &s(config.clone()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("unknown key") && err.contains("line 1"), "stderr: {err}");
}

#[test]
fn ingest_rewrites_traces_on_the_canonical_grid() {
    let dir = tempfile::tempdir().expect("tempdir");
    let root = dir.path();
    slipdet_ok(&["synth", "--out", &s(root.join("raw")), "--seed", "2", "--samples-per-case", "1"]);
    let stdout =
        slipdet_ok(&["ingest", "--in", &s(root.join("raw")), "--out", &s(root.join("canon"))]);
    assert!(stdout.contains("resampled 6 traces"), "unexpected stdout: {stdout}");
    let csv = read(&root.join("canon").join("C_0.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    assert_eq!(lines.count(), 256);
}

#[test]
fn extract_builds_the_feature_table() {
    let (_dir, features) = synthesized_features(2);
    let csv = read(&features);
    let mut lines = csv.lines();
    let header = lines.next().expect("header");
    assert!(header.starts_with("case,sample_id,accel_x_mean,"), "header: {header}");
    assert_eq!(header.split(',').count(), 2 + 54);
    assert_eq!(lines.count(), 12, "6 cases x 2 samples");
}

#[test]
fn extract_fails_cleanly_on_an_empty_directory() {
    let dir = tempfile::tempdir().expect("tempdir");
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).expect("mkdir");
    let out_file = dir.path().join("features.csv");
    let out = slipdet(&["extract", "--in", &s(empty), "--out", &s(out_file.clone())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("no trace files found"), "stderr: {}", stderr_of(&out));
    assert!(!out_file.exists(), "no output file may be left behind on failure");
}

#[test]
fn validate_reports_the_correlation_check() {
    let (dir, features) = synthesized_features(2);
    let stdout = slipdet_ok(&["validate", "--in", &s(features.clone())]);
    assert!(
        stdout.contains("intra-case mean exceeds inter-case mean: PASS"),
        "stdout: {stdout}"
    );
    let report = dir.path().join("correlation.txt");
    slipdet_ok(&["validate", "--in", &s(features), "--out", &s(report.clone())]);
    assert!(read(&report).contains("PASS"));
}

#[test]
fn train_saves_models_and_accuracies() {
    let (dir, features) = synthesized_features(2);
    let models = dir.path().join("models");
    let stdout = slipdet_ok(&[
        "train",
        "--features",
        &s(features),
        "--nets",
        "patternnet",
        "--out",
        &s(models.clone()),
    ]);
    assert!(stdout.contains("trained 15 models"), "unexpected stdout: {stdout}");
    let accuracies = read(&models.join("accuracies.csv"));
    assert!(accuracies.starts_with("pair,network,accuracy\n"));
    assert_eq!(accuracies.lines().count(), 16);
    let model = NetworkModel::load(&models.join("model_AF_patternnet.txt")).expect("load model");
    assert_eq!(model.kind, NetworkKind::PatternNet);
    assert_eq!(model.input_width(), 54);
}

#[test]
fn eval_single_net_with_multiple_seeds() {
    let (dir, features) = synthesized_features(2);
    let report = dir.path().join("report.md");
    slipdet_ok(&[
        "eval",
        "--features",
        &s(features.clone()),
        "--out",
        &s(report.clone()),
        "--nets",
        "patternnet",
        "--multi-seed",
        "2",
    ]);
    let md = read(&report);
    assert!(md.contains("| Pair | PatternNet (%) |"), "report: {md}");
    assert!(md.contains("| Average |"));
    let csv = read(&dir.path().join("report.csv"));
    assert!(csv.starts_with("pair,patternnet\n"));
    assert_eq!(csv.lines().count(), 17, "header, 15 pairs, average");

    let out = slipdet(&[
        "eval",
        "--features",
        &s(features),
        "--out",
        &s(dir.path().join("plotted.md")),
        "--nets",
        "patternnet",
        "--plot",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("--plot needs --nets all"), "stderr: {}", stderr_of(&out));
}

#[test]
fn plot_renders_traces_and_tables() {
    let dir = tempfile::tempdir().expect("tempdir");
    let root = dir.path();
    slipdet_ok(&["synth", "--out", &s(root.join("traces")), "--seed", "4", "--samples-per-case", "1"]);
    let svg_path = root.join("c0.svg");
    slipdet_ok(&[
        "plot",
        "--in",
        &s(root.join("traces").join("C_0.csv")),
        "--out",
        &s(svg_path.clone()),
    ]);
    let svg = read(&svg_path);
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("polyline") && svg.contains("orientation (degrees)"));

    let mut table = String::from("pair,patternnet,feedforward,fitnet,cascadenet,row_average\n");
    for (a, b) in CaseLabel::pairs() {
        table.push_str(&format!("{}{},75,50,50,50,56.25\n", a.letter(), b.letter()));
    }
    let table_path = root.join("table.csv");
    std::fs::write(&table_path, table).expect("write table");
    let chart_path = root.join("table.svg");
    slipdet_ok(&["plot", "--in", &s(table_path), "--out", &s(chart_path.clone())]);
    assert!(read(&chart_path).contains("case pair"));

    let junk = root.join("junk.csv");
    std::fs::write(&junk, "foo,bar\n1,2\n").expect("write junk");
    let out = slipdet(&["plot", "--in", &s(junk), "--out", &s(root.join("junk.svg"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("unrecognized"), "stderr: {}", stderr_of(&out));
}

#[test]
fn usage_errors_exit_with_code_two() {
    assert_eq!(slipdet(&["--definitely-not-a-flag"]).status.code(), Some(2));
    assert_eq!(slipdet(&[]).status.code(), Some(2));
    assert_eq!(slipdet(&["synth"]).status.code(), Some(2), "--out is required");
}

#[test]
fn eval_reports_missing_feature_files() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = slipdet(&[
        "eval",
        "--features",
        &s(dir.path().join("nope.csv")),
        "--out",
        &s(dir.path().join("report.md")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr_of(&out).is_empty());
}
