//! `slipdet`: synthesize or ingest phone-slip sensor traces, extract the
//! 54-feature rows, validate the database, train the four classifiers and
//! render evaluation reports and plots.
//!
//! Exit codes: 0 success, 1 domain error (bad data, failed validation),
//! 2 command-line usage error.

mod manifest;
mod plot;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use slipdet_core::case::CaseLabel;
use slipdet_core::eval::{
    average_tables, evaluate_pair_detailed, rank_networks, run_full_matrix, PerformanceTable,
};
use slipdet_core::featuredb::{fmt_sig17, load_matrix, to_csv_string, validate_correlation};
use slipdet_core::ingest::{
    parse_trace_file_name, read_trace_file, resample_window, scan_dataset_dir, serialize_trace,
    trace_file_name, TRACE_HEADER,
};
use slipdet_core::nnets::NetworkKind;
use slipdet_core::seed::derive;
use slipdet_core::synth::{
    generate_trace, trace_seed, ParamRange, CANONICAL_LEN, CANONICAL_RATE_HZ,
};
use slipdet_core::{FeatureMatrix, GaConfig, MotionModelParams, RawTrace, TrainConfig};

use manifest::{write_atomic, Manifest};

#[derive(Parser)]
#[command(name = "slipdet", version, about = "Phone slip detection pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Which networks a run trains or reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NetSelection {
    All,
    One(NetworkKind),
}

impl NetSelection {
    fn kinds(self) -> Vec<NetworkKind> {
        match self {
            NetSelection::All => NetworkKind::ALL.to_vec(),
            NetSelection::One(kind) => vec![kind],
        }
    }
}

impl FromStr for NetSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(NetSelection::All);
        }
        NetworkKind::from_str(s)
            .map(NetSelection::One)
            .map_err(|_| format!("expected all|patternnet|feedforward|fitnet|cascade, got {s:?}"))
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Feature database CSV produced by `extract`.
    #[arg(long)]
    features: PathBuf,
    /// Master seed; per-task seeds derive from it.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Fraction of each case's rows used for training.
    #[arg(long = "train-fraction", default_value_t = 0.7)]
    train_fraction: f64,
    /// Networks to run.
    #[arg(long, default_value = "all")]
    nets: NetSelection,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset: one trace CSV per (case, sample).
    Synth {
        /// Output directory for trace CSVs and manifest.csv.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "samples-per-case", default_value_t = 20)]
        samples_per_case: usize,
        /// Optional motion-model override file (`key = value` lines).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write an SVG plot per trace.
        #[arg(long)]
        plot: bool,
    },
    /// Resample raw trace CSVs onto the canonical 50 Hz / 256-sample grid.
    Ingest {
        /// Directory of `<case>_<id>.csv` trace files.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the 54-feature rows from every trace in a directory.
    Extract {
        /// Directory of `<case>_<id>.csv` trace files.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output feature CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check feature-database consistency by intra/inter-case correlation.
    Validate {
        /// Feature database CSV.
        #[arg(long = "in")]
        input: PathBuf,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train per-pair classifiers and save the fitted models.
    Train {
        #[command(flatten)]
        eval: EvalArgs,
        /// Output directory for model files and accuracies.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the pairwise evaluation matrix and write the report.
    Eval {
        #[command(flatten)]
        eval: EvalArgs,
        /// Markdown report path; a CSV twin is written next to it.
        #[arg(long)]
        out: PathBuf,
        /// Average the tables of this many consecutive master seeds.
        #[arg(long = "multi-seed", default_value_t = 1)]
        multi_seed: usize,
        /// Also write a grouped-bar SVG next to the report.
        #[arg(long)]
        plot: bool,
    },
    /// Render an SVG from a trace CSV or a report CSV.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth { out, seed, samples_per_case, config, plot } => {
            cmd_synth(&out, seed, samples_per_case, config.as_deref(), plot)
                .context("synth failed")
        }
        Command::Ingest { input, out } => cmd_ingest(&input, &out).context("ingest failed"),
        Command::Extract { input, out } => cmd_extract(&input, &out).context("extract failed"),
        Command::Validate { input, out } => {
            cmd_validate(&input, out.as_deref()).context("validate failed")
        }
        Command::Train { eval, out } => cmd_train(&eval, &out).context("train failed"),
        Command::Eval { eval, out, multi_seed, plot } => {
            cmd_eval(&eval, &out, multi_seed, plot).context("eval failed")
        }
        Command::Plot { input, out } => cmd_plot(&input, &out).context("plot failed"),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// Parse a motion-model override file: `key = value` or `key = lo..hi`
/// per line, `#` comments, unknown keys rejected with their line number.
fn parse_params_file(path: &Path) -> Result<MotionModelParams> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut params = MotionModelParams::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {lineno}: expected `key = value`, got {line:?}");
        };
        let (key, value) = (key.trim(), value.trim());
        let scalar = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .with_context(|| format!("config line {lineno}: bad number {v:?}"))
        };
        let range = |v: &str| -> Result<ParamRange<f64>> {
            let Some((lo, hi)) = v.split_once("..") else {
                bail!("config line {lineno}: {key} expects a `lo..hi` range, got {v:?}");
            };
            Ok(ParamRange::new(scalar(lo.trim())?, scalar(hi.trim())?))
        };
        match key {
            "gravity" => params.gravity = scalar(value)?,
            "noise_sigma_accel" => params.noise_sigma_accel = scalar(value)?,
            "noise_sigma_angle" => params.noise_sigma_angle = scalar(value)?,
            "impact_peak" => params.impact_peak = range(value)?,
            "incline_angle" => params.incline_angle = range(value)?,
            "free_fall_duration" => params.free_fall_duration = range(value)?,
            "flip_rotation" => params.flip_rotation = range(value)?,
            "settle_time" => params.settle_time = range(value)?,
            other => bail!("config line {lineno}: unknown key {other:?}"),
        }
    }
    params.validate()?;
    Ok(params)
}

fn cmd_synth(
    out: &Path,
    seed: u64,
    samples_per_case: usize,
    config: Option<&Path>,
    plot: bool,
) -> Result<()> {
    if samples_per_case == 0 {
        bail!("--samples-per-case must be at least 1");
    }
    let params = match config {
        Some(path) => parse_params_file(path)?,
        None => MotionModelParams::default(),
    };
    std::fs::create_dir_all(out)?;
    let mut m = Manifest::new("synth");
    m.setting("seed", seed);
    m.setting("samples_per_case", samples_per_case);
    if let Some(path) = config {
        m.setting("config", path.display());
    }
    let mut dataset_manifest = String::from("case,sample_id,seed\n");
    for case in CaseLabel::ALL {
        for sample_id in 0..samples_per_case as u32 {
            let trace_seed_value = trace_seed(seed, case, sample_id);
            let trace = generate_trace::<f64>(case, trace_seed_value, &params)?;
            let name = trace_file_name(case, sample_id);
            m.write_artifact(out, &name, serialize_trace(&trace).as_bytes())?;
            let _ = writeln!(dataset_manifest, "{},{sample_id},{trace_seed_value}", case.letter());
            if plot {
                let t: Vec<f64> = (0..trace.len()).map(|k| trace.time_at(k)).collect();
                let svg = plot::trace_svg(
                    &format!("case {} sample {sample_id}", case.letter()),
                    &t,
                    &trace.accel,
                    &trace.orient,
                );
                let svg_name = format!("{}_{}.svg", case.letter(), sample_id);
                m.write_artifact(out, &svg_name, svg.as_bytes())?;
            }
        }
    }
    m.write_artifact(out, "manifest.csv", dataset_manifest.as_bytes())?;
    m.write(out)?;
    println!(
        "wrote {} traces to {}",
        6 * samples_per_case,
        out.display()
    );
    Ok(())
}

/// Load every trace file in a directory, failing with the offending path.
fn load_traces(dir: &Path) -> Result<Vec<(CaseLabel, u32, RawTrace)>> {
    let found = scan_dataset_dir(dir)?;
    if found.is_empty() {
        bail!("no trace files found in {}", dir.display());
    }
    let mut traces = Vec::with_capacity(found.len());
    for (case, sample_id, path) in found {
        let raw = read_trace_file(&path, case, sample_id)
            .with_context(|| format!("reading {}", path.display()))?;
        traces.push((case, sample_id, raw));
    }
    Ok(traces)
}

fn cmd_ingest(input: &Path, out: &Path) -> Result<()> {
    let traces = load_traces(input)?;
    std::fs::create_dir_all(out)?;
    let mut m = Manifest::new("ingest");
    m.setting("in", input.display());
    let mut count = 0usize;
    for (case, sample_id, raw) in traces {
        let canonical = resample_window(&raw, CANONICAL_RATE_HZ, CANONICAL_LEN)
            .with_context(|| format!("resampling {}", trace_file_name(case, sample_id)))?;
        let name = trace_file_name(case, sample_id);
        m.write_artifact(out, &name, serialize_trace(&canonical).as_bytes())?;
        count += 1;
    }
    m.write(out)?;
    println!("resampled {count} traces into {}", out.display());
    Ok(())
}

fn cmd_extract(input: &Path, out: &Path) -> Result<()> {
    let traces = load_traces(input)?;
    let mut rows = Vec::with_capacity(traces.len());
    for (case, sample_id, raw) in traces {
        let canonical = resample_window(&raw, CANONICAL_RATE_HZ, CANONICAL_LEN)
            .with_context(|| format!("resampling {}", trace_file_name(case, sample_id)))?;
        let features = slipdet_core::features::extract_sample_features(&canonical)
            .with_context(|| format!("extracting {}", trace_file_name(case, sample_id)))?;
        rows.push(slipdet_core::FeatureRow { case, sample_id, features });
    }
    let matrix = FeatureMatrix::new(rows)?;
    let csv = to_csv_string(&matrix);
    write_atomic(out, csv.as_bytes())?;
    let mut m = Manifest::new("extract");
    m.setting("in", input.display());
    m.artifact(&file_name_of(out), csv.as_bytes());
    m.write(out_dir(out))?;
    println!("wrote {} feature rows to {}", matrix.len(), out.display());
    Ok(())
}

fn cmd_validate(input: &Path, out: Option<&Path>) -> Result<()> {
    let matrix = load_matrix::<f64>(input)
        .with_context(|| format!("reading features {}", input.display()))?;
    let report = validate_correlation(&matrix)?;
    let passed = report.intra_case_mean > report.inter_case_mean;
    let mut text = report.render_text();
    let _ = writeln!(
        text,
        "intra-case mean exceeds inter-case mean: {}",
        if passed { "PASS" } else { "FAIL" }
    );
    match out {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            let mut m = Manifest::new("validate");
            m.setting("in", input.display());
            m.artifact(&file_name_of(path), text.as_bytes());
            m.write(out_dir(path))?;
            println!("wrote validation report to {}", path.display());
        }
        None => print!("{text}"),
    }
    if !passed {
        bail!(
            "correlation check failed: intra-case mean {} <= inter-case mean {}",
            report.intra_case_mean,
            report.inter_case_mean
        );
    }
    Ok(())
}

fn cmd_train(args: &EvalArgs, out: &Path) -> Result<()> {
    let matrix = load_matrix::<f64>(&args.features)
        .with_context(|| format!("reading features {}", args.features.display()))?;
    let cfg = TrainConfig::default();
    let ga = GaConfig::default();
    let kinds = args.nets.kinds();
    std::fs::create_dir_all(out)?;
    let mut m = Manifest::new("train");
    record_eval_settings(&mut m, args);
    let mut accuracies = String::from("pair,network,accuracy\n");
    for (p, pair) in CaseLabel::pairs().into_iter().enumerate() {
        for kind in &kinds {
            let k = kind.index();
            let outcome = evaluate_pair_detailed(
                &matrix,
                pair,
                *kind,
                &cfg,
                Some(&ga),
                args.train_fraction,
                derive(args.seed, &[p as u64, k as u64]),
            )?;
            let pair_name = format!("{}{}", pair.0.letter(), pair.1.letter());
            let kind_name = kind.to_string().to_ascii_lowercase();
            let model_text = outcome.model.to_text();
            m.write_artifact(out, &format!("model_{pair_name}_{kind_name}.txt"), model_text.as_bytes())?;
            let _ = writeln!(accuracies, "{pair_name},{kind_name},{}", fmt_sig17(outcome.accuracy));
        }
    }
    m.write_artifact(out, "accuracies.csv", accuracies.as_bytes())?;
    m.write(out)?;
    println!(
        "trained {} models into {}",
        CaseLabel::pairs().len() * kinds.len(),
        out.display()
    );
    Ok(())
}

fn record_eval_settings(m: &mut Manifest, args: &EvalArgs) {
    m.setting("features", args.features.display());
    m.setting("seed", args.seed);
    m.setting("train_fraction", args.train_fraction);
    m.setting(
        "nets",
        match args.nets {
            NetSelection::All => "all".to_string(),
            NetSelection::One(kind) => kind.to_string().to_ascii_lowercase(),
        },
    );
}

/// Per-pair accuracies of a single network, averaged over master seeds.
fn single_net_column(
    matrix: &FeatureMatrix,
    kind: NetworkKind,
    args: &EvalArgs,
    seeds: &[u64],
) -> Result<Vec<f64>> {
    let cfg = TrainConfig::default();
    let ga = GaConfig::default();
    let pairs = CaseLabel::pairs();
    let mut sums = vec![0.0f64; pairs.len()];
    for &master in seeds {
        for (p, pair) in pairs.iter().enumerate() {
            // same per-task seed as the full matrix, so this column
            // matches a full run's column for that network
            let task_seed = derive(master, &[p as u64, kind.index() as u64]);
            sums[p] += slipdet_core::eval::evaluate_pair(
                matrix,
                *pair,
                kind,
                &cfg,
                Some(&ga),
                args.train_fraction,
                task_seed,
            )?;
        }
    }
    Ok(sums.into_iter().map(|s| s / seeds.len() as f64).collect())
}

fn cmd_eval(args: &EvalArgs, out: &Path, multi_seed: usize, plot_flag: bool) -> Result<()> {
    if multi_seed == 0 {
        bail!("--multi-seed must be at least 1");
    }
    let matrix = load_matrix::<f64>(&args.features)
        .with_context(|| format!("reading features {}", args.features.display()))?;
    let seeds: Vec<u64> = (0..multi_seed as u64).map(|i| args.seed.wrapping_add(i)).collect();
    let mut m = Manifest::new("eval");
    record_eval_settings(&mut m, args);
    m.setting("multi_seed", multi_seed);

    let mut report = String::from("# Pairwise classification report\n\n");
    let _ = writeln!(
        report,
        "seed {}, {} master seed(s), train fraction {}\n",
        args.seed, multi_seed, args.train_fraction
    );
    let csv;
    let mut table_for_plot = None;
    match args.nets {
        NetSelection::All => {
            let cfg = TrainConfig::default();
            let ga = GaConfig::default();
            let tables: Vec<PerformanceTable> = seeds
                .iter()
                .map(|&s| run_full_matrix(&matrix, &cfg, &ga, args.train_fraction, s))
                .collect::<slipdet_core::Result<_>>()?;
            let table = average_tables(&tables)?;
            report.push_str(&table.markdown());
            report.push_str("\nRanking by mean pairwise accuracy:\n");
            for (i, kind) in rank_networks(&table).into_iter().enumerate() {
                let _ = writeln!(
                    report,
                    "{}. {kind} ({:.2}%)",
                    i + 1,
                    table.column_averages[kind.index()]
                );
            }
            csv = table.csv();
            table_for_plot = Some(table);
        }
        NetSelection::One(kind) => {
            let column = single_net_column(&matrix, kind, args, &seeds)?;
            let pairs = CaseLabel::pairs();
            let _ = writeln!(report, "| Pair | {kind} (%) |");
            let _ = writeln!(report, "|------|------|");
            for (p, (a, b)) in pairs.iter().enumerate() {
                let _ = writeln!(report, "| {}{} | {:.2} |", a.letter(), b.letter(), column[p]);
            }
            let mean = column.iter().sum::<f64>() / column.len() as f64;
            let _ = writeln!(report, "| Average | {mean:.2} |");
            let mut c = format!("pair,{}\n", kind.to_string().to_ascii_lowercase());
            for (p, (a, b)) in pairs.iter().enumerate() {
                let _ = writeln!(c, "{}{},{}", a.letter(), b.letter(), fmt_sig17(column[p]));
            }
            let _ = writeln!(c, "average,{}", fmt_sig17(mean));
            csv = c;
        }
    }

    write_atomic(out, report.as_bytes())?;
    m.artifact(&file_name_of(out), report.as_bytes());
    let csv_path = out.with_extension("csv");
    write_atomic(&csv_path, csv.as_bytes())?;
    m.artifact(&file_name_of(&csv_path), csv.as_bytes());
    if plot_flag {
        match table_for_plot {
            Some(ref table) => {
                let svg = plot::table_svg(table)?;
                let svg_path = out.with_extension("svg");
                write_atomic(&svg_path, svg.as_bytes())?;
                m.artifact(&file_name_of(&svg_path), svg.as_bytes());
            }
            None => bail!("--plot needs --nets all (the chart shows all four networks)"),
        }
    }
    m.write(out_dir(out))?;
    println!("wrote report to {} (CSV twin {})", out.display(), csv_path.display());
    Ok(())
}

fn cmd_plot(input: &Path, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let first = text.lines().next().unwrap_or("").trim_end();
    let svg = if first == TRACE_HEADER {
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
        let (case, sample_id) = input
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(parse_trace_file_name)
            .unwrap_or((CaseLabel::NormalTouchKeep, 0));
        let raw = slipdet_core::ingest::parse_trace::<f64>(&text, case, sample_id)?;
        plot::trace_svg(stem, &raw.t, &raw.accel, &raw.orient)
    } else if first.starts_with("pair,") {
        let table = PerformanceTable::from_csv_str(&text)?;
        plot::table_svg(&table)?
    } else {
        bail!(
            "unrecognized input {}: expected a trace CSV ({TRACE_HEADER:?}) or a report CSV (pair,...)",
            input.display()
        );
    };
    write_atomic(out, svg.as_bytes())?;
    let mut m = Manifest::new("plot");
    m.setting("in", input.display());
    m.artifact(&file_name_of(out), svg.as_bytes());
    m.write(out_dir(out))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn file_name_of(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn out_dir(path: &Path) -> &Path {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
}
