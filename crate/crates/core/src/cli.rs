//! The `utiv` command line.
//!
//! Every subcommand reads its inputs from flags, writes results to standard
//! output (or to `--out`), and sends diagnostics to standard error. Exit codes:
//! 0 on success, 1 for usage errors, 2 for data errors. When `--out` is given
//! the resolved configuration is saved there as `run.json`; otherwise it is
//! logged at info level. Set `UTIV_LOG` (e.g. `UTIV_LOG=info`) for verbosity.

use std::error::Error;
use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::anchors::{generate_anchor_shapes, grid_cells, tile_anchors, AnchorConfig, AnchorConvention};
use crate::dataset::{
    dataset_stats, dedup_frames, load_dataset_with, split_dataset, validate_dataset, LoadOptions, ParseMode, Severity,
};
use crate::detections::{parse_detections, perturb_ground_truth, DetectionMode, DetectionSet, Perturbation};
use crate::evaluation::{
    class_prf, confusion_matrix, evaluate_detection, evaluate_hybrid, localization_diagnostics, script_pairs,
    PrfScore, ScoreTable,
};
use crate::experiments::{
    emit_report, resolution_sweep, training_subsets, Coordinates, Report, SweepDetections, SweepTable,
    STANDARD_RESOLUTIONS,
};
use crate::service::DEFAULT_BIND;
use crate::Dataset;

pub const RUN_CONFIG_FILE: &str = "run.json";

#[derive(Debug, Parser, Serialize)]
#[command(name = "utiv", version, about = "Caption-text detection dataset and evaluation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelMode {
    DetectOnly,
    Hybrid,
}

impl From<LabelMode> for DetectionMode {
    fn from(m: LabelMode) -> Self {
        match m {
            LabelMode::DetectOnly => DetectionMode::DetectOnly,
            LabelMode::Hybrid => DetectionMode::Hybrid,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RootArgs {
    /// Corpus root (`<channel>/<video>/{frames,gt}`).
    #[arg(long)]
    pub root: PathBuf,
    /// Reject unknown XML content instead of warning about it.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutArgs {
    /// Output directory for result files and `run.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Check every annotation for out-of-bounds boxes, duplicates and empty text.
    Validate {
        #[command(flatten)]
        root: RootArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Per-channel video, frame and line counts.
    Stats {
        #[command(flatten)]
        root: RootArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Frame-level train/test split.
    Split {
        #[command(flatten)]
        root: RootArgs,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long, default_value_t = 0.75)]
        train_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Split each channel proportionally.
        #[arg(long)]
        stratify: bool,
    },
    /// Drop near-duplicate consecutive frames from a directory of images.
    Dedup {
        #[arg(long)]
        frames: PathBuf,
        /// Frames within this many hash bits of the last kept frame are dropped.
        #[arg(long, default_value_t = 8)]
        threshold: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Print anchor shapes and, given a frame size, the tiled anchor count.
    Anchors {
        /// TOML anchor configuration; defaults apply to missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        convention: Option<AnchorConvention>,
        #[arg(long, requires = "height")]
        width: Option<u32>,
        #[arg(long, requires = "width")]
        height: Option<u32>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write a detection file derived from the ground truth.
    Synth {
        #[command(flatten)]
        root: RootArgs,
        /// exact, dilate, erode, shift, drop or spurious.
        #[arg(long, default_value = "exact")]
        mode: String,
        /// Pixels for dilate/erode/shift, probability for drop, boxes per frame for spurious.
        #[arg(long, default_value_t = 0.0)]
        magnitude: f64,
        #[arg(long, value_enum, default_value = "detect-only")]
        labels: LabelMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; the file is written as `detections.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Area-based precision, recall and F-measure over all text.
    EvalDetect {
        #[command(flatten)]
        root: RootArgs,
        #[arg(long)]
        dets: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Script-identification confusion matrix and per-script scores.
    EvalScript {
        #[command(flatten)]
        root: RootArgs,
        /// Detections labeled urdu/english; each is matched to a ground-truth line.
        #[arg(long)]
        dets: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Per-script detection scores for urdu/english labeled detections.
    EvalHybrid {
        #[command(flatten)]
        root: RootArgs,
        #[arg(long)]
        dets: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Box matching, IoU histogram, misses, false alarms and size errors.
    Diagnose {
        #[command(flatten)]
        root: RootArgs,
        #[arg(long)]
        dets: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Scores across frame resolutions.
    SweepResolution {
        #[command(flatten)]
        root: RootArgs,
        /// One file rescaled to every resolution, or one file per resolution in order.
        #[arg(long, num_args = 1.., required = true)]
        dets: Vec<PathBuf>,
        /// Comma-separated `WxH` list; defaults to 256x144 through 1920x1080.
        #[arg(long, value_delimiter = ',', value_parser = parse_resolution)]
        resolutions: Vec<(u32, u32)>,
        /// Rescale the single detection file along with the ground truth.
        #[arg(long)]
        rescale_detections: bool,
        /// Keep real-valued box corners instead of rounding to pixels.
        #[arg(long)]
        continuous: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Nested training subsets that reach each line budget.
    Subsets {
        #[command(flatten)]
        root: RootArgs,
        /// Ascending, comma-separated line budgets.
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the annotation HTTP service.
    Serve {
        #[command(flatten)]
        root: RootArgs,
        #[arg(long, default_value = DEFAULT_BIND)]
        bind: SocketAddr,
        /// Permit binding to a non-loopback address.
        #[arg(long)]
        allow_external: bool,
    },
}

fn parse_resolution(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once('x').ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let w: u32 = w.trim().parse().map_err(|_| format!("bad width in `{s}`"))?;
    let h: u32 = h.trim().parse().map_err(|_| format!("bad height in `{s}`"))?;
    if w == 0 || h == 0 {
        return Err(format!("resolution must be positive, got `{s}`"));
    }
    Ok((w, h))
}

/// Why a run failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(Box<dyn Error + Send + Sync>),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Data(e) => write!(f, "{e}"),
        }
    }
}

impl<E: Error + Send + Sync + 'static> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(Box::new(e))
    }
}

fn data(message: impl Into<String>) -> Failure {
    Failure::Data(message.into().into())
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("UTIV_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Runs one command line against the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run`], with explicit output streams. `argv[0]` is the program name.
pub fn run_with_io<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let mut cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    1
                }
            };
        }
    };
    resolve_defaults(&mut cli);
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(stderr, "error: {failure}");
            failure.exit_code()
        }
    }
}

/// Fills in defaults that depend on other flags so `run.json` is complete.
fn resolve_defaults(cli: &mut Cli) {
    if let Command::SweepResolution { resolutions, .. } = &mut cli.command {
        if resolutions.is_empty() {
            *resolutions = STANDARD_RESOLUTIONS.to_vec();
        }
    }
}

fn record_config(cli: &Cli, out: Option<&Path>) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(cli).expect("command line is serializable");
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            let path = dir.join(RUN_CONFIG_FILE);
            std::fs::write(&path, json + "\n").map_err(|e| io_failure(&path, e))?;
        }
        None => log::info!("resolved configuration: {json}"),
    }
    Ok(())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    data(format!("{}: {e}", path.display()))
}

fn load(root: &RootArgs) -> Result<Dataset, Failure> {
    let mode = if root.strict { ParseMode::Strict } else { ParseMode::Lenient };
    Ok(load_dataset_with(&root.root, LoadOptions { mode })?)
}

fn load_dets(path: &Path) -> Result<DetectionSet, Failure> {
    Ok(parse_detections(path)?)
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<(), Failure> {
    stdout.write_all(text.as_bytes()).map_err(|e| data(format!("cannot write output: {e}")))
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| io_failure(&path, e))
}

/// Prints a report in the chosen format and, with `--out`, writes its files.
fn emit_tables(stdout: &mut dyn Write, out: &OutArgs, report: &Report) -> Result<(), Failure> {
    let body = match out.format {
        Format::Text => report.summary(),
        Format::Csv => {
            let mut s = String::new();
            for t in &report.tables {
                s.push_str(&t.to_csv());
            }
            for t in &report.sweeps {
                s.push_str(&t.to_csv());
            }
            s
        }
    };
    emit(stdout, &body)?;
    if let Some(dir) = &out.out {
        emit_report(report, dir)?;
    }
    Ok(())
}

fn score_line(s: &PrfScore) -> String {
    format!("P={:?} R={:?} F={:?}\n", s.precision, s.recall, s.f_measure)
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match &cli.command {
        Command::Validate { root, out } => {
            record_config(cli, out.out.as_deref())?;
            let ds = load(root)?;
            let issues = validate_dataset(&ds);
            let body = match out.format {
                Format::Text => issues.iter().map(|i| format!("{i}\n")).collect::<String>(),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["severity", "kind", "frame", "line", "message"])?;
                    for i in &issues {
                        let json = serde_json::to_value(i)?;
                        let text = |k: &str| json[k].as_str().unwrap_or_default().to_string();
                        let line = i.line.map(|l| l.to_string()).unwrap_or_default();
                        w.write_record([text("severity"), text("kind"), i.frame.to_string(), line, i.message.clone()])?;
                    }
                    String::from_utf8(w.into_inner().map_err(|e| data(e.to_string()))?).expect("csv output is utf-8")
                }
            };
            emit(stdout, &body)?;
            if let Some(dir) = &out.out {
                write_file(dir, "issues.txt", &body)?;
            }
            let errors = issues.iter().filter(|i| i.severity == Severity::Error).count();
            log::info!("{} frames, {} issues, {errors} errors", ds.len(), issues.len());
            let failing = if root.strict { issues.len() } else { errors };
            Ok(if failing == 0 { 0 } else { 2 })
        }
        Command::Stats { root, out } => {
            record_config(cli, out.out.as_deref())?;
            let stats = dataset_stats(&load(root)?);
            let body = match out.format {
                Format::Csv => stats.to_csv(),
                Format::Text => stats.to_text(),
            };
            emit(stdout, &body)?;
            if let Some(dir) = &out.out {
                write_file(dir, "stats.csv", &stats.to_csv())?;
            }
            Ok(0)
        }
        Command::Split { root, out, train_fraction, seed, stratify } => {
            if !(*train_fraction > 0.0 && *train_fraction < 1.0) {
                return Err(Failure::Usage(format!("--train-fraction must lie strictly between 0 and 1, got {train_fraction}")));
            }
            record_config(cli, out.out.as_deref())?;
            let ds = load(root)?;
            let split = split_dataset(&ds, *train_fraction, *seed, *stratify);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["set", "video_id", "frame_number"])?;
            for (set, keys) in [("train", &split.train_frames), ("test", &split.test_frames)] {
                for k in keys {
                    w.write_record([set, &k.video_id, &k.frame_number.to_string()])?;
                }
            }
            let csv_body = String::from_utf8(w.into_inner().map_err(|e| data(e.to_string()))?).expect("csv output is utf-8");
            let body = match out.format {
                Format::Csv => csv_body.clone(),
                Format::Text => format!("train {}\ntest {}\n", split.train_frames.len(), split.test_frames.len()),
            };
            emit(stdout, &body)?;
            if let Some(dir) = &out.out {
                write_file(dir, "split.csv", &csv_body)?;
            }
            Ok(0)
        }
        Command::Dedup { frames, threshold, out } => {
            record_config(cli, out.out.as_deref())?;
            let report = dedup_frames(frames, *threshold)?;
            let mut rows: Vec<(&PathBuf, &str)> = report
                .kept
                .iter()
                .map(|p| (p, "kept"))
                .chain(report.dropped.iter().map(|p| (p, "dropped")))
                .chain(report.skipped.iter().map(|p| (p, "skipped")))
                .collect();
            rows.sort();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["file", "status"])?;
            for (p, status) in &rows {
                let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                w.write_record([name.as_str(), status])?;
            }
            let csv_body = String::from_utf8(w.into_inner().map_err(|e| data(e.to_string()))?).expect("csv output is utf-8");
            let body = match out.format {
                Format::Csv => csv_body.clone(),
                Format::Text => format!(
                    "kept {}\ndropped {}\nskipped {}\n",
                    report.kept.len(),
                    report.dropped.len(),
                    report.skipped.len()
                ),
            };
            emit(stdout, &body)?;
            if let Some(dir) = &out.out {
                write_file(dir, "dedup.csv", &csv_body)?;
            }
            Ok(0)
        }
        Command::Anchors { config, convention, width, height, out } => {
            record_config(cli, out.out.as_deref())?;
            let mut cfg = match config {
                Some(path) => AnchorConfig::from_file(path)?,
                None => AnchorConfig::default(),
            };
            if let Some(c) = convention {
                cfg.convention = *c;
            }
            let shapes = generate_anchor_shapes(&cfg)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["scale", "aspect_ratio", "width", "height"])?;
            for s in &shapes {
                w.write_record([s.scale, s.aspect_ratio, s.width, s.height].map(|v| v.to_string()))?;
            }
            let csv_body = String::from_utf8(w.into_inner().map_err(|e| data(e.to_string()))?).expect("csv output is utf-8");
            let mut body = match out.format {
                Format::Csv => csv_body.clone(),
                Format::Text => {
                    let mut s = format!("{} anchor shapes ({})\n", shapes.len(), cfg.convention);
                    s.push_str(&format!("{:>6} {:>7} {:>9} {:>9}\n", "scale", "ratio", "width", "height"));
                    for a in &shapes {
                        s.push_str(&format!("{:>6} {:>7} {:>9.2} {:>9.2}\n", a.scale, a.aspect_ratio, a.width, a.height));
                    }
                    s
                }
            };
            if let (Some(w), Some(h)) = (width, height) {
                let tiled = tile_anchors(&shapes, *w, *h, &cfg);
                let cells = grid_cells(*w, cfg.stride) * grid_cells(*h, cfg.stride);
                if out.format == Format::Text {
                    body.push_str(&format!("{w}x{h}: {cells} cells, {} anchors\n", tiled.len()));
                }
            }
            emit(stdout, &body)?;
            if let Some(dir) = &out.out {
                write_file(dir, "anchors.csv", &csv_body)?;
                write_file(dir, "anchors.toml", &cfg.to_config_string())?;
            }
            Ok(0)
        }
        Command::Synth { root, mode, magnitude, labels, seed, out } => {
            let perturbation = Perturbation::from_mode(mode, *magnitude).map_err(Failure::Usage)?;
            record_config(cli, out.as_deref())?;
            let ds = load(root)?;
            let set = perturb_ground_truth(&ds, perturbation, *seed, (*labels).into());
            let body = set.to_file_string();
            match out {
                Some(dir) => write_file(dir, "detections.txt", &body)?,
                None => emit(stdout, &body)?,
            }
            Ok(0)
        }
        Command::EvalDetect { root, dets, out } => {
            record_config(cli, out.out.as_deref())?;
            let ds = load(root)?;
            let set = load_dets(dets)?;
            let score = evaluate_detection(&set, &ds)?;
            emit(stdout, &score_line(&score))?;
            if score.no_detections {
                log::warn!("no detected area: precision set to 1.0");
            }
            if let Some(dir) = &out.out {
                let mut table = ScoreTable::new("detection", "Text Detection Results", ["Method"]);
                table.push([file_label(dets)], Some(score));
                emit_report(&Report { tables: vec![table], sweeps: vec![] }, dir)?;
            }
            Ok(0)
        }
        Command::EvalScript { root, dets, iou, out } => {
            check_ratio("--iou", *iou)?;
            record_config(cli, out.out.as_deref())?;
            let ds = load(root)?;
            let set = load_dets(dets)?;
            let pairs = script_pairs(&set, &ds, *iou);
            if pairs.is_empty() {
                return Err(data("no script-labeled detection matches a ground-truth line"));
            }
            let matrix = confusion_matrix(&pairs);
            let per_class = class_prf(&matrix)?;
            let mut table = ScoreTable::new("script_identification", "Performance of Script Identification", ["Script"]);
            for (script, score) in &per_class {
                table.push([capitalize(script.as_str())], Some(*score));
            }
            let report = Report { tables: vec![table], sweeps: vec![] };
            match out.format {
                Format::Text => {
                    emit(stdout, &matrix.to_text())?;
                    emit(stdout, &format!("accuracy {:.4}\n\n", matrix.accuracy()))?;
                    emit(stdout, &report.tables[0].to_text())?;
                }
                Format::Csv => {
                    emit(stdout, &matrix.to_csv())?;
                    emit(stdout, &report.tables[0].to_csv())?;
                }
            }
            if let Some(dir) = &out.out {
                emit_report(&report, dir)?;
                write_file(dir, "confusion.csv", &matrix.to_csv())?;
            }
            Ok(0)
        }
        Command::EvalHybrid { root, dets, out } => {
            record_config(cli, out.out.as_deref())?;
            let ds = load(root)?;
            let set = load_dets(dets)?;
            let scores = evaluate_hybrid(&set, &ds)?;
            let mut table = ScoreTable::new(
                "hybrid",
                "Performance of hybrid text detector and script identifier",
                ["Method", "Script"],
            );
            let method = file_label(dets);
            for s in &scores.per_script {
                table.push([method.clone(), capitalize(s.script.as_str())], s.score);
            }
            table.push([method, "Combined".to_string()], Some(scores.combined));
            emit_tables(stdout, out, &Report { tables: vec![table], sweeps: vec![] })?;
            Ok(0)
        }
        Command::Diagnose { root, dets, iou, out } => {
            check_ratio("--iou", *iou)?;
            record_config(cli, out.out.as_deref())?;
            let ds = load(root)?;
            let set = load_dets(dets)?;
            let diag = localization_diagnostics(&set, &ds, *iou);
            let body = match out.format {
                Format::Text => diag.to_text(),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["video_id", "frame_number", "gt_index", "detection_index", "iou", "area_ratio"])?;
                    for m in &diag.matches {
                        w.write_record([
                            m.frame.video_id.clone(),
                            m.frame.frame_number.to_string(),
                            m.gt_index.to_string(),
                            m.detection_index.to_string(),
                            m.iou.to_string(),
                            m.area_ratio.to_string(),
                        ])?;
                    }
                    String::from_utf8(w.into_inner().map_err(|e| data(e.to_string()))?).expect("csv output is utf-8")
                }
            };
            emit(stdout, &body)?;
            if let Some(dir) = &out.out {
                write_file(dir, "diagnostics.txt", &diag.to_text())?;
            }
            Ok(0)
        }
        Command::SweepResolution { root, dets, resolutions, rescale_detections, continuous, out } => {
            if *rescale_detections && dets.len() != 1 {
                return Err(Failure::Usage("--rescale-detections takes exactly one --dets file".into()));
            }
            if !*rescale_detections && dets.len() != resolutions.len() {
                return Err(Failure::Usage(format!(
                    "{} resolutions need {} --dets files (or pass --rescale-detections)",
                    resolutions.len(),
                    resolutions.len()
                )));
            }
            record_config(cli, out.out.as_deref())?;
            let ds = load(root)?;
            let sets = dets.iter().map(|p| load_dets(p)).collect::<Result<Vec<_>, _>>()?;
            let source =
                if *rescale_detections { SweepDetections::Rescale(&sets[0]) } else { SweepDetections::PerResolution(&sets) };
            let coordinates = if *continuous { Coordinates::Continuous } else { Coordinates::Rounded };
            let points = resolution_sweep(&ds, source, resolutions, coordinates)?;
            let sweep = SweepTable {
                name: "resolution_sweep".into(),
                title: "Impact of video resolution on text detection".into(),
                points,
            };
            emit_tables(stdout, out, &Report { tables: vec![], sweeps: vec![sweep] })?;
            Ok(0)
        }
        Command::Subsets { root, counts, seed, out } => {
            record_config(cli, out.out.as_deref())?;
            let ds = load(root)?;
            let subsets = training_subsets(&ds, counts, *seed)?;
            let index = ds.index();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["budget", "video_id", "frame_number"])?;
            let mut summary = String::from("budget frames lines\n");
            for (budget, keys) in counts.iter().zip(&subsets) {
                let lines: usize = keys.iter().map(|k| ds.frames[index[k]].lines.len()).sum();
                summary.push_str(&format!("{budget} {} {lines}\n", keys.len()));
                for k in keys {
                    w.write_record([budget.to_string(), k.video_id.clone(), k.frame_number.to_string()])?;
                }
            }
            let csv_body = String::from_utf8(w.into_inner().map_err(|e| data(e.to_string()))?).expect("csv output is utf-8");
            emit(stdout, if out.format == Format::Csv { &csv_body } else { &summary })?;
            if let Some(dir) = &out.out {
                write_file(dir, "subsets.csv", &csv_body)?;
            }
            Ok(0)
        }
        Command::Serve { root, bind, allow_external } => {
            record_config(cli, None)?;
            crate::service::serve(&root.root, *bind, *allow_external)?;
            Ok(0)
        }
    }
}

fn check_ratio(flag: &str, v: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{flag} must lie in [0, 1], got {v}")))
    }
}

fn file_label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("utiv").chain(args.iter().copied());
        let code = run_with_io(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let (code, out, err) = run_capture(&["stats", "--root", "x", "--bogus"]);
        assert_eq!(code, 1);
        assert!(out.is_empty());
        assert!(err.contains("Usage"), "{err}");
    }

    #[test]
    fn missing_subcommand_and_help() {
        assert_eq!(run_capture(&[]).0, 1);
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("eval-detect") && out.contains("sweep-resolution"));
    }

    #[test]
    fn missing_root_is_a_data_error() {
        let (code, _, err) = run_capture(&["stats", "--root", "/nonexistent/utiv-root"]);
        assert_eq!(code, 2);
        assert!(err.starts_with("error:"), "{err}");
    }

    #[test]
    fn resolution_parsing() {
        assert_eq!(parse_resolution("256x144"), Ok((256, 144)));
        assert!(parse_resolution("256").is_err());
        assert!(parse_resolution("0x10").is_err());
    }

    #[test]
    fn bad_perturbation_is_usage() {
        let (code, _, err) = run_capture(&["synth", "--root", "x", "--mode", "melt"]);
        assert_eq!(code, 1);
        assert!(err.contains("melt"));
    }
}
