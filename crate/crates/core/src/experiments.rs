//! Sensitivity harnesses: test-resolution sweeps, nested training subsets and
//! report files.

use std::fmt;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::anchors::round_half_up;
use crate::dataset::{Dataset, FrameAnnotation, FrameKey, TextLine};
use crate::detections::{Detection, DetectionSet};
use crate::evaluation::{continuous_frame_tally, evaluate_detection, ContinuousTally, EvalError, PrfScore, ScoreTable};
use crate::geometry::{ContinuousRect, Rect};

/// Test resolutions from 256x144 up to 1920x1080.
pub const STANDARD_RESOLUTIONS: [(u32, u32); 6] =
    [(256, 144), (426, 240), (640, 360), (900, 600), (1280, 720), (1920, 1080)];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("line budget {requested} exceeds the {available} lines available")]
    BudgetExceeded { requested: usize, available: usize },
    #[error("line budgets must be ascending, got {0:?}")]
    NotAscending(Vec<usize>),
    #[error("{expected} resolutions but {found} detection sets")]
    DetectionCount { expected: usize, found: usize },
    #[error("invalid resolution {0}x{1}")]
    InvalidResolution(u32, u32),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum SweepParam {
    Resolution { width: u32, height: u32 },
    TrainingLines(usize),
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParam::Resolution { width, height } => write!(f, "{width}x{height}"),
            SweepParam::TrainingLines(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub param: SweepParam,
    pub score: PrfScore,
}

/// Where each sweep point's detections come from.
#[derive(Debug, Clone, Copy)]
pub enum SweepDetections<'a> {
    /// One set at the native resolution, rescaled along with the ground truth.
    Rescale(&'a DetectionSet),
    /// One set per target resolution, already in that resolution's pixels.
    PerResolution(&'a [DetectionSet]),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Coordinates {
    /// Corners rounded half-up to whole pixels.
    #[default]
    Rounded,
    /// Real-valued corners, no rounding.
    Continuous,
}

/// Scales `[x0, x1)` by `factor`, rounding both ends half-up; keeps at least one pixel.
fn scale_span(start: i64, end: i64, factor: f64) -> (i64, i64) {
    let a = round_half_up(start as f64 * factor) as i64;
    let b = round_half_up(end as f64 * factor) as i64;
    (a, b.max(a + 1))
}

pub fn rescale_rect(r: &Rect, sx: f64, sy: f64) -> Rect {
    let (x0, x1) = scale_span(r.x, r.right(), sx);
    let (y0, y1) = scale_span(r.y, r.bottom(), sy);
    Rect::new(x0, y0, x1 - x0, y1 - y0)
}

fn scale_factors(frame: &FrameAnnotation, width: u32, height: u32) -> (f64, f64) {
    (width as f64 / frame.width as f64, height as f64 / frame.height as f64)
}

/// Every frame resized to `width × height`, boxes rescaled per axis.
pub fn rescale_dataset(ds: &Dataset, width: u32, height: u32) -> Dataset {
    let frames = ds
        .frames
        .iter()
        .map(|f| {
            let (sx, sy) = scale_factors(f, width, height);
            FrameAnnotation {
                width,
                height,
                lines: f
                    .lines
                    .iter()
                    .map(|l| TextLine { bbox: rescale_rect(&l.bbox, sx, sy), ..l.clone() })
                    .collect(),
                ..f.clone()
            }
        })
        .collect();
    Dataset { root: ds.root.clone(), frames }
}

/// Detections rescaled with the factors of their frames in `ds`.
pub fn rescale_detections(dets: &DetectionSet, ds: &Dataset, width: u32, height: u32) -> DetectionSet {
    let index = ds.index();
    let frames = dets
        .frames
        .iter()
        .map(|(key, list)| {
            let (sx, sy) = index.get(key).map_or((1.0, 1.0), |&i| scale_factors(&ds.frames[i], width, height));
            let scaled = list.iter().map(|d| Detection { bbox: rescale_rect(&d.bbox, sx, sy), ..*d }).collect();
            (key.clone(), scaled)
        })
        .collect();
    DetectionSet { mode: dets.mode, frames }
}

fn continuous_score(ds: &Dataset, dets: &DetectionSet, width: u32, height: u32, rescale_dets: bool) -> Result<PrfScore, EvalError> {
    let known = ds.index();
    if let Some(unknown) = dets.frames.keys().find(|k| !known.contains_key(*k)) {
        return Err(EvalError::UnknownFrames(vec![unknown.clone()]));
    }
    let tally: ContinuousTally = ds
        .frames
        .par_iter()
        .map(|frame| {
            let (sx, sy) = scale_factors(frame, width, height);
            let gt: Vec<ContinuousRect> = frame.boxes().map(|r| r.to_continuous().scale(sx, sy)).collect();
            let (dsx, dsy) = if rescale_dets { (sx, sy) } else { (1.0, 1.0) };
            let det: Vec<ContinuousRect> = dets
                .frames
                .get(&frame.key())
                .map(|d| d.iter().map(|d| d.bbox.to_continuous().scale(dsx, dsy)).collect())
                .unwrap_or_default();
            continuous_frame_tally(&det, &gt)
        })
        .sum();
    tally.score()
}

/// Evaluates detections at each target resolution; points come back sorted by
/// resolution.
pub fn resolution_sweep(
    ds: &Dataset,
    dets: SweepDetections<'_>,
    resolutions: &[(u32, u32)],
    coordinates: Coordinates,
) -> Result<Vec<SweepPoint>, ExperimentError> {
    if let Some(&(w, h)) = resolutions.iter().find(|(w, h)| *w == 0 || *h == 0) {
        return Err(ExperimentError::InvalidResolution(w, h));
    }
    if let SweepDetections::PerResolution(sets) = dets {
        if sets.len() != resolutions.len() {
            return Err(ExperimentError::DetectionCount { expected: resolutions.len(), found: sets.len() });
        }
    }
    let mut points = resolutions
        .par_iter()
        .enumerate()
        .map(|(i, &(width, height))| {
            let (set, rescale) = match dets {
                SweepDetections::Rescale(set) => (set, true),
                SweepDetections::PerResolution(sets) => (&sets[i], false),
            };
            let score = match coordinates {
                Coordinates::Continuous => continuous_score(ds, set, width, height, rescale)?,
                Coordinates::Rounded => {
                    let scaled_ds = rescale_dataset(ds, width, height);
                    if rescale {
                        evaluate_detection(&rescale_detections(set, ds, width, height), &scaled_ds)?
                    } else {
                        evaluate_detection(set, &scaled_ds)?
                    }
                }
            };
            Ok(SweepPoint { param: SweepParam::Resolution { width, height }, score })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    points.sort_by_key(|p| p.param);
    Ok(points)
}

/// Nested frame subsets whose line counts first reach each budget.
///
/// Frames are shuffled once with `seed`; each subset is the shortest prefix
/// holding at least the budgeted number of lines, so every subset contains the
/// previous one. A budget equal to the corpus total returns every frame.
pub fn training_subsets(ds: &Dataset, line_counts: &[usize], seed: u64) -> Result<Vec<Vec<FrameKey>>, ExperimentError> {
    if line_counts.windows(2).any(|w| w[0] > w[1]) {
        return Err(ExperimentError::NotAscending(line_counts.to_vec()));
    }
    let available = ds.total_lines();
    if let Some(&requested) = line_counts.iter().find(|&&c| c > available) {
        return Err(ExperimentError::BudgetExceeded { requested, available });
    }
    let mut order: Vec<usize> = (0..ds.frames.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut subsets = Vec::with_capacity(line_counts.len());
    for &budget in line_counts {
        let take = if budget == available {
            order.len()
        } else {
            let mut lines = 0;
            let mut n = 0;
            while lines < budget {
                lines += ds.frames[order[n]].lines.len();
                n += 1;
            }
            n
        };
        subsets.push(order[..take].iter().map(|&i| ds.frames[i].key()).collect());
    }
    Ok(subsets)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub name: String,
    pub title: String,
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,precision,recall,f_measure\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p.param, p.score.precision, p.score.recall, p.score.f_measure));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut table = ScoreTable::new(&self.name, &self.title, ["Param"]);
        for p in &self.points {
            table.push([p.param.to_string()], Some(p.score));
        }
        table.to_text()
    }
}

/// Named score tables and sweeps destined for one output directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub tables: Vec<ScoreTable>,
    pub sweeps: Vec<SweepTable>,
}

pub const SUMMARY_FILE: &str = "summary.txt";

impl Report {
    pub fn summary(&self) -> String {
        let mut out = String::from("Evaluation summary\n");
        for t in &self.tables {
            out.push('\n');
            out.push_str(&t.to_text());
        }
        for s in &self.sweeps {
            out.push('\n');
            out.push_str(&s.to_text());
        }
        out
    }
}

/// Writes `<name>.csv` for every table and sweep plus `summary.txt`, returning
/// the written paths in that order.
pub fn emit_report(report: &Report, out_dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExperimentError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut written = Vec::new();
    let files = report
        .tables
        .iter()
        .map(|t| (&t.name, t.to_csv()))
        .chain(report.sweeps.iter().map(|s| (&s.name, s.to_csv())));
    for (name, body) in files {
        let path = out_dir.join(format!("{name}.csv"));
        std::fs::write(&path, body).map_err(io(&path))?;
        written.push(path);
    }
    let path = out_dir.join(SUMMARY_FILE);
    std::fs::write(&path, report.summary()).map_err(io(&path))?;
    written.push(path);
    Ok(written)
}
