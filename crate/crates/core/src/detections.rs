//! Detector outputs: the line-delimited detection file and a ground-truth
//! perturbation generator for exercising the metrics.
//!
//! Detection files hold one box per line, single-space separated:
//!
//! ```text
//! # video_id frame_number label score x y width height
//! ary_01 120 urdu 0.93 14 530 610 42
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{Dataset, FrameKey, Script};
use crate::geometry::{Rect, RectRegion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Text,
    Urdu,
    English,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Text => "text",
            Label::Urdu => "urdu",
            Label::English => "english",
        }
    }

    pub fn script(&self) -> Option<Script> {
        match self {
            Label::Text => None,
            Label::Urdu => Some(Script::Urdu),
            Label::English => Some(Script::English),
        }
    }

    pub fn mode(&self) -> DetectionMode {
        match self {
            Label::Text => DetectionMode::DetectOnly,
            _ => DetectionMode::Hybrid,
        }
    }
}

impl From<Script> for Label {
    fn from(s: Script) -> Self {
        match s {
            Script::Urdu => Label::Urdu,
            Script::English => Label::English,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Label::Text),
            "urdu" => Ok(Label::Urdu),
            "english" => Ok(Label::English),
            other => Err(other.to_string()),
        }
    }
}

/// Script-agnostic detection (`text` labels) or joint detection and script
/// identification (`urdu`/`english` labels).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionMode {
    DetectOnly,
    Hybrid,
}

impl fmt::Display for DetectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectionMode::DetectOnly => "detect-only",
            DetectionMode::Hybrid => "hybrid",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub bbox: Rect,
    pub label: Label,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionSet {
    /// `None` until the first detection fixes it.
    pub mode: Option<DetectionMode>,
    pub frames: BTreeMap<FrameKey, Vec<Detection>>,
}

impl DetectionSet {
    pub fn new(mode: DetectionMode) -> Self {
        DetectionSet { mode: Some(mode), frames: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.frames.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push(&mut self, key: FrameKey, detection: Detection) {
        self.frames.entry(key).or_default().push(detection);
    }

    pub fn region(&self, key: &FrameKey) -> RectRegion {
        self.frames.get(key).map(|d| d.iter().map(|d| d.bbox).collect()).unwrap_or_default()
    }

    pub fn region_for(&self, key: &FrameKey, label: Label) -> RectRegion {
        self.frames
            .get(key)
            .map(|d| d.iter().filter(|d| d.label == label).map(|d| d.bbox).collect())
            .unwrap_or_default()
    }

    /// Relabels every detection as `text`.
    pub fn collapse_to_text(&self) -> DetectionSet {
        DetectionSet {
            mode: self.mode.map(|_| DetectionMode::DetectOnly),
            frames: self
                .frames
                .iter()
                .map(|(k, dets)| (k.clone(), dets.iter().map(|d| Detection { label: Label::Text, ..*d }).collect()))
                .collect(),
        }
    }

    /// Serializes in the line-delimited detection format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::from("# video_id frame_number label score x y width height\n");
        for (key, dets) in &self.frames {
            for d in dets {
                let _ = writeln!(
                    out,
                    "{} {} {} {} {} {} {} {}",
                    key.video_id, key.frame_number, d.label, d.score, d.bbox.x, d.bbox.y, d.bbox.width, d.bbox.height
                );
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionErrorKind {
    FieldCount,
    InvalidNumber,
    UnknownLabel,
    ScoreOutOfRange,
    DegenerateBox,
    MixedModes,
}

#[derive(Debug, Error)]
pub enum DetectionError {
    #[error("line {line}: expected 8 space-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: field `{field}` has invalid value `{value}`")]
    InvalidNumber { line: usize, field: &'static str, value: String },
    #[error("line {line}: unknown label `{label}` (expected text, urdu or english)")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: score {score} is outside [0, 1]")]
    ScoreOutOfRange { line: usize, score: f64 },
    #[error("line {line}: box has non-positive width or height")]
    DegenerateBox { line: usize },
    #[error("line {line}: `{label}` detection in a {mode} file (text and script labels cannot be mixed)")]
    MixedModes { line: usize, label: Label, mode: DetectionMode },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl DetectionError {
    pub fn kind(&self) -> Option<DetectionErrorKind> {
        Some(match self {
            DetectionError::FieldCount { .. } => DetectionErrorKind::FieldCount,
            DetectionError::InvalidNumber { .. } => DetectionErrorKind::InvalidNumber,
            DetectionError::UnknownLabel { .. } => DetectionErrorKind::UnknownLabel,
            DetectionError::ScoreOutOfRange { .. } => DetectionErrorKind::ScoreOutOfRange,
            DetectionError::DegenerateBox { .. } => DetectionErrorKind::DegenerateBox,
            DetectionError::MixedModes { .. } => DetectionErrorKind::MixedModes,
            DetectionError::Io { .. } => return None,
        })
    }
}

pub fn parse_detections(path: &Path) -> Result<DetectionSet, DetectionError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| DetectionError::Io { path: path.display().to_string(), source })?;
    parse_detections_str(&text)
}

fn field<T: FromStr>(line: usize, name: &'static str, value: &str) -> Result<T, DetectionError> {
    value
        .parse()
        .map_err(|_| DetectionError::InvalidNumber { line, field: name, value: value.to_string() })
}

pub fn parse_detections_str(text: &str) -> Result<DetectionSet, DetectionError> {
    let mut set = DetectionSet::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split(' ').collect();
        if fields.len() != 8 {
            return Err(DetectionError::FieldCount { line, found: fields.len() });
        }
        let video_id = fields[0];
        if video_id.is_empty() {
            return Err(DetectionError::FieldCount { line, found: fields.iter().filter(|f| !f.is_empty()).count() });
        }
        let frame_number: u64 = field(line, "frame_number", fields[1])?;
        let label: Label = fields[2]
            .parse()
            .map_err(|label| DetectionError::UnknownLabel { line, label })?;
        let score: f64 = field(line, "score", fields[3])?;
        if !(0.0..=1.0).contains(&score) {
            return Err(DetectionError::ScoreOutOfRange { line, score });
        }
        let bbox = Rect::new(
            field(line, "x", fields[4])?,
            field(line, "y", fields[5])?,
            field(line, "width", fields[6])?,
            field(line, "height", fields[7])?,
        );
        if !bbox.is_valid() {
            return Err(DetectionError::DegenerateBox { line });
        }
        match set.mode {
            None => set.mode = Some(label.mode()),
            Some(mode) if mode != label.mode() => return Err(DetectionError::MixedModes { line, label, mode }),
            Some(_) => {}
        }
        set.push(FrameKey::new(video_id, frame_number), Detection { bbox, label, score });
    }
    Ok(set)
}

/// Ground-truth perturbations; magnitudes are pixels except for `Drop`
/// (probability) and `Spurious` (boxes per frame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    Exact,
    Dilate(i64),
    Erode(i64),
    Shift(i64),
    Drop(f64),
    Spurious(usize),
}

impl Perturbation {
    /// Builds from a mode name and a numeric magnitude.
    pub fn from_mode(mode: &str, magnitude: f64) -> Result<Self, String> {
        let pixels = || {
            if magnitude >= 0.0 && magnitude.fract() == 0.0 {
                Ok(magnitude as i64)
            } else {
                Err(format!("{mode} needs a non-negative whole number of pixels, got {magnitude}"))
            }
        };
        match mode {
            "exact" => Ok(Perturbation::Exact),
            "dilate" => pixels().map(Perturbation::Dilate),
            "erode" => pixels().map(Perturbation::Erode),
            "shift" => pixels().map(Perturbation::Shift),
            "drop" if (0.0..=1.0).contains(&magnitude) => Ok(Perturbation::Drop(magnitude)),
            "drop" => Err(format!("drop needs a probability in [0, 1], got {magnitude}")),
            "spurious" => pixels().map(|n| Perturbation::Spurious(n as usize)),
            other => Err(format!("unknown perturbation mode `{other}`")),
        }
    }
}

const SPURIOUS_ATTEMPTS: usize = 1000;

/// Turns ground truth into synthetic detections with score 1.0.
///
/// Labels copy each line's script in [`DetectionMode::Hybrid`] and are `text`
/// otherwise. Spurious boxes are rejection-sampled so that they never touch a
/// ground-truth box. Every frame of `ds` gets an entry, possibly empty.
pub fn perturb_ground_truth(ds: &Dataset, perturbation: Perturbation, seed: u64, mode: DetectionMode) -> DetectionSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = DetectionSet::new(mode);
    let label_for = |script: Script| match mode {
        DetectionMode::Hybrid => Label::from(script),
        DetectionMode::DetectOnly => Label::Text,
    };
    for frame in &ds.frames {
        let key = frame.key();
        let mut dets = Vec::new();
        for line in &frame.lines {
            let src = line.bbox;
            let out = match perturbation {
                Perturbation::Exact | Perturbation::Spurious(_) => Some(src),
                Perturbation::Dilate(m) => src.inflate(m).and_then(|r| r.clip(frame.width, frame.height)),
                Perturbation::Erode(m) => {
                    let r = src.inflate(-m);
                    if r.is_none() {
                        log::warn!("{key}: erosion by {m} px removes box {src}");
                    }
                    r
                }
                Perturbation::Shift(m) => {
                    let dx = rng.random_range(-m..=m);
                    let dy = rng.random_range(-m..=m);
                    src.translate(dx, dy).clip(frame.width, frame.height)
                }
                Perturbation::Drop(p) => (rng.random::<f64>() >= p).then_some(src),
            };
            if let Some(bbox) = out {
                dets.push(Detection { bbox, label: label_for(line.script), score: 1.0 });
            }
        }
        if let Perturbation::Spurious(count) = perturbation {
            for _ in 0..count {
                match spurious_box(frame.width, frame.height, &frame.lines.iter().map(|l| l.bbox).collect::<Vec<_>>(), &mut rng) {
                    Some(bbox) => {
                        let script = if rng.random::<bool>() { Script::Urdu } else { Script::English };
                        dets.push(Detection { bbox, label: label_for(script), score: 1.0 });
                    }
                    None => log::warn!("{key}: no text-free room for a spurious box"),
                }
            }
        }
        set.frames.insert(key, dets);
    }
    set
}

fn spurious_box(width: u32, height: u32, avoid: &[Rect], rng: &mut ChaCha8Rng) -> Option<Rect> {
    let (w, h) = (width as i64, height as i64);
    for _ in 0..SPURIOUS_ATTEMPTS {
        let bw = rng.random_range(1..=(w / 3).max(1));
        let bh = rng.random_range(1..=(h / 10).max(1));
        let candidate = Rect::new(rng.random_range(0..=w - bw), rng.random_range(0..=h - bh), bw, bh);
        if avoid.iter().all(|g| candidate.intersection(g).is_none()) {
            return Some(candidate);
        }
    }
    None
}
