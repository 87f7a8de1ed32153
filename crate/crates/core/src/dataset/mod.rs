//! Ground-truth model for labeled video frames and the on-disk corpus layout.
//!
//! ```text
//! root/<channel>/<video_id>/frames/<video_id>_<frame_number>.png|jpg
//! root/<channel>/<video_id>/gt/<video_id>_<frame_number>.xml
//! ```

mod dedup;
mod split;
mod stats;
mod validate;
pub mod xml;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Rect;

pub use dedup::{dedup_frames, difference_hash, hamming_distance, DedupReport};
pub use split::{split_dataset, Split};
pub use stats::{dataset_stats, ChannelStats, DatasetStats};
pub use validate::{validate_dataset, Issue, IssueKind, Severity};
pub use xml::{parse_frame_annotation, parse_frame_annotation_with, write_frame_annotation, ParseMode, ParsedFrame, XmlError};

pub const FRAMES_DIR: &str = "frames";
pub const GT_DIR: &str = "gt";
pub const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Script {
    Urdu,
    English,
}

impl Script {
    pub const ALL: [Script; 2] = [Script::Urdu, Script::English];

    pub fn as_str(&self) -> &'static str {
        match self {
            Script::Urdu => "urdu",
            Script::English => "english",
        }
    }

    /// Row/column index in a confusion matrix.
    pub fn index(&self) -> usize {
        match self {
            Script::Urdu => 0,
            Script::English => 1,
        }
    }

    pub fn other(&self) -> Script {
        match self {
            Script::Urdu => Script::English,
            Script::English => Script::Urdu,
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown script `{0}` (expected `urdu` or `english`)")]
pub struct UnknownScript(pub String);

impl FromStr for Script {
    type Err = UnknownScript;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "urdu" => Ok(Script::Urdu),
            "english" => Ok(Script::English),
            other => Err(UnknownScript(other.to_string())),
        }
    }
}

/// Identifies a frame within the corpus: `<video_id>_<frame_number>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameKey {
    pub video_id: String,
    pub frame_number: u64,
}

impl FrameKey {
    pub fn new(video_id: impl Into<String>, frame_number: u64) -> Self {
        FrameKey { video_id: video_id.into(), frame_number }
    }
}

impl fmt::Display for FrameKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.video_id, self.frame_number)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid frame key `{0}` (expected <video_id>_<frame_number>)")]
pub struct InvalidFrameKey(pub String);

impl FromStr for FrameKey {
    type Err = InvalidFrameKey;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (video, number) = s.rsplit_once('_').ok_or_else(|| InvalidFrameKey(s.to_string()))?;
        if video.is_empty() {
            return Err(InvalidFrameKey(s.to_string()));
        }
        let frame_number = number.parse().map_err(|_| InvalidFrameKey(s.to_string()))?;
        Ok(FrameKey::new(video, frame_number))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextLine {
    pub bbox: Rect,
    pub script: Script,
    /// Verbatim UTF-8, possibly empty.
    pub transcription: String,
}

impl TextLine {
    pub fn new(bbox: Rect, script: Script, transcription: impl Into<String>) -> Self {
        TextLine { bbox, script, transcription: transcription.into() }
    }
}

/// Ground truth for one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameAnnotation {
    pub channel: String,
    pub video_id: String,
    pub frame_number: u64,
    pub width: u32,
    pub height: u32,
    pub lines: Vec<TextLine>,
}

impl FrameAnnotation {
    pub fn key(&self) -> FrameKey {
        FrameKey::new(self.video_id.clone(), self.frame_number)
    }

    pub fn line_count(&self, script: Script) -> usize {
        self.lines.iter().filter(|l| l.script == script).count()
    }

    pub fn boxes(&self) -> impl Iterator<Item = Rect> + '_ {
        self.lines.iter().map(|l| l.bbox)
    }

    pub fn file_name(&self) -> String {
        format!("{}.xml", self.key())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub root: Option<PathBuf>,
    pub frames: Vec<FrameAnnotation>,
}

impl Dataset {
    pub fn new(frames: Vec<FrameAnnotation>) -> Self {
        Dataset { root: None, frames }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn total_lines(&self) -> usize {
        self.frames.iter().map(|f| f.lines.len()).sum()
    }

    /// Lookup table from key to frame index.
    pub fn index(&self) -> BTreeMap<FrameKey, usize> {
        self.frames.iter().enumerate().map(|(i, f)| (f.key(), i)).collect()
    }

    pub fn frame(&self, key: &FrameKey) -> Option<&FrameAnnotation> {
        self.frames.iter().find(|f| f.video_id == key.video_id && f.frame_number == key.frame_number)
    }

    /// Keeps only the frames named in `keys`, preserving dataset order.
    pub fn subset(&self, keys: &[FrameKey]) -> Dataset {
        let wanted: std::collections::BTreeSet<&FrameKey> = keys.iter().collect();
        Dataset {
            root: self.root.clone(),
            frames: self.frames.iter().filter(|f| wanted.contains(&f.key())).cloned().collect(),
        }
    }

    /// Writes the corpus layout under `root`, with a flat gray image per frame.
    pub fn write_to(&self, root: &Path) -> Result<(), DatasetError> {
        for frame in &self.frames {
            let video_dir = root.join(&frame.channel).join(&frame.video_id);
            let gt_dir = video_dir.join(GT_DIR);
            let frames_dir = video_dir.join(FRAMES_DIR);
            for dir in [&gt_dir, &frames_dir] {
                std::fs::create_dir_all(dir).map_err(|e| DatasetError::io(dir, e))?;
            }
            let xml_path = gt_dir.join(frame.file_name());
            std::fs::write(&xml_path, write_frame_annotation(frame)).map_err(|e| DatasetError::io(&xml_path, e))?;
            let image_path = frames_dir.join(format!("{}.png", frame.key()));
            image::GrayImage::from_pixel(frame.width, frame.height, image::Luma([128]))
                .save(&image_path)
                .map_err(|e| DatasetError::Image { path: image_path.clone(), message: e.to_string() })?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Xml { path: PathBuf, source: Box<XmlError> },
    #[error("{path}: cannot encode image: {message}")]
    Image { path: PathBuf, message: String },
    #[error("orphan annotation {path}: no frame image named {stem}.png/.jpg in {frames_dir}")]
    OrphanAnnotation { path: PathBuf, stem: String, frames_dir: PathBuf },
    #[error("duplicate frame key {key}: {first} and {second}")]
    DuplicateKey { key: FrameKey, first: PathBuf, second: PathBuf },
    #[error("{path}: annotation describes {found} but its location implies {expected}")]
    LocationMismatch { path: PathBuf, expected: String, found: String },
    #[error("dataset root {0} is not a directory")]
    NotADirectory(PathBuf),
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io { path: path.to_path_buf(), source }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub mode: ParseMode,
}

/// Image file for `stem` inside `frames_dir`, trying each known extension.
pub fn find_image(frames_dir: &Path, stem: &str) -> Option<PathBuf> {
    IMAGE_EXTENSIONS.iter().map(|ext| frames_dir.join(format!("{stem}.{ext}"))).find(|p| p.is_file())
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    let mut entries = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| DatasetError::io(dir, e))? {
        entries.push(entry.map_err(|e| DatasetError::io(dir, e))?.path());
    }
    entries.sort();
    Ok(entries)
}

/// Location of one frame on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLocation {
    pub channel: String,
    pub video_id: String,
    pub stem: String,
    pub annotation: PathBuf,
    pub frames_dir: PathBuf,
}

/// Every `gt/*.xml` under `root`, sorted by channel, video and file name.
pub fn annotation_files(root: &Path) -> Result<Vec<FrameLocation>, DatasetError> {
    if !root.is_dir() {
        return Err(DatasetError::NotADirectory(root.to_path_buf()));
    }
    let mut out = Vec::new();
    for channel_dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let channel = file_name(&channel_dir);
        for video_dir in sorted_entries(&channel_dir)?.into_iter().filter(|p| p.is_dir()) {
            let video_id = file_name(&video_dir);
            let gt_dir = video_dir.join(GT_DIR);
            if !gt_dir.is_dir() {
                continue;
            }
            for path in sorted_entries(&gt_dir)? {
                if path.extension().and_then(|e| e.to_str()) != Some("xml") {
                    continue;
                }
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
                out.push(FrameLocation {
                    channel: channel.clone(),
                    video_id: video_id.clone(),
                    stem,
                    annotation: path,
                    frames_dir: video_dir.join(FRAMES_DIR),
                });
            }
        }
    }
    Ok(out)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn load_dataset(root: &Path) -> Result<Dataset, DatasetError> {
    load_dataset_with(root, LoadOptions::default())
}

/// Loads every annotation under `root`, checking that each has a frame image
/// and that file names, directories and XML metadata agree.
pub fn load_dataset_with(root: &Path, options: LoadOptions) -> Result<Dataset, DatasetError> {
    let locations = annotation_files(root)?;
    let parsed: Vec<FrameAnnotation> = locations
        .par_iter()
        .map(|loc| load_one(loc, options))
        .collect::<Result<_, _>>()?;

    let mut seen: BTreeMap<FrameKey, usize> = BTreeMap::new();
    for (i, frame) in parsed.iter().enumerate() {
        if let Some(&first) = seen.get(&frame.key()) {
            return Err(DatasetError::DuplicateKey {
                key: frame.key(),
                first: locations[first].annotation.clone(),
                second: locations[i].annotation.clone(),
            });
        }
        seen.insert(frame.key(), i);
    }

    let mut frames = parsed;
    frames.sort_by(|a, b| (&a.channel, &a.video_id, a.frame_number).cmp(&(&b.channel, &b.video_id, b.frame_number)));
    Ok(Dataset { root: Some(root.to_path_buf()), frames })
}

fn load_one(loc: &FrameLocation, options: LoadOptions) -> Result<FrameAnnotation, DatasetError> {
    if find_image(&loc.frames_dir, &loc.stem).is_none() {
        return Err(DatasetError::OrphanAnnotation {
            path: loc.annotation.clone(),
            stem: loc.stem.clone(),
            frames_dir: loc.frames_dir.clone(),
        });
    }
    let text = std::fs::read_to_string(&loc.annotation).map_err(|e| DatasetError::io(&loc.annotation, e))?;
    let parsed = parse_frame_annotation_with(&text, options.mode)
        .map_err(|source| DatasetError::Xml { path: loc.annotation.clone(), source: Box::new(source) })?;
    for warning in &parsed.warnings {
        log::warn!("{}: {}", loc.annotation.display(), warning);
    }
    let frame = parsed.annotation;
    let expected = format!("{}/{}/{}", loc.channel, loc.video_id, loc.stem);
    let found = format!("{}/{}/{}", frame.channel, frame.video_id, frame.key());
    if expected != found {
        return Err(DatasetError::LocationMismatch { path: loc.annotation.clone(), expected, found });
    }
    Ok(frame)
}
