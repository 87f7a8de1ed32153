//! Area-based precision, recall and F-measure.
//!
//! For estimated text area `E` and ground-truth text area `T` (both unions of
//! boxes), precision is `|E ∩ T| / |E|` and recall is `|E ∩ T| / |T|`. Over many
//! frames the three areas are summed before dividing.

mod confusion;
mod diagnostics;
mod report;

use std::collections::BTreeSet;
use std::ops::{Add, AddAssign};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{Dataset, FrameAnnotation, FrameKey, Script};
use crate::detections::{DetectionMode, DetectionSet, Label};
use crate::geometry::{
    continuous_region_intersection_area, continuous_union_area, region_intersection_area, union_area, ContinuousRect,
    RectRegion,
};

pub use confusion::{class_prf, confusion_matrix, ConfusionMatrix};
pub use diagnostics::{greedy_match, localization_diagnostics, script_pairs, Diagnostics, LocalizationMatch};
pub use report::{round_to, ScoreRow, ScoreTable};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("scores are undefined: no detected and no ground-truth area")]
    UndefinedScore,
    #[error("scores for class `{0}` are undefined: it has no true instances")]
    EmptyClass(Script),
    #[error("detections reference {} frame(s) missing from the dataset: {}", .0.len(), format_keys(.0))]
    UnknownFrames(Vec<FrameKey>),
    #[error("hybrid evaluation needs urdu/english labels, got a {0} detection set")]
    ModeMismatch(DetectionMode),
}

fn format_keys(keys: &[FrameKey]) -> String {
    keys.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Area sums for one frame or a set of frames, in pixels².
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AreaTally {
    pub intersection: u64,
    pub detected: u64,
    pub ground_truth: u64,
}

impl Add for AreaTally {
    type Output = AreaTally;

    fn add(self, rhs: AreaTally) -> AreaTally {
        AreaTally {
            intersection: self.intersection + rhs.intersection,
            detected: self.detected + rhs.detected,
            ground_truth: self.ground_truth + rhs.ground_truth,
        }
    }
}

impl AddAssign for AreaTally {
    fn add_assign(&mut self, rhs: AreaTally) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for AreaTally {
    fn sum<I: Iterator<Item = AreaTally>>(iter: I) -> AreaTally {
        iter.fold(AreaTally::default(), Add::add)
    }
}

impl AreaTally {
    pub fn score(&self) -> Result<PrfScore, EvalError> {
        PrfScore::from_areas(self.intersection as f64, self.detected as f64, self.ground_truth as f64)
    }
}

/// Real-valued tally for boxes in continuous coordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ContinuousTally {
    pub intersection: f64,
    pub detected: f64,
    pub ground_truth: f64,
}

impl Add for ContinuousTally {
    type Output = ContinuousTally;

    fn add(self, rhs: ContinuousTally) -> ContinuousTally {
        ContinuousTally {
            intersection: self.intersection + rhs.intersection,
            detected: self.detected + rhs.detected,
            ground_truth: self.ground_truth + rhs.ground_truth,
        }
    }
}

impl std::iter::Sum for ContinuousTally {
    fn sum<I: Iterator<Item = ContinuousTally>>(iter: I) -> ContinuousTally {
        iter.fold(ContinuousTally::default(), Add::add)
    }
}

impl ContinuousTally {
    pub fn score(&self) -> Result<PrfScore, EvalError> {
        PrfScore::from_areas(self.intersection, self.detected, self.ground_truth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrfScore {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    /// Precision was set to 1.0 because nothing was detected.
    pub no_detections: bool,
    /// Recall was set to 1.0 because there was no ground truth.
    pub no_ground_truth: bool,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

impl PrfScore {
    pub fn new(precision: f64, recall: f64) -> Self {
        PrfScore { precision, recall, f_measure: f_measure(precision, recall), no_detections: false, no_ground_truth: false }
    }

    fn from_areas(intersection: f64, detected: f64, ground_truth: f64) -> Result<Self, EvalError> {
        if detected == 0.0 && ground_truth == 0.0 {
            return Err(EvalError::UndefinedScore);
        }
        let no_detections = detected == 0.0;
        let no_ground_truth = ground_truth == 0.0;
        let precision = if no_detections { 1.0 } else { intersection / detected };
        let recall = if no_ground_truth { 1.0 } else { intersection / ground_truth };
        Ok(PrfScore { no_detections, no_ground_truth, ..PrfScore::new(precision, recall) })
    }

    /// Copy with every ratio rounded half away from zero to `decimals` places.
    pub fn rounded(&self, decimals: u32) -> PrfScore {
        PrfScore {
            precision: round_to(self.precision, decimals),
            recall: round_to(self.recall, decimals),
            f_measure: round_to(self.f_measure, decimals),
            ..*self
        }
    }
}

pub fn frame_tally(detections: &RectRegion, ground_truth: &RectRegion) -> AreaTally {
    AreaTally {
        intersection: region_intersection_area(detections, ground_truth),
        detected: union_area(detections),
        ground_truth: union_area(ground_truth),
    }
}

pub fn continuous_frame_tally(detections: &[ContinuousRect], ground_truth: &[ContinuousRect]) -> ContinuousTally {
    ContinuousTally {
        intersection: continuous_region_intersection_area(detections, ground_truth),
        detected: continuous_union_area(detections),
        ground_truth: continuous_union_area(ground_truth),
    }
}

/// Micro-average: sums every tally, then divides.
pub fn aggregate(tallies: &[AreaTally]) -> Result<PrfScore, EvalError> {
    tallies.iter().copied().sum::<AreaTally>().score()
}

fn check_keys(dets: &DetectionSet, ds: &Dataset) -> Result<(), EvalError> {
    let known: BTreeSet<FrameKey> = ds.frames.iter().map(FrameAnnotation::key).collect();
    let unknown: Vec<FrameKey> = dets.frames.keys().filter(|k| !known.contains(*k)).cloned().collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(EvalError::UnknownFrames(unknown))
    }
}

/// Per-frame tallies over all boxes, ignoring labels and scripts.
pub fn detection_tallies(dets: &DetectionSet, ds: &Dataset) -> Result<Vec<(FrameKey, AreaTally)>, EvalError> {
    check_keys(dets, ds)?;
    Ok(ds
        .frames
        .par_iter()
        .map(|frame| {
            let key = frame.key();
            let gt: RectRegion = frame.boxes().collect();
            let tally = frame_tally(&dets.region(&key), &gt);
            (key, tally)
        })
        .collect())
}

/// Script-agnostic detection score over the whole dataset.
pub fn evaluate_detection(dets: &DetectionSet, ds: &Dataset) -> Result<PrfScore, EvalError> {
    if dets.mode == Some(DetectionMode::Hybrid) {
        log::info!("hybrid detections collapsed to `text` for script-agnostic evaluation");
    }
    let tallies: Vec<AreaTally> = detection_tallies(dets, ds)?.into_iter().map(|(_, t)| t).collect();
    aggregate(&tallies)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScriptScore {
    pub script: Script,
    pub tally: AreaTally,
    /// `None` when the script has neither ground truth nor detections.
    pub score: Option<PrfScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridScores {
    pub per_script: Vec<ScriptScore>,
    pub combined_tally: AreaTally,
    pub combined: PrfScore,
}

impl HybridScores {
    pub fn script(&self, script: Script) -> Option<&ScriptScore> {
        self.per_script.iter().find(|s| s.script == script)
    }
}

/// Per-script scores: detections labeled `s` against ground-truth lines of
/// script `s`. The combined score ignores labels.
pub fn evaluate_hybrid(dets: &DetectionSet, ds: &Dataset) -> Result<HybridScores, EvalError> {
    match dets.mode {
        Some(DetectionMode::DetectOnly) => return Err(EvalError::ModeMismatch(DetectionMode::DetectOnly)),
        Some(DetectionMode::Hybrid) | None => {}
    }
    check_keys(dets, ds)?;
    let per_frame: Vec<[AreaTally; 3]> = ds
        .frames
        .par_iter()
        .map(|frame| {
            let key = frame.key();
            let per_script = Script::ALL.map(|script| {
                let gt: RectRegion = frame.lines.iter().filter(|l| l.script == script).map(|l| l.bbox).collect();
                frame_tally(&dets.region_for(&key, Label::from(script)), &gt)
            });
            let all: RectRegion = frame.boxes().collect();
            [per_script[0], per_script[1], frame_tally(&dets.region(&key), &all)]
        })
        .collect();
    let sum = |i: usize| per_frame.iter().map(|t| t[i]).sum::<AreaTally>();
    let per_script = Script::ALL
        .iter()
        .map(|&script| {
            let tally = sum(script.index());
            ScriptScore { script, tally, score: tally.score().ok() }
        })
        .collect();
    let combined_tally = sum(2);
    Ok(HybridScores { per_script, combined_tally, combined: combined_tally.score()? })
}
