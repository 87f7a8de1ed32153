//! Localization diagnostics: one-to-one box matching and size errors.

use serde::Serialize;

use crate::dataset::{Dataset, FrameKey, Script};
use crate::detections::DetectionSet;
use crate::geometry::{iou, Rect};

pub const HISTOGRAM_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationMatch {
    pub frame: FrameKey,
    pub gt_index: usize,
    pub detection_index: usize,
    pub iou: f64,
    /// Detected area over ground-truth area.
    pub area_ratio: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub iou_threshold: f64,
    pub matches: Vec<LocalizationMatch>,
    /// Matched IoU counts in ten equal bins over [0, 1]; 1.0 falls in the last.
    pub iou_histogram: [u64; HISTOGRAM_BINS],
    pub misses: usize,
    pub false_alarms: usize,
    pub oversize: usize,
    pub undersize: usize,
    pub exact_size: usize,
}

impl Diagnostics {
    pub fn mean_iou(&self) -> Option<f64> {
        (!self.matches.is_empty()).then(|| self.matches.iter().map(|m| m.iou).sum::<f64>() / self.matches.len() as f64)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "matches {}  misses {}  false alarms {}\noversize {}  undersize {}  exact size {}\n",
            self.matches.len(),
            self.misses,
            self.false_alarms,
            self.oversize,
            self.undersize,
            self.exact_size
        );
        if let Some(mean) = self.mean_iou() {
            out.push_str(&format!("mean matched IoU {mean:.4}\n"));
        }
        out.push_str("IoU histogram\n");
        for (i, count) in self.iou_histogram.iter().enumerate() {
            let lo = i as f64 / HISTOGRAM_BINS as f64;
            let hi = (i + 1) as f64 / HISTOGRAM_BINS as f64;
            out.push_str(&format!("  [{lo:.1}, {hi:.1}{}  {count}\n", if i + 1 == HISTOGRAM_BINS { "]" } else { ")" }));
        }
        out
    }
}

/// Greedy one-to-one matching by descending IoU (ties: lower gt index, then
/// lower detection index). Only pairs with IoU >= `iou_threshold` and > 0 match.
pub fn greedy_match(gt: &[Rect], dets: &[Rect], iou_threshold: f64) -> Vec<(usize, usize, f64)> {
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for (g, gt_box) in gt.iter().enumerate() {
        for (d, det) in dets.iter().enumerate() {
            let v = iou(gt_box, det);
            if v > 0.0 && v >= iou_threshold {
                pairs.push((g, d, v));
            }
        }
    }
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut gt_used = vec![false; gt.len()];
    let mut det_used = vec![false; dets.len()];
    let mut out = Vec::new();
    for (g, d, v) in pairs {
        if !gt_used[g] && !det_used[d] {
            gt_used[g] = true;
            det_used[d] = true;
            out.push((g, d, v));
        }
    }
    out
}

/// Frames in `dets` that are not in `ds` are ignored.
pub fn localization_diagnostics(dets: &DetectionSet, ds: &Dataset, iou_match: f64) -> Diagnostics {
    let mut diag = Diagnostics { iou_threshold: iou_match, ..Default::default() };
    for frame in &ds.frames {
        let key = frame.key();
        let gt: Vec<Rect> = frame.boxes().collect();
        let det: Vec<Rect> = dets.frames.get(&key).map(|d| d.iter().map(|d| d.bbox).collect()).unwrap_or_default();
        let matched = greedy_match(&gt, &det, iou_match);
        diag.misses += gt.len() - matched.len();
        diag.false_alarms += det.len() - matched.len();
        for (g, d, v) in matched {
            let bin = ((v * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
            diag.iou_histogram[bin] += 1;
            let (da, ga) = (det[d].area(), gt[g].area());
            match da.cmp(&ga) {
                std::cmp::Ordering::Greater => diag.oversize += 1,
                std::cmp::Ordering::Less => diag.undersize += 1,
                std::cmp::Ordering::Equal => diag.exact_size += 1,
            }
            diag.matches.push(LocalizationMatch {
                frame: key.clone(),
                gt_index: g,
                detection_index: d,
                iou: v,
                area_ratio: da as f64 / ga as f64,
            });
        }
    }
    diag
}

/// `(true script, predicted script)` for every ground-truth line matched to a
/// script-labeled detection; `text` detections and unmatched lines are skipped.
pub fn script_pairs(dets: &DetectionSet, ds: &Dataset, iou_match: f64) -> Vec<(Script, Script)> {
    let mut pairs = Vec::new();
    for frame in &ds.frames {
        let Some(frame_dets) = dets.frames.get(&frame.key()) else { continue };
        let labeled: Vec<_> = frame_dets.iter().filter_map(|d| d.label.script().map(|s| (d.bbox, s))).collect();
        let gt: Vec<Rect> = frame.boxes().collect();
        let boxes: Vec<Rect> = labeled.iter().map(|(b, _)| *b).collect();
        let mut matched = greedy_match(&gt, &boxes, iou_match);
        matched.sort_by_key(|m| m.0);
        pairs.extend(matched.into_iter().map(|(g, d, _)| (frame.lines[g].script, labeled[d].1)));
    }
    pairs
}
