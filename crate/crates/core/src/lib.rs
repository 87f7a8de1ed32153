//! Toolkit for caption-text detection datasets in video frames.
//!
//! * [`geometry`]: exact rectangle areas, unions, IoU and NMS.
//! * [`anchors`]: text-line anchor shapes, tiling, assignment and box regression.
//! * [`dataset`]: per-frame XML ground truth, corpus loading, statistics,
//!   splitting, near-duplicate filtering and validation.
//! * [`detections`]: detection files and ground-truth perturbations.
//! * [`evaluation`]: area-based precision/recall/F, hybrid per-script scores,
//!   script-identification confusion matrices and localization diagnostics.
//! * [`experiments`]: resolution sweeps, training subsets and report files.
//! * [`service`]: HTTP backend for the annotation tool.
//! * [`cli`]: the `utiv` command line.

pub mod anchors;
pub mod cli;
pub mod dataset;
pub mod detections;
pub mod evaluation;
pub mod experiments;
pub mod geometry;
pub mod service;
pub mod synthetic;

pub use dataset::{Dataset, FrameAnnotation, FrameKey, Script, TextLine};
pub use detections::{Detection, DetectionMode, DetectionSet, Label};
pub use evaluation::{AreaTally, PrfScore};
pub use geometry::{Rect, RectRegion};
