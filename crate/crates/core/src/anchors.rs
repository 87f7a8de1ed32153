//! Text-line anchor boxes: shape generation, tiling, IoU-based assignment and
//! bounding-box regression targets.
//!
//! The default shape set is a 256 px base anchor at scales 1, 2 and 5 crossed
//! with height/width aspect ratios 1/8, 3/16, 1/4, 3/8 and 1/2, which suits wide
//! and short caption lines.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{iou, Rect};

pub const DEFAULT_BASE_SIZE: f64 = 256.0;
pub const DEFAULT_SCALES: [f64; 3] = [1.0, 2.0, 5.0];
pub const DEFAULT_ASPECT_RATIOS: [f64; 5] = [0.125, 0.1875, 0.25, 0.375, 0.50];
pub const DEFAULT_STRIDE: u32 = 16;
pub const DEFAULT_POSITIVE_IOU: f64 = 0.5;
pub const DEFAULT_NEGATIVE_IOU: f64 = 0.3;
/// Largest absolute pixel coordinate `decode_box` accepts by default.
pub const DEFAULT_MAX_EXTENT: i64 = 1 << 16;

#[derive(Debug, Error)]
pub enum AnchorError {
    #[error("invalid anchor configuration: {0}")]
    Config(String),
    #[error("cannot read anchor configuration {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse anchor configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("decoded box {0:?} is not finite")]
    NonFinite([f64; 4]),
    #[error("decoded box ({x0}, {y0})-({x1}, {y1}) exceeds the frame extent limit {limit}")]
    Overflow { x0: f64, y0: f64, x1: f64, y1: f64, limit: i64 },
    #[error("decoded box collapses to zero size")]
    Degenerate,
}

/// How scale and aspect ratio turn the base size into a width and height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnchorConvention {
    /// `width * height = (base * scale)^2`, `height / width = ratio`.
    #[default]
    AreaPreserving,
    /// `width = base * scale`, `height = width * ratio`.
    WidthScaled,
}

impl fmt::Display for AnchorConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnchorConvention::AreaPreserving => "area-preserving",
            AnchorConvention::WidthScaled => "width-scaled",
        })
    }
}

impl FromStr for AnchorConvention {
    type Err = AnchorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "area-preserving" => Ok(AnchorConvention::AreaPreserving),
            "width-scaled" => Ok(AnchorConvention::WidthScaled),
            other => Err(AnchorError::Config(format!("unknown convention `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnchorConfig {
    pub base_size: f64,
    pub scales: Vec<f64>,
    pub aspect_ratios: Vec<f64>,
    pub convention: AnchorConvention,
    pub stride: u32,
    pub clip_to_image: bool,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        AnchorConfig {
            base_size: DEFAULT_BASE_SIZE,
            scales: DEFAULT_SCALES.to_vec(),
            aspect_ratios: DEFAULT_ASPECT_RATIOS.to_vec(),
            convention: AnchorConvention::AreaPreserving,
            stride: DEFAULT_STRIDE,
            clip_to_image: true,
        }
    }
}

impl AnchorConfig {
    /// Parses a `key = value` configuration; missing keys keep their defaults.
    ///
    /// ```toml
    /// base_size = 256
    /// scales = [1.0, 2.0, 5.0]
    /// aspect_ratios = [0.125, 0.1875, 0.25, 0.375, 0.5]
    /// convention = "area-preserving"
    /// stride = 16
    /// clip_to_image = true
    /// ```
    pub fn from_config_str(text: &str) -> Result<Self, AnchorError> {
        let config: AnchorConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, AnchorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| AnchorError::Io { path: path.display().to_string(), source })?;
        Self::from_config_str(&text)
    }

    pub fn to_config_string(&self) -> String {
        toml::to_string(self).expect("anchor config is always serializable")
    }

    pub fn validate(&self) -> Result<(), AnchorError> {
        if !(self.base_size.is_finite() && self.base_size > 0.0) {
            return Err(AnchorError::Config(format!("base_size must be positive, got {}", self.base_size)));
        }
        for (name, values) in [("scales", &self.scales), ("aspect_ratios", &self.aspect_ratios)] {
            if values.is_empty() {
                return Err(AnchorError::Config(format!("{name} must not be empty")));
            }
            if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(AnchorError::Config(format!("{name} must be positive, got {bad}")));
            }
        }
        if self.stride == 0 {
            return Err(AnchorError::Config("stride must be positive".into()));
        }
        Ok(())
    }
}

/// One anchor shape in continuous pixel units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnchorShape {
    pub width: f64,
    pub height: f64,
    pub scale: f64,
    pub aspect_ratio: f64,
}

/// One shape per `(scale, aspect_ratio)` pair, scale-major.
pub fn generate_anchor_shapes(config: &AnchorConfig) -> Result<Vec<AnchorShape>, AnchorError> {
    config.validate()?;
    let mut shapes = Vec::with_capacity(config.scales.len() * config.aspect_ratios.len());
    for &scale in &config.scales {
        let side = config.base_size * scale;
        for &aspect_ratio in &config.aspect_ratios {
            let (width, height) = match config.convention {
                AnchorConvention::AreaPreserving => {
                    let root = aspect_ratio.sqrt();
                    (side / root, side * root)
                }
                AnchorConvention::WidthScaled => (side, side * aspect_ratio),
            };
            shapes.push(AnchorShape { width, height, scale, aspect_ratio });
        }
    }
    Ok(shapes)
}

pub(crate) fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

/// Number of grid cells along one axis.
pub fn grid_cells(extent: u32, stride: u32) -> u32 {
    extent.div_ceil(stride).max(1)
}

/// Centers every shape on each stride cell, row-major then shape order.
///
/// Cell `(i, j)` is centered at `(i + 0.5, j + 0.5) * stride`. With clipping on,
/// anchors are cut to the frame and empty results dropped.
pub fn tile_anchors(shapes: &[AnchorShape], image_width: u32, image_height: u32, config: &AnchorConfig) -> Vec<Rect> {
    let stride = config.stride.max(1);
    let cols = grid_cells(image_width, stride);
    let rows = grid_cells(image_height, stride);
    let mut anchors = Vec::with_capacity((cols * rows) as usize * shapes.len());
    for row in 0..rows {
        let cy = (row as f64 + 0.5) * stride as f64;
        for col in 0..cols {
            let cx = (col as f64 + 0.5) * stride as f64;
            for shape in shapes {
                let x0 = round_half_up(cx - shape.width / 2.0) as i64;
                let x1 = round_half_up(cx + shape.width / 2.0) as i64;
                let y0 = round_half_up(cy - shape.height / 2.0) as i64;
                let y1 = round_half_up(cy + shape.height / 2.0) as i64;
                let Some(rect) = Rect::from_corners(x0, y0, x1, y1) else { continue };
                if config.clip_to_image {
                    if let Some(clipped) = rect.clip(image_width, image_height) {
                        anchors.push(clipped);
                    }
                } else {
                    anchors.push(rect);
                }
            }
        }
    }
    anchors
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorLabel {
    Positive,
    Negative,
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnchorAssignment {
    pub anchor_index: usize,
    pub label: AnchorLabel,
    pub matched_gt: Option<usize>,
    pub iou: f64,
}

/// Labels anchors against ground-truth boxes.
///
/// An anchor is positive when its best IoU reaches `positive_iou`, negative when
/// it stays below `negative_iou`, and ignored in between. Each ground-truth box
/// also claims its highest-IoU anchor (lowest index on ties) as a positive, as
/// long as that IoU is non-zero. An anchor claimed this way is matched to the
/// claiming box it overlaps most (lowest index on ties).
pub fn assign_anchors(anchors: &[Rect], gt: &[Rect], positive_iou: f64, negative_iou: f64) -> Vec<AnchorAssignment> {
    // iou_table[a][g]
    let iou_table: Vec<Vec<f64>> = anchors.iter().map(|a| gt.iter().map(|g| iou(a, g)).collect()).collect();

    let mut out: Vec<AnchorAssignment> = iou_table
        .iter()
        .enumerate()
        .map(|(anchor_index, row)| {
            let best = argmax(row.iter().copied());
            let best_iou = best.map_or(0.0, |(_, v)| v);
            let label = if best.is_some() && best_iou >= positive_iou {
                AnchorLabel::Positive
            } else if best_iou < negative_iou {
                AnchorLabel::Negative
            } else {
                AnchorLabel::Ignore
            };
            AnchorAssignment {
                anchor_index,
                label,
                matched_gt: best.filter(|_| label == AnchorLabel::Positive).map(|(g, _)| g),
                iou: best_iou,
            }
        })
        .collect();

    for g in 0..gt.len() {
        let Some((a, v)) = argmax(iou_table.iter().map(|row| row[g])) else { continue };
        if v <= 0.0 {
            continue;
        }
        let slot = &mut out[a];
        match slot.label {
            AnchorLabel::Positive if slot.iou >= positive_iou => {}
            AnchorLabel::Positive if v <= slot.iou => {}
            _ => {
                slot.label = AnchorLabel::Positive;
                slot.matched_gt = Some(g);
                slot.iou = v;
            }
        }
    }
    out
}

/// Index and value of the first maximum.
fn argmax(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best
}

/// Box regression offsets relative to an anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionTarget {
    pub tx: f64,
    pub ty: f64,
    pub tw: f64,
    pub th: f64,
}

impl RegressionTarget {
    pub fn is_finite(&self) -> bool {
        self.tx.is_finite() && self.ty.is_finite() && self.tw.is_finite() && self.th.is_finite()
    }
}

pub fn encode_box(anchor: &Rect, gt: &Rect) -> RegressionTarget {
    let (acx, acy) = anchor.center();
    let (gcx, gcy) = gt.center();
    let (aw, ah) = (anchor.width as f64, anchor.height as f64);
    RegressionTarget {
        tx: (gcx - acx) / aw,
        ty: (gcy - acy) / ah,
        tw: (gt.width as f64 / aw).ln(),
        th: (gt.height as f64 / ah).ln(),
    }
}

/// Inverse of [`encode_box`] in continuous coordinates, corners rounded half-up.
pub fn decode_box(anchor: &Rect, target: &RegressionTarget) -> Result<Rect, AnchorError> {
    decode_box_within(anchor, target, DEFAULT_MAX_EXTENT)
}

pub fn decode_box_within(anchor: &Rect, target: &RegressionTarget, max_extent: i64) -> Result<Rect, AnchorError> {
    let (acx, acy) = anchor.center();
    let (aw, ah) = (anchor.width as f64, anchor.height as f64);
    let cx = target.tx * aw + acx;
    let cy = target.ty * ah + acy;
    let w = aw * target.tw.exp();
    let h = ah * target.th.exp();
    let corners = [cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0];
    if !target.is_finite() || corners.iter().any(|c| !c.is_finite()) {
        return Err(AnchorError::NonFinite(corners));
    }
    let limit = max_extent as f64;
    if corners.iter().any(|c| c.abs() > limit) {
        let [x0, y0, x1, y1] = corners;
        return Err(AnchorError::Overflow { x0, y0, x1, y1, limit: max_extent });
    }
    let [x0, y0, x1, y1] = corners.map(|c| round_half_up(c) as i64);
    Rect::from_corners(x0, y0, x1, y1).ok_or(AnchorError::Degenerate)
}
