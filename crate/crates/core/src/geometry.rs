//! Axis-aligned rectangle algebra on integer pixel grids.
//!
//! Rectangles are closed-open pixel intervals `[x, x + width) × [y, y + height)`
//! with the origin at the top-left corner and `y` growing downward. Region areas
//! are exact: unions are measured with a coordinate-compressed sweep line over a
//! coverage segment tree, so no floating point is involved for integer inputs.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("degenerate rectangle {width}x{height} at ({x}, {y}): width and height must be >= 1")]
    Degenerate { x: i64, y: i64, width: i64, height: i64 },
}

/// Axis-aligned integer rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub x: i64,
    pub y: i64,
    pub width: i64,
    pub height: i64,
}

impl Rect {
    /// Builds a rectangle without checking its dimensions.
    pub const fn new(x: i64, y: i64, width: i64, height: i64) -> Self {
        Rect { x, y, width, height }
    }

    pub fn try_new(x: i64, y: i64, width: i64, height: i64) -> Result<Self, GeometryError> {
        if width < 1 || height < 1 {
            return Err(GeometryError::Degenerate { x, y, width, height });
        }
        Ok(Rect { x, y, width, height })
    }

    /// Rectangle spanning `[x0, x1) × [y0, y1)`, or `None` when empty.
    pub fn from_corners(x0: i64, y0: i64, x1: i64, y1: i64) -> Option<Self> {
        (x1 > x0 && y1 > y0).then(|| Rect::new(x0, y0, x1 - x0, y1 - y0))
    }

    pub fn right(&self) -> i64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> i64 {
        self.y + self.height
    }

    pub fn is_valid(&self) -> bool {
        self.width >= 1 && self.height >= 1
    }

    /// Pixel count; zero for degenerate rectangles.
    pub fn area(&self) -> u64 {
        if self.is_valid() {
            self.width as u64 * self.height as u64
        } else {
            0
        }
    }

    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.width as f64 / 2.0,
            self.y as f64 + self.height as f64 / 2.0,
        )
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        Rect::from_corners(
            self.x.max(other.x),
            self.y.max(other.y),
            self.right().min(other.right()),
            self.bottom().min(other.bottom()),
        )
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    /// True when the rectangle lies inside a `width × height` frame.
    pub fn within_frame(&self, width: u32, height: u32) -> bool {
        self.x >= 0 && self.y >= 0 && self.right() <= width as i64 && self.bottom() <= height as i64
    }

    /// Clips to a `width × height` frame; `None` if nothing is left.
    pub fn clip(&self, width: u32, height: u32) -> Option<Rect> {
        self.intersection(&Rect::new(0, 0, width as i64, height as i64))
    }

    pub fn translate(&self, dx: i64, dy: i64) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.width, self.height)
    }

    /// Grows (positive) or shrinks (negative) every side by `amount`.
    pub fn inflate(&self, amount: i64) -> Option<Rect> {
        Rect::from_corners(
            self.x - amount,
            self.y - amount,
            self.right() + amount,
            self.bottom() + amount,
        )
    }

    pub fn to_continuous(&self) -> ContinuousRect {
        ContinuousRect {
            x0: self.x as f64,
            y0: self.y as f64,
            x1: self.right() as f64,
            y1: self.bottom() as f64,
        }
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}x{})", self.x, self.y, self.width, self.height)
    }
}

/// Rectangle with real-valued corners, used where boxes are rescaled without rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl ContinuousRect {
    pub fn scale(&self, sx: f64, sy: f64) -> ContinuousRect {
        ContinuousRect { x0: self.x0 * sx, y0: self.y0 * sy, x1: self.x1 * sx, y1: self.y1 * sy }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0).max(0.0) * (self.y1 - self.y0).max(0.0)
    }

    pub fn intersection(&self, other: &ContinuousRect) -> Option<ContinuousRect> {
        let r = ContinuousRect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        };
        (r.x1 > r.x0 && r.y1 > r.y0).then_some(r)
    }
}

/// A set union of possibly overlapping rectangles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RectRegion {
    rects: Vec<Rect>,
}

impl RectRegion {
    pub fn new(rects: Vec<Rect>) -> Self {
        RectRegion { rects }
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn push(&mut self, rect: Rect) {
        self.rects.push(rect);
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn area(&self) -> u64 {
        union_area(self)
    }

    pub fn intersection_area(&self, other: &RectRegion) -> u64 {
        region_intersection_area(self, other)
    }
}

impl FromIterator<Rect> for RectRegion {
    fn from_iter<I: IntoIterator<Item = Rect>>(iter: I) -> Self {
        RectRegion { rects: iter.into_iter().collect() }
    }
}

impl From<Vec<Rect>> for RectRegion {
    fn from(rects: Vec<Rect>) -> Self {
        RectRegion { rects }
    }
}

pub fn intersect_area(a: &Rect, b: &Rect) -> u64 {
    a.intersection(b).map_or(0, |r| r.area())
}

/// Intersection over union; 0 when both boxes are empty.
pub fn iou(a: &Rect, b: &Rect) -> f64 {
    let inter = intersect_area(a, b);
    let union = a.area() + b.area() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn union_area(region: &RectRegion) -> u64 {
    let boxes: Vec<[i64; 4]> = region
        .rects
        .iter()
        .filter(|r| r.is_valid())
        .map(|r| [r.x, r.y, r.right(), r.bottom()])
        .collect();
    union_measure(&boxes)
}

/// `|(∪a) ∩ (∪b)|`, as the union of all pairwise intersections.
pub fn region_intersection_area(a: &RectRegion, b: &RectRegion) -> u64 {
    let pieces: RectRegion = a
        .rects
        .iter()
        .flat_map(|ra| b.rects.iter().filter_map(move |rb| ra.intersection(rb)))
        .collect();
    union_area(&pieces)
}

pub fn continuous_union_area(rects: &[ContinuousRect]) -> f64 {
    let boxes: Vec<[f64; 4]> = rects
        .iter()
        .filter(|r| r.x1 > r.x0 && r.y1 > r.y0)
        .map(|r| [r.x0, r.y0, r.x1, r.y1])
        .collect();
    union_measure(&boxes)
}

pub fn continuous_region_intersection_area(a: &[ContinuousRect], b: &[ContinuousRect]) -> f64 {
    let pieces: Vec<ContinuousRect> = a
        .iter()
        .flat_map(|ra| b.iter().filter_map(move |rb| ra.intersection(rb)))
        .collect();
    continuous_union_area(&pieces)
}

/// Greedy non-maximum suppression.
///
/// Boxes are visited by descending score (ties keep input order); a box survives
/// when its IoU with every earlier survivor is at most `iou_threshold`.
pub fn nms(boxes: &[(Rect, f64)], iou_threshold: f64) -> Vec<(Rect, f64)> {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&i, &j| boxes[j].1.partial_cmp(&boxes[i].1).unwrap_or(Ordering::Equal));
    let mut kept: Vec<(Rect, f64)> = Vec::new();
    for i in order {
        let (rect, score) = boxes[i];
        if kept.iter().all(|(k, _)| iou(k, &rect) <= iou_threshold) {
            kept.push((rect, score));
        }
    }
    kept
}

/// Coordinate type the sweep can measure.
pub(crate) trait SweepCoord: Copy + PartialOrd {
    type Len: Copy + Default + std::ops::Add<Output = Self::Len> + std::ops::Mul<Output = Self::Len>;
    fn dist(lo: Self, hi: Self) -> Self::Len;
}

impl SweepCoord for i64 {
    type Len = u64;
    fn dist(lo: i64, hi: i64) -> u64 {
        (hi - lo) as u64
    }
}

impl SweepCoord for f64 {
    type Len = f64;
    fn dist(lo: f64, hi: f64) -> f64 {
        hi - lo
    }
}

/// Segment tree over compressed y coordinates tracking covered length.
struct CoverTree<'a, C: SweepCoord> {
    ys: &'a [C],
    count: Vec<u32>,
    covered: Vec<C::Len>,
}

impl<'a, C: SweepCoord> CoverTree<'a, C> {
    fn new(ys: &'a [C]) -> Self {
        let n = ys.len().saturating_sub(1).max(1);
        CoverTree { ys, count: vec![0; 4 * n], covered: vec![C::Len::default(); 4 * n] }
    }

    fn update(&mut self, node: usize, lo: usize, hi: usize, ql: usize, qr: usize, add: bool) {
        if qr <= lo || hi <= ql {
            return;
        }
        if ql <= lo && hi <= qr {
            if add {
                self.count[node] += 1;
            } else {
                self.count[node] -= 1;
            }
        } else {
            let mid = (lo + hi) / 2;
            self.update(2 * node, lo, mid, ql, qr, add);
            self.update(2 * node + 1, mid, hi, ql, qr, add);
        }
        self.covered[node] = if self.count[node] > 0 {
            C::dist(self.ys[lo], self.ys[hi])
        } else if hi - lo == 1 {
            C::Len::default()
        } else {
            self.covered[2 * node] + self.covered[2 * node + 1]
        };
    }
}

fn sort_dedup<C: SweepCoord>(values: &mut Vec<C>) {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    values.dedup_by(|a, b| a == b);
}

fn position<C: SweepCoord>(sorted: &[C], v: C) -> usize {
    sorted.partition_point(|probe| *probe < v)
}

/// Area of the union of `[x0, y0, x1, y1]` boxes (all non-empty).
pub(crate) fn union_measure<C: SweepCoord>(boxes: &[[C; 4]]) -> C::Len {
    if boxes.is_empty() {
        return C::Len::default();
    }
    let mut ys: Vec<C> = boxes.iter().flat_map(|b| [b[1], b[3]]).collect();
    sort_dedup(&mut ys);

    // (x, opening?, y-lo index, y-hi index)
    let mut events: Vec<(C, bool, usize, usize)> = Vec::with_capacity(boxes.len() * 2);
    for b in boxes {
        let (lo, hi) = (position(&ys, b[1]), position(&ys, b[3]));
        events.push((b[0], true, lo, hi));
        events.push((b[2], false, lo, hi));
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));

    let segments = ys.len() - 1;
    let mut tree = CoverTree::new(&ys);
    let mut area = C::Len::default();
    let mut prev_x = events[0].0;
    for (x, opening, lo, hi) in events {
        if x > prev_x {
            area = area + tree.covered[1] * C::dist(prev_x, x);
            prev_x = x;
        }
        tree.update(1, 0, segments, lo, hi, opening);
    }
    area
}
