//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use utiv::detections::DetectionErrorKind;
use utiv::Rect;

/// Bit-per-pixel mask of a `width x height` canvas, one `u64` word per 64 columns.
#[derive(Clone)]
pub struct Mask {
    width: usize,
    height: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Mask {
    /// Pixel-at-a-time reference for `fill`.
    pub fn set_pixel(&mut self, x: usize, y: usize) {
        self.bits[y * self.words + x / 64] |= 1 << (x % 64);
    }

    pub fn new(width: usize, height: usize) -> Self {
        let words = width.div_ceil(64).max(1);
        Mask { width, height, words, bits: vec![0; words * height] }
    }

    /// Sets every pixel of `r` that falls on the canvas.
    pub fn fill(&mut self, r: &Rect) {
        let x0 = r.x.max(0) as usize;
        let x1 = (r.right().max(0) as usize).min(self.width);
        let y0 = r.y.max(0) as usize;
        let y1 = (r.bottom().max(0) as usize).min(self.height);
        if x0 >= x1 || y0 >= y1 {
            return;
        }
        // bits x0..x1 of each row, set a word at a time
        let (first, last) = (x0 / 64, (x1 - 1) / 64);
        let span = |w: usize| {
            let lo = if w == first { x0 % 64 } else { 0 };
            let hi = if w == last { (x1 - 1) % 64 } else { 63 };
            (u64::MAX >> (63 - hi)) & (u64::MAX << lo)
        };
        for y in y0..y1 {
            let row = &mut self.bits[y * self.words..(y + 1) * self.words];
            for (w, word) in row.iter_mut().enumerate().take(last + 1).skip(first) {
                *word |= span(w);
            }
        }
    }

    pub fn from_rects(rects: &[Rect], width: usize, height: usize) -> Self {
        let mut m = Mask::new(width, height);
        for r in rects {
            m.fill(r);
        }
        m
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn and_count(&self, other: &Mask) -> u64 {
        self.bits.iter().zip(&other.bits).map(|(a, b)| (a & b).count_ones() as u64).sum()
    }
}

/// Canvas large enough to hold every rect.
pub fn extent(rects: &[Rect]) -> (usize, usize) {
    let w = rects.iter().map(|r| r.right()).max().unwrap_or(0).max(1);
    let h = rects.iter().map(|r| r.bottom()).max().unwrap_or(0).max(1);
    (w as usize, h as usize)
}

pub fn raster_union(rects: &[Rect]) -> u64 {
    let (w, h) = extent(rects);
    Mask::from_rects(rects, w, h).count()
}

pub fn raster_intersection(a: &[Rect], b: &[Rect]) -> u64 {
    let all: Vec<Rect> = a.iter().chain(b).copied().collect();
    let (w, h) = extent(&all);
    Mask::from_rects(a, w, h).and_count(&Mask::from_rects(b, w, h))
}

/// A box fully inside `[0, max_coord)` with sides up to `max_side`.
pub fn random_rect(rng: &mut ChaCha8Rng, max_coord: i64, max_side: i64) -> Rect {
    let width = rng.random_range(1..=max_side.min(max_coord));
    let height = rng.random_range(1..=max_side.min(max_coord));
    let x = rng.random_range(0..=max_coord - width);
    let y = rng.random_range(0..=max_coord - height);
    Rect::new(x, y, width, height)
}

pub fn random_rects(rng: &mut ChaCha8Rng, n: usize, max_coord: i64, max_side: i64) -> Vec<Rect> {
    (0..n).map(|_| random_rect(rng, max_coord, max_side)).collect()
}

/// IoU from inclusion-exclusion on integer areas.
pub fn naive_iou(a: &Rect, b: &Rect) -> f64 {
    let iw = (a.right().min(b.right()) - a.x.max(b.x)).max(0);
    let ih = (a.bottom().min(b.bottom()) - a.y.max(b.y)).max(0);
    let inter = (iw * ih) as u64;
    let union = a.area() + b.area() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleLabel {
    Positive,
    Negative,
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleAssignment {
    pub label: OracleLabel,
    pub matched_gt: Option<usize>,
    pub iou: f64,
}

/// Anchor labeling from a full IoU table.
///
/// Threshold rule on each anchor's best IoU (first gt on ties), then every gt
/// claims its first best anchor when that IoU is positive. A claimed anchor that
/// was not already positive by threshold takes the claiming gt with the highest
/// IoU (first on ties).
pub fn oracle_assign(anchors: &[Rect], gt: &[Rect], pos: f64, neg: f64) -> Vec<OracleAssignment> {
    let table: Vec<Vec<f64>> = anchors.iter().map(|a| gt.iter().map(|g| naive_iou(a, g)).collect()).collect();
    let mut out: Vec<OracleAssignment> = table
        .iter()
        .map(|row| {
            let mut best: Option<(usize, f64)> = None;
            for (g, &v) in row.iter().enumerate() {
                if best.is_none() || v > best.unwrap().1 {
                    best = Some((g, v));
                }
            }
            let v = best.map_or(0.0, |b| b.1);
            if best.is_some() && v >= pos {
                OracleAssignment { label: OracleLabel::Positive, matched_gt: best.map(|b| b.0), iou: v }
            } else if v < neg {
                OracleAssignment { label: OracleLabel::Negative, matched_gt: None, iou: v }
            } else {
                OracleAssignment { label: OracleLabel::Ignore, matched_gt: None, iou: v }
            }
        })
        .collect();

    let mut claims: Vec<Vec<(usize, f64)>> = vec![Vec::new(); anchors.len()];
    for g in 0..gt.len() {
        let mut best: Option<(usize, f64)> = None;
        for (a, row) in table.iter().enumerate() {
            if best.is_none() || row[g] > best.unwrap().1 {
                best = Some((a, row[g]));
            }
        }
        if let Some((a, v)) = best {
            if v > 0.0 {
                claims[a].push((g, v));
            }
        }
    }
    for (a, c) in claims.iter().enumerate() {
        if c.is_empty() || (out[a].label == OracleLabel::Positive && out[a].iou >= pos) {
            continue;
        }
        let mut winner = c[0];
        for &(g, v) in &c[1..] {
            if v > winner.1 {
                winner = (g, v);
            }
        }
        out[a] = OracleAssignment { label: OracleLabel::Positive, matched_gt: Some(winner.0), iou: winner.1 };
    }
    out
}

/// Largest number of one-to-one gt/detection pairs with IoU >= threshold (and
/// > 0), found by trying every assignment.
pub fn exhaustive_match_count(gt: &[Rect], dets: &[Rect], threshold: f64) -> usize {
    fn go(g: usize, gt: &[Rect], dets: &[Rect], used: &mut Vec<bool>, threshold: f64) -> usize {
        if g == gt.len() {
            return 0;
        }
        let mut best = go(g + 1, gt, dets, used, threshold);
        for d in 0..dets.len() {
            let v = naive_iou(&gt[g], &dets[d]);
            if !used[d] && v > 0.0 && v >= threshold {
                used[d] = true;
                best = best.max(1 + go(g + 1, gt, dets, used, threshold));
                used[d] = false;
            }
        }
        best
    }
    go(0, gt, dets, &mut vec![false; dets.len()], threshold)
}

/// Four channels with the four news channel rows. Their frame counts sum to
/// 11,192, eleven short of the manifest total.
pub fn news_channel_rows(seed: u64) -> utiv::synthetic::SyntheticSpec {
    use utiv::synthetic::{ChannelSpec, SyntheticSpec};
    SyntheticSpec {
        channels: vec![
            ChannelSpec::new("Ary News", 7, 3206, 10250, 3605),
            ChannelSpec::new("Samaa News", 13, 2503, 10961, 4411),
            ChannelSpec::new("Dunya News", 16, 3059, 10723, 8861),
            ChannelSpec::new("Express News", 10, 2424, 8536, 6755),
        ],
        ..SyntheticSpec::small(seed)
    }
}

/// The channel rows with the eleven unaccounted frames added to the first
/// channel, so every total matches: 46 videos, 11,203 frames, 40,470 Urdu and
/// 23,632 English lines.
pub fn news_channel_totals(seed: u64) -> utiv::synthetic::SyntheticSpec {
    let mut spec = news_channel_rows(seed);
    spec.channels[0].frames += 11;
    spec
}

/// A `192x108` gray frame of coarse random blocks chosen by `pattern`, with
/// per-pixel noise of +/-2 levels from `noise`.
pub fn ticker_frame(pattern: u64, noise: &mut ChaCha8Rng) -> image::GrayImage {
    use rand::SeedableRng;
    let mut pattern_rng = ChaCha8Rng::seed_from_u64(pattern);
    let blocks: Vec<u8> = (0..48).map(|_| pattern_rng.random_range(0..=255)).collect();
    image::GrayImage::from_fn(192, 108, |x, y| {
        let base = blocks[(y / 18 * 8 + x / 24) as usize] as i32;
        image::Luma([(base + noise.random_range(-2..=2)).clamp(0, 255) as u8])
    })
}

/// One malformed record per documented failure, with the expected error class.
pub const MALFORMED: [(&str, &str, DetectionErrorKind); 10] = [
    ("too few fields", "ary_01 10 text 0.9 1 2 30", DetectionErrorKind::FieldCount),
    ("too many fields", "ary_01 10 text 0.9 1 2 30 40 50", DetectionErrorKind::FieldCount),
    ("double space", "ary_01 10  text 0.9 1 2 30 40", DetectionErrorKind::FieldCount),
    ("fractional frame number", "ary_01 10.5 text 0.9 1 2 30 40", DetectionErrorKind::InvalidNumber),
    ("non-numeric score", "ary_01 10 text high 1 2 30 40", DetectionErrorKind::InvalidNumber),
    ("unknown label", "ary_01 10 hindi 0.9 1 2 30 40", DetectionErrorKind::UnknownLabel),
    ("score above one", "ary_01 10 text 1.5 1 2 30 40", DetectionErrorKind::ScoreOutOfRange),
    ("NaN score", "ary_01 10 text NaN 1 2 30 40", DetectionErrorKind::ScoreOutOfRange),
    ("zero width", "ary_01 10 text 0.9 1 2 0 40", DetectionErrorKind::DegenerateBox),
    ("mixed modes", "ary_01 10 text 0.9 1 2 30 40\nary_01 10 urdu 0.9 5 6 30 40", DetectionErrorKind::MixedModes),
];
