//! Per-channel corpus statistics: videos, labeled frames, Urdu and English lines.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::{Dataset, Script};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ChannelStats {
    pub channel: String,
    pub videos: usize,
    pub frames: usize,
    pub urdu_lines: usize,
    pub english_lines: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DatasetStats {
    pub channels: Vec<ChannelStats>,
    pub total: ChannelStats,
}

pub fn dataset_stats(ds: &Dataset) -> DatasetStats {
    let mut videos: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut per_channel: BTreeMap<&str, ChannelStats> = BTreeMap::new();
    for frame in &ds.frames {
        videos.entry(&frame.channel).or_default().insert(&frame.video_id);
        let entry = per_channel
            .entry(&frame.channel)
            .or_insert_with(|| ChannelStats { channel: frame.channel.clone(), ..Default::default() });
        entry.frames += 1;
        entry.urdu_lines += frame.line_count(Script::Urdu);
        entry.english_lines += frame.line_count(Script::English);
    }
    let channels: Vec<ChannelStats> = per_channel
        .into_iter()
        .map(|(name, mut stats)| {
            stats.videos = videos[name].len();
            stats
        })
        .collect();
    let total = channels.iter().fold(ChannelStats { channel: "Total".into(), ..Default::default() }, |mut acc, c| {
        acc.videos += c.videos;
        acc.frames += c.frames;
        acc.urdu_lines += c.urdu_lines;
        acc.english_lines += c.english_lines;
        acc
    });
    DatasetStats { channels, total }
}

const HEADER: [&str; 6] = ["S#", "Channel", "Videos", "Labeled Images", "Urdu Lines", "English Lines"];

impl DatasetStats {
    fn rows(&self) -> Vec<[String; 6]> {
        let mut rows: Vec<[String; 6]> = self
            .channels
            .iter()
            .enumerate()
            .map(|(i, c)| row((i + 1).to_string(), c))
            .collect();
        rows.push(row(String::new(), &self.total));
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER).expect("in-memory write");
        for r in self.rows() {
            w.write_record(&r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn to_text(&self) -> String {
        let rows = self.rows();
        let mut widths = HEADER.map(|h| h.chars().count());
        for r in &rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[String]| {
            for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
                if i > 0 {
                    out.push_str("  ");
                }
                if i < 2 {
                    let _ = write!(out, "{cell:<w$}");
                } else {
                    let _ = write!(out, "{cell:>w$}");
                }
            }
            out.push('\n');
        };
        line(&mut out, &HEADER.map(String::from));
        for r in &rows {
            line(&mut out, r);
        }
        out
    }
}

fn row(serial: String, c: &ChannelStats) -> [String; 6] {
    [
        serial,
        c.channel.clone(),
        c.videos.to_string(),
        c.frames.to_string(),
        c.urdu_lines.to_string(),
        c.english_lines.to_string(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FrameAnnotation, TextLine};
    use crate::geometry::Rect;

    fn frame(channel: &str, video: &str, n: u64, urdu: usize, english: usize) -> FrameAnnotation {
        let mut lines = Vec::new();
        for i in 0..urdu + english {
            let script = if i < urdu { Script::Urdu } else { Script::English };
            lines.push(TextLine::new(Rect::new(0, i as i64 * 10, 50, 8), script, "t"));
        }
        FrameAnnotation { channel: channel.into(), video_id: video.into(), frame_number: n, width: 100, height: 100, lines }
    }

    #[test]
    fn empty_dataset_is_all_zero() {
        let s = dataset_stats(&Dataset::default());
        assert!(s.channels.is_empty());
        assert_eq!((s.total.videos, s.total.frames, s.total.urdu_lines, s.total.english_lines), (0, 0, 0, 0));
        assert_eq!(s.to_csv(), "S#,Channel,Videos,Labeled Images,Urdu Lines,English Lines\n,Total,0,0,0,0\n");
    }

    #[test]
    fn counts_per_channel() {
        let ds = Dataset::new(vec![
            frame("a", "a1", 1, 2, 1),
            frame("a", "a1", 2, 1, 0),
            frame("a", "a2", 1, 0, 3),
            frame("b", "b1", 9, 4, 4),
        ]);
        let s = dataset_stats(&ds);
        assert_eq!(s.channels[0], ChannelStats { channel: "a".into(), videos: 2, frames: 3, urdu_lines: 3, english_lines: 4 });
        assert_eq!(s.channels[1], ChannelStats { channel: "b".into(), videos: 1, frames: 1, urdu_lines: 4, english_lines: 4 });
        assert_eq!(s.total, ChannelStats { channel: "Total".into(), videos: 3, frames: 4, urdu_lines: 7, english_lines: 8 });
        let text = s.to_text();
        assert!(text.lines().next().unwrap().starts_with("S#  Channel  Videos"));
        assert_eq!(text.lines().count(), 4);
    }
}
