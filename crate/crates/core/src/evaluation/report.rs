//! Score tables as CSV and as aligned plain text.

use std::fmt::Write as _;

use serde::Serialize;

use super::PrfScore;

/// Rounds half away from zero.
pub fn round_to(value: f64, decimals: u32) -> f64 {
    let factor = 10f64.powi(decimals as i32);
    (value * factor).round() / factor
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub labels: Vec<String>,
    pub score: Option<PrfScore>,
}

impl ScoreRow {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>, score: Option<PrfScore>) -> Self {
        ScoreRow { labels: labels.into_iter().map(Into::into).collect(), score }
    }
}

/// A titled table of precision/recall/F rows keyed by one or more label columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreTable {
    pub name: String,
    pub title: String,
    pub label_headers: Vec<String>,
    pub rows: Vec<ScoreRow>,
    /// Decimal places in the text rendering.
    pub decimals: u32,
}

const SCORE_HEADERS: [&str; 3] = ["Precision", "Recall", "F-Measure"];

impl ScoreTable {
    pub fn new<S: Into<String>>(name: impl Into<String>, title: impl Into<String>, label_headers: impl IntoIterator<Item = S>) -> Self {
        ScoreTable {
            name: name.into(),
            title: title.into(),
            label_headers: label_headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            decimals: 2,
        }
    }

    pub fn push<S: Into<String>>(&mut self, labels: impl IntoIterator<Item = S>, score: Option<PrfScore>) {
        self.rows.push(ScoreRow::new(labels, score));
    }

    /// Full-precision values; missing scores are empty cells.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = self
            .label_headers
            .iter()
            .map(|h| h.to_lowercase().replace(' ', "_"))
            .chain(["precision", "recall", "f_measure"].map(String::from))
            .collect();
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut record = self.padded_labels(row);
            match &row.score {
                Some(s) => record.extend([s.precision, s.recall, s.f_measure].map(|v| v.to_string())),
                None => record.extend(["", "", ""].map(String::from)),
            }
            w.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    fn padded_labels(&self, row: &ScoreRow) -> Vec<String> {
        (0..self.label_headers.len()).map(|i| row.labels.get(i).cloned().unwrap_or_default()).collect()
    }

    /// Aligned columns, scores at `decimals` places, `-` for missing scores.
    pub fn to_text(&self) -> String {
        let d = self.decimals as usize;
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| {
                let mut c = self.padded_labels(row);
                match &row.score {
                    Some(s) => c.extend([s.precision, s.recall, s.f_measure].map(|v| format!("{:.d$}", round_to(v, self.decimals)))),
                    None => c.extend(["-", "-", "-"].map(String::from)),
                }
                c
            })
            .collect();
        let header: Vec<String> = self.label_headers.iter().cloned().chain(SCORE_HEADERS.map(String::from)).collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let labels = self.label_headers.len();
        let render = |out: &mut String, row: &[String]| {
            let mut line = String::new();
            for (i, (cell, w)) in row.iter().zip(&widths).enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                let pad = w - cell.chars().count();
                if i < labels {
                    line.push_str(cell);
                    line.extend(std::iter::repeat_n(' ', pad));
                } else {
                    line.extend(std::iter::repeat_n(' ', pad));
                    line.push_str(cell);
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        };
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let rule_len = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        let rule = "-".repeat(rule_len);
        let _ = writeln!(out, "{rule}");
        render(&mut out, &header);
        let _ = writeln!(out, "{rule}");
        for row in &cells {
            render(&mut out, row);
        }
        let _ = writeln!(out, "{rule}");
        out
    }
}
