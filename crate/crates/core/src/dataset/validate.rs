//! Consistency checks over an in-memory dataset.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{Dataset, FrameKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueKind {
    OutOfBounds,
    ZeroArea,
    DuplicateKey,
    EmptyTranscription,
    DuplicateBox,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub kind: IssueKind,
    pub frame: FrameKey,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match self.line {
            Some(line) => write!(f, "{level}: {} line {line}: {}", self.frame, self.message),
            None => write!(f, "{level}: {}: {}", self.frame, self.message),
        }
    }
}

/// Reports out-of-bounds and zero-area boxes, repeated frame keys, empty
/// transcriptions and repeated boxes within a frame.
pub fn validate_dataset(ds: &Dataset) -> Vec<Issue> {
    let mut issues = Vec::new();
    let mut seen: BTreeMap<FrameKey, usize> = BTreeMap::new();
    for frame in &ds.frames {
        let key = frame.key();
        let count = seen.entry(key.clone()).or_insert(0);
        *count += 1;
        if *count == 2 {
            issues.push(Issue {
                severity: Severity::Error,
                kind: IssueKind::DuplicateKey,
                frame: key.clone(),
                line: None,
                message: "frame key appears more than once".into(),
            });
        }
        for (i, line) in frame.lines.iter().enumerate() {
            let mut issue = |severity, kind, message: String| {
                issues.push(Issue { severity, kind, frame: key.clone(), line: Some(i), message })
            };
            if !line.bbox.is_valid() {
                issue(Severity::Error, IssueKind::ZeroArea, format!("box {} has zero area", line.bbox));
            } else if !line.bbox.within_frame(frame.width, frame.height) {
                issue(
                    Severity::Error,
                    IssueKind::OutOfBounds,
                    format!("box {} exceeds the {}x{} frame", line.bbox, frame.width, frame.height),
                );
            }
            if line.transcription.trim().is_empty() {
                issue(Severity::Warning, IssueKind::EmptyTranscription, "empty transcription".into());
            }
            if let Some(j) = frame.lines[..i].iter().position(|other| other.bbox == line.bbox) {
                issue(Severity::Warning, IssueKind::DuplicateBox, format!("box {} repeats line {j}", line.bbox));
            }
        }
    }
    issues
}
