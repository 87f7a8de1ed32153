//! Per-frame ground-truth XML.
//!
//! ```xml
//! <?xml version="1.0" encoding="UTF-8"?>
//! <frame channel="ary" video="ary_01" number="120" width="900" height="600">
//!   <textline x="10" y="20" width="300" height="40" script="urdu">
//!     <transcription>...</transcription>
//!   </textline>
//! </frame>
//! ```
//!
//! [`write_frame_annotation`] emits the canonical form: fixed element and
//! attribute order, two-space indentation, and a `<transcription>` element on
//! every line even when empty.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use roxmltree::{Document, Node};
use thiserror::Error;

use super::{FrameAnnotation, Script, TextLine};
use crate::geometry::Rect;

const FRAME_ATTRS: [&str; 5] = ["channel", "video", "number", "width", "height"];
const LINE_ATTRS: [&str; 5] = ["x", "y", "width", "height", "script"];

/// Strict parsing rejects unknown elements and attributes; lenient parsing
/// skips them with a warning.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XmlError {
    #[error("{line}:{column}: malformed XML: {message}")]
    Malformed { line: u32, column: u32, message: String },
    #[error("{line}:{column}: unexpected element <{name}>")]
    UnexpectedElement { name: String, line: u32, column: u32 },
    #[error("{line}:{column}: unexpected text `{text}`")]
    UnexpectedText { text: String, line: u32, column: u32 },
    #[error("{line}:{column}: unknown attribute `{name}` on <{element}>")]
    UnknownAttribute { element: String, name: String, line: u32, column: u32 },
    #[error("{line}:{column}: <{element}> is missing required attribute `{attribute}`")]
    MissingAttribute { element: String, attribute: String, line: u32, column: u32 },
    #[error("{line}:{column}: <{element}> attribute `{attribute}`=\"{value}\" is invalid: {reason}")]
    InvalidAttribute { element: String, attribute: String, value: String, reason: String, line: u32, column: u32 },
    #[error("{line}:{column}: unknown script `{value}` (expected `urdu` or `english`)")]
    UnknownScript { value: String, line: u32, column: u32 },
    #[error("{line}:{column}: text line box {rect} has non-positive width or height")]
    DegenerateBox { rect: Rect, line: u32, column: u32 },
    #[error("{line}:{column}: text line box {rect} lies outside the {frame_width}x{frame_height} frame")]
    BoxOutOfBounds { rect: Rect, frame_width: u32, frame_height: u32, line: u32, column: u32 },
}

impl XmlError {
    /// `(line, column)` of the offending construct, 1-based.
    pub fn position(&self) -> (u32, u32) {
        match self {
            XmlError::Malformed { line, column, .. }
            | XmlError::UnexpectedElement { line, column, .. }
            | XmlError::UnexpectedText { line, column, .. }
            | XmlError::UnknownAttribute { line, column, .. }
            | XmlError::MissingAttribute { line, column, .. }
            | XmlError::InvalidAttribute { line, column, .. }
            | XmlError::UnknownScript { line, column, .. }
            | XmlError::DegenerateBox { line, column, .. }
            | XmlError::BoxOutOfBounds { line, column, .. } => (*line, *column),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlWarning {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl fmt::Display for XmlWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFrame {
    pub annotation: FrameAnnotation,
    pub warnings: Vec<XmlWarning>,
}

/// Strict parse.
pub fn parse_frame_annotation(xml_text: &str) -> Result<FrameAnnotation, XmlError> {
    parse_frame_annotation_with(xml_text, ParseMode::Strict).map(|p| p.annotation)
}

pub fn parse_frame_annotation_with(xml_text: &str, mode: ParseMode) -> Result<ParsedFrame, XmlError> {
    let doc = Document::parse(xml_text).map_err(|e| {
        let pos = e.pos();
        XmlError::Malformed { line: pos.row, column: pos.col, message: e.to_string() }
    })?;
    let mut parser = Parser { doc: &doc, mode, warnings: Vec::new() };
    let annotation = parser.frame(doc.root_element())?;
    Ok(ParsedFrame { annotation, warnings: parser.warnings })
}

struct Parser<'d, 'input> {
    doc: &'d Document<'input>,
    mode: ParseMode,
    warnings: Vec<XmlWarning>,
}

impl<'d, 'input> Parser<'d, 'input> {
    fn pos(&self, node: Node) -> (u32, u32) {
        let p = self.doc.text_pos_at(node.range().start);
        (p.row, p.col)
    }

    fn unexpected(&mut self, node: Node, err: XmlError) -> Result<(), XmlError> {
        match self.mode {
            ParseMode::Strict => Err(err),
            ParseMode::Lenient => {
                let (line, column) = self.pos(node);
                let text = err.to_string();
                let detail = text.split_once(": ").map_or(text.as_str(), |(_, rest)| rest);
                self.warnings.push(XmlWarning { line, column, message: format!("ignored {detail}") });
                Ok(())
            }
        }
    }

    fn check_attributes(&mut self, node: Node, known: &[&str]) -> Result<(), XmlError> {
        let (line, column) = self.pos(node);
        for attr in node.attributes() {
            if attr.namespace().is_some() || !known.contains(&attr.name()) {
                let err = XmlError::UnknownAttribute {
                    element: node.tag_name().name().to_string(),
                    name: attr.name().to_string(),
                    line,
                    column,
                };
                self.unexpected(node, err)?;
            }
        }
        Ok(())
    }

    fn required<'a>(&self, node: Node<'a, 'input>, attribute: &str) -> Result<&'a str, XmlError> {
        node.attribute(attribute).ok_or_else(|| {
            let (line, column) = self.pos(node);
            XmlError::MissingAttribute {
                element: node.tag_name().name().to_string(),
                attribute: attribute.to_string(),
                line,
                column,
            }
        })
    }

    fn number<T: FromStr>(&self, node: Node, attribute: &str) -> Result<T, XmlError>
    where
        T::Err: fmt::Display,
    {
        let value = self.required(node, attribute)?;
        value.trim().parse::<T>().map_err(|e| {
            let (line, column) = self.pos(node);
            XmlError::InvalidAttribute {
                element: node.tag_name().name().to_string(),
                attribute: attribute.to_string(),
                value: value.to_string(),
                reason: e.to_string(),
                line,
                column,
            }
        })
    }

    fn stray_content(&mut self, child: Node) -> Result<(), XmlError> {
        let (line, column) = self.pos(child);
        if child.is_element() {
            let name = child.tag_name().name().to_string();
            return self.unexpected(child, XmlError::UnexpectedElement { name, line, column });
        }
        if child.is_text() {
            let text = child.text().unwrap_or_default();
            if !text.trim().is_empty() {
                let text = text.trim().to_string();
                return self.unexpected(child, XmlError::UnexpectedText { text, line, column });
            }
        }
        Ok(())
    }

    fn frame(&mut self, node: Node) -> Result<FrameAnnotation, XmlError> {
        if node.tag_name().name() != "frame" || node.tag_name().namespace().is_some() {
            let (line, column) = self.pos(node);
            return Err(XmlError::UnexpectedElement { name: node.tag_name().name().to_string(), line, column });
        }
        self.check_attributes(node, &FRAME_ATTRS)?;
        let channel = self.required(node, "channel")?.to_string();
        let video_id = self.required(node, "video")?.to_string();
        let frame_number: u64 = self.number(node, "number")?;
        let width: u32 = self.positive(node, "width")?;
        let height: u32 = self.positive(node, "height")?;

        let mut lines = Vec::new();
        for child in node.children() {
            if child.is_element() && child.tag_name().name() == "textline" && child.tag_name().namespace().is_none() {
                lines.push(self.textline(child, width, height)?);
            } else {
                self.stray_content(child)?;
            }
        }
        Ok(FrameAnnotation { channel, video_id, frame_number, width, height, lines })
    }

    fn positive(&self, node: Node, attribute: &str) -> Result<u32, XmlError> {
        let v: u32 = self.number(node, attribute)?;
        if v == 0 {
            let (line, column) = self.pos(node);
            return Err(XmlError::InvalidAttribute {
                element: node.tag_name().name().to_string(),
                attribute: attribute.to_string(),
                value: "0".into(),
                reason: "must be at least 1".into(),
                line,
                column,
            });
        }
        Ok(v)
    }

    fn textline(&mut self, node: Node, frame_width: u32, frame_height: u32) -> Result<TextLine, XmlError> {
        self.check_attributes(node, &LINE_ATTRS)?;
        let (line, column) = self.pos(node);
        let rect = Rect::new(
            self.number(node, "x")?,
            self.number(node, "y")?,
            self.number(node, "width")?,
            self.number(node, "height")?,
        );
        let script_value = self.required(node, "script")?;
        let script = script_value
            .parse::<Script>()
            .map_err(|_| XmlError::UnknownScript { value: script_value.to_string(), line, column })?;
        if !rect.is_valid() {
            return Err(XmlError::DegenerateBox { rect, line, column });
        }
        if !rect.within_frame(frame_width, frame_height) {
            return Err(XmlError::BoxOutOfBounds { rect, frame_width, frame_height, line, column });
        }

        let mut transcription: Option<String> = None;
        for child in node.children() {
            let is_transcription =
                child.is_element() && child.tag_name().name() == "transcription" && child.tag_name().namespace().is_none();
            if is_transcription && transcription.is_none() {
                transcription = Some(self.transcription(child)?);
            } else {
                self.stray_content(child)?;
            }
        }
        Ok(TextLine { bbox: rect, script, transcription: transcription.unwrap_or_default() })
    }

    fn transcription(&mut self, node: Node) -> Result<String, XmlError> {
        self.check_attributes(node, &[])?;
        let mut text = String::new();
        for child in node.children() {
            if child.is_text() {
                text.push_str(child.text().unwrap_or_default());
            } else if child.is_element() {
                let (line, column) = self.pos(child);
                let name = child.tag_name().name().to_string();
                self.unexpected(child, XmlError::UnexpectedElement { name, line, column })?;
            }
        }
        Ok(text)
    }
}

fn escape_text(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

fn escape_attr(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

/// Canonical serialization.
pub fn write_frame_annotation(fa: &FrameAnnotation) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<frame channel=\"");
    escape_attr(&mut out, &fa.channel);
    out.push_str("\" video=\"");
    escape_attr(&mut out, &fa.video_id);
    let _ = write!(out, "\" number=\"{}\" width=\"{}\" height=\"{}\"", fa.frame_number, fa.width, fa.height);
    if fa.lines.is_empty() {
        out.push_str("/>\n");
        return out;
    }
    out.push_str(">\n");
    for line in &fa.lines {
        let r = line.bbox;
        let _ = writeln!(
            out,
            "  <textline x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" script=\"{}\">",
            r.x, r.y, r.width, r.height, line.script
        );
        out.push_str("    <transcription>");
        escape_text(&mut out, &line.transcription);
        out.push_str("</transcription>\n  </textline>\n");
    }
    out.push_str("</frame>\n");
    out
}
