//! Reads and writes the per-frame XML ground truth, in strict and lenient modes.
//!
//! ```bash
//! cargo run --example xml_annotations
//! ```

use utiv::dataset::{parse_frame_annotation, parse_frame_annotation_with, write_frame_annotation, ParseMode};
use utiv::{FrameAnnotation, Rect, Script, TextLine};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let frame = FrameAnnotation {
        channel: "dunya".into(),
        video_id: "dunya_03".into(),
        frame_number: 1450,
        width: 900,
        height: 600,
        lines: vec![
            TextLine::new(Rect::new(12, 520, 640, 44), Script::Urdu, "بریکنگ نیوز"),
            TextLine::new(Rect::new(700, 18, 170, 26), Script::English, "LIVE & <exclusive>"),
        ],
    };
    let xml = write_frame_annotation(&frame);
    print!("{xml}");
    assert_eq!(parse_frame_annotation(&xml)?, frame);

    let extended = xml.replacen("  <textline ", "  <note>reviewed</note>\n  <textline ", 1);
    match parse_frame_annotation(&extended) {
        Ok(_) => println!("strict: accepted"),
        Err(e) => println!("strict: {e}"),
    }
    let lenient = parse_frame_annotation_with(&extended, ParseMode::Lenient)?;
    for w in &lenient.warnings {
        println!("lenient warning: {w}");
    }
    println!("lenient kept {} lines", lenient.annotation.lines.len());
    Ok(())
}
