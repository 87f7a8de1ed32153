//! Text-line anchors: the 15 default shapes, tiling on a frame, IoU-based
//! labeling of anchors against ground truth and regression round trips.
//!
//! ```bash
//! cargo run --example anchor_shapes
//! ```

use utiv::anchors::{
    assign_anchors, decode_box, encode_box, generate_anchor_shapes, tile_anchors, AnchorConfig, AnchorConvention,
    AnchorLabel, DEFAULT_NEGATIVE_IOU, DEFAULT_POSITIVE_IOU,
};
use utiv::Rect;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for convention in [AnchorConvention::AreaPreserving, AnchorConvention::WidthScaled] {
        let config = AnchorConfig { convention, ..AnchorConfig::default() };
        let shapes = generate_anchor_shapes(&config)?;
        println!("{convention}: {} shapes", shapes.len());
        for s in shapes.iter().take(5) {
            println!("  scale {} ratio {:<6} -> {:.1} x {:.1}", s.scale, s.aspect_ratio, s.width, s.height);
        }
    }

    let config = AnchorConfig::default();
    let shapes = generate_anchor_shapes(&config)?;
    let anchors = tile_anchors(&shapes, 900, 600, &config);
    println!("900x600 frame: {} anchors", anchors.len());

    let gt = [Rect::new(40, 520, 600, 48), Rect::new(700, 20, 160, 30)];
    let assignment = assign_anchors(&anchors, &gt, DEFAULT_POSITIVE_IOU, DEFAULT_NEGATIVE_IOU);
    let count = |label| assignment.iter().filter(|a| a.label == label).count();
    println!(
        "positive {} negative {} ignore {}",
        count(AnchorLabel::Positive),
        count(AnchorLabel::Negative),
        count(AnchorLabel::Ignore)
    );

    if let Some(best) = assignment.iter().filter(|a| a.matched_gt == Some(0)).max_by(|a, b| a.iou.total_cmp(&b.iou)) {
        let anchor = anchors[best.anchor_index];
        let target = encode_box(&anchor, &gt[0]);
        println!("anchor {anchor} iou {:.3}", best.iou);
        println!("target tx {:.4} ty {:.4} tw {:.4} th {:.4}", target.tx, target.ty, target.tw, target.th);
        println!("decoded {}", decode_box(&anchor, &target)?);
    }
    Ok(())
}
