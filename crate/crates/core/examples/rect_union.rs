//! Exact union and intersection areas for overlapping boxes, IoU and NMS.
//!
//! ```bash
//! cargo run --example rect_union
//! ```

use utiv::geometry::{iou, nms, region_intersection_area, union_area, Rect, RectRegion};

fn main() {
    let detections = RectRegion::new(vec![Rect::new(0, 0, 100, 20), Rect::new(50, 0, 100, 20), Rect::new(40, 10, 20, 30)]);
    let ground_truth = RectRegion::new(vec![Rect::new(0, 0, 150, 20)]);

    println!("detected union   {}", union_area(&detections));
    println!("sum of areas     {}", detections.rects().iter().map(Rect::area).sum::<u64>());
    println!("ground truth     {}", union_area(&ground_truth));
    println!("intersection     {}", region_intersection_area(&detections, &ground_truth));

    let a = Rect::new(0, 0, 100, 20);
    let b = Rect::new(10, 0, 100, 20);
    println!("iou {a} {b} = {:.4}", iou(&a, &b));

    let scored = [(a, 0.9), (b, 0.8), (Rect::new(300, 40, 80, 16), 0.7)];
    for (r, s) in nms(&scored, 0.5) {
        println!("kept {r} score {s}");
    }
}
