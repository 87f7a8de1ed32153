//! Box-level diagnostics: one-to-one matching, IoU histogram, misses, false
//! alarms and whether matched boxes are larger or smaller than the text.
//!
//! ```bash
//! cargo run --example localization_diagnostics
//! ```

use utiv::detections::{perturb_ground_truth, Perturbation};
use utiv::evaluation::localization_diagnostics;
use utiv::synthetic::{generate_dataset, SyntheticSpec};
use utiv::DetectionMode;

fn main() {
    let ds = generate_dataset(&SyntheticSpec::small(21));
    for (name, p) in [("dilate 5", Perturbation::Dilate(5)), ("erode 2", Perturbation::Erode(2)), ("drop 0.3", Perturbation::Drop(0.3))] {
        let dets = perturb_ground_truth(&ds, p, 9, DetectionMode::DetectOnly);
        println!("== {name}");
        print!("{}", localization_diagnostics(&dets, &ds, 0.5).to_text());
    }
}
