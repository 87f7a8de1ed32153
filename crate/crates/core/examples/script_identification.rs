//! Script identification scores from a confusion matrix, plus matching
//! script-labeled detections to ground-truth lines to build one.
//!
//! ```bash
//! cargo run --example script_identification
//! ```

use utiv::detections::{perturb_ground_truth, Perturbation};
use utiv::evaluation::{class_prf, confusion_matrix, script_pairs, ConfusionMatrix};
use utiv::synthetic::{generate_dataset, SyntheticSpec};
use utiv::{DetectionMode, Label};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = ConfusionMatrix::from_counts([[8763, 386], [551, 6874]]);
    print!("{}", m.to_text());
    for (script, s) in class_prf(&m)? {
        println!("{script:<8} P {:.4} R {:.4} F {:.4}", s.precision, s.recall, s.f_measure);
    }

    // Detections with every fourth English line called Urdu.
    let ds = generate_dataset(&SyntheticSpec::small(4));
    let mut dets = perturb_ground_truth(&ds, Perturbation::Exact, 0, DetectionMode::Hybrid);
    for d in dets.frames.values_mut().flatten().filter(|d| d.label == Label::English).step_by(4) {
        d.label = Label::Urdu;
    }
    let matrix = confusion_matrix(&script_pairs(&dets, &ds, 0.5));
    println!();
    print!("{}", matrix.to_text());
    println!("accuracy {:.4}", matrix.accuracy());
    Ok(())
}
