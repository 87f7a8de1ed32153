//! Joint detection and script identification: per-script area scores where a
//! detection only counts against lines of the script it was labeled with.
//!
//! ```bash
//! cargo run --example hybrid_eval
//! ```

use utiv::detections::{perturb_ground_truth, Perturbation};
use utiv::evaluation::{evaluate_hybrid, ScoreTable};
use utiv::synthetic::{generate_dataset, SyntheticSpec};
use utiv::{DetectionMode, Label};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = generate_dataset(&SyntheticSpec::small(8));
    let mut dets = perturb_ground_truth(&ds, Perturbation::Dilate(4), 1, DetectionMode::Hybrid);
    for d in dets.frames.values_mut().flatten().filter(|d| d.label == Label::Urdu).step_by(6) {
        d.label = Label::English;
    }
    let scores = evaluate_hybrid(&dets, &ds)?;
    let mut table = ScoreTable::new("hybrid", "Hybrid detector and script identifier", ["Method", "Script"]);
    for s in &scores.per_script {
        table.push(["dilate 4, relabeled".to_string(), format!("{:?}", s.script)], s.score);
    }
    table.push(["dilate 4, relabeled".to_string(), "Combined".to_string()], Some(scores.combined));
    print!("{}", table.to_text());
    Ok(())
}
