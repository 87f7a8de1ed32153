//! Scores across frame resolutions from 256x144 to 1920x1080, with boxes
//! rescaled per axis and rounded to pixels, or kept real-valued.
//!
//! ```bash
//! cargo run --example resolution_sweep
//! ```

use utiv::detections::{perturb_ground_truth, Perturbation};
use utiv::experiments::{resolution_sweep, Coordinates, SweepDetections, SweepTable, STANDARD_RESOLUTIONS};
use utiv::synthetic::{generate_dataset, SyntheticSpec};
use utiv::DetectionMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = generate_dataset(&SyntheticSpec::small(13));
    let dets = perturb_ground_truth(&ds, Perturbation::Shift(4), 2, DetectionMode::DetectOnly);
    for (name, coordinates) in [("rounded", Coordinates::Rounded), ("continuous", Coordinates::Continuous)] {
        let points = resolution_sweep(&ds, SweepDetections::Rescale(&dets), &STANDARD_RESOLUTIONS, coordinates)?;
        let table = SweepTable { name: name.into(), title: format!("Resolution sweep ({name})"), points };
        print!("{}", table.to_text());
        print!("{}", table.to_csv());
        println!();
    }
    Ok(())
}
