//! Writes score tables and a sweep as CSV files plus a plain-text summary.
//!
//! ```bash
//! cargo run --example evaluation_report -- /tmp/report
//! ```

use std::path::PathBuf;

use utiv::evaluation::ScoreTable;
use utiv::experiments::{emit_report, Report, SweepParam, SweepPoint, SweepTable};
use utiv::PrfScore;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "report".into()));

    let mut detection = ScoreTable::new("detection", "Text Detection Results", ["Method"]);
    detection.push(["two-stage"], Some(PrfScore::new(0.86, 0.95)));
    detection.push(["single-shot"], Some(PrfScore::new(0.82, 0.77)));

    let sweep = SweepTable {
        name: "training_lines".into(),
        title: "Scores by training lines".into(),
        points: [(10_000, 0.71), (20_000, 0.80), (40_000, 0.86)]
            .map(|(n, r)| SweepPoint { param: SweepParam::TrainingLines(n), score: PrfScore::new(0.85, r) })
            .to_vec(),
    };
    let report = Report { tables: vec![detection], sweeps: vec![sweep] };
    for path in emit_report(&report, &out)? {
        println!("wrote {}", path.display());
    }
    print!("{}", report.summary());
    Ok(())
}
