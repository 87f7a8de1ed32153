//! Writes a seeded synthetic corpus (XML ground truth plus placeholder frame
//! images) and prints its statistics table.
//!
//! ```bash
//! cargo run --example synthetic_corpus -- /tmp/corpus [seed]
//! ```

use std::path::PathBuf;

use utiv::dataset::{dataset_stats, load_dataset};
use utiv::synthetic::{generate_dataset, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let root = PathBuf::from(args.next().unwrap_or_else(|| "synthetic-corpus".into()));
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let ds = generate_dataset(&SyntheticSpec::small(seed));
    ds.write_to(&root)?;
    let reloaded = load_dataset(&root)?;
    assert_eq!(reloaded.frames, ds.frames);

    println!("wrote {} frames to {}", ds.len(), root.display());
    print!("{}", dataset_stats(&reloaded).to_text());
    Ok(())
}
