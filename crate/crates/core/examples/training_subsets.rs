//! Nested, seeded training subsets that reach increasing line budgets, for
//! feeding an external trainer.
//!
//! ```bash
//! cargo run --example training_subsets
//! ```

use utiv::experiments::training_subsets;
use utiv::synthetic::{generate_dataset, ChannelSpec, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec { channels: vec![ChannelSpec::new("ary", 4, 200, 700, 250)], ..SyntheticSpec::small(2) };
    let ds = generate_dataset(&spec);
    let budgets = [100, 250, 500, ds.total_lines()];
    let index = ds.index();
    let subsets = training_subsets(&ds, &budgets, 17)?;
    for (budget, keys) in budgets.iter().zip(&subsets) {
        let lines: usize = keys.iter().map(|k| ds.frames[index[k]].lines.len()).sum();
        println!("budget {budget:>4}: {:>3} frames, {lines:>4} lines", keys.len());
    }
    assert!(subsets.windows(2).all(|w| w[1].starts_with(&w[0])));
    Ok(())
}
