//! Frame-level train/test split, plain and stratified by channel.
//!
//! ```bash
//! cargo run --example train_test_split
//! ```

use std::collections::BTreeMap;

use utiv::dataset::split_dataset;
use utiv::synthetic::{generate_dataset, ChannelSpec, SyntheticSpec};

fn main() {
    let spec = SyntheticSpec {
        channels: vec![
            ChannelSpec::new("ary", 3, 60, 120, 40),
            ChannelSpec::new("samaa", 4, 50, 110, 45),
            ChannelSpec::new("dunya", 5, 40, 90, 70),
        ],
        ..SyntheticSpec::small(1)
    };
    let ds = generate_dataset(&spec);
    let channel_of: BTreeMap<_, _> = ds.frames.iter().map(|f| (f.key(), f.channel.as_str())).collect();

    for stratify in [false, true] {
        let split = split_dataset(&ds, 0.75, 42, stratify);
        let mut per_channel: BTreeMap<&str, usize> = BTreeMap::new();
        for k in &split.train_frames {
            *per_channel.entry(channel_of[k]).or_default() += 1;
        }
        println!(
            "stratify={stratify}: train {} test {} per-channel train {:?}",
            split.train_frames.len(),
            split.test_frames.len(),
            per_channel
        );
    }
    assert_eq!(split_dataset(&ds, 0.75, 42, true), split_dataset(&ds, 0.75, 42, true));
}
