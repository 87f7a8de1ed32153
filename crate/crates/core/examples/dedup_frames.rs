//! Near-duplicate frame filtering: renders a clip where a ticker changes every
//! ten frames (with slight noise in between) and keeps one frame per change.
//!
//! ```bash
//! cargo run --example dedup_frames
//! ```

use image::{GrayImage, Luma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use utiv::dataset::dedup_frames;

fn ticker_frame(pattern: u64, rng: &mut ChaCha8Rng) -> GrayImage {
    let mut pattern_rng = ChaCha8Rng::seed_from_u64(pattern);
    let blocks: Vec<u8> = (0..48).map(|_| pattern_rng.random_range(0..=255)).collect();
    GrayImage::from_fn(192, 108, |x, y| {
        let base = blocks[(y / 18 * 8 + x / 24) as usize] as i32;
        let noise = rng.random_range(-2..=2);
        Luma([(base + noise).clamp(0, 255) as u8])
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100u64 {
        ticker_frame(i / 10, &mut rng).save(dir.path().join(format!("clip_{i:04}.png")))?;
    }
    let report = dedup_frames(dir.path(), 8)?;
    println!("kept {} dropped {} skipped {}", report.kept.len(), report.dropped.len(), report.skipped.len());
    for p in &report.kept {
        println!("  {}", p.file_name().unwrap().to_string_lossy());
    }
    Ok(())
}
