//! Near-duplicate frame filtering with a 64-bit difference hash.

use std::path::{Path, PathBuf};

use image::imageops::FilterType;
use image::DynamicImage;

use super::{DatasetError, IMAGE_EXTENSIONS};

/// 64-bit dHash: grayscale, shrink to 9x8, one bit per horizontally adjacent
/// pair (set when the left pixel is brighter).
pub fn difference_hash(image: &DynamicImage) -> u64 {
    let small = image.grayscale().resize_exact(9, 8, FilterType::Triangle).to_luma8();
    let mut hash = 0u64;
    for y in 0..8 {
        for x in 0..8 {
            hash <<= 1;
            if small.get_pixel(x, y)[0] > small.get_pixel(x + 1, y)[0] {
                hash |= 1;
            }
        }
    }
    hash
}

pub fn hamming_distance(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DedupReport {
    pub kept: Vec<PathBuf>,
    pub dropped: Vec<PathBuf>,
    /// Files that could not be decoded.
    pub skipped: Vec<PathBuf>,
}

/// Scans image files in name order and keeps a frame only when its hash is
/// more than `hamming_threshold` bits away from the last kept frame.
pub fn dedup_frames(frame_dir: &Path, hamming_threshold: u32) -> Result<DedupReport, DatasetError> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(frame_dir).map_err(|e| DatasetError::io(frame_dir, e))? {
        let path = entry.map_err(|e| DatasetError::io(frame_dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if is_image && path.is_file() {
            files.push(path);
        }
    }
    files.sort();

    let mut report = DedupReport::default();
    let mut last_kept: Option<u64> = None;
    for path in files {
        let image = match image::open(&path) {
            Ok(img) => img,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                report.skipped.push(path);
                continue;
            }
        };
        let hash = difference_hash(&image);
        match last_kept {
            Some(prev) if hamming_distance(prev, hash) <= hamming_threshold => report.dropped.push(path),
            _ => {
                last_kept = Some(hash);
                report.kept.push(path);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{GrayImage, Luma};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(64, 48, |_, _| Luma([rng.random()]))
    }

    #[test]
    fn identical_frames_collapse_at_zero() {
        let dir = tempfile::tempdir().unwrap();
        let img = noise(1);
        img.save(dir.path().join("f_0001.png")).unwrap();
        img.save(dir.path().join("f_0002.png")).unwrap();
        let r = dedup_frames(dir.path(), 0).unwrap();
        assert_eq!(r.kept, vec![dir.path().join("f_0001.png")]);
        assert_eq!(r.dropped, vec![dir.path().join("f_0002.png")]);
    }

    #[test]
    fn distinct_noise_frames_are_all_kept() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..6 {
            noise(100 + i).save(dir.path().join(format!("f_{i:04}.png"))).unwrap();
        }
        assert_eq!(dedup_frames(dir.path(), 0).unwrap().kept.len(), 6);
    }

    #[test]
    fn undecodable_file_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.png"), b"not a png").unwrap();
        noise(5).save(dir.path().join("b.png")).unwrap();
        std::fs::write(dir.path().join("notes.txt"), b"ignored").unwrap();
        let r = dedup_frames(dir.path(), 0).unwrap();
        assert_eq!(r.skipped, vec![dir.path().join("a.png")]);
        assert_eq!(r.kept, vec![dir.path().join("b.png")]);
    }

    #[test]
    fn hash_of_flat_image_is_zero() {
        let flat = DynamicImage::ImageLuma8(GrayImage::from_pixel(20, 20, Luma([77])));
        assert_eq!(difference_hash(&flat), 0);
        assert_eq!(hamming_distance(0b1011, 0b0001), 2);
    }
}
