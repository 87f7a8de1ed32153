//! Seeded frame-level train/test partition.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Dataset, FrameKey};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Split {
    pub train_frames: Vec<FrameKey>,
    pub test_frames: Vec<FrameKey>,
    pub seed: u64,
}

/// Partitions whole frames into train and test sets.
///
/// The train set holds `round(train_fraction * n)` frames. With
/// `stratify_by_channel`, each channel contributes its proportional share
/// (largest-remainder apportionment, so channel shares still add up to the
/// global count). Both lists come back in dataset order.
pub fn split_dataset(ds: &Dataset, train_fraction: f64, seed: u64, stratify_by_channel: bool) -> Split {
    assert!(
        train_fraction > 0.0 && train_fraction < 1.0,
        "train_fraction must lie strictly between 0 and 1, got {train_fraction}"
    );
    let n = ds.frames.len();
    let target = (train_fraction * n as f64 + 0.5).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let groups: Vec<Vec<usize>> = if stratify_by_channel {
        let mut by_channel: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, f) in ds.frames.iter().enumerate() {
            by_channel.entry(&f.channel).or_default().push(i);
        }
        by_channel.into_values().collect()
    } else {
        vec![(0..n).collect()]
    };
    let quotas = apportion(&groups.iter().map(Vec::len).collect::<Vec<_>>(), target);

    let mut is_train = vec![false; n];
    for (mut members, quota) in groups.into_iter().zip(quotas) {
        members.shuffle(&mut rng);
        for &i in &members[..quota] {
            is_train[i] = true;
        }
    }
    let (train, test): (Vec<_>, Vec<_>) = ds.frames.iter().zip(is_train).partition(|(_, t)| *t);
    Split {
        train_frames: train.into_iter().map(|(f, _)| f.key()).collect(),
        test_frames: test.into_iter().map(|(f, _)| f.key()).collect(),
        seed,
    }
}

/// Splits `target` across groups proportionally to their sizes.
fn apportion(sizes: &[usize], target: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| s * target / total).collect();
    let mut remainders: Vec<(usize, usize)> = sizes.iter().enumerate().map(|(i, &s)| (s * target % total, i)).collect();
    // largest remainder first, lower index on ties
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut left = target - quotas.iter().sum::<usize>();
    for (_, i) in remainders {
        if left == 0 {
            break;
        }
        if quotas[i] < sizes[i] {
            quotas[i] += 1;
            left -= 1;
        }
    }
    quotas
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FrameAnnotation;

    fn ds(channels: &[(&str, usize)]) -> Dataset {
        let mut frames = Vec::new();
        for (c, n) in channels {
            for i in 0..*n {
                frames.push(FrameAnnotation {
                    channel: c.to_string(),
                    video_id: format!("{c}_v"),
                    frame_number: i as u64,
                    width: 10,
                    height: 10,
                    lines: vec![],
                });
            }
        }
        Dataset::new(frames)
    }

    #[test]
    fn half_split_is_five_five_and_deterministic() {
        let d = ds(&[("a", 10)]);
        let s = split_dataset(&d, 0.5, 42, false);
        assert_eq!((s.train_frames.len(), s.test_frames.len()), (5, 5));
        assert_eq!(s, split_dataset(&d, 0.5, 42, false));
        assert_ne!(s.train_frames, split_dataset(&d, 0.5, 43, false).train_frames);
    }

    #[test]
    fn stratified_shares_follow_channels() {
        let d = ds(&[("a", 30), ("b", 10)]);
        let s = split_dataset(&d, 0.5, 1, true);
        let a = s.train_frames.iter().filter(|k| k.video_id == "a_v").count();
        assert_eq!((a, s.train_frames.len() - a), (15, 5));
    }

    #[test]
    fn apportion_sums_to_target() {
        assert_eq!(apportion(&[3, 3, 3], 4), vec![2, 1, 1]);
        assert_eq!(apportion(&[3206, 2503, 3059, 2424], 8500).iter().sum::<usize>(), 8500);
        assert_eq!(apportion(&[0, 0], 0), vec![0, 0]);
    }
}
