//! Shared fixtures for the benches. Everything is seeded so timings are
//! comparable between runs.

use panoforge::features::{detect_and_describe, DescriptorKind, Described, DetectorConfig};
use panoforge::imagecore::ImageU8;
use panoforge::matching::{match_bruteforce, Match};
use panoforge::synthetic::overlapping_crops;

/// Two RGB crops of one synthetic scene with half-width overlap.
pub fn crop_pair(width: usize, height: usize) -> (ImageU8, ImageU8) {
    let set = overlapping_crops(width, height, 2, 0.5, 17);
    let mut it = set.crops.into_iter();
    (it.next().unwrap(), it.next().unwrap())
}

pub struct FeaturePair {
    pub size: (usize, usize),
    pub a: Described,
    pub b: Described,
    pub matches: Vec<Match>,
}

pub fn feature_pair(width: usize, height: usize, kind: DescriptorKind) -> FeaturePair {
    let (a, b) = crop_pair(width, height);
    let cfg = DetectorConfig::default();
    let da = detect_and_describe(&a.to_gray_u8().to_f32(), &cfg, kind);
    let db = detect_and_describe(&b.to_gray_u8().to_f32(), &cfg, kind);
    let matches = match_bruteforce(&da.descriptors, &db.descriptors).expect("descriptors share a kind");
    FeaturePair {
        size: (a.width(), a.height()),
        a: da,
        b: db,
        matches,
    }
}
