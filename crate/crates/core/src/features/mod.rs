//! Keypoint detection (multi-scale FAST with Harris ranking and
//! intensity-centroid orientation) and binary description (steered BRIEF,
//! FREAK).

mod brief;
pub mod container;
mod fast;
pub mod freak;
mod freak_pairs;
mod orb;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::imagecore::{gaussian_blur, IntegralImage, ImageF32, Pyramid};

pub use orb::{detect_orb, detect_with, orientation, DetectorConfig, ORIENTATION_RADIUS};

/// Keypoints closer than this to any border (level-0 pixels, and level
/// pixels on their own octave) cannot be described.
pub const EDGE_MARGIN: usize = 32;

/// σ of the pre-smoothing applied before BRIEF comparisons.
pub const BRIEF_SMOOTHING_SIGMA: f32 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    /// Level-0 subpixel position.
    pub x: f32,
    pub y: f32,
    pub octave: u32,
    /// Orientation in radians, `[0, 2π)`.
    pub angle: f32,
    pub response: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DescriptorKind {
    Brief,
    Freak,
}

impl DescriptorKind {
    pub fn bits(self) -> usize {
        match self {
            DescriptorKind::Brief => 256,
            DescriptorKind::Freak => 512,
        }
    }

    pub fn from_bits(bits: usize) -> Option<Self> {
        match bits {
            256 => Some(DescriptorKind::Brief),
            512 => Some(DescriptorKind::Freak),
            _ => None,
        }
    }
}

/// Packed bitstring; bit `i` lives in byte `i / 8` at position `i % 8`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryDescriptor {
    bits: Vec<u8>,
}

impl BinaryDescriptor {
    pub fn zeros(kind: DescriptorKind) -> Self {
        Self {
            bits: vec![0; kind.bits() / 8],
        }
    }

    /// Fails unless `bytes` is exactly 32 or 64 bytes long.
    pub fn from_bytes(bytes: Vec<u8>) -> Option<Self> {
        DescriptorKind::from_bits(bytes.len() * 8)?;
        Some(Self { bits: bytes })
    }

    pub fn len_bits(&self) -> usize {
        self.bits.len() * 8
    }

    pub fn kind(&self) -> DescriptorKind {
        DescriptorKind::from_bits(self.len_bits()).expect("length checked at construction")
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i / 8] >> (i % 8) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, value: bool) {
        if value {
            self.bits[i / 8] |= 1 << (i % 8);
        } else {
            self.bits[i / 8] &= !(1 << (i % 8));
        }
    }

    /// Hamming distance; descriptors must have the same length.
    #[inline]
    pub fn hamming(&self, other: &BinaryDescriptor) -> u32 {
        debug_assert_eq!(self.bits.len(), other.bits.len());
        self.bits
            .chunks_exact(8)
            .zip(other.bits.chunks_exact(8))
            .map(|(a, b)| {
                let a = u64::from_le_bytes(a.try_into().unwrap());
                let b = u64::from_le_bytes(b.try_into().unwrap());
                (a ^ b).count_ones()
            })
            .sum()
    }
}

/// Result of describing a keypoint list: descriptors for the kept
/// keypoints, in input order, plus the input indices that were dropped.
#[derive(Debug, Clone, Default)]
pub struct Described {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<BinaryDescriptor>,
    /// Input index of each kept keypoint.
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
}

pub fn describe_brief(img: &ImageF32, kps: &[Keypoint]) -> Described {
    describe(img, kps, DescriptorKind::Brief, DetectorConfig::default().scale_factor)
}

pub fn describe_freak(img: &ImageF32, kps: &[Keypoint]) -> Described {
    describe(img, kps, DescriptorKind::Freak, DetectorConfig::default().scale_factor)
}

/// Describes each keypoint on its own pyramid octave.
pub fn describe(img: &ImageF32, kps: &[Keypoint], kind: DescriptorKind, scale_factor: f32) -> Described {
    assert_eq!(img.channels(), 1, "description expects a grayscale image");
    let levels = kps.iter().map(|k| k.octave as usize + 1).max().unwrap_or(1);
    let levels = levels.min(crate::imagecore::max_levels(img.width(), img.height(), scale_factor, levels)).max(1);
    let pyramid = Pyramid::build(img, levels, scale_factor).expect("at least one level fits");
    describe_on_pyramid(&pyramid, kps, kind)
}

/// Detection and description sharing one pyramid.
pub fn detect_and_describe(img: &ImageF32, cfg: &DetectorConfig, kind: DescriptorKind) -> Described {
    assert_eq!(img.channels(), 1, "detection expects a grayscale image");
    let levels = crate::imagecore::max_levels(img.width(), img.height(), cfg.scale_factor, cfg.levels.max(1));
    if levels == 0 || cfg.max_keypoints == 0 {
        return Described::default();
    }
    let pyramid = Pyramid::build(img, levels, cfg.scale_factor).expect("levels checked above");
    let kps = orb::detect_on_pyramid(&pyramid, cfg);
    describe_on_pyramid(&pyramid, &kps, kind)
}

enum LevelData {
    Smoothed(Vec<ImageF32>),
    Integral(Vec<IntegralImage>),
}

pub(crate) fn describe_on_pyramid(pyramid: &Pyramid, kps: &[Keypoint], kind: DescriptorKind) -> Described {
    let data = match kind {
        DescriptorKind::Brief => LevelData::Smoothed(
            pyramid
                .levels()
                .par_iter()
                .map(|l| gaussian_blur(l, BRIEF_SMOOTHING_SIGMA))
                .collect(),
        ),
        DescriptorKind::Freak => {
            LevelData::Integral(pyramid.levels().par_iter().map(IntegralImage::new).collect())
        }
    };
    let level0 = pyramid.level(0);
    let extent = match kind {
        DescriptorKind::Brief => brief::PATCH_HALF as f32 * std::f32::consts::SQRT_2 + 1.0,
        DescriptorKind::Freak => freak::pattern_extent() + 1.0,
    };
    let results: Vec<Option<BinaryDescriptor>> = kps
        .par_iter()
        .map(|kp| {
            let margin = EDGE_MARGIN as f32;
            if kp.x < margin
                || kp.y < margin
                || kp.x >= level0.width() as f32 - margin
                || kp.y >= level0.height() as f32 - margin
                || kp.octave as usize >= pyramid.len()
            {
                return None;
            }
            let k = kp.octave as usize;
            let scale = pyramid.scale_of(k);
            let lx = orb::to_level(kp.x, scale);
            let ly = orb::to_level(kp.y, scale);
            let level = pyramid.level(k);
            if lx < extent
                || ly < extent
                || lx >= level.width() as f32 - extent
                || ly >= level.height() as f32 - extent
            {
                return None;
            }
            Some(match &data {
                LevelData::Smoothed(levels) => brief_descriptor(&levels[k], lx, ly, kp.angle),
                LevelData::Integral(levels) => freak_descriptor(&levels[k], lx, ly, kp.angle),
            })
        })
        .collect();
    let mut out = Described::default();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Some(d) => {
                out.keypoints.push(kps[i]);
                out.descriptors.push(d);
                out.kept.push(i);
            }
            None => out.dropped.push(i),
        }
    }
    out
}

fn brief_descriptor(smoothed: &ImageF32, x: f32, y: f32, angle: f32) -> BinaryDescriptor {
    let (s, c) = angle.sin_cos();
    let cx = x.round() as isize;
    let cy = y.round() as isize;
    let sample = |(px, py): (i32, i32)| {
        let rx = (c * px as f32 - s * py as f32).round() as isize;
        let ry = (s * px as f32 + c * py as f32).round() as isize;
        smoothed.get_clamped(cx + rx, cy + ry)
    };
    let mut d = BinaryDescriptor::zeros(DescriptorKind::Brief);
    for (i, &(p, q)) in brief::pattern().iter().enumerate() {
        if sample(p) < sample(q) {
            d.set_bit(i, true);
        }
    }
    d
}

fn freak_descriptor(integral: &IntegralImage, x: f32, y: f32, angle: f32) -> BinaryDescriptor {
    let (s, c) = angle.sin_cos();
    let mut values = [0.0f32; freak::FIELD_COUNT];
    for (v, f) in values.iter_mut().zip(freak::receptive_fields().iter()) {
        let fx = x + c * f.x - s * f.y;
        let fy = y + s * f.x + c * f.y;
        let x0 = (fx - f.sigma).round() as isize;
        let x1 = (fx + f.sigma).round() as isize;
        let y0 = (fy - f.sigma).round() as isize;
        let y1 = (fy + f.sigma).round() as isize;
        *v = integral.mean(x0, y0, x1, y1);
    }
    let mut d = BinaryDescriptor::zeros(DescriptorKind::Freak);
    for (m, &(i, j)) in freak::comparison_pairs().iter().enumerate() {
        if values[j as usize] < values[i as usize] {
            d.set_bit(m, true);
        }
    }
    d
}
