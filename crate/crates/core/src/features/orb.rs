use std::f32::consts::TAU;

use rayon::prelude::*;

use super::fast::{fast_scores, nonmax_suppress};
use super::{Keypoint, EDGE_MARGIN};
use crate::imagecore::{max_levels, ImageF32, Pyramid};

pub const ORIENTATION_RADIUS: isize = 15;
const HARRIS_BLOCK: isize = 3; // half-size of the 7x7 Harris window
const HARRIS_K: f32 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub max_keypoints: usize,
    pub levels: usize,
    pub scale_factor: f32,
    /// FAST intensity threshold on the `[0, 1]` scale.
    pub fast_threshold: f32,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            max_keypoints: 5000,
            levels: 8,
            scale_factor: 1.2,
            fast_threshold: 20.0 / 255.0,
        }
    }
}

/// Intensity-centroid orientation over the radius-15 disc around `(x, y)`
/// (rounded to the nearest pixel). Returns an angle in `[0, 2π)`; a patch
/// with zero mass or a balanced centroid yields 0.
pub fn orientation(img: &ImageF32, x: f32, y: f32) -> f32 {
    let cx = x.round() as isize;
    let cy = y.round() as isize;
    let r = ORIENTATION_RADIUS;
    let mut m10 = 0.0f64;
    let mut m01 = 0.0f64;
    let mut mass = 0.0f64;
    for dy in -r..=r {
        let span = (((r * r - dy * dy) as f64).sqrt()).floor() as isize;
        for dx in -span..=span {
            let v = img.get_clamped(cx + dx, cy + dy) as f64;
            m10 += dx as f64 * v;
            m01 += dy as f64 * v;
            mass += v;
        }
    }
    if mass == 0.0 || (m10 == 0.0 && m01 == 0.0) {
        return 0.0;
    }
    normalize_angle(m01.atan2(m10) as f32)
}

pub(crate) fn normalize_angle(a: f32) -> f32 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn harris_response(img: &ImageF32, x: usize, y: usize) -> f32 {
    let (mut sxx, mut syy, mut sxy) = (0.0f32, 0.0f32, 0.0f32);
    let (xi, yi) = (x as isize, y as isize);
    for dy in -HARRIS_BLOCK..=HARRIS_BLOCK {
        for dx in -HARRIS_BLOCK..=HARRIS_BLOCK {
            let px = xi + dx;
            let py = yi + dy;
            // Sobel gradients
            let g = |ox: isize, oy: isize| img.get_clamped(px + ox, py + oy);
            let ix = (g(1, -1) + 2.0 * g(1, 0) + g(1, 1)) - (g(-1, -1) + 2.0 * g(-1, 0) + g(-1, 1));
            let iy = (g(-1, 1) + 2.0 * g(0, 1) + g(1, 1)) - (g(-1, -1) + 2.0 * g(0, -1) + g(1, -1));
            sxx += ix * ix;
            syy += iy * iy;
            sxy += ix * iy;
        }
    }
    sxx * syy - sxy * sxy - HARRIS_K * (sxx + syy) * (sxx + syy)
}

/// Level-`k` pixel coordinate to level-0 coordinate (pixel-center aligned).
#[inline]
pub(crate) fn to_level0(v: f32, scale: f32) -> f32 {
    (v + 0.5) * scale - 0.5
}

#[inline]
pub(crate) fn to_level(v: f32, scale: f32) -> f32 {
    (v + 0.5) / scale - 0.5
}

/// Multi-scale FAST-9 keypoints ranked by Harris response.
///
/// Corners are detected on every pyramid level, non-max suppressed in 3x3,
/// restricted to the descriptor margin, oriented by intensity centroid and
/// finally the `max_keypoints` strongest over all levels are kept.
pub fn detect_orb(img: &ImageF32, max_keypoints: usize, levels: usize) -> Vec<Keypoint> {
    detect_with(
        img,
        &DetectorConfig {
            max_keypoints,
            levels,
            ..DetectorConfig::default()
        },
    )
}

pub fn detect_with(img: &ImageF32, cfg: &DetectorConfig) -> Vec<Keypoint> {
    assert_eq!(img.channels(), 1, "detection expects a grayscale image");
    let levels = max_levels(img.width(), img.height(), cfg.scale_factor, cfg.levels.max(1));
    if levels == 0 || cfg.max_keypoints == 0 {
        return Vec::new();
    }
    let pyramid = Pyramid::build(img, levels, cfg.scale_factor).expect("levels checked above");
    detect_on_pyramid(&pyramid, cfg)
}

pub(crate) fn detect_on_pyramid(pyramid: &Pyramid, cfg: &DetectorConfig) -> Vec<Keypoint> {
    let per_level: Vec<Vec<Keypoint>> = (0..pyramid.len())
        .into_par_iter()
        .map(|k| {
            let level = pyramid.level(k);
            let scale = pyramid.scale_of(k);
            let scores = fast_scores(level, cfg.fast_threshold);
            nonmax_suppress(&scores, level.width(), level.height(), EDGE_MARGIN)
                .into_iter()
                .map(|(x, y, _)| Keypoint {
                    x: to_level0(x as f32, scale),
                    y: to_level0(y as f32, scale),
                    octave: k as u32,
                    angle: orientation(level, x as f32, y as f32),
                    response: harris_response(level, x, y),
                })
                .collect()
        })
        .collect();
    let mut all: Vec<Keypoint> = per_level.into_iter().flatten().collect();
    all.sort_by(|a, b| {
        b.response
            .total_cmp(&a.response)
            .then(a.octave.cmp(&b.octave))
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
    });
    all.truncate(cfg.max_keypoints);
    all
}
