//! FREAK retinal sampling pattern.
//!
//! 43 receptive fields: seven rings of six fields, ordered outer to inner,
//! plus the center field. Alternate rings are rotated by half a step, and
//! each field is a box mean with half-size equal to its Gaussian σ.

use std::f32::consts::PI;
use std::sync::OnceLock;

use super::freak_pairs::FREAK_PAIR_TABLE;

pub const FIELD_COUNT: usize = 43;
pub(super) const PATTERN_SCALE: f32 = 22.0;
const FIELDS_PER_RING: [usize; 8] = [6, 6, 6, 6, 6, 6, 6, 1];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceptiveField {
    /// Ring index, 0 = outermost, 7 = center.
    pub ring: usize,
    /// Offset from the keypoint before rotation (level pixels).
    pub x: f32,
    pub y: f32,
    /// Smoothing σ, used as the half-size of the averaging box.
    pub sigma: f32,
}

fn ring_radii() -> [f32; 8] {
    let big = 2.0f32 / 3.0;
    let small = 2.0f32 / 24.0;
    let unit = (big - small) / 21.0;
    [
        big,
        big - 6.0 * unit,
        big - 11.0 * unit,
        big - 15.0 * unit,
        big - 18.0 * unit,
        big - 20.0 * unit,
        small,
        0.0,
    ]
}

pub fn receptive_fields() -> &'static [ReceptiveField; FIELD_COUNT] {
    static FIELDS: OnceLock<[ReceptiveField; FIELD_COUNT]> = OnceLock::new();
    FIELDS.get_or_init(|| {
        let radii = ring_radii();
        let sigmas = [
            radii[0] / 2.0,
            radii[1] / 2.0,
            radii[2] / 2.0,
            radii[3] / 2.0,
            radii[4] / 2.0,
            radii[5] / 2.0,
            radii[6] / 2.0,
            radii[6] / 2.0,
        ];
        let mut out = [ReceptiveField {
            ring: 0,
            x: 0.0,
            y: 0.0,
            sigma: 0.0,
        }; FIELD_COUNT];
        let mut idx = 0;
        for (ring, &n) in FIELDS_PER_RING.iter().enumerate() {
            let beta = PI / n as f32 * (ring % 2) as f32;
            for k in 0..n {
                let alpha = k as f32 * 2.0 * PI / n as f32 + beta;
                out[idx] = ReceptiveField {
                    ring,
                    x: radii[ring] * alpha.cos() * PATTERN_SCALE,
                    y: radii[ring] * alpha.sin() * PATTERN_SCALE,
                    sigma: sigmas[ring] * PATTERN_SCALE,
                };
                idx += 1;
            }
        }
        out
    })
}

/// The 512 comparison pairs `(i, j)`; bit is set iff `value[j] < value[i]`.
pub fn comparison_pairs() -> &'static [(u8, u8); 512] {
    static PAIRS: OnceLock<[(u8, u8); 512]> = OnceLock::new();
    PAIRS.get_or_init(|| {
        let mut all = Vec::with_capacity(FIELD_COUNT * (FIELD_COUNT - 1) / 2);
        for i in 1..FIELD_COUNT as u8 {
            for j in 0..i {
                all.push((i, j));
            }
        }
        let mut out = [(0u8, 0u8); 512];
        for (slot, &sel) in out.iter_mut().zip(FREAK_PAIR_TABLE.iter()) {
            *slot = all[sel as usize];
        }
        out
    })
}

/// Farthest extent of any averaging box from the keypoint, in level pixels.
pub(super) fn pattern_extent() -> f32 {
    receptive_fields()
        .iter()
        .map(|f| (f.x * f.x + f.y * f.y).sqrt() + f.sigma)
        .fold(0.0, f32::max)
}
