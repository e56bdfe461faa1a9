//! FAST-9 segment test on a 16-pixel Bresenham circle of radius 3.

use crate::imagecore::ImageF32;

pub(super) const CIRCLE: [(isize, isize); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

/// True when the 16-bit ring mask holds 9 contiguous set bits (with wrap).
#[inline]
fn has_arc9(mask: u32) -> bool {
    let m = mask | (mask << 16);
    let mut acc = m;
    for s in 1..9 {
        acc &= m >> s;
    }
    acc != 0
}

/// FAST score map: 0 for non-corners, otherwise the larger of the summed
/// brighter and darker excesses over the threshold. Pixels closer than 3 px
/// to the border are never corners.
pub(super) fn fast_scores(img: &ImageF32, threshold: f32) -> Vec<f32> {
    let (w, h) = (img.width(), img.height());
    let mut scores = vec![0.0f32; w * h];
    if w < 7 || h < 7 {
        return scores;
    }
    let data = img.data();
    let offsets: Vec<isize> = CIRCLE.iter().map(|&(dx, dy)| dy * w as isize + dx).collect();
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let idx = y * w + x;
            let p = data[idx];
            let hi = p + threshold;
            let lo = p - threshold;
            let mut bright = 0u32;
            let mut dark = 0u32;
            let mut sb = 0.0f32;
            let mut sd = 0.0f32;
            for (k, &off) in offsets.iter().enumerate() {
                let v = data[(idx as isize + off) as usize];
                if v > hi {
                    bright |= 1 << k;
                    sb += v - hi;
                } else if v < lo {
                    dark |= 1 << k;
                    sd += lo - v;
                }
            }
            let corner_b = bright.count_ones() >= 9 && has_arc9(bright);
            let corner_d = dark.count_ones() >= 9 && has_arc9(dark);
            if corner_b || corner_d {
                let s = match (corner_b, corner_d) {
                    (true, true) => sb.max(sd),
                    (true, false) => sb,
                    _ => sd,
                };
                // strictly positive so a corner is never confused with "none"
                scores[idx] = s.max(f32::MIN_POSITIVE);
            }
        }
    }
    scores
}

/// Corners that are strict maxima of the score in their 3x3 neighborhood
/// (ties resolved toward the earlier pixel in raster order) and lie within
/// `[margin, w - margin) x [margin, h - margin)`.
pub(super) fn nonmax_suppress(scores: &[f32], w: usize, h: usize, margin: usize) -> Vec<(usize, usize, f32)> {
    let mut out = Vec::new();
    if w <= 2 * margin || h <= 2 * margin {
        return out;
    }
    for y in margin.max(1)..(h - margin).min(h - 1) {
        for x in margin.max(1)..(w - margin).min(w - 1) {
            let s = scores[y * w + x];
            if s <= 0.0 {
                continue;
            }
            let mut keep = true;
            'n: for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let n = scores[((y as isize + dy) as usize) * w + (x as isize + dx) as usize];
                    let earlier = dy < 0 || (dy == 0 && dx < 0);
                    if n > s || (n == s && earlier) {
                        keep = false;
                        break 'n;
                    }
                }
            }
            if keep {
                out.push((x, y, s));
            }
        }
    }
    out
}
