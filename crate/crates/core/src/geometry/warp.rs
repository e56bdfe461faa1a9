use rayon::prelude::*;

use super::Homography;
use crate::imagecore::ImageF32;

/// Slack for round-off when a target pixel maps exactly onto the source border.
const EDGE_TOL: f64 = 1e-6;

/// Axis-aligned integer rectangle on the output canvas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, width: usize, height: usize) -> Self {
        Self { x0, y0, width, height }
    }

    /// Smallest rectangle covering every point (pixel-center convention).
    pub fn bounding(points: &[(f64, f64)]) -> Option<Self> {
        let (mut minx, mut miny) = (f64::INFINITY, f64::INFINITY);
        let (mut maxx, mut maxy) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in points {
            if !x.is_finite() || !y.is_finite() {
                return None;
            }
            minx = minx.min(x);
            miny = miny.min(y);
            maxx = maxx.max(x);
            maxy = maxy.max(y);
        }
        if points.is_empty() {
            return None;
        }
        let x0 = minx.floor() as i64;
        let y0 = miny.floor() as i64;
        let x1 = maxx.ceil() as i64;
        let y1 = maxy.ceil() as i64;
        Some(Self::new(x0, y0, (x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize))
    }
}

/// Warped raster plus the validity mask of its pixels.
#[derive(Debug, Clone)]
pub struct Warped {
    pub image: ImageF32,
    /// 1 where the inverse-mapped position lies inside the source, else 0.
    pub mask: Vec<u8>,
    pub bounds: Rect,
}

/// Resamples `img` onto `out_bounds` of the target frame, where `h` maps
/// source pixel coordinates to target coordinates. Inverse mapping with
/// bilinear interpolation; pixels falling outside `[0,w-1]x[0,h-1]` are zero
/// and masked out.
pub fn warp_image(img: &ImageF32, h: &Homography, out_bounds: Rect) -> Warped {
    let inv = h.inverse();
    let (ow, oh, ch) = (out_bounds.width, out_bounds.height, img.channels());
    let max_x = (img.width() - 1) as f64;
    let max_y = (img.height() - 1) as f64;
    let rows: Vec<(Vec<f32>, Vec<u8>)> = (0..oh)
        .into_par_iter()
        .map(|v| {
            let mut data = vec![0.0f32; ow * ch];
            let mut mask = vec![0u8; ow];
            let ty = (out_bounds.y0 + v as i64) as f64;
            for u in 0..ow {
                let tx = (out_bounds.x0 + u as i64) as f64;
                let Ok((sx, sy)) = inv.transfer(tx, ty) else {
                    continue;
                };
                if sx >= -EDGE_TOL && sy >= -EDGE_TOL && sx <= max_x + EDGE_TOL && sy <= max_y + EDGE_TOL {
                    mask[u] = 1;
                    for c in 0..ch {
                        data[u * ch + c] = img.sample_bilinear(sx as f32, sy as f32, c);
                    }
                }
            }
            (data, mask)
        })
        .collect();
    let mut data = Vec::with_capacity(ow * oh * ch);
    let mut mask = Vec::with_capacity(ow * oh);
    for (d, m) in rows {
        data.extend(d);
        mask.extend(m);
    }
    Warped {
        image: ImageF32::from_raw(ow, oh, ch, data),
        mask,
        bounds: out_bounds,
    }
}
