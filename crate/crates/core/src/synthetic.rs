//! Procedural test scenes.
//!
//! A scene is a smooth noise background covered with many random filled
//! shapes (rotated rectangles, ellipses, triangles) of log-uniform size plus
//! fine grain. It is defined on continuous coordinates, so warped views are
//! rendered directly through the inverse map instead of being resampled from
//! a raster.

use rayon::prelude::*;

use crate::imagecore::{ImageF32, ImageU8};
use crate::rng::XorShiftRng;

const CELL: f64 = 32.0;
const SUPERSAMPLE: usize = 2;

#[derive(Debug, Clone)]
enum Shape {
    Rect { cx: f64, cy: f64, hw: f64, hh: f64, cos: f64, sin: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64, cos: f64, sin: f64 },
    Triangle { p: [(f64, f64); 3] },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Rect { cx, cy, hw, hh, cos, sin } => {
                let dx = x - cx;
                let dy = y - cy;
                let u = cos * dx + sin * dy;
                let v = -sin * dx + cos * dy;
                u.abs() <= hw && v.abs() <= hh
            }
            Shape::Ellipse { cx, cy, rx, ry, cos, sin } => {
                let dx = x - cx;
                let dy = y - cy;
                let u = (cos * dx + sin * dy) / rx;
                let v = (-sin * dx + cos * dy) / ry;
                u * u + v * v <= 1.0
            }
            Shape::Triangle { p } => {
                let s = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
                let d1 = s(p[0], p[1]);
                let d2 = s(p[1], p[2]);
                let d3 = s(p[2], p[0]);
                let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
                let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
                !(neg && pos)
            }
        }
    }

    fn bbox(&self) -> (f64, f64, f64, f64) {
        match *self {
            Shape::Rect { cx, cy, hw, hh, .. } => {
                let r = (hw * hw + hh * hh).sqrt();
                (cx - r, cy - r, cx + r, cy + r)
            }
            Shape::Ellipse { cx, cy, rx, ry, .. } => {
                let r = rx.max(ry);
                (cx - r, cy - r, cx + r, cy + r)
            }
            Shape::Triangle { p } => {
                let xs = [p[0].0, p[1].0, p[2].0];
                let ys = [p[0].1, p[1].1, p[2].1];
                (
                    xs.iter().cloned().fold(f64::INFINITY, f64::min),
                    ys.iter().cloned().fold(f64::INFINITY, f64::min),
                    xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                )
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    seed: u64,
    x0: f64,
    y0: f64,
    cols: usize,
    rows: usize,
    shapes: Vec<(Shape, [f32; 3])>,
    /// Shape indices overlapping each cell, ascending (draw order).
    cells: Vec<Vec<u32>>,
}

fn hash2(ix: i64, iy: i64, salt: u64) -> f64 {
    let mut z = (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ salt.wrapping_mul(0x1656_67B1_9E37_79F9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Smooth value noise in `[0, 1]` with lattice spacing `period`.
fn value_noise(x: f64, y: f64, period: f64, salt: u64) -> f64 {
    let fx = x / period;
    let fy = y / period;
    let ix = fx.floor();
    let iy = fy.floor();
    let tx = fx - ix;
    let ty = fy - iy;
    let sx = tx * tx * (3.0 - 2.0 * tx);
    let sy = ty * ty * (3.0 - 2.0 * ty);
    let (ix, iy) = (ix as i64, iy as i64);
    let a = hash2(ix, iy, salt);
    let b = hash2(ix + 1, iy, salt);
    let c = hash2(ix, iy + 1, salt);
    let d = hash2(ix + 1, iy + 1, salt);
    let top = a + (b - a) * sx;
    let bot = c + (d - c) * sx;
    top + (bot - top) * sy
}

impl Scene {
    /// Random scene covering `[x0, x1) x [y0, y1)`; shapes outside are never
    /// drawn and the background continues everywhere.
    pub fn random(seed: u64, x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        let mut rng = XorShiftRng::seed_from_u64(seed);
        let area = (x1 - x0) * (y1 - y0);
        let count = (area / 300.0).ceil() as usize;
        let mut shapes = Vec::with_capacity(count);
        for _ in 0..count {
            let cx = rng.uniform(x0, x1);
            let cy = rng.uniform(y0, y1);
            let size = (rng.uniform(3.0f64.ln(), 36.0f64.ln())).exp();
            let aspect = rng.uniform(0.4, 1.0);
            let theta = rng.uniform(0.0, std::f64::consts::PI);
            let (sin, cos) = theta.sin_cos();
            let shape = match rng.below(3) {
                0 => Shape::Rect { cx, cy, hw: size, hh: size * aspect, cos, sin },
                1 => Shape::Ellipse { cx, cy, rx: size, ry: size * aspect, cos, sin },
                _ => {
                    let mut p = [(0.0, 0.0); 3];
                    for v in p.iter_mut() {
                        *v = (cx + rng.uniform(-size, size), cy + rng.uniform(-size, size));
                    }
                    Shape::Triangle { p }
                }
            };
            let color = [
                rng.uniform(0.05, 0.95) as f32,
                rng.uniform(0.05, 0.95) as f32,
                rng.uniform(0.05, 0.95) as f32,
            ];
            shapes.push((shape, color));
        }
        let cols = ((x1 - x0) / CELL).ceil().max(1.0) as usize;
        let rows = ((y1 - y0) / CELL).ceil().max(1.0) as usize;
        let mut cells = vec![Vec::new(); cols * rows];
        for (i, (s, _)) in shapes.iter().enumerate() {
            let (bx0, by0, bx1, by1) = s.bbox();
            let c0 = (((bx0 - x0) / CELL).floor().max(0.0) as usize).min(cols - 1);
            let c1 = (((bx1 - x0) / CELL).floor().max(0.0) as usize).min(cols - 1);
            let r0 = (((by0 - y0) / CELL).floor().max(0.0) as usize).min(rows - 1);
            let r1 = (((by1 - y0) / CELL).floor().max(0.0) as usize).min(rows - 1);
            for r in r0..=r1 {
                for c in c0..=c1 {
                    cells[r * cols + c].push(i as u32);
                }
            }
        }
        Self {
            seed,
            x0,
            y0,
            cols,
            rows,
            shapes,
            cells,
        }
    }

    /// Linear RGB in `[0, 1]` at a continuous position.
    pub fn sample_rgb(&self, x: f64, y: f64) -> [f32; 3] {
        let grain = (value_noise(x, y, 2.5, self.seed ^ 0xA5) - 0.5) * 0.06;
        let mut base = [0.0f32; 3];
        let mut hit = None;
        let cx = ((x - self.x0) / CELL).floor();
        let cy = ((y - self.y0) / CELL).floor();
        if cx >= 0.0 && cy >= 0.0 && (cx as usize) < self.cols && (cy as usize) < self.rows {
            for &i in self.cells[cy as usize * self.cols + cx as usize].iter().rev() {
                let (s, color) = &self.shapes[i as usize];
                if s.contains(x, y) {
                    hit = Some(*color);
                    break;
                }
            }
        }
        match hit {
            Some(c) => base = c,
            None => {
                for (k, b) in base.iter_mut().enumerate() {
                    let low = value_noise(x, y, 90.0, self.seed.wrapping_add(k as u64 * 7919));
                    let mid = value_noise(x, y, 17.0, self.seed.wrapping_add(k as u64 * 104_729 + 3));
                    *b = (0.15 + 0.5 * low + 0.3 * mid) as f32;
                }
            }
        }
        base.map(|v| (v + grain as f32).clamp(0.0, 1.0))
    }

    /// Renders `width x height` pixels whose centers map through `map` into
    /// scene coordinates, with 2x2 supersampling. Pixels whose map returns
    /// `None` are black.
    pub fn render(
        &self,
        width: usize,
        height: usize,
        channels: usize,
        map: impl Fn(f64, f64) -> Option<(f64, f64)> + Sync,
    ) -> ImageF32 {
        let rows: Vec<Vec<f32>> = (0..height)
            .into_par_iter()
            .map(|y| {
                let mut row = Vec::with_capacity(width * channels);
                for x in 0..width {
                    let mut acc = [0.0f32; 3];
                    let mut n = 0.0f32;
                    for sy in 0..SUPERSAMPLE {
                        for sx in 0..SUPERSAMPLE {
                            let px = x as f64 + (sx as f64 + 0.5) / SUPERSAMPLE as f64 - 0.5;
                            let py = y as f64 + (sy as f64 + 0.5) / SUPERSAMPLE as f64 - 0.5;
                            if let Some((u, v)) = map(px, py) {
                                let c = self.sample_rgb(u, v);
                                for k in 0..3 {
                                    acc[k] += c[k];
                                }
                            }
                            n += 1.0;
                        }
                    }
                    let rgb = acc.map(|v| v / n);
                    if channels == 1 {
                        row.push(0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]);
                    } else {
                        row.extend_from_slice(&rgb);
                    }
                }
                row
            })
            .collect();
        ImageF32::from_raw(width, height, channels, rows.concat())
    }
}

/// Grayscale texture of the given size, scene-aligned with pixel coordinates.
pub fn textured_gray(width: usize, height: usize, seed: u64) -> ImageF32 {
    let scene = Scene::random(seed, -40.0, -40.0, width as f64 + 40.0, height as f64 + 40.0);
    scene.render(width, height, 1, |x, y| Some((x, y)))
}

pub fn textured_rgb(width: usize, height: usize, seed: u64) -> ImageU8 {
    let scene = Scene::random(seed, -40.0, -40.0, width as f64 + 40.0, height as f64 + 40.0);
    scene.render(width, height, 3, |x, y| Some((x, y))).to_u8()
}

/// Horizontal crops of one textured source, each `crop_width` wide, adjacent
/// crops sharing `overlap` of their width.
#[derive(Debug, Clone)]
pub struct CropSet {
    pub source: ImageU8,
    pub crops: Vec<ImageU8>,
    /// Left edge of each crop in the source.
    pub offsets: Vec<usize>,
    pub crop_width: usize,
}

pub fn overlapping_crops(width: usize, height: usize, count: usize, overlap: f64, seed: u64) -> CropSet {
    assert!(count >= 1 && (0.0..1.0).contains(&overlap));
    let crop_width = (width as f64 / (1.0 + (count - 1) as f64 * (1.0 - overlap))).floor() as usize;
    let step = ((1.0 - overlap) * crop_width as f64).round() as usize;
    let source = textured_rgb(width, height, seed);
    let offsets: Vec<usize> = (0..count).map(|k| k * step).collect();
    let crops = offsets.iter().map(|&x| source.crop(x, 0, crop_width, height)).collect();
    CropSet {
        source,
        crops,
        offsets,
        crop_width,
    }
}

/// Three `width x height` views along a horizontal strip of one scene.
/// Neighbours differ by `angle_deg` of rotation and alternately zoom by
/// `scale` (view 1 is zoomed in), with centers `step` scene units apart.
pub fn rotated_views(width: usize, height: usize, step: f64, angle_deg: f64, scale: f64, seed: u64) -> Vec<ImageU8> {
    let pad = (width + height) as f64;
    let scene = Scene::random(seed, -pad, -pad, 2.0 * step + width as f64 + pad, height as f64 + pad);
    let params = [(0.0, 1.0), (angle_deg, scale), (2.0 * angle_deg, 1.0)];
    let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    params
        .iter()
        .enumerate()
        .map(|(k, &(a, s))| {
            let (sin, cos) = a.to_radians().sin_cos();
            let ox = cx + k as f64 * step;
            scene
                .render(width, height, 3, |x, y| {
                    let (dx, dy) = ((x - cx) / s, (y - cy) / s);
                    Some((ox + cos * dx - sin * dy, cy + sin * dx + cos * dy))
                })
                .to_u8()
        })
        .collect()
}
