use rayon::prelude::*;

use super::seam::SeamMask;
use crate::imagecore::{gaussian_blur, ImageF32};

/// Smoothing of the seam masks used as feather weights when `bands == 1`.
pub const FEATHER_SIGMA: f32 = 4.0;
/// Coarsest pyramid level keeps at least this many pixels on its short side.
pub const MIN_COARSE_SIZE: usize = 8;

const WEIGHT_EPS: f32 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
struct Plane {
    w: usize,
    h: usize,
    d: Vec<f32>,
}

impl Plane {
    fn zeros(w: usize, h: usize) -> Self {
        Self { w, h, d: vec![0.0; w * h] }
    }

    fn at(&self, x: isize, y: isize) -> f32 {
        let x = x.clamp(0, self.w as isize - 1) as usize;
        let y = y.clamp(0, self.h as isize - 1) as usize;
        self.d[y * self.w + x]
    }
}

const K5: [f32; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// 5-tap blur followed by 2x decimation.
fn reduce(p: &Plane) -> Plane {
    let (nw, nh) = (p.w.div_ceil(2), p.h.div_ceil(2));
    let mut tmp = Plane::zeros(nw, p.h);
    for y in 0..p.h {
        for x in 0..nw {
            let cx = 2 * x as isize;
            tmp.d[y * nw + x] = (0..5).map(|m| K5[m] * p.at(cx + m as isize - 2, y as isize)).sum();
        }
    }
    let mut out = Plane::zeros(nw, nh);
    for y in 0..nh {
        let cy = 2 * y as isize;
        for x in 0..nw {
            out.d[y * nw + x] = (0..5).map(|m| K5[m] * tmp.at(x as isize, cy + m as isize - 2)).sum();
        }
    }
    out
}

fn expand_1d(src: impl Fn(isize) -> f32, x: usize) -> f32 {
    let h = (x / 2) as isize;
    if x % 2 == 0 {
        0.125 * src(h - 1) + 0.75 * src(h) + 0.125 * src(h + 1)
    } else {
        0.5 * (src(h) + src(h + 1))
    }
}

/// 2x upsampling with the same kernel, to `w x h`.
fn expand(p: &Plane, w: usize, h: usize) -> Plane {
    let mut tmp = Plane::zeros(w, p.h);
    for y in 0..p.h {
        for x in 0..w {
            tmp.d[y * w + x] = expand_1d(|i| p.at(i, y as isize), x);
        }
    }
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            out.d[y * w + x] = expand_1d(|i| tmp.at(x as isize, i), y);
        }
    }
    out
}

/// Replaces invalid pixels by a smooth continuation of the valid ones
/// (push-pull); valid pixels are untouched.
fn fill_invalid(p: &Plane, valid: &Plane) -> Plane {
    let mut iv = vec![Plane {
        w: p.w,
        h: p.h,
        d: p.d.iter().zip(&valid.d).map(|(a, b)| a * b).collect(),
    }];
    let mut vv = vec![valid.clone()];
    while iv.last().unwrap().w > 1 || iv.last().unwrap().h > 1 {
        let next_i = reduce(iv.last().unwrap());
        let next_v = reduce(vv.last().unwrap());
        iv.push(next_i);
        vv.push(next_v);
    }
    let mut filled: Option<Plane> = None;
    for l in (0..iv.len()).rev() {
        let (pi, pv) = (&iv[l], &vv[l]);
        let est = filled.as_ref().map(|f| expand(f, pi.w, pi.h));
        let mut out = Plane::zeros(pi.w, pi.h);
        for k in 0..out.d.len() {
            let v = pv.d[k];
            out.d[k] = if l == 0 {
                if v > 0.0 {
                    p.d[k]
                } else {
                    est.as_ref().map_or(0.0, |e| e.d[k])
                }
            } else if v > 1e-6 {
                pi.d[k] / v
            } else {
                est.as_ref().map_or(0.0, |e| e.d[k])
            };
        }
        filled = Some(out);
    }
    filled.unwrap()
}

fn gaussian_pyramid(p: Plane, levels: usize) -> Vec<Plane> {
    let mut g = vec![p];
    for _ in 1..levels {
        let next = reduce(g.last().unwrap());
        g.push(next);
    }
    g
}

fn laplacian_pyramid(p: Plane, levels: usize) -> Vec<Plane> {
    let g = gaussian_pyramid(p, levels);
    let mut l = Vec::with_capacity(levels);
    for k in 0..levels - 1 {
        let up = expand(&g[k + 1], g[k].w, g[k].h);
        l.push(Plane {
            w: g[k].w,
            h: g[k].h,
            d: g[k].d.iter().zip(&up.d).map(|(a, b)| a - b).collect(),
        });
    }
    l.push(g[levels - 1].clone());
    l
}

/// Band count after limiting the coarsest level to `MIN_COARSE_SIZE`.
pub fn effective_bands(bands: usize, width: usize, height: usize) -> usize {
    let mut levels = 1;
    let mut short = width.min(height);
    while levels < bands && short.div_ceil(2) >= MIN_COARSE_SIZE {
        short = short.div_ceil(2);
        levels += 1;
    }
    levels
}

fn channel_plane(img: &ImageF32, c: usize) -> Plane {
    let ch = img.channels();
    Plane {
        w: img.width(),
        h: img.height(),
        d: img.data().iter().skip(c).step_by(ch).copied().collect(),
    }
}

fn mask_plane(m: &[u8], w: usize, h: usize) -> Plane {
    Plane {
        w,
        h,
        d: m.iter().map(|&v| (v != 0) as u8 as f32).collect(),
    }
}

fn assemble(planes: Vec<Plane>, coverage: &[i32]) -> ImageF32 {
    let (w, h, ch) = (planes[0].w, planes[0].h, planes.len());
    let mut data = vec![0.0f32; w * h * ch];
    for (c, p) in planes.iter().enumerate() {
        for k in 0..w * h {
            if coverage[k] >= 0 {
                data[k * ch + c] = p.d[k];
            }
        }
    }
    ImageF32::new(w, h, ch, data).expect("sizes match")
}

/// Laplacian-pyramid blend of same-size canvas images. Level weights are
/// Gaussian pyramids of the seam masks, normalized per level; invalid
/// pixels are push-pull filled before decomposition. `bands <= 1` falls
/// back to [`feather_blend`]. Uncovered pixels are zero.
pub fn blend_multiband(images: &[ImageF32], valid: &[Vec<u8>], seams: &SeamMask, bands: usize) -> ImageF32 {
    let (w, h) = (seams.width, seams.height);
    let levels = effective_bands(bands, w, h);
    if levels <= 1 {
        return feather_blend(images, valid, seams);
    }
    let ch = images[0].channels();
    let weights: Vec<Vec<Plane>> = (0..images.len())
        .into_par_iter()
        .map(|i| gaussian_pyramid(mask_plane(&seams.mask_of(i), w, h), levels))
        .collect();
    let planes: Vec<Plane> = (0..ch)
        .into_par_iter()
        .map(|c| {
            let mut num: Vec<Plane> = weights[0].iter().map(|p| Plane::zeros(p.w, p.h)).collect();
            let mut den = num.clone();
            let mut sum = num.clone();
            for (i, img) in images.iter().enumerate() {
                let filled = fill_invalid(&channel_plane(img, c), &mask_plane(&valid[i], w, h));
                let lap = laplacian_pyramid(filled, levels);
                for l in 0..levels {
                    let wl = &weights[i][l];
                    for k in 0..lap[l].d.len() {
                        num[l].d[k] += wl.d[k] * lap[l].d[k];
                        den[l].d[k] += wl.d[k];
                        sum[l].d[k] += lap[l].d[k];
                    }
                }
            }
            let n = images.len() as f32;
            let bandsum: Vec<Plane> = (0..levels)
                .map(|l| Plane {
                    w: num[l].w,
                    h: num[l].h,
                    d: (0..num[l].d.len())
                        .map(|k| {
                            if den[l].d[k] > WEIGHT_EPS {
                                num[l].d[k] / den[l].d[k]
                            } else {
                                sum[l].d[k] / n
                            }
                        })
                        .collect(),
                })
                .collect();
            let mut r = bandsum[levels - 1].clone();
            for l in (0..levels - 1).rev() {
                let up = expand(&r, bandsum[l].w, bandsum[l].h);
                r = Plane {
                    w: up.w,
                    h: up.h,
                    d: bandsum[l].d.iter().zip(&up.d).map(|(a, b)| a + b).collect(),
                };
            }
            r
        })
        .collect();
    assemble(planes, &seams.owner)
}

/// Weighted average with weights = seam mask blurred by `FEATHER_SIGMA`,
/// restricted to each image's valid pixels.
pub fn feather_blend(images: &[ImageF32], valid: &[Vec<u8>], seams: &SeamMask) -> ImageF32 {
    let (w, h) = (seams.width, seams.height);
    let ch = images[0].channels();
    let weights: Vec<Vec<f32>> = (0..images.len())
        .into_par_iter()
        .map(|i| {
            let m = ImageF32::new(w, h, 1, mask_plane(&seams.mask_of(i), w, h).d).expect("sizes match");
            let b = gaussian_blur(&m, FEATHER_SIGMA);
            b.data()
                .iter()
                .zip(&valid[i])
                .map(|(v, &ok)| if ok != 0 { *v } else { 0.0 })
                .collect()
        })
        .collect();
    let mut data = vec![0.0f32; w * h * ch];
    for k in 0..w * h {
        let o = seams.owner[k];
        if o < 0 {
            continue;
        }
        let total: f32 = weights.iter().map(|wt| wt[k]).sum();
        for c in 0..ch {
            data[k * ch + c] = if total > WEIGHT_EPS {
                images
                    .iter()
                    .zip(&weights)
                    .map(|(img, wt)| wt[k] * img.data()[k * ch + c])
                    .sum::<f32>()
                    / total
            } else {
                images[o as usize].data()[k * ch + c]
            };
        }
    }
    ImageF32::new(w, h, ch, data).expect("sizes match")
}
