use crate::imagecore::ImageF32;

/// Overlaps thinner than this (pixels, shorter bounding-box side) are split
/// by distance transform instead of a seam.
pub const MIN_SEAM_OVERLAP: usize = 3;

/// Canvas ownership: `owner[p]` is the index (into the image slice) owning
/// pixel `p`, or -1 when no image covers it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeamMask {
    pub width: usize,
    pub height: usize,
    pub owner: Vec<i32>,
}

impl SeamMask {
    pub fn mask_of(&self, k: usize) -> Vec<u8> {
        self.owner.iter().map(|&o| (o == k as i32) as u8).collect()
    }
}

fn gray_at(img: &ImageF32, p: usize) -> f32 {
    let ch = img.channels();
    let d = &img.data()[p * ch..(p + 1) * ch];
    if ch >= 3 {
        0.299 * d[0] + 0.587 * d[1] + 0.114 * d[2]
    } else {
        d[0]
    }
}

/// Minimal-cost monotone top-to-bottom path through the allowed cells of a
/// `w x h` grid, one column per row (`None` for rows without allowed cells).
/// Steps move at most one column; ties go to the leftmost column. A row
/// unreachable from the previous one starts a fresh path.
pub fn vertical_seam(cost: &[f32], allowed: &[bool], w: usize, h: usize) -> Vec<Option<usize>> {
    let mut acc = vec![f64::INFINITY; w * h];
    let mut back: Vec<Option<usize>> = vec![None; w * h];
    for y in 0..h {
        let prev_has = y > 0 && (0..w).any(|x| acc[(y - 1) * w + x].is_finite());
        for x in 0..w {
            let p = y * w + x;
            if !allowed[p] {
                continue;
            }
            let mut best: Option<(f64, usize)> = None;
            if prev_has {
                for px in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let v = acc[(y - 1) * w + px];
                    if v.is_finite() && best.map_or(true, |(b, _)| v < b) {
                        best = Some((v, px));
                    }
                }
            }
            acc[p] = cost[p] as f64 + best.map_or(0.0, |b| b.0);
            back[p] = best.map(|b| b.1);
        }
    }
    let argmin = |y: usize| -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for x in 0..w {
            let v = acc[y * w + x];
            if v.is_finite() && best.map_or(true, |(b, _)| v < b) {
                best = Some((v, x));
            }
        }
        best.map(|b| b.1)
    };
    let mut path = vec![None; h];
    let mut cur: Option<usize> = None;
    for y in (0..h).rev() {
        let x = match cur {
            Some(x) => Some(x),
            None => argmin(y),
        };
        path[y] = x;
        cur = x.and_then(|x| back[y * w + x]);
    }
    path
}

/// Chamfer (1, √2) distance from each pixel inside `mask` to the nearest
/// pixel outside it (or the canvas border).
fn inside_distance(mask: &[u8], w: usize, h: usize) -> Vec<f32> {
    const D1: f32 = 1.0;
    const D2: f32 = std::f32::consts::SQRT_2;
    let mut d: Vec<f32> = mask.iter().map(|&m| if m != 0 { f32::INFINITY } else { 0.0 }).collect();
    let get = |d: &[f32], x: isize, y: isize| -> f32 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            d[y as usize * w + x as usize]
        }
    };
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = y as usize * w + x as usize;
            if d[p] == 0.0 {
                continue;
            }
            let v = (get(&d, x - 1, y) + D1)
                .min(get(&d, x, y - 1) + D1)
                .min(get(&d, x - 1, y - 1) + D2)
                .min(get(&d, x + 1, y - 1) + D2);
            d[p] = d[p].min(v);
        }
    }
    for y in (0..h as isize).rev() {
        for x in (0..w as isize).rev() {
            let p = y as usize * w + x as usize;
            if d[p] == 0.0 {
                continue;
            }
            let v = (get(&d, x + 1, y) + D1)
                .min(get(&d, x, y + 1) + D1)
                .min(get(&d, x + 1, y + 1) + D2)
                .min(get(&d, x - 1, y + 1) + D2);
            d[p] = d[p].min(v);
        }
    }
    d
}

fn centroid(pixels: impl Iterator<Item = usize>, w: usize) -> Option<(f64, f64)> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for p in pixels {
        sx += (p % w) as f64;
        sy += (p / w) as f64;
        n += 1;
    }
    (n > 0).then(|| (sx / n as f64, sy / n as f64))
}

/// Assigns every covered canvas pixel to one image. Images are placed in
/// slice order; where image `k` overlaps pixels already owned by `j`, a DP
/// seam on `|I_j − I_k|` splits the overlap along its longer axis.
pub fn find_seams(images: &[ImageF32], masks: &[Vec<u8>], width: usize, height: usize) -> SeamMask {
    let mut owner = vec![-1i32; width * height];
    for (k, mask_k) in masks.iter().enumerate() {
        for j in 0..k {
            let overlap: Vec<usize> = (0..width * height)
                .filter(|&p| owner[p] == j as i32 && mask_k[p] != 0)
                .collect();
            if overlap.is_empty() {
                continue;
            }
            split_overlap(images, masks, &mut owner, &overlap, j, k, width, height);
        }
        for p in 0..width * height {
            if mask_k[p] != 0 && owner[p] == -1 {
                owner[p] = k as i32;
            }
        }
    }
    SeamMask { width, height, owner }
}

#[allow(clippy::too_many_arguments)]
fn split_overlap(
    images: &[ImageF32],
    masks: &[Vec<u8>],
    owner: &mut [i32],
    overlap: &[usize],
    j: usize,
    k: usize,
    width: usize,
    height: usize,
) {
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for &p in overlap {
        let (x, y) = (p % width, p / width);
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
    let excl_j = centroid((0..width * height).filter(|&p| owner[p] == j as i32 && masks[k][p] == 0), width);
    let excl_k = centroid((0..width * height).filter(|&p| masks[k][p] != 0 && owner[p] == -1), width);

    let (Some(cj), Some(ck)) = (excl_j, excl_k) else {
        return bisect(masks, owner, overlap, j, k, width, height);
    };
    if bw.min(bh) < MIN_SEAM_OVERLAP {
        return bisect(masks, owner, overlap, j, k, width, height);
    }

    // Work in a local grid; transpose when the overlap is wider than tall so
    // the seam always runs along the longer axis.
    let vertical = bh >= bw;
    let (gw, gh) = if vertical { (bw, bh) } else { (bh, bw) };
    let to_canvas = |gx: usize, gy: usize| -> usize {
        if vertical {
            (y0 + gy) * width + x0 + gx
        } else {
            (y0 + gx) * width + x0 + gy
        }
    };
    let mut cost = vec![0.0f32; gw * gh];
    let mut allowed = vec![false; gw * gh];
    for gy in 0..gh {
        for gx in 0..gw {
            let p = to_canvas(gx, gy);
            if owner[p] == j as i32 && masks[k][p] != 0 {
                allowed[gy * gw + gx] = true;
                cost[gy * gw + gx] = (gray_at(&images[j], p) - gray_at(&images[k], p)).abs();
            }
        }
    }
    let path = vertical_seam(&cost, &allowed, gw, gh);
    // Which image lies on the high-coordinate side of the seam.
    let k_high = if vertical { ck.0 > cj.0 } else { ck.1 > cj.1 };
    for gy in 0..gh {
        let Some(sx) = path[gy] else {
            continue;
        };
        for gx in 0..gw {
            if !allowed[gy * gw + gx] {
                continue;
            }
            let high = gx >= sx;
            let p = to_canvas(gx, gy);
            owner[p] = if high == k_high { k as i32 } else { j as i32 };
        }
    }
}

fn bisect(masks: &[Vec<u8>], owner: &mut [i32], overlap: &[usize], j: usize, k: usize, width: usize, height: usize) {
    let dj = inside_distance(&masks[j], width, height);
    let dk = inside_distance(&masks[k], width, height);
    for &p in overlap {
        if dk[p] > dj[p] {
            owner[p] = k as i32;
        }
    }
}
