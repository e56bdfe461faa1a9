use serde::Serialize;

use crate::imagecore::ImageF32;

pub const SIGMA_N: f64 = 10.0 / 255.0;
pub const SIGMA_G: f64 = 0.1;
pub const GAIN_MIN: f64 = 0.5;
pub const GAIN_MAX: f64 = 2.0;

/// Pairwise overlap statistics: `count[i*n+j]` pixels seen by both `i` and
/// `j`, and `mean[i*n+j]` the mean intensity of image `i` over them.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapStats {
    pub n: usize,
    pub count: Vec<f64>,
    pub mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainMap {
    pub gains: Vec<f64>,
    /// Images whose solved gain fell outside `[0.5, 2]`.
    pub clamped: Vec<usize>,
}

fn intensity(img: &ImageF32, p: usize) -> f64 {
    let ch = img.channels();
    let d = &img.data()[p * ch..(p + 1) * ch];
    if ch >= 3 {
        0.299 * d[0] as f64 + 0.587 * d[1] as f64 + 0.114 * d[2] as f64
    } else {
        d[0] as f64
    }
}

/// Statistics over same-size canvas rasters with their validity masks.
pub fn overlap_stats(images: &[ImageF32], masks: &[Vec<u8>]) -> OverlapStats {
    let n = images.len();
    let mut count = vec![0.0; n * n];
    let mut sum = vec![0.0; n * n];
    if let Some(first) = images.first() {
        let pixels = first.width() * first.height();
        let mut present = Vec::with_capacity(n);
        for p in 0..pixels {
            present.clear();
            present.extend((0..n).filter(|&i| masks[i][p] != 0));
            if present.len() < 2 {
                continue;
            }
            for &i in &present {
                let v = intensity(&images[i], p);
                for &j in &present {
                    if i != j {
                        count[i * n + j] += 1.0;
                        sum[i * n + j] += v;
                    }
                }
            }
        }
    }
    let mean = sum
        .iter()
        .zip(&count)
        .map(|(s, c)| if *c > 0.0 { s / c } else { 0.0 })
        .collect();
    OverlapStats { n, count, mean }
}

/// `Σ_{i≠j} N_ij ((g_i Ī_ij − g_j Ī_ji)² / σ_N² + (1 − g_i)² / σ_g²)`.
pub fn gain_objective(stats: &OverlapStats, gains: &[f64]) -> f64 {
    let n = stats.n;
    let mut e = 0.0;
    for i in 0..n {
        for j in 0..n {
            let c = stats.count[i * n + j];
            if i == j || c == 0.0 {
                continue;
            }
            let d = gains[i] * stats.mean[i * n + j] - gains[j] * stats.mean[j * n + i];
            e += c * (d * d / (SIGMA_N * SIGMA_N) + (1.0 - gains[i]).powi(2) / (SIGMA_G * SIGMA_G));
        }
    }
    e
}

fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    Some(x)
}

/// Minimizes [`gain_objective`] through its normal equations. Images with
/// no overlap keep gain 1; solved gains are clamped to `[0.5, 2]`.
pub fn compensate_gains(stats: &OverlapStats) -> GainMap {
    let n = stats.n;
    let inv_n2 = 1.0 / (SIGMA_N * SIGMA_N);
    let inv_g2 = 1.0 / (SIGMA_G * SIGMA_G);
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for k in 0..n {
        let mut any = false;
        for j in 0..n {
            let c = stats.count[k * n + j];
            if j == k || c == 0.0 {
                continue;
            }
            any = true;
            let akj = stats.mean[k * n + j];
            let ajk = stats.mean[j * n + k];
            a[k * n + k] += c * (2.0 * akj * akj * inv_n2 + inv_g2);
            a[k * n + j] -= c * 2.0 * akj * ajk * inv_n2;
            b[k] += c * inv_g2;
        }
        if !any {
            a[k * n + k] = 1.0;
            b[k] = 1.0;
        }
    }
    let mut gains = solve(a, b, n).unwrap_or_else(|| vec![1.0; n]);
    let mut clamped = Vec::new();
    for (i, g) in gains.iter_mut().enumerate() {
        if !(*g >= GAIN_MIN && *g <= GAIN_MAX) {
            log::warn!("gain of image {i} clamped from {g}");
            clamped.push(i);
            *g = if g.is_nan() { 1.0 } else { g.clamp(GAIN_MIN, GAIN_MAX) };
        }
    }
    GainMap { gains, clamped }
}
