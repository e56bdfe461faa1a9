use super::ImageF32;

/// Normalized 1-D Gaussian kernel with radius `ceil(3σ)`.
pub fn gaussian_kernel(sigma: f32) -> Vec<f32> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let denom = 2.0 * (sigma as f64) * (sigma as f64);
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|v| (v / sum) as f32).collect()
}

/// Separable convolution with border replication, applied per channel.
pub fn convolve_separable(img: &ImageF32, kernel: &[f32]) -> ImageF32 {
    if kernel.len() == 1 {
        return img.clone();
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let r = (kernel.len() / 2) as isize;
    let src = img.data();
    let mut tmp = vec![0.0f32; src.len()];
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0f32;
                for (k, &kv) in kernel.iter().enumerate() {
                    let xx = (x as isize + k as isize - r).clamp(0, w as isize - 1) as usize;
                    acc += kv * src[(row + xx) * ch + c];
                }
                tmp[(row + x) * ch + c] = acc;
            }
        }
    }
    let mut out = vec![0.0f32; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0f32;
                for (k, &kv) in kernel.iter().enumerate() {
                    let yy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
                    acc += kv * tmp[(yy * w + x) * ch + c];
                }
                out[(y * w + x) * ch + c] = acc;
            }
        }
    }
    ImageF32::from_raw(w, h, ch, out)
}

pub fn gaussian_blur(img: &ImageF32, sigma: f32) -> ImageF32 {
    convolve_separable(img, &gaussian_kernel(sigma))
}

/// Bilinear resampling to `new_w x new_h` with pixel-center alignment.
pub fn resize_bilinear(img: &ImageF32, new_w: usize, new_h: usize) -> ImageF32 {
    let sx = img.width() as f32 / new_w as f32;
    let sy = img.height() as f32 / new_h as f32;
    let ch = img.channels();
    let mut out = Vec::with_capacity(new_w * new_h * ch);
    for y in 0..new_h {
        let fy = (y as f32 + 0.5) * sy - 0.5;
        for x in 0..new_w {
            let fx = (x as f32 + 0.5) * sx - 0.5;
            for c in 0..ch {
                out.push(img.sample_bilinear(fx, fy, c));
            }
        }
    }
    ImageF32::from_raw(new_w, new_h, ch, out)
}

/// Summed-area table over a single-channel image, `(w+1) x (h+1)` entries.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    sums: Vec<f64>,
}

impl IntegralImage {
    pub fn new(img: &ImageF32) -> Self {
        let (w, h) = (img.width(), img.height());
        let stride = w + 1;
        let mut sums = vec![0.0f64; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0.0f64;
            for x in 0..w {
                row += img.get(x, y, 0) as f64;
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self {
            width: w,
            height: h,
            sums,
        }
    }

    /// Mean over the inclusive rectangle `[x0, x1] x [y0, y1]`, clipped to the image.
    pub fn mean(&self, x0: isize, y0: isize, x1: isize, y1: isize) -> f32 {
        let x0 = x0.clamp(0, self.width as isize - 1) as usize;
        let y0 = y0.clamp(0, self.height as isize - 1) as usize;
        let x1 = x1.clamp(0, self.width as isize - 1) as usize;
        let y1 = y1.clamp(0, self.height as isize - 1) as usize;
        let stride = self.width + 1;
        let s = self.sums[(y1 + 1) * stride + x1 + 1] - self.sums[y0 * stride + x1 + 1]
            - self.sums[(y1 + 1) * stride + x0]
            + self.sums[y0 * stride + x0];
        (s / ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64) as f32
    }
}
