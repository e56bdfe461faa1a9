//! No-reference sharpness and quality metrics (Brenner gradient, entropy,
//! contrast) and reference PSNR, all on 8-bit grayscale.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::imagecore::ImageU8;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("brenner gradient needs extent >= 3 along the difference axis, got {0}")]
    TooNarrow(usize),
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize, usize), (usize, usize, usize)),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Horizontal,
    Vertical,
}

fn gray(img: &ImageU8) -> std::borrow::Cow<'_, ImageU8> {
    if img.channels() == 1 {
        std::borrow::Cow::Borrowed(img)
    } else {
        std::borrow::Cow::Owned(img.to_gray_u8())
    }
}

/// Sum and count of squared 2-pixel differences along `axis`.
pub fn brenner_sum(img: &ImageU8, axis: Axis) -> Result<(f64, usize), MetricsError> {
    let g = gray(img);
    let (w, h) = (g.width(), g.height());
    let (dx, dy) = match axis {
        Axis::Horizontal => (2, 0),
        Axis::Vertical => (0, 2),
    };
    let extent = if dx > 0 { w } else { h };
    if extent < 3 {
        return Err(MetricsError::TooNarrow(extent));
    }
    let mut sum = 0u64;
    for y in 0..h - dy {
        for x in 0..w - dx {
            let d = g.get(x + dx, y + dy, 0) as i64 - g.get(x, y, 0) as i64;
            sum += (d * d) as u64;
        }
    }
    Ok((sum as f64, (w - dx) * (h - dy)))
}

/// Mean of `(I(x+2, y) - I(x, y))²` over all valid positions.
pub fn brenner_gradient(img: &ImageU8) -> Result<f64, MetricsError> {
    let (s, n) = brenner_sum(img, Axis::Horizontal)?;
    Ok(s / n as f64)
}

fn histogram(img: &ImageU8) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in gray(img).data() {
        hist[v as usize] += 1;
    }
    hist
}

/// Shannon entropy in bits of the 256-bin histogram.
pub fn entropy(img: &ImageU8) -> f64 {
    let hist = histogram(img);
    let n: u64 = hist.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let e = -hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            p * p.log2()
        })
        .sum::<f64>();
    e.max(0.0)
}

/// Intensity range `max - min`.
pub fn contrast(img: &ImageU8) -> f64 {
    let g = gray(img);
    let (lo, hi) = g
        .data()
        .iter()
        .fold((u8::MAX, u8::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo > hi {
        0.0
    } else {
        (hi - lo) as f64
    }
}

/// `10 log10(255² / MSE)` over all samples; `f64::INFINITY` for identical inputs.
pub fn psnr(a: &ImageU8, b: &ImageU8) -> Result<f64, MetricsError> {
    let da = (a.width(), a.height(), a.channels());
    let db = (b.width(), b.height(), b.channels());
    if da != db {
        return Err(MetricsError::DimensionMismatch(da, db));
    }
    let se: u64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    if se == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = se as f64 / a.data().len() as f64;
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}

fn psnr_json<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(x) if x.is_infinite() => s.serialize_str("inf"),
        Some(x) => s.serialize_f64(*x),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub brenner_mean: f64,
    pub brenner_sum: f64,
    pub entropy: f64,
    pub contrast: f64,
    #[serde(serialize_with = "psnr_json", skip_serializing_if = "Option::is_none")]
    pub psnr: Option<f64>,
}

/// All metrics for `img`, with PSNR against `reference` when given.
pub fn evaluate(img: &ImageU8, reference: Option<&ImageU8>) -> Result<MetricsReport, MetricsError> {
    let (sum, n) = brenner_sum(img, Axis::Horizontal)?;
    let psnr = match reference {
        Some(r) => Some(psnr(img, r)?),
        None => None,
    };
    Ok(MetricsReport {
        brenner_mean: sum / n as f64,
        brenner_sum: sum,
        entropy: entropy(img),
        contrast: contrast(img),
        psnr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShiftRng;
    use proptest::prelude::*;

    fn gray_from(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> ImageU8 {
        ImageU8::from_fn(w, h, 1, |x, y, _| f(x, y)).unwrap()
    }

    fn brenner_oracle(img: &ImageU8) -> f64 {
        let mut terms = Vec::new();
        for y in 0..img.height() {
            for x in 0..img.width() - 2 {
                terms.push((img.get(x + 2, y, 0) as f64 - img.get(x, y, 0) as f64).powi(2));
            }
        }
        terms.iter().sum::<f64>() / terms.len() as f64
    }

    fn transpose(img: &ImageU8) -> ImageU8 {
        ImageU8::from_fn(img.height(), img.width(), img.channels(), |x, y, c| img.get(y, x, c)).unwrap()
    }

    #[test]
    fn brenner_examples() {
        assert_eq!(brenner_gradient(&gray_from(9, 4, |_, _| 77)).unwrap(), 0.0);
        // Step at column 5 of a 10-wide image: pairs (3,5) and (4,6) straddle it.
        let step = gray_from(10, 6, |x, _| if x >= 5 { 255 } else { 0 });
        let expected = 2.0 * 255.0f64.powi(2) * 6.0 / (8.0 * 6.0);
        assert_eq!(brenner_gradient(&step).unwrap(), expected);
        assert_eq!(brenner_gradient(&step).unwrap(), brenner_oracle(&step));
        // Alternating columns repeat with period 2, so every 2-shift difference is 0.
        let alt = gray_from(12, 5, |x, _| if x % 2 == 0 { 0 } else { 255 });
        assert_eq!(brenner_gradient(&alt).unwrap(), brenner_oracle(&alt));
        assert_eq!(brenner_gradient(&alt).unwrap(), 0.0);
        assert_eq!(brenner_gradient(&gray_from(2, 5, |_, _| 0)), Err(MetricsError::TooNarrow(2)));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&gray_from(7, 3, |_, _| 9)), 0.0);
        assert_eq!(entropy(&gray_from(256, 2, |x, _| x as u8)), 8.0);
        assert_eq!(entropy(&gray_from(4, 4, |x, _| if x < 2 { 0 } else { 200 })), 1.0);
    }

    #[test]
    fn contrast_examples() {
        assert_eq!(contrast(&gray_from(5, 5, |_, _| 3)), 0.0);
        assert_eq!(contrast(&gray_from(5, 5, |x, y| if (x, y) == (0, 0) { 0 } else if x == 4 { 255 } else { 90 })), 255.0);
        assert_eq!(contrast(&gray_from(101, 1, |x, _| 10 + x as u8)), 100.0);
    }

    #[test]
    fn psnr_examples() {
        let a = gray_from(4, 4, |x, y| (x * 16 + y) as u8);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let black = gray_from(3, 3, |_, _| 0);
        let white = gray_from(3, 3, |_, _| 255);
        assert_eq!(psnr(&black, &white).unwrap(), 0.0);
        let p = psnr(&gray_from(1, 1, |_, _| 0), &gray_from(1, 1, |_, _| 16)).unwrap();
        assert!((p - 10.0 * (65025.0f64 / 256.0).log10()).abs() < 1e-12);
        assert!((p - 24.05).abs() < 0.005, "{p}");
        assert!(psnr(&black, &a).is_err());
    }

    #[test]
    fn report_json() {
        let a = gray_from(8, 8, |x, _| (x * 30) as u8);
        let r = evaluate(&a, Some(&a)).unwrap();
        let j = serde_json::to_value(r).unwrap();
        assert_eq!(j["psnr"], "inf");
        assert_eq!(j["contrast"], 210.0);
        let r = evaluate(&a, None).unwrap();
        assert!(serde_json::to_value(r).unwrap().get("psnr").is_none());
    }

    #[test]
    fn blur_lowers_brenner() {
        let mut lower = 0;
        for seed in 0..40 {
            let sharp = crate::synthetic::textured_rgb(96, 72, seed).to_gray_u8();
            let sigma = 1.0 + (seed % 3) as f32;
            let blurred = crate::imagecore::gaussian_blur(&sharp.to_f32(), sigma).to_u8();
            if brenner_gradient(&blurred).unwrap() <= brenner_gradient(&sharp).unwrap() {
                lower += 1;
            }
        }
        assert!(lower >= 38, "{lower}/40");
    }

    proptest! {
        #[test]
        fn bounds_and_transpose(w in 3usize..20, h in 3usize..20, seed in any::<u64>()) {
            let mut rng = XorShiftRng::seed_from_u64(seed);
            let img = gray_from(w, h, |_, _| 0).data().iter().map(|_| rng.below(256) as u8).collect::<Vec<_>>();
            let img = ImageU8::new(w, h, 1, img).unwrap();
            let e = entropy(&img);
            prop_assert!((0.0..=8.0).contains(&e));
            prop_assert!(contrast(&img) >= 0.0);
            prop_assert!(brenner_gradient(&img).unwrap() >= 0.0);
            prop_assert!((brenner_gradient(&img).unwrap() - brenner_oracle(&img)).abs() < 1e-9);
            let t = transpose(&img);
            prop_assert_eq!(brenner_sum(&img, Axis::Horizontal).unwrap(), brenner_sum(&t, Axis::Vertical).unwrap());
            prop_assert_eq!(entropy(&t), e);
            prop_assert_eq!(contrast(&t), contrast(&img));
        }

        #[test]
        fn entropy_permutation_invariant(seed in any::<u64>()) {
            let mut rng = XorShiftRng::seed_from_u64(seed);
            let mut data: Vec<u8> = (0..200).map(|_| rng.below(40) as u8).collect();
            let a = ImageU8::new(20, 10, 1, data.clone()).unwrap();
            for i in (1..data.len()).rev() {
                data.swap(i, rng.below(i + 1));
            }
            let b = ImageU8::new(10, 20, 1, data).unwrap();
            prop_assert_eq!(entropy(&a), entropy(&b));
        }
    }
}
