use thiserror::Error;

use super::filter::{gaussian_blur, resize_bilinear};
use super::ImageF32;

pub const MIN_LEVEL_SIZE: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum PyramidError {
    #[error("pyramid needs at least one level")]
    NoLevels,
    #[error("scale factor must be > 1, got {0}")]
    ScaleFactor(f32),
    #[error("level {level} would be {width}x{height}, below the {min}x{min} minimum", min = MIN_LEVEL_SIZE)]
    TooSmall {
        level: usize,
        width: usize,
        height: usize,
    },
}

/// Multi-scale image stack; level `k` is `floor(size_0 / scale^k)`.
#[derive(Debug, Clone)]
pub struct Pyramid {
    levels: Vec<ImageF32>,
    scale_factor: f32,
}

/// Dimensions of level `k` of a pyramid built from `width x height`.
pub fn level_size(width: usize, height: usize, scale_factor: f32, k: usize) -> (usize, usize) {
    let s = (scale_factor as f64).powi(k as i32);
    (
        (width as f64 / s).floor() as usize,
        (height as f64 / s).floor() as usize,
    )
}

/// Largest level count `<= wanted` whose smallest level is at least 8x8.
pub fn max_levels(width: usize, height: usize, scale_factor: f32, wanted: usize) -> usize {
    let mut n = 0;
    while n < wanted {
        let (w, h) = level_size(width, height, scale_factor, n);
        if w < MIN_LEVEL_SIZE || h < MIN_LEVEL_SIZE {
            break;
        }
        n += 1;
    }
    n
}

impl Pyramid {
    pub fn build(img: &ImageF32, levels: usize, scale_factor: f32) -> Result<Self, PyramidError> {
        if levels == 0 {
            return Err(PyramidError::NoLevels);
        }
        if !(scale_factor > 1.0) {
            return Err(PyramidError::ScaleFactor(scale_factor));
        }
        for k in 0..levels {
            let (width, height) = level_size(img.width(), img.height(), scale_factor, k);
            if width < MIN_LEVEL_SIZE || height < MIN_LEVEL_SIZE {
                return Err(PyramidError::TooSmall {
                    level: k,
                    width,
                    height,
                });
            }
        }
        let sigma = 0.8 * (scale_factor * scale_factor - 1.0).sqrt();
        let mut out = Vec::with_capacity(levels);
        out.push(img.clone());
        for k in 1..levels {
            let (w, h) = level_size(img.width(), img.height(), scale_factor, k);
            let blurred = gaussian_blur(&out[k - 1], sigma);
            out.push(resize_bilinear(&blurred, w, h));
        }
        Ok(Self {
            levels: out,
            scale_factor,
        })
    }

    pub fn levels(&self) -> &[ImageF32] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &ImageF32 {
        &self.levels[k]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn scale_factor(&self) -> f32 {
        self.scale_factor
    }

    /// Multiplier from level-`k` coordinates to level-0 coordinates.
    pub fn scale_of(&self, k: usize) -> f32 {
        self.scale_factor.powi(k as i32)
    }
}
