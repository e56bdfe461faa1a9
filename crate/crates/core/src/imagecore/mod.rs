//! Image containers, filtering, pyramids and file I/O.

pub mod filter;
mod image;
pub mod io;
mod pyramid;

pub use filter::{gaussian_blur, resize_bilinear, IntegralImage};
pub use image::{gray_f32, to_grayscale, ImageError, ImageF32, ImageU8};
pub use io::{read_image, write_image, ImageFormat, ImageIoError};
pub use pyramid::{level_size, max_levels, Pyramid, PyramidError, MIN_LEVEL_SIZE};

/// Builds a pyramid from `img` (see [`Pyramid::build`]).
pub fn build_pyramid(img: &ImageF32, levels: usize, scale_factor: f32) -> Result<Pyramid, PyramidError> {
    Pyramid::build(img, levels, scale_factor)
}
