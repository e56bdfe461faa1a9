//! Planar homographies: representation, estimation and image warping.

mod dlt;
pub mod eigen;
mod homography;
mod warp;

use thiserror::Error;

pub use dlt::estimate_homography_dlt;
pub use homography::Homography;
pub use warp::{warp_image, Rect, Warped};

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("homography is singular")]
    Singular,
    #[error("homography has non-finite entries")]
    NonFinite,
    #[error("point maps to infinity")]
    PointAtInfinity,
    #[error("degenerate point configuration")]
    Degenerate,
    #[error("need at least 4 correspondences, got {0}")]
    TooFewPoints(usize),
    #[error("point lists differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("cannot parse homography: {0}")]
    Parse(String),
}
