//! Fisheye panorama toolkit: lens undistortion, ORB/FREAK/GMS registration
//! with a RANSAC baseline, homography-based registration scoring, panorama
//! stitching, no-reference sharpness metrics and a forward-only
//! attention-gated NAFNet.

pub mod anafnet;
pub mod deblurmetrics;
pub mod features;
pub mod geometry;
pub mod imagecore;
pub mod matching;
pub mod regeval;
pub mod rng;
pub mod stitching;
pub mod synthetic;
pub mod undistort;

pub use geometry::{estimate_homography_dlt, Homography};
pub use imagecore::{ImageF32, ImageU8};
