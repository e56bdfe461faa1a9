//! Descriptor matching and match filtering: brute-force Hamming nearest
//! neighbour, grid-based motion statistics (GMS) and a RANSAC homography
//! baseline.

mod bruteforce;
pub mod csv;
mod gms;
mod ransac;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bruteforce::match_bruteforce;
pub use gms::{filter_gms, gms_cell_scores, CellScore, GmsOutcome, GmsParams};
pub use ransac::{filter_ransac_homography, symmetric_transfer_error_sq, RansacOutcome, RansacParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Match {
    pub query_idx: usize,
    pub train_idx: usize,
    pub distance: u32,
}

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("descriptor list is empty")]
    Empty,
    #[error("descriptor lengths differ ({0} vs {1} bits)")]
    MixedLengths(usize, usize),
    #[error("need at least {needed} matches, got {got}")]
    TooFewMatches { needed: usize, got: usize },
    #[error("no homography reached 4 inliers")]
    NoConsensus,
    #[error("match {0} references a keypoint out of range")]
    IndexOutOfRange(usize),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("malformed match csv: {0}")]
    Csv(String),
}

pub(crate) fn check_indices(
    matches: &[Match],
    n_a: usize,
    n_b: usize,
) -> Result<(), MatchError> {
    match matches
        .iter()
        .position(|m| m.query_idx >= n_a || m.train_idx >= n_b)
    {
        Some(i) => Err(MatchError::IndexOutOfRange(i)),
        None => Ok(()),
    }
}
