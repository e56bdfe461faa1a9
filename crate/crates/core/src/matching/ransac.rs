use serde::{Deserialize, Serialize};

use super::{check_indices, Match, MatchError};
use crate::features::Keypoint;
use crate::geometry::{estimate_homography_dlt, Homography};
use crate::rng::XorShiftRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RansacParams {
    pub confidence: f64,
    /// Inlier threshold in pixels on the symmetric transfer error.
    pub reproj_threshold: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            confidence: 0.99,
            reproj_threshold: 5.0,
            max_iterations: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacOutcome {
    pub matches: Vec<Match>,
    pub homography: Homography,
    pub iterations: usize,
}

/// `d(H a, b)² + d(a, H⁻¹ b)²`, or infinity when either side maps to
/// the line at infinity.
pub fn symmetric_transfer_error_sq(h: &Homography, h_inv: &Homography, a: (f64, f64), b: (f64, f64)) -> f64 {
    match (h.transfer(a.0, a.1), h_inv.transfer(b.0, b.1)) {
        (Ok(fa), Ok(bb)) => {
            (fa.0 - b.0).powi(2) + (fa.1 - b.1).powi(2) + (bb.0 - a.0).powi(2) + (bb.1 - a.1).powi(2)
        }
        _ => f64::INFINITY,
    }
}

fn collinear(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> bool {
    let cross = (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
    let scale = ((q.0 - p.0).hypot(q.1 - p.1) * (r.0 - p.0).hypot(r.1 - p.1)).max(1e-12);
    cross.abs() <= 1e-6 * scale
}

fn sample_degenerate(pts: &[(f64, f64)]) -> bool {
    const TRIPLES: [(usize, usize, usize); 4] = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];
    TRIPLES
        .iter()
        .any(|&(i, j, k)| collinear(pts[i], pts[j], pts[k]))
}

fn required_iterations(confidence: f64, inlier_ratio: f64, cap: usize) -> usize {
    let w4 = inlier_ratio.powi(4);
    if w4 >= 1.0 {
        return 1;
    }
    if w4 <= 0.0 {
        return cap;
    }
    let n = (1.0 - confidence).ln() / (1.0 - w4).ln();
    if n.is_finite() {
        (n.ceil().max(1.0) as usize).min(cap)
    } else {
        cap
    }
}

/// Four-point RANSAC over homographies with an adaptive iteration count.
///
/// Samples are drawn with `XorShiftRng::seed_from_u64(seed)` (xorshift64*
/// seeded through splitmix64), four distinct indices per iteration via
/// `sample_distinct`. The returned homography is a DLT refit on the inliers
/// of the best hypothesis; returned matches keep input order.
pub fn filter_ransac_homography(
    matches: &[Match],
    kps_a: &[Keypoint],
    kps_b: &[Keypoint],
    params: &RansacParams,
) -> Result<RansacOutcome, MatchError> {
    if !(params.confidence > 0.0 && params.confidence < 1.0) {
        return Err(MatchError::InvalidParams("confidence must be in (0, 1)".into()));
    }
    if !(params.reproj_threshold > 0.0) {
        return Err(MatchError::InvalidParams("threshold must be positive".into()));
    }
    if matches.len() < 4 {
        return Err(MatchError::TooFewMatches {
            needed: 4,
            got: matches.len(),
        });
    }
    check_indices(matches, kps_a.len(), kps_b.len())?;
    let pa: Vec<(f64, f64)> = matches
        .iter()
        .map(|m| (kps_a[m.query_idx].x as f64, kps_a[m.query_idx].y as f64))
        .collect();
    let pb: Vec<(f64, f64)> = matches
        .iter()
        .map(|m| (kps_b[m.train_idx].x as f64, kps_b[m.train_idx].y as f64))
        .collect();
    let n = matches.len();
    let t2 = params.reproj_threshold * params.reproj_threshold;
    let cap = params.max_iterations.max(1);

    let mut rng = XorShiftRng::seed_from_u64(params.seed);
    let mut idx = Vec::with_capacity(4);
    let mut best: Option<(usize, Vec<bool>, Homography)> = None;
    let mut needed = cap;
    let mut iter = 0;
    let mut mask = vec![false; n];
    while iter < needed {
        iter += 1;
        rng.sample_distinct(n, 4, &mut idx);
        let sa: Vec<_> = idx.iter().map(|&i| pa[i]).collect();
        let sb: Vec<_> = idx.iter().map(|&i| pb[i]).collect();
        if sample_degenerate(&sa) || sample_degenerate(&sb) {
            continue;
        }
        let Ok(h) = estimate_homography_dlt(&sa, &sb) else {
            continue;
        };
        let h_inv = h.inverse();
        let mut count = 0;
        for k in 0..n {
            mask[k] = symmetric_transfer_error_sq(&h, &h_inv, pa[k], pb[k]) < t2;
            count += mask[k] as usize;
        }
        if best.as_ref().map_or(true, |b| count > b.0) {
            needed = required_iterations(params.confidence, count as f64 / n as f64, cap).max(iter);
            best = Some((count, mask.clone(), h));
        }
    }

    let (count, mask, h) = best.ok_or(MatchError::NoConsensus)?;
    if count < 4 {
        return Err(MatchError::NoConsensus);
    }
    let ia: Vec<_> = (0..n).filter(|&k| mask[k]).map(|k| pa[k]).collect();
    let ib: Vec<_> = (0..n).filter(|&k| mask[k]).map(|k| pb[k]).collect();
    let homography = estimate_homography_dlt(&ia, &ib).unwrap_or(h);
    Ok(RansacOutcome {
        matches: matches
            .iter()
            .zip(&mask)
            .filter(|(_, &keep)| keep)
            .map(|(m, _)| *m)
            .collect(),
        homography,
        iterations: iter,
    })
}
