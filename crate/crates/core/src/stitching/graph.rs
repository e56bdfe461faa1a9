use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StitchError;
use crate::features::{detect_and_describe, BinaryDescriptor, DescriptorKind, DetectorConfig, Keypoint};
use crate::geometry::Homography;
use crate::imagecore::{to_grayscale, ImageU8};
use crate::matching::{filter_gms, filter_ransac_homography, match_bruteforce, GmsParams, Match, RansacParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegistrationConfig {
    pub keypoints: usize,
    pub descriptor: DescriptorKind,
    pub gms: GmsParams,
    pub ransac: RansacParams,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        Self {
            keypoints: 5000,
            descriptor: DescriptorKind::Freak,
            gms: GmsParams::default(),
            ransac: RansacParams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImageFeatures {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<BinaryDescriptor>,
    pub size: (usize, usize),
}

pub fn extract_features(img: &ImageU8, cfg: &RegistrationConfig) -> ImageFeatures {
    let det = DetectorConfig {
        max_keypoints: cfg.keypoints,
        ..DetectorConfig::default()
    };
    let d = detect_and_describe(&to_grayscale(img), &det, cfg.descriptor);
    ImageFeatures {
        keypoints: d.keypoints,
        descriptors: d.descriptors,
        size: (img.width(), img.height()),
    }
}

/// Verified pairwise registration; `h_ab` maps pixels of `a` into `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub h_ab: Homography,
    pub inliers: usize,
    pub matches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDiagnostics {
    pub a: usize,
    pub b: usize,
    pub raw_matches: usize,
    pub gms_matches: usize,
    pub inliers: usize,
    pub accepted: bool,
    #[serde(skip)]
    pub survivors: Vec<Match>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanoGraph {
    pub nodes: usize,
    pub edges: Vec<Edge>,
    pub pairs: Vec<PairDiagnostics>,
}

/// `inliers > 8 + 0.3 · matches`.
pub fn verify_pair(inliers: usize, matches: usize) -> bool {
    inliers as f64 > 8.0 + 0.3 * matches as f64
}

impl PanoGraph {
    /// Connected components, largest first; ties by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.nodes).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut index_of = vec![usize::MAX; self.nodes];
        for v in 0..self.nodes {
            let r = find(&mut parent, v);
            if index_of[r] == usize::MAX {
                index_of[r] = comps.len();
                comps.push(Vec::new());
            }
            comps[index_of[r]].push(v);
        }
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        comps
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| (e.a, e.b) == (a, b) || (e.a, e.b) == (b, a))
    }
}

/// Match, GMS-filter and fit one pair. The homography is RANSAC on the
/// GMS survivors followed by a DLT refit on the inliers.
pub fn register_pair(a: usize, b: usize, fa: &ImageFeatures, fb: &ImageFeatures, cfg: &RegistrationConfig) -> (PairDiagnostics, Option<Edge>) {
    let mut diag = PairDiagnostics {
        a,
        b,
        raw_matches: 0,
        gms_matches: 0,
        inliers: 0,
        accepted: false,
        survivors: Vec::new(),
    };
    let Ok(raw) = match_bruteforce(&fa.descriptors, &fb.descriptors) else {
        return (diag, None);
    };
    diag.raw_matches = raw.len();
    let Ok(gms) = filter_gms(&raw, &fa.keypoints, &fb.keypoints, fa.size, fb.size, &cfg.gms) else {
        return (diag, None);
    };
    if gms.degenerate {
        return (diag, None);
    }
    diag.gms_matches = gms.matches.len();
    diag.survivors = gms.matches;
    let Ok(fit) = filter_ransac_homography(&diag.survivors, &fa.keypoints, &fb.keypoints, &cfg.ransac) else {
        return (diag, None);
    };
    diag.inliers = fit.matches.len();
    diag.accepted = verify_pair(diag.inliers, diag.gms_matches);
    let edge = diag.accepted.then(|| Edge {
        a,
        b,
        h_ab: fit.homography,
        inliers: diag.inliers,
        matches: diag.gms_matches,
    });
    (diag, edge)
}

pub fn build_pano_graph(images: &[ImageU8], cfg: &RegistrationConfig) -> Result<(PanoGraph, Vec<ImageFeatures>), StitchError> {
    if images.len() < 2 {
        return Err(StitchError::TooFewImages(images.len()));
    }
    let features: Vec<ImageFeatures> = images.par_iter().map(|img| extract_features(img, cfg)).collect();
    let pairs: Vec<(usize, usize)> = (0..images.len())
        .flat_map(|a| (a + 1..images.len()).map(move |b| (a, b)))
        .collect();
    let results: Vec<(PairDiagnostics, Option<Edge>)> = pairs
        .par_iter()
        .map(|&(a, b)| register_pair(a, b, &features[a], &features[b], cfg))
        .collect();
    let mut graph = PanoGraph {
        nodes: images.len(),
        edges: Vec::new(),
        pairs: Vec::new(),
    };
    for (diag, edge) in results {
        log::debug!(
            "pair {}-{}: raw {} gms {} inliers {} accepted {}",
            diag.a,
            diag.b,
            diag.raw_matches,
            diag.gms_matches,
            diag.inliers,
            diag.accepted
        );
        graph.pairs.push(diag);
        graph.edges.extend(edge);
    }
    if graph.components()[0].len() < 2 {
        return Err(StitchError::NoConnectedComponent {
            pairs: graph.pairs.clone(),
        });
    }
    Ok((graph, features))
}
