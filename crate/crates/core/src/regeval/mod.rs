//! Registration evaluation: run a detector/descriptor/filter pipeline on
//! image pairs with known homographies and score the correct-match rate
//! `A_match = 100 · correct / matches`.

mod dataset;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::features::{detect_and_describe, DescriptorKind, DetectorConfig, Keypoint};
use crate::geometry::Homography;
use crate::imagecore::{to_grayscale, ImageU8};
use crate::matching::{filter_gms, filter_ransac_homography, match_bruteforce, GmsParams, Match, MatchError, RansacParams};

pub use dataset::{synthetic_sequence, EvalSequence, SequenceError, SyntheticWarp};

pub const DEFAULT_KEYPOINTS: usize = 5000;
pub const DEFAULT_THRESHOLD_PX: f64 = 5.0;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    None,
    Gms,
    Ransac,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub keypoints: usize,
    pub descriptor: DescriptorKind,
    pub filter: FilterKind,
    /// Correctness threshold in pixels.
    pub threshold_px: f64,
    pub gms: GmsParams,
    pub ransac: RansacParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            keypoints: DEFAULT_KEYPOINTS,
            descriptor: DescriptorKind::Freak,
            filter: FilterKind::Gms,
            threshold_px: DEFAULT_THRESHOLD_PX,
            gms: GmsParams::default(),
            ransac: RansacParams {
                confidence: DEFAULT_CONFIDENCE,
                reproj_threshold: DEFAULT_THRESHOLD_PX,
                ..RansacParams::default()
            },
        }
    }
}

impl PipelineConfig {
    pub fn with(descriptor: DescriptorKind, filter: FilterKind) -> Self {
        Self {
            descriptor,
            filter,
            ..Self::default()
        }
    }

    /// Row label in the comparison table.
    pub fn label(&self) -> String {
        match (self.descriptor, self.filter) {
            (DescriptorKind::Freak, FilterKind::Gms) => "ours".into(),
            (DescriptorKind::Brief, FilterKind::Gms) => "ORB+GMS".into(),
            (DescriptorKind::Brief, FilterKind::Ransac) => "ORB+RANSAC".into(),
            (DescriptorKind::Freak, FilterKind::Ransac) => "ORB+FREAK+RANSAC".into(),
            (DescriptorKind::Brief, FilterKind::None) => "ORB".into(),
            (DescriptorKind::Freak, FilterKind::None) => "ORB+FREAK".into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// Number of matches whose ground-truth transfer lands within `threshold`
/// pixels of the matched keypoint. Points mapped to infinity are wrong.
pub fn count_correct(matches: &[Match], kps_a: &[Keypoint], kps_b: &[Keypoint], h_true: &Homography, threshold: f64) -> usize {
    matches
        .iter()
        .filter(|m| {
            let a = &kps_a[m.query_idx];
            let b = &kps_b[m.train_idx];
            match h_true.transfer(a.x as f64, a.y as f64) {
                Ok((x, y)) => (x - b.x as f64).hypot(y - b.y as f64) < threshold,
                Err(_) => false,
            }
        })
        .count()
}

fn a_match_json<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("n/a"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub pair: String,
    /// Matches surviving the filter.
    pub matches: usize,
    pub correct: usize,
    /// Undefined when no match survived.
    #[serde(serialize_with = "a_match_json")]
    pub a_match: Option<f64>,
    /// Brute-force matches before filtering.
    pub raw_matches: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PairReport {
    fn from_counts(pair: String, matches: usize, correct: usize, raw: usize) -> Self {
        Self {
            pair,
            matches,
            correct,
            a_match: (matches > 0).then(|| 100.0 * correct as f64 / matches as f64),
            raw_matches: raw,
            error: None,
        }
    }

    fn failed(pair: String, raw: usize, err: String) -> Self {
        Self {
            pair,
            matches: 0,
            correct: 0,
            a_match: None,
            raw_matches: raw,
            error: Some(err),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub sequence: String,
    pub pipeline: String,
    pub config: PipelineConfig,
    pub pairs: Vec<PairReport>,
    #[serde(serialize_with = "a_match_json")]
    pub average: Option<f64>,
    pub excluded_pairs: usize,
}

struct Features {
    keypoints: Vec<Keypoint>,
    descriptors: Vec<crate::features::BinaryDescriptor>,
    size: (usize, usize),
}

fn extract(img: &ImageU8, cfg: &PipelineConfig) -> Features {
    let gray = to_grayscale(img);
    let det = DetectorConfig {
        max_keypoints: cfg.keypoints,
        ..DetectorConfig::default()
    };
    let d = detect_and_describe(&gray, &det, cfg.descriptor);
    Features {
        keypoints: d.keypoints,
        descriptors: d.descriptors,
        size: (img.width(), img.height()),
    }
}

fn evaluate_features(pair: String, fa: &Features, fb: &Features, h_true: &Homography, cfg: &PipelineConfig) -> PairReport {
    if fa.descriptors.is_empty() || fb.descriptors.is_empty() {
        return PairReport::from_counts(pair, 0, 0, 0);
    }
    let raw = match match_bruteforce(&fa.descriptors, &fb.descriptors) {
        Ok(m) => m,
        Err(e) => return PairReport::failed(pair, 0, e.to_string()),
    };
    let filtered = match cfg.filter {
        FilterKind::None => Ok(raw.clone()),
        FilterKind::Gms => filter_gms(&raw, &fa.keypoints, &fb.keypoints, fa.size, fb.size, &cfg.gms).map(|o| o.matches),
        FilterKind::Ransac => filter_ransac_homography(&raw, &fa.keypoints, &fb.keypoints, &cfg.ransac).map(|o| o.matches),
    };
    match filtered {
        Ok(m) => {
            let correct = count_correct(&m, &fa.keypoints, &fb.keypoints, h_true, cfg.threshold_px);
            PairReport::from_counts(pair, m.len(), correct, raw.len())
        }
        // RANSAC finding no model means nothing survived the filter.
        Err(MatchError::NoConsensus) | Err(MatchError::TooFewMatches { .. }) => {
            PairReport::from_counts(pair, 0, 0, raw.len())
        }
        Err(e) => PairReport::failed(pair, raw.len(), e.to_string()),
    }
}

pub fn evaluate_pair(img_a: &ImageU8, img_b: &ImageU8, h_true: &Homography, cfg: &PipelineConfig) -> PairReport {
    let fa = extract(img_a, cfg);
    let fb = extract(img_b, cfg);
    evaluate_features("1-2".into(), &fa, &fb, h_true, cfg)
}

/// Mean of the defined values and the number of undefined ones.
pub fn average_defined(values: impl IntoIterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let (mut sum, mut n, mut excluded) = (0.0, 0usize, 0usize);
    for v in values {
        match v {
            Some(x) => {
                sum += x;
                n += 1;
            }
            None => excluded += 1,
        }
    }
    ((n > 0).then(|| sum / n as f64), excluded)
}

pub fn evaluate_sequence(seq: &EvalSequence, cfg: &PipelineConfig) -> EvalReport {
    let base = extract(&seq.base, cfg);
    let pairs: Vec<PairReport> = seq
        .deformed
        .par_iter()
        .zip(&seq.ground_truth)
        .enumerate()
        .map(|(k, (img, h))| {
            let f = extract(img, cfg);
            evaluate_features(format!("1-{}", k + 2), &base, &f, h, cfg)
        })
        .collect();
    let (average, excluded_pairs) = average_defined(pairs.iter().map(|p| p.a_match));
    EvalReport {
        sequence: seq.name.clone(),
        pipeline: cfg.label(),
        config: *cfg,
        pairs,
        average,
        excluded_pairs,
    }
}

fn fmt_a(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"))
}

/// Plain-text table: one row per report, one column per pair plus the average.
pub fn format_table(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    let Some(first) = reports.first() else {
        return out;
    };
    let _ = write!(out, "{:<12} {:<18}", "sequence", "method");
    for p in &first.pairs {
        let _ = write!(out, " {:>8}", p.pair);
    }
    let _ = writeln!(out, " {:>8}", "Average");
    for r in reports {
        let _ = write!(out, "{:<12} {:<18}", r.sequence, r.pipeline);
        for p in &r.pairs {
            let _ = write!(out, " {:>8}", fmt_a(p.a_match));
        }
        let _ = writeln!(out, " {:>8}", fmt_a(r.average));
    }
    out
}
