//! Multi-image panorama: pairwise OFG registration, match verification,
//! homography chaining, gain compensation, DP seams and multi-band blending.

pub mod align;
pub mod blend;
pub mod debug;
pub mod gain;
pub mod graph;
pub mod seam;

pub use align::{global_align, pick_reference, Alignment};
pub use blend::{blend_multiband, effective_bands, feather_blend, FEATHER_SIGMA};
pub use debug::draw_matches;
pub use gain::{compensate_gains, gain_objective, overlap_stats, GainMap, OverlapStats};
pub use graph::{
    build_pano_graph, extract_features, register_pair, verify_pair, Edge, ImageFeatures, PairDiagnostics, PanoGraph,
    RegistrationConfig,
};
pub use seam::{find_seams, SeamMask};

use thiserror::Error;

use crate::geometry::{warp_image, Homography, Rect};
use crate::imagecore::{ImageF32, ImageU8};
use crate::undistort::{undistort_image, CameraModel, UndistortError};

pub const DEFAULT_BANDS: usize = 5;

#[derive(Debug, Error)]
pub enum StitchError {
    #[error("stitching needs at least 2 images, got {0}")]
    TooFewImages(usize),
    #[error("no connected component of size >= 2 ({} pairs tried, none verified)", pairs.len())]
    NoConnectedComponent { pairs: Vec<PairDiagnostics> },
    #[error("{stage}: {msg}")]
    Stage { stage: &'static str, msg: String },
    #[error("align: canvas {0}x{1} exceeds the size budget")]
    CanvasTooLarge(usize, usize),
    #[error("undistort: {0}")]
    Undistort(#[from] UndistortError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StitchConfig {
    pub registration: RegistrationConfig,
    pub bands: usize,
    pub camera: Option<CameraModel>,
    /// Reference image; defaults to the best-connected node of the kept component.
    pub reference: Option<usize>,
}

impl Default for StitchConfig {
    fn default() -> Self {
        Self {
            registration: RegistrationConfig::default(),
            bands: DEFAULT_BANDS,
            camera: None,
            reference: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Panorama {
    pub image: ImageU8,
    pub graph: PanoGraph,
    pub alignment: Alignment,
    /// Gains indexed like `alignment.members`.
    pub gains: GainMap,
    /// Owners are positions in `alignment.members`.
    pub seams: SeamMask,
    /// Images outside the stitched component.
    pub dropped: Vec<usize>,
    pub features: Vec<ImageFeatures>,
}

fn to_rgb(img: ImageU8) -> ImageU8 {
    if img.channels() == 3 {
        return img;
    }
    let data = img.data().iter().flat_map(|&v| [v, v, v]).collect();
    ImageU8::new(img.width(), img.height(), 3, data).expect("same size")
}

fn single(image: ImageU8) -> Panorama {
    let (w, h) = (image.width(), image.height());
    Panorama {
        graph: PanoGraph {
            nodes: 1,
            edges: Vec::new(),
            pairs: Vec::new(),
        },
        alignment: Alignment {
            reference: 0,
            members: vec![0],
            transforms: vec![Some(Homography::identity())],
            canvas: Rect::new(0, 0, w, h),
        },
        gains: GainMap {
            gains: vec![1.0],
            clamped: Vec::new(),
        },
        seams: SeamMask {
            width: w,
            height: h,
            owner: vec![0; w * h],
        },
        dropped: Vec::new(),
        features: Vec::new(),
        image,
    }
}

/// Full pipeline. One image comes back unchanged (after undistortion when a
/// camera is configured). Only the largest verified component is stitched;
/// the rest are listed in `dropped` and logged.
pub fn stitch(images: &[ImageU8], cfg: &StitchConfig) -> Result<Panorama, StitchError> {
    let mut prepared = Vec::with_capacity(images.len());
    for img in images {
        let img = match &cfg.camera {
            Some(cam) => {
                let (out, stats) = undistort_image(cam, img)?;
                if stats.nonconverged + stats.out_of_source > 0 {
                    log::debug!(
                        "undistort: {} non-converged, {} outside source",
                        stats.nonconverged,
                        stats.out_of_source
                    );
                }
                out
            }
            None => img.clone(),
        };
        prepared.push(img);
    }
    match prepared.len() {
        0 => return Err(StitchError::TooFewImages(0)),
        1 => return Ok(single(prepared.pop().expect("one image"))),
        _ => {}
    }

    let (graph, features) = build_pano_graph(&prepared, &cfg.registration)?;
    let components = graph.components();
    let main = components[0].clone();
    let dropped: Vec<usize> = components[1..].iter().flatten().copied().collect();
    if !dropped.is_empty() {
        log::warn!(
            "images {dropped:?} are not connected to the main component {main:?} and are left out"
        );
    }
    let reference = match cfg.reference {
        Some(r) if main.contains(&r) => r,
        Some(r) => {
            return Err(StitchError::Stage {
                stage: "align",
                msg: format!("reference image {r} is not in the stitched component {main:?}"),
            })
        }
        None => pick_reference(&graph, &main),
    };
    let sizes: Vec<(usize, usize)> = prepared.iter().map(|i| (i.width(), i.height())).collect();
    let alignment = global_align(&graph, &sizes, reference)?;
    let canvas = Rect::new(0, 0, alignment.canvas.width, alignment.canvas.height);

    let mut warped: Vec<ImageF32> = Vec::with_capacity(main.len());
    let mut masks: Vec<Vec<u8>> = Vec::with_capacity(main.len());
    for &i in &alignment.members {
        let h = alignment.to_canvas(i).expect("member has a transform");
        let src = to_rgb(prepared[i].clone()).to_f32();
        let w = warp_image(&src, &h, canvas);
        warped.push(w.image);
        masks.push(w.mask);
    }

    let gains = compensate_gains(&overlap_stats(&warped, &masks));
    for &k in &gains.clamped {
        log::warn!("gain of image {} clamped", alignment.members[k]);
    }
    for (img, g) in warped.iter_mut().zip(&gains.gains) {
        let g = *g as f32;
        *img = img.map(|v| v * g);
    }

    let seams = find_seams(&warped, &masks, canvas.width, canvas.height);
    let image = blend_multiband(&warped, &masks, &seams, cfg.bands).to_u8();
    Ok(Panorama {
        image,
        graph,
        alignment,
        gains,
        seams,
        dropped,
        features,
    })
}
