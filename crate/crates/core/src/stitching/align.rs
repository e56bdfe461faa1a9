use super::graph::PanoGraph;
use super::StitchError;
use crate::geometry::{Homography, Rect};

/// Canvases larger than this many pixels are treated as a failed alignment.
const MAX_CANVAS_PIXELS: usize = 1 << 26;

/// Per-image maps into the reference frame for one connected component,
/// and the canvas rectangle (reference-frame coordinates) covering them.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub reference: usize,
    /// Component members in ascending order.
    pub members: Vec<usize>,
    /// Image-to-reference homography, `None` for images outside the component.
    pub transforms: Vec<Option<Homography>>,
    pub canvas: Rect,
}

impl Alignment {
    /// Image-to-canvas map (reference frame shifted to the canvas origin).
    pub fn to_canvas(&self, image: usize) -> Option<Homography> {
        let t = Homography::translation(-self.canvas.x0 as f64, -self.canvas.y0 as f64);
        self.transforms[image].map(|h| t.compose(&h))
    }
}

fn corners(size: (usize, usize)) -> [(f64, f64); 4] {
    let (w, h) = ((size.0 - 1) as f64, (size.1 - 1) as f64);
    [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)]
}

/// Composes edge homographies along the maximum-inlier spanning tree grown
/// from `reference` (Prim; ties go to the earlier edge).
pub fn global_align(graph: &PanoGraph, sizes: &[(usize, usize)], reference: usize) -> Result<Alignment, StitchError> {
    let n = graph.nodes;
    if reference >= n || sizes.len() != n {
        return Err(StitchError::Stage {
            stage: "align",
            msg: format!("reference {reference} out of range for {n} images"),
        });
    }
    let mut transforms: Vec<Option<Homography>> = vec![None; n];
    transforms[reference] = Some(Homography::identity());
    loop {
        let mut best: Option<(usize, usize, Homography)> = None;
        let mut best_inliers = 0;
        for e in &graph.edges {
            let (inside, outside, h_out_to_in) = match (transforms[e.a].is_some(), transforms[e.b].is_some()) {
                (true, false) => (e.a, e.b, e.h_ab.inverse()),
                (false, true) => (e.b, e.a, e.h_ab),
                _ => continue,
            };
            if best.is_none() || e.inliers > best_inliers {
                best_inliers = e.inliers;
                best = Some((inside, outside, h_out_to_in));
            }
        }
        let Some((inside, outside, h)) = best else {
            break;
        };
        let parent = transforms[inside].expect("inside node has a transform");
        transforms[outside] = Some(parent.compose(&h));
    }
    let members: Vec<usize> = (0..n).filter(|&i| transforms[i].is_some()).collect();

    let mut pts = Vec::new();
    for &i in &members {
        let h = transforms[i].unwrap();
        let m = h.matrix();
        let mut sign = 0.0;
        for (x, y) in corners(sizes[i]) {
            let w = m[6] * x + m[7] * y + m[8];
            if sign == 0.0 {
                sign = w.signum();
            }
            if w.signum() != sign || w.abs() < 1e-12 {
                return Err(StitchError::Stage {
                    stage: "align",
                    msg: format!("image {i} wraps through the line at infinity"),
                });
            }
            pts.push(h.transfer(x, y).map_err(|e| StitchError::Stage {
                stage: "align",
                msg: e.to_string(),
            })?);
        }
    }
    let canvas = Rect::bounding(&pts).ok_or(StitchError::Stage {
        stage: "align",
        msg: "empty canvas".into(),
    })?;
    let budget = MAX_CANVAS_PIXELS.min(
        64 * members.iter().map(|&i| sizes[i].0 * sizes[i].1).sum::<usize>(),
    );
    if canvas.width.saturating_mul(canvas.height) > budget {
        return Err(StitchError::CanvasTooLarge(canvas.width, canvas.height));
    }
    Ok(Alignment {
        reference,
        members,
        transforms,
        canvas,
    })
}

/// Node of `component` with the largest total inlier count over its edges.
pub fn pick_reference(graph: &PanoGraph, component: &[usize]) -> usize {
    let mut best = (0usize, component[0]);
    for &v in component {
        let total: usize = graph
            .edges
            .iter()
            .filter(|e| e.a == v || e.b == v)
            .map(|e| e.inliers)
            .sum();
        if total > best.0 {
            best = (total, v);
        }
    }
    best.1
}
