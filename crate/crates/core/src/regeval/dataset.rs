use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{GeometryError, Homography};
use crate::imagecore::{gaussian_blur, read_image, write_image, ImageIoError, ImageU8};
use crate::rng::XorShiftRng;
use crate::synthetic::Scene;

#[derive(Debug, Error)]
pub enum SequenceError {
    #[error("no base image img1.(ppm|pgm|png) in {0}")]
    MissingBase(PathBuf),
    #[error("no deformed images in {0}")]
    Empty(PathBuf),
    #[error("missing ground truth {0}")]
    MissingHomography(PathBuf),
    #[error(transparent)]
    Image(#[from] ImageIoError),
    #[error("{path}: {source}")]
    Homography { path: PathBuf, source: GeometryError },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Base image plus deformed views; `ground_truth[k]` maps base pixels to
/// `deformed[k]` pixels.
#[derive(Debug, Clone)]
pub struct EvalSequence {
    pub name: String,
    pub base: ImageU8,
    pub deformed: Vec<ImageU8>,
    pub ground_truth: Vec<Homography>,
}

const EXTENSIONS: [&str; 3] = ["ppm", "pgm", "png"];

fn find_image(dir: &Path, stem: &str) -> Option<PathBuf> {
    EXTENSIONS
        .iter()
        .map(|e| dir.join(format!("{stem}.{e}")))
        .find(|p| p.is_file())
}

impl EvalSequence {
    /// Loads `img1..imgN` and `H1to2p..H1toNp` from `dir`; N stops at the
    /// first missing image.
    pub fn load(dir: &Path) -> Result<Self, SequenceError> {
        let base_path = find_image(dir, "img1").ok_or_else(|| SequenceError::MissingBase(dir.to_path_buf()))?;
        let base = read_image(&base_path)?;
        let mut deformed = Vec::new();
        let mut ground_truth = Vec::new();
        for k in 2.. {
            let Some(p) = find_image(dir, &format!("img{k}")) else {
                break;
            };
            let hp = dir.join(format!("H1to{k}p"));
            if !hp.is_file() {
                return Err(SequenceError::MissingHomography(hp));
            }
            let text = std::fs::read_to_string(&hp)?;
            let h = text
                .parse::<Homography>()
                .map_err(|source| SequenceError::Homography { path: hp, source })?;
            deformed.push(read_image(&p)?);
            ground_truth.push(h);
        }
        if deformed.is_empty() {
            return Err(SequenceError::Empty(dir.to_path_buf()));
        }
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sequence".into());
        Ok(Self {
            name,
            base,
            deformed,
            ground_truth,
        })
    }

    /// Writes the sequence in the layout [`EvalSequence::load`] reads.
    pub fn save(&self, dir: &Path, ext: &str) -> Result<(), SequenceError> {
        std::fs::create_dir_all(dir)?;
        write_image(dir.join(format!("img1.{ext}")), &self.base)?;
        for (k, (img, h)) in self.deformed.iter().zip(&self.ground_truth).enumerate() {
            write_image(dir.join(format!("img{}.{ext}", k + 2)), img)?;
            std::fs::write(dir.join(format!("H1to{}p", k + 2)), h.to_string())?;
        }
        Ok(())
    }
}

/// Photometric and geometric parameters of one synthetic view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticWarp {
    pub angle_deg: f64,
    pub scale: f64,
    pub blur_sigma: f64,
    pub brightness: f64,
    pub perspective: (f64, f64),
}

impl SyntheticWarp {
    /// Increasing difficulty for `k = 1..=5`: rotation 6k°, scale 1 ± 0.06k,
    /// blur 0.6k, brightness 1 ± 0.06k. The seed picks signs.
    pub fn ladder(k: usize, rng: &mut XorShiftRng) -> Self {
        let k = k as f64;
        let mut sign = || if rng.below(2) == 0 { -1.0 } else { 1.0 };
        let rot_sign = sign();
        let scale_sign = if k as usize % 2 == 1 { 1.0 } else { -1.0 };
        let bright_sign = sign();
        let (px, py) = (sign() * 3e-5 * k, sign() * 3e-5 * k);
        Self {
            angle_deg: rot_sign * 6.0 * k,
            scale: 1.0 + scale_sign * 0.06 * k,
            blur_sigma: 0.6 * k,
            brightness: 1.0 + bright_sign * 0.06 * k,
            perspective: (px, py),
        }
    }

    /// Base-to-view homography about the image center.
    pub fn homography(&self, width: usize, height: usize) -> Homography {
        let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let a = self.scale * c;
        let b = self.scale * s;
        let (px, py) = self.perspective;
        // centered coordinates: [a -b 0; b a 0; px py 1], then shift back
        let m = [
            a + cx * px,
            -b + cx * py,
            cx,
            b + cy * px,
            a + cy * py,
            cy,
            px,
            py,
            1.0,
        ];
        let center = [1.0, 0.0, -cx, 0.0, 1.0, -cy, 0.0, 0.0, 1.0];
        let mut r = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                r[i * 3 + j] = (0..3).map(|k| m[i * 3 + k] * center[k * 3 + j]).sum();
            }
        }
        Homography::new(r).expect("warp parameters keep the map invertible")
    }
}

/// Synthetic homography sequence: a random scene viewed through five
/// [`SyntheticWarp::ladder`] warps.
pub fn synthetic_sequence(name: &str, seed: u64, width: usize, height: usize) -> (EvalSequence, Vec<SyntheticWarp>) {
    let mut rng = XorShiftRng::seed_from_u64(seed ^ 0x5EC0_F00D);
    let warps: Vec<SyntheticWarp> = (1..=5).map(|k| SyntheticWarp::ladder(k, &mut rng)).collect();
    let hs: Vec<Homography> = warps.iter().map(|w| w.homography(width, height)).collect();

    let corners = [
        (0.0, 0.0),
        (width as f64, 0.0),
        (0.0, height as f64),
        (width as f64, height as f64),
    ];
    let (mut x0, mut y0, mut x1, mut y1) = (0.0f64, 0.0f64, width as f64, height as f64);
    for h in &hs {
        let inv = h.inverse();
        for &(x, y) in &corners {
            if let Ok((u, v)) = inv.transfer(x, y) {
                x0 = x0.min(u);
                y0 = y0.min(v);
                x1 = x1.max(u);
                y1 = y1.max(v);
            }
        }
    }
    let scene = Scene::random(seed, x0 - 40.0, y0 - 40.0, x1 + 40.0, y1 + 40.0);
    let base = scene.render(width, height, 3, |x, y| Some((x, y))).to_u8();
    let deformed = warps
        .iter()
        .zip(&hs)
        .map(|(w, h)| {
            let inv = h.inverse();
            let img = scene.render(width, height, 3, |x, y| inv.transfer(x, y).ok());
            let img = if w.blur_sigma > 0.0 {
                gaussian_blur(&img, w.blur_sigma as f32)
            } else {
                img
            };
            let gain = w.brightness as f32;
            img.map(|v| v * gain).to_u8()
        })
        .collect();
    (
        EvalSequence {
            name: name.to_string(),
            base,
            deformed,
            ground_truth: hs,
        },
        warps,
    )
}
