//! Radial and tangential lens distortion (Brown-Conrady form) and image
//! correction from known calibration parameters.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::ImageU8;

const MAX_ITERATIONS: usize = 20;
const STEP_TOL: f64 = 1e-8;
/// Round-trip tolerance (normalized units) for accepting an inverted pixel.
const ROUND_TRIP_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum UndistortError {
    #[error("camera config not found: {0}")]
    NotFound(String),
    #[error("reading camera config: {0}")]
    Io(#[from] std::io::Error),
    #[error("camera config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing required key {0}")]
    MissingKey(&'static str),
    #[error("invalid camera model: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub p1: f64,
    pub p2: f64,
}

impl CameraModel {
    /// Distortion-free pinhole camera.
    pub fn pinhole(fx: f64, fy: f64, cx: f64, cy: f64) -> Self {
        Self {
            fx,
            fy,
            cx,
            cy,
            k1: 0.0,
            k2: 0.0,
            k3: 0.0,
            p1: 0.0,
            p2: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), UndistortError> {
        let all = [self.fx, self.fy, self.cx, self.cy, self.k1, self.k2, self.k3, self.p1, self.p2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(UndistortError::Invalid("non-finite parameter".into()));
        }
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(UndistortError::Invalid("focal lengths must be positive".into()));
        }
        Ok(())
    }

    /// Parses `key=value` lines. `fx fy cx cy` are required, distortion
    /// coefficients default to zero. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, UndistortError> {
        let mut vals: [Option<f64>; 9] = [None; 9];
        const KEYS: [&str; 9] = ["fx", "fy", "cx", "cy", "k1", "k2", "k3", "p1", "p2"];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| UndistortError::Parse { line: i + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
            let k = k.trim();
            let slot = KEYS
                .iter()
                .position(|&name| name == k)
                .ok_or_else(|| err(format!("unknown key {k:?}")))?;
            if vals[slot].is_some() {
                return Err(err(format!("duplicate key {k:?}")));
            }
            let v: f64 = v.trim().parse().map_err(|_| err(format!("bad number for {k}")))?;
            vals[slot] = Some(v);
        }
        for (i, name) in KEYS.iter().enumerate().take(4) {
            if vals[i].is_none() {
                return Err(UndistortError::MissingKey(name));
            }
        }
        let g = |i: usize| vals[i].unwrap_or(0.0);
        let model = Self {
            fx: g(0),
            fy: g(1),
            cx: g(2),
            cy: g(3),
            k1: g(4),
            k2: g(5),
            k3: g(6),
            p1: g(7),
            p2: g(8),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn from_file(path: &Path) -> Result<Self, UndistortError> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => UndistortError::NotFound(path.display().to_string()),
            _ => UndistortError::Io(e),
        })?;
        Self::parse(&text)
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        for (k, v) in [
            ("fx", self.fx),
            ("fy", self.fy),
            ("cx", self.cx),
            ("cy", self.cy),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("p1", self.p1),
            ("p2", self.p2),
        ] {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

pub fn distort_point(m: &CameraModel, x: f64, y: f64) -> (f64, f64) {
    let r2 = x * x + y * y;
    let radial = 1.0 + r2 * (m.k1 + r2 * (m.k2 + r2 * m.k3));
    (
        x * radial + 2.0 * m.p1 * x * y + m.p2 * (r2 + 2.0 * x * x),
        y * radial + m.p1 * (r2 + 2.0 * y * y) + 2.0 * m.p2 * x * y,
    )
}

/// Inverts [`distort_point`] by fixed-point iteration of the Newton map,
/// starting from the distorted position. `None` when the iteration does
/// not settle within 20 steps.
pub fn undistort_point(m: &CameraModel, xd: f64, yd: f64) -> Option<(f64, f64)> {
    let (mut x, mut y) = (xd, yd);
    for _ in 0..MAX_ITERATIONS {
        let r2 = x * x + y * y;
        let radial = 1.0 + r2 * (m.k1 + r2 * (m.k2 + r2 * m.k3));
        let dradial = m.k1 + r2 * (2.0 * m.k2 + 3.0 * r2 * m.k3);
        let (fx, fy) = distort_point(m, x, y);
        let (ex, ey) = (fx - xd, fy - yd);
        let jxx = radial + 2.0 * x * x * dradial + 2.0 * m.p1 * y + 6.0 * m.p2 * x;
        let jxy = 2.0 * x * y * dradial + 2.0 * m.p1 * x + 2.0 * m.p2 * y;
        let jyy = radial + 2.0 * y * y * dradial + 6.0 * m.p1 * y + 2.0 * m.p2 * x;
        let det = jxx * jyy - jxy * jxy;
        if det.abs() < 1e-12 {
            return None;
        }
        let sx = (jyy * ex - jxy * ey) / det;
        let sy = (jxx * ey - jxy * ex) / det;
        if !(sx.is_finite() && sy.is_finite()) {
            return None;
        }
        x -= sx;
        y -= sy;
        if sx.hypot(sy) < STEP_TOL {
            return Some((x, y));
        }
    }
    None
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct UndistortStats {
    /// Pixels whose inverse did not converge or did not round-trip.
    pub nonconverged: usize,
    /// Pixels whose source position falls outside the input image.
    pub out_of_source: usize,
}

fn sample_u8(img: &ImageU8, x: f64, y: f64, out: &mut [u8]) -> bool {
    let (w, h) = (img.width() as f64, img.height() as f64);
    const EDGE: f64 = 1e-6;
    if !(x >= -EDGE && y >= -EDGE && x <= w - 1.0 + EDGE && y <= h - 1.0 + EDGE) {
        return false;
    }
    let x = x.clamp(0.0, w - 1.0);
    let y = y.clamp(0.0, h - 1.0);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let (ax, ay) = (x - x0 as f64, y - y0 as f64);
    for (c, o) in out.iter_mut().enumerate() {
        let p = |xx, yy| img.get(xx, yy, c) as f64;
        let top = p(x0, y0) * (1.0 - ax) + p(x1, y0) * ax;
        let bot = p(x0, y1) * (1.0 - ax) + p(x1, y1) * ax;
        *o = (top * (1.0 - ay) + bot * ay).round().clamp(0.0, 255.0) as u8;
    }
    true
}

/// Corrects a distorted image. Each output pixel is an ideal pinhole
/// position whose distorted location is sampled bilinearly from `img`.
/// The pixel is only accepted when the fixed-point inverse of that
/// distorted location converges back to it, so fold-over regions of a
/// strong polynomial come out black and are counted as non-converged.
pub fn undistort_image(model: &CameraModel, img: &ImageU8) -> Result<(ImageU8, UndistortStats), UndistortError> {
    model.validate()?;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut data = vec![0u8; w * h * ch];
    let stats = data
        .par_chunks_mut(w * ch)
        .enumerate()
        .map(|(py, row)| {
            let mut st = UndistortStats::default();
            let y = (py as f64 - model.cy) / model.fy;
            for px in 0..w {
                let x = (px as f64 - model.cx) / model.fx;
                let (xd, yd) = distort_point(model, x, y);
                let ok = undistort_point(model, xd, yd)
                    .map(|(ux, uy)| (ux - x).hypot(uy - y) < ROUND_TRIP_TOL)
                    .unwrap_or(false);
                if !ok {
                    st.nonconverged += 1;
                    continue;
                }
                let (sx, sy) = (xd * model.fx + model.cx, yd * model.fy + model.cy);
                if !sample_u8(img, sx, sy, &mut row[px * ch..(px + 1) * ch]) {
                    st.out_of_source += 1;
                }
            }
            st
        })
        .reduce(UndistortStats::default, |a, b| UndistortStats {
            nonconverged: a.nonconverged + b.nonconverged,
            out_of_source: a.out_of_source + b.out_of_source,
        });
    if stats.nonconverged > 0 {
        log::warn!("undistort: {} pixels did not converge", stats.nonconverged);
    }
    let out = ImageU8::new(w, h, ch, data).map_err(|e| UndistortError::Invalid(e.to_string()))?;
    Ok((out, stats))
}
