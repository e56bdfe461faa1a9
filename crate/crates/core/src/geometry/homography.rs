use std::fmt;
use std::str::FromStr;

use super::GeometryError;

const DET_EPS: f64 = 1e-12;
const W_EPS: f64 = 1e-12;

/// Planar projective map stored row-major, normalized to unit Frobenius
/// norm with its largest-magnitude entry positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [f64; 9],
}

impl Homography {
    pub fn new(m: [f64; 9]) -> Result<Self, GeometryError> {
        let n = Self::normalize(m)?;
        if det3(&n).abs() <= DET_EPS {
            return Err(GeometryError::Singular);
        }
        Ok(Self { m: n })
    }

    fn normalize(m: [f64; 9]) -> Result<[f64; 9], GeometryError> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(GeometryError::Singular);
        }
        let mut largest = 0usize;
        for i in 1..9 {
            if m[i].abs() > m[largest].abs() {
                largest = i;
            }
        }
        let s = if m[largest] < 0.0 { -1.0 / norm } else { 1.0 / norm };
        let mut n = [0.0; 9];
        for i in 0..9 {
            n[i] = m[i] * s;
        }
        Ok(n)
    }

    pub fn identity() -> Self {
        Self::new([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap()
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self::new([1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0]).expect("translation is invertible")
    }

    /// Rotation by `angle` radians and isotropic `scale` about `(cx, cy)`,
    /// followed by a translation of `(tx, ty)`.
    pub fn similarity(angle: f64, scale: f64, cx: f64, cy: f64, tx: f64, ty: f64) -> Result<Self, GeometryError> {
        let (s, c) = angle.sin_cos();
        let a = scale * c;
        let b = scale * s;
        Self::new([
            a,
            -b,
            cx - a * cx + b * cy + tx,
            b,
            a,
            cy - b * cx - a * cy + ty,
            0.0,
            0.0,
            1.0,
        ])
    }

    pub fn matrix(&self) -> &[f64; 9] {
        &self.m
    }

    /// Entries rescaled so that `h22 == 1` (when `h22` is nonzero).
    pub fn to_unit_h22(&self) -> [f64; 9] {
        let d = self.m[8];
        if d.abs() < 1e-300 {
            return self.m;
        }
        let mut out = self.m;
        out.iter_mut().for_each(|v| *v /= d);
        out
    }

    pub fn transfer(&self, x: f64, y: f64) -> Result<(f64, f64), GeometryError> {
        let m = &self.m;
        let w = m[6] * x + m[7] * y + m[8];
        if w.abs() <= W_EPS {
            return Err(GeometryError::PointAtInfinity);
        }
        Ok(((m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w))
    }

    /// Point transfer in `f32` for pixel loops; `None` at infinity.
    #[inline]
    pub fn transfer_f32(&self, x: f32, y: f32) -> Option<(f32, f32)> {
        self.transfer(x as f64, y as f64).ok().map(|(a, b)| (a as f32, b as f32))
    }

    pub fn inverse(&self) -> Homography {
        let m = &self.m;
        let adj = [
            m[4] * m[8] - m[5] * m[7],
            m[2] * m[7] - m[1] * m[8],
            m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8],
            m[0] * m[8] - m[2] * m[6],
            m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6],
            m[1] * m[6] - m[0] * m[7],
            m[0] * m[4] - m[1] * m[3],
        ];
        // the adjugate is proportional to the inverse; overall scale is normalized away.
        // det(adj) = det²; skip the threshold so near-singular maps still invert.
        Homography {
            m: Self::normalize(adj).expect("inverse of an invertible homography"),
        }
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Homography) -> Homography {
        let a = &self.m;
        let b = &other.m;
        let mut r = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                r[i * 3 + j] = (0..3).map(|k| a[i * 3 + k] * b[k * 3 + j]).sum();
            }
        }
        Homography::new(r).expect("product of invertible homographies")
    }

    /// Frobenius distance between the two normalized matrices.
    pub fn distance(&self, other: &Homography) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

pub(crate) fn det3(m: &[f64; 9]) -> f64 {
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
        + m[2] * (m[3] * m[7] - m[4] * m[6])
}

/// Nine whitespace-separated decimals, row-major, one matrix row per line.
/// The raw (un-normalized) values written are the `h22 = 1` scaling.
impl fmt::Display for Homography {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.to_unit_h22();
        for r in 0..3 {
            writeln!(f, "{:.17e} {:.17e} {:.17e}", m[r * 3], m[r * 3 + 1], m[r * 3 + 2])?;
        }
        Ok(())
    }
}

impl FromStr for Homography {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let vals: Vec<f64> = s
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| GeometryError::Parse(format!("bad number {t:?}"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != 9 {
            return Err(GeometryError::Parse(format!("expected 9 numbers, found {}", vals.len())));
        }
        let mut m = [0.0; 9];
        m.copy_from_slice(&vals);
        Homography::new(m)
    }
}
