use super::eigen::symmetric_eigen;
use super::{GeometryError, Homography};

/// Singular-value gap below which the null space is considered ambiguous.
const DEGENERACY_RTOL: f64 = 1e-8;

/// Similarity taking the centroid to the origin and the mean distance to √2.
fn hartley_transform(points: &[(f64, f64)]) -> Result<[f64; 9], GeometryError> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_dist = points
        .iter()
        .map(|p| ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    if !(mean_dist > 1e-12) {
        return Err(GeometryError::Degenerate);
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Ok([s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0])
}

fn apply(t: &[f64; 9], p: (f64, f64)) -> (f64, f64) {
    (t[0] * p.0 + t[2], t[4] * p.1 + t[5])
}

fn matmul(a: &[f64; 9], b: &[f64; 9]) -> [f64; 9] {
    let mut r = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            r[i * 3 + j] = (0..3).map(|k| a[i * 3 + k] * b[k * 3 + j]).sum();
        }
    }
    r
}

/// Normalized direct linear transform: the homography taking `points_a`
/// to `points_b` in the algebraic least-squares sense.
///
/// The null vector is the eigenvector of `AᵀA` for its smallest eigenvalue.
/// Singular values used for the degeneracy test are measured as `‖A v‖`
/// rather than as square roots of eigenvalues, which would lose half the
/// available precision.
pub fn estimate_homography_dlt(
    points_a: &[(f64, f64)],
    points_b: &[(f64, f64)],
) -> Result<Homography, GeometryError> {
    if points_a.len() != points_b.len() {
        return Err(GeometryError::LengthMismatch {
            a: points_a.len(),
            b: points_b.len(),
        });
    }
    if points_a.len() < 4 {
        return Err(GeometryError::TooFewPoints(points_a.len()));
    }
    let ta = hartley_transform(points_a)?;
    let tb = hartley_transform(points_b)?;

    let mut rows: Vec<[f64; 9]> = Vec::with_capacity(points_a.len() * 2);
    for (&pa, &pb) in points_a.iter().zip(points_b) {
        let (x, y) = apply(&ta, pa);
        let (u, v) = apply(&tb, pb);
        rows.push([-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u]);
        rows.push([0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
    }
    let mut ata = [[0.0f64; 9]; 9];
    for r in &rows {
        for i in 0..9 {
            for j in i..9 {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    for i in 0..9 {
        for j in 0..i {
            ata[i][j] = ata[j][i];
        }
    }
    let (_, vecs) = symmetric_eigen(&ata);
    let column = |k: usize| -> [f64; 9] {
        let mut c = [0.0; 9];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = vecs[i][k];
        }
        c
    };
    let sigma = |v: &[f64; 9]| -> f64 {
        rows.iter()
            .map(|r| {
                let d: f64 = r.iter().zip(v).map(|(a, b)| a * b).sum();
                d * d
            })
            .sum::<f64>()
            .sqrt()
    };
    let h_norm = column(0);
    let s_min = sigma(&h_norm);
    let s_next = sigma(&column(1));
    let s_max = sigma(&column(8));
    if s_next - s_min <= DEGENERACY_RTOL * s_max {
        return Err(GeometryError::Degenerate);
    }

    // denormalize: H = Tb⁻¹ · Ĥ · Ta
    let s = tb[0];
    let tb_inv = [1.0 / s, 0.0, -tb[2] / s, 0.0, 1.0 / s, -tb[5] / s, 0.0, 0.0, 1.0];
    let h = matmul(&tb_inv, &matmul(&h_norm, &ta));
    Homography::new(h).map_err(|_| GeometryError::Degenerate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShiftRng;

    #[test]
    fn unit_square_identity() {
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let h = estimate_homography_dlt(&sq, &sq).unwrap();
        assert!(h.distance(&Homography::identity()) < 1e-10);
    }

    #[test]
    fn unit_square_scaled() {
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let sq2: Vec<_> = sq.iter().map(|p| (p.0 * 2.0, p.1 * 2.0)).collect();
        let h = estimate_homography_dlt(&sq, &sq2).unwrap();
        let expect = Homography::new([2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(h.distance(&expect) < 1e-10);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let a = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 1.0)];
        let b = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 1.0)];
        assert_eq!(estimate_homography_dlt(&a, &b), Err(GeometryError::Degenerate));
        let all_same = [(3.0, 3.0); 5];
        assert_eq!(
            estimate_homography_dlt(&all_same, &all_same),
            Err(GeometryError::Degenerate)
        );
    }

    #[test]
    fn input_errors() {
        let a = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)];
        assert_eq!(estimate_homography_dlt(&a, &a), Err(GeometryError::TooFewPoints(3)));
        assert!(matches!(
            estimate_homography_dlt(&a, &a[..2]),
            Err(GeometryError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn twenty_noiseless_points() {
        let mut rng = XorShiftRng::seed_from_u64(42);
        let h = Homography::new([0.9, 0.1, 30.0, -0.05, 1.1, -12.0, 2e-4, -1e-4, 1.0]).unwrap();
        let a: Vec<_> = (0..20)
            .map(|_| (rng.uniform(0.0, 640.0), rng.uniform(0.0, 480.0)))
            .collect();
        let b: Vec<_> = a.iter().map(|&(x, y)| h.transfer(x, y).unwrap()).collect();
        let est = estimate_homography_dlt(&a, &b).unwrap();
        assert!(est.distance(&h) < 1e-8, "error {}", est.distance(&h));
    }
}
