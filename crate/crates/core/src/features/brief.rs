//! Steered BRIEF: 256 fixed pseudo-random point pairs in a 31x31 patch.

use std::sync::OnceLock;

use crate::rng::XorShiftRng;

pub(super) const PATCH_HALF: i32 = 15;
const PATTERN_SEED: u64 = 0x0B21_EF00;

/// Pair `(p, q)`; bit is set iff `I(p) < I(q)`.
pub(super) type PointPair = ((i32, i32), (i32, i32));

/// Pairs drawn from an isotropic Gaussian with σ = 31/5, rounded and clamped
/// to the patch, generated once from a fixed seed.
pub(super) fn pattern() -> &'static [PointPair; 256] {
    static PATTERN: OnceLock<[PointPair; 256]> = OnceLock::new();
    PATTERN.get_or_init(|| {
        let mut rng = XorShiftRng::seed_from_u64(PATTERN_SEED);
        let sigma = 31.0 / 5.0;
        let draw = |rng: &mut XorShiftRng| -> (i32, i32) {
            let x = (rng.normal() * sigma).round().clamp(-PATCH_HALF as f64, PATCH_HALF as f64);
            let y = (rng.normal() * sigma).round().clamp(-PATCH_HALF as f64, PATCH_HALF as f64);
            (x as i32, y as i32)
        };
        let mut out = [((0, 0), (0, 0)); 256];
        for slot in out.iter_mut() {
            loop {
                let p = draw(&mut rng);
                let q = draw(&mut rng);
                if p != q {
                    *slot = (p, q);
                    break;
                }
            }
        }
        out
    })
}
