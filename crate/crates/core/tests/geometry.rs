use panoforge::geometry::{estimate_homography_dlt, warp_image, Homography, Rect};
use panoforge::imagecore::ImageF32;
use panoforge::rng::XorShiftRng;
use proptest::prelude::*;

fn random_h(rng: &mut XorShiftRng) -> Homography {
    Homography::new([
        1.0 + rng.uniform(-0.3, 0.3),
        rng.uniform(-0.3, 0.3),
        rng.uniform(-50.0, 50.0),
        rng.uniform(-0.3, 0.3),
        1.0 + rng.uniform(-0.3, 0.3),
        rng.uniform(-50.0, 50.0),
        rng.uniform(-4e-4, 4e-4),
        rng.uniform(-4e-4, 4e-4),
        1.0,
    ])
    .unwrap()
}

/// Points in general position: a jittered grid, so no three are collinear
/// by construction (probability zero) and the spread is even.
fn points(n: usize, rng: &mut XorShiftRng) -> Vec<(f64, f64)> {
    let side = (n as f64).sqrt().ceil() as usize;
    (0..n)
        .map(|i| {
            let (gx, gy) = ((i % side) as f64, (i / side) as f64);
            let step = 600.0 / side as f64;
            (
                20.0 + (gx + rng.uniform(0.2, 0.8)) * step,
                20.0 + (gy + rng.uniform(0.2, 0.8)) * step * 0.75,
            )
        })
        .collect()
}

#[test]
fn dlt_recovers_noiseless_homographies() {
    let mut rng = XorShiftRng::seed_from_u64(2024);
    for n in [4, 10, 100] {
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let h = random_h(&mut rng);
            let a = points(n, &mut rng);
            let b: Vec<_> = a.iter().map(|&(x, y)| h.transfer(x, y).unwrap()).collect();
            let est = estimate_homography_dlt(&a, &b).unwrap();
            // both are unit-Frobenius normalized, so this is the relative error
            worst = worst.max(est.distance(&h));
        }
        assert!(worst <= 1e-8, "n={n}: relative error {worst:e}");
    }
}

fn smooth(w: usize, h: usize) -> ImageF32 {
    ImageF32::from_fn(w, h, 1, |x, y, _| {
        let (x, y) = (x as f32, y as f32);
        0.5 + 0.2 * (x / 23.0).sin() * (y / 31.0).cos() + 0.15 * ((x + 2.0 * y) / 57.0).sin()
    })
    .unwrap()
}

fn masked_psnr(a: &ImageF32, b: &ImageF32, mask: &[u8]) -> f64 {
    let (mut se, mut n) = (0.0f64, 0usize);
    for (i, &m) in mask.iter().enumerate() {
        if m != 0 {
            let d = (a.data()[i] - b.data()[i]) as f64 * 255.0;
            se += d * d;
            n += 1;
        }
    }
    assert!(n > 0);
    10.0 * (255.0f64.powi(2) / (se / n as f64)).log10()
}

#[test]
fn warp_round_trip_psnr_on_smooth_images() {
    let img = smooth(320, 240);
    let mut rng = XorShiftRng::seed_from_u64(6);
    for _ in 0..5 {
        let h = Homography::similarity(rng.uniform(-0.3, 0.3), rng.uniform(0.8, 1.2), 160.0, 120.0, 10.0, -5.0).unwrap();
        let fwd = warp_image(&img, &h, Rect::new(-200, -200, 720, 640));
        let back = warp_image(
            &fwd.image,
            &h.inverse().compose(&Homography::translation(-200.0, -200.0)),
            Rect::new(0, 0, 320, 240),
        );
        // a pixel counts when its round trip stays inside valid samples both ways
        let shifted = ImageF32::from_fn(720, 640, 1, |x, y, _| fwd.mask[y * 720 + x] as f32).unwrap();
        let valid_back = warp_image(
            &shifted,
            &h.inverse().compose(&Homography::translation(-200.0, -200.0)),
            Rect::new(0, 0, 320, 240),
        );
        let mask: Vec<u8> = back
            .mask
            .iter()
            .zip(valid_back.image.data())
            .map(|(&m, &v)| (m != 0 && v >= 1.0 - 1e-6) as u8)
            .collect();
        let p = masked_psnr(&img, &back.image, &mask);
        assert!(p >= 40.0, "round trip PSNR {p:.2}");
    }
}

proptest! {
    #[test]
    fn transfer_of_inverse_is_identity(seed in any::<u64>(), x in 0.0f64..640.0, y in 0.0f64..480.0) {
        let mut rng = XorShiftRng::seed_from_u64(seed);
        let h = random_h(&mut rng);
        let (u, v) = h.transfer(x, y).unwrap();
        let (bx, by) = h.inverse().transfer(u, v).unwrap();
        prop_assert!((bx - x).abs() < 1e-7 && (by - y).abs() < 1e-7);
    }
}
