use panoforge::features::{BinaryDescriptor, Keypoint};
use panoforge::matching::{filter_gms, filter_ransac_homography, match_bruteforce, GmsParams, Match, RansacParams};
use panoforge::rng::XorShiftRng;
use proptest::prelude::*;

fn naive(da: &[BinaryDescriptor], db: &[BinaryDescriptor]) -> Vec<(usize, usize, u32)> {
    let mut out = Vec::new();
    for (i, q) in da.iter().enumerate() {
        let (mut bj, mut bd) = (0, u32::MAX);
        for (j, t) in db.iter().enumerate() {
            let d: u32 = q
                .bytes()
                .iter()
                .zip(t.bytes())
                .map(|(a, b)| (0..8).filter(|k| (a >> k) & 1 != (b >> k) & 1).count() as u32)
                .sum();
            if d < bd {
                bd = d;
                bj = j;
            }
        }
        out.push((i, bj, bd));
    }
    out
}

fn descriptors(rng: &mut XorShiftRng, n: usize, bytes: usize) -> Vec<BinaryDescriptor> {
    // Few distinct bit patterns so ties actually happen.
    (0..n)
        .map(|_| BinaryDescriptor::from_bytes((0..bytes).map(|_| (rng.below(4) as u8) * 0x41).collect()).unwrap())
        .collect()
}

#[test]
fn bruteforce_equals_naive_oracle() {
    let mut rng = XorShiftRng::seed_from_u64(2024);
    for trial in 0..100 {
        let bytes = if trial % 2 == 0 { 32 } else { 64 };
        let da = descriptors(&mut rng, 50, bytes);
        let db = descriptors(&mut rng, 50, bytes);
        let got: Vec<_> = match_bruteforce(&da, &db)
            .unwrap()
            .iter()
            .map(|m| (m.query_idx, m.train_idx, m.distance))
            .collect();
        assert_eq!(got, naive(&da, &db), "trial {trial}");
    }
}

fn random_setup(seed: u64, n: usize) -> (Vec<Keypoint>, Vec<Keypoint>, Vec<Match>) {
    let mut rng = XorShiftRng::seed_from_u64(seed);
    let mut kp = |shift: f64| -> Vec<Keypoint> {
        (0..n)
            .map(|_| Keypoint {
                x: (rng.uniform(0.0, 300.0) + shift) as f32,
                y: rng.uniform(0.0, 200.0) as f32,
                octave: 0,
                angle: 0.0,
                response: 0.0,
            })
            .collect()
    };
    let ka = kp(0.0);
    let kb = kp(0.0);
    let m = (0..n)
        .map(|i| Match {
            query_idx: i,
            train_idx: if i % 3 == 0 { (i * 7) % n } else { i },
            distance: (i % 50) as u32,
        })
        .collect();
    (ka, kb, m)
}

fn is_ordered_subset(sub: &[Match], full: &[Match]) -> bool {
    let mut it = full.iter();
    sub.iter().all(|s| it.any(|f| f == s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bruteforce_matches_oracle_up_to_200(n_a in 1usize..200, n_b in 1usize..200, seed in any::<u64>()) {
        let mut rng = XorShiftRng::seed_from_u64(seed);
        let da = descriptors(&mut rng, n_a, 32);
        let db = descriptors(&mut rng, n_b, 32);
        let got: Vec<_> = match_bruteforce(&da, &db).unwrap().iter().map(|m| (m.query_idx, m.train_idx, m.distance)).collect();
        prop_assert_eq!(got, naive(&da, &db));
    }

    #[test]
    fn gms_returns_ordered_subset_deterministically(seed in any::<u64>(), n in 2usize..400, rot in any::<bool>(), scale in any::<bool>()) {
        let (ka, kb, m) = random_setup(seed, n);
        let p = GmsParams { with_rotation: rot, with_scale: scale, ..GmsParams::default() };
        let a = filter_gms(&m, &ka, &kb, (300, 200), (300, 200), &p).unwrap();
        let b = filter_gms(&m, &ka, &kb, (300, 200), (300, 200), &p).unwrap();
        prop_assert!(is_ordered_subset(&a.matches, &m));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ransac_returns_ordered_subset(seed in any::<u64>(), n in 4usize..120) {
        let (ka, kb, m) = random_setup(seed, n);
        let p = RansacParams { seed, max_iterations: 500, ..RansacParams::default() };
        if let Ok(out) = filter_ransac_homography(&m, &ka, &kb, &p) {
            prop_assert!(out.matches.len() >= 4);
            prop_assert!(is_ordered_subset(&out.matches, &m));
        }
    }
}
