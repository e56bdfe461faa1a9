use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use panoforge::features::{detect_and_describe, DescriptorKind, DetectorConfig};
use panoforge::matching::{filter_gms, filter_ransac_homography, match_bruteforce, GmsParams, RansacParams};
use panoforge_bench::{crop_pair, feature_pair};

fn detection(c: &mut Criterion) {
    let (a, _) = crop_pair(960, 480);
    let gray = a.to_gray_u8().to_f32();
    let cfg = DetectorConfig::default();
    let mut g = c.benchmark_group("detect_describe_640x480");
    g.sample_size(10);
    for kind in [DescriptorKind::Brief, DescriptorKind::Freak] {
        g.bench_function(format!("{kind:?}").to_lowercase(), |b| {
            b.iter(|| detect_and_describe(black_box(&gray), &cfg, kind))
        });
    }
    g.finish();
}

fn matching(c: &mut Criterion) {
    let p = feature_pair(960, 480, DescriptorKind::Freak);
    let mut g = c.benchmark_group("match_640x480");
    g.sample_size(10);
    g.bench_function("bruteforce", |b| {
        b.iter(|| match_bruteforce(black_box(&p.a.descriptors), &p.b.descriptors).unwrap())
    });
    g.bench_function("gms", |b| {
        b.iter(|| filter_gms(black_box(&p.matches), &p.a.keypoints, &p.b.keypoints, p.size, p.size, &GmsParams::default()))
    });
    g.bench_function("ransac", |b| {
        b.iter(|| filter_ransac_homography(black_box(&p.matches), &p.a.keypoints, &p.b.keypoints, &RansacParams::default()))
    });
    g.finish();
}

criterion_group!(benches, detection, matching);
criterion_main!(benches);
