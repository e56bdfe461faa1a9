use panoforge::anafnet::*;
use panoforge::rng::XorShiftRng;
use proptest::prelude::*;

fn rand_tensor(rng: &mut XorShiftRng, n: usize, c: usize, h: usize, w: usize) -> Tensor4 {
    Tensor4::from_fn(n, c, h, w, |_, _, _, _| rng.uniform(-1.0, 1.0) as f32)
}

fn rand_vec(rng: &mut XorShiftRng, len: usize) -> Vec<f32> {
    (0..len).map(|_| rng.uniform(-1.0, 1.0) as f32).collect()
}

fn close(a: &Tensor4, b: &[f64], rel: f64) {
    assert_eq!(a.data().len(), b.len());
    for (i, (x, y)) in a.data().iter().zip(b).enumerate() {
        let tol = rel * y.abs().max(1.0);
        assert!((*x as f64 - y).abs() <= tol, "element {i}: {x} vs {y}");
    }
}

// f64 reference implementations; plain nested loops over explicit indices.

struct T64 {
    n: usize,
    c: usize,
    h: usize,
    w: usize,
    d: Vec<f64>,
}

impl T64 {
    fn of(t: &Tensor4) -> Self {
        let (n, c, h, w) = t.shape();
        Self { n, c, h, w, d: t.data().iter().map(|&v| v as f64).collect() }
    }
    fn at(&self, n: usize, c: usize, y: usize, x: usize) -> f64 {
        self.d[((n * self.c + c) * self.h + y) * self.w + x]
    }
}

fn conv_oracle(x: &T64, p: &ConvParams) -> T64 {
    let k = p.kernel;
    let pad = (k / 2) as isize;
    let s = p.stride;
    let oh = (x.h + 2 * pad as usize - k) / s + 1;
    let ow = (x.w + 2 * pad as usize - k) / s + 1;
    let cin_g = p.in_channels / p.groups;
    let cout_g = p.out_channels / p.groups;
    let mut d = vec![0.0; x.n * p.out_channels * oh * ow];
    for n in 0..x.n {
        for o in 0..p.out_channels {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = p.bias[o] as f64;
                    for ic in 0..cin_g {
                        for ky in 0..k {
                            for kx in 0..k {
                                let iy = (oy * s) as isize + ky as isize - pad;
                                let ix = (ox * s) as isize + kx as isize - pad;
                                if iy < 0 || ix < 0 || iy >= x.h as isize || ix >= x.w as isize {
                                    continue;
                                }
                                let wv = p.weights[((o * cin_g + ic) * k + ky) * k + kx] as f64;
                                acc += wv * x.at(n, (o / cout_g) * cin_g + ic, iy as usize, ix as usize);
                            }
                        }
                    }
                    d[((n * p.out_channels + o) * oh + oy) * ow + ox] = acc;
                }
            }
        }
    }
    T64 { n: x.n, c: p.out_channels, h: oh, w: ow, d }
}

fn ln_oracle(x: &T64, gamma: &[f32], beta: &[f32]) -> T64 {
    let mut d = x.d.clone();
    for n in 0..x.n {
        for y in 0..x.h {
            for xx in 0..x.w {
                let vals: Vec<f64> = (0..x.c).map(|c| x.at(n, c, y, xx)).collect();
                let mean = vals.iter().sum::<f64>() / x.c as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.c as f64;
                for c in 0..x.c {
                    d[((n * x.c + c) * x.h + y) * x.w + xx] =
                        gamma[c] as f64 * (vals[c] - mean) / (var + 1e-6).sqrt() + beta[c] as f64;
                }
            }
        }
    }
    T64 { d, ..*x }
}

fn gate_oracle(x: &T64) -> T64 {
    let half = x.c / 2;
    let mut d = Vec::new();
    for n in 0..x.n {
        for c in 0..half {
            for y in 0..x.h {
                for xx in 0..x.w {
                    d.push(x.at(n, c, y, xx) * x.at(n, c + half, y, xx));
                }
            }
        }
    }
    T64 { n: x.n, c: half, h: x.h, w: x.w, d }
}

fn sca_oracle(x: &T64, p: &ConvParams) -> T64 {
    let mut d = x.d.clone();
    for n in 0..x.n {
        let pooled: Vec<f64> = (0..x.c)
            .map(|c| {
                let mut s = 0.0;
                for y in 0..x.h {
                    for xx in 0..x.w {
                        s += x.at(n, c, y, xx);
                    }
                }
                s / (x.h * x.w) as f64
            })
            .collect();
        for o in 0..x.c {
            let a = p.bias[o] as f64 + (0..x.c).map(|i| p.weights[o * x.c + i] as f64 * pooled[i]).sum::<f64>();
            for y in 0..x.h {
                for xx in 0..x.w {
                    d[((n * x.c + o) * x.h + y) * x.w + xx] *= a;
                }
            }
        }
    }
    T64 { d, ..*x }
}

fn add64(a: &T64, b: &T64) -> T64 {
    T64 { d: a.d.iter().zip(&b.d).map(|(x, y)| x + y).collect(), ..*a }
}

#[test]
fn conv2d_matches_naive_oracle_on_random_cases() {
    let mut rng = XorShiftRng::seed_from_u64(77);
    for trial in 0..100 {
        let k = if rng.below(2) == 0 { 1 } else { 3 };
        let stride = 1 + rng.below(2) as usize;
        let groups = [1, 2][rng.below(2) as usize];
        let cin = groups * (1 + rng.below(3) as usize);
        let cout = groups * (1 + rng.below(3) as usize);
        let (n, h, w) = (1 + rng.below(2) as usize, 1 + rng.below(7) as usize, 1 + rng.below(7) as usize);
        let x = rand_tensor(&mut rng, n, cin, h, w);
        let mut p = ConvParams::zeros(cout, cin, k, groups, stride);
        p.weights = rand_vec(&mut rng, p.weights.len());
        p.bias = rand_vec(&mut rng, cout);
        let got = conv2d(&x, &p).unwrap();
        let want = conv_oracle(&T64::of(&x), &p);
        assert_eq!(got.shape(), (want.n, want.c, want.h, want.w), "trial {trial}");
        close(&got, &want.d, 1e-5);
    }
}

#[test]
fn simple_gate_matches_elementwise_oracle() {
    let mut rng = XorShiftRng::seed_from_u64(5);
    let x = rand_tensor(&mut rng, 2, 4, 3, 5);
    close(&simple_gate(&x).unwrap(), &gate_oracle(&T64::of(&x)).d, 1e-6);
}

#[test]
fn sca_matches_oracle() {
    let mut rng = XorShiftRng::seed_from_u64(6);
    let x = rand_tensor(&mut rng, 2, 3, 4, 4);
    let mut p = ConvParams::pointwise(3, 3, rand_vec(&mut rng, 9));
    p.bias = rand_vec(&mut rng, 3);
    close(&sca(&x, &p).unwrap(), &sca_oracle(&T64::of(&x), &p).d, 1e-5);
}

#[test]
fn attention_gate_matches_equation() {
    let mut rng = XorShiftRng::seed_from_u64(8);
    for _ in 0..20 {
        let (ce, cd, di) = (1 + rng.below(4) as usize, 1 + rng.below(4) as usize, 1 + rng.below(3) as usize);
        let xe = rand_tensor(&mut rng, 1, ce, 3, 4);
        let xd = rand_tensor(&mut rng, 1, cd, 3, 4);
        let p = AttentionGateParams {
            enc_channels: ce,
            dec_channels: cd,
            d_init: di,
            w_e: rand_vec(&mut rng, di * ce),
            w_d: rand_vec(&mut rng, di * cd),
            b_e: rand_vec(&mut rng, di),
            psi: rand_vec(&mut rng, di),
            b_psi: rng.uniform(-1.0, 1.0) as f32,
        };
        let (e, d) = (T64::of(&xe), T64::of(&xd));
        let mut want = Vec::new();
        for c in 0..cd {
            for y in 0..3 {
                for x in 0..4 {
                    let mut attn = p.b_psi as f64;
                    for k in 0..di {
                        let mut z = p.b_e[k] as f64;
                        for i in 0..ce {
                            z += p.w_e[k * ce + i] as f64 * e.at(0, i, y, x);
                        }
                        for j in 0..cd {
                            z += p.w_d[k * cd + j] as f64 * d.at(0, j, y, x);
                        }
                        attn += p.psi[k] as f64 * z;
                    }
                    want.push(attn * d.at(0, c, y, x));
                }
            }
        }
        close(&attention_gate(&xe, &xd, &p).unwrap(), &want, 1e-5);
    }
}

#[test]
fn gate_passthrough_is_exact() {
    let mut rng = XorShiftRng::seed_from_u64(9);
    let xe = rand_tensor(&mut rng, 2, 3, 5, 5);
    let xd = rand_tensor(&mut rng, 2, 4, 5, 5);
    let mut p = AttentionGateParams::passthrough(3, 4, 2);
    p.w_e = rand_vec(&mut rng, 6);
    p.w_d = rand_vec(&mut rng, 8);
    p.b_e = rand_vec(&mut rng, 2);
    assert_eq!(attention_gate(&xe, &xd, &p).unwrap(), xd);
}

#[test]
fn nafblock_matches_stage_oracle() {
    let mut rng = XorShiftRng::seed_from_u64(10);
    let x = rand_tensor(&mut rng, 1, 8, 8, 8);
    let p = NafBlockParams::random(8, &mut rng);
    let x64 = T64::of(&x);
    let t = ln_oracle(&x64, &p.norm1.gamma, &p.norm1.beta);
    let t = conv_oracle(&t, &p.expand);
    let t = conv_oracle(&t, &p.depthwise);
    let t = gate_oracle(&t);
    let t = sca_oracle(&t, &p.sca);
    let t = conv_oracle(&t, &p.project);
    let y = add64(&x64, &t);
    let t = ln_oracle(&y, &p.norm2.gamma, &p.norm2.beta);
    let t = conv_oracle(&t, &p.ffn_expand);
    let t = gate_oracle(&t);
    let t = conv_oracle(&t, &p.ffn_project);
    let want = add64(&y, &t);
    close(&nafblock(&x, &p).unwrap(), &want.d, 1e-4);
}

#[test]
fn zero_block_is_identity_and_widths_checked() {
    let mut rng = XorShiftRng::seed_from_u64(11);
    let x = rand_tensor(&mut rng, 1, 6, 4, 4);
    assert_eq!(nafblock(&x, &NafBlockParams::zeros(6)).unwrap(), x);
    assert!(matches!(nafblock(&x, &NafBlockParams::zeros(4)), Err(AnafError::Shape(_))));
    let mut bad = NafBlockParams::zeros(6);
    bad.project = ConvParams::zeros(6, 12, 1, 1, 1);
    assert!(matches!(bad.validate(), Err(AnafError::Invalid(_))));
}

#[test]
fn zero_network_is_identity() {
    let mut rng = XorShiftRng::seed_from_u64(12);
    for cfg in [
        AnafConfig::new(3, vec![4, 8], vec![1, 1]),
        AnafConfig::default(),
        AnafConfig::new(1, vec![2, 4, 6, 8], vec![2, 1, 1, 2]),
    ] {
        let x = rand_tensor(&mut rng, 1, cfg.image_channels, 16, 24);
        let y = anafnet_forward(&x, &AnafParams::zeros(&cfg).unwrap()).unwrap();
        close(&y, &T64::of(&x).d, 1e-5);
    }
}

#[test]
fn forward_shape_determinism_and_divisibility() {
    let cfg = AnafConfig::default();
    let p = AnafParams::random(&cfg, 1).unwrap();
    let mut rng = XorShiftRng::seed_from_u64(13);
    let x = rand_tensor(&mut rng, 2, 3, 16, 8);
    let a = anafnet_forward(&x, &p).unwrap();
    let b = anafnet_forward(&x, &p).unwrap();
    assert_eq!(a.shape(), x.shape());
    assert_eq!(a.data(), b.data());
    let odd = rand_tensor(&mut rng, 1, 3, 10, 8);
    assert!(matches!(anafnet_forward(&odd, &p), Err(AnafError::Indivisible { depth: 2, .. })));
}

#[test]
fn zero_params_leave_images_unchanged() {
    let img = panoforge::synthetic::textured_rgb(37, 21, 4);
    let p = AnafParams::zeros(&AnafConfig::default()).unwrap();
    assert_eq!(deblur_image(&img, &p).unwrap(), img);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn forward_stays_finite(seed in any::<u64>(), depth in 0usize..3, base in 1usize..5, blocks in 1usize..3) {
        let widths: Vec<usize> = (0..=depth).map(|l| base * 2 << l).collect();
        let cfg = AnafConfig::new(3, widths, vec![blocks; depth + 1]);
        let p = AnafParams::random(&cfg, seed).unwrap();
        let mut rng = XorShiftRng::seed_from_u64(seed ^ 1);
        let x = rand_tensor(&mut rng, 1, 3, 8, 8);
        let y = anafnet_forward(&x, &p).unwrap();
        prop_assert!(y.is_finite());
        prop_assert_eq!(y.shape(), x.shape());
    }

    #[test]
    fn layer_norm_centres_on_beta(seed in any::<u64>(), c in 2usize..9) {
        let mut rng = XorShiftRng::seed_from_u64(seed);
        let x = rand_tensor(&mut rng, 1, c, 3, 3);
        let gamma = vec![1.0; c];
        let beta = rand_vec(&mut rng, c);
        let y = layer_norm(&x, &gamma, &beta).unwrap();
        let beta_mean = beta.iter().sum::<f32>() / c as f32;
        for p in 0..9 {
            let m = (0..c).map(|k| y.get(0, k, p / 3, p % 3)).sum::<f32>() / c as f32;
            prop_assert!((m - beta_mean).abs() < 1e-5);
        }
    }

    #[test]
    fn simple_gate_halves_channels(half in 1usize..6, h in 1usize..5) {
        let x = Tensor4::filled(1, 2 * half, h, 3, 0.5);
        prop_assert_eq!(simple_gate(&x).unwrap().shape(), (1, half, h, 3));
    }
}
