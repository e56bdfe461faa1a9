use super::block::{nafblock, random_conv, NafBlockParams};
use super::ops::{attention_gate, conv2d, AttentionGateParams, ConvParams};
use super::{AnafError, Tensor4};
use crate::imagecore::ImageU8;
use crate::rng::XorShiftRng;

/// U-Net shape. `widths[l]` and `blocks[l]` describe resolution level `l`;
/// the last entry is the bottleneck. `d_init[l]` is the attention-gate width
/// on skip `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnafConfig {
    pub image_channels: usize,
    pub widths: Vec<usize>,
    pub blocks: Vec<usize>,
    pub d_init: Vec<usize>,
}

impl AnafConfig {
    /// Gate widths default to half the decoder width at each skip.
    pub fn new(image_channels: usize, widths: Vec<usize>, blocks: Vec<usize>) -> Self {
        let d_init = widths[..widths.len().saturating_sub(1)]
            .iter()
            .map(|w| (w / 2).max(1))
            .collect();
        Self {
            image_channels,
            widths,
            blocks,
            d_init,
        }
    }

    pub fn depth(&self) -> usize {
        self.widths.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<(), AnafError> {
        if self.image_channels == 0 || self.widths.is_empty() || self.widths.contains(&0) {
            return Err(AnafError::Invalid("empty channel width".into()));
        }
        if self.blocks.len() != self.widths.len() || self.d_init.len() != self.depth() || self.d_init.contains(&0) {
            return Err(AnafError::Invalid(format!(
                "{} widths, {} block counts, {} gate widths",
                self.widths.len(),
                self.blocks.len(),
                self.d_init.len()
            )));
        }
        Ok(())
    }
}

impl Default for AnafConfig {
    fn default() -> Self {
        Self::new(3, vec![8, 16, 32], vec![1, 1, 1])
    }
}

/// One resolution level: encoder blocks, downsampling, and the mirrored
/// upsampling, skip gate and decoder blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct StageParams {
    pub encoder: Vec<NafBlockParams>,
    /// 3x3 stride 2, `widths[l] -> widths[l+1]`.
    pub down: ConvParams,
    /// 1x1 after nearest upsampling, `widths[l+1] -> widths[l]`.
    pub up: ConvParams,
    pub gate: AttentionGateParams,
    pub decoder: Vec<NafBlockParams>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnafParams {
    pub config: AnafConfig,
    /// 3x3, image -> `widths[0]`.
    pub intro: ConvParams,
    pub stages: Vec<StageParams>,
    pub middle: Vec<NafBlockParams>,
    /// 3x3, `widths[0]` -> image, added to the input.
    pub ending: ConvParams,
}

impl AnafParams {
    /// All convolutions zero, identity norms, pass-through gates. The
    /// forward pass is then the identity.
    pub fn zeros(config: &AnafConfig) -> Result<Self, AnafError> {
        config.validate()?;
        let w = &config.widths;
        let stages = (0..config.depth())
            .map(|l| StageParams {
                encoder: (0..config.blocks[l]).map(|_| NafBlockParams::zeros(w[l])).collect(),
                down: ConvParams::zeros(w[l + 1], w[l], 3, 1, 2),
                up: ConvParams::zeros(w[l], w[l + 1], 1, 1, 1),
                gate: AttentionGateParams::passthrough(w[l], w[l], config.d_init[l]),
                decoder: (0..config.blocks[l]).map(|_| NafBlockParams::zeros(w[l])).collect(),
            })
            .collect();
        let d = config.depth();
        Ok(Self {
            config: config.clone(),
            intro: ConvParams::zeros(w[0], config.image_channels, 3, 1, 1),
            stages,
            middle: (0..config.blocks[d]).map(|_| NafBlockParams::zeros(w[d])).collect(),
            ending: ConvParams::zeros(config.image_channels, w[0], 3, 1, 1),
        })
    }

    /// Seeded uniform fan-in initialization.
    pub fn random(config: &AnafConfig, seed: u64) -> Result<Self, AnafError> {
        let mut p = Self::zeros(config)?;
        let mut rng = XorShiftRng::seed_from_u64(seed);
        random_conv(&mut p.intro, &mut rng);
        for s in p.stages.iter_mut() {
            let c = s.gate.enc_channels;
            for b in s.encoder.iter_mut() {
                *b = NafBlockParams::random(c, &mut rng);
            }
            random_conv(&mut s.down, &mut rng);
            random_conv(&mut s.up, &mut rng);
            let g = &mut s.gate;
            let be = 1.0 / (g.enc_channels as f64).sqrt();
            let bd = 1.0 / (g.dec_channels as f64).sqrt();
            let bp = 1.0 / (g.d_init as f64).sqrt();
            g.w_e.iter_mut().for_each(|v| *v = rng.uniform(-be, be) as f32);
            g.w_d.iter_mut().for_each(|v| *v = rng.uniform(-bd, bd) as f32);
            g.b_e.iter_mut().for_each(|v| *v = rng.uniform(-0.05, 0.05) as f32);
            g.psi.iter_mut().for_each(|v| *v = rng.uniform(-bp, bp) as f32);
            g.b_psi = rng.uniform(0.5, 1.5) as f32;
            for b in s.decoder.iter_mut() {
                *b = NafBlockParams::random(c, &mut rng);
            }
        }
        let wd = config.widths[config.depth()];
        for b in p.middle.iter_mut() {
            *b = NafBlockParams::random(wd, &mut rng);
        }
        random_conv(&mut p.ending, &mut rng);
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), AnafError> {
        let fresh = Self::zeros(&self.config)?;
        let mut want = Vec::new();
        fresh.for_each_array(&mut |a| want.push(a.len()));
        let mut got = Vec::new();
        self.for_each_array(&mut |a| got.push(a.len()));
        if want != got {
            return Err(AnafError::Invalid("parameter arrays do not match the configuration".into()));
        }
        for b in self.blocks() {
            b.validate()?;
        }
        Ok(())
    }

    fn blocks(&self) -> impl Iterator<Item = &NafBlockParams> {
        self.stages
            .iter()
            .flat_map(|s| s.encoder.iter().chain(s.decoder.iter()))
            .chain(self.middle.iter())
    }

    /// Visits every array in file order: intro, then per level the encoder
    /// blocks, down, up, gate (`w_e, w_d, b_e, psi, b_psi`) and decoder
    /// blocks, then the bottleneck blocks and the ending conv.
    pub(crate) fn for_each_array(&self, f: &mut dyn FnMut(&[f32])) {
        f(&self.intro.weights);
        f(&self.intro.bias);
        for s in &self.stages {
            s.encoder.iter().for_each(|b| b.for_each_array(f));
            for p in [&s.down, &s.up] {
                f(&p.weights);
                f(&p.bias);
            }
            f(&s.gate.w_e);
            f(&s.gate.w_d);
            f(&s.gate.b_e);
            f(&s.gate.psi);
            f(std::slice::from_ref(&s.gate.b_psi));
            s.decoder.iter().for_each(|b| b.for_each_array(f));
        }
        self.middle.iter().for_each(|b| b.for_each_array(f));
        f(&self.ending.weights);
        f(&self.ending.bias);
    }

    pub(crate) fn for_each_array_mut(&mut self, f: &mut dyn FnMut(&mut [f32])) {
        f(&mut self.intro.weights);
        f(&mut self.intro.bias);
        for s in self.stages.iter_mut() {
            s.encoder.iter_mut().for_each(|b| b.for_each_array_mut(f));
            for p in [&mut s.down, &mut s.up] {
                f(&mut p.weights);
                f(&mut p.bias);
            }
            f(&mut s.gate.w_e);
            f(&mut s.gate.w_d);
            f(&mut s.gate.b_e);
            f(&mut s.gate.psi);
            f(std::slice::from_mut(&mut s.gate.b_psi));
            s.decoder.iter_mut().for_each(|b| b.for_each_array_mut(f));
        }
        self.middle.iter_mut().for_each(|b| b.for_each_array_mut(f));
        f(&mut self.ending.weights);
        f(&mut self.ending.bias);
    }

    pub fn parameter_count(&self) -> usize {
        let mut n = 0;
        self.for_each_array(&mut |a| n += a.len());
        n
    }
}

/// Encoder with stride-2 downsampling, bottleneck, decoder with nearest
/// upsampling; each skip adds `attention_gate(skip, up)` to the upsampled
/// path, and the ending conv output is added to the input.
pub fn anafnet_forward(x: &Tensor4, params: &AnafParams) -> Result<Tensor4, AnafError> {
    params.validate()?;
    let cfg = &params.config;
    let depth = cfg.depth();
    if x.c != cfg.image_channels {
        return Err(AnafError::Shape(format!(
            "network expects {} channels, got {}",
            cfg.image_channels, x.c
        )));
    }
    let m = 1usize << depth;
    if x.h % m != 0 || x.w % m != 0 || x.h == 0 || x.w == 0 {
        return Err(AnafError::Indivisible { h: x.h, w: x.w, depth });
    }
    let mut t = conv2d(x, &params.intro)?;
    let mut skips = Vec::with_capacity(depth);
    for s in &params.stages {
        for b in &s.encoder {
            t = nafblock(&t, b)?;
        }
        skips.push(t.clone());
        t = conv2d(&t, &s.down)?;
    }
    for b in &params.middle {
        t = nafblock(&t, b)?;
    }
    for (s, skip) in params.stages.iter().zip(&skips).rev() {
        let up = conv2d(&t.upsample2(), &s.up)?;
        let gated = attention_gate(skip, &up, &s.gate)?;
        t = up.add(&gated)?;
        for b in &s.decoder {
            t = nafblock(&t, b)?;
        }
    }
    x.add(&conv2d(&t, &params.ending)?)
}

/// Runs the network on an 8-bit image scaled to `[0, 1]`, edge-padded up to
/// a multiple of `2^depth` and cropped back.
pub fn deblur_image(img: &ImageU8, params: &AnafParams) -> Result<ImageU8, AnafError> {
    let c = img.channels();
    if c != params.config.image_channels {
        return Err(AnafError::Shape(format!(
            "image has {c} channels, network expects {}",
            params.config.image_channels
        )));
    }
    let m = 1usize << params.config.depth();
    let (w, h) = (img.width(), img.height());
    let (pw, ph) = (w.div_ceil(m) * m, h.div_ceil(m) * m);
    let x = Tensor4::from_fn(1, c, ph, pw, |_, k, y, xx| img.get(xx.min(w - 1), y.min(h - 1), k) as f32 / 255.0);
    let y = anafnet_forward(&x, params)?;
    if !y.is_finite() {
        return Err(AnafError::NonFinite);
    }
    let mut data = Vec::with_capacity(w * h * c);
    for yy in 0..h {
        for xx in 0..w {
            for k in 0..c {
                data.push((y.get(0, k, yy, xx) * 255.0).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Ok(ImageU8::new(w, h, c, data).expect("same size"))
}
