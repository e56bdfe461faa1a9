use super::ops::{conv2d, layer_norm, sca, simple_gate, ConvParams};
use super::{AnafError, Tensor4};
use crate::rng::XorShiftRng;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormParams {
    pub gamma: Vec<f32>,
    pub beta: Vec<f32>,
}

impl LayerNormParams {
    pub fn identity(c: usize) -> Self {
        Self {
            gamma: vec![1.0; c],
            beta: vec![0.0; c],
        }
    }
}

/// One NAFNet block over `channels` features.
#[derive(Debug, Clone, PartialEq)]
pub struct NafBlockParams {
    pub channels: usize,
    pub norm1: LayerNormParams,
    /// 1x1, c -> 2c.
    pub expand: ConvParams,
    /// 3x3 depthwise over 2c.
    pub depthwise: ConvParams,
    pub sca: ConvParams,
    /// 1x1, c -> c.
    pub project: ConvParams,
    pub norm2: LayerNormParams,
    /// 1x1, c -> 2c.
    pub ffn_expand: ConvParams,
    /// 1x1, c -> c.
    pub ffn_project: ConvParams,
}

pub(crate) fn random_conv(p: &mut ConvParams, rng: &mut XorShiftRng) {
    let fan_in = (p.in_channels / p.groups * p.kernel * p.kernel) as f64;
    let bound = 1.0 / fan_in.sqrt();
    for v in p.weights.iter_mut() {
        *v = rng.uniform(-bound, bound) as f32;
    }
    for v in p.bias.iter_mut() {
        *v = rng.uniform(-0.05, 0.05) as f32;
    }
}

impl NafBlockParams {
    /// Zero convolutions, identity norms: the block is the identity map.
    pub fn zeros(c: usize) -> Self {
        Self {
            channels: c,
            norm1: LayerNormParams::identity(c),
            expand: ConvParams::zeros(2 * c, c, 1, 1, 1),
            depthwise: ConvParams::zeros(2 * c, 2 * c, 3, 2 * c, 1),
            sca: ConvParams::zeros(c, c, 1, 1, 1),
            project: ConvParams::zeros(c, c, 1, 1, 1),
            norm2: LayerNormParams::identity(c),
            ffn_expand: ConvParams::zeros(2 * c, c, 1, 1, 1),
            ffn_project: ConvParams::zeros(c, c, 1, 1, 1),
        }
    }

    pub fn random(c: usize, rng: &mut XorShiftRng) -> Self {
        let mut p = Self::zeros(c);
        for conv in [
            &mut p.expand,
            &mut p.depthwise,
            &mut p.sca,
            &mut p.project,
            &mut p.ffn_expand,
            &mut p.ffn_project,
        ] {
            random_conv(conv, rng);
        }
        for ln in [&mut p.norm1, &mut p.norm2] {
            for g in ln.gamma.iter_mut() {
                *g = rng.uniform(0.8, 1.2) as f32;
            }
            for b in ln.beta.iter_mut() {
                *b = rng.uniform(-0.1, 0.1) as f32;
            }
        }
        p
    }

    /// Checks that every stage width chains into the next.
    pub fn validate(&self) -> Result<(), AnafError> {
        let c = self.channels;
        let shapes = [
            (&self.expand, 2 * c, c, 1, 1),
            (&self.depthwise, 2 * c, 2 * c, 3, 2 * c),
            (&self.sca, c, c, 1, 1),
            (&self.project, c, c, 1, 1),
            (&self.ffn_expand, 2 * c, c, 1, 1),
            (&self.ffn_project, c, c, 1, 1),
        ];
        for (p, o, i, k, g) in shapes {
            if (p.out_channels, p.in_channels, p.kernel, p.groups, p.stride) != (o, i, k, g, 1) {
                return Err(AnafError::Invalid(format!(
                    "block of width {c}: conv {}x{}->{} groups {} does not fit",
                    p.kernel, p.in_channels, p.out_channels, p.groups
                )));
            }
            p.validate()?;
        }
        for ln in [&self.norm1, &self.norm2] {
            if ln.gamma.len() != c || ln.beta.len() != c {
                return Err(AnafError::Invalid(format!("layer norm width for block of width {c}")));
            }
        }
        Ok(())
    }

    pub(crate) fn for_each_array(&self, f: &mut dyn FnMut(&[f32])) {
        f(&self.norm1.gamma);
        f(&self.norm1.beta);
        for p in [&self.expand, &self.depthwise, &self.sca, &self.project] {
            f(&p.weights);
            f(&p.bias);
        }
        f(&self.norm2.gamma);
        f(&self.norm2.beta);
        for p in [&self.ffn_expand, &self.ffn_project] {
            f(&p.weights);
            f(&p.bias);
        }
    }

    pub(crate) fn for_each_array_mut(&mut self, f: &mut dyn FnMut(&mut [f32])) {
        f(&mut self.norm1.gamma);
        f(&mut self.norm1.beta);
        for p in [&mut self.expand, &mut self.depthwise, &mut self.sca, &mut self.project] {
            f(&mut p.weights);
            f(&mut p.bias);
        }
        f(&mut self.norm2.gamma);
        f(&mut self.norm2.beta);
        for p in [&mut self.ffn_expand, &mut self.ffn_project] {
            f(&mut p.weights);
            f(&mut p.bias);
        }
    }
}

/// `y = x + project(sca(gate(depthwise(expand(ln1(x))))))`, then
/// `y + ffn_project(gate(ffn_expand(ln2(y))))`.
pub fn nafblock(x: &Tensor4, p: &NafBlockParams) -> Result<Tensor4, AnafError> {
    p.validate()?;
    if x.c != p.channels {
        return Err(AnafError::Shape(format!("block of width {} on {} channels", p.channels, x.c)));
    }
    let t = layer_norm(x, &p.norm1.gamma, &p.norm1.beta)?;
    let t = conv2d(&t, &p.expand)?;
    let t = conv2d(&t, &p.depthwise)?;
    let t = simple_gate(&t)?;
    let t = sca(&t, &p.sca)?;
    let t = conv2d(&t, &p.project)?;
    let y = x.add(&t)?;
    let t = layer_norm(&y, &p.norm2.gamma, &p.norm2.beta)?;
    let t = conv2d(&t, &p.ffn_expand)?;
    let t = simple_gate(&t)?;
    let t = conv2d(&t, &p.ffn_project)?;
    y.add(&t)
}
