use rayon::prelude::*;

use super::{AnafError, Tensor4};

pub const LN_EPS: f32 = 1e-6;

/// Convolution weights `[out][in / groups][k][k]` plus one bias per output.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel: usize,
    pub groups: usize,
    pub stride: usize,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

impl ConvParams {
    pub fn zeros(out_channels: usize, in_channels: usize, kernel: usize, groups: usize, stride: usize) -> Self {
        Self {
            out_channels,
            in_channels,
            kernel,
            groups,
            stride,
            weights: vec![0.0; out_channels * (in_channels / groups.max(1)) * kernel * kernel],
            bias: vec![0.0; out_channels],
        }
    }

    /// 1x1 convolution with the given `[out][in]` matrix and zero bias.
    pub fn pointwise(out_channels: usize, in_channels: usize, weights: Vec<f32>) -> Self {
        Self {
            out_channels,
            in_channels,
            kernel: 1,
            groups: 1,
            stride: 1,
            weights,
            bias: vec![0.0; out_channels],
        }
    }

    pub fn validate(&self) -> Result<(), AnafError> {
        let bad = |m: String| Err(AnafError::Invalid(m));
        if self.kernel != 1 && self.kernel != 3 {
            return bad(format!("kernel {} (expected 1 or 3)", self.kernel));
        }
        if self.stride != 1 && self.stride != 2 {
            return bad(format!("stride {}", self.stride));
        }
        if self.groups == 0 || self.in_channels % self.groups != 0 || self.out_channels % self.groups != 0 {
            return bad(format!(
                "{} groups for {} -> {} channels",
                self.groups, self.in_channels, self.out_channels
            ));
        }
        let want = self.out_channels * (self.in_channels / self.groups) * self.kernel * self.kernel;
        if self.weights.len() != want || self.bias.len() != self.out_channels {
            return bad(format!(
                "{} weights / {} biases, expected {want} / {}",
                self.weights.len(),
                self.bias.len(),
                self.out_channels
            ));
        }
        Ok(())
    }
}

/// Cross-correlation with zero padding `kernel / 2`; spatial size is kept
/// at stride 1 and halved (rounding up) at stride 2.
pub fn conv2d(x: &Tensor4, p: &ConvParams) -> Result<Tensor4, AnafError> {
    p.validate()?;
    if x.c != p.in_channels {
        return Err(AnafError::Shape(format!(
            "conv expects {} input channels, got {}",
            p.in_channels, x.c
        )));
    }
    let (k, s) = (p.kernel, p.stride);
    let pad = (k / 2) as isize;
    let oh = (x.h + 2 * pad as usize - k) / s + 1;
    let ow = (x.w + 2 * pad as usize - k) / s + 1;
    let cin_g = p.in_channels / p.groups;
    let cout_g = p.out_channels / p.groups;
    let mut out = vec![0.0f32; x.n * p.out_channels * oh * ow];
    out.par_chunks_mut(oh * ow).enumerate().for_each(|(plane, dst)| {
        let (n, o) = (plane / p.out_channels, plane % p.out_channels);
        let g = o / cout_g;
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = p.bias[o];
                for ic in 0..cin_g {
                    let c = g * cin_g + ic;
                    let wbase = (o * cin_g + ic) * k * k;
                    for ky in 0..k {
                        let iy = (oy * s) as isize + ky as isize - pad;
                        if iy < 0 || iy >= x.h as isize {
                            continue;
                        }
                        for kx in 0..k {
                            let ix = (ox * s) as isize + kx as isize - pad;
                            if ix < 0 || ix >= x.w as isize {
                                continue;
                            }
                            acc += p.weights[wbase + ky * k + kx] * x.get(n, c, iy as usize, ix as usize);
                        }
                    }
                }
                dst[oy * ow + ox] = acc;
            }
        }
    });
    Ok(Tensor4::raw(x.n, p.out_channels, oh, ow, out))
}

/// Normalizes over channels at every `(n, y, x)`, then `gamma * v + beta`.
pub fn layer_norm(x: &Tensor4, gamma: &[f32], beta: &[f32]) -> Result<Tensor4, AnafError> {
    if gamma.len() != x.c || beta.len() != x.c {
        return Err(AnafError::Shape(format!(
            "layer norm over {} channels with {} / {} affine values",
            x.c,
            gamma.len(),
            beta.len()
        )));
    }
    let mut out = x.clone();
    let plane = x.h * x.w;
    for n in 0..x.n {
        for p in 0..plane {
            let at = |c: usize| (n * x.c + c) * plane + p;
            let v = |c: usize| x.data[at(c)] as f64;
            let mean = (0..x.c).map(v).sum::<f64>() / x.c as f64;
            let var = (0..x.c).map(|c| (v(c) - mean).powi(2)).sum::<f64>() / x.c as f64;
            let inv = 1.0 / (var + LN_EPS as f64).sqrt();
            for c in 0..x.c {
                out.data[at(c)] = gamma[c] * ((v(c) - mean) * inv) as f32 + beta[c];
            }
        }
    }
    Ok(out)
}

/// `out[k] = x[k] * x[k + c/2]`.
pub fn simple_gate(x: &Tensor4) -> Result<Tensor4, AnafError> {
    if x.c % 2 != 0 {
        return Err(AnafError::OddChannels(x.c));
    }
    let half = x.c / 2;
    Ok(Tensor4::from_fn(x.n, half, x.h, x.w, |n, c, y, xx| {
        x.get(n, c, y, xx) * x.get(n, c + half, y, xx)
    }))
}

/// Simplified channel attention: global average pool, one 1x1 convolution,
/// channelwise product with the input.
pub fn sca(x: &Tensor4, w: &ConvParams) -> Result<Tensor4, AnafError> {
    if w.kernel != 1 || w.in_channels != x.c || w.out_channels != x.c {
        return Err(AnafError::Shape(format!(
            "channel attention over {} channels with a {}x{} -> {} conv",
            x.c, w.kernel, w.in_channels, w.out_channels
        )));
    }
    let plane = (x.h * x.w) as f32;
    let pooled = Tensor4::from_fn(x.n, x.c, 1, 1, |n, c, _, _| {
        let base = x.index(n, c, 0, 0);
        x.data[base..base + x.h * x.w].iter().sum::<f32>() / plane
    });
    let a = conv2d(&pooled, w)?;
    Ok(Tensor4::from_fn(x.n, x.c, x.h, x.w, |n, c, y, xx| x.get(n, c, y, xx) * a.get(n, c, 0, 0)))
}

/// Skip-connection gate. `w_e` is `[d_init][enc_channels]`, `w_d` is
/// `[d_init][dec_channels]`; both activations are the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionGateParams {
    pub enc_channels: usize,
    pub dec_channels: usize,
    pub d_init: usize,
    pub w_e: Vec<f32>,
    pub w_d: Vec<f32>,
    pub b_e: Vec<f32>,
    pub psi: Vec<f32>,
    pub b_psi: f32,
}

impl AttentionGateParams {
    /// All-zero projections with `b_psi = 1`: the gate passes `x_d` through.
    pub fn passthrough(enc_channels: usize, dec_channels: usize, d_init: usize) -> Self {
        Self {
            enc_channels,
            dec_channels,
            d_init,
            w_e: vec![0.0; d_init * enc_channels],
            w_d: vec![0.0; d_init * dec_channels],
            b_e: vec![0.0; d_init],
            psi: vec![0.0; d_init],
            b_psi: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), AnafError> {
        if self.w_e.len() != self.d_init * self.enc_channels
            || self.w_d.len() != self.d_init * self.dec_channels
            || self.b_e.len() != self.d_init
            || self.psi.len() != self.d_init
        {
            return Err(AnafError::Invalid(format!(
                "attention gate sizes for d_init {}, channels {} / {}",
                self.d_init, self.enc_channels, self.dec_channels
            )));
        }
        Ok(())
    }
}

/// `W_attn = psi^T (W_e x_e + W_d x_d + b_e) + b_psi` per pixel, then
/// `x_d * W_attn` broadcast over the channels of `x_d`.
pub fn attention_gate(x_e: &Tensor4, x_d: &Tensor4, p: &AttentionGateParams) -> Result<Tensor4, AnafError> {
    p.validate()?;
    if (x_e.n, x_e.h, x_e.w) != (x_d.n, x_d.h, x_d.w) {
        return Err(AnafError::Shape(format!(
            "gate inputs {:?} and {:?}",
            x_e.shape(),
            x_d.shape()
        )));
    }
    if x_e.c != p.enc_channels || x_d.c != p.dec_channels {
        return Err(AnafError::Shape(format!(
            "gate expects {} / {} channels, got {} / {}",
            p.enc_channels, p.dec_channels, x_e.c, x_d.c
        )));
    }
    let (n, h, w) = (x_d.n, x_d.h, x_d.w);
    let mut attn = vec![0.0f32; n * h * w];
    attn.par_chunks_mut(w).enumerate().for_each(|(row, dst)| {
        let (b, y) = (row / h, row % h);
        for (x, out) in dst.iter_mut().enumerate() {
            let mut a = p.b_psi;
            for k in 0..p.d_init {
                let mut z = p.b_e[k];
                for c in 0..p.enc_channels {
                    z += p.w_e[k * p.enc_channels + c] * x_e.get(b, c, y, x);
                }
                for c in 0..p.dec_channels {
                    z += p.w_d[k * p.dec_channels + c] * x_d.get(b, c, y, x);
                }
                a += p.psi[k] * z;
            }
            *out = a;
        }
    });
    Ok(Tensor4::from_fn(n, x_d.c, h, w, |b, c, y, x| {
        x_d.get(b, c, y, x) * attn[(b * h + y) * w + x]
    }))
}
