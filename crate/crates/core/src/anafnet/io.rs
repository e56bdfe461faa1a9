//! Parameter file: `PARAM_MAGIC`, then little-endian `u32` header fields
//! `image_channels, depth, widths[depth+1], blocks[depth+1], d_init[depth]`,
//! then every array as little-endian `f32` in the order of
//! `AnafParams::for_each_array`. No trailing bytes.

use std::io::{Read, Write};

use super::net::{AnafConfig, AnafParams};
use super::AnafError;

pub const PARAM_MAGIC: &[u8; 8] = b"ANAFNET1";

const MAX_DEPTH: usize = 8;
const MAX_WIDTH: usize = 4096;
const MAX_BLOCKS: usize = 64;

pub fn write_params(mut w: impl Write, params: &AnafParams) -> Result<(), AnafError> {
    params.validate()?;
    let cfg = &params.config;
    let mut buf = PARAM_MAGIC.to_vec();
    let mut put = |v: usize| buf.extend_from_slice(&(v as u32).to_le_bytes());
    put(cfg.image_channels);
    put(cfg.depth());
    cfg.widths.iter().for_each(|&v| put(v));
    cfg.blocks.iter().for_each(|&v| put(v));
    cfg.d_init.iter().for_each(|&v| put(v));
    params.for_each_array(&mut |a| {
        for v in a {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    });
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_params(mut r: impl Read) -> Result<AnafParams, AnafError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let fmt = |m: &str| AnafError::Format(m.to_string());
    if bytes.len() < 8 || &bytes[..8] != PARAM_MAGIC {
        return Err(fmt("bad magic"));
    }
    let mut pos = 8;
    let mut word = |what: &str| -> Result<usize, AnafError> {
        let b = bytes
            .get(pos..pos + 4)
            .ok_or_else(|| fmt(&format!("truncated header at {what}")))?;
        pos += 4;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    };
    let image_channels = word("image_channels")?;
    let depth = word("depth")?;
    if depth > MAX_DEPTH {
        return Err(fmt(&format!("depth {depth} exceeds {MAX_DEPTH}")));
    }
    let widths = (0..=depth).map(|_| word("widths")).collect::<Result<Vec<_>, _>>()?;
    let blocks = (0..=depth).map(|_| word("blocks")).collect::<Result<Vec<_>, _>>()?;
    let d_init = (0..depth).map(|_| word("d_init")).collect::<Result<Vec<_>, _>>()?;
    if image_channels > MAX_WIDTH
        || widths.iter().chain(&d_init).any(|&v| v > MAX_WIDTH)
        || blocks.iter().any(|&v| v > MAX_BLOCKS)
    {
        return Err(fmt("header sizes out of range"));
    }
    let config = AnafConfig {
        image_channels,
        widths,
        blocks,
        d_init,
    };
    let mut params = AnafParams::zeros(&config)?;
    let mut body = &bytes[pos..];
    let mut err = None;
    params.for_each_array_mut(&mut |a| {
        if err.is_some() {
            return;
        }
        let need = a.len() * 4;
        if body.len() < need {
            err = Some(fmt("truncated parameter data"));
            return;
        }
        for (v, chunk) in a.iter_mut().zip(body[..need].chunks_exact(4)) {
            *v = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        }
        body = &body[need..];
    });
    if let Some(e) = err {
        return Err(e);
    }
    if !body.is_empty() {
        return Err(fmt(&format!("{} trailing bytes", body.len())));
    }
    let mut finite = true;
    params.for_each_array(&mut |a| finite &= a.iter().all(|v| v.is_finite()));
    if !finite {
        return Err(AnafError::NonFinite);
    }
    Ok(params)
}
