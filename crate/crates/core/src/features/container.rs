//! Binary keypoint/descriptor container used between the `detect` and
//! `match` commands.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic  b"PFKD"
//! u32    version (1)
//! u32    image width, u32 image height
//! u32    record count
//! u32    descriptor bits (256 or 512)
//! count x { f32 x, f32 y, f32 angle, f32 response, u32 octave, bits/8 descriptor bytes }
//! ```

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{BinaryDescriptor, DescriptorKind, Keypoint};

pub const MAGIC: &[u8; 4] = b"PFKD";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a feature container (bad magic)")]
    BadMagic,
    #[error("unsupported container version {0}")]
    Version(u32),
    #[error("unsupported descriptor length {0} bits")]
    DescriptorBits(u32),
    #[error("keypoint and descriptor counts differ ({0} vs {1})")]
    CountMismatch(usize, usize),
    #[error("mixed descriptor lengths in one container")]
    MixedLengths,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub width: u32,
    pub height: u32,
    pub kind: DescriptorKind,
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<BinaryDescriptor>,
}

impl FeatureSet {
    pub fn write_to(&self, mut w: impl Write) -> Result<(), ContainerError> {
        if self.keypoints.len() != self.descriptors.len() {
            return Err(ContainerError::CountMismatch(self.keypoints.len(), self.descriptors.len()));
        }
        if self.descriptors.iter().any(|d| d.kind() != self.kind) {
            return Err(ContainerError::MixedLengths);
        }
        w.write_all(MAGIC)?;
        for v in [
            VERSION,
            self.width,
            self.height,
            self.keypoints.len() as u32,
            self.kind.bits() as u32,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for (k, d) in self.keypoints.iter().zip(&self.descriptors) {
            for f in [k.x, k.y, k.angle, k.response] {
                w.write_all(&f.to_le_bytes())?;
            }
            w.write_all(&k.octave.to_le_bytes())?;
            w.write_all(d.bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, ContainerError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(ContainerError::BadMagic);
        }
        let mut u32s = [0u32; 5];
        for v in u32s.iter_mut() {
            *v = read_u32(&mut r)?;
        }
        let [version, width, height, count, bits] = u32s;
        if version != VERSION {
            return Err(ContainerError::Version(version));
        }
        let kind = DescriptorKind::from_bits(bits as usize).ok_or(ContainerError::DescriptorBits(bits))?;
        let mut keypoints = Vec::with_capacity(count.min(1 << 20) as usize);
        let mut descriptors = Vec::with_capacity(keypoints.capacity());
        for _ in 0..count {
            let x = read_f32(&mut r)?;
            let y = read_f32(&mut r)?;
            let angle = read_f32(&mut r)?;
            let response = read_f32(&mut r)?;
            let octave = read_u32(&mut r)?;
            let mut bytes = vec![0u8; kind.bits() / 8];
            r.read_exact(&mut bytes)?;
            keypoints.push(Keypoint {
                x,
                y,
                octave,
                angle,
                response,
            });
            descriptors.push(BinaryDescriptor::from_bytes(bytes).expect("length from kind"));
        }
        Ok(Self {
            width,
            height,
            kind,
            keypoints,
            descriptors,
        })
    }
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32(r: &mut impl Read) -> io::Result<f32> {
    Ok(f32::from_bits(read_u32(r)?))
}
