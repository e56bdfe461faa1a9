//! Binary PGM/PPM (bit-exact) and 8-bit PNG reading and writing.

use std::io::Cursor;
use std::path::Path;

use thiserror::Error;

use super::{ImageError, ImageU8};

/// Upper bound on decoded pixels; larger headers are reported as overflow.
const MAX_PIXELS: usize = 1 << 28;

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("truncated file: expected {expected} payload bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("image dimensions {width}x{height} overflow the supported size")]
    DimensionOverflow { width: u64, height: u64 },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("png decoding failed: {0}")]
    Png(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Ppm,
    Png,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" => Some(Self::Pgm),
            "ppm" => Some(Self::Ppm),
            "png" => Some(Self::Png),
            _ => None,
        }
    }
}

pub fn read_image(path: impl AsRef<Path>) -> Result<ImageU8, ImageIoError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ImageIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_image(&bytes)
}

pub fn write_image(path: impl AsRef<Path>, img: &ImageU8) -> Result<(), ImageIoError> {
    let path = path.as_ref();
    let format = ImageFormat::from_path(path).ok_or_else(|| {
        ImageIoError::UnsupportedFormat(format!("cannot infer format from {}", path.display()))
    })?;
    let bytes = encode_image(img, format)?;
    std::fs::write(path, bytes).map_err(|source| ImageIoError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Decodes by magic bytes: `P5`, `P6` or the PNG signature.
pub fn decode_image(bytes: &[u8]) -> Result<ImageU8, ImageIoError> {
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(bytes)
    } else {
        let head: String = bytes.iter().take(4).map(|b| format!("{b:02x}")).collect();
        Err(ImageIoError::UnsupportedFormat(format!("unknown magic {head}")))
    }
}

pub fn encode_image(img: &ImageU8, format: ImageFormat) -> Result<Vec<u8>, ImageIoError> {
    match format {
        ImageFormat::Pgm | ImageFormat::Ppm => {
            let want = if format == ImageFormat::Pgm { 1 } else { 3 };
            if img.channels() != want {
                return Err(ImageIoError::UnsupportedFormat(format!(
                    "{format:?} requires {want} channel(s), image has {}",
                    img.channels()
                )));
            }
            Ok(encode_pnm(img))
        }
        ImageFormat::Png => encode_png(img),
    }
}

fn encode_pnm(img: &ImageU8) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u64, ImageIoError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageIoError::MalformedHeader(format!("missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| ImageIoError::MalformedHeader(format!("{what} out of range")))
    }
}

fn decode_pnm(bytes: &[u8]) -> Result<ImageU8, ImageIoError> {
    let channels = if bytes[1] == b'5' { 1 } else { 3 };
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(ImageIoError::UnsupportedFormat(format!(
            "maxval {maxval} (only 8-bit 255 is supported)"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(b' ' | b'\t' | b'\r' | b'\n') => cur.pos += 1,
        _ => return Err(ImageIoError::MalformedHeader("missing raster separator".into())),
    }
    if width == 0 || height == 0 {
        return Err(ImageIoError::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    let expected = width
        .checked_mul(height)
        .filter(|&p| p as u128 <= MAX_PIXELS as u128)
        .map(|p| p as usize * channels)
        .ok_or(ImageIoError::DimensionOverflow { width, height })?;
    let payload = &bytes[cur.pos..];
    if payload.len() < expected {
        return Err(ImageIoError::Truncated {
            expected,
            found: payload.len(),
        });
    }
    Ok(ImageU8::new(
        width as usize,
        height as usize,
        channels,
        payload[..expected].to_vec(),
    )?)
}

fn decode_png(bytes: &[u8]) -> Result<ImageU8, ImageIoError> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(png_error)?;
    {
        let info = reader.info();
        let (w, h) = (info.width as u64, info.height as u64);
        if w * h > MAX_PIXELS as u64 {
            return Err(ImageIoError::DimensionOverflow { width: w, height: h });
        }
    }
    let size = reader
        .output_buffer_size()
        .ok_or(ImageIoError::DimensionOverflow { width: 0, height: 0 })?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(png_error)?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let src_channels = match frame.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => {
            return Err(ImageIoError::UnsupportedFormat("unexpanded palette png".into()))
        }
    };
    if frame.bit_depth != png::BitDepth::Eight {
        return Err(ImageIoError::UnsupportedFormat(format!(
            "png bit depth {:?}",
            frame.bit_depth
        )));
    }
    let out_channels = if src_channels <= 2 { 1 } else { 3 };
    let mut data = Vec::with_capacity(w * h * out_channels);
    for row in buf.chunks_exact(frame.line_size).take(h) {
        for px in row[..w * src_channels].chunks_exact(src_channels) {
            data.extend_from_slice(&px[..out_channels]);
        }
    }
    Ok(ImageU8::new(w, h, out_channels, data)?)
}

fn png_error(e: png::DecodingError) -> ImageIoError {
    match e {
        png::DecodingError::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            ImageIoError::Truncated {
                expected: 0,
                found: 0,
            }
        }
        other => ImageIoError::Png(other.to_string()),
    }
}

fn encode_png(img: &ImageU8) -> Result<Vec<u8>, ImageIoError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        enc.set_color(if img.channels() == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc
            .write_header()
            .map_err(|e| ImageIoError::Png(e.to_string()))?;
        writer
            .write_image_data(img.data())
            .map_err(|e| ImageIoError::Png(e.to_string()))?;
    }
    Ok(out)
}
