//! Raster input and preprocessing: PGM/PNG decoding, grayscale conversion,
//! bilinear resizing and gray-level quantization.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image file: {0}")]
    CorruptFile(String),
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("invalid quantization level count {0} (expected 2..=256)")]
    InvalidLevels(usize),
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    DataLength { expected: usize, actual: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidDimensions { width, height });
        }
        if data.len() != width * height {
            return Err(ImagingError::DataLength {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImagingError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, ImagingError> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }
}

/// Image whose pixels are bin indices in `0..levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    levels: usize,
    data: Vec<u8>,
}

impl QuantizedImage {
    pub fn new(
        width: usize,
        height: usize,
        levels: usize,
        data: Vec<u8>,
    ) -> Result<Self, ImagingError> {
        if !(2..=256).contains(&levels) {
            return Err(ImagingError::InvalidLevels(levels));
        }
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidDimensions { width, height });
        }
        if data.len() != width * height {
            return Err(ImagingError::DataLength {
                expected: width * height,
                actual: data.len(),
            });
        }
        if let Some(&bad) = data.iter().find(|&&v| v as usize >= levels) {
            return Err(ImagingError::CorruptFile(format!(
                "bin index {bad} out of range for {levels} levels"
            )));
        }
        Ok(Self { width, height, levels, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

/// How intensities are mapped onto gray levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizeMode {
    /// `floor(p * G / 256)` over the fixed `[0, 255]` range.
    #[default]
    Uniform,
    /// Stretch the image's own `[min, max]` onto the G levels first.
    MinMaxStretch,
}

/// Rec.601 luma, rounded half up. Integer arithmetic keeps it exact.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((weighted + 500) / 1000) as u8
}

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage, ImagingError> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    decode_image(&bytes)
}

/// Decodes PGM (P2/P5) or PNG from memory, sniffing the magic bytes.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    const PNG_MAGIC: &[u8] = &[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];
    if bytes.starts_with(PNG_MAGIC) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else {
        let head: String = bytes
            .iter()
            .take(2)
            .map(|&b| if b.is_ascii_graphic() { b as char } else { '?' })
            .collect();
        Err(ImagingError::UnsupportedFormat(format!("unrecognized magic {head:?}")))
    }
}

struct PgmHeader {
    binary: bool,
    width: usize,
    height: usize,
    payload_start: usize,
}

// Reads one whitespace-delimited header token, skipping `#` comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<(usize, usize)> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' && bytes[*pos] != b'\r' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    (start < *pos).then_some((start, *pos))
}

fn parse_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize, ImagingError> {
    let (s, e) = next_token(bytes, pos)
        .ok_or_else(|| ImagingError::CorruptFile(format!("missing {what}")))?;
    std::str::from_utf8(&bytes[s..e])
        .ok()
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| {
            ImagingError::CorruptFile(format!(
                "bad {what}: {:?}",
                String::from_utf8_lossy(&bytes[s..e])
            ))
        })
}

fn parse_pgm_header(bytes: &[u8]) -> Result<PgmHeader, ImagingError> {
    let binary = match &bytes[..2] {
        b"P2" => false,
        b"P5" => true,
        _ => return Err(ImagingError::UnsupportedFormat("not a PGM file".into())),
    };
    let mut pos = 2;
    let width = parse_number(bytes, &mut pos, "width")?;
    let height = parse_number(bytes, &mut pos, "height")?;
    let maxval = parse_number(bytes, &mut pos, "maxval")?;
    if maxval > 255 && maxval < 65536 {
        return Err(ImagingError::UnsupportedFormat(format!(
            "16-bit PGM (maxval {maxval})"
        )));
    }
    if maxval != 255 {
        return Err(ImagingError::CorruptFile(format!("maxval {maxval}, expected 255")));
    }
    if width == 0 || height == 0 {
        return Err(ImagingError::InvalidDimensions { width, height });
    }
    // Exactly one whitespace byte separates maxval from a binary raster.
    if binary {
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(ImagingError::CorruptFile("missing raster separator".into()));
        }
        pos += 1;
    }
    Ok(PgmHeader { binary, width, height, payload_start: pos })
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    let header = parse_pgm_header(bytes)?;
    let n = header
        .width
        .checked_mul(header.height)
        .ok_or(ImagingError::InvalidDimensions { width: header.width, height: header.height })?;
    let data = if header.binary {
        let payload = &bytes[header.payload_start..];
        if payload.len() < n {
            return Err(ImagingError::CorruptFile(format!(
                "truncated raster: {} of {n} bytes",
                payload.len()
            )));
        }
        payload[..n].to_vec()
    } else {
        let mut pos = header.payload_start;
        let mut data = Vec::with_capacity(n);
        for i in 0..n {
            let v = parse_number(bytes, &mut pos, "sample").map_err(|_| {
                ImagingError::CorruptFile(format!("truncated raster: {i} of {n} samples"))
            })?;
            if v > 255 {
                return Err(ImagingError::CorruptFile(format!("sample {v} exceeds maxval")));
            }
            data.push(v as u8);
        }
        data
    };
    GrayImage::new(header.width, header.height, data)
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    use png::{BitDepth, ColorType};

    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| ImagingError::CorruptFile(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| ImagingError::CorruptFile("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| ImagingError::CorruptFile(e.to_string()))?;
    if info.bit_depth != BitDepth::Eight {
        return Err(ImagingError::UnsupportedFormat(format!(
            "PNG bit depth {:?}",
            info.bit_depth
        )));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let stride = info.line_size;
    let channels = match info.color_type {
        ColorType::Grayscale => 1,
        ColorType::GrayscaleAlpha => 2,
        ColorType::Rgb => 3,
        ColorType::Rgba => 4,
        ColorType::Indexed => {
            return Err(ImagingError::UnsupportedFormat("indexed PNG".into()));
        }
    };
    let mut data = Vec::with_capacity(width * height);
    for row in buf.chunks(stride).take(height) {
        for px in row[..width * channels].chunks_exact(channels) {
            data.push(match channels {
                1 | 2 => px[0],
                _ => luma(px[0], px[1], px[2]),
            });
        }
    }
    GrayImage::new(width, height, data)
}

/// Encodes a binary (P5) PGM with maxval 255.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImagingError> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_pgm(img))?;
    Ok(())
}

/// Bilinear resize with half-pixel-center sampling and edge clamping.
pub fn resize(img: &GrayImage, out_w: usize, out_h: usize) -> Result<GrayImage, ImagingError> {
    if out_w == 0 || out_h == 0 {
        return Err(ImagingError::InvalidDimensions { width: out_w, height: out_h });
    }
    if out_w == img.width && out_h == img.height {
        return Ok(img.clone());
    }
    let xs = sample_positions(img.width, out_w);
    let ys = sample_positions(img.height, out_h);
    let mut data = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, ty) in &ys {
        for &(x0, x1, tx) in &xs {
            let p00 = img.get(x0, y0) as f64;
            let p10 = img.get(x1, y0) as f64;
            let p01 = img.get(x0, y1) as f64;
            let p11 = img.get(x1, y1) as f64;
            let top = p00 + (p10 - p00) * tx;
            let bottom = p01 + (p11 - p01) * tx;
            let v = top + (bottom - top) * ty;
            data.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(out_w, out_h, data)
}

// (left index, right index, weight of right) per output coordinate.
fn sample_positions(in_len: usize, out_len: usize) -> Vec<(usize, usize, f64)> {
    let scale = in_len as f64 / out_len as f64;
    let last = (in_len - 1) as f64;
    (0..out_len)
        .map(|o| {
            let src = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let i0 = src.floor() as usize;
            let i1 = (i0 + 1).min(in_len - 1);
            (i0, i1, src - i0 as f64)
        })
        .collect()
}

/// Maps one intensity to its uniform-width bin.
pub fn quantize_value(intensity: u8, levels: usize) -> u8 {
    (intensity as usize * levels / 256) as u8
}

pub fn quantize(img: &GrayImage, levels: usize) -> Result<QuantizedImage, ImagingError> {
    quantize_with(img, levels, QuantizeMode::Uniform)
}

pub fn quantize_with(
    img: &GrayImage,
    levels: usize,
    mode: QuantizeMode,
) -> Result<QuantizedImage, ImagingError> {
    if !(2..=256).contains(&levels) {
        return Err(ImagingError::InvalidLevels(levels));
    }
    let data = match mode {
        QuantizeMode::Uniform => img.data.iter().map(|&p| quantize_value(p, levels)).collect(),
        QuantizeMode::MinMaxStretch => {
            let lo = *img.data.iter().min().unwrap_or(&0) as usize;
            let hi = *img.data.iter().max().unwrap_or(&0) as usize;
            let span = hi - lo + 1;
            img.data
                .iter()
                .map(|&p| ((p as usize - lo) * levels / span) as u8)
                .collect()
        }
    };
    QuantizedImage::new(img.width, img.height, levels, data)
}
