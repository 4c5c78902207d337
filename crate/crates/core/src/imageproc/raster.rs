use std::fs;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};

/// Single-channel floating-point image, row-major.
///
/// Intensities are normalized to `[0, 1]` when loaded from disk; the type
/// itself only requires finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "raster must be non-empty, got {width}x{height}"
            )));
        }
        if width.checked_mul(height) != Some(data.len()) {
            return Err(Error::Dimension(format!(
                "{width}x{height} raster needs {} values, got {}",
                width as u128 * height as u128,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite intensity at index {i}")));
        }
        Ok(Raster {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Raster::new(width, height, vec![value; width * height])
    }

    /// Builds a raster by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Raster::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// On-disk grayscale formats understood by [`load_raster`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    /// Binary PGM (`P5`).
    Pgm,
    /// Grayscale PNG.
    PngGray,
}

impl RasterFormat {
    /// Guesses the format from a file extension (`.pgm`, `.png`).
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" => Some(RasterFormat::Pgm),
            "png" => Some(RasterFormat::PngGray),
            _ => None,
        }
    }
}

/// Integer sample depth of an encoded raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn max_value(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

/// Loads a grayscale raster, scaling intensities into `[0, 1]`.
pub fn load_raster(path: &Path, format: RasterFormat) -> Result<Raster> {
    load_raster_with_depth(path, format).map(|(r, _)| r)
}

/// Like [`load_raster`] but also reports the stored bit depth, so a filtered
/// result can be written back at the same depth.
pub fn load_raster_with_depth(path: &Path, format: RasterFormat) -> Result<(Raster, BitDepth)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        RasterFormat::Pgm => decode_pgm(&bytes),
        RasterFormat::PngGray => decode_png(&bytes),
    }
}

pub fn save_raster(raster: &Raster, path: &Path, format: RasterFormat, depth: BitDepth) -> Result<()> {
    let bytes = match format {
        RasterFormat::Pgm => encode_pgm(raster, depth),
        RasterFormat::PngGray => encode_png(raster, depth)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn quantize(v: f64, max: f64) -> u32 {
    (v.clamp(0.0, 1.0) * max).round() as u32
}

/// Decodes a binary (`P5`) PGM. `maxval < 256` means one byte per sample,
/// otherwise two bytes big-endian.
pub fn decode_pgm(bytes: &[u8]) -> Result<(Raster, BitDepth)> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::Format("not a binary PGM (expected P5 magic)".into()));
    }
    let width = parse_header_int(bytes, &mut pos, "width")?;
    let height = parse_header_int(bytes, &mut pos, "height")?;
    let maxval = parse_header_int(bytes, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format(format!("zero-sized PGM {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("PGM maxval {maxval} outside 1..=65535")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Format("missing whitespace after PGM header".into())),
    }
    let wide = maxval > 255;
    let sample_bytes = if wide { 2 } else { 1 };
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("PGM dimensions overflow".into()))?;
    let need = n
        .checked_mul(sample_bytes)
        .ok_or_else(|| Error::Format("PGM dimensions overflow".into()))?;
    let payload = &bytes[pos..];
    if payload.len() < need {
        return Err(Error::Format(format!(
            "truncated PGM payload: need {need} bytes, have {}",
            payload.len()
        )));
    }
    let scale = maxval as f64;
    let mut data = Vec::with_capacity(n);
    for i in 0..n {
        let v = if wide {
            u16::from_be_bytes([payload[2 * i], payload[2 * i + 1]]) as usize
        } else {
            payload[i] as usize
        };
        if v > maxval {
            return Err(Error::Format(format!("sample {v} exceeds maxval {maxval}")));
        }
        data.push(v as f64 / scale);
    }
    let depth = if wide { BitDepth::Sixteen } else { BitDepth::Eight };
    Ok((Raster::new(width, height, data)?, depth))
}

fn skip_whitespace_and_comments(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        let b = bytes[*pos];
        if b == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else if b.is_ascii_whitespace() {
            *pos += 1;
        } else {
            break;
        }
    }
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    skip_whitespace_and_comments(bytes, pos);
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Format("truncated PGM header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn parse_header_int(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .filter(|s| s.len() <= 10 && s.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| Error::Format(format!("bad PGM {what}")))
}

pub fn encode_pgm(raster: &Raster, depth: BitDepth) -> Vec<u8> {
    let max = depth.max_value();
    let mut out = format!("P5\n{} {}\n{}\n", raster.width, raster.height, max as u32).into_bytes();
    for &v in &raster.data {
        let q = quantize(v, max);
        match depth {
            BitDepth::Eight => out.push(q as u8),
            BitDepth::Sixteen => out.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    out
}

pub fn decode_png(bytes: &[u8]) -> Result<(Raster, BitDepth)> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    let (color, bit_depth) = {
        let info = reader.info();
        (info.color_type, info.bit_depth)
    };
    if color != png::ColorType::Grayscale {
        return Err(Error::Format(format!("PNG color type {color:?} is not grayscale")));
    }
    let depth = match bit_depth {
        png::BitDepth::Eight => BitDepth::Eight,
        png::BitDepth::Sixteen => BitDepth::Sixteen,
        other => return Err(Error::Format(format!("unsupported PNG bit depth {other:?}"))),
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Format("PNG too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let buf = &buf[..frame.buffer_size()];
    let max = depth.max_value();
    let data: Vec<f64> = match depth {
        BitDepth::Eight => buf.iter().map(|&b| b as f64 / max).collect(),
        BitDepth::Sixteen => buf
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / max)
            .collect(),
    };
    Ok((Raster::new(w, h, data)?, depth))
}

pub fn encode_png(raster: &Raster, depth: BitDepth) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(BufWriter::new(&mut out), raster.width as u32, raster.height as u32);
        encoder.set_color(png::ColorType::Grayscale);
        let max = depth.max_value();
        let samples: Vec<u8> = match depth {
            BitDepth::Eight => {
                encoder.set_depth(png::BitDepth::Eight);
                raster.data.iter().map(|&v| quantize(v, max) as u8).collect()
            }
            BitDepth::Sixteen => {
                encoder.set_depth(png::BitDepth::Sixteen);
                raster
                    .data
                    .iter()
                    .flat_map(|&v| (quantize(v, max) as u16).to_be_bytes())
                    .collect()
            }
        };
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Format(format!("PNG: {e}")))?;
        writer
            .write_image_data(&samples)
            .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    }
    Ok(out)
}
