use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{resize_bilinear, Raster};

pub const COMPOSITE_MAGIC: &[u8; 5] = b"LTCR1";
pub const DEFAULT_TARGET_SIZE: usize = 56;

/// Fixed channel order of a [`CompositeRaster`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Sar = 0,
    Denoised = 1,
    TranslatedEo = 2,
}

/// Three equally sized channels: original SAR, denoised SAR, translated EO.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRaster {
    channels: [Raster; 3],
}

impl CompositeRaster {
    pub fn new(sar: Raster, denoised: Raster, eo_translated: Raster) -> Result<Self> {
        let dims = (sar.width(), sar.height());
        for (name, r) in [("denoised", &denoised), ("translated EO", &eo_translated)] {
            if (r.width(), r.height()) != dims {
                return Err(Error::Dimension(format!(
                    "{name} channel is {}x{}, SAR channel is {}x{}",
                    r.width(),
                    r.height(),
                    dims.0,
                    dims.1
                )));
            }
        }
        Ok(CompositeRaster {
            channels: [sar, denoised, eo_translated],
        })
    }

    pub fn width(&self) -> usize {
        self.channels[0].width()
    }

    pub fn height(&self) -> usize {
        self.channels[0].height()
    }

    pub fn channel(&self, c: Channel) -> &Raster {
        &self.channels[c as usize]
    }

    pub fn channels(&self) -> &[Raster; 3] {
        &self.channels
    }

    /// Raw little-endian encoding: magic, `u32` width, height, channel
    /// count (3), then channel-major row-major `f32` samples.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (w, h) = (self.width(), self.height());
        let mut out = Vec::with_capacity(5 + 12 + 3 * w * h * 4);
        out.extend_from_slice(COMPOSITE_MAGIC);
        out.extend_from_slice(&(w as u32).to_le_bytes());
        out.extend_from_slice(&(h as u32).to_le_bytes());
        out.extend_from_slice(&3u32.to_le_bytes());
        for ch in &self.channels {
            for &v in ch.data() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 17 || &bytes[..5] != COMPOSITE_MAGIC {
            return Err(Error::Format("not an LTCR1 composite".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[5 + 4 * i..9 + 4 * i].try_into().unwrap()) as usize;
        let (w, h, c) = (word(0), word(1), word(2));
        if c != 3 {
            return Err(Error::Format(format!("composite must have 3 channels, header says {c}")));
        }
        let expected = (w as u128) * (h as u128) * 3 * 4 + 17;
        if bytes.len() as u128 != expected {
            return Err(Error::Format(format!(
                "composite payload length {} does not match {w}x{h}x3",
                bytes.len()
            )));
        }
        let plane = w * h;
        let mut planes = bytes[17..].chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64);
        let mut take = || -> Result<Raster> { Raster::new(w, h, planes.by_ref().take(plane).collect()) };
        let sar = take()?;
        let den = take()?;
        let eo = take()?;
        CompositeRaster::new(sar, den, eo)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Resizes each input to `target × target` and stacks them in the fixed
/// channel order.
pub fn compose_channels(sar: &Raster, denoised: &Raster, eo_translated: &Raster, target: usize) -> Result<CompositeRaster> {
    CompositeRaster::new(
        resize_bilinear(sar, target, target)?,
        resize_bilinear(denoised, target, target)?,
        resize_bilinear(eo_translated, target, target)?,
    )
}
