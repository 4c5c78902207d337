//! Raster ingestion, Lee speckle filtering, bilinear resizing and
//! three-channel composition.
//!
//! Filtering happens at native chip resolution; composition resizes every
//! channel afterwards.

mod composite;
mod lee;
mod raster;
mod resize;

pub use composite::{compose_channels, Channel, CompositeRaster, COMPOSITE_MAGIC, DEFAULT_TARGET_SIZE};
pub use lee::{estimate_noise_variance, lee_filter, LeeConfig, NoiseVariance, DEFAULT_WINDOW};
pub use raster::{
    decode_pgm, decode_png, encode_pgm, encode_png, load_raster, load_raster_with_depth, save_raster, BitDepth, Raster,
    RasterFormat,
};
pub use resize::resize_bilinear;
