//! Build a 3x56x56 composite from chips of different sizes and round-trip it
//! through the LTCR1 file format.

use longtail_sar::imageproc::{
    compose_channels, lee_filter, Channel, CompositeRaster, LeeConfig, Raster, DEFAULT_TARGET_SIZE,
};

fn main() -> longtail_sar::Result<()> {
    let sar = Raster::from_fn(51, 51, |x, y| ((x * 7 + y * 13) % 17) as f64 / 16.0)?;
    let denoised = lee_filter(&sar, &LeeConfig::default())?;
    // translated EO chips arrive at their own resolution
    let eo = Raster::from_fn(31, 31, |x, y| (x + y) as f64 / 60.0)?;

    let composite = compose_channels(&sar, &denoised, &eo, DEFAULT_TARGET_SIZE)?;
    println!("composite: 3 x {} x {}", composite.height(), composite.width());
    for (name, c) in [("sar", Channel::Sar), ("denoised", Channel::Denoised), ("eo", Channel::TranslatedEo)] {
        let r = composite.channel(c);
        println!("  {name:<8} range [{:.3}, {:.3}]", r.min(), r.max());
    }

    let path = std::env::temp_dir().join("longtail_sar_composite.ltcr");
    composite.save(&path)?;
    let back = CompositeRaster::load(&path)?;
    // pixels are stored as f32
    let max_diff = composite
        .channels()
        .iter()
        .zip(back.channels())
        .flat_map(|(a, b)| a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    println!("wrote {} ({} bytes)", path.display(), composite.to_bytes().len());
    println!("max difference after reload: {max_diff:.2e}");
    Ok(())
}
