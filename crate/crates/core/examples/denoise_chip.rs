//! Lee-filter a speckled chip and report the variance reduction.
//!
//! ```bash
//! cargo run --release -p longtail-sar --example denoise_chip            # synthetic chip
//! cargo run --release -p longtail-sar --example denoise_chip -- chip.pgm
//! ```
//!
//! With a path, the filtered image is written next to it as `<stem>_lee.<ext>`.

use std::path::{Path, PathBuf};

use longtail_sar::imageproc::{
    estimate_noise_variance, lee_filter, load_raster_with_depth, save_raster, LeeConfig, NoiseVariance, Raster,
    RasterFormat,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn variance(r: &Raster) -> f64 {
    let n = r.data().len() as f64;
    let mean = r.data().iter().sum::<f64>() / n;
    r.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

fn mse(a: &Raster, b: &Raster) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.data().len() as f64
}

/// Bright square target on dark clutter, then the same with additive noise
/// of variance 0.01.
fn synthetic_chip() -> (Raster, Raster) {
    let clean = Raster::from_fn(51, 51, |x, y| {
        if (18..33).contains(&x) && (18..33).contains(&y) {
            0.8
        } else {
            0.3
        }
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let noisy = Raster::new(51, 51, clean.data().iter().map(|v| v + noise.sample(&mut rng)).collect()).unwrap();
    (clean, noisy)
}

fn main() -> longtail_sar::Result<()> {
    let arg = std::env::args().nth(1).map(PathBuf::from);
    let (clean, chip, depth, format) = match &arg {
        Some(path) => {
            let format = RasterFormat::from_path(path).expect("expected a .pgm or .png file");
            let (r, d) = load_raster_with_depth(path, format)?;
            (None, r, Some(d), Some(format))
        }
        None => {
            let (clean, noisy) = synthetic_chip();
            (Some(clean), noisy, None, None)
        }
    };

    println!("chip {}x{}, variance {:.5}", chip.width(), chip.height(), variance(&chip));
    println!("estimated noise variance (7x7): {:.5}", estimate_noise_variance(&chip, 7)?);
    for window in [3, 7, 11] {
        for noise in [NoiseVariance::Auto, NoiseVariance::Fixed(0.01)] {
            let out = lee_filter(&chip, &LeeConfig::new(window, noise)?)?;
            match &clean {
                Some(c) => println!(
                    "window {window:>2}, noise {noise:<5} -> variance {:.5}, error vs clean {:.5} (was {:.5})",
                    variance(&out),
                    mse(&out, c),
                    mse(&chip, c)
                ),
                None => println!("window {window:>2}, noise {noise:<5} -> variance {:.5}", variance(&out)),
            }
        }
    }

    if let (Some(path), Some(depth), Some(format)) = (arg, depth, format) {
        let filtered = lee_filter(&chip, &LeeConfig::default())?;
        let stem = path.file_stem().unwrap().to_string_lossy();
        let ext = path.extension().unwrap().to_string_lossy();
        let out = path.with_file_name(format!("{stem}_lee.{ext}"));
        save_raster(&filtered, Path::new(&out), format, depth)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
