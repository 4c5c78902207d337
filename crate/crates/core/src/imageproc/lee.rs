//! Lee speckle filter in its additive local-statistics form.
//!
//! Every output pixel blends the local window mean `μ` with the input value
//! `x`: `out = μ + W (x − μ)`, where `W = max(0, σ²_w − σ²_n) / σ²_w` and
//! `σ²_w` is the window variance. Flat regions (`σ²_w ≤ σ²_n`) collapse to
//! the mean while edges (`σ²_w ≫ σ²_n`) keep the original value.

use crate::error::{Error, Result};

use super::Raster;

pub const DEFAULT_WINDOW: usize = 7;

/// Noise variance used by the filter, in squared normalized intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseVariance {
    /// Median of local variances, see [`estimate_noise_variance`].
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for NoiseVariance {
    type Err = Error;

    /// `auto` or a non-negative number.
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(NoiseVariance::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(NoiseVariance::Fixed(v)),
            _ => Err(Error::Config(format!("noise variance must be `auto` or a number >= 0, got {s:?}"))),
        }
    }
}

impl std::fmt::Display for NoiseVariance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseVariance::Auto => f.write_str("auto"),
            NoiseVariance::Fixed(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeeConfig {
    window: usize,
    noise: NoiseVariance,
}

impl LeeConfig {
    /// `window` must be odd and in `[3, 15]`; a fixed noise variance must be
    /// finite and non-negative.
    pub fn new(window: usize, noise: NoiseVariance) -> Result<Self> {
        if window % 2 == 0 || !(3..=15).contains(&window) {
            return Err(Error::Config(format!(
                "Lee window must be odd and in [3, 15], got {window}"
            )));
        }
        if let NoiseVariance::Fixed(v) = noise {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("noise variance must be >= 0, got {v}")));
            }
        }
        Ok(LeeConfig { window, noise })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn noise(&self) -> NoiseVariance {
        self.noise
    }
}

impl Default for LeeConfig {
    fn default() -> Self {
        LeeConfig {
            window: DEFAULT_WINDOW,
            noise: NoiseVariance::Auto,
        }
    }
}

/// Median of the population variances of every fully contained
/// `window × window` block.
pub fn estimate_noise_variance(r: &Raster, window: usize) -> Result<f64> {
    if window == 0 || window > r.width().min(r.height()) {
        return Err(Error::Dimension(format!(
            "window {window} does not fit in a {}x{} image",
            r.width(),
            r.height()
        )));
    }
    let nx = r.width() - window + 1;
    let ny = r.height() - window + 1;
    let count = (window * window) as f64;
    let mut variances = Vec::with_capacity(nx * ny);
    for y0 in 0..ny {
        for x0 in 0..nx {
            let mut sum = 0.0;
            for y in y0..y0 + window {
                for x in x0..x0 + window {
                    sum += r.get(x, y);
                }
            }
            let mean = sum / count;
            let mut ss = 0.0;
            for y in y0..y0 + window {
                for x in x0..x0 + window {
                    let d = r.get(x, y) - mean;
                    ss += d * d;
                }
            }
            variances.push(ss / count);
        }
    }
    variances.sort_by(f64::total_cmp);
    let m = variances.len();
    Ok(if m % 2 == 1 {
        variances[m / 2]
    } else {
        0.5 * (variances[m / 2 - 1] + variances[m / 2])
    })
}

/// Mirror index without repeating the edge sample (`-1 → 1`, `n → n − 2`).
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let j = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    j as usize
}

/// Applies the Lee filter. Output dimensions equal the input's.
pub fn lee_filter(r: &Raster, cfg: &LeeConfig) -> Result<Raster> {
    let half = cfg.window / 2;
    let (w, h) = (r.width(), r.height());
    if half >= w || half >= h {
        return Err(Error::Dimension(format!(
            "window {} too large for mirror padding of a {w}x{h} image",
            cfg.window
        )));
    }
    let noise = match cfg.noise {
        NoiseVariance::Fixed(v) => v,
        NoiseVariance::Auto => estimate_noise_variance(r, cfg.window)?,
    };
    let count = (cfg.window * cfg.window) as f64;
    let half = half as isize;
    let mut window_vals = Vec::with_capacity(cfg.window * cfg.window);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            window_vals.clear();
            for dy in -half..=half {
                let yy = reflect(y as isize + dy, h);
                for dx in -half..=half {
                    window_vals.push(r.get(reflect(x as isize + dx, w), yy));
                }
            }
            let mean = window_vals.iter().sum::<f64>() / count;
            let var = window_vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
            let weight = if var > 0.0 {
                (var - noise).max(0.0) / var
            } else {
                0.0
            };
            let x_in = r.get(x, y);
            // (1 − W)μ + Wx is exact at both ends of W ∈ [0, 1]
            out.push((1.0 - weight) * mean + weight * x_in);
        }
    }
    Raster::new(w, h, out)
}
