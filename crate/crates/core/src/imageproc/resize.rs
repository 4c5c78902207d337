use crate::error::{Error, Result};

use super::Raster;

/// Source coordinate for output index `i` under corner alignment: the first
/// and last output samples land exactly on the first and last input samples.
#[inline]
fn source_coord(i: usize, in_len: usize, out_len: usize) -> f64 {
    if in_len == 1 {
        0.0
    } else if out_len == 1 {
        (in_len - 1) as f64 / 2.0
    } else {
        (i * (in_len - 1)) as f64 / (out_len - 1) as f64
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    let v = (1.0 - t) * a + t * b;
    v.clamp(a.min(b), a.max(b))
}

/// Bilinear resize with corner-aligned sampling.
///
/// Each output value is a convex combination of its four source neighbours,
/// so the output range stays inside the input range.
pub fn resize_bilinear(r: &Raster, out_w: usize, out_h: usize) -> Result<Raster> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::Dimension(format!(
            "resize target must be at least 1x1, got {out_w}x{out_h}"
        )));
    }
    let (in_w, in_h) = (r.width(), r.height());
    let xs: Vec<(usize, usize, f64)> = (0..out_w)
        .map(|i| {
            let sx = source_coord(i, in_w, out_w);
            let x0 = (sx.floor() as usize).min(in_w - 1);
            let x1 = (x0 + 1).min(in_w - 1);
            (x0, x1, sx - x0 as f64)
        })
        .collect();
    let mut data = Vec::with_capacity(out_w * out_h);
    for j in 0..out_h {
        let sy = source_coord(j, in_h, out_h);
        let y0 = (sy.floor() as usize).min(in_h - 1);
        let y1 = (y0 + 1).min(in_h - 1);
        let ty = sy - y0 as f64;
        for &(x0, x1, tx) in &xs {
            let top = lerp(r.get(x0, y0), r.get(x1, y0), tx);
            let bottom = lerp(r.get(x0, y1), r.get(x1, y1), tx);
            data.push(lerp(top, bottom, ty));
        }
    }
    Raster::new(out_w, out_h, data)
}
