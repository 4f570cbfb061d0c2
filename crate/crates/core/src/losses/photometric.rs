use serde::{Deserialize, Serialize};

use super::{sorted_mean, ValidMask};
use crate::error::{Error, Result};
use crate::geometry::FlowField;
use crate::renderer::sample::footprint;
use crate::renderer::{backward_warp, ImageBuffer, RenderResult};

/// Mean absolute channel error above which a synthesized pixel is rejected.
pub const DEFAULT_PHOTOMETRIC_THRESHOLD: f64 = 0.1;

const SSIM_RADIUS: usize = 5;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

/// Marks the source pixels whose synthetic flow can be trusted.
///
/// The rendered view is warped back with `flow`; a pixel survives when its flow
/// is valid, the warp stays inside the image, none of the contributing render
/// pixels is a hole, and the mean absolute channel error against `source` is at
/// most `threshold`.
pub fn photometric_mask(
    source: &ImageBuffer,
    render: &RenderResult,
    flow: &FlowField,
    threshold: f64,
) -> Result<ValidMask> {
    source.expect_same_shape(&render.image, "photometric_mask")?;
    flow.expect_size(source.width, source.height, "photometric_mask")?;
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "photometric threshold must be finite and non-negative, got {threshold}"
        )));
    }
    let (w, h, c) = (source.width, source.height, source.channels);
    let (warped, in_bounds) = backward_warp(&render.image, flow)?;
    let mut mask = ValidMask::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            if !in_bounds.get(x, y) {
                continue;
            }
            let (u, v) = flow.get(x, y).expect("in-bounds implies valid flow");
            let fp = footprint(x as f64 + u as f64, y as f64 + v as f64, w, h).expect("in bounds");
            if fp.support().any(|(sx, sy, _)| render.is_hole(sx, sy)) {
                continue;
            }
            let err: f64 = warped
                .pixel(x, y)
                .iter()
                .zip(source.pixel(x, y))
                .map(|(a, b)| (*a as f64 - *b as f64).abs())
                .sum::<f64>()
                / c as f64;
            mask.values[y * w + x] = err <= threshold;
        }
    }
    Ok(mask)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhotometricKind {
    L1,
    Ssim,
}

/// Masked photometric distance between a warped image and its target.
///
/// `L1` is the mean absolute channel error; `Ssim` the mean of `(1 - SSIM) / 2`
/// with an 11x11 Gaussian window (sigma 1.5, truncated and renormalized at the
/// border), averaged over channels.
pub fn photometric_loss(
    warped: &ImageBuffer,
    target: &ImageBuffer,
    mask: &ValidMask,
    kind: PhotometricKind,
) -> Result<f64> {
    warped.expect_same_shape(target, "photometric_loss")?;
    mask.expect_size(warped.width, warped.height, "photometric_loss")?;
    if mask.is_empty() {
        return Err(Error::EmptyInput("photometric loss mask has no valid pixel".into()));
    }
    let per_pixel = match kind {
        PhotometricKind::L1 => warped
            .data
            .chunks_exact(warped.channels)
            .zip(target.data.chunks_exact(target.channels))
            .map(|(a, b)| {
                a.iter().zip(b).map(|(x, y)| (*x as f64 - *y as f64).abs()).sum::<f64>()
                    / warped.channels as f64
            })
            .collect::<Vec<_>>(),
        PhotometricKind::Ssim => ssim_dissimilarity(warped, target),
    };
    let masked = per_pixel
        .into_iter()
        .zip(&mask.values)
        .filter_map(|(e, m)| m.then_some(e))
        .collect();
    Ok(sorted_mean(masked))
}

fn gaussian_kernel() -> Vec<f64> {
    let k: Vec<f64> = (0..=2 * SSIM_RADIUS)
        .map(|i| {
            let d = i as f64 - SSIM_RADIUS as f64;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|x| x / s).collect()
}

/// Separable Gaussian blur; out-of-image taps are dropped and the remaining
/// weights renormalized.
fn blur(src: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let r = kernel.len() / 2;
    let pass = |src: &[f64], horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let (pos, len) = if horizontal { (x, w) } else { (y, h) };
                let lo = pos.saturating_sub(r);
                let hi = (pos + r).min(len - 1);
                let (mut acc, mut norm) = (0.0, 0.0);
                for p in lo..=hi {
                    let wgt = kernel[p + r - pos];
                    let idx = if horizontal { y * w + p } else { p * w + x };
                    acc += wgt * src[idx];
                    norm += wgt;
                }
                out[y * w + x] = acc / norm;
            }
        }
        out
    };
    pass(&pass(src, true), false)
}

fn ssim_dissimilarity(a: &ImageBuffer, b: &ImageBuffer) -> Vec<f64> {
    let (w, h, c) = (a.width, a.height, a.channels);
    let kernel = gaussian_kernel();
    let mut out = vec![0.0; w * h];
    for ch in 0..c {
        let x: Vec<f64> = (0..w * h).map(|i| a.data[i * c + ch] as f64).collect();
        let y: Vec<f64> = (0..w * h).map(|i| b.data[i * c + ch] as f64).collect();
        let prod = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(s, t)| s * t).collect::<Vec<_>>();
        let mu_x = blur(&x, w, h, &kernel);
        let mu_y = blur(&y, w, h, &kernel);
        let xx = blur(&prod(&x, &x), w, h, &kernel);
        let yy = blur(&prod(&y, &y), w, h, &kernel);
        let xy = blur(&prod(&x, &y), w, h, &kernel);
        for i in 0..w * h {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let vx = xx[i] - mx * mx;
            let vy = yy[i] - my * my;
            let cxy = xy[i] - mx * my;
            let ssim = ((2.0 * mx * my + SSIM_C1) * (2.0 * cxy + SSIM_C2))
                / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2));
            out[i] += ((1.0 - ssim) / 2.0).clamp(0.0, 1.0) / c as f64;
        }
    }
    out
}
