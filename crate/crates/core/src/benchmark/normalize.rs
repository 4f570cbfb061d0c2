use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;
use crate::renderer::sample::footprint;
use crate::renderer::ImageBuffer;

/// Smallest width and height a normalized image may have.
pub const MIN_NORMALIZED_SIZE: usize = 8;

/// Scale factors, crop offsets and resulting intrinsics of a normalization.
struct Plan {
    sx: f64,
    sy: f64,
    ox: f64,
    oy: f64,
    k: CameraIntrinsics,
}

fn plan(k: &CameraIntrinsics, target_f: f64, (tw, th): (usize, usize)) -> Result<Plan> {
    if !(target_f.is_finite() && target_f > 0.0) {
        return Err(Error::InvalidConfig(format!("target focal length must be positive, got {target_f}")));
    }
    if tw < MIN_NORMALIZED_SIZE || th < MIN_NORMALIZED_SIZE {
        return Err(Error::InvalidConfig(format!(
            "normalized size {tw}x{th} is below the {MIN_NORMALIZED_SIZE}x{MIN_NORMALIZED_SIZE} minimum"
        )));
    }
    k.validate()?;
    let (sx, sy) = (target_f / k.fx, target_f / k.fy);
    let scaled_w = (k.width as f64 * sx).round() as i64;
    let scaled_h = (k.height as f64 * sy).round() as i64;
    let ox = (scaled_w - tw as i64).div_euclid(2) as f64;
    let oy = (scaled_h - th as i64).div_euclid(2) as f64;
    let k = CameraIntrinsics::new(target_f, target_f, sx * k.cx - ox, sy * k.cy - oy, tw, th)?;
    Ok(Plan { sx, sy, ox, oy, k })
}

/// The intrinsics `focal_normalize` would return, without touching an image.
pub fn normalize_intrinsics(k: &CameraIntrinsics, target_f: f64, target_size: (usize, usize)) -> Result<CameraIntrinsics> {
    plan(k, target_f, target_size).map(|p| p.k)
}

/// Rescales so both focal lengths become `target_f`, then center-crops or pads
/// (with zeros) to `target_size = (width, height)`.
///
/// The scaled image has size `round(w * s)` with `s = target_f / fx` (and
/// `target_f / fy` vertically). An output pixel `u'` samples the input at
/// `(u' + ox) / s`, where `ox = floor((round(w * s) - target_w) / 2)` is the
/// crop offset, so the returned principal point is `s * cx - ox`.
pub fn focal_normalize(
    image: &ImageBuffer,
    k: &CameraIntrinsics,
    target_f: f64,
    target_size: (usize, usize),
) -> Result<(ImageBuffer, CameraIntrinsics)> {
    let p = plan(k, target_f, target_size)?;
    image.expect_size(k.width, k.height, "focal_normalize")?;
    let (tw, th) = target_size;
    let mut out = ImageBuffer::filled(tw, th, image.channels, 0.0);
    for y in 0..th {
        let src_y = (y as f64 + p.oy) / p.sy;
        for x in 0..tw {
            let src_x = (x as f64 + p.ox) / p.sx;
            let Some(fp) = footprint(src_x, src_y, image.width, image.height) else { continue };
            for (ch, v) in out.pixel_mut(x, y).iter_mut().enumerate() {
                *v = fp.interpolate(|i, j| image.get(i, j, ch) as f64).clamp(0.0, 1.0) as f32;
            }
        }
    }
    Ok((out, p.k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};

    fn textured(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::gray_from_fn(w, h, |x, y| 0.5 + 0.4 * ((x as f32 * 0.3).sin() * (y as f32 * 0.2).cos()))
    }

    #[test]
    fn identity_when_already_normalized() {
        let img = textured(40, 30);
        let k = CameraIntrinsics::new(500.0, 500.0, 19.5, 14.5, 40, 30).unwrap();
        let (out, k2) = focal_normalize(&img, &k, 500.0, (40, 30)).unwrap();
        assert_eq!(out, img);
        assert_eq!(k2, k);
    }

    #[test]
    fn halving_focal_halves_image() {
        let img = textured(64, 64);
        let k = CameraIntrinsics::new(1000.0, 1000.0, 32.0, 30.0, 64, 64).unwrap();
        let (out, k2) = focal_normalize(&img, &k, 500.0, (32, 32)).unwrap();
        assert_eq!((out.width, out.height), (32, 32));
        assert_eq!((k2.fx, k2.fy, k2.cx, k2.cy), (500.0, 500.0, 16.0, 15.0));
        for y in 0..32 {
            for x in 0..32 {
                assert_eq!(out.get(x, y, 0), img.get(2 * x, 2 * y, 0));
            }
        }
        // a larger canvas pads symmetrically: 32 wide inside 40 shifts by 4
        let (_, k3) = focal_normalize(&img, &k, 500.0, (40, 40)).unwrap();
        assert_eq!((k3.cx, k3.cy), (20.0, 19.0));
    }

    #[test]
    fn rejects_tiny_or_bad_targets() {
        let img = textured(16, 16);
        let k = CameraIntrinsics::new(100.0, 100.0, 7.5, 7.5, 16, 16).unwrap();
        assert!(matches!(focal_normalize(&img, &k, 100.0, (7, 16)), Err(Error::InvalidConfig(_))));
        assert!(matches!(focal_normalize(&img, &k, 0.0, (16, 16)), Err(Error::InvalidConfig(_))));
        assert!(focal_normalize(&textured(15, 16), &k, 100.0, (16, 16)).is_err());
    }

    #[test]
    fn projection_consistency() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let (w, h) = (rng.random_range(40..200), rng.random_range(40..200));
            let k = CameraIntrinsics::new(
                rng.random_range(100.0..900.0),
                rng.random_range(100.0..900.0),
                rng.random_range(0.0..(w - 1) as f64),
                rng.random_range(0.0..(h - 1) as f64),
                w,
                h,
            )
            .unwrap();
            let target_f = rng.random_range(80.0..700.0);
            let size = (rng.random_range(8..160), rng.random_range(8..160));
            let img = ImageBuffer::filled(w, h, 1, 0.5);
            let (_, k2) = focal_normalize(&img, &k, target_f, size).unwrap();
            let s = (target_f / k.fx, target_f / k.fy);
            let ox = ((k.width as f64 * s.0).round() as i64 - size.0 as i64).div_euclid(2) as f64;
            let oy = ((k.height as f64 * s.1).round() as i64 - size.1 as i64).div_euclid(2) as f64;
            for _ in 0..20 {
                let p = Vector3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(1.0..20.0));
                let old = k.project(&p);
                let new = k2.project(&p);
                let mapped = (old.x * s.0 - ox, old.y * s.1 - oy);
                assert!((new.x - mapped.0).abs() < 0.5 && (new.y - mapped.1).abs() < 0.5);
            }
        }
    }
}
