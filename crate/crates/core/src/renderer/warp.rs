use rayon::prelude::*;

use super::sample::footprint;
use super::ImageBuffer;
use crate::error::Result;
use crate::geometry::FlowField;
use crate::losses::ValidMask;

/// Samples `image` at `x + flow(x)` with bilinear interpolation.
///
/// The mask is false where the flow is invalid or a contributing neighbor
/// falls outside the image; those output pixels are 0.
pub fn backward_warp(image: &ImageBuffer, flow: &FlowField) -> Result<(ImageBuffer, ValidMask)> {
    flow.expect_size(image.width, image.height, "backward_warp")?;
    let (w, h, c) = (image.width, image.height, image.channels);
    let mut out = vec![0.0f32; w * h * c];
    let mut mask = vec![false; w * h];

    out.par_chunks_mut(w * c)
        .zip(mask.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (row, mrow))| {
            for x in 0..w {
                let Some((u, v)) = flow.get(x, y) else { continue };
                let Some(fp) = footprint(x as f64 + u as f64, y as f64 + v as f64, w, h) else {
                    continue;
                };
                for ch in 0..c {
                    row[x * c + ch] = fp.interpolate(|sx, sy| image.get(sx, sy, ch) as f64) as f32;
                }
                mrow[x] = true;
            }
        });

    let image = ImageBuffer {
        width: w,
        height: h,
        channels: c,
        data: out,
    };
    Ok((image, ValidMask::from_values(w, h, mask)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::seeded_rng;
    use rand::Rng;

    fn random_image(w: usize, h: usize, c: usize, seed: u64) -> ImageBuffer {
        let mut rng = seeded_rng(seed, 0);
        ImageBuffer::new(w, h, c, (0..w * h * c).map(|_| rng.random::<f32>()).collect()).unwrap()
    }

    #[test]
    fn zero_flow_is_identity() {
        let img = random_image(9, 7, 3, 1);
        let (out, mask) = backward_warp(&img, &FlowField::zeros(9, 7)).unwrap();
        assert_eq!(out, img);
        assert!(mask.values.iter().all(|m| *m));
    }

    #[test]
    fn half_pixel_shift_on_ramp() {
        let w = 11;
        let img = ImageBuffer::gray_from_fn(w, 4, |x, _| x as f32 / (w - 1) as f32);
        let (out, mask) = backward_warp(&img, &FlowField::constant(w, 4, 0.5, 0.0)).unwrap();
        for y in 0..4 {
            for x in 0..w {
                if x + 1 < w {
                    assert!(mask.get(x, y));
                    let want = (x as f32 + 0.5) / (w - 1) as f32;
                    assert!((out.get(x, y, 0) - want).abs() < 1e-6);
                } else {
                    assert!(!mask.get(x, y));
                }
            }
        }
    }

    #[test]
    fn integer_flow_matches_lookup() {
        let (w, h) = (12, 9);
        let img = random_image(w, h, 3, 2);
        let mut rng = seeded_rng(3, 0);
        let flow = FlowField::from_fn(w, h, |_, _| {
            (rng.random_range(-3..=3) as f32, rng.random_range(-3..=3) as f32)
        });
        let (out, mask) = backward_warp(&img, &flow).unwrap();
        for y in 0..h {
            for x in 0..w {
                let (u, v) = flow.get(x, y).unwrap();
                let (sx, sy) = (x as i64 + u as i64, y as i64 + v as i64);
                let inside = sx >= 0 && sy >= 0 && sx < w as i64 && sy < h as i64;
                assert_eq!(mask.get(x, y), inside);
                if inside {
                    assert_eq!(out.pixel(x, y), img.pixel(sx as usize, sy as usize));
                }
            }
        }
    }

    #[test]
    fn invalid_flow_masks_out() {
        let img = random_image(4, 4, 1, 4);
        let mut flow = FlowField::zeros(4, 4);
        flow.invalidate(1, 2);
        let (out, mask) = backward_warp(&img, &flow).unwrap();
        assert!(!mask.get(1, 2));
        assert_eq!(out.get(1, 2, 0), 0.0);
    }

    #[test]
    fn affine_image_is_reproduced() {
        let img = ImageBuffer::gray_from_fn(16, 16, |x, y| 0.1 + 0.02 * x as f32 + 0.03 * y as f32);
        let flow = FlowField::from_fn(16, 16, |x, y| (0.37 - 0.01 * x as f32, 0.21 + 0.005 * y as f32));
        let (out, mask) = backward_warp(&img, &flow).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                if mask.get(x, y) {
                    let (u, v) = flow.get(x, y).unwrap();
                    let want = 0.1 + 0.02 * (x as f64 + u as f64) + 0.03 * (y as f64 + v as f64);
                    assert!((out.get(x, y, 0) as f64 - want).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn size_mismatch() {
        let img = random_image(4, 4, 1, 5);
        assert!(backward_warp(&img, &FlowField::zeros(4, 5)).is_err());
    }
}
