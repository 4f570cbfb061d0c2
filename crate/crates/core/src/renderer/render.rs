use rayon::prelude::*;

use super::ImageBuffer;
use crate::error::{Error, Result};
use crate::geometry::{DepthMap, FlowField};

/// A forward-splatted novel view.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderResult {
    pub image: ImageBuffer,
    /// True where no source pixel landed; the image holds 0 there.
    pub hole_mask: Vec<bool>,
    /// Depth of the winning splat; `+inf` at holes.
    pub zbuffer: Vec<f32>,
}

impl RenderResult {
    #[inline]
    pub fn is_hole(&self, x: usize, y: usize) -> bool {
        self.hole_mask[y * self.image.width + x]
    }

    pub fn hole_count(&self) -> usize {
        self.hole_mask.iter().filter(|h| **h).count()
    }
}

/// Splats every source pixel with valid flow and depth onto `round(x + flow(x))`.
///
/// `depth` orders colliding splats; the smallest value wins and exact ties go to
/// the lowest row-major source index. Pass the depth each pixel has in the
/// *target* view (see `synth_view`) for a physically correct z-test. Rows of the
/// output are resolved independently, so the result does not depend on the
/// number of threads.
pub fn forward_render(image: &ImageBuffer, flow: &FlowField, depth: &DepthMap) -> Result<RenderResult> {
    let (w, h, c) = (image.width, image.height, image.channels);
    flow.expect_size(w, h, "forward_render")?;
    if depth.width != w || depth.height != h {
        return Err(Error::InvalidInput(format!(
            "forward_render: depth is {}x{}, image is {}x{}",
            depth.width, depth.height, w, h
        )));
    }

    // Destination of each contributing source pixel, bucketed by target row in
    // ascending source order.
    let targets: Vec<Option<(usize, usize)>> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let (u, v) = flow.get(x, y)?;
            depth.get(x, y)?;
            let tx = (x as f64 + u as f64).round();
            let ty = (y as f64 + v as f64).round();
            (tx >= 0.0 && ty >= 0.0 && tx < w as f64 && ty < h as f64)
                .then_some((tx as usize, ty as usize))
        })
        .collect();
    let mut rows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); h];
    for (src, t) in targets.iter().enumerate() {
        if let Some((tx, ty)) = *t {
            rows[ty].push((tx, src));
        }
    }

    let mut data = vec![0.0f32; w * h * c];
    let mut holes = vec![true; w * h];
    let mut zbuffer = vec![f32::INFINITY; w * h];
    data.par_chunks_mut(w * c)
        .zip(holes.par_chunks_mut(w))
        .zip(zbuffer.par_chunks_mut(w))
        .zip(rows.par_iter())
        .for_each(|(((drow, hrow), zrow), splats)| {
            let mut winner: Vec<Option<usize>> = vec![None; w];
            for &(tx, src) in splats {
                let z = depth.values[src];
                // strict comparison keeps the earlier (lower-index) source on ties
                if winner[tx].is_none() || z < zrow[tx] {
                    winner[tx] = Some(src);
                    zrow[tx] = z;
                }
            }
            for (tx, win) in winner.into_iter().enumerate() {
                if let Some(src) = win {
                    let (sx, sy) = (src % w, src / w);
                    drow[tx * c..(tx + 1) * c].copy_from_slice(image.pixel(sx, sy));
                    hrow[tx] = false;
                }
            }
        });

    Ok(RenderResult {
        image: ImageBuffer {
            width: w,
            height: h,
            channels: c,
            data,
        },
        hole_mask: holes,
        zbuffer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::seeded_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> ImageBuffer {
        let mut rng = seeded_rng(seed, 0);
        ImageBuffer::new(w, h, 3, (0..w * h * 3).map(|_| rng.random::<f32>()).collect()).unwrap()
    }

    #[test]
    fn zero_flow_reproduces_image() {
        let img = random_image(10, 6, 1);
        let r = forward_render(&img, &FlowField::zeros(10, 6), &DepthMap::constant(10, 6, 3.0)).unwrap();
        assert_eq!(r.image, img);
        assert_eq!(r.hole_count(), 0);
        assert!(r.zbuffer.iter().all(|z| *z == 3.0));
    }

    #[test]
    fn everything_off_image_is_all_holes() {
        let img = random_image(10, 6, 2);
        let r = forward_render(&img, &FlowField::constant(10, 6, 10.0, 0.0), &DepthMap::constant(10, 6, 3.0))
            .unwrap();
        assert_eq!(r.hole_count(), 60);
        assert!(r.image.data.iter().all(|x| *x == 0.0));
        assert!(r.zbuffer.iter().all(|z| z.is_infinite()));
    }

    #[test]
    fn nearest_depth_wins_collision() {
        let img = ImageBuffer::gray_from_fn(3, 1, |x, _| [0.2, 0.9, 0.5][x]);
        let mut flow = FlowField::invalid(3, 1);
        flow.set(0, 0, 2.0, 0.0); // depth 5
        flow.set(1, 0, 1.0, 0.0); // depth 2
        let depth = DepthMap::from_values(3, 1, vec![5.0, 2.0, 1.0]).unwrap();
        let r = forward_render(&img, &flow, &depth).unwrap();
        assert_eq!(r.image.get(2, 0, 0), 0.9);
        assert_eq!(r.zbuffer[2], 2.0);
        assert!(r.is_hole(0, 0) && r.is_hole(1, 0));
    }

    #[test]
    fn equal_depth_tie_goes_to_lowest_index() {
        let img = ImageBuffer::gray_from_fn(4, 2, |x, y| (x + 4 * y) as f32 / 8.0);
        let mut flow = FlowField::invalid(4, 2);
        flow.set(3, 1, -3.0, -1.0);
        flow.set(2, 0, -2.0, 0.0);
        flow.set(1, 1, -1.0, -1.0);
        let r = forward_render(&img, &flow, &DepthMap::constant(4, 2, 1.0)).unwrap();
        assert_eq!(r.image.get(0, 0, 0), img.get(2, 0, 0));
    }

    #[test]
    fn invalid_depth_does_not_splat() {
        let img = random_image(3, 3, 3);
        let depth = DepthMap::from_values(3, 3, vec![1.0, 1.0, 1.0, 1.0, f32::NAN, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let r = forward_render(&img, &FlowField::zeros(3, 3), &depth).unwrap();
        assert!(r.is_hole(1, 1));
        assert_eq!(r.hole_count(), 1);
    }

    #[test]
    fn dimension_mismatch() {
        let img = random_image(3, 3, 4);
        assert!(forward_render(&img, &FlowField::zeros(3, 4), &DepthMap::constant(3, 3, 1.0)).is_err());
        assert!(forward_render(&img, &FlowField::zeros(3, 3), &DepthMap::constant(4, 3, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn minimum_depth_source_always_wins(
            depths in prop::collection::vec(0.5f32..50.0, 2..12),
            target in (0usize..8, 0usize..8),
        ) {
            // All listed sources collide on `target`; brute force picks the winner.
            let (w, h) = (8, 8);
            let img = ImageBuffer::gray_from_fn(w, h, |x, y| ((x * 7 + y * 3) % 11) as f32 / 10.0);
            let mut flow = FlowField::invalid(w, h);
            let mut dv = vec![1.0f32; w * h];
            let mut best: Option<(f32, usize)> = None;
            for (k, d) in depths.iter().enumerate() {
                let src = (k * 5) % (w * h);
                let (sx, sy) = (src % w, src / w);
                if flow.valid[src] { continue; }
                flow.set(sx, sy, target.0 as f32 - sx as f32, target.1 as f32 - sy as f32);
                dv[src] = *d;
                if best.is_none_or(|(bd, bi)| *d < bd || (*d == bd && src < bi)) {
                    best = Some((*d, src));
                }
            }
            let depth = DepthMap::from_values(w, h, dv).unwrap();
            let r = forward_render(&img, &flow, &depth).unwrap();
            let (bd, bi) = best.unwrap();
            prop_assert_eq!(r.zbuffer[target.1 * w + target.0], bd);
            prop_assert_eq!(r.image.get(target.0, target.1, 0), img.data[bi]);
        }
    }
}
