use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineConfig;
use crate::error::{Error, Result};
use crate::geometry::{sample_pose_params, synth_view, CameraIntrinsics, DepthMap, FlowField, PoseParams};
use crate::io::{read_image, read_pfm, write_flo, write_image, write_mask};
use crate::losses::{masked_flow_loss, photometric_mask, ValidMask};
use crate::renderer::{backward_warp, forward_render, ImageBuffer};

/// A source image, its novel view, the flow between them, and the pixels
/// where that flow is trusted.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTriplet {
    pub source: ImageBuffer,
    pub rendered: ImageBuffer,
    pub flow: FlowField,
    pub mask: ValidMask,
}

/// What was drawn to produce a triplet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletMeta {
    pub intrinsics: CameraIntrinsics,
    pub intrinsics_sampled: bool,
    pub pose: PoseParams,
    pub valid_flow: usize,
    pub holes: usize,
    pub masked: usize,
}

impl FlowTriplet {
    pub fn new(source: ImageBuffer, rendered: ImageBuffer, flow: FlowField, mask: ValidMask) -> Result<Self> {
        source.expect_same_shape(&rendered, "triplet")?;
        flow.expect_size(source.width, source.height, "triplet")?;
        mask.expect_size(source.width, source.height, "triplet")?;
        if mask.values.iter().zip(&flow.valid).any(|(m, v)| *m && !*v) {
            return Err(Error::InvalidInput("triplet mask selects pixels without valid flow".into()));
        }
        Ok(Self {
            source,
            rendered,
            flow,
            mask,
        })
    }

    /// Zero self-loss on the mask, and warping the rendered view back with the
    /// flow reproduces the source within `threshold` (mean absolute channel
    /// error) at every masked pixel.
    pub fn self_check(&self, threshold: f64) -> Result<()> {
        if self.mask.is_empty() {
            return Ok(());
        }
        let self_loss = masked_flow_loss(&self.flow, &self.flow, &self.mask)?;
        if self_loss != 0.0 {
            return Err(Error::InvalidInput(format!("triplet self-loss is {self_loss}, expected 0")));
        }
        let (warped, in_bounds) = backward_warp(&self.rendered, &self.flow)?;
        let c = self.source.channels;
        for (i, m) in self.mask.values.iter().enumerate() {
            if !*m {
                continue;
            }
            if !in_bounds.values[i] {
                return Err(Error::InvalidInput(format!("masked pixel {i} warps outside the rendered view")));
            }
            let err: f64 = (0..c)
                .map(|ch| (warped.data[i * c + ch] as f64 - self.source.data[i * c + ch] as f64).abs())
                .sum::<f64>()
                / c as f64;
            if err > threshold {
                return Err(Error::InvalidInput(format!(
                    "masked pixel {i} has round-trip error {err} above {threshold}"
                )));
            }
        }
        Ok(())
    }

    /// Writes `rendered.png`, `flow.flo` and `mask.png` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_image(dir.join("rendered.png"), &self.rendered)?;
        write_flo(dir.join("flow.flo"), &self.flow)?;
        write_mask(dir.join("mask.png"), &self.mask)
    }
}

/// Stable per-frame seed from the master seed and the frame's names.
pub fn frame_seed(master: u64, sequence: &str, id: &str, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for s in [sequence, id, tag] {
        h.update((s.len() as u64).to_le_bytes());
        h.update(s.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Samples a pose (and intrinsics, when `k` is `None`), then synthesizes flow,
/// renders the novel view and masks it. The result passes `self_check`.
pub fn synthesize_triplet<R: Rng + ?Sized>(
    image: &ImageBuffer,
    depth: &DepthMap,
    k: Option<&CameraIntrinsics>,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<(FlowTriplet, TripletMeta)> {
    if depth.width != image.width || depth.height != image.height {
        return Err(Error::InvalidInput(format!(
            "depth is {}x{} but image is {}x{}",
            depth.width, depth.height, image.width, image.height
        )));
    }
    let median = depth
        .median_valid()
        .ok_or_else(|| Error::EmptyInput("depth map has no valid pixel".into()))?;
    let (k, sampled) = match k {
        Some(k) => (*k, false),
        None => (CameraIntrinsics::sample(image.width, image.height, rng)?, true),
    };
    let params = sample_pose_params(&cfg.pose, median, rng)?;
    let view = synth_view(depth, &k, &params.to_pose())?;
    let render = forward_render(image, &view.flow, &view.target_depth)?;
    let threshold = cfg.photometric.threshold;
    let mask = photometric_mask(image, &render, &view.flow, threshold)?;
    let meta = TripletMeta {
        intrinsics: k,
        intrinsics_sampled: sampled,
        pose: params,
        valid_flow: view.flow.valid_count(),
        holes: render.hole_count(),
        masked: mask.count(),
    };
    let triplet = FlowTriplet::new(image.clone(), render.image, view.flow, mask)?;
    triplet.self_check(threshold)?;
    Ok((triplet, meta))
}

/// Loads a depth map from a one-channel PFM.
pub fn read_depth(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    let pfm = read_pfm(path)?;
    if pfm.channels != 1 {
        return Err(Error::Format(format!("{}: depth PFM must have one channel", path.display())));
    }
    DepthMap::from_values(pfm.width, pfm.height, pfm.data)
}

/// File-based `synthesize_triplet`.
pub fn make_triplet<R: Rng + ?Sized>(
    image_path: &Path,
    depth_path: &Path,
    k: Option<&CameraIntrinsics>,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<(FlowTriplet, TripletMeta)> {
    let image = read_image(image_path)?;
    let depth = read_depth(depth_path)?;
    if let Some(k) = k {
        image.expect_size(k.width, k.height, "intrinsics")?;
    }
    synthesize_triplet(&image, &depth, k, cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{seeded_rng, PoseSamplingConfig};

    fn scene(w: usize, h: usize) -> (ImageBuffer, DepthMap) {
        let img = ImageBuffer::gray_from_fn(w, h, |x, y| 0.5 + 0.3 * ((x as f32 * 0.05).sin() + (y as f32 * 0.07).cos()) / 2.0);
        let depth = DepthMap::from_values(w, h, (0..w * h).map(|i| 4.0 + (i % w) as f32 * 0.01).collect()).unwrap();
        (img, depth)
    }

    #[test]
    fn zero_motion_is_identity() {
        let (img, depth) = scene(32, 24);
        let cfg = PipelineConfig {
            pose: PoseSamplingConfig { max_rotation_deg: 0.0, max_translation_frac: 0.0, seed: 0 },
            ..Default::default()
        };
        let (t, meta) = synthesize_triplet(&img, &depth, None, &cfg, &mut seeded_rng(3, 0)).unwrap();
        assert_eq!(t.rendered, img);
        assert!(t.flow.valid.iter().all(|v| *v));
        assert!(t.flow.u.iter().chain(&t.flow.v).all(|x| *x == 0.0));
        assert_eq!(t.mask.count(), 32 * 24);
        assert_eq!(meta.holes, 0);
    }

    #[test]
    fn seeded_synthesis_is_repeatable() {
        let (img, depth) = scene(40, 30);
        let cfg = PipelineConfig::default();
        let a = synthesize_triplet(&img, &depth, None, &cfg, &mut seeded_rng(9, 0)).unwrap();
        let b = synthesize_triplet(&img, &depth, None, &cfg, &mut seeded_rng(9, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.1.masked > 0);
    }

    #[test]
    fn frame_seeds_separate_names() {
        let s = frame_seed(0, "a", "b", "rgb");
        assert_eq!(s, frame_seed(0, "a", "b", "rgb"));
        assert_ne!(s, frame_seed(1, "a", "b", "rgb"));
        assert_ne!(frame_seed(0, "ab", "", "rgb"), frame_seed(0, "a", "b", "rgb"));
        assert_ne!(s, frame_seed(0, "a", "b", "nir"));
    }

    #[test]
    fn rejects_mismatched_depth() {
        let (img, _) = scene(10, 10);
        let depth = DepthMap::constant(9, 10, 1.0);
        let cfg = PipelineConfig::default();
        assert!(synthesize_triplet(&img, &depth, None, &cfg, &mut seeded_rng(0, 0)).is_err());
        let empty = DepthMap::from_values(10, 10, vec![0.0; 100]).unwrap();
        assert!(matches!(
            synthesize_triplet(&img, &empty, None, &cfg, &mut seeded_rng(0, 0)),
            Err(Error::EmptyInput(_))
        ));
    }
}
