use rayon::prelude::*;

use super::{CameraIntrinsics, DepthMap, FlowField, Pixel, Point3, RigidPose};
use crate::error::{Error, Result};

/// Projections closer than this (meters) to the virtual camera plane are invalid.
pub const DEFAULT_Z_MIN: f64 = 1e-3;

/// Back-projects pixel `x` at metric `depth`: `depth * K⁻¹ [u, v, 1]ᵀ`.
pub fn lift(x: Pixel, depth: f64, k: &CameraIntrinsics) -> Result<Point3> {
    if !(depth.is_finite() && depth > 0.0) {
        return Err(Error::InvalidInput(format!(
            "depth must be finite and positive, got {depth}"
        )));
    }
    Ok(Point3::new(
        depth * (x.x - k.cx) / k.fx,
        depth * (x.y - k.cy) / k.fy,
        depth,
    ))
}

/// Pixel location and depth of a point seen by the virtual camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub pixel: Pixel,
    pub depth: f64,
}

/// Moves `p` by `pose` and projects it with `k`. `None` when the transformed
/// point is at or behind `DEFAULT_Z_MIN`.
pub fn reproject(p: &Point3, k: &CameraIntrinsics, pose: &RigidPose) -> Option<Projection> {
    reproject_with_min_depth(p, k, pose, DEFAULT_Z_MIN)
}

pub fn reproject_with_min_depth(
    p: &Point3,
    k: &CameraIntrinsics,
    pose: &RigidPose,
    z_min: f64,
) -> Option<Projection> {
    let q = pose.transform(p);
    if !(q.z > z_min) || !q.coords.iter().all(|c| c.is_finite()) {
        return None;
    }
    let pixel = k.project(&q.coords);
    (pixel.x.is_finite() && pixel.y.is_finite()).then_some(Projection { pixel, depth: q.z })
}

/// Synthetic flow plus the depth each source pixel lands at in the virtual view.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthView {
    pub flow: FlowField,
    /// Indexed by *source* pixel; invalid wherever `flow` is invalid.
    pub target_depth: DepthMap,
}

/// Dense flow induced by moving the camera by `pose` over the scene `depth`.
pub fn synth_flow(depth: &DepthMap, k: &CameraIntrinsics, pose: &RigidPose) -> Result<FlowField> {
    synth_view(depth, k, pose).map(|v| v.flow)
}

/// Lifts every valid depth pixel, reprojects it, and records `x' - x`. Pixels
/// with invalid depth, a projection behind the camera, or `x'` outside the
/// image are invalid. The identity pose yields exactly zero flow.
pub fn synth_view(depth: &DepthMap, k: &CameraIntrinsics, pose: &RigidPose) -> Result<SynthView> {
    if depth.width != k.width || depth.height != k.height {
        return Err(Error::InvalidInput(format!(
            "depth is {}x{} but intrinsics describe {}x{}",
            depth.width, depth.height, k.width, k.height
        )));
    }
    if depth.valid_count() == 0 {
        return Err(Error::EmptyInput("depth map has no valid pixel".into()));
    }
    let (w, h) = (depth.width, depth.height);
    let mut flow = FlowField::invalid(w, h);
    let mut target = vec![f32::NAN; w * h];
    let identity = pose.is_identity();

    flow.u
        .par_chunks_mut(w)
        .zip(flow.v.par_chunks_mut(w))
        .zip(flow.valid.par_chunks_mut(w))
        .zip(target.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (((us, vs), valids), zs))| {
            for x in 0..w {
                let Some(d) = depth.get(x, y) else { continue };
                if identity {
                    (us[x], vs[x], zs[x], valids[x]) = (0.0, 0.0, d, true);
                    continue;
                }
                let src = Pixel::new(x as f64, y as f64);
                let Ok(p) = lift(src, d as f64, k) else { continue };
                let Some(proj) = reproject(&p, k, pose) else { continue };
                if !k.contains(&proj.pixel) {
                    continue;
                }
                us[x] = (proj.pixel.x - src.x) as f32;
                vs[x] = (proj.pixel.y - src.y) as f32;
                zs[x] = proj.depth as f32;
                valids[x] = true;
            }
        });

    let target_depth = DepthMap::from_values(w, h, target)?;
    Ok(SynthView { flow, target_depth })
}
