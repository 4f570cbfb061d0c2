use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::read_bytes;
use crate::geometry::{CameraIntrinsics, FlowField, Pixel, Point3, RigidPose, DEFAULT_Z_MIN};

/// One LiDAR sweep in the sensor frame, meters.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarFrame {
    pub points: Vec<Vector3<f64>>,
    pub intensity: Option<Vec<f32>>,
}

impl LidarFrame {
    pub fn new(points: Vec<Vector3<f64>>, intensity: Option<Vec<f32>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("LiDAR frame has no points".into()));
        }
        if let Some(i) = points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidInput(format!("LiDAR point {i} is not finite")));
        }
        if let Some(int) = &intensity {
            if int.len() != points.len() {
                return Err(Error::InvalidInput(format!(
                    "{} intensities for {} points",
                    int.len(),
                    points.len()
                )));
            }
        }
        Ok(Self { points, intensity })
    }
}

/// Two calibrated cameras; each extrinsic maps the LiDAR frame into that camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRig {
    pub intrinsics_a: CameraIntrinsics,
    pub intrinsics_b: CameraIntrinsics,
    pub extrinsics_a: RigidPose,
    pub extrinsics_b: RigidPose,
}

impl CameraRig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let rig: Self = toml::from_str(text).map_err(|e| Error::Format(format!("camera rig: {e}")))?;
        rig.validate()?;
        Ok(rig)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = read_bytes(path)?;
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::Format(format!("{} is not UTF-8", path.display())))?;
        Self::from_toml_str(text)
    }

    pub fn validate(&self) -> Result<()> {
        self.intrinsics_a.validate()?;
        self.intrinsics_b.validate()?;
        for e in [&self.extrinsics_a, &self.extrinsics_b] {
            RigidPose::new(e.rotation, e.translation)?;
        }
        Ok(())
    }
}

/// A point hides another in the same image when it projects within
/// `radius_px` and is nearer by more than `depth_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcclusionConfig {
    pub radius_px: f64,
    pub depth_m: f64,
}

impl Default for OcclusionConfig {
    fn default() -> Self {
        Self {
            radius_px: 1.0,
            depth_m: 1.0,
        }
    }
}

impl OcclusionConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if ok(self.radius_px) && ok(self.depth_m) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "occlusion radius and depth margin must be finite and non-negative: {self:?}"
            )))
        }
    }
}

/// Flow label at an integer pixel of image B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseEntry {
    pub x: usize,
    pub y: usize,
    pub u: f32,
    pub v: f32,
}

/// Sparse flow from image B to image A, entries in row-major pixel order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFlowGT {
    pub width: usize,
    pub height: usize,
    pub entries: Vec<SparseEntry>,
}

impl SparseFlowGT {
    pub fn new(width: usize, height: usize, mut entries: Vec<SparseEntry>) -> Result<Self> {
        for e in &entries {
            if e.x >= width || e.y >= height {
                return Err(Error::InvalidInput(format!(
                    "gt pixel ({}, {}) outside {width}x{height}",
                    e.x, e.y
                )));
            }
            if !(e.u.is_finite() && e.v.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite gt flow at ({}, {})", e.x, e.y)));
            }
        }
        entries.sort_by_key(|e| (e.y, e.x));
        if entries.windows(2).any(|w| (w[0].x, w[0].y) == (w[1].x, w[1].y)) {
            return Err(Error::InvalidInput("duplicate gt pixel".into()));
        }
        Ok(Self {
            width,
            height,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dense field whose valid set is exactly the labeled pixels.
    pub fn to_flow_field(&self) -> FlowField {
        let mut f = FlowField::invalid(self.width, self.height);
        for e in &self.entries {
            f.set(e.x, e.y, e.u, e.v);
        }
        f
    }

    pub fn from_flow_field(flow: &FlowField) -> Result<Self> {
        flow.check()?;
        let mut entries = Vec::with_capacity(flow.valid_count());
        for y in 0..flow.height {
            for x in 0..flow.width {
                if let Some((u, v)) = flow.get(x, y) {
                    entries.push(SparseEntry { x, y, u, v });
                }
            }
        }
        Self::new(flow.width, flow.height, entries)
    }
}

struct Projected {
    pixel: Pixel,
    cell: (usize, usize),
    depth: f64,
}

fn project(p: &Vector3<f64>, k: &CameraIntrinsics, extrinsics: &RigidPose) -> Option<Projected> {
    let c = extrinsics.transform(&Point3::from(*p));
    if c.z <= DEFAULT_Z_MIN {
        return None;
    }
    let pixel = k.project(&c.coords);
    if !k.contains(&pixel) {
        return None;
    }
    Some(Projected {
        pixel,
        cell: (pixel.x.round() as usize, pixel.y.round() as usize),
        depth: c.z,
    })
}

/// Per-image visibility of the points that project into it.
fn visible(proj: &[Option<Projected>], k: &CameraIntrinsics, occ: &OcclusionConfig) -> Vec<bool> {
    let (w, h) = (k.width, k.height);
    let mut cells: Vec<Vec<u32>> = vec![Vec::new(); w * h];
    for (i, p) in proj.iter().enumerate() {
        if let Some(p) = p {
            cells[p.cell.1 * w + p.cell.0].push(i as u32);
        }
    }
    let reach = occ.radius_px.ceil() as usize + 1;
    let r2 = occ.radius_px * occ.radius_px;
    proj.iter()
        .map(|p| {
            let Some(p) = p else { return false };
            let (cx, cy) = p.cell;
            for y in cy.saturating_sub(reach)..=(cy + reach).min(h - 1) {
                for x in cx.saturating_sub(reach)..=(cx + reach).min(w - 1) {
                    for &j in &cells[y * w + x] {
                        let q = proj[j as usize].as_ref().expect("bucketed points project");
                        if q.depth < p.depth - occ.depth_m && (q.pixel - p.pixel).norm_squared() <= r2 {
                            return false;
                        }
                    }
                }
            }
            true
        })
        .collect()
}

/// Projects every point into both cameras and keeps those in bounds, in front
/// of, and visible to both. The label is `pixel_A - pixel_B` (unrounded) stored
/// at the rounded pixel of B; when several survivors share a B pixel the one
/// nearest to camera B wins, ties going to the earlier point.
pub fn lidar_to_flow(frame: &LidarFrame, rig: &CameraRig, occ: &OcclusionConfig) -> Result<SparseFlowGT> {
    if frame.points.is_empty() {
        return Err(Error::EmptyInput("LiDAR frame has no points".into()));
    }
    rig.validate()?;
    occ.validate()?;
    let pa: Vec<_> = frame.points.iter().map(|p| project(p, &rig.intrinsics_a, &rig.extrinsics_a)).collect();
    let pb: Vec<_> = frame.points.iter().map(|p| project(p, &rig.intrinsics_b, &rig.extrinsics_b)).collect();
    let va = visible(&pa, &rig.intrinsics_a, occ);
    let vb = visible(&pb, &rig.intrinsics_b, occ);

    let (w, h) = (rig.intrinsics_b.width, rig.intrinsics_b.height);
    let mut best: Vec<Option<(f64, usize)>> = vec![None; w * h];
    for i in 0..frame.points.len() {
        if !(va[i] && vb[i]) {
            continue;
        }
        let b = pb[i].as_ref().expect("visible points project");
        let slot = &mut best[b.cell.1 * w + b.cell.0];
        if slot.is_none_or(|(d, _)| b.depth < d) {
            *slot = Some((b.depth, i));
        }
    }
    let entries: Vec<SparseEntry> = best
        .iter()
        .enumerate()
        .filter_map(|(cell, slot)| {
            let (_, i) = (*slot)?;
            let (a, b) = (pa[i].as_ref()?, pb[i].as_ref()?);
            let d = a.pixel - b.pixel;
            Some(SparseEntry {
                x: cell % w,
                y: cell / w,
                u: d.x as f32,
                v: d.y as f32,
            })
        })
        .collect();
    if entries.is_empty() {
        log::warn!("no LiDAR point survived projection into both images");
    }
    SparseFlowGT::new(w, h, entries)
}
