//! Affine augmentation of an image pair and the reference flow it implies.
//!
//! When the same affine map `A(x) = m x + t` warps both images of a pair, a
//! pixel `x̃` of the augmented second image came from `x = A⁻¹ x̃`, which matched
//! `x + F(x)` in the first image, now at `A(x + F(x))`. The displacement is
//! therefore `m F(A⁻¹ x̃)`: translation cancels and only the linear part acts.

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FlowField;
use crate::losses::{trimmed_flow_loss, TrimConfig, ValidMask};
use crate::renderer::sample::footprint;
use crate::renderer::ImageBuffer;

const MIN_ABS_DET: f64 = 1e-8;

/// `x ↦ m x + t` in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform2D {
    pub m: Matrix2<f64>,
    pub t: Vector2<f64>,
}

/// Sine and cosine of an angle in degrees, exact at multiples of 90°.
fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let quarter = deg / 90.0;
    if quarter.is_finite() && quarter.fract() == 0.0 {
        match (quarter as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        deg.to_radians().sin_cos()
    }
}

impl AffineTransform2D {
    pub fn new(m: Matrix2<f64>, t: Vector2<f64>) -> Result<Self> {
        let a = Self { m, t };
        a.check_invertible()?;
        Ok(a)
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix2::identity(),
            t: Vector2::zeros(),
        }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self {
            m: Matrix2::identity(),
            t: Vector2::new(tx, ty),
        }
    }

    /// `scale * R(angle)` about the origin. With `v` pointing down, a positive
    /// angle turns `+u` toward `+v`.
    pub fn similarity(scale: f64, angle_deg: f64, tx: f64, ty: f64) -> Self {
        let (s, c) = sin_cos_deg(angle_deg);
        Self {
            m: Matrix2::new(c, -s, s, c) * scale,
            t: Vector2::new(tx, ty),
        }
    }

    /// The same linear part applied about `(cx, cy)` instead of the origin,
    /// keeping the existing translation on top.
    pub fn about(&self, cx: f64, cy: f64) -> Self {
        let c = Vector2::new(cx, cy);
        Self {
            m: self.m,
            t: c - self.m * c + self.t,
        }
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    fn check_invertible(&self) -> Result<()> {
        let det = self.det();
        if !(det.is_finite() && det.abs() > MIN_ABS_DET && self.t.iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "affine transform is singular or non-finite (det {det})"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let p = self.m * Vector2::new(x, y) + self.t;
        (p.x, p.y)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.check_invertible()?;
        let mi = self
            .m
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("affine transform is singular".into()))?;
        Ok(Self {
            m: mi,
            t: -(mi * self.t),
        })
    }
}

/// Ranges for random augmentation; each range is `[lo, hi]` and `lo == hi`
/// pins the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AffineSamplingConfig {
    pub scale_range: [f64; 2],
    pub rotation_deg_range: [f64; 2],
    pub translation_px_range: [f64; 2],
    pub seed: u64,
}

impl Default for AffineSamplingConfig {
    fn default() -> Self {
        Self {
            scale_range: [0.9, 1.1],
            rotation_deg_range: [-10.0, 10.0],
            translation_px_range: [-10.0, 10.0],
            seed: 0,
        }
    }
}

impl AffineSamplingConfig {
    pub fn validate(&self) -> Result<()> {
        let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !(ordered(self.scale_range) && ordered(self.rotation_deg_range) && ordered(self.translation_px_range)) {
            return Err(Error::InvalidConfig(format!("affine ranges must be finite and ordered: {self:?}")));
        }
        if self.scale_range[0] <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "scale range must be positive, got {:?}",
                self.scale_range
            )));
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draws `m = s * R(θ)` about the origin and a translation with both
/// components uniform in the translation range. Use [`AffineTransform2D::about`]
/// to rotate about the image center instead.
pub fn sample_affine<R: Rng + ?Sized>(cfg: &AffineSamplingConfig, rng: &mut R) -> Result<AffineTransform2D> {
    cfg.validate()?;
    let scale = uniform(rng, cfg.scale_range);
    let angle = uniform(rng, cfg.rotation_deg_range);
    let tx = uniform(rng, cfg.translation_px_range);
    let ty = uniform(rng, cfg.translation_px_range);
    Ok(AffineTransform2D::similarity(scale, angle, tx, ty))
}

/// `Ĩ(x̃) = I(A⁻¹ x̃)` sampled bilinearly; the mask is false (and the pixel 0)
/// where the footprint leaves the source image.
pub fn warp_image_affine(image: &ImageBuffer, a: &AffineTransform2D) -> Result<(ImageBuffer, ValidMask)> {
    let inv = a.inverse()?;
    let (w, h, c) = (image.width, image.height, image.channels);
    let mut out = ImageBuffer::filled(w, h, c, 0.0);
    let mut mask = ValidMask::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = inv.apply(x as f64, y as f64);
            let Some(fp) = footprint(sx, sy, w, h) else { continue };
            let px = out.pixel_mut(x, y);
            for (ch, v) in px.iter_mut().enumerate() {
                *v = fp.interpolate(|i, j| image.get(i, j, ch) as f64) as f32;
            }
            mask.values[y * w + x] = true;
        }
    }
    Ok((out, mask))
}

/// Reference flow for the augmented pair: `F̃*(x̃) = m F(A⁻¹ x̃)`.
///
/// `F` is interpolated bilinearly per component; a pixel is valid only when
/// `A⁻¹ x̃` is inside the image and every contributing neighbor of `F` is valid.
pub fn derive_transformed_flow(flow: &FlowField, a: &AffineTransform2D) -> Result<FlowField> {
    flow.check()?;
    let inv = a.inverse()?;
    let (w, h) = (flow.width, flow.height);
    let mut out = FlowField::invalid(w, h);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = inv.apply(x as f64, y as f64);
            let Some(fp) = footprint(sx, sy, w, h) else { continue };
            if fp.support().any(|(i, j, _)| !flow.valid[j * w + i]) {
                continue;
            }
            let u = fp.interpolate(|i, j| flow.u[j * w + i] as f64);
            let v = fp.interpolate(|i, j| flow.v[j * w + i] as f64);
            let d = a.m * Vector2::new(u, v);
            out.set(x, y, d.x as f32, d.y as f32);
        }
    }
    Ok(out)
}

/// Trimmed L1 loss between the prediction on the augmented pair and the
/// derived reference, over pixels valid in both.
pub fn consistency_loss(pred_aug: &FlowField, reference: &FlowField, cfg: &TrimConfig) -> Result<f64> {
    reference.expect_size(pred_aug.width, pred_aug.height, "consistency_loss")?;
    let joint: Vec<bool> = pred_aug.valid.iter().zip(&reference.valid).map(|(a, b)| *a && *b).collect();
    let joint = ValidMask::from_values(pred_aug.width, pred_aug.height, joint)?;
    if joint.is_empty() {
        return Err(Error::EmptyInput("prediction and reference share no valid pixel".into()));
    }
    trimmed_flow_loss(pred_aug, reference, &joint, cfg).map(|(loss, _)| loss)
}
