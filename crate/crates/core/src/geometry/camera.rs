use nalgebra::{Matrix3, Point2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in a camera frame, meters.
pub type Point3 = nalgebra::Point3<f64>;
/// A (possibly sub-pixel) image location `(u, v)`.
pub type Pixel = Point2<f64>;

/// Pinhole intrinsics together with the image size they apply to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    /// Validates focal lengths and size. A principal point outside the image is
    /// accepted with a warning since crops can legitimately move it there.
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx.is_finite() && self.fx > 0.0 && self.fy.is_finite() && self.fy > 0.0) {
            return Err(Error::InvalidInput(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(Error::InvalidInput("principal point must be finite".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidInput(format!(
                "image size must be at least 1x1, got {}x{}",
                self.width, self.height
            )));
        }
        if self.cx < 0.0
            || self.cx >= self.width as f64
            || self.cy < 0.0
            || self.cy >= self.height as f64
        {
            log::warn!(
                "principal point ({}, {}) lies outside the {}x{} image",
                self.cx,
                self.cy,
                self.width,
                self.height
            );
        }
        Ok(())
    }

    /// Samples intrinsics for an uncalibrated image: focal length uniform in
    /// `[0.8, 1.5] * width`, square pixels, principal point at the image center.
    pub fn sample<R: Rng + ?Sized>(width: usize, height: usize, rng: &mut R) -> Result<Self> {
        let f = width as f64 * (0.8 + 0.7 * rng.random::<f64>());
        Self::new(
            f,
            f,
            (width as f64 - 1.0) / 2.0,
            (height as f64 - 1.0) / 2.0,
            width,
            height,
        )
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.fx, 0.0, self.cx, //
            0.0, self.fy, self.cy, //
            0.0, 0.0, 1.0,
        )
    }

    /// Perspective projection without any depth check.
    #[inline]
    pub fn project(&self, p: &Vector3<f64>) -> Pixel {
        Pixel::new(
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
        )
    }

    /// True when `p` lies inside `[0, width-1] x [0, height-1]`.
    #[inline]
    pub fn contains(&self, p: &Pixel) -> bool {
        p.x >= 0.0
            && p.y >= 0.0
            && p.x <= (self.width - 1) as f64
            && p.y <= (self.height - 1) as f64
    }
}
