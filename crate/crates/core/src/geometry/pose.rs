use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Point3;
use crate::error::{Error, Result};

const ROTATION_TOL: f64 = 1e-6;

/// True iff `RᵀR` is within 1e-6 of identity entrywise and `det R` within 1e-6 of +1.
pub fn is_valid_rotation(r: &Matrix3<f64>) -> bool {
    if r.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let ortho = (r.transpose() * r - Matrix3::identity()).amax();
    ortho <= ROTATION_TOL && (r.determinant() - 1.0).abs() <= ROTATION_TOL
}

/// `Rz(rz) * Ry(ry) * Rx(rx)`, angles in radians.
pub fn rotation_from_euler_zyx(rx: f64, ry: f64, rz: f64) -> Matrix3<f64> {
    let (sx, cx) = rx.sin_cos();
    let (sy, cy) = ry.sin_cos();
    let (sz, cz) = rz.sin_cos();
    let rot_x = Matrix3::new(1.0, 0.0, 0.0, 0.0, cx, -sx, 0.0, sx, cx);
    let rot_y = Matrix3::new(cy, 0.0, sy, 0.0, 1.0, 0.0, -sy, 0.0, cy);
    let rot_z = Matrix3::new(cz, -sz, 0.0, sz, cz, 0.0, 0.0, 0.0, 1.0);
    rot_z * rot_y * rot_x
}

/// Rigid transform `X' = R X + t`. Serialized with a row-major rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseRepr", into = "PoseRepr")]
pub struct RigidPose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseRepr {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

impl From<RigidPose> for PoseRepr {
    fn from(p: RigidPose) -> Self {
        let r = p.rotation;
        Self {
            rotation: std::array::from_fn(|i| std::array::from_fn(|j| r[(i, j)])),
            translation: p.translation.into(),
        }
    }
}

impl TryFrom<PoseRepr> for RigidPose {
    type Error = Error;

    fn try_from(p: PoseRepr) -> Result<Self> {
        RigidPose::new(
            Matrix3::from_fn(|i, j| p.rotation[i][j]),
            Vector3::from(p.translation),
        )
    }
}

impl Default for RigidPose {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidPose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !is_valid_rotation(&rotation) {
            return Err(Error::InvalidInput(format!(
                "not a proper rotation matrix: {rotation}"
            )));
        }
        if translation.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("translation must be finite".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    #[inline]
    pub fn transform(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidPose) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rotation == Matrix3::identity() && self.translation == Vector3::zeros()
    }
}

/// Bounds for virtual-view sampling. Rotation is bounded per axis, translation
/// per component as a fraction of the scene's median depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoseSamplingConfig {
    pub max_rotation_deg: f64,
    pub max_translation_frac: f64,
    pub seed: u64,
}

impl Default for PoseSamplingConfig {
    fn default() -> Self {
        Self {
            max_rotation_deg: 5.0,
            max_translation_frac: 0.1,
            seed: 0,
        }
    }
}

impl PoseSamplingConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if ok(self.max_rotation_deg) && ok(self.max_translation_frac) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "pose bounds must be finite and non-negative: {self:?}"
            )))
        }
    }
}

/// The raw draws behind a sampled pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseParams {
    /// Rotation about x, y, z in degrees; composed as `Rz * Ry * Rx`.
    pub euler_deg: [f64; 3],
    pub translation: [f64; 3],
}

impl PoseParams {
    pub fn to_pose(&self) -> RigidPose {
        let [rx, ry, rz] = self.euler_deg.map(f64::to_radians);
        RigidPose {
            rotation: rotation_from_euler_zyx(rx, ry, rz),
            translation: Vector3::from(self.translation),
        }
    }
}

/// Uniform in `[-bound, bound]`; exactly zero when `bound == 0`.
fn symmetric<R: Rng + ?Sized>(rng: &mut R, bound: f64) -> f64 {
    bound * (2.0 * rng.random::<f64>() - 1.0)
}

pub fn sample_pose_params<R: Rng + ?Sized>(
    cfg: &PoseSamplingConfig,
    median_depth: f64,
    rng: &mut R,
) -> Result<PoseParams> {
    cfg.validate()?;
    if !(median_depth.is_finite() && median_depth > 0.0) {
        return Err(Error::InvalidInput(format!(
            "median depth must be positive, got {median_depth}"
        )));
    }
    let mut euler_deg = [0.0; 3];
    for a in &mut euler_deg {
        *a = symmetric(rng, cfg.max_rotation_deg);
    }
    let t_bound = cfg.max_translation_frac * median_depth;
    let mut translation = [0.0; 3];
    for t in &mut translation {
        *t = symmetric(rng, t_bound);
    }
    Ok(PoseParams {
        euler_deg,
        translation,
    })
}

/// Draws a virtual camera pose: independent uniform Euler angles per axis and a
/// uniform translation scaled by the median depth.
pub fn sample_pose<R: Rng + ?Sized>(
    cfg: &PoseSamplingConfig,
    median_depth: f64,
    rng: &mut R,
) -> Result<RigidPose> {
    sample_pose_params(cfg, median_depth, rng).map(|p| p.to_pose())
}

/// Deterministic generator for draw `index` under `seed`. Distinct indices use
/// distinct ChaCha streams so draws never overlap.
pub fn seeded_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
