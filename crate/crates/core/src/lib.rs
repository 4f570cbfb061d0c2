//! Geometry-aware synthesis of optical flow supervision from single images with
//! depth, masked and trimmed flow losses, flow derivation under affine
//! augmentation, and LiDAR-based flow benchmarks.
//!
//! Conventions used throughout: pixel centers sit at integer coordinates, the
//! origin is the top-left pixel, `u` grows to the right and `v` downward. Flow
//! vectors are stored in pixels as `f32`; geometry is computed in `f64`.

pub mod benchmark;
pub mod consistency;
pub mod error;
pub mod geometry;
pub mod io;
pub mod losses;
pub mod pipeline;
pub mod renderer;

pub use error::{Error, Result};
pub use geometry::{CameraIntrinsics, DepthMap, FlowField, Point3, RigidPose};
pub use losses::ValidMask;
pub use renderer::ImageBuffer;
