//! Pinhole cameras, rigid poses, lifting of pixels to 3D, reprojection into a
//! virtual view and the dense flow that reprojection induces.

mod camera;
mod depth;
mod flow;
mod pose;
mod synth;

pub use camera::{CameraIntrinsics, Pixel, Point3};
pub use depth::DepthMap;
pub use flow::FlowField;
pub use pose::{
    is_valid_rotation, rotation_from_euler_zyx, sample_pose, sample_pose_params, seeded_rng,
    PoseParams, PoseSamplingConfig, RigidPose,
};
pub use synth::{
    lift, reproject, reproject_with_min_depth, synth_flow, synth_view, Projection, SynthView,
    DEFAULT_Z_MIN,
};
