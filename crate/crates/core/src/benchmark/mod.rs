//! Cross-modal flow benchmarks from calibrated LiDAR sequences: sparse ground
//! truth, focal-length normalization, train/test splits and EPE/F1 scoring.

mod lidar;
mod metrics;
mod normalize;
mod split;

pub use lidar::{lidar_to_flow, CameraRig, LidarFrame, OcclusionConfig, SparseEntry, SparseFlowGT};
pub use metrics::{is_outlier, score, MetricAccumulator, MetricReport};
pub use normalize::{focal_normalize, normalize_intrinsics, MIN_NORMALIZED_SIZE};
pub use split::{split_count, split_sequence};
