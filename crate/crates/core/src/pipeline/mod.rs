//! Manifests, configuration, and the file-based runs behind the CLI:
//! triplet synthesis, LiDAR ground truth, and benchmark evaluation.

mod config;
mod manifest;
mod run;
mod triplet;
mod viz;

pub use config::{
    BenchmarkConfig, NormalizeConfig, PhotometricConfig, PipelineConfig, RunConfig, TrainingSchedule,
    DEFAULT_CONFIG_TOML,
};
pub use manifest::{FrameRecord, Manifest, SequenceSplit, SplitReport, DEFAULT_DATASET};
pub use run::{
    frame_dir, run_evaluate, run_gt_from_lidar, run_synthesize, triplet_dir, EvaluationReport, FrameMeta,
    FrameScore, GtSummary, FLOW_FILE, MASK_FILE,
};
pub use triplet::{frame_seed, make_triplet, read_depth, synthesize_triplet, FlowTriplet, TripletMeta};
pub use viz::{flow_to_rgb, write_flow_png};
