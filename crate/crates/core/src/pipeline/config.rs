use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::benchmark::{OcclusionConfig, MIN_NORMALIZED_SIZE};
use crate::consistency::AffineSamplingConfig;
use crate::error::{Error, Result};
use crate::geometry::PoseSamplingConfig;
use crate::io::read_bytes;
use crate::losses::{
    CombinedLossWeights, FeatureDistanceConfig, PhotometricKind, TrimConfig, DEFAULT_PHOTOMETRIC_THRESHOLD,
};

/// The configuration file shipped with the crate; equal to `PipelineConfig::default()`.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../../config/default.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhotometricConfig {
    pub threshold: f64,
    pub kind: PhotometricKind,
}

impl Default for PhotometricConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_PHOTOMETRIC_THRESHOLD,
            kind: PhotometricKind::L1,
        }
    }
}

/// Focal-length normalization applied when building benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeConfig {
    pub enabled: bool,
    pub target_focal: f64,
    pub target_width: usize,
    pub target_height: usize,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            target_focal: 400.0,
            target_width: 608,
            target_height: 192,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub train_frac: f64,
    pub occlusion: OcclusionConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            train_frac: 0.8,
            occlusion: OcclusionConfig::default(),
        }
    }
}

/// Schedule for an external trainer; carried so one file describes a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSchedule {
    pub iterations: u64,
    pub batch_size: u64,
    /// Iteration at which the consistency term switches on.
    pub consistency_start: u64,
}

impl Default for TrainingSchedule {
    fn default() -> Self {
        Self {
            iterations: 30_000,
            batch_size: 4,
            consistency_start: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads; 0 picks one per core.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub pose: PoseSamplingConfig,
    pub affine: AffineSamplingConfig,
    pub trim: TrimConfig,
    pub photometric: PhotometricConfig,
    pub loss_weights: CombinedLossWeights,
    pub feature: FeatureDistanceConfig,
    pub normalize: NormalizeConfig,
    pub benchmark: BenchmarkConfig,
    pub training: TrainingSchedule,
    pub run: RunConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.pose.validate()?;
        self.affine.validate()?;
        self.trim.validate()?;
        self.loss_weights.validate()?;
        self.feature.validate()?;
        self.benchmark.occlusion.validate()?;
        let p = &self.photometric;
        if !(p.threshold.is_finite() && p.threshold >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "photometric threshold must be finite and non-negative, got {}",
                p.threshold
            )));
        }
        let n = &self.normalize;
        if !(n.target_focal.is_finite() && n.target_focal > 0.0) {
            return Err(Error::InvalidConfig(format!("target focal must be positive, got {}", n.target_focal)));
        }
        if n.target_width < MIN_NORMALIZED_SIZE || n.target_height < MIN_NORMALIZED_SIZE {
            return Err(Error::InvalidConfig(format!(
                "normalized size {}x{} is below {MIN_NORMALIZED_SIZE}x{MIN_NORMALIZED_SIZE}",
                n.target_width, n.target_height
            )));
        }
        let f = self.benchmark.train_frac;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidConfig(format!("train fraction must lie in (0, 1), got {f}")));
        }
        // TOML integers are signed 64-bit
        for (name, seed) in [("pose.seed", self.pose.seed), ("affine.seed", self.affine.seed)] {
            if seed > i64::MAX as u64 {
                return Err(Error::InvalidConfig(format!("{name} must be below 2^63, got {seed}")));
            }
        }
        Ok(())
    }

    /// Parses and validates; keys left out take their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        self.validate()?;
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = read_bytes(path)?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| Error::InvalidConfig(format!("{} is not UTF-8", path.display())))?;
        Self::from_toml_str(text).map_err(|e| match e {
            Error::InvalidConfig(m) => Error::InvalidConfig(format!("{}: {m}", path.display())),
            e => e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_file_matches_defaults() {
        let shipped = PipelineConfig::from_toml_str(DEFAULT_CONFIG_TOML).unwrap();
        assert_eq!(shipped, PipelineConfig::default());
        assert_eq!(shipped.loss_weights.lambda_t, 2.0);
        assert_eq!(shipped.loss_weights.lambda_c, 0.05);
        assert_eq!(shipped.trim.tau_percent, 10.0);
    }

    #[test]
    fn partial_files_fill_defaults() {
        let cfg = PipelineConfig::from_toml_str("[trim]\ntau_percent = 20.0\n").unwrap();
        assert_eq!(cfg.trim.tau_percent, 20.0);
        assert_eq!(cfg.pose, PoseSamplingConfig::default());
        assert_eq!(PipelineConfig::from_toml_str("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(matches!(PipelineConfig::from_toml_str("[trim]\ntau = 1.0\n"), Err(Error::InvalidConfig(_))));
        assert!(PipelineConfig::from_toml_str("[trim]\ntau_percent = 100.0\n").is_err());
        assert!(PipelineConfig::from_toml_str("[benchmark]\ntrain_frac = 1.0\n").is_err());
        assert!(PipelineConfig::from_toml_str("[photometric]\nthreshold = -1.0\n").is_err());
        assert!(PipelineConfig::from_toml_str("[normalize]\ntarget_width = 4\n").is_err());
    }

    #[test]
    fn serialization_round_trips() {
        let mut cfg = PipelineConfig::default();
        cfg.pose.seed = 12345;
        cfg.trim.tau_percent = 7.3;
        cfg.photometric.kind = PhotometricKind::Ssim;
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(PipelineConfig::from_toml_str(&text).unwrap(), cfg);
    }
}
