//! Validity masks, masked and trimmed flow losses, photometric and feature
//! distances, and the weighted training objective.
//!
//! Every reduction here sorts its per-pixel terms and sums them pairwise, so
//! loss values do not depend on pixel order or thread count.

mod feature;
mod flow;
mod mask;
mod objective;
mod photometric;
mod sum;

pub use feature::{feature_distance, pyramid_gradient_features, FeatureDistanceConfig, FeatureExtractor};
pub use flow::{
    fixed_set_flow_loss, flow_loss_subgradient, masked_flow_loss, trim_count, trimmed_flow_loss,
    TrimConfig,
};
pub use mask::ValidMask;
pub use objective::{combined_objective, CombinedLossWeights};
pub use photometric::{photometric_loss, photometric_mask, PhotometricKind, DEFAULT_PHOTOMETRIC_THRESHOLD};
pub(crate) use sum::{pairwise_sum, sorted_mean};
