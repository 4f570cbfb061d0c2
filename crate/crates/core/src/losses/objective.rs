use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights of the modality-transfer and consistency terms in the full objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CombinedLossWeights {
    pub lambda_t: f64,
    pub lambda_c: f64,
}

impl Default for CombinedLossWeights {
    fn default() -> Self {
        Self {
            lambda_t: 2.0,
            lambda_c: 0.05,
        }
    }
}

impl CombinedLossWeights {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if ok(self.lambda_t) && ok(self.lambda_c) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("loss weights must be finite and non-negative: {self:?}")))
        }
    }
}

/// `flow_a + flow_b + λ_T * transfer + λ_C * consistency`.
pub fn combined_objective(
    flow_loss_a: f64,
    flow_loss_b: f64,
    transfer_loss: f64,
    consistency_loss: f64,
    weights: &CombinedLossWeights,
) -> Result<f64> {
    weights.validate()?;
    let terms = [flow_loss_a, flow_loss_b, transfer_loss, consistency_loss];
    if let Some(bad) = terms.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "loss terms must be finite and non-negative, got {bad}"
        )));
    }
    Ok(flow_loss_a + flow_loss_b + weights.lambda_t * transfer_loss + weights.lambda_c * consistency_loss)
}
