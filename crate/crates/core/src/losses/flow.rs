use serde::{Deserialize, Serialize};

use super::{pairwise_sum, sorted_mean, ValidMask};
use crate::error::{Error, Result};
use crate::geometry::FlowField;

/// Fraction of the largest residuals, in percent, dropped by the trimmed loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrimConfig {
    pub tau_percent: f64,
}

impl Default for TrimConfig {
    fn default() -> Self {
        Self { tau_percent: 10.0 }
    }
}

impl TrimConfig {
    pub fn new(tau_percent: f64) -> Result<Self> {
        let cfg = Self { tau_percent };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if (0.0..100.0).contains(&self.tau_percent) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "tau must lie in [0, 100), got {}",
                self.tau_percent
            )))
        }
    }
}

/// Number of pixels removed from `n_valid`: `ceil(tau / 100 * n_valid)`.
pub fn trim_count(tau_percent: f64, n_valid: usize) -> usize {
    (tau_percent * n_valid as f64 / 100.0).ceil() as usize
}

/// `(|Δu| + |Δv|, pixel index)` for every masked pixel, in row-major order.
fn residuals(pred: &FlowField, target: &FlowField, mask: &ValidMask) -> Result<Vec<(f64, usize)>> {
    pred.expect_size(mask.width, mask.height, "flow loss (prediction)")?;
    target.expect_size(mask.width, mask.height, "flow loss (target)")?;
    let mut out = Vec::new();
    for (i, _) in mask.values.iter().enumerate().filter(|(_, m)| **m) {
        if !(pred.valid[i] && target.valid[i]) {
            return Err(Error::InvalidInput(format!(
                "mask selects pixel ({}, {}) where a flow is invalid",
                i % mask.width,
                i / mask.width
            )));
        }
        let r = (pred.u[i] as f64 - target.u[i] as f64).abs() + (pred.v[i] as f64 - target.v[i] as f64).abs();
        out.push((r, i));
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("flow loss mask has no valid pixel".into()));
    }
    Ok(out)
}

/// Mean per-pixel L1 flow error over the mask.
pub fn masked_flow_loss(pred: &FlowField, target: &FlowField, mask: &ValidMask) -> Result<f64> {
    let r = residuals(pred, target, mask)?;
    Ok(sorted_mean(r.into_iter().map(|(r, _)| r).collect()))
}

/// Outlier-robust flow loss: drops the `ceil(tau% * N)` largest per-pixel L1
/// residuals among masked pixels and averages the rest.
///
/// Returns the loss and the set of surviving pixels. Ties at the cut keep the
/// lower row-major index.
pub fn trimmed_flow_loss(
    pred: &FlowField,
    target: &FlowField,
    mask: &ValidMask,
    cfg: &TrimConfig,
) -> Result<(f64, ValidMask)> {
    cfg.validate()?;
    let mut r = residuals(pred, target, mask)?;
    let n = r.len();
    let drop = trim_count(cfg.tau_percent, n);
    if drop >= n {
        return Err(Error::EmptyInput(format!(
            "trimming {}% removes all {n} valid pixels",
            cfg.tau_percent
        )));
    }
    r.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let kept = &r[..n - drop];
    let values: Vec<f64> = kept.iter().map(|(v, _)| *v).collect();
    let loss = pairwise_sum(&values) / kept.len() as f64;

    let mut keep = ValidMask::filled(mask.width, mask.height, false);
    for (_, i) in kept {
        keep.values[*i] = true;
    }
    Ok((loss, keep))
}

/// Mean L1 residual over a fixed pixel set, i.e. the trimmed loss with `Ω` frozen.
pub fn fixed_set_flow_loss(pred: &FlowField, target: &FlowField, keep: &ValidMask) -> Result<f64> {
    masked_flow_loss(pred, target, keep)
}

/// Subgradient of the trimmed loss with `Ω` held fixed: `sign(F - F_S) / |Ω|`
/// per component on kept pixels and zero elsewhere. The returned field is valid
/// exactly on `keep`.
pub fn flow_loss_subgradient(pred: &FlowField, target: &FlowField, keep: &ValidMask) -> Result<FlowField> {
    let r = residuals(pred, target, keep)?;
    let scale = 1.0 / r.len() as f64;
    let sign = |d: f64| {
        if d > 0.0 {
            scale
        } else if d < 0.0 {
            -scale
        } else {
            0.0
        }
    };
    let mut grad = FlowField::zeros(keep.width, keep.height);
    grad.valid.copy_from_slice(&keep.values);
    for (_, i) in r {
        grad.u[i] = sign(pred.u[i] as f64 - target.u[i] as f64) as f32;
        grad.v[i] = sign(pred.v[i] as f64 - target.v[i] as f64) as f32;
    }
    Ok(grad)
}
