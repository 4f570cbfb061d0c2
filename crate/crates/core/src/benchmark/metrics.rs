use serde::{Deserialize, Serialize};

use super::SparseFlowGT;
use crate::error::{Error, Result};
use crate::geometry::FlowField;
use crate::losses::pairwise_sum;

const OUTLIER_ABS_PX: f64 = 3.0;
const OUTLIER_REL: f64 = 0.05;

/// Endpoint error (pixels) and outlier rate (percent) over `n_points` labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub epe: f64,
    pub f1: f64,
    pub n_points: u64,
}

/// Sums behind one or more reports. Merging is associative, so per-frame
/// accumulators can be combined in any grouping.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricAccumulator {
    pub epe_sum: f64,
    pub outliers: u64,
    pub n_points: u64,
}

impl MetricAccumulator {
    pub fn merge(self, other: Self) -> Self {
        Self {
            epe_sum: self.epe_sum + other.epe_sum,
            outliers: self.outliers + other.outliers,
            n_points: self.n_points + other.n_points,
        }
    }

    pub fn report(&self) -> Result<MetricReport> {
        if self.n_points == 0 {
            return Err(Error::EmptyInput("no labeled points to score".into()));
        }
        let n = self.n_points as f64;
        Ok(MetricReport {
            epe: self.epe_sum / n,
            f1: 100.0 * self.outliers as f64 / n,
            n_points: self.n_points,
        })
    }
}

impl MetricReport {
    pub fn accumulator(&self) -> MetricAccumulator {
        MetricAccumulator {
            epe_sum: self.epe * self.n_points as f64,
            outliers: (self.f1 / 100.0 * self.n_points as f64).round() as u64,
            n_points: self.n_points,
        }
    }

    /// Point-weighted combination of per-frame reports, summed pairwise in the
    /// given order.
    pub fn aggregate(reports: &[MetricReport]) -> Result<MetricReport> {
        let sums: Vec<f64> = reports.iter().map(|r| r.epe * r.n_points as f64).collect();
        let acc = MetricAccumulator {
            epe_sum: pairwise_sum(&sums),
            outliers: reports.iter().map(|r| r.accumulator().outliers).sum(),
            n_points: reports.iter().map(|r| r.n_points).sum(),
        };
        acc.report()
    }
}

/// A label is an outlier when its endpoint error exceeds both 3 px and 5% of
/// the label's magnitude.
#[inline]
pub fn is_outlier(err: f64, gt_norm: f64) -> bool {
    err > OUTLIER_ABS_PX && err > OUTLIER_REL * gt_norm
}

pub(crate) fn accumulate(pred: &FlowField, gt: &SparseFlowGT) -> Result<MetricAccumulator> {
    if gt.is_empty() {
        return Err(Error::EmptyInput("ground truth has no labeled pixels".into()));
    }
    pred.check()?;
    pred.expect_size(gt.width, gt.height, "score")?;
    let mut errs = Vec::with_capacity(gt.len());
    let mut outliers = 0u64;
    let mut missing = 0usize;
    for e in &gt.entries {
        let (pu, pv) = pred.get(e.x, e.y).unwrap_or_else(|| {
            missing += 1;
            (0.0, 0.0)
        });
        let err = (pu as f64 - e.u as f64).hypot(pv as f64 - e.v as f64);
        let norm = (e.u as f64).hypot(e.v as f64);
        outliers += is_outlier(err, norm) as u64;
        errs.push(err);
    }
    if missing > 0 {
        log::warn!("{missing} labeled pixel(s) have no valid prediction and score as zero flow");
    }
    errs.sort_unstable_by(f64::total_cmp);
    Ok(MetricAccumulator {
        epe_sum: pairwise_sum(&errs),
        outliers,
        n_points: gt.len() as u64,
    })
}

/// EPE and F1 of a dense prediction read at the labeled pixels. A prediction
/// marked invalid at a labeled pixel counts as zero flow.
pub fn score(pred: &FlowField, gt: &SparseFlowGT) -> Result<MetricReport> {
    accumulate(pred, gt)?.report()
}
