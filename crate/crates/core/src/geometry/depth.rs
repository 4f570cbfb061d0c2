use crate::error::{Error, Result};

/// Per-pixel metric depth, row-major. A pixel is usable only when `valid` is set,
/// and every valid depth is finite and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f32>,
    pub valid: Vec<bool>,
}

impl DepthMap {
    /// Builds a depth map, marking non-finite and non-positive values invalid.
    pub fn from_values(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "depth buffer has {} values, expected {}x{}",
                values.len(),
                width,
                height
            )));
        }
        let valid = values.iter().map(|d| d.is_finite() && *d > 0.0).collect();
        Ok(Self {
            width,
            height,
            values,
            valid,
        })
    }

    pub fn constant(width: usize, height: usize, depth: f32) -> Self {
        Self::from_values(width, height, vec![depth; width * height])
            .expect("buffer size matches by construction")
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f32> {
        let i = y * self.width + x;
        self.valid[i].then(|| self.values[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Median over valid pixels (lower median for even counts).
    pub fn median_valid(&self) -> Option<f64> {
        let mut d: Vec<f32> = self
            .values
            .iter()
            .zip(&self.valid)
            .filter_map(|(d, v)| v.then_some(*d))
            .collect();
        if d.is_empty() {
            return None;
        }
        let mid = (d.len() - 1) / 2;
        let (_, m, _) = d.select_nth_unstable_by(mid, f32::total_cmp);
        Some(*m as f64)
    }
}
