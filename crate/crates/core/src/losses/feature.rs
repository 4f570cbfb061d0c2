use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::pairwise_sum;
use crate::error::{Error, Result};
use crate::io::read_pfm;
use crate::renderer::ImageBuffer;

/// Where per-layer feature maps come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FeatureExtractor {
    /// Layer `l` is Gaussian pyramid level `l` concatenated with its horizontal
    /// and vertical central differences.
    PyramidGradient,
    /// Every layer is the image itself.
    Identity,
    /// Precomputed maps, one PFM file per layer for each of the two images.
    External {
        first: Vec<PathBuf>,
        second: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureDistanceConfig {
    pub layer_weights: Vec<f64>,
    pub extractor: FeatureExtractor,
}

impl Default for FeatureDistanceConfig {
    fn default() -> Self {
        Self {
            layer_weights: vec![1.0; 4],
            extractor: FeatureExtractor::PyramidGradient,
        }
    }
}

impl FeatureDistanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layer_weights.is_empty() {
            return Err(Error::InvalidConfig("feature distance needs at least one layer".into()));
        }
        if self.layer_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "layer weights must be finite and non-negative: {:?}",
                self.layer_weights
            )));
        }
        if let FeatureExtractor::External { first, second } = &self.extractor {
            let n = self.layer_weights.len();
            if first.len() != n || second.len() != n {
                return Err(Error::InvalidConfig(format!(
                    "{n} layer weights but {} / {} external feature files",
                    first.len(),
                    second.len()
                )));
            }
        }
        Ok(())
    }
}

/// `Σ_l λ_l ‖Φ_l(a) − Φ_l(b)‖₂` over the configured layers.
pub fn feature_distance(a: &ImageBuffer, b: &ImageBuffer, cfg: &FeatureDistanceConfig) -> Result<f64> {
    cfg.validate()?;
    let layers = cfg.layer_weights.len();
    let (fa, fb) = match &cfg.extractor {
        FeatureExtractor::PyramidGradient => {
            a.expect_same_shape(b, "feature_distance")?;
            (pyramid_gradient_features(a, layers), pyramid_gradient_features(b, layers))
        }
        FeatureExtractor::Identity => {
            a.expect_same_shape(b, "feature_distance")?;
            let img = |i: &ImageBuffer| vec![i.data.iter().map(|x| *x as f64).collect::<Vec<_>>(); layers];
            (img(a), img(b))
        }
        FeatureExtractor::External { first, second } => {
            let load = |paths: &[PathBuf]| -> Result<Vec<Vec<f64>>> {
                paths
                    .iter()
                    .map(|p| Ok(read_pfm(p)?.data.into_iter().map(f64::from).collect()))
                    .collect()
            };
            (load(first)?, load(second)?)
        }
    };
    let mut total = 0.0;
    for (l, (weight, (x, y))) in cfg.layer_weights.iter().zip(fa.iter().zip(&fb)).enumerate() {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "feature layer {l} has {} vs {} values",
                x.len(),
                y.len()
            )));
        }
        let sq: Vec<f64> = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).collect();
        total += weight * pairwise_sum(&sq).sqrt();
    }
    Ok(total)
}

/// Built-in stand-in for a learned feature extractor: per level, the pyramid
/// image followed by its x and y gradients, all channels interleaved.
pub fn pyramid_gradient_features(image: &ImageBuffer, levels: usize) -> Vec<Vec<f64>> {
    let c = image.channels;
    let mut level = Plane {
        w: image.width,
        h: image.height,
        c,
        data: image.data.iter().map(|x| *x as f64).collect(),
    };
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        if l > 0 {
            level = level.pyr_down();
        }
        let mut feat = level.data.clone();
        feat.extend(level.gradient(true));
        feat.extend(level.gradient(false));
        out.push(feat);
    }
    out
}

struct Plane {
    w: usize,
    h: usize,
    c: usize,
    data: Vec<f64>,
}

impl Plane {
    #[inline]
    fn at(&self, x: isize, y: isize, ch: usize) -> f64 {
        let x = x.clamp(0, self.w as isize - 1) as usize;
        let y = y.clamp(0, self.h as isize - 1) as usize;
        self.data[(y * self.w + x) * self.c + ch]
    }

    /// Central differences with edge clamping.
    fn gradient(&self, horizontal: bool) -> Vec<f64> {
        let mut g = Vec::with_capacity(self.data.len());
        for y in 0..self.h as isize {
            for x in 0..self.w as isize {
                for ch in 0..self.c {
                    let d = if horizontal {
                        self.at(x + 1, y, ch) - self.at(x - 1, y, ch)
                    } else {
                        self.at(x, y + 1, ch) - self.at(x, y - 1, ch)
                    };
                    g.push(d / 2.0);
                }
            }
        }
        g
    }

    /// Binomial [1 4 6 4 1]/16 blur (edge clamped), then keep even pixels.
    fn pyr_down(&self) -> Plane {
        const TAPS: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
        let mut horiz = Vec::with_capacity(self.data.len());
        for y in 0..self.h as isize {
            for x in 0..self.w as isize {
                for ch in 0..self.c {
                    horiz.push((0..5).map(|k| TAPS[k] * self.at(x + k as isize - 2, y, ch)).sum::<f64>());
                }
            }
        }
        let tmp = Plane {
            w: self.w,
            h: self.h,
            c: self.c,
            data: horiz,
        };
        let (nw, nh) = (self.w.div_ceil(2), self.h.div_ceil(2));
        let mut data = Vec::with_capacity(nw * nh * self.c);
        for y in 0..nh as isize {
            for x in 0..nw as isize {
                for ch in 0..self.c {
                    let (sx, sy) = (2 * x, 2 * y);
                    data.push((0..5).map(|k| TAPS[k] * tmp.at(sx, sy + k as isize - 2, ch)).sum::<f64>());
                }
            }
        }
        Plane {
            w: nw,
            h: nh,
            c: self.c,
            data,
        }
    }
}
