//! Bilinear sampling footprints shared by the warps.

/// Coordinates within this distance outside the image snap onto the border,
/// absorbing round-off from inverting a transform.
const BORDER_SNAP: f64 = 1e-9;

/// The 2x2 neighborhood of a sub-pixel location. When a coordinate is integral
/// its upper neighbor repeats the lower one with zero weight, so sampling
/// exactly on the last row or column stays in bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Footprint {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub wx: f64,
    pub wy: f64,
}

fn axis(c: f64, len: usize) -> Option<(usize, usize, f64)> {
    let last = (len - 1) as f64;
    if !c.is_finite() || c < -BORDER_SNAP || c > last + BORDER_SNAP {
        return None;
    }
    let c = c.clamp(0.0, last);
    let c0 = c.floor();
    let w = c - c0;
    let i0 = c0 as usize;
    let i1 = if w > 0.0 { i0 + 1 } else { i0 };
    Some((i0, i1, w))
}

/// `None` when any neighbor with non-zero weight would fall outside `width x height`.
#[inline]
pub(crate) fn footprint(x: f64, y: f64, width: usize, height: usize) -> Option<Footprint> {
    let (x0, x1, wx) = axis(x, width)?;
    let (y0, y1, wy) = axis(y, height)?;
    Some(Footprint {
        x0,
        y0,
        x1,
        y1,
        wx,
        wy,
    })
}

impl Footprint {
    /// The four corners with their weights, including zero-weight repeats.
    #[inline]
    pub fn corners(&self) -> [(usize, usize, f64); 4] {
        let (ax, ay) = (1.0 - self.wx, 1.0 - self.wy);
        [
            (self.x0, self.y0, ax * ay),
            (self.x1, self.y0, self.wx * ay),
            (self.x0, self.y1, ax * self.wy),
            (self.x1, self.y1, self.wx * self.wy),
        ]
    }

    /// Corners that actually contribute to the interpolated value.
    #[inline]
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> {
        self.corners().into_iter().filter(|c| c.2 > 0.0)
    }

    /// Interpolates a scalar field given by `f(x, y)`.
    #[inline]
    pub fn interpolate(&self, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
        let top = (1.0 - self.wx) * f(self.x0, self.y0) + self.wx * f(self.x1, self.y0);
        let bottom = (1.0 - self.wx) * f(self.x0, self.y1) + self.wx * f(self.x1, self.y1);
        (1.0 - self.wy) * top + self.wy * bottom
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_coordinates_on_last_pixel() {
        let fp = footprint(3.0, 2.0, 4, 3).unwrap();
        assert_eq!((fp.x0, fp.x1, fp.y0, fp.y1), (3, 3, 2, 2));
        assert_eq!(fp.support().count(), 1);
    }

    #[test]
    fn out_of_bounds() {
        assert!(footprint(-0.1, 0.0, 4, 4).is_none());
        assert!(footprint(3.01, 0.0, 4, 4).is_none());
        assert!(footprint(f64::NAN, 0.0, 4, 4).is_none());
        assert!(footprint(-1e-12, 3.0 + 1e-12, 4, 4).is_some());
    }

    #[test]
    fn weights_sum_to_one() {
        let fp = footprint(1.25, 0.5, 4, 4).unwrap();
        let s: f64 = fp.corners().iter().map(|c| c.2).sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(fp.support().count(), 4);
    }
}
