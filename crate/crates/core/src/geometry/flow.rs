use crate::error::{Error, Result};

/// Dense per-pixel displacement in pixels with a validity mask, row-major.
///
/// `(u, v)` at pixel `x` points from `x` to its correspondence in the other
/// image. Invalid pixels carry zero vectors, which losses and metrics never read.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub u: Vec<f32>,
    pub v: Vec<f32>,
    pub valid: Vec<bool>,
}

impl FlowField {
    /// All-invalid field with zero vectors.
    pub fn invalid(width: usize, height: usize) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            u: vec![0.0; n],
            v: vec![0.0; n],
            valid: vec![false; n],
        }
    }

    pub fn constant(width: usize, height: usize, u: f32, v: f32) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            u: vec![u; n],
            v: vec![v; n],
            valid: vec![true; n],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::constant(width, height, 0.0, 0.0)
    }

    /// Builds a fully valid field from a closure of pixel position.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> (f32, f32)) -> Self {
        let mut flow = Self::invalid(width, height);
        for y in 0..height {
            for x in 0..width {
                let (u, v) = f(x, y);
                flow.set(x, y, u, v);
            }
        }
        flow
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<(f32, f32)> {
        let i = self.index(x, y);
        self.valid[i].then(|| (self.u[i], self.v[i]))
    }

    /// Stores a valid vector at `(x, y)`.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, u: f32, v: f32) {
        let i = self.index(x, y);
        self.u[i] = u;
        self.v[i] = v;
        self.valid[i] = true;
    }

    /// Marks `(x, y)` invalid and zeroes its vector.
    pub fn invalidate(&mut self, x: usize, y: usize) {
        let i = self.index(x, y);
        self.u[i] = 0.0;
        self.v[i] = 0.0;
        self.valid[i] = false;
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn same_size(&self, width: usize, height: usize) -> bool {
        self.width == width && self.height == height
    }

    pub(crate) fn expect_size(&self, width: usize, height: usize, what: &str) -> Result<()> {
        if self.same_size(width, height) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "{what}: flow is {}x{}, expected {}x{}",
                self.width, self.height, width, height
            )))
        }
    }

    /// Checks the finite-where-valid invariant and buffer lengths.
    pub fn check(&self) -> Result<()> {
        let n = self.len();
        if self.u.len() != n || self.v.len() != n || self.valid.len() != n {
            return Err(Error::InvalidInput("flow buffers do not match its size".into()));
        }
        let bad = (0..n).find(|&i| self.valid[i] && !(self.u[i].is_finite() && self.v[i].is_finite()));
        match bad {
            Some(i) => Err(Error::InvalidInput(format!(
                "non-finite flow at valid pixel ({}, {})",
                i % self.width,
                i / self.width
            ))),
            None => Ok(()),
        }
    }
}
