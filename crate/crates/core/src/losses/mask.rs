use crate::error::{Error, Result};

/// Per-pixel boolean mask, row-major; `true` marks pixels eligible for supervision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidMask {
    pub width: usize,
    pub height: usize,
    pub values: Vec<bool>,
}

impl ValidMask {
    pub fn from_values(width: usize, height: usize, values: Vec<bool>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "mask has {} values, expected {}x{}",
                values.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.values[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|v| **v).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Pixelwise AND; sizes must agree.
    pub fn and(&self, other: &ValidMask) -> Result<ValidMask> {
        self.expect_size(other.width, other.height, "mask intersection")?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| *a && *b).collect();
        Ok(ValidMask {
            width: self.width,
            height: self.height,
            values,
        })
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &ValidMask) -> bool {
        self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| !*a || *b)
    }

    pub(crate) fn expect_size(&self, width: usize, height: usize, what: &str) -> Result<()> {
        if self.width == width && self.height == height {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "{what}: mask is {}x{}, expected {}x{}",
                self.width, self.height, width, height
            )))
        }
    }
}
