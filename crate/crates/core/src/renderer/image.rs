use crate::error::{Error, Result};

/// Interleaved, row-major intensities in `[0, 1]` with 1 or 3 channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidInput(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidInput(format!(
                "image buffer has {} values, expected {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        if let Some(bad) = data.iter().find(|x| !(x.is_finite() && (0.0..=1.0).contains(*x))) {
            return Err(Error::InvalidInput(format!(
                "intensity {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Self {
        Self::new(width, height, channels, vec![value; width * height * channels])
            .expect("constant image is well formed")
    }

    /// Single-channel image from a closure of pixel position; values are clamped to `[0, 1]`.
    pub fn gray_from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self {
            width,
            height,
            channels: 1,
            data,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [f32] {
        let i = (y * self.width + x) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub(crate) fn expect_same_shape(&self, other: &ImageBuffer, what: &str) -> Result<()> {
        if self.width == other.width && self.height == other.height && self.channels == other.channels {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "{what}: images are {}x{}x{} and {}x{}x{}",
                self.width, self.height, self.channels, other.width, other.height, other.channels
            )))
        }
    }

    pub(crate) fn expect_size(&self, width: usize, height: usize, what: &str) -> Result<()> {
        if self.width == width && self.height == height {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "{what}: image is {}x{}, expected {}x{}",
                self.width, self.height, width, height
            )))
        }
    }

    /// Per-pixel channel mean, used by the gray-level feature extractor.
    pub fn to_gray(&self) -> ImageBuffer {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|p| p.iter().sum::<f32>() / self.channels as f32)
            .collect();
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_range_and_shape() {
        assert!(ImageBuffer::new(2, 1, 1, vec![0.0, 1.0]).is_ok());
        assert!(ImageBuffer::new(2, 1, 1, vec![0.0, 1.5]).is_err());
        assert!(ImageBuffer::new(2, 1, 2, vec![0.0; 4]).is_err());
        assert!(ImageBuffer::new(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(ImageBuffer::new(1, 1, 1, vec![f32::NAN]).is_err());
    }

    #[test]
    fn gray_is_channel_mean() {
        let img = ImageBuffer::new(1, 1, 3, vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(img.to_gray().data, vec![0.5]);
    }
}
