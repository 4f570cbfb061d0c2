use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer as RawImage, ImageFormat, Luma, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::losses::ValidMask;
use crate::renderer::ImageBuffer;

fn image_err(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        e => Error::Format(format!("{}: {e}", path.display())),
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}

/// Loads an 8- or 16-bit image as intensities in `[0, 1]`. Gray images keep
/// one channel; everything else becomes RGB and alpha is dropped.
pub fn read_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = matches!(
        img,
        DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
    );
    let sixteen = matches!(
        img,
        DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
            | DynamicImage::ImageRgb16(_)
            | DynamicImage::ImageRgba16(_)
    );
    let data: Vec<f32> = match (gray, sixteen) {
        (true, false) => img.to_luma8().into_raw().into_iter().map(|x| x as f32 / 255.0).collect(),
        (true, true) => img.to_luma16().into_raw().into_iter().map(|x| x as f32 / 65535.0).collect(),
        (false, false) => img.to_rgb8().into_raw().into_iter().map(|x| x as f32 / 255.0).collect(),
        (false, true) => img.to_rgb16().into_raw().into_iter().map(|x| x as f32 / 65535.0).collect(),
    };
    ImageBuffer::new(w, h, if gray { 1 } else { 3 }, data)
}

/// Writes a 16-bit PNG (gray or RGB to match the channel count).
pub fn write_image(path: impl AsRef<Path>, image: &ImageBuffer) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    let raw: Vec<u16> = image
        .data
        .iter()
        .map(|x| (x.clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect();
    let (w, h) = (image.width as u32, image.height as u32);
    let res = if image.channels == 1 {
        RawImage::<Luma<u16>, _>::from_raw(w, h, raw).map(|i| i.save_with_format(path, ImageFormat::Png))
    } else {
        RawImage::<Rgb<u16>, _>::from_raw(w, h, raw).map(|i| i.save_with_format(path, ImageFormat::Png))
    };
    res.expect("buffer matches image shape").map_err(|e| image_err(path, e))
}

/// 8-bit single-channel mask, 255 where set.
pub fn write_mask(path: impl AsRef<Path>, mask: &ValidMask) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    let raw = mask.values.iter().map(|m| if *m { 255u8 } else { 0 }).collect();
    GrayImage::from_raw(mask.width as u32, mask.height as u32, raw)
        .expect("mask matches its shape")
        .save_with_format(path, ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}

/// Reads a mask PNG; pixels at or above half intensity are set.
pub fn read_mask(path: impl AsRef<Path>) -> Result<ValidMask> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| image_err(path, e))?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    ValidMask::from_values(w, h, img.into_raw().into_iter().map(|x| x >= 128).collect())
}

pub fn write_rgb8(path: impl AsRef<Path>, width: usize, height: usize, rgb: Vec<u8>) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    RgbImage::from_raw(width as u32, height as u32, rgb)
        .ok_or_else(|| Error::InvalidInput("rgb buffer does not match its size".into()))?
        .save_with_format(path, ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}
