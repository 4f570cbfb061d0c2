//! On-disk formats: Middlebury `.flo` flow, PFM tensors, PNG images and masks,
//! and LiDAR point dumps.

mod flo;
mod lidar;
mod pfm;
mod png;

pub use flo::{decode_flo, encode_flo, read_flo, write_flo, FLO_MAGIC, FLO_UNKNOWN};
pub use lidar::{parse_lidar_ascii, parse_lidar_binary, read_lidar};
pub use pfm::{decode_pfm, encode_pfm, read_pfm, write_pfm, Pfm};
pub use png::{read_image, read_mask, write_image, write_mask, write_rgb8};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
