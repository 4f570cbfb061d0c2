use std::path::Path;

use nalgebra::Vector3;

use super::read_bytes;
use crate::benchmark::LidarFrame;
use crate::error::{Error, Result};

/// Packed little-endian f32 `(x, y, z, intensity)` records.
pub fn parse_lidar_binary(bytes: &[u8]) -> Result<LidarFrame> {
    if !bytes.len().is_multiple_of(16) {
        return Err(Error::Format(format!(
            "LiDAR record stream of {} bytes is not a multiple of 16",
            bytes.len()
        )));
    }
    let f = |b: &[u8]| f32::from_le_bytes(b.try_into().expect("4-byte slice")) as f64;
    let mut points = Vec::with_capacity(bytes.len() / 16);
    let mut intensity = Vec::with_capacity(bytes.len() / 16);
    for rec in bytes.chunks_exact(16) {
        points.push(Vector3::new(f(&rec[0..4]), f(&rec[4..8]), f(&rec[8..12])));
        intensity.push(f(&rec[12..16]) as f32);
    }
    LidarFrame::new(points, Some(intensity))
}

/// One `x y z [intensity]` point per line; blank lines and `#` comments are skipped.
pub fn parse_lidar_ascii(text: &str) -> Result<LidarFrame> {
    let mut points = Vec::new();
    let mut intensity = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Format(format!("line {}: expected numbers, got {line:?}", n + 1)))?;
        match vals.len() {
            3 | 4 => {
                points.push(Vector3::new(vals[0], vals[1], vals[2]));
                intensity.push(vals.get(3).copied().unwrap_or(0.0) as f32);
            }
            k => return Err(Error::Format(format!("line {}: expected 3 or 4 values, got {k}", n + 1))),
        }
    }
    LidarFrame::new(points, Some(intensity))
}

/// `.bin` files are binary records; anything else is read as ASCII.
pub fn read_lidar(path: impl AsRef<Path>) -> Result<LidarFrame> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin")) {
        parse_lidar_binary(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::Format("LiDAR text is not UTF-8".into()))?;
        parse_lidar_ascii(text)
    };
    parsed.map_err(|e| match e {
        Error::Format(m) | Error::InvalidInput(m) | Error::EmptyInput(m) => {
            Error::Format(format!("{}: {m}", path.display()))
        }
        e => e,
    })
}
