use std::path::Path;

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};
use crate::geometry::FlowField;

/// Header tag of Middlebury flow files (the bytes `PIEH`).
pub const FLO_MAGIC: f32 = 202021.25;
/// Stored in both components of pixels without a valid vector.
pub const FLO_UNKNOWN: f32 = 1e9;

/// Little-endian `.flo` bytes: magic, i32 width, i32 height, then row-major
/// interleaved `(u, v)` f32 pairs.
pub fn encode_flo(flow: &FlowField) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * flow.len());
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height as i32).to_le_bytes());
    for i in 0..flow.len() {
        let (u, v) = if flow.valid[i] {
            (flow.u[i], flow.v[i])
        } else {
            (FLO_UNKNOWN, FLO_UNKNOWN)
        };
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses `.flo` bytes. Pixels where either component is non-finite or has
/// magnitude of at least `FLO_UNKNOWN` come back invalid with zero vectors.
pub fn decode_flo(bytes: &[u8]) -> Result<FlowField> {
    if bytes.len() < 12 {
        return Err(Error::Format(format!("flo file truncated: {} bytes", bytes.len())));
    }
    let word = |i: usize| <[u8; 4]>::try_from(&bytes[i..i + 4]).expect("4-byte slice");
    let magic = f32::from_le_bytes(word(0));
    if magic != FLO_MAGIC {
        return Err(Error::Format(format!("bad flo magic {magic}")));
    }
    let (w, h) = (i32::from_le_bytes(word(4)), i32::from_le_bytes(word(8)));
    if w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16 {
        return Err(Error::Format(format!("implausible flo size {w}x{h}")));
    }
    let (w, h) = (w as usize, h as usize);
    let expected = 12 + 8 * w * h;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "flo file is {} bytes, expected {expected} for {w}x{h}",
            bytes.len()
        )));
    }
    let mut flow = FlowField::invalid(w, h);
    for i in 0..w * h {
        let u = f32::from_le_bytes(word(12 + 8 * i));
        let v = f32::from_le_bytes(word(16 + 8 * i));
        let known = |x: f32| x.is_finite() && x.abs() < FLO_UNKNOWN;
        if known(u) && known(v) {
            flow.u[i] = u;
            flow.v[i] = v;
            flow.valid[i] = true;
        }
    }
    Ok(flow)
}

pub fn write_flo(path: impl AsRef<Path>, flow: &FlowField) -> Result<()> {
    write_bytes(path.as_ref(), &encode_flo(flow))
}

pub fn read_flo(path: impl AsRef<Path>) -> Result<FlowField> {
    let path = path.as_ref();
    decode_flo(&read_bytes(path)?).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        e => e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_bytes_for_two_by_two() {
        let mut f = FlowField::from_fn(2, 2, |x, y| (x as f32 + 0.5, -(y as f32)));
        f.invalidate(1, 1);
        let bytes = encode_flo(&f);
        assert_eq!(bytes.len(), 12 + 32);
        let mut want = vec![];
        want.extend_from_slice(b"PIEH");
        want.extend_from_slice(&[2, 0, 0, 0, 2, 0, 0, 0]);
        for x in [0.5f32, -0.0, 1.5, -0.0, 0.5, -1.0, 1e9, 1e9] {
            want.extend_from_slice(&x.to_le_bytes());
        }
        assert_eq!(bytes, want);
        assert_eq!(decode_flo(&bytes).unwrap(), f);
    }

    #[test]
    fn rejects_bad_files() {
        let bytes = encode_flo(&FlowField::zeros(3, 2));
        assert!(matches!(decode_flo(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
        assert!(matches!(decode_flo(&bytes[..8]), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[0] = 0;
        assert!(matches!(decode_flo(&bad), Err(Error::Format(_))));
        let mut neg = bytes;
        neg[4..8].copy_from_slice(&(-3i32).to_le_bytes());
        assert!(matches!(decode_flo(&neg), Err(Error::Format(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(read_flo("/nonexistent/x.flo"), Err(Error::Io { .. })));
    }
}
