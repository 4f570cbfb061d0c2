use std::path::Path;

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};

/// A PFM tensor with rows stored top-to-bottom (the file stores them bottom-up).
#[derive(Debug, Clone, PartialEq)]
pub struct Pfm {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

/// Encodes as little-endian (negative scale) PFM.
pub fn encode_pfm(pfm: &Pfm) -> Result<Vec<u8>> {
    let tag = match pfm.channels {
        1 => "Pf",
        3 => "PF",
        c => return Err(Error::InvalidInput(format!("PFM holds 1 or 3 channels, got {c}"))),
    };
    let row = pfm.width * pfm.channels;
    if pfm.data.len() != row * pfm.height {
        return Err(Error::InvalidInput("PFM buffer does not match its shape".into()));
    }
    let mut out = format!("{tag}\n{} {}\n-1.0\n", pfm.width, pfm.height).into_bytes();
    out.reserve(4 * pfm.data.len());
    for r in pfm.data.chunks_exact(row.max(1)).rev() {
        for x in r {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_pfm(bytes: &[u8]) -> Result<Pfm> {
    // Four whitespace-separated header tokens, then exactly one whitespace byte.
    let mut tokens = Vec::with_capacity(4);
    let mut pos = 0;
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos || pos >= bytes.len() {
            return Err(Error::Format("PFM header truncated".into()));
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| Error::Format("PFM header is not ASCII".into()))?);
    }
    let body = &bytes[pos + 1..];
    let channels = match tokens[0] {
        "Pf" => 1,
        "PF" => 3,
        t => return Err(Error::Format(format!("bad PFM tag {t:?}"))),
    };
    let num = |t: &str| t.parse::<usize>().map_err(|_| Error::Format(format!("bad PFM size {t:?}")));
    let (width, height) = (num(tokens[1])?, num(tokens[2])?);
    let scale: f32 = tokens[3]
        .parse()
        .map_err(|_| Error::Format(format!("bad PFM scale {:?}", tokens[3])))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Format(format!("bad PFM scale {scale}")));
    }
    let n = width * height * channels;
    if body.len() != 4 * n {
        return Err(Error::Format(format!(
            "PFM body is {} bytes, expected {} for {width}x{height}x{channels}",
            body.len(),
            4 * n
        )));
    }
    let little = scale < 0.0;
    let values: Vec<f32> = body
        .chunks_exact(4)
        .map(|b| {
            let b = <[u8; 4]>::try_from(b).expect("4-byte chunk");
            if little {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        })
        .collect();
    let row = width * channels;
    let data = if row == 0 {
        values
    } else {
        values.chunks_exact(row).rev().flatten().copied().collect()
    };
    Ok(Pfm {
        width,
        height,
        channels,
        data,
    })
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<Pfm> {
    let path = path.as_ref();
    decode_pfm(&read_bytes(path)?).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        e => e,
    })
}

pub fn write_pfm(path: impl AsRef<Path>, pfm: &Pfm) -> Result<()> {
    write_bytes(path.as_ref(), &encode_pfm(pfm)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_row_order() {
        let p = Pfm { width: 2, height: 3, channels: 1, data: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0] };
        let bytes = encode_pfm(&p).unwrap();
        assert!(bytes.starts_with(b"Pf\n2 3\n-1.0\n"));
        // bottom row first on disk
        assert_eq!(&bytes[12..16], &5.0f32.to_le_bytes());
        assert_eq!(decode_pfm(&bytes).unwrap(), p);
    }

    #[test]
    fn big_endian_is_read() {
        let mut bytes = b"PF\n1 1\n1.0\n".to_vec();
        for x in [0.25f32, 0.5, 0.75] {
            bytes.extend_from_slice(&x.to_be_bytes());
        }
        let p = decode_pfm(&bytes).unwrap();
        assert_eq!((p.channels, p.data), (3, vec![0.25, 0.5, 0.75]));
    }

    #[test]
    fn rejects_malformed() {
        assert!(decode_pfm(b"P5\n1 1\n-1\n\0\0\0\0").is_err());
        assert!(decode_pfm(b"Pf\n2 1\n-1\n\0\0\0\0").is_err());
        assert!(decode_pfm(b"Pf\n1").is_err());
        assert!(decode_pfm(b"Pf\n1 1\n0\n\0\0\0\0").is_err());
    }
}
