use crate::error::{Error, Result};

/// Guards `floor` against products like `0.29 * 100 = 28.999999999999996`.
const FLOOR_SLACK: f64 = 1e-9;

/// `floor(train_frac * n)`.
pub fn split_count(n: usize, train_frac: f64) -> Result<usize> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction must lie in (0, 1), got {train_frac}"
        )));
    }
    Ok(((train_frac * n as f64 + FLOOR_SLACK).floor() as usize).min(n))
}

/// The first `floor(train_frac * N)` frames train, the rest test; order is kept.
pub fn split_sequence<T: Clone>(frames: &[T], train_frac: f64) -> Result<(Vec<T>, Vec<T>)> {
    let k = split_count(frames.len(), train_frac)?;
    if frames.is_empty() {
        return Err(Error::EmptyInput("sequence has no frames".into()));
    }
    let (train, test) = frames.split_at(k);
    Ok((train.to_vec(), test.to_vec()))
}
