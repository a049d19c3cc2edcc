use crate::error::{Error, Result};

/// Default column budget per logical weight: 4 positive + 4 negative slices.
pub const DEFAULT_SLICES: usize = 8;

/// Encodes a signed weight as `slices` unary cells: the first half holds
/// `|w|` leading ones when `w > 0`, the second half when `w < 0`.
pub fn thermometer_encode(w: i64, slices: usize) -> Result<Vec<u8>> {
    check_slices(slices)?;
    let half = slices / 2;
    if w.unsigned_abs() as usize > half {
        return Err(Error::Unrepresentable { weight: w, slices });
    }
    let mut out = vec![0u8; slices];
    let base = if w > 0 { 0 } else { half };
    for cell in out.iter_mut().skip(base).take(w.unsigned_abs() as usize) {
        *cell = 1;
    }
    Ok(out)
}

/// Inverse of [`thermometer_encode`]: positive-half ones minus negative-half ones.
pub fn thermometer_decode(cells: &[u8]) -> i64 {
    let half = cells.len() / 2;
    let pos = cells[..half].iter().filter(|&&c| c == 1).count() as i64;
    let neg = cells[half..].iter().filter(|&&c| c == 1).count() as i64;
    pos - neg
}

pub(crate) fn check_slices(slices: usize) -> Result<()> {
    if slices < 2 || slices % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "slices per weight must be even and >= 2, got {slices}"
        )));
    }
    Ok(())
}
