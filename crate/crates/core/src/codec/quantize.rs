/// Result of quantizing one prediction residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantized {
    Code(i32),
    /// Residual outside `±bin_radius` bins; the cell is stored verbatim.
    Unpredictable,
}

/// Maps `diff` to the bin `round(diff / 2eb)`. The offset `2 * eb * code`
/// then lies within `eb` of `diff`.
#[inline]
pub fn quantize_residual(diff: f64, eb: f64, bin_radius: u32) -> Quantized {
    let m = (diff / (2.0 * eb)).round();
    if !m.is_finite() || m.abs() > bin_radius as f64 {
        Quantized::Unpredictable
    } else {
        Quantized::Code(m as i32)
    }
}

#[inline]
pub fn dequantize(code: i32, eb: f64) -> f64 {
    2.0 * eb * code as f64
}
