//! Locale-free decimal rendering with round-half-away-from-zero.
//!
//! Every number that ends up in a prompt goes through here so that the bytes
//! are identical on every platform.

/// Rounds `value` to `decimals` places, ties away from zero, and returns the
/// scaled integer (e.g. `round_scaled(0.65, 1) == 7`).
pub fn round_scaled(value: f64, decimals: u32) -> i64 {
    let scale = 10f64.powi(decimals as i32);
    (value * scale).round() as i64
}

/// Rounds to `decimals` places, ties away from zero.
pub fn round_to(value: f64, decimals: u32) -> f64 {
    round_scaled(value, decimals) as f64 / 10f64.powi(decimals as i32)
}

/// Renders `value` with exactly `decimals` fractional digits.
///
/// Negative values that round to zero render without a sign.
pub fn fixed(value: f64, decimals: u32) -> String {
    render_scaled(round_scaled(value, decimals), decimals)
}

pub(crate) fn render_scaled(scaled: i64, decimals: u32) -> String {
    let scale = 10u64.pow(decimals);
    let magnitude = scaled.unsigned_abs();
    let sign = if scaled < 0 { "-" } else { "" };
    let int_part = magnitude / scale;
    if decimals == 0 {
        return format!("{sign}{int_part}");
    }
    let frac_part = magnitude % scale;
    format!(
        "{sign}{int_part}.{frac_part:0width$}",
        width = decimals as usize
    )
}
