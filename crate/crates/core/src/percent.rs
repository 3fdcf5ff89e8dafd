/// Rounds a non-negative percentage to the nearest integer, halves going up.
pub fn round_half_up(value: f64) -> u32 {
    if !value.is_finite() || value <= 0.0 {
        return 0;
    }
    (value + 0.5).floor() as u32
}

/// `round_half_up(100 * num / den)` computed in integers, so `11/230` can never
/// drift across a rounding boundary. Returns 0 when `den == 0`.
pub(crate) fn ratio_percent(num: u64, den: u64) -> u32 {
    if den == 0 {
        return 0;
    }
    ((200 * num + den) / (2 * den)) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_goes_up() {
        assert_eq!(round_half_up(4.5), 5);
        assert_eq!(round_half_up(4.49), 4);
        assert_eq!(round_half_up(76.923), 77);
        assert_eq!(round_half_up(0.0), 0);
    }

    #[test]
    fn integer_ratios() {
        assert_eq!(ratio_percent(11, 230), 5);
        assert_eq!(ratio_percent(4, 169), 2);
        assert_eq!(ratio_percent(20, 299), 7);
        assert_eq!(ratio_percent(1, 8), 13); // 12.5
        assert_eq!(ratio_percent(0, 0), 0);
        assert_eq!(ratio_percent(20, 26), 77);
    }
}
