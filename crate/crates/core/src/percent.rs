//! One-decimal percentages of integer ratios, rounded half-up without going
//! through floating point.

use std::fmt;

/// A percentage held as an integer count of tenths (`922` is `92.2%`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Tenths(pub u64);

impl Tenths {
    /// `100 * num / den` rounded half-up to one decimal. `den == 0` gives zero.
    pub fn of_ratio(num: u64, den: u64) -> Self {
        if den == 0 {
            return Tenths(0);
        }
        let v = (2000u128 * num as u128 + den as u128) / (2 * den as u128);
        Tenths(v as u64)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 10.0
    }
}

impl fmt::Display for Tenths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

/// Half-up one-decimal rounding of a percentage given as a float, for values
/// that do not come from an integer ratio.
pub fn round_half_up_1dp(pct: f64) -> f64 {
    (pct * 10.0 + 0.5).floor() / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        assert_eq!(Tenths::of_ratio(2206, 2393).to_string(), "92.2");
        assert_eq!(Tenths::of_ratio(27, 470).to_string(), "5.7");
        assert_eq!(Tenths::of_ratio(23, 597).to_string(), "3.9");
        assert_eq!(Tenths::of_ratio(1, 60).to_string(), "1.7");
        assert_eq!(Tenths::of_ratio(394, 606).to_string(), "65.0");
    }

    #[test]
    fn half_up_at_exact_midpoint() {
        // 1/8 = 12.5% -> 12.5; 1/16 = 6.25% -> 6.3
        assert_eq!(Tenths::of_ratio(1, 8).to_string(), "12.5");
        assert_eq!(Tenths::of_ratio(1, 16).to_string(), "6.3");
        assert_eq!(Tenths::of_ratio(1, 1).to_string(), "100.0");
        assert_eq!(Tenths::of_ratio(0, 0), Tenths(0));
    }

    #[test]
    fn float_rounding() {
        assert_eq!(round_half_up_1dp(12.25), 12.3);
        assert_eq!(round_half_up_1dp(3.85), 3.9);
    }
}
