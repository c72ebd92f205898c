//! Working precision for the high-precision real evaluations.

use rug::{Float, Rational};

/// Decimal digits carried through logarithms, roots and bound evaluations.
///
/// Every exact quantity (probabilities, errors, thresholds) stays a
/// [`Rational`]; only transcendental values pass through a [`Float`] of
/// [`Precision::bits`] bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub const DEFAULT_DIGITS: u32 = 50;

    /// Clamped to at least 20 digits.
    pub fn digits(digits: u32) -> Self {
        Precision { digits: digits.max(20) }
    }

    pub fn decimal_digits(&self) -> u32 {
        self.digits
    }

    /// Mantissa bits: ⌈digits · log₂10⌉ plus 32 guard bits.
    pub fn bits(&self) -> u32 {
        (f64::from(self.digits) * std::f64::consts::LOG2_10).ceil() as u32 + 32
    }

    pub fn float<T>(&self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::digits(Self::DEFAULT_DIGITS)
    }
}

/// Scientific-notation decimal with `sig` significant digits.
pub fn format_sig(x: &Float, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(sig))
}

pub fn format_rational_sig(x: &Rational, sig: usize) -> String {
    let bits = ((sig as f64) * std::f64::consts::LOG2_10).ceil() as u32 + 64;
    format_sig(&Float::with_val(bits, x), sig)
}

/// `x^e`, exact.
pub(crate) fn rational_pow(x: &rug::Rational, e: u32) -> rug::Rational {
    use rug::ops::Pow;
    rug::Rational::from(x.pow(e))
}

/// `t^e`, exact.
pub(crate) fn integer_pow(t: u64, e: u32) -> rug::Integer {
    use rug::ops::Pow;
    rug::Integer::from(t).pow(e)
}
