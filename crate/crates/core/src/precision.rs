//! Working precision and decimal conversion for extended-precision values.

use std::fmt;

use rug::Float;

/// Guard bits carried on top of the requested decimal digits.
const GUARD_BITS: u32 = 16;

/// Working precision expressed in significant decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_DIGITS: u32 = 16;
    pub const DEFAULT_DIGITS: u32 = 64;

    pub fn new(digits: u32) -> Result<Self, PrecisionError> {
        if digits < Self::MIN_DIGITS {
            return Err(PrecisionError(digits));
        }
        Ok(Self(digits))
    }

    pub fn digits(self) -> u32 {
        self.0
    }

    /// Mantissa bits used for every `Float` at this precision.
    pub fn bits(self) -> u32 {
        (f64::from(self.0) * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
    }

    pub fn float<T>(self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    pub fn zero(self) -> Float {
        Float::new(self.bits())
    }

    /// Parses a decimal literal (optional sign, fraction, exponent) with correct rounding.
    pub fn parse_decimal(self, text: &str) -> Option<Float> {
        let parsed = Float::parse(text.trim()).ok()?;
        let value = Float::with_val(self.bits(), parsed);
        value.is_finite().then_some(value)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self(Self::DEFAULT_DIGITS)
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} digits", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("precision must be at least {min} significant digits, got {0}", min = Precision::MIN_DIGITS)]
pub struct PrecisionError(pub u32);

/// Formats `value` with at most `digits` significant digits.
///
/// Trailing zeros are dropped. Plain notation is used for decimal exponents in
/// `-5..=21`, scientific notation otherwise. Output depends only on the value
/// and `digits`.
pub fn to_decimal(value: &Float, digits: u32) -> String {
    if value.is_nan() {
        return "NaN".to_string();
    }
    if value.is_infinite() {
        return if value.is_sign_negative() { "-inf" } else { "inf" }.to_string();
    }
    if value.is_zero() {
        return "0".to_string();
    }
    let (negative, mantissa, exp) = value.to_sign_string_exp(10, Some(digits as usize));
    let exp = exp.unwrap_or(0);
    let mantissa = mantissa.trim_end_matches('0');
    let sign = if negative { "-" } else { "" };
    // value = 0.<mantissa> * 10^exp
    let point = exp;
    if (-5..=21).contains(&(point - 1)) {
        let len = mantissa.len() as i32;
        if point <= 0 {
            format!("{sign}0.{}{mantissa}", "0".repeat((-point) as usize))
        } else if point >= len {
            format!("{sign}{mantissa}{}", "0".repeat((point - len) as usize))
        } else {
            let (int, frac) = mantissa.split_at(point as usize);
            format!("{sign}{int}.{frac}")
        }
    } else {
        let (lead, rest) = mantissa.split_at(1);
        if rest.is_empty() {
            format!("{sign}{lead}e{}", point - 1)
        } else {
            format!("{sign}{lead}.{rest}e{}", point - 1)
        }
    }
}

/// `|got - want| / |want|`, or `|got|` when `want` is zero.
pub fn relative_error(got: &Float, want: &Float) -> Float {
    let bits = got.prec().max(want.prec());
    let diff = Float::with_val(bits, got - want);
    if want.is_zero() {
        diff.abs()
    } else {
        (diff / want).abs()
    }
}
