//! Scalar types usable as bigram weights.
//!
//! Penalty-adjusted bigram counts are real-valued. The trainer is generic over
//! the number type that carries them so that the same merge loop can run on
//! exact rationals (the default, no rounding anywhere) or on IEEE floats.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::Num;

/// Absolute tolerance under which two float weights are considered tied.
pub const FLOAT_TIE_EPSILON: f64 = 1e-9;

/// A number type that can hold penalty-adjusted bigram counts.
pub trait Weight: Clone + Debug + PartialEq + Num + Send + Sync + 'static {
    /// Lift an integer occurrence count.
    fn from_count(count: u64) -> Self;

    /// Convert a user-facing factor such as `0.99`.
    ///
    /// Rational implementations read the shortest decimal that round-trips
    /// through `f64`, so `0.99` becomes exactly `99/100`.
    fn from_factor(factor: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Total order used for merge selection. Float implementations treat
    /// values within [`FLOAT_TIE_EPSILON`] as equal.
    fn weight_cmp(&self, other: &Self) -> Ordering;
}

macro_rules! float_weight {
    ($t:ty) => {
        impl Weight for $t {
            fn from_count(count: u64) -> Self {
                count as $t
            }

            fn from_factor(factor: f64) -> Self {
                factor as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn weight_cmp(&self, other: &Self) -> Ordering {
                if ((*self as f64) - (*other as f64)).abs() <= FLOAT_TIE_EPSILON {
                    Ordering::Equal
                } else {
                    self.total_cmp(other)
                }
            }
        }
    };
}

float_weight!(f32);
float_weight!(f64);

macro_rules! ratio_weight {
    ($int:ty) => {
        impl Weight for Ratio<$int> {
            fn from_count(count: u64) -> Self {
                Ratio::from_integer(<$int>::try_from(count).expect("count exceeds integer range"))
            }

            fn from_factor(factor: f64) -> Self {
                decimal_ratio::<$int>(factor)
            }

            fn to_f64(&self) -> f64 {
                *self.numer() as f64 / *self.denom() as f64
            }

            fn weight_cmp(&self, other: &Self) -> Ordering {
                self.cmp(other)
            }
        }
    };
}

ratio_weight!(i64);
ratio_weight!(i128);

/// Decimal places kept when a factor has no short exact rendering; keeps
/// every factor in `[0, 1]` within `i64`.
const MAX_FACTOR_DECIMALS: usize = 18;

/// Parse the shortest round-trip decimal rendering of `value` into a ratio.
fn decimal_ratio<I>(value: f64) -> Ratio<I>
where
    I: num_integer::Integer + Clone + TryFrom<i128>,
    <I as TryFrom<i128>>::Error: Debug,
{
    assert!(value.is_finite(), "factor must be finite, got {value}");
    let mut text = format!("{value}");
    if text.split_once('.').is_some_and(|(_, frac)| frac.len() > MAX_FACTOR_DECIMALS) {
        text = format!("{value:.MAX_FACTOR_DECIMALS$}");
    }
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let mut numer: i128 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        numer = numer * 10 + i128::from(b - b'0');
    }
    let denom = 10i128.pow(frac_part.len() as u32);
    if negative {
        numer = -numer;
    }
    let conv = |v: i128| I::try_from(v).expect("factor does not fit the rational type");
    Ratio::new(conv(numer), conv(denom))
}

/// `1 - x`, the retained share after a penalty factor `x`.
pub(crate) fn complement<W: Weight>(x: &W) -> W {
    W::one() - x.clone()
}
