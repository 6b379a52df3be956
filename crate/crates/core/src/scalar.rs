//! Scalar abstraction for dissimilarity values.
//!
//! Edit-distance costs are exact integers; everything derived from them
//! (similarity scores, matrices, clustering objectives, validity indices) is
//! carried in a floating point type chosen by the caller.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type used for similarity scores: `f32` or `f64`.
///
/// `Display` must print the shortest representation that parses back to the
/// same value; the matrix file format relies on it for bit-exact round trips.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Display
    + Debug
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Exact ratio of two cost counts, rounded once.
    fn ratio(numerator: usize, denominator: usize) -> Self;

    fn from_f64_lossy(value: f64) -> Self;
}

impl Scalar for f32 {
    fn ratio(numerator: usize, denominator: usize) -> Self {
        (numerator as f64 / denominator as f64) as f32
    }

    fn from_f64_lossy(value: f64) -> Self {
        value as f32
    }
}

impl Scalar for f64 {
    fn ratio(numerator: usize, denominator: usize) -> Self {
        numerator as f64 / denominator as f64
    }

    fn from_f64_lossy(value: f64) -> Self {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_counts_give_exactly_one() {
        for n in 1..500 {
            assert_eq!(f64::ratio(n, n), 1.0);
            assert_eq!(f32::ratio(n, n), 1.0);
        }
        assert_eq!(f64::ratio(0, 7), 0.0);
    }

    #[test]
    fn display_round_trips() {
        for v in [0.1f64, 1.0 / 3.0, 0.0, 1.0, 2.0f64.sqrt() / 2.0] {
            let back: f64 = v.to_string().parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
        let v = 1.0f32 / 3.0;
        let back: f32 = v.to_string().parse().unwrap();
        assert_eq!(back.to_bits(), v.to_bits());
    }
}
