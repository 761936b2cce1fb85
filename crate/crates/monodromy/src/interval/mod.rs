//! Arbitrary-precision real and complex interval arithmetic with outward
//! rounding, interval vectors and matrices, and approximate floating-point
//! linear algebra at interval midpoints.
//!
//! All certification claims made elsewhere in this crate rest on the
//! conservativeness of the operations here: every arithmetic operation on
//! intervals returns an interval containing the exact set image.

mod boxes;
mod complex;
mod linalg;
mod real;

pub use boxes::{IntervalBox, IntervalMatrix};
pub use complex::ComplexInterval;
pub use linalg::{vec_add, vec_norm, vec_scale, vec_sub, CMat, CPoint, CVec};
pub use real::RealInterval;

use rug::float::Round;
use rug::ops::AssignRound;
use rug::Float;

/// Mantissa precision (in bits) of all interval endpoints and midpoints used
/// in one computation. Fixed for the duration of a run; default 256.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(256);

    pub fn new(bits: u32) -> Precision {
        assert!(bits >= 16, "precision below 16 bits is not supported");
        Precision(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// 2^(-bits/2), used as pivot threshold and step underflow floor.
    pub fn half_ulp_scale(self) -> Float {
        Float::with_val(self.0, Float::i_exp(1, -((self.0 / 2) as i32)))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

pub(crate) fn round_down<T>(prec: Precision, src: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = std::cmp::Ordering>,
{
    Float::with_val_round(prec.0, src, Round::Down).0
}

pub(crate) fn round_up<T>(prec: Precision, src: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = std::cmp::Ordering>,
{
    Float::with_val_round(prec.0, src, Round::Up).0
}

pub(crate) fn round_nearest<T>(prec: Precision, src: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = std::cmp::Ordering>,
{
    Float::with_val(prec.0, src)
}
