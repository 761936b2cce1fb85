use rug::float::Round;
use rug::{Float, Rational};

use super::{round_down, round_nearest, round_up, Precision};
use crate::error::{Error, Result};

/// A closed real interval `[lower, upper]` with arbitrary-precision
/// endpoints. Endpoints may be infinite; NaN endpoints or `lower > upper`
/// are rejected at construction.
#[derive(Clone, Debug)]
pub struct RealInterval {
    lo: Float,
    hi: Float,
}

impl RealInterval {
    pub fn new(lo: Float, hi: Float) -> Result<RealInterval> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidInterval);
        }
        Ok(RealInterval { lo, hi })
    }

    pub fn point(v: Float) -> RealInterval {
        assert!(!v.is_nan());
        RealInterval { lo: v.clone(), hi: v }
    }

    pub fn zero(prec: Precision) -> RealInterval {
        RealInterval::point(Float::with_val(prec.bits(), 0))
    }

    /// Exact embedding of an `f64` (always representable at >= 53 bits).
    pub fn from_f64(v: f64, prec: Precision) -> RealInterval {
        RealInterval::point(Float::with_val(prec.bits(), v))
    }

    /// Tightest interval containing the rational `q` at this precision.
    pub fn from_rational(q: &Rational, prec: Precision) -> RealInterval {
        RealInterval {
            lo: round_down(prec, q),
            hi: round_up(prec, q),
        }
    }

    /// Outward-rounded interval with rational endpoints.
    pub fn from_rationals(lo: &Rational, hi: &Rational, prec: Precision) -> Result<RealInterval> {
        RealInterval::new(round_down(prec, lo), round_up(prec, hi))
    }

    /// Parses a decimal literal into the tightest enclosing interval.
    pub fn from_decimal(s: &str, prec: Precision) -> Result<RealInterval> {
        let parsed = Float::parse(s)
            .map_err(|e| Error::Other(format!("bad decimal literal `{s}`: {e}")))?;
        let lo = Float::with_val_round(prec.bits(), parsed, Round::Down).0;
        let parsed = Float::parse(s).unwrap();
        let hi = Float::with_val_round(prec.bits(), parsed, Round::Up).0;
        RealInterval::new(lo, hi)
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> Precision {
        Precision::new(self.lo.prec().max(self.hi.prec()))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn add(&self, rhs: &RealInterval) -> RealInterval {
        let prec = self.prec_max(rhs);
        RealInterval {
            lo: round_down(prec, &self.lo + &rhs.lo),
            hi: round_up(prec, &self.hi + &rhs.hi),
        }
    }

    pub fn sub(&self, rhs: &RealInterval) -> RealInterval {
        let prec = self.prec_max(rhs);
        RealInterval {
            lo: round_down(prec, &self.lo - &rhs.hi),
            hi: round_up(prec, &self.hi - &rhs.lo),
        }
    }

    pub fn neg(&self) -> RealInterval {
        RealInterval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn mul(&self, rhs: &RealInterval) -> RealInterval {
        let prec = self.prec_max(rhs);
        // Sign classification keeps this to 2 directed products in all cases
        // except mixed*mixed, which needs 4.
        let (a, b) = (self, rhs);
        let d = |x: &Float, y: &Float| round_down(prec, x * y);
        let u = |x: &Float, y: &Float| round_up(prec, x * y);
        let (lo, hi) = match (a.sign_class(), b.sign_class()) {
            (Sign::Pos, Sign::Pos) => (d(&a.lo, &b.lo), u(&a.hi, &b.hi)),
            (Sign::Pos, Sign::Neg) => (d(&a.hi, &b.lo), u(&a.lo, &b.hi)),
            (Sign::Pos, Sign::Mix) => (d(&a.hi, &b.lo), u(&a.hi, &b.hi)),
            (Sign::Neg, Sign::Pos) => (d(&a.lo, &b.hi), u(&a.hi, &b.lo)),
            (Sign::Neg, Sign::Neg) => (d(&a.hi, &b.hi), u(&a.lo, &b.lo)),
            (Sign::Neg, Sign::Mix) => (d(&a.lo, &b.hi), u(&a.lo, &b.lo)),
            (Sign::Mix, Sign::Pos) => (d(&a.lo, &b.hi), u(&a.hi, &b.hi)),
            (Sign::Mix, Sign::Neg) => (d(&a.hi, &b.lo), u(&a.lo, &b.lo)),
            (Sign::Mix, Sign::Mix) => {
                let lo = d(&a.lo, &b.hi).min(&d(&a.hi, &b.lo));
                let hi = u(&a.lo, &b.lo).max(&u(&a.hi, &b.hi));
                (lo, hi)
            }
        };
        RealInterval { lo, hi }
    }

    /// Tight enclosure of `{x^2 : x in self}`; never dips below zero for
    /// intervals straddling the origin.
    pub fn sqr(&self) -> RealInterval {
        let prec = self.prec();
        let lo_m = self.lo.clone().abs();
        let hi_m = self.hi.clone().abs();
        let big = if lo_m >= hi_m { &lo_m } else { &hi_m };
        let hi = round_up(prec, big * big);
        let lo = if self.contains_zero() {
            Float::with_val(prec.bits(), 0)
        } else {
            let small = if lo_m <= hi_m { &lo_m } else { &hi_m };
            round_down(prec, small * small)
        };
        RealInterval { lo, hi }
    }

    pub fn div(&self, rhs: &RealInterval) -> Result<RealInterval> {
        if rhs.contains_zero() {
            return Err(Error::DivisionByZeroInterval);
        }
        let prec = self.prec_max(rhs);
        // Reciprocal endpoints: rhs has constant sign.
        let inv_lo = round_down(prec, 1u32 / rhs.hi());
        let inv_hi = round_up(prec, 1u32 / rhs.lo());
        self.mul(&RealInterval { lo: inv_lo, hi: inv_hi })
            .validated()
    }

    fn validated(self) -> Result<RealInterval> {
        if self.lo.is_nan() || self.hi.is_nan() || self.lo > self.hi {
            Err(Error::InvalidInterval)
        } else {
            Ok(self)
        }
    }

    /// Conservative upper bound of the square root over the interval.
    pub fn sqrt_upper(&self) -> Float {
        let prec = self.prec();
        round_up(prec, self.hi.sqrt_ref())
    }

    /// `max { |x| : x in self }`, exact at endpoint precision.
    pub fn mag(&self) -> Float {
        let lo_m = self.lo.clone().abs();
        let hi_m = self.hi.clone().abs();
        lo_m.max(&hi_m)
    }

    pub fn contains(&self, v: &Float) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0u32 && self.hi >= 0u32
    }

    pub fn intersects(&self, other: &RealInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn subset_of(&self, other: &RealInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Minkowski widening `[lo - r, hi + r]` with outward rounding (`r >= 0`).
    pub fn widen(&self, r: &Float) -> RealInterval {
        debug_assert!(!r.is_sign_negative());
        let prec = self.prec();
        RealInterval {
            lo: round_down(prec, &self.lo - r),
            hi: round_up(prec, &self.hi + r),
        }
    }

    pub fn midpoint(&self) -> Float {
        if self.is_point() {
            return self.lo.clone();
        }
        let prec = self.prec();
        let sum = round_nearest(prec, &self.lo + &self.hi);
        round_nearest(prec, sum / 2u32)
    }

    /// Half-width, rounded up.
    pub fn radius_upper(&self) -> Float {
        let prec = self.prec();
        let w = round_up(prec, &self.hi - &self.lo);
        round_up(prec, w / 2u32)
    }

    /// Decimal rendering with outward rounding of both endpoints.
    pub fn to_decimal(&self, digits: usize) -> String {
        format!(
            "[{}, {}]",
            self.lo.to_string_radix_round(10, Some(digits), Round::Down),
            self.hi.to_string_radix_round(10, Some(digits), Round::Up)
        )
    }

    /// Hexadecimal endpoint rendering; round-trips bit-exactly through
    /// [`RealInterval::from_hex`] at the same precision.
    pub fn to_hex(&self) -> String {
        format!(
            "[{}, {}]",
            self.lo.to_string_radix(16, None),
            self.hi.to_string_radix(16, None)
        )
    }

    pub fn from_hex(s: &str, prec: Precision) -> Result<RealInterval> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Other(format!("bad hex interval `{s}`")))?;
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| Error::Other(format!("bad hex interval `{s}`")))?;
        let parse = |t: &str| -> Result<Float> {
            let p = Float::parse_radix(t.trim(), 16)
                .map_err(|e| Error::Other(format!("bad hex float `{t}`: {e}")))?;
            Ok(Float::with_val(prec.bits(), p))
        };
        RealInterval::new(parse(a)?, parse(b)?)
    }

    fn prec_max(&self, other: &RealInterval) -> Precision {
        Precision::new(self.prec().bits().max(other.prec().bits()))
    }

    fn sign_class(&self) -> Sign {
        if self.lo >= 0u32 {
            Sign::Pos
        } else if self.hi <= 0u32 {
            Sign::Neg
        } else {
            Sign::Mix
        }
    }
}

enum Sign {
    Pos,
    Neg,
    Mix,
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: Precision = Precision::DEFAULT;

    fn ri(lo: f64, hi: f64) -> RealInterval {
        RealInterval::new(Float::with_val(P.bits(), lo), Float::with_val(P.bits(), hi)).unwrap()
    }

    #[test]
    fn rejects_inverted_endpoints() {
        assert!(matches!(
            RealInterval::new(Float::with_val(64, 2), Float::with_val(64, 1)),
            Err(Error::InvalidInterval)
        ));
    }

    #[test]
    fn mul_sign_cases() {
        let cases = [
            (ri(1.0, 2.0), ri(3.0, 4.0), (3.0, 8.0)),
            (ri(-2.0, -1.0), ri(3.0, 4.0), (-8.0, -3.0)),
            (ri(-1.0, 2.0), ri(-3.0, 4.0), (-6.0, 8.0)),
            (ri(-1.0, 2.0), ri(3.0, 4.0), (-4.0, 8.0)),
            (ri(0.0, 1.0), ri(0.0, 1.0), (0.0, 1.0)),
        ];
        for (a, b, (lo, hi)) in cases {
            let p = a.mul(&b);
            assert_eq!(p.lo().to_f64(), lo);
            assert_eq!(p.hi().to_f64(), hi);
        }
    }

    #[test]
    fn sqr_straddling_zero_is_nonnegative() {
        let s = ri(-2.0, 1.0).sqr();
        assert_eq!(s.lo().to_f64(), 0.0);
        assert_eq!(s.hi().to_f64(), 4.0);
    }

    #[test]
    fn div_by_zero_interval_errors() {
        assert!(matches!(
            ri(1.0, 1.0).div(&ri(-1.0, 1.0)),
            Err(Error::DivisionByZeroInterval)
        ));
        let q = ri(1.0, 2.0).div(&ri(2.0, 4.0)).unwrap();
        assert!(q.lo().to_f64() <= 0.25 && q.hi().to_f64() >= 1.0);
    }

    #[test]
    fn decimal_parse_is_outward() {
        // 0.1 is not dyadic: enclosure must be strict.
        let x = RealInterval::from_decimal("0.1", P).unwrap();
        assert!(x.lo() < x.hi());
        let tenth = Rational::from((1u32, 10u32));
        let down = round_down(P, &tenth);
        let up = round_up(P, &tenth);
        assert_eq!(*x.lo(), down);
        assert_eq!(*x.hi(), up);
    }

    #[test]
    fn hex_roundtrip_is_bit_exact() {
        let x = RealInterval::from_decimal("0.1", P).unwrap();
        let s = x.to_hex();
        let y = RealInterval::from_hex(&s, P).unwrap();
        assert_eq!(x.lo(), y.lo());
        assert_eq!(x.hi(), y.hi());
    }

    #[test]
    fn widen_is_conservative() {
        let x = ri(1.0, 2.0);
        let w = x.widen(&Float::with_val(P.bits(), 0.5));
        assert_eq!(w.lo().to_f64(), 0.5);
        assert_eq!(w.hi().to_f64(), 2.5);
    }
}
