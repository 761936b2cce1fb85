use rug::{Float, Rational};

use super::linalg::CPoint;
use super::{round_up, Precision, RealInterval};
use crate::error::Result;

/// A complex interval: the axis-aligned rectangle `Re + i*Im`.
#[derive(Clone, Debug)]
pub struct ComplexInterval {
    pub re: RealInterval,
    pub im: RealInterval,
}

impl ComplexInterval {
    pub fn new(re: RealInterval, im: RealInterval) -> ComplexInterval {
        ComplexInterval { re, im }
    }

    pub fn point(p: &CPoint) -> ComplexInterval {
        ComplexInterval {
            re: RealInterval::point(p.re.clone()),
            im: RealInterval::point(p.im.clone()),
        }
    }

    pub fn zero(prec: Precision) -> ComplexInterval {
        ComplexInterval {
            re: RealInterval::zero(prec),
            im: RealInterval::zero(prec),
        }
    }

    pub fn one(prec: Precision) -> ComplexInterval {
        ComplexInterval {
            re: RealInterval::point(Float::with_val(prec.bits(), 1)),
            im: RealInterval::zero(prec),
        }
    }

    pub fn from_rationals(re: &Rational, im: &Rational, prec: Precision) -> ComplexInterval {
        ComplexInterval {
            re: RealInterval::from_rational(re, prec),
            im: RealInterval::from_rational(im, prec),
        }
    }

    /// The unit box component `[-1,1] + i[-1,1]`.
    pub fn unit_box(prec: Precision) -> ComplexInterval {
        let one = Float::with_val(prec.bits(), 1);
        ComplexInterval {
            re: RealInterval::new(-one.clone(), one.clone()).unwrap(),
            im: RealInterval::new(-one.clone(), one).unwrap(),
        }
    }

    pub fn prec(&self) -> Precision {
        Precision::new(self.re.prec().bits().max(self.im.prec().bits()))
    }

    pub fn is_point(&self) -> bool {
        self.re.is_point() && self.im.is_point()
    }

    pub fn add(&self, rhs: &ComplexInterval) -> ComplexInterval {
        ComplexInterval {
            re: self.re.add(&rhs.re),
            im: self.im.add(&rhs.im),
        }
    }

    pub fn sub(&self, rhs: &ComplexInterval) -> ComplexInterval {
        ComplexInterval {
            re: self.re.sub(&rhs.re),
            im: self.im.sub(&rhs.im),
        }
    }

    pub fn neg(&self) -> ComplexInterval {
        ComplexInterval {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    /// Rectangle product via the four real multiplications
    /// `(ac - bd) + i(ad + bc)`.
    pub fn mul(&self, rhs: &ComplexInterval) -> ComplexInterval {
        let ac = self.re.mul(&rhs.re);
        let bd = self.im.mul(&rhs.im);
        let ad = self.re.mul(&rhs.im);
        let bc = self.im.mul(&rhs.re);
        ComplexInterval {
            re: ac.sub(&bd),
            im: ad.add(&bc),
        }
    }

    /// Division by multiplication with the conjugate over `|rhs|^2`.
    /// Errors when the denominator enclosure contains zero.
    pub fn div(&self, rhs: &ComplexInterval) -> Result<ComplexInterval> {
        let den = rhs.re.sqr().add(&rhs.im.sqr());
        let num = self.mul(&rhs.conj());
        Ok(ComplexInterval {
            re: num.re.div(&den)?,
            im: num.im.div(&den)?,
        })
    }

    pub fn conj(&self) -> ComplexInterval {
        ComplexInterval {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    /// `a^k` by binary powering on intervals.
    pub fn pow(&self, k: u32) -> ComplexInterval {
        let prec = self.prec();
        if k == 0 {
            return ComplexInterval::one(prec);
        }
        let mut base = self.clone();
        let mut acc: Option<ComplexInterval> = None;
        let mut e = k;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        acc.unwrap()
    }

    /// Upper bound of `sup { |z| : z in self }` (magnitude), rounded up.
    pub fn mag(&self) -> Float {
        let prec = self.prec();
        let rm = self.re.mag();
        let im = self.im.mag();
        let s = round_up(prec, &rm * &rm);
        let t = round_up(prec, &im * &im);
        let sum = round_up(prec, &s + &t);
        round_up(prec, sum.sqrt_ref())
    }

    pub fn contains(&self, p: &CPoint) -> bool {
        self.re.contains(&p.re) && self.im.contains(&p.im)
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn intersects(&self, other: &ComplexInterval) -> bool {
        self.re.intersects(&other.re) && self.im.intersects(&other.im)
    }

    pub fn subset_of(&self, other: &ComplexInterval) -> bool {
        self.re.subset_of(&other.re) && self.im.subset_of(&other.im)
    }

    /// Minkowski sum with `r * ([-1,1] + i[-1,1])`.
    pub fn widen(&self, r: &Float) -> ComplexInterval {
        ComplexInterval {
            re: self.re.widen(r),
            im: self.im.widen(r),
        }
    }

    pub fn midpoint(&self) -> CPoint {
        CPoint {
            re: self.re.midpoint(),
            im: self.im.midpoint(),
        }
    }

    pub fn to_hex(&self) -> String {
        format!("{} + i{}", self.re.to_hex(), self.im.to_hex())
    }
}
