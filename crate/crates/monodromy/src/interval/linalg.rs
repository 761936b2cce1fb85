//! Approximate (non-certified) complex floating-point scalars, vectors and
//! matrices at working precision, rounded to nearest. Used for interval
//! midpoints: corrector matrices, quasi-Newton steps, predictor tangents.
//! Correctness of anything computed here is never assumed; it is always
//! re-checked by the Krawczyk test downstream.

use rug::Float;

use super::{round_nearest, Precision};
use crate::error::{Error, Result};

/// A complex floating-point value at working precision (zero-radius).
#[derive(Clone, Debug, PartialEq)]
pub struct CPoint {
    pub re: Float,
    pub im: Float,
}

pub type CVec = Vec<CPoint>;

impl CPoint {
    pub fn zero(prec: Precision) -> CPoint {
        CPoint {
            re: Float::with_val(prec.bits(), 0),
            im: Float::with_val(prec.bits(), 0),
        }
    }

    pub fn one(prec: Precision) -> CPoint {
        CPoint {
            re: Float::with_val(prec.bits(), 1),
            im: Float::with_val(prec.bits(), 0),
        }
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> CPoint {
        CPoint {
            re: Float::with_val(prec.bits(), re),
            im: Float::with_val(prec.bits(), im),
        }
    }

    pub fn prec(&self) -> Precision {
        Precision::new(self.re.prec().max(self.im.prec()))
    }

    pub fn add(&self, rhs: &CPoint) -> CPoint {
        let p = self.prec();
        CPoint {
            re: round_nearest(p, &self.re + &rhs.re),
            im: round_nearest(p, &self.im + &rhs.im),
        }
    }

    pub fn sub(&self, rhs: &CPoint) -> CPoint {
        let p = self.prec();
        CPoint {
            re: round_nearest(p, &self.re - &rhs.re),
            im: round_nearest(p, &self.im - &rhs.im),
        }
    }

    pub fn neg(&self) -> CPoint {
        CPoint {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn mul(&self, rhs: &CPoint) -> CPoint {
        let p = self.prec();
        let re = round_nearest(p, &self.re * &rhs.re) - round_nearest(p, &self.im * &rhs.im);
        let im = round_nearest(p, &self.re * &rhs.im) + round_nearest(p, &self.im * &rhs.re);
        CPoint {
            re: round_nearest(p, re),
            im: round_nearest(p, im),
        }
    }

    pub fn div(&self, rhs: &CPoint) -> CPoint {
        let p = self.prec();
        let den = round_nearest(p, &rhs.re * &rhs.re) + round_nearest(p, &rhs.im * &rhs.im);
        let den = round_nearest(p, den);
        let num = self.mul(&rhs.conj());
        CPoint {
            re: round_nearest(p, &num.re / &den),
            im: round_nearest(p, &num.im / &den),
        }
    }

    pub fn conj(&self) -> CPoint {
        CPoint {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn scale(&self, f: &Float) -> CPoint {
        let p = self.prec();
        CPoint {
            re: round_nearest(p, &self.re * f),
            im: round_nearest(p, &self.im * f),
        }
    }

    /// `|re| + |im|`, a cheap magnitude proxy for pivoting.
    pub fn mag1(&self) -> Float {
        let p = self.prec();
        round_nearest(p, self.re.clone().abs() + self.im.clone().abs())
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        let s = round_nearest(p, &self.re * &self.re) + round_nearest(p, &self.im * &self.im);
        round_nearest(p, s).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Complex square root (principal branch), rounded to nearest.
    pub fn sqrt(&self) -> CPoint {
        let p = self.prec();
        let r = self.abs();
        // sqrt(z) = sqrt(r) * (z + r) / |z + r| for z not on the negative axis
        let shifted = CPoint {
            re: round_nearest(p, &self.re + &r),
            im: self.im.clone(),
        };
        let n = shifted.abs();
        if n.is_zero() {
            // Negative real axis: sqrt(-x) = i sqrt(x).
            return CPoint {
                re: Float::with_val(p.bits(), 0),
                im: r.sqrt(),
            };
        }
        let scale = round_nearest(p, r.sqrt() / &n);
        shifted.scale(&scale)
    }
}

/// Dense square complex matrix of floating-point entries.
#[derive(Clone, Debug)]
pub struct CMat {
    pub n: usize,
    data: Vec<CPoint>,
}

impl CMat {
    pub fn identity(n: usize, prec: Precision) -> CMat {
        let mut data = vec![CPoint::zero(prec); n * n];
        for i in 0..n {
            data[i * n + i] = CPoint::one(prec);
        }
        CMat { n, data }
    }

    pub fn from_rows(rows: Vec<CVec>) -> CMat {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n));
        CMat {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &CPoint {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: CPoint) {
        self.data[i * self.n + j] = v;
    }

    pub fn mat_vec(&self, v: &[CPoint]) -> CVec {
        assert_eq!(v.len(), self.n);
        let prec = if self.n > 0 { self.data[0].prec() } else { Precision::DEFAULT };
        (0..self.n)
            .map(|i| {
                let mut acc = CPoint::zero(prec);
                for j in 0..self.n {
                    acc = acc.add(&self.at(i, j).mul(&v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn mat_mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let prec = if n > 0 { self.data[0].prec() } else { Precision::DEFAULT };
        let mut out = CMat::identity(n, prec);
        for i in 0..n {
            for j in 0..n {
                let mut acc = CPoint::zero(prec);
                for k in 0..n {
                    acc = acc.add(&self.at(i, k).mul(rhs.at(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Approximate inverse by Gaussian elimination with partial pivoting.
    /// Fails with `SingularMatrix` when a pivot falls below
    /// `2^(-bits/2)` relative to the largest entry of its row; the threshold
    /// only guards against propagating garbage, since any inaccuracy is
    /// caught downstream by the Krawczyk test.
    pub fn inverse(&self, prec: Precision) -> Result<CMat> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = CMat::identity(n, prec);
        let threshold = prec.half_ulp_scale();
        for col in 0..n {
            // pivot search
            let mut best = col;
            let mut best_mag = a.at(col, col).mag1();
            for row in col + 1..n {
                let m = a.at(row, col).mag1();
                if m > best_mag {
                    best = row;
                    best_mag = m;
                }
            }
            let mut row_max = Float::with_val(prec.bits(), 0);
            for j in 0..n {
                let m = a.at(best, j).mag1();
                if m > row_max {
                    row_max = m;
                }
            }
            let mut floor = row_max.clone() * &threshold;
            if floor.is_zero() {
                floor = threshold.clone();
            }
            if best_mag <= floor {
                return Err(Error::SingularMatrix { col });
            }
            if best != col {
                for j in 0..n {
                    let tmp = a.at(col, j).clone();
                    a.set(col, j, a.at(best, j).clone());
                    a.set(best, j, tmp);
                    let tmp = inv.at(col, j).clone();
                    inv.set(col, j, inv.at(best, j).clone());
                    inv.set(best, j, tmp);
                }
            }
            let pivot = a.at(col, col).clone();
            for j in 0..n {
                a.set(col, j, a.at(col, j).div(&pivot));
                inv.set(col, j, inv.at(col, j).div(&pivot));
            }
            for row in 0..n {
                if row == col || a.at(row, col).is_zero() {
                    continue;
                }
                let factor = a.at(row, col).clone();
                for j in 0..n {
                    let v = a.at(row, j).sub(&factor.mul(a.at(col, j)));
                    a.set(row, j, v);
                    let v = inv.at(row, j).sub(&factor.mul(inv.at(col, j)));
                    inv.set(row, j, v);
                }
            }
        }
        Ok(inv)
    }
}

pub fn vec_sub(a: &[CPoint], b: &[CPoint]) -> CVec {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

pub fn vec_add(a: &[CPoint], b: &[CPoint]) -> CVec {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn vec_scale(a: &[CPoint], f: &Float) -> CVec {
    a.iter().map(|x| x.scale(f)).collect()
}

/// Real infinity-norm of a point vector: `max_i max(|Re|, |Im|)`.
pub fn vec_norm(v: &[CPoint]) -> Float {
    let prec = v.first().map(|p| p.prec()).unwrap_or_default();
    let mut m = Float::with_val(prec.bits(), 0);
    for p in v {
        let r = p.re.clone().abs();
        let i = p.im.clone().abs();
        if r > m {
            m = r;
        }
        if i > m {
            m = i;
        }
    }
    m
}
