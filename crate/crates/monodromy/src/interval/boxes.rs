use rug::Float;

use super::linalg::{CPoint, CVec};
use super::{ComplexInterval, Precision};

/// An interval vector in C^n; carrier of all certification claims.
#[derive(Clone, Debug)]
pub struct IntervalBox {
    comps: Vec<ComplexInterval>,
}

impl IntervalBox {
    pub fn new(comps: Vec<ComplexInterval>) -> IntervalBox {
        assert!(!comps.is_empty());
        IntervalBox { comps }
    }

    pub fn from_points(pts: &[CPoint]) -> IntervalBox {
        IntervalBox::new(pts.iter().map(ComplexInterval::point).collect())
    }

    /// The unit box `B = ([-1,1] + i[-1,1])^n`.
    pub fn unit(n: usize, prec: Precision) -> IntervalBox {
        IntervalBox::new(vec![ComplexInterval::unit_box(prec); n])
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn comps(&self) -> &[ComplexInterval] {
        &self.comps
    }

    pub fn at(&self, i: usize) -> &ComplexInterval {
        &self.comps[i]
    }

    pub fn prec(&self) -> Precision {
        self.comps[0].prec()
    }

    /// The real infinity-norm `max_i max(|Re(I_i)|, |Im(I_i)|)`, with
    /// conservative upward rounding (endpoint magnitudes are exact).
    pub fn norm(&self) -> Float {
        let prec = self.prec();
        let mut m = Float::with_val(prec.bits(), 0);
        for c in &self.comps {
            let r = c.re.mag();
            let i = c.im.mag();
            if r > m {
                m = r;
            }
            if i > m {
                m = i;
            }
        }
        m
    }

    /// Minkowski sum with `r * B`: widens every component by `r` in each
    /// real direction (up to outward rounding).
    pub fn widen(&self, r: &Float) -> IntervalBox {
        IntervalBox::new(self.comps.iter().map(|c| c.widen(r)).collect())
    }

    pub fn contains_point(&self, p: &[CPoint]) -> bool {
        self.comps.len() == p.len() && self.comps.iter().zip(p).all(|(c, q)| c.contains(q))
    }

    pub fn contains_zero(&self) -> bool {
        self.comps.iter().all(|c| c.contains_zero())
    }

    pub fn subset_of(&self, other: &IntervalBox) -> bool {
        self.comps.len() == other.comps.len()
            && self.comps.iter().zip(&other.comps).all(|(a, b)| a.subset_of(b))
    }

    /// Two boxes are disjoint when some component separates them in the
    /// real or imaginary direction.
    pub fn disjoint(&self, other: &IntervalBox) -> bool {
        self.comps
            .iter()
            .zip(&other.comps)
            .any(|(a, b)| !a.intersects(b))
    }

    pub fn midpoint(&self) -> CVec {
        self.comps.iter().map(|c| c.midpoint()).collect()
    }

    pub fn add(&self, other: &IntervalBox) -> IntervalBox {
        assert_eq!(self.len(), other.len());
        IntervalBox::new(
            self.comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }
}

/// A dense n x n matrix of complex intervals.
#[derive(Clone, Debug)]
pub struct IntervalMatrix {
    n: usize,
    entries: Vec<ComplexInterval>,
}

impl IntervalMatrix {
    pub fn from_rows(rows: Vec<Vec<ComplexInterval>>) -> IntervalMatrix {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n));
        IntervalMatrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn identity(n: usize, prec: Precision) -> IntervalMatrix {
        let mut entries = vec![ComplexInterval::zero(prec); n * n];
        for i in 0..n {
            entries[i * n + i] = ComplexInterval::one(prec);
        }
        IntervalMatrix { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> &ComplexInterval {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ComplexInterval) {
        self.entries[i * self.n + j] = v;
    }

    /// Conservative enclosure of all pointwise matrix-vector products.
    pub fn mat_vec(&self, v: &IntervalBox) -> IntervalBox {
        assert_eq!(v.len(), self.n);
        let prec = v.prec();
        IntervalBox::new(
            (0..self.n)
                .map(|i| {
                    let mut acc = ComplexInterval::zero(prec);
                    for j in 0..self.n {
                        acc = acc.add(&self.at(i, j).mul(v.at(j)));
                    }
                    acc
                })
                .collect(),
        )
    }

    /// `Id - A * self` where `A` is a point matrix (zero-radius entries).
    pub fn id_minus_point_mul(&self, a: &super::CMat, prec: Precision) -> IntervalMatrix {
        assert_eq!(a.n, self.n);
        let n = self.n;
        let mut out = IntervalMatrix::identity(n, prec);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ComplexInterval::zero(prec);
                for k in 0..n {
                    acc = acc.add(&ComplexInterval::point(a.at(i, k)).mul(self.at(k, j)));
                }
                let v = out.at(i, j).sub(&acc);
                out.set(i, j, v);
            }
        }
        out
    }

    /// Midpoint matrix of the entries.
    pub fn midpoint(&self) -> super::CMat {
        let n = self.n;
        let rows: Vec<CVec> = (0..n)
            .map(|i| (0..n).map(|j| self.at(i, j).midpoint()).collect())
            .collect();
        super::CMat::from_rows(rows)
    }
}
