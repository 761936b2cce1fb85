use std::collections::HashMap;

use rug::Rational;

use crate::error::{Error, Result};
use crate::interval::{round_nearest, CPoint, ComplexInterval, Precision, RealInterval};

pub type ExprId = u32;

/// A node of the expression DAG. Subexpressions are shared by
/// hash-consing, so structurally equal subtrees have equal ids.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    /// Exact complex rational constant `re + i*im`.
    ConstRat(Rational, Rational),
    /// Interval constant with exact rational endpoints, converted to an
    /// outward-rounded enclosure at evaluation precision.
    ConstInterval {
        re_lo: Rational,
        re_hi: Rational,
        im_lo: Rational,
        im_hi: Rational,
    },
    /// Solution variable `x_j`.
    Var(u32),
    /// Parameter `z_j`.
    Param(u32),
    Neg(ExprId),
    Add(ExprId, ExprId),
    Sub(ExprId, ExprId),
    Mul(ExprId, ExprId),
    Div(ExprId, ExprId),
    /// Nonnegative integer power, evaluated by binary powering.
    Pow(ExprId, u32),
}

/// Which symbol a derivative is taken with respect to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Wrt {
    Var(u32),
    Param(u32),
}

#[derive(Default, Clone, Debug)]
pub struct Dag {
    nodes: Vec<Node>,
    index: HashMap<Node, ExprId>,
    diff_memo: HashMap<(ExprId, Wrt), ExprId>,
}

impl Dag {
    pub fn new() -> Dag {
        Dag::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: ExprId) -> &Node {
        &self.nodes[id as usize]
    }

    fn intern(&mut self, node: Node) -> ExprId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len() as ExprId;
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    pub fn rational(&mut self, re: Rational, im: Rational) -> ExprId {
        self.intern(Node::ConstRat(re, im))
    }

    pub fn integer(&mut self, v: i64) -> ExprId {
        self.rational(Rational::from(v), Rational::new())
    }

    pub fn zero(&mut self) -> ExprId {
        self.integer(0)
    }

    pub fn one(&mut self) -> ExprId {
        self.integer(1)
    }

    pub fn interval_const(
        &mut self,
        re_lo: Rational,
        re_hi: Rational,
        im_lo: Rational,
        im_hi: Rational,
    ) -> ExprId {
        assert!(re_lo <= re_hi && im_lo <= im_hi);
        self.intern(Node::ConstInterval {
            re_lo,
            re_hi,
            im_lo,
            im_hi,
        })
    }

    pub fn var(&mut self, j: u32) -> ExprId {
        self.intern(Node::Var(j))
    }

    pub fn param(&mut self, j: u32) -> ExprId {
        self.intern(Node::Param(j))
    }

    fn as_rat(&self, id: ExprId) -> Option<(&Rational, &Rational)> {
        match self.node(id) {
            Node::ConstRat(re, im) => Some((re, im)),
            _ => None,
        }
    }

    pub fn is_zero(&self, id: ExprId) -> bool {
        matches!(self.as_rat(id), Some((re, im)) if re.cmp0() == std::cmp::Ordering::Equal
            && im.cmp0() == std::cmp::Ordering::Equal)
    }

    pub fn is_one(&self, id: ExprId) -> bool {
        matches!(self.as_rat(id), Some((re, im)) if *re == 1u32
            && im.cmp0() == std::cmp::Ordering::Equal)
    }

    pub fn add(&mut self, a: ExprId, b: ExprId) -> ExprId {
        if self.is_zero(a) {
            return b;
        }
        if self.is_zero(b) {
            return a;
        }
        if let (Some((ar, ai)), Some((br, bi))) = (self.as_rat(a), self.as_rat(b)) {
            let (re, im) = (Rational::from(ar + br), Rational::from(ai + bi));
            return self.rational(re, im);
        }
        self.intern(Node::Add(a, b))
    }

    pub fn sub(&mut self, a: ExprId, b: ExprId) -> ExprId {
        if self.is_zero(b) {
            return a;
        }
        if self.is_zero(a) {
            return self.neg(b);
        }
        if a == b {
            return self.zero();
        }
        if let (Some((ar, ai)), Some((br, bi))) = (self.as_rat(a), self.as_rat(b)) {
            let (re, im) = (Rational::from(ar - br), Rational::from(ai - bi));
            return self.rational(re, im);
        }
        self.intern(Node::Sub(a, b))
    }

    pub fn neg(&mut self, a: ExprId) -> ExprId {
        if let Some((re, im)) = self.as_rat(a) {
            let (re, im) = (Rational::from(-re.clone()), Rational::from(-im.clone()));
            return self.rational(re, im);
        }
        if let Node::Neg(inner) = *self.node(a) {
            return inner;
        }
        self.intern(Node::Neg(a))
    }

    pub fn mul(&mut self, a: ExprId, b: ExprId) -> ExprId {
        if self.is_zero(a) || self.is_zero(b) {
            return self.zero();
        }
        if self.is_one(a) {
            return b;
        }
        if self.is_one(b) {
            return a;
        }
        if let (Some((ar, ai)), Some((br, bi))) = (self.as_rat(a), self.as_rat(b)) {
            let re = Rational::from(ar * br) - Rational::from(ai * bi);
            let im = Rational::from(ar * bi) + Rational::from(ai * br);
            return self.rational(re, im);
        }
        self.intern(Node::Mul(a, b))
    }

    pub fn div(&mut self, a: ExprId, b: ExprId) -> ExprId {
        if self.is_one(b) {
            return a;
        }
        if self.is_zero(a) && !self.is_zero(b) {
            return self.zero();
        }
        self.intern(Node::Div(a, b))
    }

    pub fn pow(&mut self, a: ExprId, k: u32) -> ExprId {
        match k {
            0 => self.one(),
            1 => a,
            _ => self.intern(Node::Pow(a, k)),
        }
    }

    /// Exact symbolic derivative by DAG rewriting, memoized.
    pub fn diff(&mut self, id: ExprId, wrt: Wrt) -> ExprId {
        if let Some(&d) = self.diff_memo.get(&(id, wrt)) {
            return d;
        }
        let d = match self.node(id).clone() {
            Node::ConstRat(..) | Node::ConstInterval { .. } => self.zero(),
            Node::Var(j) => {
                if wrt == Wrt::Var(j) {
                    self.one()
                } else {
                    self.zero()
                }
            }
            Node::Param(j) => {
                if wrt == Wrt::Param(j) {
                    self.one()
                } else {
                    self.zero()
                }
            }
            Node::Neg(a) => {
                let da = self.diff(a, wrt);
                self.neg(da)
            }
            Node::Add(a, b) => {
                let da = self.diff(a, wrt);
                let db = self.diff(b, wrt);
                self.add(da, db)
            }
            Node::Sub(a, b) => {
                let da = self.diff(a, wrt);
                let db = self.diff(b, wrt);
                self.sub(da, db)
            }
            Node::Mul(a, b) => {
                let da = self.diff(a, wrt);
                let db = self.diff(b, wrt);
                let t1 = self.mul(da, b);
                let t2 = self.mul(a, db);
                self.add(t1, t2)
            }
            Node::Div(a, b) => {
                let da = self.diff(a, wrt);
                let db = self.diff(b, wrt);
                let t1 = self.mul(da, b);
                let t2 = self.mul(a, db);
                let num = self.sub(t1, t2);
                let den = self.pow(b, 2);
                self.div(num, den)
            }
            Node::Pow(a, k) => {
                let da = self.diff(a, wrt);
                let coeff = self.integer(k as i64);
                let p = self.pow(a, k - 1);
                let t = self.mul(coeff, p);
                self.mul(t, da)
            }
        };
        self.diff_memo.insert((id, wrt), d);
        d
    }

    /// Marks every node reachable from `roots`.
    fn mark_needed(&self, roots: &[ExprId]) -> Vec<bool> {
        let mut needed = vec![false; self.nodes.len()];
        let mut stack: Vec<ExprId> = roots.to_vec();
        while let Some(id) = stack.pop() {
            if needed[id as usize] {
                continue;
            }
            needed[id as usize] = true;
            match *self.node(id) {
                Node::Neg(a) | Node::Pow(a, _) => stack.push(a),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                _ => {}
            }
        }
        needed
    }

    /// Conservative interval evaluation of several roots at once. Nodes are
    /// stored in topological order, so a single ascending sweep suffices.
    pub fn eval_interval(
        &self,
        roots: &[ExprId],
        x: &[ComplexInterval],
        z: &[ComplexInterval],
        prec: Precision,
    ) -> Result<Vec<ComplexInterval>> {
        let needed = self.mark_needed(roots);
        let mut vals: Vec<Option<ComplexInterval>> = vec![None; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if !needed[i] {
                continue;
            }
            let get = |id: ExprId| vals[id as usize].as_ref().unwrap();
            let v = match node {
                Node::ConstRat(re, im) => ComplexInterval::from_rationals(re, im, prec),
                Node::ConstInterval {
                    re_lo,
                    re_hi,
                    im_lo,
                    im_hi,
                } => ComplexInterval::new(
                    RealInterval::from_rationals(re_lo, re_hi, prec)?,
                    RealInterval::from_rationals(im_lo, im_hi, prec)?,
                ),
                Node::Var(j) => x
                    .get(*j as usize)
                    .ok_or(Error::DimensionMismatch {
                        expected: *j as usize + 1,
                        got: x.len(),
                    })?
                    .clone(),
                Node::Param(j) => z
                    .get(*j as usize)
                    .ok_or(Error::DimensionMismatch {
                        expected: *j as usize + 1,
                        got: z.len(),
                    })?
                    .clone(),
                Node::Neg(a) => get(*a).neg(),
                Node::Add(a, b) => get(*a).add(get(*b)),
                Node::Sub(a, b) => get(*a).sub(get(*b)),
                Node::Mul(a, b) => get(*a).mul(get(*b)),
                Node::Div(a, b) => get(*a).div(get(*b))?,
                Node::Pow(a, k) => get(*a).pow(*k),
            };
            vals[i] = Some(v);
        }
        Ok(roots
            .iter()
            .map(|&r| vals[r as usize].clone().unwrap())
            .collect())
    }

    /// Approximate floating-point evaluation at interval midpoints
    /// (interval constants contribute their midpoints). Non-certified.
    pub fn eval_point(
        &self,
        roots: &[ExprId],
        x: &[CPoint],
        z: &[CPoint],
        prec: Precision,
    ) -> Result<Vec<CPoint>> {
        let needed = self.mark_needed(roots);
        let mut vals: Vec<Option<CPoint>> = vec![None; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if !needed[i] {
                continue;
            }
            let get = |id: ExprId| vals[id as usize].as_ref().unwrap();
            let v = match node {
                Node::ConstRat(re, im) => CPoint {
                    re: round_nearest(prec, re),
                    im: round_nearest(prec, im),
                },
                Node::ConstInterval {
                    re_lo,
                    re_hi,
                    im_lo,
                    im_hi,
                } => {
                    let two = Rational::from(2);
                    let re = Rational::from(re_lo + re_hi) / &two;
                    let im = Rational::from(im_lo + im_hi) / &two;
                    CPoint {
                        re: round_nearest(prec, &re),
                        im: round_nearest(prec, &im),
                    }
                }
                Node::Var(j) => x
                    .get(*j as usize)
                    .ok_or(Error::DimensionMismatch {
                        expected: *j as usize + 1,
                        got: x.len(),
                    })?
                    .clone(),
                Node::Param(j) => z
                    .get(*j as usize)
                    .ok_or(Error::DimensionMismatch {
                        expected: *j as usize + 1,
                        got: z.len(),
                    })?
                    .clone(),
                Node::Neg(a) => get(*a).neg(),
                Node::Add(a, b) => get(*a).add(get(*b)),
                Node::Sub(a, b) => get(*a).sub(get(*b)),
                Node::Mul(a, b) => get(*a).mul(get(*b)),
                Node::Div(a, b) => get(*a).div(get(*b)),
                Node::Pow(a, k) => {
                    let base = get(*a).clone();
                    let mut acc = CPoint::one(prec);
                    let mut b = base;
                    let mut e = *k;
                    while e > 0 {
                        if e & 1 == 1 {
                            acc = acc.mul(&b);
                        }
                        e >>= 1;
                        if e > 0 {
                            b = b.mul(&b);
                        }
                    }
                    acc
                }
            };
            vals[i] = Some(v);
        }
        Ok(roots
            .iter()
            .map(|&r| vals[r as usize].clone().unwrap())
            .collect())
    }

    /// Structural hash of the subgraph reachable from `roots`, with nodes
    /// renumbered in a canonical depth-first post-order. Independent of
    /// arena layout and of unreachable nodes, so two constructions of the
    /// same expressions hash equally; used for round-trip identity checks
    /// of serialized problems.
    pub fn structural_hash(&self, roots: &[ExprId]) -> u64 {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut canon: HashMap<ExprId, u32> = HashMap::new();
        let mut order: Vec<ExprId> = Vec::new();
        for &r in roots {
            self.canonical_order(r, &mut canon, &mut order);
        }
        let mut h = DefaultHasher::new();
        for &id in &order {
            let remapped = match *self.node(id) {
                Node::Neg(a) => Node::Neg(canon[&a]),
                Node::Pow(a, k) => Node::Pow(canon[&a], k),
                Node::Add(a, b) => Node::Add(canon[&a], canon[&b]),
                Node::Sub(a, b) => Node::Sub(canon[&a], canon[&b]),
                Node::Mul(a, b) => Node::Mul(canon[&a], canon[&b]),
                Node::Div(a, b) => Node::Div(canon[&a], canon[&b]),
                ref leaf => leaf.clone(),
            };
            remapped.hash(&mut h);
        }
        for r in roots {
            canon[r].hash(&mut h);
        }
        h.finish()
    }

    fn canonical_order(&self, id: ExprId, canon: &mut HashMap<ExprId, u32>, order: &mut Vec<ExprId>) {
        if canon.contains_key(&id) {
            return;
        }
        match *self.node(id) {
            Node::Neg(a) | Node::Pow(a, _) => self.canonical_order(a, canon, order),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                self.canonical_order(a, canon, order);
                self.canonical_order(b, canon, order);
            }
            _ => {}
        }
        canon.insert(id, order.len() as u32);
        order.push(id);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> Precision {
        Precision::DEFAULT
    }

    #[test]
    fn hash_consing_shares_nodes() {
        let mut d = Dag::new();
        let x = d.var(0);
        let a = d.mul(x, x);
        let b = d.mul(x, x);
        assert_eq!(a, b);
    }

    #[test]
    fn derivative_of_square() {
        // d/dx (x^2 - 2) = 2x
        let mut d = Dag::new();
        let x = d.var(0);
        let sq = d.pow(x, 2);
        let two = d.integer(2);
        let f = d.sub(sq, two);
        let df = d.diff(f, Wrt::Var(0));
        let xs = [ComplexInterval::one(prec())];
        let v = d.eval_interval(&[df], &xs, &[], prec()).unwrap();
        assert_eq!(v[0].re.lo().to_f64(), 2.0);
        assert!(v[0].is_point());
    }

    #[test]
    fn set_image_of_square_on_segment() {
        // x^2 - 2 on [1,2] has exact image [-1,2]
        let mut d = Dag::new();
        let x = d.var(0);
        let sq = d.pow(x, 2);
        let two = d.integer(2);
        let f = d.sub(sq, two);
        let xs = [ComplexInterval::new(
            RealInterval::new(
                rug::Float::with_val(prec().bits(), 1),
                rug::Float::with_val(prec().bits(), 2),
            )
            .unwrap(),
            RealInterval::zero(prec()),
        )];
        let v = d.eval_interval(&[f], &xs, &[], prec()).unwrap();
        assert!(v[0].re.lo().to_f64() <= -1.0 && v[0].re.hi().to_f64() >= 2.0);
    }

    #[test]
    fn quotient_rule() {
        // d/dx (1/x) = -1/x^2, at x=2 gives -0.25
        let mut d = Dag::new();
        let x = d.var(0);
        let one = d.one();
        let f = d.div(one, x);
        let df = d.diff(f, Wrt::Var(0));
        let two = CPoint::from_f64(2.0, 0.0, prec());
        let v = d.eval_point(&[df], &[two], &[], prec()).unwrap();
        assert!((v[0].re.to_f64() + 0.25).abs() < 1e-60);
    }
}
