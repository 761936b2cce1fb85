//! Randomized property suites for the library invariants: interval
//! arithmetic is conservative and inclusion-monotone, expression evaluation
//! encloses point evaluation, symbolic derivatives match finite
//! differences, and permutation-group primitives satisfy their algebraic
//! laws.

use monodromy::expr::{Dag, ExprId, Wrt};
use monodromy::interval::{
    CPoint, ComplexInterval, IntervalBox, Precision, RealInterval,
};
use monodromy::permgroup::{galois_width_capped, PermGroup, Permutation};
use proptest::prelude::*;
use rug::Float;

const P: Precision = Precision::DEFAULT;

fn fl(v: f64) -> Float {
    Float::with_val(P.bits(), v)
}

/// A real interval given by its endpoints (unordered) and a member point
/// expressed as an interpolation fraction.
#[derive(Clone, Debug)]
struct RealCase {
    a: f64,
    b: f64,
    frac: f64,
}

impl RealCase {
    fn interval(&self) -> RealInterval {
        let (lo, hi) = if self.a <= self.b {
            (self.a, self.b)
        } else {
            (self.b, self.a)
        };
        RealInterval::new(fl(lo), fl(hi)).unwrap()
    }

    fn member(&self) -> Float {
        let i = self.interval();
        let lo = i.lo().to_f64();
        let hi = i.hi().to_f64();
        fl(lo + self.frac * (hi - lo))
    }
}

fn real_case() -> impl Strategy<Value = RealCase> {
    (-3.0f64..3.0, -3.0f64..3.0, 0.0f64..=1.0)
        .prop_map(|(a, b, frac)| RealCase { a, b, frac })
}

#[derive(Clone, Debug)]
struct ComplexCase {
    re: RealCase,
    im: RealCase,
}

impl ComplexCase {
    fn interval(&self) -> ComplexInterval {
        ComplexInterval::new(self.re.interval(), self.im.interval())
    }

    fn member(&self) -> CPoint {
        CPoint {
            re: self.re.member(),
            im: self.im.member(),
        }
    }
}

fn complex_case() -> impl Strategy<Value = ComplexCase> {
    (real_case(), real_case()).prop_map(|(re, im)| ComplexCase { re, im })
}

proptest! {
    #[test]
    fn real_ops_are_conservative(x in real_case(), y in real_case()) {
        let (ix, iy) = (x.interval(), y.interval());
        let (px, py) = (x.member(), y.member());
        prop_assert!(ix.add(&iy).contains(&Float::with_val(P.bits(), &px + &py)));
        prop_assert!(ix.sub(&iy).contains(&Float::with_val(P.bits(), &px - &py)));
        prop_assert!(ix.mul(&iy).contains(&Float::with_val(P.bits(), &px * &py)));
        prop_assert!(ix.neg().contains(&(-px.clone())));
        prop_assert!(ix.sqr().contains(&Float::with_val(P.bits(), &px * &px)));
        if !iy.contains_zero() {
            let q = Float::with_val(P.bits(), &px / &py);
            prop_assert!(ix.div(&iy).unwrap().contains(&q));
        }
    }

    #[test]
    fn complex_ops_are_conservative(x in complex_case(), y in complex_case()) {
        let (ix, iy) = (x.interval(), y.interval());
        let (px, py) = (x.member(), y.member());
        prop_assert!(ix.add(&iy).contains(&px.add(&py)));
        prop_assert!(ix.sub(&iy).contains(&px.sub(&py)));
        prop_assert!(ix.mul(&iy).contains(&px.mul(&py)));
        prop_assert!(ix.neg().contains(&px.neg()));
        prop_assert!(ix.conj().contains(&px.conj()));
        if !iy.contains_zero() {
            prop_assert!(iy.div(&iy).is_ok());
            prop_assert!(ix.div(&iy).unwrap().contains(&px.div(&py)));
        }
    }

    #[test]
    fn complex_pow_is_conservative(x in complex_case(), k in 0u32..6) {
        let ix = x.interval();
        let px = x.member();
        let mut acc = CPoint::one(P);
        for _ in 0..k {
            acc = acc.mul(&px);
        }
        prop_assert!(ix.pow(k).contains(&acc));
    }

    #[test]
    fn inclusion_monotonicity(
        x in complex_case(),
        y in complex_case(),
        wx in 0.0f64..0.5,
        wy in 0.0f64..0.5,
    ) {
        // I ⊆ I' and J ⊆ J' imply I∘J ⊆ I'∘J' for every primitive
        let (ix, iy) = (x.interval(), y.interval());
        let ix2 = ix.widen(&fl(wx));
        let iy2 = iy.widen(&fl(wy));
        prop_assert!(ix.add(&iy).subset_of(&ix2.add(&iy2)));
        prop_assert!(ix.sub(&iy).subset_of(&ix2.sub(&iy2)));
        prop_assert!(ix.mul(&iy).subset_of(&ix2.mul(&iy2)));
        prop_assert!(ix.pow(3).subset_of(&ix2.pow(3)));
        if !iy2.contains_zero() {
            prop_assert!(ix.div(&iy).unwrap().subset_of(&ix2.div(&iy2).unwrap()));
        }
    }

    #[test]
    fn magnitude_dominates_members(x in complex_case()) {
        prop_assert!(x.interval().mag() >= x.member().abs());
    }

    #[test]
    fn box_norm_dominates_members(xs in prop::collection::vec(complex_case(), 1..4)) {
        let b = IntervalBox::new(xs.iter().map(|c| c.interval()).collect());
        let norm = b.norm();
        for c in &xs {
            let p = c.member();
            prop_assert!(norm >= p.re.clone().abs());
            prop_assert!(norm >= p.im.clone().abs());
        }
    }

    #[test]
    fn widened_box_contains_nearby_points(
        xs in prop::collection::vec(complex_case(), 1..4),
        r in 0.01f64..1.0,
        shift in -1.0f64..1.0,
    ) {
        // Minkowski sum with r*B widens each real direction by r
        let pts: Vec<CPoint> = xs.iter().map(|c| c.member()).collect();
        let b = IntervalBox::from_points(&pts).widen(&fl(r));
        let shifted: Vec<CPoint> = pts
            .iter()
            .map(|p| CPoint {
                re: Float::with_val(P.bits(), &p.re + fl(shift * r)),
                im: p.im.clone(),
            })
            .collect();
        prop_assert!(b.contains_point(&shifted));
    }
}

/// A random expression tree over two variables and one parameter,
/// represented as a buildable recipe.
#[derive(Clone, Debug)]
enum Recipe {
    Var(u32),
    Param,
    Int(i64),
    Add(Box<Recipe>, Box<Recipe>),
    Sub(Box<Recipe>, Box<Recipe>),
    Mul(Box<Recipe>, Box<Recipe>),
    Neg(Box<Recipe>),
    Pow(Box<Recipe>, u32),
}

impl Recipe {
    fn build(&self, d: &mut Dag) -> ExprId {
        match self {
            Recipe::Var(j) => d.var(*j),
            Recipe::Param => d.param(0),
            Recipe::Int(v) => d.integer(*v),
            Recipe::Add(a, b) => {
                let (x, y) = (a.build(d), b.build(d));
                d.add(x, y)
            }
            Recipe::Sub(a, b) => {
                let (x, y) = (a.build(d), b.build(d));
                d.sub(x, y)
            }
            Recipe::Mul(a, b) => {
                let (x, y) = (a.build(d), b.build(d));
                d.mul(x, y)
            }
            Recipe::Neg(a) => {
                let x = a.build(d);
                d.neg(x)
            }
            Recipe::Pow(a, k) => {
                let x = a.build(d);
                d.pow(x, *k)
            }
        }
    }
}

fn recipe() -> impl Strategy<Value = Recipe> {
    let leaf = prop_oneof![
        (0u32..2).prop_map(Recipe::Var),
        Just(Recipe::Param),
        (-4i64..5).prop_map(Recipe::Int),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Recipe::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Recipe::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Recipe::Mul(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Recipe::Neg(Box::new(a))),
            (inner, 0u32..4).prop_map(|(a, k)| Recipe::Pow(Box::new(a), k)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expression_interval_eval_encloses_point_eval(
        r in recipe(),
        xs in prop::collection::vec(complex_case(), 2),
        z in complex_case(),
    ) {
        let mut d = Dag::new();
        let root = r.build(&mut d);
        let x_iv: Vec<ComplexInterval> = xs.iter().map(|c| c.interval()).collect();
        let x_pt: Vec<CPoint> = xs.iter().map(|c| c.member()).collect();
        let out_iv = d.eval_interval(&[root], &x_iv, &[z.interval()], P).unwrap();
        let out_pt = d.eval_point(&[root], &x_pt, &[z.member()], P).unwrap();
        prop_assert!(
            out_iv[0].contains(&out_pt[0]),
            "point image escaped the interval enclosure"
        );
    }

    #[test]
    fn derivative_matches_central_differences(
        r in recipe(),
        xs in prop::collection::vec(-1.0f64..1.0, 4),
        z in -1.0f64..1.0,
    ) {
        let mut d = Dag::new();
        let root = r.build(&mut d);
        let df = d.diff(root, Wrt::Var(0));
        let x0 = CPoint::from_f64(xs[0], xs[1], P);
        let x1 = CPoint::from_f64(xs[2], xs[3], P);
        let zp = CPoint::from_f64(z, 0.0, P);
        // symbolic derivative at the point
        let sym = d.eval_point(&[df], &[x0.clone(), x1.clone()], &[zp.clone()], P).unwrap();
        // central difference with a step far above the 256-bit noise floor
        // but far below the O(step^2) visibility threshold
        let h = fl(2f64.powi(-40));
        let xp = CPoint { re: Float::with_val(P.bits(), &x0.re + &h), im: x0.im.clone() };
        let xm = CPoint { re: Float::with_val(P.bits(), &x0.re - &h), im: x0.im.clone() };
        let fp = d.eval_point(&[root], &[xp, x1.clone()], &[zp.clone()], P).unwrap();
        let fm = d.eval_point(&[root], &[xm, x1], &[zp], P).unwrap();
        let two_h = Float::with_val(P.bits(), &h * 2u32);
        let fd = fp[0].sub(&fm[0]).scale(&(fl(1.0) / two_h));
        let err = sym[0].sub(&fd).abs();
        // absolute tolerance: third derivatives of these small-degree trees
        // on [-1,1]^2 stay below ~1e6, so the O(h^2) error is < 1e-12 * 1e6
        prop_assert!(err.to_f64() < 1e-12, "derivative mismatch: {}", err);
    }

    #[test]
    fn structural_hash_ignores_arena_garbage(
        r in recipe(),
        garbage in recipe(),
    ) {
        let mut d1 = Dag::new();
        let root1 = r.build(&mut d1);
        let mut d2 = Dag::new();
        // interleave unreachable construction before and after
        let _ = garbage.build(&mut d2);
        let root2 = r.build(&mut d2);
        let _ = garbage.build(&mut d2);
        prop_assert_eq!(d1.structural_hash(&[root1]), d2.structural_hash(&[root2]));
    }
}

fn perm_strategy(k: usize) -> impl Strategy<Value = Permutation> {
    Just(()).prop_perturb(move |_, mut rng| {
        let mut img: Vec<u32> = (0..k as u32).collect();
        // Fisher-Yates with proptest's rng so shrinking stays meaningful
        for i in (1..k).rev() {
            let j = (rng.next_u32() as usize) % (i + 1);
            img.swap(i, j);
        }
        Permutation::from_images(img).unwrap()
    })
}

proptest! {
    #[test]
    fn permutation_laws(
        a in perm_strategy(7),
        b in perm_strategy(7),
        c in perm_strategy(7),
    ) {
        // bijectivity: inverse composes to the identity both ways
        prop_assert!(a.then(&a.inverse()).is_identity());
        prop_assert!(a.inverse().then(&a).is_identity());
        // associativity
        let left = a.then(&b).then(&c);
        let right = a.then(&b.then(&c));
        prop_assert_eq!(left.images(), right.images());
        // parity is a homomorphism
        prop_assert_eq!(a.then(&b).is_even(), a.is_even() == b.is_even());
        // printed cycles parse back to the same permutation
        let printed = a.to_string();
        let reparsed = Permutation::parse_cycles(&printed, 7).unwrap();
        prop_assert_eq!(a.images(), reparsed.images());
    }

    #[test]
    fn group_laws(gens in prop::collection::vec(perm_strategy(6), 1..4)) {
        let g = PermGroup::new(6, gens.clone()).unwrap();
        let order = g.order();
        // Lagrange: the order divides 6!
        prop_assert_eq!(720 % order, 0);
        // orbits partition the points
        let orbits = g.orbits();
        let mut seen = vec![false; 6];
        for orbit in &orbits {
            for &p in orbit {
                prop_assert!(!seen[p], "point in two orbits");
                seen[p] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
        // every generator is a member; a point off the group is detected
        // via order stability under re-adding a generator
        let g2 = PermGroup::new(6, {
            let mut v = gens.clone();
            v.push(gens[0].clone());
            v
        })
        .unwrap();
        prop_assert_eq!(g2.order(), order);
        // blocks (when defined) are permuted setwise by every generator
        if g.is_transitive() {
            let blocks = g.minimal_blocks((0, 1)).unwrap();
            for gen in &gens {
                for block in &blocks {
                    let image: std::collections::BTreeSet<usize> =
                        block.iter().map(|&p| gen.apply(p)).collect();
                    prop_assert!(
                        blocks
                            .iter()
                            .any(|b| b.iter().copied().collect::<std::collections::BTreeSet<_>>()
                                == image),
                        "generator image of a block is not a block"
                    );
                }
            }
        }
        // width (when computable) is at most the degree and at least 1
        if let Ok(w) = galois_width_capped(&g, 100_000) {
            prop_assert!(w >= 1);
            prop_assert!(w <= order);
        }
    }
}
