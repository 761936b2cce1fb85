//! The Krawczyk test, the refinement loop, and the certified-point data
//! type. Everything downstream (tracking, fiber matching, group claims)
//! reduces its correctness to the test implemented here.

use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::expr::SystemInstance;
use crate::interval::{
    round_down, round_up, CMat, CVec, ComplexInterval, IntervalBox, Precision,
    RealInterval,
};

/// Parameters of the certification loops.
#[derive(Clone, Debug)]
pub struct CertifyConfig {
    /// Target contraction factor of certificates, in (0, 1/2].
    pub rho: Rational,
    /// Looser contraction factor used for predictor boxes, in (1/2, 1).
    pub tau: Rational,
    /// Radius-halving threshold factor, in (0, 1 - tau).
    pub g: Rational,
    /// Initial certification radius for fresh seeds.
    pub initial_r: Rational,
    /// Iteration cap of the refinement loop.
    pub max_iters: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            rho: Rational::from((1u32, 8u32)),
            tau: Rational::from((7u32, 8u32)),
            g: Rational::from((1u32, 64u32)),
            initial_r: Rational::from((1u32, 10u32)),
            max_iters: 200,
        }
    }
}

impl CertifyConfig {
    pub fn rho_float(&self, prec: Precision) -> Float {
        // rounding down can only make the acceptance condition stricter
        round_down(prec, &self.rho)
    }

    pub fn tau_float(&self, prec: Precision) -> Float {
        round_down(prec, &self.tau)
    }
}

/// A point with a Krawczyk certificate: the system has a unique root in
/// `x + rB` and `‖x - x*‖ <= r*rho`.
#[derive(Clone, Debug)]
pub struct CertifiedPoint {
    pub x: CVec,
    pub r: Float,
    pub a: CMat,
    pub rho: Float,
    /// Fingerprint of the system the certificate refers to.
    pub system_tag: u64,
}

impl CertifiedPoint {
    /// The certified region `x + rB`.
    pub fn enclosure(&self) -> IntervalBox {
        IntervalBox::from_points(&self.x).widen(&self.r)
    }
}

/// Product of a point matrix with an interval vector, conservatively.
fn point_mat_interval_vec(
    a: &CMat,
    v: &[ComplexInterval],
    prec: Precision,
) -> Vec<ComplexInterval> {
    let n = a.n;
    assert_eq!(v.len(), n);
    (0..n)
        .map(|i| {
            let mut acc = ComplexInterval::zero(prec);
            for (j, vj) in v.iter().enumerate() {
                acc = acc.add(&ComplexInterval::point(a.at(i, j)).mul(vj));
            }
            acc
        })
        .collect()
}

/// The Krawczyk test: computes
/// `K := -(1/r) A F(x) + (Id - A □JF(x + rB)) B` and returns `‖K‖ < rho`.
/// A `true` verdict proves a unique root of `F` in `x + rB` for every value
/// of the interval constants of `F`; `x` may itself be a box (predictor
/// image), in which case the proof holds for each point of it.
pub fn krawczyk_test(
    f: &SystemInstance,
    x: &IntervalBox,
    r: &Float,
    a: &CMat,
    rho: &Float,
    prec: Precision,
) -> Result<bool> {
    debug_assert!(r.is_sign_positive() && !r.is_zero());
    let n = f.n();
    let fx = f.eval_box(x, prec)?;
    // -(1/r) * A * F(x): 1/r as an outward-rounded interval scalar
    let inv_r = RealInterval::new(round_down(prec, 1u32 / r), round_up(prec, 1u32 / r))?;
    let inv_r = ComplexInterval::new(inv_r, RealInterval::zero(prec));
    let afx = point_mat_interval_vec(a, fx.comps(), prec);
    let term1: Vec<ComplexInterval> = afx.iter().map(|c| c.mul(&inv_r).neg()).collect();
    // (Id - A □JF(x + rB)) B
    let jac = f.jac_box(&x.widen(r), prec)?;
    let m = jac.id_minus_point_mul(a, prec);
    let term2 = m.mat_vec(&IntervalBox::unit(n, prec));
    let k = IntervalBox::new(term1).add(&term2);
    Ok(k.norm() < *rho)
}

pub(crate) fn quasi_newton_step(
    f: &SystemInstance,
    x: &CVec,
    a: &CMat,
    prec: Precision,
) -> Result<CVec> {
    let fx = f.eval_point(x, prec)?;
    let step = a.mat_vec(&fx);
    Ok(crate::interval::vec_sub(x, &step))
}

fn residual_norm(f: &SystemInstance, x: &CVec, a: &CMat, prec: Precision) -> Result<Float> {
    let fx = f.eval_point(x, prec)?;
    Ok(crate::interval::vec_norm(&a.mat_vec(&fx)))
}

/// Refinement: sharpen a tau-approximate solution into a rho-approximate
/// one, then grow the certification radius back as far as the test allows
/// (capped at 1). The first loop alternates radius halving (when the scaled
/// residual is already small) with quasi-Newton steps; the corrector matrix
/// is recomputed after every iteration.
pub fn refine(
    f: &SystemInstance,
    x: CVec,
    r: Float,
    a: CMat,
    cfg: &CertifyConfig,
    prec: Precision,
) -> Result<CertifiedPoint> {
    let rho = cfg.rho_float(prec);
    let g_rho = round_down(prec, Rational::from(&cfg.g * &cfg.rho));
    let mut x = x;
    let mut r_t = r;
    let mut a_t = a;
    let mut iters = 0usize;
    loop {
        let xb = IntervalBox::from_points(&x);
        if krawczyk_test(f, &xb, &r_t, &a_t, &rho, prec)? {
            break;
        }
        iters += 1;
        if iters > cfg.max_iters {
            return Err(Error::RefineDivergence(cfg.max_iters));
        }
        let res = residual_norm(f, &x, &a_t, prec)?;
        let threshold = Float::with_val(prec.bits(), &g_rho * &r_t);
        if res <= threshold {
            r_t = Float::with_val(prec.bits(), &r_t / 2u32);
        } else {
            x = quasi_newton_step(f, &x, &a_t, prec)?;
        }
        a_t = f.jac_point(&x, prec)?.inverse(prec)?;
    }
    // growth loop: double while 2r <= 1 and the test still passes
    loop {
        let doubled = Float::with_val(prec.bits(), &r_t * 2u32);
        if doubled > 1u32 {
            break;
        }
        let xb = IntervalBox::from_points(&x);
        if !krawczyk_test(f, &xb, &doubled, &a_t, &rho, prec)? {
            break;
        }
        r_t = doubled;
    }
    // Postcondition (the Krawczyk test passes at x with radius r_t and
    // matrix a_t) holds structurally: the contraction loop exits only
    // after a passing test, and the growth loop keeps only radii that
    // pass. A regression test re-checks it on returned certificates.
    Ok(CertifiedPoint {
        x,
        r: r_t,
        a: a_t,
        rho,
        system_tag: f.system.fingerprint(),
    })
}

/// Certifies a fresh (user-supplied or fabricated) approximate root: builds
/// the corrector matrix from the point Jacobian and refines at the initial
/// radius.
pub fn certify_seed(
    f: &SystemInstance,
    x: CVec,
    cfg: &CertifyConfig,
    prec: Precision,
) -> Result<CertifiedPoint> {
    let a = f.jac_point(&x, prec)?.inverse(prec)?;
    let r = round_down(prec, &cfg.initial_r);
    refine(f, x, r, a, cfg, prec)
}

/// One sharpening round for box matching: quasi-Newton step, fresh corrector
/// matrix, halved radius, re-certified. Unlike [`refine`] the radius only
/// shrinks, so repeated sharpening separates distinct roots.
pub fn sharpen(
    f: &SystemInstance,
    cp: &CertifiedPoint,
    cfg: &CertifyConfig,
    prec: Precision,
) -> Result<CertifiedPoint> {
    let rho = cfg.rho_float(prec);
    let target_r = Float::with_val(prec.bits(), &cp.r / 2u32);
    let mut x = cp.x.clone();
    let mut a = cp.a.clone();
    for _ in 0..cfg.max_iters {
        let xb = IntervalBox::from_points(&x);
        if krawczyk_test(f, &xb, &target_r, &a, &rho, prec)? {
            return Ok(CertifiedPoint {
                x,
                r: target_r,
                a,
                rho,
                system_tag: cp.system_tag,
            });
        }
        x = quasi_newton_step(f, &x, &a, prec)?;
        a = f.jac_point(&x, prec)?.inverse(prec)?;
    }
    Err(Error::MatchUndecidable(cfg.max_iters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Dag, ParametricSystem};
    use crate::interval::CPoint;
    use std::sync::Arc;

    const P: Precision = Precision::DEFAULT;

    /// F(x) = x^2 - c as an instance with c pinned.
    fn quadratic_instance(c: f64) -> SystemInstance {
        let mut d = Dag::new();
        let x = d.var(0);
        let z = d.param(0);
        let sq = d.pow(x, 2);
        let f = d.sub(sq, z);
        let sys = Arc::new(
            ParametricSystem::new("x^2-c", d, vec![f], vec!["x".into()], vec!["c".into()])
                .unwrap(),
        );
        SystemInstance::at_point_params(sys, &[CPoint::from_f64(c, 0.0, P)]).unwrap()
    }

    fn one_by_one(v: f64) -> CMat {
        CMat::from_rows(vec![vec![CPoint::from_f64(v, 0.0, P)]])
    }

    #[test]
    fn linear_system_analytic_criterion() {
        // F(x) = x - c with A = 1: JF = 1, so K = -(x-c)/r and the test
        // passes iff |x - c| < rho * r.
        let mut d = Dag::new();
        let x = d.var(0);
        let c = d.param(0);
        let f = d.sub(x, c);
        let sys = Arc::new(
            ParametricSystem::new("x-c", d, vec![f], vec!["x".into()], vec!["c".into()]).unwrap(),
        );
        let inst =
            SystemInstance::at_point_params(sys, &[CPoint::from_f64(3.0, 0.0, P)]).unwrap();
        let rho = Float::with_val(P.bits(), 0.125);
        let r = Float::with_val(P.bits(), 0.1);
        let near = IntervalBox::from_points(&[CPoint::from_f64(3.01, 0.0, P)]);
        let far = IntervalBox::from_points(&[CPoint::from_f64(3.02, 0.0, P)]);
        // |x-c| = 0.01 < 0.0125 = rho*r; |x-c| = 0.02 >= 0.0125
        assert!(krawczyk_test(&inst, &near, &r, &one_by_one(1.0), &rho, P).unwrap());
        assert!(!krawczyk_test(&inst, &far, &r, &one_by_one(1.0), &rho, P).unwrap());
    }

    #[test]
    fn sqrt2_test_verdicts() {
        let inst = quadratic_instance(2.0);
        let rho = Float::with_val(P.bits(), 0.125);
        let r = Float::with_val(P.bits(), 0.01);
        let good = 1.41421356f64;
        let a = one_by_one(1.0 / (2.0 * good));
        let xb = IntervalBox::from_points(&[CPoint::from_f64(good, 0.0, P)]);
        assert!(krawczyk_test(&inst, &xb, &r, &a, &rho, P).unwrap());
        let bad = IntervalBox::from_points(&[CPoint::from_f64(1.0, 0.0, P)]);
        let a_bad = one_by_one(0.5);
        assert!(!krawczyk_test(&inst, &bad, &r, &a_bad, &rho, P).unwrap());
    }

    #[test]
    fn refine_converges_to_sqrt2() {
        let inst = quadratic_instance(2.0);
        let cfg = CertifyConfig::default();
        let cp = certify_seed(&inst, vec![CPoint::from_f64(1.4, 0.0, P)], &cfg, P).unwrap();
        // independent oracle: sqrt(2) at full precision
        let root = Float::with_val(P.bits(), 2).sqrt();
        let err = Float::with_val(P.bits(), &cp.x[0].re - &root).abs();
        let bound = Float::with_val(P.bits(), &cp.r * &cp.rho);
        assert!(err <= bound, "error {err} exceeds rho*r {bound}");
        assert!(cp.enclosure().contains_point(&[CPoint {
            re: root,
            im: Float::with_val(P.bits(), 0),
        }]));
    }

    #[test]
    fn refine_far_start_still_sound() {
        // From x=10 the Newton iterates do enter the basin of sqrt(2); the
        // contract is only that the returned certificate is valid.
        let inst = quadratic_instance(2.0);
        let cfg = CertifyConfig::default();
        let cp = certify_seed(&inst, vec![CPoint::from_f64(10.0, 0.0, P)], &cfg, P).unwrap();
        let rho = cp.rho.clone();
        assert!(krawczyk_test(
            &inst,
            &IntervalBox::from_points(&cp.x),
            &cp.r,
            &cp.a,
            &rho,
            P
        )
        .unwrap());
    }

    #[test]
    fn newton_cycle_diverges() {
        // x^3 - 2x + 2 has the classical Newton 2-cycle 0 <-> 1.
        let mut d = Dag::new();
        let x = d.var(0);
        let cube = d.pow(x, 3);
        let two_x = {
            let two = d.integer(2);
            d.mul(two, x)
        };
        let diff = d.sub(cube, two_x);
        let two = d.integer(2);
        let f = d.add(diff, two);
        let sys = Arc::new(
            ParametricSystem::new("cycle", d, vec![f], vec!["x".into()], vec![]).unwrap(),
        );
        let inst = SystemInstance::new(sys, vec![]).unwrap();
        let cfg = CertifyConfig::default();
        let r = certify_seed(&inst, vec![CPoint::zero(P)], &cfg, P);
        assert!(matches!(r, Err(Error::RefineDivergence(200))));
    }

    #[test]
    fn quasi_newton_contracts_by_rho() {
        let inst = quadratic_instance(2.0);
        let cfg = CertifyConfig::default();
        let cp = certify_seed(&inst, vec![CPoint::from_f64(1.4, 0.0, P)], &cfg, P).unwrap();
        let root = Float::with_val(P.bits(), 2).sqrt();
        let before = Float::with_val(P.bits(), &cp.x[0].re - &root).abs();
        let stepped = quasi_newton_step(&inst, &cp.x, &cp.a, P).unwrap();
        let after = Float::with_val(P.bits(), &stepped[0].re - &root).abs();
        let allowed = Float::with_val(P.bits(), &before * &cp.rho);
        // allow a whisker of floating-point slack on top of the rho bound
        let slack = Float::with_val(P.bits(), Float::i_exp(1, -200));
        assert!(after <= allowed + slack, "{after} > rho * {before}");
    }

    #[test]
    fn sharpen_halves_radius() {
        let inst = quadratic_instance(2.0);
        let cfg = CertifyConfig::default();
        let cp = certify_seed(&inst, vec![CPoint::from_f64(1.4, 0.0, P)], &cfg, P).unwrap();
        let sharp = sharpen(&inst, &cp, &cfg, P).unwrap();
        let half = Float::with_val(P.bits(), &cp.r / 2u32);
        assert_eq!(sharp.r, half);
        assert!(sharp.enclosure().subset_of(&cp.enclosure()));
    }

    #[test]
    fn disjoint_certificates_for_both_square_roots() {
        let inst = quadratic_instance(2.0);
        let cfg = CertifyConfig::default();
        let plus = certify_seed(&inst, vec![CPoint::from_f64(1.4, 0.0, P)], &cfg, P).unwrap();
        let minus = certify_seed(&inst, vec![CPoint::from_f64(-1.4, 0.0, P)], &cfg, P).unwrap();
        // radii may have grown to ~1, so the boxes can overlap; sharpen both
        // until disjoint (this is exactly what fiber matching does)
        let mut a = plus;
        let mut b = minus;
        for _ in 0..10 {
            if a.enclosure().disjoint(&b.enclosure()) {
                break;
            }
            a = sharpen(&inst, &a, &cfg, P).unwrap();
            b = sharpen(&inst, &b, &cfg, P).unwrap();
        }
        assert!(a.enclosure().disjoint(&b.enclosure()));
    }

    #[test]
    fn interval_constant_certificate_covers_whole_interval() {
        // F(x) = x^2 - c with c = [1.999, 2.001]: a true verdict certifies
        // a root for every c in the interval; check via endpoints.
        let mut d = Dag::new();
        let x = d.var(0);
        let c = d.interval_const(
            Rational::from((1999u32, 1000u32)),
            Rational::from((2001u32, 1000u32)),
            Rational::new(),
            Rational::new(),
        );
        let sq = d.pow(x, 2);
        let f = d.sub(sq, c);
        let sys = Arc::new(
            ParametricSystem::new("iv", d, vec![f], vec!["x".into()], vec![]).unwrap(),
        );
        let inst = SystemInstance::new(sys, vec![]).unwrap();
        let rho = Float::with_val(P.bits(), 0.125);
        let r = Float::with_val(P.bits(), 0.05);
        let x0 = CPoint::from_f64(1.4142, 0.0, P);
        let a = one_by_one(1.0 / (2.0 * 1.4142));
        let xb = IntervalBox::from_points(&[x0.clone()]);
        assert!(krawczyk_test(&inst, &xb, &r, &a, &rho, P).unwrap());
        // sqrt(1.999) and sqrt(2.001) both lie in x + rB
        let enc = xb.widen(&r);
        for c in [1.999f64, 2.001] {
            let root = CPoint::from_f64(c.sqrt(), 0.0, P);
            assert!(enc.contains_point(&[root]));
        }
    }
}
