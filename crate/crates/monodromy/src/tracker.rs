//! Certified predictor-corrector path tracking: continuation of one
//! certified solution of a parameter homotopy from t=0 to t=1, with a cubic
//! Hermite predictor and adaptive step size. Every accepted step is backed
//! by a Krawczyk certificate over the whole time subinterval, so the union
//! of the step boxes encloses a single analytic solution path.

use rug::{Float, Rational};

use crate::certify::{krawczyk_test, refine, sharpen, CertifiedPoint, CertifyConfig};
use crate::error::{Error, Result};
use crate::expr::{Homotopy, PathSpec};
use crate::interval::{
    round_down, CPoint, CVec, ComplexInterval, IntervalBox, Precision, RealInterval,
};

#[derive(Clone, Debug)]
pub struct TrackerConfig {
    pub certify: CertifyConfig,
    /// Initial time step.
    pub h0: Rational,
    /// Step growth factor after a successful step (> 1).
    pub delta_inc: Rational,
    /// Step shrink factor after a failed predictor certificate (in (0,1)).
    pub delta_dec: Rational,
    /// Cap on accepted steps per tracked segment.
    pub max_steps: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            certify: CertifyConfig::default(),
            h0: Rational::from((1u32, 10u32)),
            delta_inc: Rational::from((5u32, 4u32)),
            delta_dec: Rational::from((1u32, 2u32)),
            max_steps: 1_000_000,
        }
    }
}

/// Current and previous point/tangent data driving the predictor.
#[derive(Clone, Debug)]
pub struct PredictorState {
    pub x: CVec,
    pub v: CVec,
    /// `(x_prev, v_prev, h_prev)` once a step has been accepted; the first
    /// step uses the linear (tangent) predictor.
    pub prev: Option<(CVec, CVec, Float)>,
}

impl PredictorState {
    /// Point coefficients `(c0, c1, c2, c3)` of the predictor polynomial
    /// `X(eta) = c0 + c1*eta + c2*eta^2 + c3*eta^3`. In Hermite mode this is
    /// the unique cubic with `X(0)=x`, `X'(0)=v`, `X(-h_prev)=x_prev`,
    /// `X'(-h_prev)=v_prev`; in linear mode the quadratic/cubic terms vanish.
    fn coefficients(&self, prec: Precision) -> Vec<[CPoint; 4]> {
        let n = self.x.len();
        let zero = CPoint::zero(prec);
        (0..n)
            .map(|i| {
                let x = self.x[i].clone();
                let v = self.v[i].clone();
                match &self.prev {
                    None => [x, v, zero.clone(), zero.clone()],
                    Some((xp, vp, h)) => {
                        let bits = prec.bits();
                        let h1 = Float::with_val(bits, 1u32) / h;
                        let h2 = Float::with_val(bits, &h1 * &h1);
                        let h3 = Float::with_val(bits, &h2 * &h1);
                        let dx = x.sub(&xp[i]);
                        let three_dx = dx.scale(&Float::with_val(bits, 3u32));
                        let two_dx = dx.scale(&Float::with_val(bits, 2u32));
                        // (2v + v_prev)/h - 3(x - x_prev)/h^2
                        let c2 = v
                            .scale(&Float::with_val(bits, 2u32))
                            .add(&vp[i])
                            .scale(&h1)
                            .sub(&three_dx.scale(&h2));
                        // (v + v_prev)/h^2 - 2(x - x_prev)/h^3
                        let c3 = v.add(&vp[i]).scale(&h2).sub(&two_dx.scale(&h3));
                        [x, v, c2, c3]
                    }
                }
            })
            .collect()
    }

    /// Conservative enclosure of `{X(eta) : eta in [lo, hi]}` by interval
    /// Horner evaluation with point coefficients.
    pub fn predict_box(&self, eta: &RealInterval, prec: Precision) -> IntervalBox {
        let e = ComplexInterval::new(eta.clone(), RealInterval::zero(prec));
        IntervalBox::new(
            self.coefficients(prec)
                .iter()
                .map(|[c0, c1, c2, c3]| {
                    let mut acc = ComplexInterval::point(c3);
                    for c in [c2, c1, c0] {
                        acc = acc.mul(&e).add(&ComplexInterval::point(c));
                    }
                    acc
                })
                .collect(),
        )
    }

    /// Point evaluation `X(eta)`, used as the next approximate solution.
    pub fn predict_point(&self, eta: &Float, prec: Precision) -> CVec {
        self.coefficients(prec)
            .iter()
            .map(|[c0, c1, c2, c3]| {
                let mut acc = c3.clone();
                for c in [c2, c1, c0] {
                    acc = acc.scale(eta).add(c);
                }
                acc
            })
            .collect()
    }
}

/// One accepted tracking step.
#[derive(Clone, Debug)]
pub struct StepRecord {
    /// Time reached after the step (global, in [0,1]).
    pub t: f64,
    /// Step length.
    pub h: f64,
    /// Certification radius in force when the step was accepted.
    pub r: f64,
    /// Predictor rejections before acceptance.
    pub rejections: usize,
}

/// Diagnostics of one tracked path.
#[derive(Clone, Debug, Default)]
pub struct TrackTrace {
    pub steps: Vec<StepRecord>,
    pub rejections: usize,
    pub krawczyk_evals: usize,
    pub wall: std::time::Duration,
}

/// Tangent vector of the solution path: `v = -(d_x H)^{-1} d_t H` at
/// floating midpoints. Non-certified; any inaccuracy only degrades the
/// predictor, never soundness.
fn tangent(h: &Homotopy, x: &CVec, t: &Float, prec: Precision) -> Result<CVec> {
    let inst = h.instance_at(t)?;
    let a = inst.jac_point(x, prec)?.inverse(prec)?;
    let dt = h.t_derivative_point(x, t)?;
    Ok(a.mat_vec(&dt).iter().map(|p| p.neg()).collect())
}

/// A Krawczyk failure from over-wide enclosures (e.g. an interval
/// denominator straddling zero on a rational system) means "cannot certify
/// at this step size", not "abort".
fn test_or_false(
    inst: &crate::expr::SystemInstance,
    x: &IntervalBox,
    r: &Float,
    a: &crate::interval::CMat,
    level: &Float,
    prec: Precision,
) -> Result<bool> {
    match krawczyk_test(inst, x, r, a, level, prec) {
        Ok(v) => Ok(v),
        Err(Error::DivisionByZeroInterval) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Rejections within one step before the predictor drops its history and
/// retries in linear (tangent-only) mode.
const HERMITE_FALLBACK_REJECTIONS: usize = 8;

fn track_single_segment(
    h: &Homotopy,
    start: CertifiedPoint,
    cfg: &TrackerConfig,
    prec: Precision,
    trace: &mut TrackTrace,
    global_offset: f64,
    global_scale: f64,
) -> Result<CertifiedPoint> {
    assert_eq!(h.path.n_segments(), 1);
    let bits = prec.bits();
    let tau = cfg.certify.tau_float(prec);
    let h_min = prec.half_ulp_scale();
    let one = Float::with_val(bits, 1u32);
    let delta_inc = round_down(prec, &cfg.delta_inc);
    let delta_dec = round_down(prec, &cfg.delta_dec);

    let mut t = Float::with_val(bits, 0u32);
    let mut x = start.x;
    let mut r = start.r;
    let mut a = start.a;
    let mut h_step = round_down(prec, &cfg.h0);
    let mut prev: Option<(CVec, CVec, Float)> = None;
    let mut steps = 0usize;

    while t < one {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::StepBudgetExceeded(cfg.max_steps));
        }
        let inst_t = h.instance_at(&t)?;
        let cp = refine(&inst_t, x, r, a, &cfg.certify, prec)?;
        x = cp.x;
        r = cp.r;
        a = cp.a;
        // Polish the center well below the rho*r certificate noise: the
        // Hermite coefficients divide center errors by h_prev^2 and
        // h_prev^3, so leftover noise would blow up the predictor box
        // after a run of small steps.
        for _ in 0..2 {
            x = crate::certify::quasi_newton_step(&inst_t, &x, &a, prec)?;
        }
        let v = tangent(h, &x, &t, prec)?;
        let mut state = PredictorState {
            x: x.clone(),
            v: v.clone(),
            prev: prev.take(),
        };
        h_step = Float::with_val(bits, &h_step * &delta_inc);
        let mut rejections = 0usize;
        let (t_next, h_used) = loop {
            let mut t_hi = Float::with_val(bits, &t + &h_step);
            if t_hi > one {
                t_hi = one.clone();
            }
            let h_used = Float::with_val(bits, &t_hi - &t);
            let t_range = RealInterval::new(t.clone(), t_hi.clone())?;
            let eta = RealInterval::new(Float::with_val(bits, 0u32), h_used.clone())?;
            let xb = state.predict_box(&eta, prec);
            let inst_range = h.instance(&t_range)?;
            trace.krawczyk_evals += 1;
            if test_or_false(&inst_range, &xb, &r, &a, &tau, prec)? {
                break (t_hi, h_used);
            }
            rejections += 1;
            trace.rejections += 1;
            h_step = Float::with_val(bits, &h_step * &delta_dec);
            // A persistent rejection run means the cubic terms are hurting
            // rather than helping (stale data from a much larger or much
            // smaller previous step); retry with the tangent-only predictor,
            // whose box shrinks linearly with h.
            if rejections == HERMITE_FALLBACK_REJECTIONS {
                state.prev = None;
            }
            if h_step < h_min {
                return Err(Error::StepUnderflow {
                    h_min: h_min.to_string_radix(10, Some(8)),
                });
            }
        };
        // The certified step box contains the path over [t, t_next]; the
        // predictor endpoint lies inside it and serves as the next
        // approximate solution.
        let x_next = state.predict_point(&h_used, prec);
        prev = Some((state.x, state.v, h_used.clone()));
        trace.steps.push(StepRecord {
            t: global_offset + global_scale * t_next.to_f64(),
            h: global_scale * h_used.to_f64(),
            r: r.to_f64(),
            rejections,
        });
        x = x_next;
        t = t_next;
    }
    let inst_1 = h.instance_at(&one)?;
    refine(&inst_1, x, r, a, &cfg.certify, prec)
}

/// Tracks one certified start point of `H(.;0)` to a certified endpoint of
/// `H(.;1)`. Polyline paths are tracked segment by segment, each endpoint
/// certificate seeding the next segment.
pub fn certified_track(
    h: &Homotopy,
    start: &CertifiedPoint,
    cfg: &TrackerConfig,
    prec: Precision,
) -> Result<(CertifiedPoint, TrackTrace)> {
    let begin = std::time::Instant::now();
    let mut trace = TrackTrace::default();
    let s = h.path.n_segments();
    let mut current = start.clone();
    for i in 0..s {
        let (from, to) = h.path.segment(i);
        let seg = Homotopy::new(
            h.system.clone(),
            PathSpec::Segment {
                from: from.clone(),
                to: to.clone(),
            },
            prec,
        )?;
        current = track_single_segment(
            &seg,
            current,
            cfg,
            prec,
            &mut trace,
            i as f64 / s as f64,
            1.0 / s as f64,
        )?;
    }
    trace.wall = begin.elapsed();
    Ok((current, trace))
}

/// Transports a whole fiber along an edge: one independent certified track
/// per start point, in input order. Endpoint boxes are sharpened until
/// pairwise disjoint, so distinct starts provably map to distinct roots.
/// Per-path failures are reported per index; successes are retained.
pub fn track_correspondence(
    h: &Homotopy,
    fiber: &[CertifiedPoint],
    cfg: &TrackerConfig,
    prec: Precision,
    parallel: bool,
) -> Vec<Result<(CertifiedPoint, TrackTrace)>> {
    let mut results: Vec<Result<(CertifiedPoint, TrackTrace)>> = if parallel {
        use rayon::prelude::*;
        fiber
            .par_iter()
            .map(|cp| certified_track(h, cp, cfg, prec))
            .collect()
    } else {
        fiber.iter().map(|cp| certified_track(h, cp, cfg, prec)).collect()
    };
    // pairwise separation of successful endpoints
    let one = Float::with_val(prec.bits(), 1u32);
    let inst_1 = match h.instance_at(&one) {
        Ok(i) => i,
        Err(_) => return results,
    };
    let idx: Vec<usize> = (0..results.len())
        .filter(|&i| results[i].is_ok())
        .collect();
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            let (ia, ib) = (idx[a], idx[b]);
            for _ in 0..cfg.certify.max_iters {
                let (ca, cb) = match (&results[ia], &results[ib]) {
                    (Ok((ca, _)), Ok((cb, _))) => (ca.clone(), cb.clone()),
                    _ => break,
                };
                if ca.enclosure().disjoint(&cb.enclosure()) {
                    break;
                }
                match (
                    sharpen(&inst_1, &ca, &cfg.certify, prec),
                    sharpen(&inst_1, &cb, &cfg.certify, prec),
                ) {
                    (Ok(sa), Ok(sb)) => {
                        if let Ok((slot, _)) = &mut results[ia] {
                            *slot = sa;
                        }
                        if let Ok((slot, _)) = &mut results[ib] {
                            *slot = sb;
                        }
                    }
                    _ => {
                        results[ib] = Err(Error::MatchUndecidable(cfg.certify.max_iters));
                        break;
                    }
                }
            }
        }
    }
    results
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::certify_seed;
    use crate::expr::{Dag, ParametricSystem};
    use std::sync::Arc;

    const P: Precision = Precision::DEFAULT;

    /// F(x; z) = x^2 - z.
    fn sqrt_system() -> Arc<ParametricSystem> {
        let mut d = Dag::new();
        let x = d.var(0);
        let z = d.param(0);
        let sq = d.pow(x, 2);
        let f = d.sub(sq, z);
        Arc::new(
            ParametricSystem::new("sqrt", d, vec![f], vec!["x".into()], vec!["z".into()])
                .unwrap(),
        )
    }

    fn seg(from: f64, to: f64) -> PathSpec {
        PathSpec::Segment {
            from: vec![CPoint::from_f64(from, 0.0, P)],
            to: vec![CPoint::from_f64(to, 0.0, P)],
        }
    }

    #[test]
    fn hermite_coefficients_for_linear_data() {
        // data sampled from X(eta) = eta: coefficients must be (0,1,0,0)
        let state = PredictorState {
            x: vec![CPoint::zero(P)],
            v: vec![CPoint::one(P)],
            prev: Some((
                vec![CPoint::from_f64(-1.0, 0.0, P)],
                vec![CPoint::one(P)],
                Float::with_val(P.bits(), 1),
            )),
        };
        let c = state.coefficients(P);
        assert!(c[0][0].is_zero());
        assert_eq!(c[0][1].re.to_f64(), 1.0);
        assert!(c[0][2].abs().to_f64() < 1e-70);
        assert!(c[0][3].abs().to_f64() < 1e-70);
        // enclosure of [0, h] is [0, h]
        let eta = RealInterval::new(
            Float::with_val(P.bits(), 0),
            Float::with_val(P.bits(), 0.5),
        )
        .unwrap();
        let b = state.predict_box(&eta, P);
        assert_eq!(b.at(0).re.lo().to_f64(), 0.0);
        assert_eq!(b.at(0).re.hi().to_f64(), 0.5);
    }

    #[test]
    fn hermite_coefficients_for_quadratic_data() {
        // data sampled from X(eta) = eta^2 with h_prev = 1:
        // x = 0, v = 0, x_prev = 1, v_prev = -2 => coefficients (0,0,1,0)
        let state = PredictorState {
            x: vec![CPoint::zero(P)],
            v: vec![CPoint::zero(P)],
            prev: Some((
                vec![CPoint::one(P)],
                vec![CPoint::from_f64(-2.0, 0.0, P)],
                Float::with_val(P.bits(), 1),
            )),
        };
        let c = state.coefficients(P);
        assert!(c[0][0].is_zero() && c[0][1].is_zero());
        assert_eq!(c[0][2].re.to_f64(), 1.0);
        assert!(c[0][3].abs().to_f64() < 1e-70);
    }

    #[test]
    fn predictor_at_zero_range_is_current_point() {
        let state = PredictorState {
            x: vec![CPoint::from_f64(2.5, -1.0, P)],
            v: vec![CPoint::from_f64(7.0, 3.0, P)],
            prev: None,
        };
        let eta = RealInterval::point(Float::with_val(P.bits(), 0));
        let b = state.predict_box(&eta, P);
        assert!(b.at(0).is_point());
        assert_eq!(b.at(0).re.lo().to_f64(), 2.5);
    }

    #[test]
    fn track_sqrt_path_to_two() {
        // H(x;t) = x^2 - (1+3t): closed form x(t) = sqrt(1+3t), x(1) = 2.
        let h = Homotopy::new(sqrt_system(), seg(1.0, 4.0), P).unwrap();
        let cfg = TrackerConfig::default();
        let inst0 = h.instance_at(&Float::with_val(P.bits(), 0)).unwrap();
        let start =
            certify_seed(&inst0, vec![CPoint::from_f64(1.0, 0.0, P)], &cfg.certify, P).unwrap();
        let (end, trace) = certified_track(&h, &start, &cfg, P).unwrap();
        let err = Float::with_val(P.bits(), &end.x[0].re - 2u32).abs();
        let bound = Float::with_val(P.bits(), &end.r * &end.rho);
        assert!(err <= bound, "endpoint error {err} > rho*r {bound}");
        assert!(!trace.steps.is_empty());
        // endpoint certificate passes an independent re-check
        let inst1 = h.instance_at(&Float::with_val(P.bits(), 1)).unwrap();
        assert!(krawczyk_test(
            &inst1,
            &IntervalBox::from_points(&end.x),
            &end.r,
            &end.a,
            &end.rho,
            P
        )
        .unwrap());
    }

    #[test]
    fn constant_homotopy_stays_put() {
        let h = Homotopy::new(sqrt_system(), seg(2.0, 2.0), P).unwrap();
        let cfg = TrackerConfig::default();
        let inst0 = h.instance_at(&Float::with_val(P.bits(), 0)).unwrap();
        let start =
            certify_seed(&inst0, vec![CPoint::from_f64(1.4142, 0.0, P)], &cfg.certify, P)
                .unwrap();
        let (end, _) = certified_track(&h, &start, &cfg, P).unwrap();
        let root = Float::with_val(P.bits(), 2).sqrt();
        let err = Float::with_val(P.bits(), &end.x[0].re - &root).abs();
        let bound = Float::with_val(P.bits(), &end.r * &end.rho);
        assert!(err <= bound);
    }

    #[test]
    fn singular_path_underflows() {
        // H(x;t) = x^2 - (1-t)^2 * 4 hits the discriminant at t=1... use a
        // midpoint singularity instead: z(t) from 1 to -1 crosses 0 at
        // t = 1/2 where x^2 - z has a double root.
        let h = Homotopy::new(sqrt_system(), seg(1.0, -1.0), P).unwrap();
        let cfg = TrackerConfig::default();
        let inst0 = h.instance_at(&Float::with_val(P.bits(), 0)).unwrap();
        let start =
            certify_seed(&inst0, vec![CPoint::from_f64(1.0, 0.0, P)], &cfg.certify, P).unwrap();
        let r = certified_track(&h, &start, &cfg, P);
        assert!(
            matches!(
                r,
                Err(Error::StepUnderflow { .. })
                    | Err(Error::RefineDivergence(_))
                    | Err(Error::SingularMatrix { .. })
            ),
            "expected a failure near the discriminant, got {r:?}"
        );
    }

    #[test]
    fn round_trip_returns_to_start() {
        let h_fwd = Homotopy::new(sqrt_system(), seg(1.0, 4.0), P).unwrap();
        let h_bwd = Homotopy::new(sqrt_system(), seg(4.0, 1.0), P).unwrap();
        let cfg = TrackerConfig::default();
        let inst0 = h_fwd.instance_at(&Float::with_val(P.bits(), 0)).unwrap();
        let start =
            certify_seed(&inst0, vec![CPoint::from_f64(1.0, 0.0, P)], &cfg.certify, P).unwrap();
        let (mid, _) = certified_track(&h_fwd, &start, &cfg, P).unwrap();
        let (back, _) = certified_track(&h_bwd, &mid, &cfg, P).unwrap();
        // both certify a root of x^2 - 1 near 1; enclosures must overlap on
        // the common root
        let err = Float::with_val(P.bits(), &back.x[0].re - 1u32).abs();
        let bound = Float::with_val(P.bits(), &back.r * &back.rho);
        assert!(err <= bound);
    }

    #[test]
    fn correspondence_keeps_roots_apart() {
        let h = Homotopy::new(sqrt_system(), seg(1.0, 2.25), P).unwrap();
        let cfg = TrackerConfig::default();
        let inst0 = h.instance_at(&Float::with_val(P.bits(), 0)).unwrap();
        let plus =
            certify_seed(&inst0, vec![CPoint::from_f64(1.0, 0.0, P)], &cfg.certify, P).unwrap();
        let minus =
            certify_seed(&inst0, vec![CPoint::from_f64(-1.0, 0.0, P)], &cfg.certify, P).unwrap();
        let out = track_correspondence(&h, &[plus, minus], &cfg, P, false);
        let a = out[0].as_ref().unwrap().0.clone();
        let b = out[1].as_ref().unwrap().0.clone();
        assert!(a.enclosure().disjoint(&b.enclosure()));
        // x(t) = ±sqrt(1 + 1.25t): endpoints ±1.5 within the certified bound
        let ea = Float::with_val(P.bits(), &a.x[0].re - 1.5).abs();
        let eb = Float::with_val(P.bits(), &b.x[0].re + 1.5).abs();
        let ba = Float::with_val(P.bits(), &a.r * &a.rho);
        let bb = Float::with_val(P.bits(), &b.r * &b.rho);
        assert!(ea <= ba && eb <= bb, "{ea} > {ba} or {eb} > {bb}");
    }

    #[test]
    fn polyline_tracking_chains_segments() {
        let path = PathSpec::Polyline {
            points: vec![
                vec![CPoint::from_f64(1.0, 0.0, P)],
                vec![CPoint::from_f64(2.0, 1.0, P)],
                vec![CPoint::from_f64(4.0, 0.0, P)],
            ],
        };
        let h = Homotopy::new(sqrt_system(), path, P).unwrap();
        let cfg = TrackerConfig::default();
        let inst0 = h.instance_at(&Float::with_val(P.bits(), 0)).unwrap();
        let start =
            certify_seed(&inst0, vec![CPoint::from_f64(1.0, 0.0, P)], &cfg.certify, P).unwrap();
        let (end, trace) = certified_track(&h, &start, &cfg, P).unwrap();
        let err = Float::with_val(P.bits(), &end.x[0].re - 2u32).abs();
        let bound = Float::with_val(P.bits(), &end.r * &end.rho);
        assert!(err <= bound);
        // trace times are strictly increasing and end at 1
        for w in trace.steps.windows(2) {
            assert!(w[0].t < w[1].t);
        }
        assert!((trace.steps.last().unwrap().t - 1.0).abs() < 1e-12);
    }
}
