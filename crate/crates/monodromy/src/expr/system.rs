use std::sync::Arc;

use rug::Float;

use super::dag::{Dag, ExprId, Wrt};
use crate::error::{Error, Result};
use crate::interval::{
    CMat, CPoint, CVec, ComplexInterval, IntervalBox, IntervalMatrix, Precision, RealInterval,
};

/// A square parametrized polynomial system `F(x; z) = 0` with `n` solution
/// variables and `m` parameters. Both Jacobians are built symbolically at
/// construction time and shared by every evaluation.
#[derive(Clone, Debug)]
pub struct ParametricSystem {
    name: String,
    dag: Dag,
    equations: Vec<ExprId>,
    var_names: Vec<String>,
    param_names: Vec<String>,
    /// Row-major n x n entries of the Jacobian in the solution variables.
    jac_x: Vec<ExprId>,
    /// Row-major n x m entries of the Jacobian in the parameters.
    jac_z: Vec<ExprId>,
}

impl ParametricSystem {
    pub fn new(
        name: impl Into<String>,
        mut dag: Dag,
        equations: Vec<ExprId>,
        var_names: Vec<String>,
        param_names: Vec<String>,
    ) -> Result<ParametricSystem> {
        let n = var_names.len();
        let m = param_names.len();
        if equations.len() != n {
            return Err(Error::NonSquareSystem {
                n_eqs: equations.len(),
                n_vars: n,
            });
        }
        let mut jac_x = Vec::with_capacity(n * n);
        let mut jac_z = Vec::with_capacity(n * m);
        for &eq in &equations {
            for j in 0..n {
                jac_x.push(dag.diff(eq, Wrt::Var(j as u32)));
            }
            for j in 0..m {
                jac_z.push(dag.diff(eq, Wrt::Param(j as u32)));
            }
        }
        Ok(ParametricSystem {
            name: name.into(),
            dag,
            equations,
            var_names,
            param_names,
            jac_x,
            jac_z,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn n_params(&self) -> usize {
        self.param_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn equations(&self) -> &[ExprId] {
        &self.equations
    }

    /// Structural fingerprint of the equations; stable across reparsing the
    /// same source text.
    pub fn fingerprint(&self) -> u64 {
        self.dag.structural_hash(&self.equations)
    }

    fn check_dims(&self, x_len: usize, z_len: usize) -> Result<()> {
        if x_len != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                got: x_len,
            });
        }
        if z_len != self.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.n_params(),
                got: z_len,
            });
        }
        Ok(())
    }

    /// Conservative enclosure of `F(X; Z)` over boxes `X`, `Z`.
    pub fn eval_box(
        &self,
        x: &[ComplexInterval],
        z: &[ComplexInterval],
        prec: Precision,
    ) -> Result<Vec<ComplexInterval>> {
        self.check_dims(x.len(), z.len())?;
        self.dag.eval_interval(&self.equations, x, z, prec)
    }

    /// Conservative enclosure of the Jacobian `dF/dx` over boxes `X`, `Z`.
    pub fn jac_x_box(
        &self,
        x: &[ComplexInterval],
        z: &[ComplexInterval],
        prec: Precision,
    ) -> Result<IntervalMatrix> {
        self.check_dims(x.len(), z.len())?;
        let n = self.n_vars();
        let flat = self.dag.eval_interval(&self.jac_x, x, z, prec)?;
        let rows = (0..n)
            .map(|i| flat[i * n..(i + 1) * n].to_vec())
            .collect();
        Ok(IntervalMatrix::from_rows(rows))
    }

    /// Approximate point evaluation of `F(x; z)` (interval constants
    /// contribute their midpoints).
    pub fn eval_point(&self, x: &[CPoint], z: &[CPoint], prec: Precision) -> Result<CVec> {
        self.check_dims(x.len(), z.len())?;
        self.dag.eval_point(&self.equations, x, z, prec)
    }

    /// Approximate point Jacobian `dF/dx`.
    pub fn jac_x_point(&self, x: &[CPoint], z: &[CPoint], prec: Precision) -> Result<CMat> {
        self.check_dims(x.len(), z.len())?;
        let n = self.n_vars();
        let flat = self.dag.eval_point(&self.jac_x, x, z, prec)?;
        let rows = (0..n)
            .map(|i| flat[i * n..(i + 1) * n].to_vec())
            .collect();
        Ok(CMat::from_rows(rows))
    }

    /// Approximate point Jacobian `dF/dz` as `n` rows of length `m`.
    pub fn jac_z_point(&self, x: &[CPoint], z: &[CPoint], prec: Precision) -> Result<Vec<CVec>> {
        self.check_dims(x.len(), z.len())?;
        let m = self.n_params();
        let flat = self.dag.eval_point(&self.jac_z, x, z, prec)?;
        Ok((0..self.n_vars())
            .map(|i| flat[i * m..(i + 1) * m].to_vec())
            .collect())
    }
}

/// A square system with the parameters pinned to (possibly interval-valued)
/// constants: the object the Krawczyk test certifies roots of. Interval
/// parameters make the certificate hold simultaneously for every parameter
/// value in the enclosure.
#[derive(Clone, Debug)]
pub struct SystemInstance {
    pub system: Arc<ParametricSystem>,
    pub z: Vec<ComplexInterval>,
}

impl SystemInstance {
    pub fn new(system: Arc<ParametricSystem>, z: Vec<ComplexInterval>) -> Result<SystemInstance> {
        if z.len() != system.n_params() {
            return Err(Error::DimensionMismatch {
                expected: system.n_params(),
                got: z.len(),
            });
        }
        Ok(SystemInstance { system, z })
    }

    pub fn at_point_params(system: Arc<ParametricSystem>, z: &[CPoint]) -> Result<SystemInstance> {
        let zi = z.iter().map(ComplexInterval::point).collect();
        SystemInstance::new(system, zi)
    }

    pub fn n(&self) -> usize {
        self.system.n_vars()
    }

    pub fn eval_box(&self, x: &IntervalBox, prec: Precision) -> Result<IntervalBox> {
        Ok(IntervalBox::new(
            self.system.eval_box(x.comps(), &self.z, prec)?,
        ))
    }

    pub fn jac_box(&self, x: &IntervalBox, prec: Precision) -> Result<IntervalMatrix> {
        self.system.jac_x_box(x.comps(), &self.z, prec)
    }

    fn z_midpoints(&self) -> CVec {
        self.z.iter().map(|c| c.midpoint()).collect()
    }

    pub fn eval_point(&self, x: &[CPoint], prec: Precision) -> Result<CVec> {
        self.system.eval_point(x, &self.z_midpoints(), prec)
    }

    pub fn jac_point(&self, x: &[CPoint], prec: Precision) -> Result<CMat> {
        self.system.jac_x_point(x, &self.z_midpoints(), prec)
    }
}

/// A parameter-space path, affinely parametrized over `t in [0,1]`.
#[derive(Clone, Debug)]
pub enum PathSpec {
    /// Straight segment from one parameter point to another.
    Segment { from: CVec, to: CVec },
    /// Piecewise-straight path through the listed points (at least two),
    /// with `[0,1]` split uniformly across the segments.
    Polyline { points: Vec<CVec> },
}

impl PathSpec {
    pub fn n_segments(&self) -> usize {
        match self {
            PathSpec::Segment { .. } => 1,
            PathSpec::Polyline { points } => points.len() - 1,
        }
    }

    pub fn segment(&self, i: usize) -> (&CVec, &CVec) {
        match self {
            PathSpec::Segment { from, to } => {
                assert_eq!(i, 0);
                (from, to)
            }
            PathSpec::Polyline { points } => (&points[i], &points[i + 1]),
        }
    }

    pub fn start(&self) -> &CVec {
        self.segment(0).0
    }

    pub fn end(&self) -> &CVec {
        self.segment(self.n_segments() - 1).1
    }

    /// The same path traversed from end to start.
    pub fn reversed(&self) -> PathSpec {
        match self {
            PathSpec::Segment { from, to } => PathSpec::Segment {
                from: to.clone(),
                to: from.clone(),
            },
            PathSpec::Polyline { points } => PathSpec::Polyline {
                points: points.iter().rev().cloned().collect(),
            },
        }
    }
}

fn hull_real(a: &RealInterval, b: &RealInterval) -> RealInterval {
    let lo = if a.lo() <= b.lo() { a.lo() } else { b.lo() };
    let hi = if a.hi() >= b.hi() { a.hi() } else { b.hi() };
    RealInterval::new(lo.clone(), hi.clone()).unwrap()
}

fn hull_complex(a: &ComplexInterval, b: &ComplexInterval) -> ComplexInterval {
    ComplexInterval::new(hull_real(&a.re, &b.re), hull_real(&a.im, &b.im))
}

/// The homotopy `H(x; t) = F(x; p(t))` obtained by restricting a parametrized
/// system to a parameter-space path.
#[derive(Clone, Debug)]
pub struct Homotopy {
    pub system: Arc<ParametricSystem>,
    pub path: PathSpec,
    prec: Precision,
}

impl Homotopy {
    pub fn new(system: Arc<ParametricSystem>, path: PathSpec, prec: Precision) -> Result<Homotopy> {
        let m = system.n_params();
        for i in 0..path.n_segments() {
            let (a, b) = path.segment(i);
            if a.len() != m || b.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: a.len().max(b.len()),
                });
            }
        }
        Ok(Homotopy { system, path, prec })
    }

    pub fn n(&self) -> usize {
        self.system.n_vars()
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    fn check_t(&self, t: &Float) -> Result<()> {
        if t.is_nan() || *t < 0u32 || *t > 1u32 {
            return Err(Error::PathRangeError);
        }
        Ok(())
    }

    /// `p(t)` for a point time.
    pub fn params_at(&self, t: &Float) -> Result<CVec> {
        self.check_t(t)?;
        let s = self.path.n_segments() as u32;
        let bits = self.prec.bits();
        let scaled = Float::with_val(bits, t * s);
        let mut seg = scaled
            .clone()
            .floor()
            .to_f64()
            .min((s - 1) as f64)
            .max(0.0) as usize;
        // t = 1 lands on the final segment with local time 1
        if seg > (s as usize - 1) {
            seg = s as usize - 1;
        }
        let local = Float::with_val(bits, &scaled - seg as u32);
        let (a, b) = self.path.segment(seg);
        Ok(a.iter()
            .zip(b)
            .map(|(pa, pb)| {
                let d = pb.sub(pa);
                pa.add(&d.scale(&local))
            })
            .collect())
    }

    /// Conservative enclosure of `{p(t) : t in T}` for a time interval `T`
    /// contained in `[0,1]`. Spanning several polyline segments yields the
    /// hull of the per-segment enclosures.
    pub fn params_enclosure(&self, t: &RealInterval) -> Result<Vec<ComplexInterval>> {
        if *t.lo() < 0u32 || *t.hi() > 1u32 {
            return Err(Error::PathRangeError);
        }
        let s = self.path.n_segments();
        let bits = self.prec.bits();
        let mut out: Option<Vec<ComplexInterval>> = None;
        for i in 0..s {
            // global time window of segment i
            let seg_lo = Float::with_val(bits, i as u32) / Float::with_val(bits, s as u32);
            let seg_hi = Float::with_val(bits, (i + 1) as u32) / Float::with_val(bits, s as u32);
            if *t.hi() < seg_lo || *t.lo() > seg_hi {
                continue;
            }
            // clamp to the segment and map to local time in [0,1]
            let lo = if *t.lo() > seg_lo { t.lo().clone() } else { seg_lo };
            let hi = if *t.hi() < seg_hi { t.hi().clone() } else { seg_hi };
            let window = RealInterval::new(lo, hi)?;
            let s_iv = RealInterval::point(Float::with_val(bits, s as u32));
            let i_iv = RealInterval::point(Float::with_val(bits, i as u32));
            let local = window.mul(&s_iv).sub(&i_iv);
            let local = ComplexInterval::new(local, RealInterval::zero(self.prec));
            let (a, b) = self.path.segment(i);
            let enc: Vec<ComplexInterval> = a
                .iter()
                .zip(b)
                .map(|(pa, pb)| {
                    let pa = ComplexInterval::point(pa);
                    let pb = ComplexInterval::point(pb);
                    pa.add(&local.mul(&pb.sub(&pa)))
                })
                .collect();
            out = Some(match out {
                None => enc,
                Some(prev) => prev
                    .iter()
                    .zip(&enc)
                    .map(|(x, y)| hull_complex(x, y))
                    .collect(),
            });
        }
        out.ok_or(Error::PathRangeError)
    }

    /// `p'(t)`, the path velocity in parameter space. Undefined exactly at
    /// interior polyline breakpoints.
    pub fn path_derivative(&self, t: &Float) -> Result<CVec> {
        self.check_t(t)?;
        let s = self.path.n_segments();
        let bits = self.prec.bits();
        let scaled = Float::with_val(bits, t * s as u32);
        let floor = scaled.clone().floor();
        if s > 1 && scaled == floor && *t > 0u32 && *t < 1u32 {
            return Err(Error::BreakpointDerivative);
        }
        let seg = (floor.to_f64() as usize).min(s - 1);
        let (a, b) = self.path.segment(seg);
        let sf = Float::with_val(bits, s as u32);
        Ok(a.iter()
            .zip(b)
            .map(|(pa, pb)| pb.sub(pa).scale(&sf))
            .collect())
    }

    /// `dH/dt (x, t) = dF/dz (x; p(t)) * p'(t)`, approximate.
    pub fn t_derivative_point(&self, x: &[CPoint], t: &Float) -> Result<CVec> {
        let z = self.params_at(t)?;
        let dz = self.path_derivative(t)?;
        let jz = self.system.jac_z_point(x, &z, self.prec)?;
        Ok(jz
            .iter()
            .map(|row| {
                let mut acc = CPoint::zero(self.prec);
                for (c, v) in row.iter().zip(&dz) {
                    acc = acc.add(&c.mul(v));
                }
                acc
            })
            .collect())
    }

    /// The square system `H(.; T)` over a time interval, with parameters
    /// pinned to the path enclosure.
    pub fn instance(&self, t: &RealInterval) -> Result<SystemInstance> {
        SystemInstance::new(self.system.clone(), self.params_enclosure(t)?)
    }

    /// The square system at a point time.
    pub fn instance_at(&self, t: &Float) -> Result<SystemInstance> {
        SystemInstance::at_point_params(self.system.clone(), &self.params_at(t)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::dag::Dag;

    const P: Precision = Precision::DEFAULT;

    /// F(x; z) = x^2 - z, one variable, one parameter.
    fn square_root_system() -> Arc<ParametricSystem> {
        let mut d = Dag::new();
        let x = d.var(0);
        let z = d.param(0);
        let sq = d.pow(x, 2);
        let f = d.sub(sq, z);
        Arc::new(
            ParametricSystem::new(
                "sqrt",
                d,
                vec![f],
                vec!["x".into()],
                vec!["z".into()],
            )
            .unwrap(),
        )
    }

    #[test]
    fn rejects_non_square() {
        let mut d = Dag::new();
        let x = d.var(0);
        let y = d.var(1);
        let f = d.add(x, y);
        let r = ParametricSystem::new("bad", d, vec![f], vec!["x".into(), "y".into()], vec![]);
        assert!(matches!(r, Err(Error::NonSquareSystem { n_eqs: 1, n_vars: 2 })));
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let sys = square_root_system();
        let x = [CPoint::from_f64(1.5, 0.5, P)];
        let z = [CPoint::from_f64(2.0, -1.0, P)];
        let jx = sys.jac_x_point(&x, &z, P).unwrap();
        // exact: 2x = 3 + i
        assert!((jx.at(0, 0).re.to_f64() - 3.0).abs() < 1e-60);
        assert!((jx.at(0, 0).im.to_f64() - 1.0).abs() < 1e-60);
        let jz = sys.jac_z_point(&x, &z, P).unwrap();
        assert!((jz[0][0].re.to_f64() + 1.0).abs() < 1e-60);
        // finite-difference cross-check of dF/dx
        let h = 1e-7;
        let xp = [CPoint::from_f64(1.5 + h, 0.5, P)];
        let f0 = sys.eval_point(&x, &z, P).unwrap();
        let f1 = sys.eval_point(&xp, &z, P).unwrap();
        let fd = (f1[0].re.to_f64() - f0[0].re.to_f64()) / h;
        assert!((fd - 3.0).abs() < 1e-5);
    }

    #[test]
    fn homotopy_time_range_enforced() {
        let sys = square_root_system();
        let path = PathSpec::Segment {
            from: vec![CPoint::from_f64(1.0, 0.0, P)],
            to: vec![CPoint::from_f64(4.0, 0.0, P)],
        };
        let h = Homotopy::new(sys, path, P).unwrap();
        assert!(matches!(
            h.params_at(&Float::with_val(P.bits(), 1.5)),
            Err(Error::PathRangeError)
        ));
        let mid = h.params_at(&Float::with_val(P.bits(), 0.5)).unwrap();
        assert_eq!(mid[0].re.to_f64(), 2.5);
    }

    #[test]
    fn segment_enclosure_contains_endpoints() {
        let sys = square_root_system();
        let path = PathSpec::Segment {
            from: vec![CPoint::from_f64(1.0, 0.0, P)],
            to: vec![CPoint::from_f64(4.0, 2.0, P)],
        };
        let h = Homotopy::new(sys, path, P).unwrap();
        let t = RealInterval::new(
            Float::with_val(P.bits(), 0.25),
            Float::with_val(P.bits(), 0.75),
        )
        .unwrap();
        let enc = h.params_enclosure(&t).unwrap();
        let quarter = h.params_at(&Float::with_val(P.bits(), 0.25)).unwrap();
        let three_quarter = h.params_at(&Float::with_val(P.bits(), 0.75)).unwrap();
        assert!(enc[0].contains(&quarter[0]));
        assert!(enc[0].contains(&three_quarter[0]));
    }

    #[test]
    fn polyline_breakpoint_derivative_rejected() {
        let sys = square_root_system();
        let path = PathSpec::Polyline {
            points: vec![
                vec![CPoint::from_f64(1.0, 0.0, P)],
                vec![CPoint::from_f64(2.0, 1.0, P)],
                vec![CPoint::from_f64(4.0, 0.0, P)],
            ],
        };
        let h = Homotopy::new(sys, path, P).unwrap();
        assert!(matches!(
            h.path_derivative(&Float::with_val(P.bits(), 0.5)),
            Err(Error::BreakpointDerivative)
        ));
        // interior of first segment: velocity = 2 * (segment delta)
        let v = h.path_derivative(&Float::with_val(P.bits(), 0.25)).unwrap();
        assert_eq!(v[0].re.to_f64(), 2.0);
        assert_eq!(v[0].im.to_f64(), 2.0);
    }

    #[test]
    fn t_derivative_via_chain_rule() {
        // H(x; t) = x^2 - (1 + 3t): dH/dt = -3.
        let sys = square_root_system();
        let path = PathSpec::Segment {
            from: vec![CPoint::from_f64(1.0, 0.0, P)],
            to: vec![CPoint::from_f64(4.0, 0.0, P)],
        };
        let h = Homotopy::new(sys, path, P).unwrap();
        let x = [CPoint::from_f64(1.3, 0.0, P)];
        let v = h
            .t_derivative_point(&x, &Float::with_val(P.bits(), 0.3))
            .unwrap();
        assert!((v[0].re.to_f64() + 3.0).abs() < 1e-60);
    }
}
