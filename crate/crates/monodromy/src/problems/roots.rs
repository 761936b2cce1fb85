//! Numeric all-roots solver for univariate instances (Aberth–Ehrlich
//! simultaneous iteration). Used for seed fabrication and as an independent
//! cross-check in tests; certification of its output is always separate.

use rug::Float;

use crate::error::{Error, Result};
use crate::expr::SystemInstance;
use crate::interval::{CPoint, Precision};

/// Approximates all `degree` roots of the univariate instance. The instance
/// must have exactly one variable; interval constants are evaluated at
/// their midpoints. Deterministic for a fixed `phase_seed`.
pub fn univariate_roots(
    inst: &SystemInstance,
    degree: usize,
    prec: Precision,
    phase_seed: u64,
) -> Result<Vec<CPoint>> {
    assert_eq!(inst.n(), 1);
    let bits = prec.bits();
    // initial guesses on a circle, rotated by a seed-dependent phase to
    // avoid symmetric stalling
    let phase = 0.5 + (phase_seed % 997) as f64 / 997.0;
    let mut x: Vec<CPoint> = (0..degree)
        .map(|j| {
            let theta = std::f64::consts::TAU * (j as f64 + phase) / degree as f64;
            let (sin, cos) = Float::with_val(bits, theta).sin_cos(Float::new(bits));
            let radius = Float::with_val(bits, 1.3);
            CPoint {
                re: Float::with_val(bits, &cos * &radius),
                im: Float::with_val(bits, &sin * &radius),
            }
        })
        .collect();
    let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32) + 48));
    for _ in 0..2000 {
        let mut max_step = Float::with_val(bits, 0);
        for i in 0..degree {
            let xi = x[i].clone();
            let p = inst.eval_point(&[xi.clone()], prec)?[0].clone();
            let dp = inst.jac_point(&[xi.clone()], prec)?.at(0, 0).clone();
            if dp.is_zero() {
                // nudge off the critical point
                x[i] = xi.add(&CPoint::from_f64(1e-3, 1e-3, prec));
                max_step = Float::with_val(bits, 1);
                continue;
            }
            let w = p.div(&dp);
            // Aberth correction: sum of 1/(x_i - x_j)
            let mut s = CPoint::zero(prec);
            for (j, xj) in x.iter().enumerate() {
                if j == i {
                    continue;
                }
                let diff = xi.sub(xj);
                if diff.is_zero() {
                    continue;
                }
                s = s.add(&CPoint::one(prec).div(&diff));
            }
            let denom = CPoint::one(prec).sub(&w.mul(&s));
            let delta = if denom.is_zero() { w.clone() } else { w.div(&denom) };
            let step = delta.abs();
            if step > max_step {
                max_step = step;
            }
            x[i] = xi.sub(&delta);
        }
        if max_step < tol {
            return Ok(x);
        }
    }
    Err(Error::Other(
        "root iteration did not converge; raise precision or reseed".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_problem;
    use std::sync::Arc;

    const P: Precision = Precision::DEFAULT;

    fn instance(src: &str) -> SystemInstance {
        let p = parse_problem("t", src).unwrap();
        SystemInstance::new(Arc::new(p.system), vec![]).unwrap()
    }

    #[test]
    fn quadratic_roots_are_plus_minus_sqrt2() {
        let inst = instance("vars x; eqs x^2 - 2;");
        let mut roots = univariate_roots(&inst, 2, P, 1).unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let s2 = Float::with_val(P.bits(), 2).sqrt();
        let e0 = Float::with_val(P.bits(), &roots[0].re + &s2).abs();
        let e1 = Float::with_val(P.bits(), &roots[1].re - &s2).abs();
        assert!(e0.to_f64() < 1e-60 && e1.to_f64() < 1e-60);
        assert!(roots[0].im.clone().abs().to_f64() < 1e-60);
    }

    #[test]
    fn quintic_roots_reproduce_coefficients() {
        // x^5 - 1: the 5th roots of unity; check product and sum
        let inst = instance("vars x; eqs x^5 - 1;");
        let roots = univariate_roots(&inst, 5, P, 3).unwrap();
        let mut sum = CPoint::zero(P);
        let mut prod = CPoint::one(P);
        for r in &roots {
            sum = sum.add(r);
            prod = prod.mul(r);
            // residual at each root
            let res = inst.eval_point(&[r.clone()], P).unwrap()[0].abs();
            assert!(res.to_f64() < 1e-60);
        }
        assert!(sum.abs().to_f64() < 1e-60); // e1 = 0
        assert!(prod.sub(&CPoint::one(P)).abs().to_f64() < 1e-60); // product = (-1)^5 * (-1)
    }

    #[test]
    fn clustered_roots_converge() {
        // (x-1)(x-1.0001)(x+3) expanded
        let inst = instance(
            "vars x; eqs (x - 1)*(x - 1.0001)*(x + 3);",
        );
        let mut roots = univariate_roots(&inst, 3, P, 5).unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((roots[0].re.to_f64() + 3.0).abs() < 1e-40);
        assert!((roots[1].re.to_f64() - 1.0).abs() < 1e-40);
        assert!((roots[2].re.to_f64() - 1.0001).abs() < 1e-40);
    }
}
