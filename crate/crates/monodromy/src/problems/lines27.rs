//! The 27 lines on a coordinate-permutation-symmetric cubic surface
//! f = m3 + a21*m21 + a111*m111 in P^3, where m3, m21, m111 are the
//! symmetric cubic monomial sums. A line is represented by two spanning
//! points u, v in C^4 (8 variables); containment in the surface gives four
//! cubic equations (the coefficients of the binary cubic f(su + tv)), and
//! four generic affine-linear slice forms pin a unique basis per line.
//! The two surface coefficients (a21, a111) are the parameters; the base
//! point is the Fermat cubic (0, 0), where all 27 lines are explicit.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::expr::{Dag, ExprId, ParametricSystem, Wrt};
use crate::interval::{CMat, CPoint, CVec, Precision};
use crate::permgroup::PermGroup;

use super::{Expected, Problem, SeedData};

const RETRIES: usize = 32;

/// One affine-linear slice form: sum(coeffs[i] * w[i]) - rhs over the
/// eight line coordinates w = (u, v). Coefficients are exact rationals so
/// the slices embed into the expression DAG as point constants.
#[derive(Clone, Debug)]
struct SliceForm {
    coeffs: Vec<(Rational, Rational)>,
    rhs: (Rational, Rational),
}

fn rational_unit(rng: &mut ChaCha8Rng) -> (Rational, Rational) {
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    (
        Rational::from_f64(theta.cos()).unwrap(),
        Rational::from_f64(theta.sin()).unwrap(),
    )
}

fn sample_slices(rng: &mut ChaCha8Rng) -> Vec<SliceForm> {
    (0..4)
        .map(|_| SliceForm {
            coeffs: (0..8).map(|_| rational_unit(rng)).collect(),
            rhs: rational_unit(rng),
        })
        .collect()
}

/// Builds f(x) = m3 + a21*m21 + a111*m111 on four DAG variables with the
/// given offset (0 for u, 4 for v).
fn symmetric_cubic(dag: &mut Dag, offset: u32) -> ExprId {
    let x: Vec<ExprId> = (0..4).map(|i| dag.var(offset + i)).collect();
    let a21 = dag.param(0);
    let a111 = dag.param(1);
    let mut m3 = dag.zero();
    for &xi in &x {
        let c = dag.pow(xi, 3);
        m3 = dag.add(m3, c);
    }
    let mut m21 = dag.zero();
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let sq = dag.pow(x[i], 2);
            let t = dag.mul(sq, x[j]);
            m21 = dag.add(m21, t);
        }
    }
    let mut m111 = dag.zero();
    for i in 0..4 {
        for j in (i + 1)..4 {
            for k in (j + 1)..4 {
                let t = dag.mul(x[i], x[j]);
                let t = dag.mul(t, x[k]);
                m111 = dag.add(m111, t);
            }
        }
    }
    let t21 = dag.mul(a21, m21);
    let t111 = dag.mul(a111, m111);
    let s = dag.add(m3, t21);
    dag.add(s, t111)
}

fn build_system(slices: &[SliceForm]) -> Result<ParametricSystem> {
    let mut dag = Dag::new();
    let f_u = symmetric_cubic(&mut dag, 0);
    let f_v = symmetric_cubic(&mut dag, 4);
    // directional terms: coefficient of s^2 t is grad f(u).v, of s t^2 is
    // grad f(v).u
    let mut grad_u_dot_v = dag.zero();
    let mut grad_v_dot_u = dag.zero();
    for i in 0..4u32 {
        let du = dag.diff(f_u, Wrt::Var(i));
        let vi = dag.var(4 + i);
        let t = dag.mul(du, vi);
        grad_u_dot_v = dag.add(grad_u_dot_v, t);
        let dv = dag.diff(f_v, Wrt::Var(4 + i));
        let ui = dag.var(i);
        let t = dag.mul(dv, ui);
        grad_v_dot_u = dag.add(grad_v_dot_u, t);
    }
    let mut eqs = vec![f_u, grad_u_dot_v, grad_v_dot_u, f_v];
    for s in slices {
        let mut e = {
            let (re, im) = s.rhs.clone();
            let c = dag.rational(re, im);
            dag.neg(c)
        };
        for (i, (re, im)) in s.coeffs.iter().enumerate() {
            let c = dag.rational(re.clone(), im.clone());
            let w = dag.var(i as u32);
            let t = dag.mul(c, w);
            e = dag.add(e, t);
        }
        eqs.push(e);
    }
    let mut var_names = Vec::new();
    for tag in ["u", "v"] {
        for i in 1..=4 {
            var_names.push(format!("{tag}{i}"));
        }
    }
    ParametricSystem::new(
        "cubic-27lines",
        dag,
        eqs,
        var_names,
        vec!["a21".into(), "a111".into()],
    )
}

/// The three cube roots of unity at working precision.
fn cube_roots_of_unity(prec: Precision) -> Vec<CPoint> {
    let bits = prec.bits();
    let minus_half = Float::with_val(bits, -0.5f64);
    let root3_half = Float::with_val(bits, 3i32).sqrt() / 2i32;
    vec![
        CPoint::one(prec),
        CPoint {
            re: minus_half.clone(),
            im: root3_half.clone(),
        },
        CPoint {
            re: minus_half,
            im: -root3_half,
        },
    ]
}

/// The 27 lines on the Fermat cubic as spanning-point pairs (u0, v0):
/// for each splitting of the coordinates into two pairs {i,j}, {k,l} and
/// cube roots w, w' of unity, the line x_i = -w x_j, x_k = -w' x_l.
fn fermat_lines(prec: Precision) -> Vec<(CVec, CVec)> {
    let roots = cube_roots_of_unity(prec);
    let pairings: [([usize; 2], [usize; 2]); 3] = [([0, 1], [2, 3]), ([0, 2], [1, 3]), ([0, 3], [1, 2])];
    let mut lines = Vec::with_capacity(27);
    for ([i, j], [k, l]) in pairings {
        for w in &roots {
            for w2 in &roots {
                let mut u0 = vec![CPoint::zero(prec); 4];
                let mut v0 = vec![CPoint::zero(prec); 4];
                u0[i] = w.neg();
                u0[j] = CPoint::one(prec);
                v0[k] = w2.neg();
                v0[l] = CPoint::one(prec);
                lines.push((u0, v0));
            }
        }
    }
    lines
}

fn eval_slice_part(coeffs: &[(Rational, Rational)], w: &[CPoint], prec: Precision) -> CPoint {
    let mut acc = CPoint::zero(prec);
    for (c, wi) in coeffs.iter().zip(w) {
        let cp = CPoint {
            re: Float::with_val(prec.bits(), &c.0),
            im: Float::with_val(prec.bits(), &c.1),
        };
        acc = acc.add(&cp.mul(wi));
    }
    acc
}

/// Normalizes each Fermat line against the slice forms: writing
/// u = a*u0 + b*v0 and v = c*u0 + d*v0, the four slices become a 4x4
/// linear system in (a, b, c, d).
fn normalized_seeds(
    slices: &[SliceForm],
    prec: Precision,
) -> Result<Vec<CVec>> {
    let bits = prec.bits();
    let mut seeds = Vec::with_capacity(27);
    for (u0, v0) in fermat_lines(prec) {
        let mut rows = Vec::with_capacity(4);
        let mut rhs = Vec::with_capacity(4);
        for s in slices {
            let (cu, cv) = s.coeffs.split_at(4);
            rows.push(vec![
                eval_slice_part(cu, &u0, prec),
                eval_slice_part(cu, &v0, prec),
                eval_slice_part(cv, &u0, prec),
                eval_slice_part(cv, &v0, prec),
            ]);
            rhs.push(CPoint {
                re: Float::with_val(bits, &s.rhs.0),
                im: Float::with_val(bits, &s.rhs.1),
            });
        }
        let mat = CMat::from_rows(rows);
        let inv = mat.inverse(prec).map_err(|_| Error::SliceDegenerate)?;
        let abcd = inv.mat_vec(&rhs);
        let det = abcd[0].mul(&abcd[3]).sub(&abcd[1].mul(&abcd[2]));
        if det.abs().to_f64() < 1e-8 {
            return Err(Error::SliceDegenerate);
        }
        let mut sol = Vec::with_capacity(8);
        for t in 0..4 {
            sol.push(abcd[0].mul(&u0[t]).add(&abcd[1].mul(&v0[t])));
        }
        for t in 0..4 {
            sol.push(abcd[2].mul(&u0[t]).add(&abcd[3].mul(&v0[t])));
        }
        seeds.push(sol);
    }
    Ok(seeds)
}

/// The expected group: Klein four, acting with 3 orbits of size 4, 6 of
/// size 2, and 3 fixed lines among the 27.
pub fn expected() -> Expected {
    Expected {
        k: Some(27),
        order: Some(4),
        gw: Some(2),
        group: None,
    }
}

pub fn instantiate(rng: &mut ChaCha8Rng, prec: Precision) -> Result<Problem> {
    let mut last = Error::SliceDegenerate;
    for _ in 0..RETRIES {
        let slices = sample_slices(rng);
        match normalized_seeds(&slices, prec) {
            Ok(solutions) => {
                let system = Arc::new(build_system(&slices)?);
                let z = vec![CPoint::zero(prec), CPoint::zero(prec)];
                return Ok(Problem {
                    name: "cubic-27lines".to_string(),
                    system,
                    seed: SeedData { z, solutions },
                    expected: expected(),
                    graph: None,
                });
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// The expected orbit-size multiset of the monodromy action on the lines.
pub fn expected_orbit_sizes() -> Vec<usize> {
    vec![1, 1, 1, 2, 2, 2, 2, 2, 2, 4, 4, 4]
}

/// Checks a computed group against the published action: order 4, all
/// generators of order at most 2, and the orbit sizes above.
pub fn action_matches(group: &PermGroup) -> bool {
    if group.order() != 4 {
        return false;
    }
    let mut sizes: Vec<usize> = group.orbits().iter().map(|o| o.len()).collect();
    sizes.sort_unstable();
    sizes == expected_orbit_sizes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::SystemInstance;
    use rand::SeedableRng;

    const P: Precision = Precision::DEFAULT;

    #[test]
    fn all_27_seeds_satisfy_the_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let prob = instantiate(&mut rng, P).unwrap();
        assert_eq!(prob.seed.solutions.len(), 27);
        let inst = SystemInstance::at_point_params(prob.system.clone(), &prob.seed.z).unwrap();
        for sol in &prob.seed.solutions {
            let res = inst.eval_point(sol, P).unwrap();
            for r in &res {
                assert!(r.abs().to_f64() < 1e-55, "residual {}", r.abs());
            }
        }
    }

    #[test]
    fn seeds_are_pairwise_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let prob = instantiate(&mut rng, P).unwrap();
        let sols = &prob.seed.solutions;
        for i in 0..sols.len() {
            for j in (i + 1)..sols.len() {
                let dist: f64 = sols[i]
                    .iter()
                    .zip(&sols[j])
                    .map(|(a, b)| a.sub(b).abs().to_f64())
                    .sum();
                assert!(dist > 1e-6, "seeds {i} and {j} coincide");
            }
        }
    }

    #[test]
    fn fermat_lines_lie_on_fermat_cubic() {
        // every point s*u0 + t*v0 has coordinates occurring in pairs
        // (x, -w x) with w^3 = -1, so x^3 + (-w x)^3 = x^3 (1 + w^3 ... ) = 0
        for (u0, v0) in fermat_lines(P) {
            for (s, t) in [(1.3, 0.7), (-0.2, 2.1)] {
                let mut sum = CPoint::zero(P);
                for i in 0..4 {
                    let x = u0[i]
                        .mul(&CPoint::from_f64(s, 0.4, P))
                        .add(&v0[i].mul(&CPoint::from_f64(t, -0.9, P)));
                    sum = sum.add(&x.mul(&x).mul(&x));
                }
                assert!(sum.abs().to_f64() < 1e-60);
            }
        }
    }
}
