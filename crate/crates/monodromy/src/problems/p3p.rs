//! Perspective three-point pose: distances d1, d2, d3 from a camera center
//! to three known space points, constrained by the pairwise angle equations
//! with denominators cleared. Image directions enter through stereographic
//! coordinates (a, b), so the direction vector (2a, 2b, 1 - a^2 - b^2) has
//! squared length N^2 with N = 1 + a^2 + b^2. Generically 8 solutions that
//! come in (d1,d2,d3) -> (-d1,-d2,-d3) pairs.

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rug::Float;

use crate::error::Result;
use crate::expr::{Dag, ExprId, ParametricSystem};
use crate::interval::{CPoint, CVec, Precision};
use crate::permgroup::{intersect_alternating, wreath_imprimitive};

use super::{unit_real, Expected, Problem, SeedData};

/// Parameter layout: q1 (3 coords), q2, q3, then (a1,b1), (a2,b2), (a3,b3).
pub fn build_system() -> Result<ParametricSystem> {
    let mut dag = Dag::new();
    let d: Vec<ExprId> = (0..3).map(|i| dag.var(i)).collect();
    let q: Vec<Vec<ExprId>> = (0..3)
        .map(|i| (0..3).map(|t| dag.param((3 * i + t) as u32)).collect())
        .collect();
    let ab: Vec<(ExprId, ExprId)> = (0..3)
        .map(|i| (dag.param((9 + 2 * i) as u32), dag.param((10 + 2 * i) as u32)))
        .collect();
    let two = dag.integer(2);
    let one = dag.one();

    // l_i = (2a, 2b, 1 - a^2 - b^2), N_i = 1 + a^2 + b^2
    let mut l = Vec::new();
    let mut n = Vec::new();
    for &(a, b) in &ab {
        let asq = dag.pow(a, 2);
        let bsq = dag.pow(b, 2);
        let ssum = dag.add(asq, bsq);
        let la = dag.mul(two, a);
        let lb = dag.mul(two, b);
        let lc = dag.sub(one, ssum);
        l.push([la, lb, lc]);
        n.push(dag.add(one, ssum));
    }

    let mut eqs = Vec::new();
    for &(i, j) in &[(0usize, 1usize), (0, 2), (1, 2)] {
        // D_ij = sum_t (q_i,t - q_j,t)^2
        let mut dij = dag.zero();
        for t in 0..3 {
            let diff = dag.sub(q[i][t], q[j][t]);
            let sq = dag.pow(diff, 2);
            dij = dag.add(dij, sq);
        }
        // <l_i, l_j>
        let mut dot = dag.zero();
        for t in 0..3 {
            let p = dag.mul(l[i][t], l[j][t]);
            dot = dag.add(dot, p);
        }
        let di2 = dag.pow(d[i], 2);
        let dj2 = dag.pow(d[j], 2);
        let sum = dag.add(di2, dj2);
        let lhs = dag.sub(sum, dij);
        let lhs = dag.mul(lhs, n[i]);
        let lhs = dag.mul(lhs, n[j]);
        let cross = dag.mul(two, dot);
        let cross = dag.mul(cross, d[i]);
        let cross = dag.mul(cross, d[j]);
        eqs.push(dag.sub(lhs, cross));
    }

    let mut param_names = Vec::new();
    for i in 1..=3 {
        for t in ["x", "y", "z"] {
            param_names.push(format!("q{i}{t}"));
        }
    }
    for i in 1..=3 {
        param_names.push(format!("a{i}"));
        param_names.push(format!("b{i}"));
    }
    ParametricSystem::new(
        "p3p",
        dag,
        eqs,
        vec!["d1".into(), "d2".into(), "d3".into()],
        param_names,
    )
}

pub fn expected() -> Expected {
    let group = intersect_alternating(&wreath_imprimitive(2, 4));
    Expected {
        k: Some(8),
        order: Some(group.order()),
        gw: Some(3),
        group: Some(group),
    }
}

/// Forward fabrication from a real scene: a camera center and three space
/// points in [-1,1]^3; the distances and the stereographic image of each
/// viewing direction follow.
pub fn fabricate(rng: &mut ChaCha8Rng, prec: Precision) -> Result<SeedData> {
    let bits = prec.bits();
    'resample: loop {
        let c: Vec<Float> = (0..3).map(|_| unit_real(rng, prec)).collect();
        let q: Vec<Vec<Float>> = (0..3)
            .map(|_| (0..3).map(|_| unit_real(rng, prec)).collect())
            .collect();
        let mut dist = Vec::new();
        let mut ab = Vec::new();
        for qi in &q {
            let mut s = Float::new(bits);
            for t in 0..3 {
                s += Float::with_val(bits, &qi[t] - &c[t]).square();
            }
            let di = s.sqrt();
            if di.to_f64() < 0.3 {
                continue 'resample;
            }
            let v: Vec<Float> = (0..3)
                .map(|t| Float::with_val(bits, &qi[t] - &c[t]) / &di)
                .collect();
            let denom = Float::with_val(bits, &v[2] + 1i32);
            if denom.clone().abs().to_f64() < 0.2 {
                continue 'resample;
            }
            ab.push((
                Float::with_val(bits, &v[0] / &denom),
                Float::with_val(bits, &v[1] / &denom),
            ));
            dist.push(di);
        }
        let mut z: CVec = Vec::with_capacity(15);
        for qi in &q {
            for t in 0..3 {
                z.push(CPoint {
                    re: qi[t].clone(),
                    im: Float::new(bits),
                });
            }
        }
        for (a, b) in &ab {
            z.push(CPoint {
                re: a.clone(),
                im: Float::new(bits),
            });
            z.push(CPoint {
                re: b.clone(),
                im: Float::new(bits),
            });
        }
        let sol: CVec = dist
            .into_iter()
            .map(|di| CPoint {
                re: di,
                im: Float::new(bits),
            })
            .collect();
        return Ok(SeedData {
            z,
            solutions: vec![sol],
        });
    }
}

pub fn instantiate(rng: &mut ChaCha8Rng, prec: Precision) -> Result<Problem> {
    Ok(Problem {
        name: "p3p".to_string(),
        system: Arc::new(build_system()?),
        seed: fabricate(rng, prec)?,
        expected: expected(),
        graph: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::SystemInstance;
    use rand::SeedableRng;

    const P: Precision = Precision::DEFAULT;

    #[test]
    fn fabricated_seed_satisfies_angle_equations() {
        let sys = Arc::new(build_system().unwrap());
        for seed_id in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_id);
            let seed = fabricate(&mut rng, P).unwrap();
            let inst = SystemInstance::at_point_params(sys.clone(), &seed.z).unwrap();
            let res = inst.eval_point(&seed.solutions[0], P).unwrap();
            for r in &res {
                assert!(r.abs().to_f64() < 1e-60, "residual {}", r.abs());
            }
        }
    }

    #[test]
    fn global_sign_flip_is_a_solution() {
        let sys = Arc::new(build_system().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let seed = fabricate(&mut rng, P).unwrap();
        let inst = SystemInstance::at_point_params(sys, &seed.z).unwrap();
        let flipped: CVec = seed.solutions[0].iter().map(|d| d.neg()).collect();
        let res = inst.eval_point(&flipped, P).unwrap();
        for r in &res {
            assert!(r.abs().to_f64() < 1e-60);
        }
    }

    #[test]
    fn expected_group_is_even_of_order_192() {
        let e = expected();
        assert_eq!(e.order, Some(192));
        assert!(e.group.unwrap().all_generators_even());
    }
}
