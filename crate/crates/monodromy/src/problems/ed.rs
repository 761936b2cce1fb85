//! Euclidean distance critical points of the surface x3^4 = (x1^2 + x2^2)^3
//! from a parametrized data point (u1, u2, u3): the Lagrange system in
//! (x1, x2, x3, lambda) generically has 8 solutions.

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::expr::{Dag, ParametricSystem};
use crate::interval::{CPoint, Precision};
use crate::permgroup::wreath_imprimitive;

use super::{unit_point, Expected, Problem, SeedData};

pub fn build_system() -> Result<ParametricSystem> {
    let mut dag = Dag::new();
    let x1 = dag.var(0);
    let x2 = dag.var(1);
    let x3 = dag.var(2);
    let lam = dag.var(3);
    let u1 = dag.param(0);
    let u2 = dag.param(1);
    let u3 = dag.param(2);
    let two = dag.integer(2);
    let four = dag.integer(4);
    let six = dag.integer(6);

    // s = x1^2 + x2^2
    let x1sq = dag.pow(x1, 2);
    let x2sq = dag.pow(x2, 2);
    let s = dag.add(x1sq, x2sq);
    let s2 = dag.pow(s, 2);
    let s3 = dag.pow(s, 3);
    let x3c = dag.pow(x3, 3);
    let x3q = dag.pow(x3, 4);

    // 2(x1 - u1) - 6 x1 lambda s^2
    let eq1 = {
        let d = dag.sub(x1, u1);
        let a = dag.mul(two, d);
        let b = dag.mul(six, x1);
        let b = dag.mul(b, lam);
        let b = dag.mul(b, s2);
        dag.sub(a, b)
    };
    // 2(x2 - u2) - 6 x2 lambda s^2
    let eq2 = {
        let d = dag.sub(x2, u2);
        let a = dag.mul(two, d);
        let b = dag.mul(six, x2);
        let b = dag.mul(b, lam);
        let b = dag.mul(b, s2);
        dag.sub(a, b)
    };
    // 2(x3 - u3) + 4 lambda x3^3
    let eq3 = {
        let d = dag.sub(x3, u3);
        let a = dag.mul(two, d);
        let b = dag.mul(four, lam);
        let b = dag.mul(b, x3c);
        dag.add(a, b)
    };
    // x3^4 - s^3
    let eq4 = dag.sub(x3q, s3);

    ParametricSystem::new(
        "ed-surface",
        dag,
        vec![eq1, eq2, eq3, eq4],
        vec!["x1".into(), "x2".into(), "x3".into(), "lam".into()],
        vec!["u1".into(), "u2".into(), "u3".into()],
    )
}

pub fn expected() -> Expected {
    let group = wreath_imprimitive(4, 2);
    Expected {
        k: Some(8),
        order: Some(group.order()),
        gw: Some(3),
        group: Some(group),
    }
}

/// Forward fabrication: sample a point on the surface together with a
/// multiplier, then solve the three stationarity equations for (u1,u2,u3).
pub fn fabricate(rng: &mut ChaCha8Rng, prec: Precision) -> Result<SeedData> {
    loop {
        let x1 = unit_point(rng, prec);
        let x2 = unit_point(rng, prec);
        let lam = unit_point(rng, prec);
        let s = x1.mul(&x1).add(&x2.mul(&x2));
        if s.abs().to_f64() < 0.5 {
            continue;
        }
        // x3 with x3^4 = s^3 via two successive square roots
        let s3 = s.mul(&s).mul(&s);
        let x3 = s3.sqrt().sqrt();
        let s2 = s.mul(&s);
        let three = CPoint::from_f64(3.0, 0.0, prec);
        let two = CPoint::from_f64(2.0, 0.0, prec);
        // u1 = x1 - 3 x1 lam s^2, u2 likewise, u3 = x3 + 2 lam x3^3
        let u1 = x1.sub(&three.mul(&x1).mul(&lam).mul(&s2));
        let u2 = x2.sub(&three.mul(&x2).mul(&lam).mul(&s2));
        let x3c = x3.mul(&x3).mul(&x3);
        let u3 = x3.add(&two.mul(&lam).mul(&x3c));
        return Ok(SeedData {
            z: vec![u1, u2, u3],
            solutions: vec![vec![x1, x2, x3, lam]],
        });
    }
}

pub fn instantiate(rng: &mut ChaCha8Rng, prec: Precision) -> Result<Problem> {
    Ok(Problem {
        name: "ed-surface".to_string(),
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
    fn fabricated_seed_satisfies_all_equations() {
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
    fn expected_group_order_is_1152() {
        assert_eq!(expected().order, Some(1152));
    }
}
