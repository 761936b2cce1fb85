//! Five-point relative pose: the rotation between two calibrated cameras
//! seen through five image-point correspondences. Translation is eliminated
//! from the epipolar constraints, leaving three cubic determinant equations
//! in the rational rotation coordinates (x, y, z); the denominator
//! 1 + x^2 + y^2 + z^2 is dropped since it only rescales each column.
//! Generically 20 solutions: 10 essential matrices, each splitting into a
//! twisted pair of poses.

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rug::Float;

use crate::error::{Error, Result};
use crate::expr::{Dag, ExprId, ParametricSystem};
use crate::interval::{CPoint, CVec, Precision};
use crate::permgroup::{intersect_alternating, wreath_imprimitive};

use super::{unit_real, Expected, Problem, SeedData};

/// Parameter layout per correspondence i (1-based): y1a_i, y1b_i, y2a_i,
/// y2b_i — four coordinates for the pair of image points.
pub fn build_system() -> Result<ParametricSystem> {
    let mut dag = Dag::new();
    let x = dag.var(0);
    let y = dag.var(1);
    let z = dag.var(2);
    let one = dag.one();
    let two = dag.integer(2);

    let xx = dag.pow(x, 2);
    let yy = dag.pow(y, 2);
    let zz = dag.pow(z, 2);
    let xy = dag.mul(x, y);
    let xz = dag.mul(x, z);
    let yz = dag.mul(y, z);
    // numerator of the rational rotation, row-major
    let mut r = [[one; 3]; 3];
    r[0][0] = {
        let t = dag.sub(xx, yy);
        let t = dag.sub(t, zz);
        dag.add(t, one)
    };
    r[0][1] = {
        let t = dag.sub(xy, z);
        dag.mul(two, t)
    };
    r[0][2] = {
        let t = dag.add(xz, y);
        dag.mul(two, t)
    };
    r[1][0] = {
        let t = dag.add(xy, z);
        dag.mul(two, t)
    };
    r[1][1] = {
        let t = dag.sub(yy, xx);
        let t = dag.sub(t, zz);
        dag.add(t, one)
    };
    r[1][2] = {
        let t = dag.sub(yz, x);
        dag.mul(two, t)
    };
    r[2][0] = {
        let t = dag.sub(xz, y);
        dag.mul(two, t)
    };
    r[2][1] = {
        let t = dag.add(yz, x);
        dag.mul(two, t)
    };
    r[2][2] = {
        let t = dag.add(zz, one);
        let t = dag.sub(t, xx);
        dag.sub(t, yy)
    };

    // m_i = y2_i x (R y1_i) with homogeneous image points (a, b, 1)
    let mut m: Vec<[ExprId; 3]> = Vec::new();
    for i in 0..5u32 {
        let y1a = dag.param(4 * i);
        let y1b = dag.param(4 * i + 1);
        let y2a = dag.param(4 * i + 2);
        let y2b = dag.param(4 * i + 3);
        let y1 = [y1a, y1b, one];
        let y2 = [y2a, y2b, one];
        let mut w = [one; 3];
        for row in 0..3 {
            let mut acc = dag.zero();
            for col in 0..3 {
                let p = dag.mul(r[row][col], y1[col]);
                acc = dag.add(acc, p);
            }
            w[row] = acc;
        }
        let cross = |dag: &mut Dag, a: ExprId, b: ExprId, c: ExprId, d: ExprId| {
            let p = dag.mul(a, b);
            let q = dag.mul(c, d);
            dag.sub(p, q)
        };
        m.push([
            cross(&mut dag, y2[1], w[2], y2[2], w[1]),
            cross(&mut dag, y2[2], w[0], y2[0], w[2]),
            cross(&mut dag, y2[0], w[1], y2[1], w[0]),
        ]);
    }

    // det [m_1 | m_2 | m_i] = 0 for i = 3, 4, 5
    let mut eqs = Vec::new();
    for i in 2..5 {
        let (a, b, c) = (m[0], m[1], m[i]);
        let mut det = dag.zero();
        for (r0, r1, r2, sign) in [
            (0, 1, 2, 1i64),
            (1, 2, 0, 1),
            (2, 0, 1, 1),
            (2, 1, 0, -1),
            (0, 2, 1, -1),
            (1, 0, 2, -1),
        ] {
            let t = dag.mul(a[r0], b[r1]);
            let t = dag.mul(t, c[r2]);
            let t = if sign > 0 { t } else { dag.neg(t) };
            det = dag.add(det, t);
        }
        eqs.push(det);
    }

    let mut param_names = Vec::new();
    for i in 1..=5 {
        for tag in ["y1a", "y1b", "y2a", "y2b"] {
            param_names.push(format!("{tag}{i}"));
        }
    }
    ParametricSystem::new(
        "5pp",
        dag,
        eqs,
        vec!["x".into(), "y".into(), "z".into()],
        param_names,
    )
}

pub fn expected() -> Expected {
    let group = intersect_alternating(&wreath_imprimitive(2, 10));
    Expected {
        k: Some(20),
        order: Some(group.order()),
        gw: None,
        group: Some(group),
    }
}

fn rotate(r: &[[Float; 3]; 3], p: &[Float; 3], bits: u32) -> [Float; 3] {
    let mut out = [Float::new(bits), Float::new(bits), Float::new(bits)];
    for (row, o) in out.iter_mut().enumerate() {
        for col in 0..3 {
            *o += Float::with_val(bits, &r[row][col] * &p[col]);
        }
    }
    out
}

/// Forward fabrication from a real two-camera scene: sample rotation
/// coordinates, a translation, and five space points in front of camera 1,
/// then project into both views.
pub fn fabricate(rng: &mut ChaCha8Rng, prec: Precision) -> Result<SeedData> {
    let bits = prec.bits();
    'resample: for _ in 0..64 {
        let cx = unit_real(rng, prec);
        let cy = unit_real(rng, prec);
        let cz = unit_real(rng, prec);
        let denom = Float::with_val(
            bits,
            Float::with_val(bits, &cx * &cx)
                + Float::with_val(bits, &cy * &cy)
                + Float::with_val(bits, &cz * &cz)
                + 1i32,
        );
        if denom.to_f64() < 1.01 {
            // nearly the identity rotation: poorly conditioned scene
            continue 'resample;
        }
        let e = |v: Float| Float::with_val(bits, v / &denom);
        let f = |v: f64| Float::with_val(bits, v);
        let rot: [[Float; 3]; 3] = [
            [
                e(Float::with_val(bits, &cx * &cx) - Float::with_val(bits, &cy * &cy)
                    - Float::with_val(bits, &cz * &cz)
                    + 1i32),
                e(Float::with_val(bits, &cx * &cy) * f(2.0) - Float::with_val(bits, &cz * 2i32)),
                e(Float::with_val(bits, &cx * &cz) * f(2.0) + Float::with_val(bits, &cy * 2i32)),
            ],
            [
                e(Float::with_val(bits, &cx * &cy) * f(2.0) + Float::with_val(bits, &cz * 2i32)),
                e(Float::with_val(bits, &cy * &cy) - Float::with_val(bits, &cx * &cx)
                    - Float::with_val(bits, &cz * &cz)
                    + 1i32),
                e(Float::with_val(bits, &cy * &cz) * f(2.0) - Float::with_val(bits, &cx * 2i32)),
            ],
            [
                e(Float::with_val(bits, &cx * &cz) * f(2.0) - Float::with_val(bits, &cy * 2i32)),
                e(Float::with_val(bits, &cy * &cz) * f(2.0) + Float::with_val(bits, &cx * 2i32)),
                e(Float::with_val(bits, &cz * &cz) - Float::with_val(bits, &cx * &cx)
                    - Float::with_val(bits, &cy * &cy)
                    + 1i32),
            ],
        ];
        let t = [
            unit_real(rng, prec),
            unit_real(rng, prec),
            unit_real(rng, prec),
        ];
        let mut z: CVec = Vec::with_capacity(20);
        for _ in 0..5 {
            // space point in front of camera 1
            let p = [
                unit_real(rng, prec),
                unit_real(rng, prec),
                Float::with_val(bits, unit_real(rng, prec) + 3i32),
            ];
            let q0 = rotate(&rot, &p, bits);
            let q = [
                Float::with_val(bits, &q0[0] + &t[0]),
                Float::with_val(bits, &q0[1] + &t[1]),
                Float::with_val(bits, &q0[2] + &t[2]),
            ];
            if q[2].clone().abs().to_f64() < 0.3 {
                continue 'resample;
            }
            let real = |v: Float| CPoint {
                re: v,
                im: Float::new(bits),
            };
            z.push(real(Float::with_val(bits, &p[0] / &p[2])));
            z.push(real(Float::with_val(bits, &p[1] / &p[2])));
            z.push(real(Float::with_val(bits, &q[0] / &q[2])));
            z.push(real(Float::with_val(bits, &q[1] / &q[2])));
        }
        let real = |v: Float| CPoint {
            re: v,
            im: Float::new(bits),
        };
        return Ok(SeedData {
            z,
            solutions: vec![vec![real(cx), real(cy), real(cz)]],
        });
    }
    Err(Error::CayleyDegenerate)
}

pub fn instantiate(rng: &mut ChaCha8Rng, prec: Precision) -> Result<Problem> {
    Ok(Problem {
        name: "5pp".to_string(),
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
    fn fabricated_seed_satisfies_determinant_equations() {
        let sys = Arc::new(build_system().unwrap());
        for seed_id in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_id);
            let seed = fabricate(&mut rng, P).unwrap();
            let inst = SystemInstance::at_point_params(sys.clone(), &seed.z).unwrap();
            let res = inst.eval_point(&seed.solutions[0], P).unwrap();
            for r in &res {
                assert!(r.abs().to_f64() < 1e-55, "residual {}", r.abs());
            }
        }
    }

    #[test]
    fn expected_group_order_matches_pairs_of_ten() {
        let e = expected();
        assert_eq!(e.order, Some(1_857_945_600));
        assert_eq!(e.k, Some(20));
        let g = e.group.unwrap();
        assert!(g.all_generators_even());
        assert_eq!(g.minimal_blocks((0, 1)).unwrap().len(), 10);
    }
}
