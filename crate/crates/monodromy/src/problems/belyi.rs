//! Elkies' degree-23 Belyi polynomial with Mathieu monodromy group M23.
//! The single equation is f2(x)^2 f3(x) f4(x)^4 - tau * z = 0, where the
//! fi are polynomials in x whose coefficients are integer cubics in an
//! algebraic constant g (a root of g^4 + g^3 + 9g^2 - 10g + 8), and tau
//! normalizes the branch points to z = 0 and z = 1. The constant enters
//! as a tight interval enclosure of g, so every certificate holds for all
//! values in the enclosure simultaneously. The problem ships a bowtie
//! homotopy graph whose two triangles encircle the branch points, based
//! at z = 1/2.

use std::sync::Arc;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::Result;
use crate::expr::{Dag, ExprId, ParametricSystem, SystemInstance};
use crate::interval::{CPoint, CVec, Precision};

use super::{roots::univariate_roots, Expected, ExplicitGraphSpec, Problem, SeedData};

/// |M23|.
pub const M23_ORDER: u128 = 10_200_960;

/// Radius of the enclosure of the algebraic constant.
fn g_radius() -> Rational {
    Rational::from((Integer::from(1), Integer::from(10).pow(30)))
}

/// The enclosure of g: each part is a published decimal with radius 1e-30.
fn g_enclosure() -> (Rational, Rational, Rational, Rational) {
    let r = g_radius();
    let re = Rational::from((
        Integer::from_str_radix("549472304541888876273331", 10).unwrap(),
        Integer::from(10).pow(24),
    ));
    let im = Rational::from((
        Integer::from_str_radix("67565033576789561392800491", 10).unwrap(),
        Integer::from(10).pow(26),
    ));
    (
        Rational::from(&re - &r),
        Rational::from(&re + &r),
        Rational::from(&im - &r),
        Rational::from(&im + &r),
    )
}

/// c3 g^3 + c2 g^2 + c1 g + c0.
fn cubic_in_g(dag: &mut Dag, g: ExprId, c: [i64; 4]) -> ExprId {
    let mut acc = dag.integer(c[0]);
    let mut gp = g;
    for (k, &ck) in c.iter().enumerate().skip(1) {
        if k > 1 {
            gp = dag.mul(gp, g);
        }
        let cnode = dag.integer(ck);
        let term = dag.mul(cnode, gp);
        acc = dag.add(acc, term);
    }
    acc
}

/// sum coeffs[i] * x^pows[i].
fn poly_in_x(dag: &mut Dag, x: ExprId, terms: &[(ExprId, u32)]) -> ExprId {
    let mut acc = dag.zero();
    for &(c, p) in terms {
        let xp = dag.pow(x, p);
        let t = dag.mul(c, xp);
        acc = dag.add(acc, t);
    }
    acc
}

pub fn build_system() -> Result<ParametricSystem> {
    let mut dag = Dag::new();
    let x = dag.var(0);
    let z = dag.param(0);
    let (re_lo, re_hi, im_lo, im_hi) = g_enclosure();
    let g = dag.interval_const(re_lo, re_hi, im_lo, im_hi);

    // tau = (2^38 * 3^17 / 23^3) * (47323 g^3 - 1084897 g^2 + 7751 g - 711002)
    let tau_scale = Rational::from((
        Integer::from(2).pow(38) * Integer::from(3).pow(17),
        Integer::from(23).pow(3),
    ));
    let tau_cubic = cubic_in_g(&mut dag, g, [-711_002, 7751, -1_084_897, 47_323]);
    let tau = {
        let s = dag.rational(tau_scale, Rational::new());
        dag.mul(s, tau_cubic)
    };

    // f2 = (8g^3+16g^2-20g+20) x^2 - (7g^3+17g^2-7g+76) x
    //      + (-13g^3+25g^2-107g+596)
    let a2 = cubic_in_g(&mut dag, g, [20, -20, 16, 8]);
    let b2 = {
        let c = cubic_in_g(&mut dag, g, [76, -7, 17, 7]);
        dag.neg(c)
    };
    let c2 = cubic_in_g(&mut dag, g, [596, -107, 25, -13]);
    let f2 = poly_in_x(&mut dag, x, &[(a2, 2), (b2, 1), (c2, 0)]);

    // f3 = 8(31g^3+405g^2-459g+333) x^3 + (941g^3+1303g^2-1853g+1772) x
    //      + (85g^3-385g^2+395g-220)
    let a3 = {
        let c = cubic_in_g(&mut dag, g, [333, -459, 405, 31]);
        let eight = dag.integer(8);
        dag.mul(eight, c)
    };
    let b3 = cubic_in_g(&mut dag, g, [1772, -1853, 1303, 941]);
    let c3 = cubic_in_g(&mut dag, g, [-220, 395, -385, 85]);
    let f3 = poly_in_x(&mut dag, x, &[(a3, 3), (b3, 1), (c3, 0)]);

    // f4 = 32(4g^3-69g^2+74g-49) x^4 + 32(21g^3+53g^2-68g+58) x^3
    //      - 8(97g^3+95g^2-145g+148) x^2 + 8(41g^3-89g^2-g+140) x
    //      + (-123g^3+391g^2-93g+3228)
    let t32 = dag.integer(32);
    let t8 = dag.integer(8);
    let a4 = {
        let c = cubic_in_g(&mut dag, g, [-49, 74, -69, 4]);
        dag.mul(t32, c)
    };
    let b4 = {
        let c = cubic_in_g(&mut dag, g, [58, -68, 53, 21]);
        dag.mul(t32, c)
    };
    let c4 = {
        let c = cubic_in_g(&mut dag, g, [148, -145, 95, 97]);
        let s = dag.mul(t8, c);
        dag.neg(s)
    };
    let d4 = {
        let c = cubic_in_g(&mut dag, g, [140, -1, -89, 41]);
        dag.mul(t8, c)
    };
    let e4 = cubic_in_g(&mut dag, g, [3228, -93, 391, -123]);
    let f4 = poly_in_x(&mut dag, x, &[(a4, 4), (b4, 3), (c4, 2), (d4, 1), (e4, 0)]);

    // f2^2 f3 f4^4 - tau z  (same zero set as tau^{-1} f2^2 f3 f4^4 - z)
    let f2sq = dag.pow(f2, 2);
    let f4q = dag.pow(f4, 4);
    let prod = dag.mul(f2sq, f3);
    let prod = dag.mul(prod, f4q);
    let tz = dag.mul(tau, z);
    let eq = dag.sub(prod, tz);

    ParametricSystem::new(
        "belyi-m23",
        dag,
        vec![eq],
        vec!["x".into()],
        vec!["z".into()],
    )
}

/// The bowtie homotopy graph in the z-plane: two triangles sharing the
/// base vertex z = 1/2, encircling the branch points z = 0 and z = 1.
pub fn bowtie_graph(prec: Precision) -> ExplicitGraphSpec {
    let bits = prec.bits();
    let h = Float::with_val(bits, 3i32).sqrt() / 4i32; // sqrt(3)/4
    let q = |re: f64, im: &Float, sign: i32| -> CVec {
        vec![CPoint {
            re: Float::with_val(bits, re),
            im: Float::with_val(bits, im * sign),
        }]
    };
    let vertices = vec![
        q(0.5, &Float::new(bits), 0),
        q(-0.25, &h, 1),
        q(-0.25, &h, -1),
        q(1.25, &h, 1),
        q(1.25, &h, -1),
    ];
    let edges = vec![(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)];
    ExplicitGraphSpec { vertices, edges }
}

pub fn expected() -> Expected {
    Expected {
        k: Some(23),
        order: Some(M23_ORDER),
        gw: None,
        group: None,
    }
}

pub fn instantiate(prec: Precision) -> Result<Problem> {
    let system = Arc::new(build_system()?);
    let z = vec![CPoint::from_f64(0.5, 0.0, prec)];
    let inst = SystemInstance::at_point_params(system.clone(), &z)?;
    let solutions: Vec<CVec> = univariate_roots(&inst, 23, prec, 17)?
        .into_iter()
        .map(|r| vec![r])
        .collect();
    Ok(Problem {
        name: "belyi-m23".to_string(),
        system,
        seed: SeedData { z, solutions },
        expected: expected(),
        graph: Some(bowtie_graph(prec)),
    })
}
