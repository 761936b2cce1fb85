//! Univariate coefficient families: generic, even-degree-terms,
//! even-degree-terms with squared coefficients, and palindromic.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{Dag, ParametricSystem};
use crate::interval::{CPoint, CVec, Precision};
use crate::permgroup::{intersect_alternating, symmetric, wreath_imprimitive, PermGroup};

use super::{unit_point, Expected, SeedData};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// All coefficients free.
    Generic,
    /// Only even-degree terms.
    EvenTerms,
    /// Even-degree terms with squared coefficients.
    EvenSquared,
    /// Coefficients symmetric under reversal.
    Palindrome,
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Generic => "generic",
            Family::EvenTerms => "even",
            Family::EvenSquared => "evensq",
            Family::Palindrome => "palin",
        }
    }
}

fn check_degree(family: Family, degree: usize) -> Result<()> {
    let ok_range = (3..=8).contains(&degree);
    let parity_ok = family == Family::Generic || degree % 2 == 0;
    if !ok_range {
        return Err(Error::Other(format!(
            "family degree {degree} outside the supported range 3..=8"
        )));
    }
    if !parity_ok {
        return Err(Error::UnsupportedDegreeParity {
            family: family.tag().to_string(),
            degree,
        });
    }
    Ok(())
}

/// Number of free coefficient parameters.
pub fn n_coeffs(family: Family, degree: usize) -> usize {
    match family {
        Family::Generic => degree + 1,
        Family::EvenTerms | Family::EvenSquared | Family::Palindrome => degree / 2 + 1,
    }
}

pub fn build_system(family: Family, degree: usize) -> Result<ParametricSystem> {
    check_degree(family, degree)?;
    let m = n_coeffs(family, degree);
    let mut dag = Dag::new();
    let x = dag.var(0);
    let params: Vec<_> = (0..m as u32).map(|j| dag.param(j)).collect();
    let mut eq = dag.zero();
    match family {
        Family::Generic => {
            for (i, &c) in params.iter().enumerate() {
                let xp = dag.pow(x, i as u32);
                let term = dag.mul(c, xp);
                eq = dag.add(eq, term);
            }
        }
        Family::EvenTerms => {
            for (i, &c) in params.iter().enumerate() {
                let xp = dag.pow(x, 2 * i as u32);
                let term = dag.mul(c, xp);
                eq = dag.add(eq, term);
            }
        }
        Family::EvenSquared => {
            for (i, &c) in params.iter().enumerate() {
                let xp = dag.pow(x, i as u32);
                let cx = dag.mul(c, xp);
                let term = dag.pow(cx, 2);
                eq = dag.add(eq, term);
            }
        }
        Family::Palindrome => {
            let b = degree / 2;
            for (i, &c) in params.iter().enumerate() {
                let term = if i == b {
                    let xp = dag.pow(x, b as u32);
                    dag.mul(c, xp)
                } else {
                    let lo = dag.pow(x, i as u32);
                    let hi = dag.pow(x, (degree - i) as u32);
                    let s = dag.add(lo, hi);
                    dag.mul(c, s)
                };
                eq = dag.add(eq, term);
            }
        }
    }
    let param_names: Vec<String> = (0..m).map(|i| format!("c{i}")).collect();
    ParametricSystem::new(
        &format!("{}:{degree}", family.tag()),
        dag,
        vec![eq],
        vec!["x".into()],
        param_names,
    )
}

/// Expected invariants per family (group targets on the root labels).
pub fn expected(family: Family, degree: usize) -> Expected {
    let b = degree / 2;
    let (group, gw): (Option<PermGroup>, Option<u128>) = match family {
        Family::Generic => {
            let gw = match degree {
                3 | 4 => Some(3),
                5 => Some(5),
                6 => Some(6),
                7 => Some(7),
                _ => None,
            };
            (Some(symmetric(degree)), gw)
        }
        Family::EvenTerms | Family::Palindrome => (
            Some(wreath_imprimitive(2, b)),
            Some(if degree == 4 { 2 } else { 3 }),
        ),
        Family::EvenSquared => (
            Some(intersect_alternating(&wreath_imprimitive(2, b))),
            Some(if degree == 4 { 2 } else { 3 }),
        ),
    };
    let order = group.as_ref().map(|g| g.order());
    Expected {
        k: Some(degree),
        order,
        gw,
        group,
    }
}

/// Forward fabrication: sample every coefficient but the constant one and a
/// root location on the unit circle, then solve for the remaining
/// coefficient so the sampled root lies on the curve.
pub fn fabricate(
    family: Family,
    degree: usize,
    rng: &mut ChaCha8Rng,
    prec: Precision,
) -> Result<SeedData> {
    check_degree(family, degree)?;
    let m = n_coeffs(family, degree);
    loop {
        let x0 = unit_point(rng, prec);
        let higher: Vec<CPoint> = (1..m).map(|_| unit_point(rng, prec)).collect();
        let pow = |k: usize| -> CPoint {
            let mut p = CPoint::one(prec);
            for _ in 0..k {
                p = p.mul(&x0);
            }
            p
        };
        let c0 = match family {
            Family::Generic => {
                let mut s = CPoint::zero(prec);
                for (i, c) in higher.iter().enumerate() {
                    s = s.add(&c.mul(&pow(i + 1)));
                }
                s.neg()
            }
            Family::EvenTerms => {
                let mut s = CPoint::zero(prec);
                for (i, c) in higher.iter().enumerate() {
                    s = s.add(&c.mul(&pow(2 * (i + 1))));
                }
                s.neg()
            }
            Family::EvenSquared => {
                // constant term is squared: solve c0^2 = -sum
                let mut s = CPoint::zero(prec);
                for (i, c) in higher.iter().enumerate() {
                    s = s.add(&c.mul(c).mul(&pow(2 * (i + 1))));
                }
                s.neg().sqrt()
            }
            Family::Palindrome => {
                let b = degree / 2;
                let mut s = CPoint::zero(prec);
                for (i, c) in higher.iter().enumerate() {
                    let i = i + 1;
                    let basis = if i == b {
                        pow(b)
                    } else {
                        pow(i).add(&pow(degree - i))
                    };
                    s = s.add(&c.mul(&basis));
                }
                // c0 multiplies 1 + x^degree; resample if nearly zero
                let denom = CPoint::one(prec).add(&pow(degree));
                if denom.abs().to_f64() < 0.5 {
                    continue;
                }
                s.neg().div(&denom)
            }
        };
        let mut z: CVec = Vec::with_capacity(m);
        z.push(c0);
        z.extend(higher);
        return Ok(SeedData {
            z,
            solutions: vec![vec![x0]],
        });
    }
}
