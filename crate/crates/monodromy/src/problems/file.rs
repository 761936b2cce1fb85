//! Problem-file ingestion and emission. Files follow the text grammar of
//! the expression parser (`vars`/`params`/`eqs`/`seed_params`/
//! `seed_solution` sections); loading certifies the supplied seed before
//! accepting it. The printer emits systems whose constants are real
//! rationals; reloading a printed file reproduces the equations with an
//! identical structural hash.

use std::path::Path;
use std::sync::Arc;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::certify::{certify_seed, CertifyConfig};
use crate::error::{Error, Result};
use crate::expr::{parse_problem, Dag, ExprId, Node, ParametricSystem, SystemInstance};
use crate::interval::{CPoint, CVec, Precision};

use super::{Expected, Problem, SeedData};

/// Loads a problem file, converts its seed to working precision, and
/// certifies the seed solution on ingest.
pub fn load_problem_file(path: &Path, prec: Precision) -> Result<Problem> {
    let src = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".to_string());
    load_problem_source(&name, &src, prec)
}

/// Same as [`load_problem_file`] but from in-memory source text.
pub fn load_problem_source(name: &str, src: &str, prec: Precision) -> Result<Problem> {
    let parsed = parse_problem(name, src)?;
    let seed_params = parsed
        .seed_params
        .ok_or_else(|| Error::Other("problem file lacks a seed_params section".into()))?;
    let seed_solution = parsed
        .seed_solution
        .ok_or_else(|| Error::Other("problem file lacks a seed_solution section".into()))?;
    let system = Arc::new(parsed.system);
    let to_cvec = |nums: &[(Rational, Rational)]| -> CVec {
        nums.iter()
            .map(|(re, im)| CPoint {
                re: crate::interval::round_nearest(prec, re),
                im: crate::interval::round_nearest(prec, im),
            })
            .collect()
    };
    let z = to_cvec(&seed_params);
    let x0 = to_cvec(&seed_solution);
    let inst = SystemInstance::at_point_params(system.clone(), &z)?;
    let cfg = CertifyConfig::default();
    let cp = certify_seed(&inst, x0.clone(), &cfg, prec)
        .map_err(|e| Error::SeedCertificationFailed(e.to_string()))?;
    // refinement must stay local: a supplied seed that converges to some
    // distant root was not on the variety
    let drift = crate::interval::vec_norm(&crate::interval::vec_sub(&x0, &cp.x));
    if drift > crate::interval::round_up(prec, &cfg.initial_r) {
        return Err(Error::SeedCertificationFailed(format!(
            "seed lies at distance {drift:.3e} from the certified root"
        )));
    }
    Ok(Problem {
        name: name.to_string(),
        system,
        seed: SeedData {
            z,
            solutions: vec![x0],
        },
        expected: Expected::unknown(),
        graph: None,
    })
}

/// Renders a system (plus optional seed data) as problem-file source.
/// Only real-rational constants are expressible in the grammar; systems
/// with complex or interval-with-imaginary-part constants are rejected.
pub fn problem_file_source(system: &ParametricSystem, seed: Option<&SeedData>) -> Result<String> {
    let mut out = String::new();
    out.push_str("vars ");
    out.push_str(&system.var_names().join(" "));
    out.push_str(";\n");
    if system.n_params() > 0 {
        out.push_str("params ");
        out.push_str(&system.param_names().join(" "));
        out.push_str(";\n");
    }
    out.push_str("eqs\n");
    for &eq in system.equations() {
        out.push_str("  ");
        out.push_str(&print_expr(system.dag(), eq, system, Prec::Add)?);
        out.push_str(";\n");
    }
    if let Some(seed) = seed {
        out.push_str("seed_params ");
        out.push_str(&complex_list(&seed.z)?);
        out.push_str(";\n");
        if seed.solutions.len() != 1 {
            return Err(Error::Other(
                "problem files carry exactly one seed solution".into(),
            ));
        }
        out.push_str("seed_solution ");
        out.push_str(&complex_list(&seed.solutions[0])?);
        out.push_str(";\n");
    }
    Ok(out)
}

/// Writes problem-file source to disk.
pub fn write_problem_file(
    path: &Path,
    system: &ParametricSystem,
    seed: Option<&SeedData>,
) -> Result<()> {
    let src = problem_file_source(system, seed)?;
    std::fs::write(path, src)?;
    Ok(())
}

/// Exact finite decimal for rationals with denominator 2^a 5^b.
fn exact_decimal(q: &Rational) -> Option<String> {
    let mut den = q.denom().clone();
    let mut twos = 0u32;
    while den.is_divisible(&Integer::from(2)) {
        den /= 2;
        twos += 1;
    }
    let mut fives = 0u32;
    while den.is_divisible(&Integer::from(5)) {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return None;
    }
    let shift = twos.max(fives);
    let scaled = Rational::from(q * Rational::from(Integer::from(10).pow(shift)));
    debug_assert!(scaled.is_integer());
    let digits = scaled.numer().to_string();
    if shift == 0 {
        return Some(digits);
    }
    let (sign, digits) = match digits.strip_prefix('-') {
        Some(d) => ("-", d),
        None => ("", digits.as_str()),
    };
    let padded = format!("{digits:0>width$}", width = shift as usize + 1);
    let split = padded.len() - shift as usize;
    Some(format!("{sign}{}.{}", &padded[..split], &padded[split..]))
}

/// A real rational as expression text: an exact decimal when one exists,
/// otherwise a parenthesized fraction (which reparses to a division node
/// rather than a constant, so only decimals preserve structural identity).
fn rational_text(q: &Rational) -> String {
    match exact_decimal(q) {
        Some(d) => d,
        None => format!("({}/{})", q.numer(), q.denom()),
    }
}

fn complex_list(v: &CVec) -> Result<String> {
    let parts: Vec<String> = v
        .iter()
        .map(|p| {
            // binary floats are exactly representable as finite decimals
            let re = p.re.to_rational().ok_or(Error::InvalidInterval)?;
            let im = p.im.to_rational().ok_or(Error::InvalidInterval)?;
            let re_s = exact_decimal(&re).expect("binary rational has a finite decimal");
            if im.cmp0() == std::cmp::Ordering::Equal {
                return Ok(re_s);
            }
            let im_abs = exact_decimal(&Rational::from(im.clone().abs()))
                .expect("binary rational has a finite decimal");
            let sign = if im.cmp0() == std::cmp::Ordering::Less {
                '-'
            } else {
                '+'
            };
            Ok(format!("{re_s}{sign}{im_abs}i"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.join(" "))
}

/// Precedence levels of the expression grammar, loosest first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Add,
    Mul,
    Factor,
    Primary,
}

fn print_expr(dag: &Dag, id: ExprId, sys: &ParametricSystem, ctx: Prec) -> Result<String> {
    let (text, prec) = match dag.node(id) {
        Node::ConstRat(re, im) => {
            if im.cmp0() != std::cmp::Ordering::Equal {
                return Err(Error::Other(
                    "complex constants are not expressible in problem files".into(),
                ));
            }
            let neg = re.cmp0() == std::cmp::Ordering::Less;
            (
                rational_text(re),
                if neg { Prec::Factor } else { Prec::Primary },
            )
        }
        Node::ConstInterval {
            re_lo,
            re_hi,
            im_lo,
            im_hi,
        } => {
            if im_lo.cmp0() != std::cmp::Ordering::Equal
                || im_hi.cmp0() != std::cmp::Ordering::Equal
            {
                return Err(Error::Other(
                    "imaginary interval constants are not expressible in problem files".into(),
                ));
            }
            let lo = exact_decimal(re_lo).ok_or_else(|| {
                Error::Other("interval endpoint has no finite decimal form".into())
            })?;
            let hi = exact_decimal(re_hi).ok_or_else(|| {
                Error::Other("interval endpoint has no finite decimal form".into())
            })?;
            (format!("[{lo},{hi}]"), Prec::Primary)
        }
        Node::Var(j) => (sys.var_names()[*j as usize].clone(), Prec::Primary),
        Node::Param(j) => (sys.param_names()[*j as usize].clone(), Prec::Primary),
        Node::Neg(a) => (
            format!("-{}", print_expr(dag, *a, sys, Prec::Factor)?),
            Prec::Factor,
        ),
        Node::Add(a, b) => (
            format!(
                "{} + {}",
                print_expr(dag, *a, sys, Prec::Add)?,
                print_expr(dag, *b, sys, Prec::Mul)?
            ),
            Prec::Add,
        ),
        Node::Sub(a, b) => (
            format!(
                "{} - {}",
                print_expr(dag, *a, sys, Prec::Add)?,
                print_expr(dag, *b, sys, Prec::Mul)?
            ),
            Prec::Add,
        ),
        Node::Mul(a, b) => (
            format!(
                "{}*{}",
                print_expr(dag, *a, sys, Prec::Mul)?,
                print_expr(dag, *b, sys, Prec::Factor)?
            ),
            Prec::Mul,
        ),
        Node::Div(a, b) => (
            format!(
                "{}/{}",
                print_expr(dag, *a, sys, Prec::Mul)?,
                print_expr(dag, *b, sys, Prec::Factor)?
            ),
            Prec::Mul,
        ),
        Node::Pow(a, k) => (
            format!("{}^{k}", print_expr(dag, *a, sys, Prec::Primary)?),
            Prec::Factor,
        ),
    };
    if prec < ctx {
        Ok(format!("({text})"))
    } else {
        Ok(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::univariate::{build_system, fabricate, Family};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const P: Precision = Precision::DEFAULT;

    #[test]
    fn valid_seed_loads_and_certifies() {
        // x^2 + c1 x + c0 with (c0, c1) = (2, -3) and root x = 1
        let src = "vars x; params c0 c1;\n\
                   eqs x^2 + c1*x + c0;\n\
                   seed_params 2 -3;\n\
                   seed_solution 1;\n";
        let prob = load_problem_source("quad", src, P).unwrap();
        assert_eq!(prob.system.n_vars(), 1);
        assert_eq!(prob.seed.solutions.len(), 1);
    }

    #[test]
    fn seed_off_variety_is_rejected() {
        let src = "vars x; params c0 c1;\n\
                   eqs x^2 + c1*x + c0;\n\
                   seed_params 2 -3;\n\
                   seed_solution 5;\n";
        assert!(matches!(
            load_problem_source("quad", src, P),
            Err(Error::SeedCertificationFailed(_))
        ));
    }

    #[test]
    fn missing_seed_sections_are_rejected() {
        let src = "vars x; eqs x - 1;";
        assert!(load_problem_source("noseed", src, P).is_err());
    }

    #[test]
    fn univariate_families_round_trip_with_identical_hash() {
        for (fam, deg) in [
            (Family::Generic, 3),
            (Family::Generic, 5),
            (Family::EvenTerms, 6),
            (Family::EvenSquared, 4),
            (Family::Palindrome, 8),
        ] {
            let sys = build_system(fam, deg).unwrap();
            let src = problem_file_source(&sys, None).unwrap();
            let reparsed = parse_problem("rt", &src).unwrap().system;
            assert_eq!(
                sys.fingerprint(),
                reparsed.fingerprint(),
                "{fam:?} deg {deg}:\n{src}"
            );
            // and printing is a fixed point
            let src2 = problem_file_source(&reparsed, None).unwrap();
            assert_eq!(src, src2);
        }
    }

    #[test]
    fn round_trip_preserves_seed_values() {
        let sys = build_system(Family::Generic, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let seed = fabricate(Family::Generic, 4, &mut rng, P).unwrap();
        let src = problem_file_source(&sys, Some(&seed)).unwrap();
        let prob = load_problem_source("rt", &src, P).unwrap();
        for (a, b) in seed.z.iter().zip(&prob.seed.z) {
            assert_eq!(a.re, b.re);
            assert_eq!(a.im, b.im);
        }
    }

    #[test]
    fn exact_decimals() {
        assert_eq!(exact_decimal(&Rational::from(5)).unwrap(), "5");
        assert_eq!(exact_decimal(&Rational::from((1, 8))).unwrap(), "0.125");
        assert_eq!(exact_decimal(&Rational::from((-3, 4))).unwrap(), "-0.75");
        assert_eq!(exact_decimal(&Rational::from((1, 3))), None);
    }
}
