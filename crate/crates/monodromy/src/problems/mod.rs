//! Built-in problem library: parametrized systems with forward-fabricated
//! start parameters and certified-seed candidates, plus the invariants
//! (fiber size, group order, Galois width) each problem is expected to
//! reproduce.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rug::Float;

use crate::error::{Error, Result};
use crate::expr::ParametricSystem;
use crate::fiber_graph::{
    build_explicit_graph, run_monodromy, run_on_graph, GraphConfig, RunReport,
};
use crate::interval::{CPoint, CVec, Precision};
use crate::permgroup::PermGroup;
use crate::tracker::TrackerConfig;

pub mod belyi;
pub mod ed;
pub mod file;
pub mod fivepp;
pub mod lines27;
pub mod p3p;
pub mod roots;
pub mod univariate;

pub use file::{load_problem_file, load_problem_source, problem_file_source, write_problem_file};
pub use univariate::Family;

/// Start parameters together with candidate fiber points above them.
#[derive(Clone, Debug)]
pub struct SeedData {
    /// Base parameter values.
    pub z: CVec,
    /// Candidate solutions at `z` (each of length `n_vars`), to be
    /// certified before use.
    pub solutions: Vec<CVec>,
}

/// Known invariants of a problem, used for reporting and acceptance checks.
/// `None` means the quantity is not pinned for this problem.
#[derive(Clone, Debug)]
pub struct Expected {
    pub k: Option<usize>,
    pub order: Option<u128>,
    pub gw: Option<u128>,
    pub group: Option<PermGroup>,
}

impl Expected {
    pub fn unknown() -> Expected {
        Expected {
            k: None,
            order: None,
            gw: None,
            group: None,
        }
    }
}

/// A fixed homotopy-graph layout in parameter space, for problems that
/// ship their own vertex placement instead of random unit-circle nodes.
#[derive(Clone, Debug)]
pub struct ExplicitGraphSpec {
    /// Parameter values per vertex; vertex 0 is the base and must match
    /// the seed parameters.
    pub vertices: Vec<CVec>,
    pub edges: Vec<(usize, usize)>,
}

/// A fully instantiated problem: system, start data, and expectations.
pub struct Problem {
    pub name: String,
    pub system: Arc<ParametricSystem>,
    pub seed: SeedData,
    pub expected: Expected,
    pub graph: Option<ExplicitGraphSpec>,
}

impl Problem {
    /// Runs the monodromy pipeline, using the problem's own graph layout
    /// when it ships one and the complete random graph otherwise. The
    /// problem's expected fiber size is surfaced as a report warning on
    /// mismatch unless the config already pins one.
    pub fn run(
        &self,
        graph_cfg: &GraphConfig,
        tracker_cfg: &TrackerConfig,
        prec: Precision,
    ) -> Result<RunReport> {
        let mut cfg = graph_cfg.clone();
        if cfg.expected_k.is_none() {
            cfg.expected_k = self.expected.k;
        }
        match &self.graph {
            Some(spec) => {
                let mut graph = build_explicit_graph(
                    &self.system,
                    &spec.vertices,
                    &spec.edges,
                    &self.seed.solutions,
                    &tracker_cfg.certify,
                    prec,
                )?;
                run_on_graph(
                    &self.name,
                    &self.system,
                    &mut graph,
                    &cfg,
                    tracker_cfg,
                    prec,
                )
            }
            None => run_monodromy(
                &self.name,
                &self.system,
                &self.seed.z,
                &self.seed.solutions,
                &cfg,
                tracker_cfg,
                prec,
            ),
        }
    }
}

/// Instantiates a built-in problem by name. Recognized names:
/// `generic:D`, `even:D`, `evensq:D`, `palin:D` (univariate families,
/// 3 <= D <= 8), `belyi-m23`, `cubic-27lines`, `ed-surface`, `p3p`, `5pp`.
pub fn instantiate(name: &str, rng: &mut ChaCha8Rng, prec: Precision) -> Result<Problem> {
    if let Some((fam, deg)) = parse_family_name(name) {
        let system = Arc::new(univariate::build_system(fam, deg)?);
        let seed = univariate::fabricate(fam, deg, rng, prec)?;
        return Ok(Problem {
            name: name.to_string(),
            system,
            seed,
            expected: univariate::expected(fam, deg),
            graph: None,
        });
    }
    match name {
        "belyi-m23" => belyi::instantiate(prec),
        "cubic-27lines" => lines27::instantiate(rng, prec),
        "ed-surface" => ed::instantiate(rng, prec),
        "p3p" => p3p::instantiate(rng, prec),
        "5pp" => fivepp::instantiate(rng, prec),
        _ => Err(Error::Other(format!("unknown problem `{name}`"))),
    }
}

/// Returns all built-in problem names (degree-parametrized families listed
/// at representative degrees).
pub fn builtin_names() -> Vec<String> {
    let mut names = Vec::new();
    for d in 3..=8 {
        names.push(format!("generic:{d}"));
    }
    for d in [4, 6, 8] {
        for f in ["even", "evensq", "palin"] {
            names.push(format!("{f}:{d}"));
        }
    }
    for n in ["belyi-m23", "cubic-27lines", "ed-surface", "p3p", "5pp"] {
        names.push(n.to_string());
    }
    names
}

fn parse_family_name(name: &str) -> Option<(Family, usize)> {
    let (fam, deg) = name.split_once(':')?;
    let fam = match fam {
        "generic" => Family::Generic,
        "even" => Family::EvenTerms,
        "evensq" => Family::EvenSquared,
        "palin" => Family::Palindrome,
        _ => return None,
    };
    deg.parse().ok().map(|d| (fam, d))
}

/// Samples a point on the complex unit circle at full working precision.
pub(crate) fn unit_point(rng: &mut ChaCha8Rng, prec: Precision) -> CPoint {
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    let bits = prec.bits();
    let (sin, cos) = Float::with_val(bits, theta).sin_cos(Float::new(bits));
    CPoint { re: cos, im: sin }
}

/// Samples a real number uniformly from [-1, 1].
pub(crate) fn unit_real(rng: &mut ChaCha8Rng, prec: Precision) -> Float {
    Float::with_val(prec.bits(), rng.gen::<f64>() * 2.0 - 1.0)
}
