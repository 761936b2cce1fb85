//! The homotopy graph: vertices carrying certified fiber registries, edges
//! carrying partial root correspondences filled in by certified tracking,
//! the saturation driver, and spanning-tree extraction of monodromy
//! generators.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::Serialize;

use crate::certify::{certify_seed, sharpen, CertifiedPoint, CertifyConfig};
use crate::error::{Error, Result};
use crate::expr::{Homotopy, ParametricSystem, PathSpec, SystemInstance};
use crate::interval::{CPoint, CVec, Precision};
use crate::permgroup::{galois_width, PermGroup, Permutation};
use crate::tracker::{track_correspondence, TrackerConfig};

/// Refinement-round cap of the box-matching loop.
pub const MATCH_ROUNDS: usize = 100;

/// Pass cap of the saturation driver (each pass either tracks something or
/// terminates, so this only guards against pathological inputs).
const SATURATION_PASS_CAP: usize = 10_000;

/// A parameter point together with the certified roots discovered there.
/// Registry enclosures are pairwise disjoint at all times.
#[derive(Clone, Debug)]
pub struct Vertex {
    pub id: usize,
    pub z: CVec,
    pub registry: Vec<CertifiedPoint>,
}

impl Vertex {
    pub fn instance(&self, system: &Arc<ParametricSystem>) -> Result<SystemInstance> {
        SystemInstance::at_point_params(system.clone(), &self.z)
    }
}

/// A path between two vertices with the partial injective correspondence
/// between their registries established by certified tracking.
#[derive(Clone, Debug)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub path: PathSpec,
    /// `corr[i] = j` means registry entry `i` of `u` tracks to entry `j`
    /// of `v`. Injective by construction; conflicts quarantine the edge.
    pub corr: BTreeMap<usize, usize>,
    pub quarantined: bool,
    pub failures: Vec<String>,
}

impl Edge {
    /// Total on `u`'s registry and surjective onto `v`'s.
    pub fn is_saturated(&self, ku: usize, kv: usize) -> bool {
        (0..ku).all(|i| self.corr.contains_key(&i))
            && (0..kv).all(|j| self.corr.values().any(|&w| w == j))
    }
}

#[derive(Clone, Debug)]
pub struct HomotopyGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub base: usize,
}

impl HomotopyGraph {
    /// Connectivity over edges accepted by the filter.
    pub fn connected<F: Fn(&Edge) -> bool>(&self, keep: F) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        seen[self.base] = true;
        let mut queue = vec![self.base];
        while let Some(u) = queue.pop() {
            for e in self.edges.iter().filter(|e| keep(e)) {
                for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                    if a == u && !seen[b] {
                        seen[b] = true;
                        queue.push(b);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Certified endpoint-to-fiber matching: alternately sharpen the candidate
/// and every overlapping registry entry until the candidate's box nests
/// with one entry (same unique root: a match) or is disjoint from all
/// entries (a genuinely new root: insert).
pub fn match_or_insert(
    f: &SystemInstance,
    registry: &mut Vec<CertifiedPoint>,
    p: CertifiedPoint,
    cfg: &CertifyConfig,
    prec: Precision,
) -> Result<(usize, bool)> {
    let mut p = p;
    for round in 0..MATCH_ROUNDS {
        let pe = p.enclosure();
        let mut overlapping = Vec::new();
        for (i, entry) in registry.iter().enumerate() {
            let ee = entry.enclosure();
            if pe.subset_of(&ee) || ee.subset_of(&pe) {
                return Ok((i, false));
            }
            if !pe.disjoint(&ee) {
                overlapping.push(i);
            }
        }
        if overlapping.is_empty() {
            registry.push(p);
            return Ok((registry.len() - 1, true));
        }
        if round % 2 == 0 {
            p = sharpen(f, &p, cfg, prec)?;
        } else {
            for i in overlapping {
                registry[i] = sharpen(f, &registry[i], cfg, prec)?;
            }
        }
    }
    Err(Error::MatchUndecidable(MATCH_ROUNDS))
}

/// Builds the complete graph on the seed vertex plus `l` random vertices
/// whose coordinates lie on the complex unit circle, with straight-line
/// edges. Deterministic for a fixed `rng_seed`. All supplied seed solutions
/// are certified and inserted into the base registry.
pub fn build_complete_graph(
    system: &Arc<ParametricSystem>,
    seed_z: &CVec,
    seeds: &[CVec],
    l: usize,
    rng_seed: u64,
    cfg: &CertifyConfig,
    prec: Precision,
) -> Result<HomotopyGraph> {
    let inst0 = SystemInstance::at_point_params(system.clone(), seed_z)?;
    let mut registry: Vec<CertifiedPoint> = Vec::new();
    for (i, x0) in seeds.iter().enumerate() {
        let cp = certify_seed(&inst0, x0.clone(), cfg, prec)
            .map_err(|e| Error::SeedCertificationFailed(format!("seed {i}: {e}")))?;
        match_or_insert(&inst0, &mut registry, cp, cfg, prec)?;
    }
    let mut vertices = vec![Vertex {
        id: 0,
        z: seed_z.clone(),
        registry,
    }];
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let bits = prec.bits();
    for j in 0..l {
        let z: CVec = (0..system.n_params())
            .map(|_| {
                let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
                let (sin, cos) = Float::with_val(bits, theta).sin_cos(Float::new(bits));
                CPoint { re: cos, im: sin }
            })
            .collect();
        vertices.push(Vertex {
            id: j + 1,
            z,
            registry: Vec::new(),
        });
    }
    let mut edges = Vec::new();
    for a in 0..vertices.len() {
        for b in a + 1..vertices.len() {
            edges.push(Edge {
                u: a,
                v: b,
                path: PathSpec::Segment {
                    from: vertices[a].z.clone(),
                    to: vertices[b].z.clone(),
                },
                corr: BTreeMap::new(),
                quarantined: false,
                failures: Vec::new(),
            });
        }
    }
    Ok(HomotopyGraph {
        vertices,
        edges,
        base: 0,
    })
}

/// Builds a graph with a prescribed vertex layout in parameter space and a
/// prescribed edge list; vertex 0 is the base and receives the certified
/// seed solutions. Edges are straight segments between their endpoints.
pub fn build_explicit_graph(
    system: &Arc<ParametricSystem>,
    vertex_params: &[CVec],
    edge_list: &[(usize, usize)],
    seeds: &[CVec],
    cfg: &CertifyConfig,
    prec: Precision,
) -> Result<HomotopyGraph> {
    if vertex_params.is_empty() {
        return Err(Error::Other("explicit graph needs at least one vertex".into()));
    }
    let inst0 = SystemInstance::at_point_params(system.clone(), &vertex_params[0])?;
    let mut registry: Vec<CertifiedPoint> = Vec::new();
    for (i, x0) in seeds.iter().enumerate() {
        let cp = certify_seed(&inst0, x0.clone(), cfg, prec)
            .map_err(|e| Error::SeedCertificationFailed(format!("seed {i}: {e}")))?;
        match_or_insert(&inst0, &mut registry, cp, cfg, prec)?;
    }
    let vertices: Vec<Vertex> = vertex_params
        .iter()
        .enumerate()
        .map(|(id, z)| Vertex {
            id,
            z: z.clone(),
            registry: if id == 0 { std::mem::take(&mut registry) } else { Vec::new() },
        })
        .collect();
    let edges = edge_list
        .iter()
        .map(|&(a, b)| {
            if a >= vertices.len() || b >= vertices.len() || a == b {
                return Err(Error::Other(format!("invalid explicit edge ({a}, {b})")));
            }
            Ok(Edge {
                u: a,
                v: b,
                path: PathSpec::Segment {
                    from: vertices[a].z.clone(),
                    to: vertices[b].z.clone(),
                },
                corr: BTreeMap::new(),
                quarantined: false,
                failures: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HomotopyGraph {
        vertices,
        edges,
        base: 0,
    })
}

/// Aggregate tracking statistics of a saturation run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SaturationStats {
    pub tracked_paths: usize,
    pub accepted_steps: usize,
    pub rejections: usize,
    pub krawczyk_evals: usize,
    pub quarantined_edges: usize,
    pub failures: Vec<String>,
}

/// One direction of edge processing: track every unmatched fiber point of
/// the source side and record the correspondences. Returns whether any
/// tracking happened.
fn process_edge_direction(
    graph: &mut HomotopyGraph,
    ei: usize,
    forward: bool,
    system: &Arc<ParametricSystem>,
    cfg: &TrackerConfig,
    prec: Precision,
    parallel: bool,
    stats: &mut SaturationStats,
) -> Result<bool> {
    let (u, v) = {
        let e = &graph.edges[ei];
        if forward {
            (e.u, e.v)
        } else {
            (e.v, e.u)
        }
    };
    let missing: Vec<usize> = {
        let e = &graph.edges[ei];
        let ks = graph.vertices[u].registry.len();
        if forward {
            (0..ks).filter(|i| !e.corr.contains_key(i)).collect()
        } else {
            (0..ks)
                .filter(|j| !e.corr.values().any(|w| w == j))
                .collect()
        }
    };
    if missing.is_empty() {
        return Ok(false);
    }
    let path = {
        let e = &graph.edges[ei];
        if forward {
            e.path.clone()
        } else {
            e.path.reversed()
        }
    };
    let h = Homotopy::new(system.clone(), path, prec)?;
    let fiber: Vec<CertifiedPoint> = missing
        .iter()
        .map(|&i| graph.vertices[u].registry[i].clone())
        .collect();
    let results = track_correspondence(&h, &fiber, cfg, prec, parallel);
    let inst_v = graph.vertices[v].instance(system)?;
    for (&src, res) in missing.iter().zip(results) {
        match res {
            Ok((end, trace)) => {
                stats.tracked_paths += 1;
                stats.accepted_steps += trace.steps.len();
                stats.rejections += trace.rejections;
                stats.krawczyk_evals += trace.krawczyk_evals;
                let matched = match_or_insert(
                    &inst_v,
                    &mut graph.vertices[v].registry,
                    end,
                    &cfg.certify,
                    prec,
                );
                match matched {
                    Ok((dst, _)) => {
                        let e = &mut graph.edges[ei];
                        let (key, val) = if forward { (src, dst) } else { (dst, src) };
                        let conflict = if forward {
                            e.corr.values().any(|&w| w == val)
                        } else {
                            e.corr.contains_key(&key)
                        };
                        if conflict {
                            quarantine(graph, ei, src, "correspondence conflict", stats);
                            return Ok(true);
                        }
                        graph.edges[ei].corr.insert(key, val);
                    }
                    Err(err) => {
                        quarantine(graph, ei, src, &err.to_string(), stats);
                        return Ok(true);
                    }
                }
            }
            Err(err) => {
                quarantine(graph, ei, src, &err.to_string(), stats);
                return Ok(true);
            }
        }
    }
    Ok(true)
}

fn quarantine(
    graph: &mut HomotopyGraph,
    ei: usize,
    index: usize,
    cause: &str,
    stats: &mut SaturationStats,
) {
    let e = &mut graph.edges[ei];
    let msg = Error::EdgeTrackFailure {
        u: e.u,
        v: e.v,
        index,
        cause: cause.to_string(),
    }
    .to_string();
    e.failures.push(msg.clone());
    e.quarantined = true;
    stats.quarantined_edges += 1;
    stats.failures.push(msg);
}

/// Saturation driver: repeatedly scans edges, tracking unmatched fiber
/// points forward and (for surjectivity) backward, until every
/// non-quarantined edge carries a total bijective correspondence. Failed
/// edges are quarantined; if that disconnects the graph the run fails.
pub fn saturate(
    graph: &mut HomotopyGraph,
    system: &Arc<ParametricSystem>,
    cfg: &TrackerConfig,
    prec: Precision,
    parallel: bool,
) -> Result<SaturationStats> {
    let mut stats = SaturationStats::default();
    for _pass in 0..SATURATION_PASS_CAP {
        let mut worked = false;
        for ei in 0..graph.edges.len() {
            if graph.edges[ei].quarantined {
                continue;
            }
            worked |=
                process_edge_direction(graph, ei, true, system, cfg, prec, parallel, &mut stats)?;
            if graph.edges[ei].quarantined {
                continue;
            }
            worked |=
                process_edge_direction(graph, ei, false, system, cfg, prec, parallel, &mut stats)?;
        }
        if !worked {
            if !graph.connected(|e| !e.quarantined) {
                return Err(Error::GraphDisconnected);
            }
            // every live edge is saturated; registries share a common size
            let k = graph.vertices[graph.base].registry.len();
            let common = graph.vertices.iter().all(|v| v.registry.len() == k);
            let all_sat = graph.edges.iter().filter(|e| !e.quarantined).all(|e| {
                e.is_saturated(
                    graph.vertices[e.u].registry.len(),
                    graph.vertices[e.v].registry.len(),
                )
            });
            if !common || !all_sat {
                return Err(Error::NotSaturated);
            }
            return Ok(stats);
        }
    }
    Err(Error::Other(
        "saturation did not stabilize within the pass cap".into(),
    ))
}

/// Monodromy generators from a saturated graph: a breadth-first spanning
/// tree from the base defines bijections `phi_v` from the base registry to
/// each vertex's registry; every off-tree edge `e = (u,v)` closes a unique
/// fundamental cycle and contributes `phi_v^{-1} . gamma_e . phi_u`.
///
/// In relaxed mode only fully-defined (saturated, non-quarantined) edges
/// and the base's component are used, and the result is flagged as a
/// subgroup claim. Returns the generators and whether the full-group claim
/// holds.
pub fn extract_generators(
    graph: &HomotopyGraph,
    relaxed: bool,
) -> Result<(Vec<Permutation>, bool)> {
    let k = graph.vertices[graph.base].registry.len();
    let usable: Vec<usize> = (0..graph.edges.len())
        .filter(|&ei| {
            let e = &graph.edges[ei];
            !e.quarantined
                && e.is_saturated(
                    graph.vertices[e.u].registry.len(),
                    graph.vertices[e.v].registry.len(),
                )
                && graph.vertices[e.u].registry.len() == k
                && graph.vertices[e.v].registry.len() == k
        })
        .collect();
    let full_claim = usable.len() == graph.edges.len()
        && graph.vertices.iter().all(|v| v.registry.len() == k);
    if !relaxed && !full_claim {
        return Err(Error::NotSaturated);
    }

    // breadth-first spanning tree over usable edges
    let n = graph.vertices.len();
    let mut phi: Vec<Option<Vec<usize>>> = vec![None; n];
    phi[graph.base] = Some((0..k).collect());
    let mut tree_edges = vec![false; graph.edges.len()];
    let mut queue = std::collections::VecDeque::from([graph.base]);
    while let Some(w) = queue.pop_front() {
        for &ei in &usable {
            let e = &graph.edges[ei];
            let next = if e.u == w && phi[e.v].is_none() {
                // phi_v = gamma_e . phi_u
                let base_phi = phi[w].as_ref().unwrap();
                Some((e.v, base_phi.iter().map(|&i| e.corr[&i]).collect()))
            } else if e.v == w && phi[e.u].is_none() {
                // phi_u = gamma_e^{-1} . phi_v
                let inv: BTreeMap<usize, usize> =
                    e.corr.iter().map(|(&a, &b)| (b, a)).collect();
                let base_phi = phi[w].as_ref().unwrap();
                Some((e.u, base_phi.iter().map(|&j| inv[&j]).collect()))
            } else {
                None
            };
            if let Some((t, map)) = next {
                phi[t] = Some(map);
                tree_edges[ei] = true;
                queue.push_back(t);
            }
        }
    }

    let mut gens = Vec::new();
    for &ei in &usable {
        let e = &graph.edges[ei];
        let (pu, pv) = match (&phi[e.u], &phi[e.v]) {
            (Some(a), Some(b)) => (a, b),
            _ => continue, // outside the base's component (relaxed mode)
        };
        // phi_v^{-1} as a lookup from v-registry indices to base indices
        let mut pv_inv = vec![0usize; k];
        for (b, &j) in pv.iter().enumerate() {
            pv_inv[j] = b;
        }
        let sigma: Vec<u32> = pu.iter().map(|&i| pv_inv[e.corr[&i]] as u32).collect();
        let perm = Permutation::from_images(sigma)?;
        if tree_edges[ei] {
            // the defining identity of the tree maps
            if !perm.is_identity() {
                return Err(Error::Other(
                    "tree-edge correspondence did not compose to the identity".into(),
                ));
            }
        } else {
            gens.push(perm);
        }
    }
    Ok((gens, full_claim))
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum WidthReport {
    Value(u128),
    NotComputed(String),
}

/// Final report of a monodromy run. Field order matches the emitted JSON.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub problem: String,
    pub k: usize,
    /// Generators in 1-based cycle notation.
    pub generators: Vec<String>,
    pub order: u128,
    /// Orbits of the group action, 1-based.
    pub orbits: Vec<Vec<usize>>,
    /// A minimal nontrivial block system (1-based), empty when the action
    /// is intransitive or primitive-with-singleton-blocks only.
    pub blocks: Vec<Vec<usize>>,
    pub galois_width: WidthReport,
    pub saturated: bool,
    pub claim: String,
    pub warnings: Vec<String>,
    pub stats: SaturationStats,
}

#[derive(Clone, Debug)]
pub struct GraphConfig {
    /// Number of random vertices besides the seed vertex.
    pub nodes: usize,
    pub rng_seed: u64,
    pub relaxed: bool,
    pub parallel: bool,
    /// Generic root count, when the problem knows it; mismatches are
    /// surfaced as report warnings.
    pub expected_k: Option<usize>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            nodes: 4,
            rng_seed: 0,
            relaxed: false,
            parallel: false,
            expected_k: None,
        }
    }
}

/// The full pipeline: certify seeds, build the complete graph, saturate,
/// extract generators, analyze the group, report.
pub fn run_monodromy(
    name: &str,
    system: &Arc<ParametricSystem>,
    seed_z: &CVec,
    seeds: &[CVec],
    graph_cfg: &GraphConfig,
    tracker_cfg: &TrackerConfig,
    prec: Precision,
) -> Result<RunReport> {
    let mut graph = build_complete_graph(
        system,
        seed_z,
        seeds,
        graph_cfg.nodes,
        graph_cfg.rng_seed,
        &tracker_cfg.certify,
        prec,
    )?;
    run_on_graph(name, system, &mut graph, graph_cfg, tracker_cfg, prec)
}

/// Saturates a prepared graph, extracts generators, and assembles the
/// report. The base registry must already hold certified seeds.
pub fn run_on_graph(
    name: &str,
    system: &Arc<ParametricSystem>,
    graph: &mut HomotopyGraph,
    graph_cfg: &GraphConfig,
    tracker_cfg: &TrackerConfig,
    prec: Precision,
) -> Result<RunReport> {
    let (stats, saturated) =
        match saturate(graph, system, tracker_cfg, prec, graph_cfg.parallel) {
            Ok(s) => (s, true),
            Err(Error::NotSaturated) if graph_cfg.relaxed => (SaturationStats::default(), false),
            Err(e) => return Err(e),
        };
    let (gens, full_claim) = extract_generators(graph, graph_cfg.relaxed)?;
    let k = graph.vertices[graph.base].registry.len();
    report_from_generators(name, k, gens, saturated && full_claim, graph_cfg, stats)
}

/// Group analysis and report assembly, shared by the pipeline and by tests
/// that construct graphs directly.
pub fn report_from_generators(
    name: &str,
    k: usize,
    gens: Vec<Permutation>,
    group_claim: bool,
    graph_cfg: &GraphConfig,
    stats: SaturationStats,
) -> Result<RunReport> {
    let group = PermGroup::new(k, gens.clone())?;
    let orbits: Vec<Vec<usize>> = group
        .orbits()
        .into_iter()
        .map(|o| o.into_iter().map(|p| p + 1).collect())
        .collect();
    let blocks: Vec<Vec<usize>> = if group.is_transitive() && k >= 2 {
        let bl = group.minimal_blocks((0, 1))?;
        if bl.len() > 1 && bl[0].len() > 1 {
            bl.into_iter()
                .map(|b| b.into_iter().map(|p| p + 1).collect())
                .collect()
        } else {
            Vec::new()
        }
    } else {
        Vec::new()
    };
    let galois_width = match galois_width(&group) {
        Ok(w) => WidthReport::Value(w),
        Err(Error::OrderCapExceeded { .. }) => WidthReport::NotComputed("not computed".into()),
        Err(e) => return Err(e),
    };
    let mut warnings = Vec::new();
    if let Some(expected) = graph_cfg.expected_k {
        if expected != k {
            warnings.push(format!(
                "fiber size {k} differs from the generic root count {expected}"
            ));
        }
    }
    Ok(RunReport {
        problem: name.to_string(),
        k,
        generators: gens.iter().map(|g| g.to_string()).collect(),
        order: group.order(),
        orbits,
        blocks,
        galois_width,
        saturated: group_claim,
        claim: if group_claim { "group" } else { "subgroup" }.to_string(),
        warnings,
        stats,
    })
}
