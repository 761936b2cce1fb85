//! Command-line entry points: single monodromy runs (`run`), the benchmark
//! sweep over univariate families (`bench`), and permutation-group
//! utilities (`group`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use serde::Serialize;

use monodromy::error::{Error, Result};
use monodromy::fiber_graph::{GraphConfig, RunReport, WidthReport};
use monodromy::interval::{CPoint, CVec, Precision};
use monodromy::permgroup::{
    alternating, equal_up_to_relabeling, galois_width, intersect_alternating, symmetric,
    wreath_imprimitive, PermGroup, Permutation,
};
use monodromy::problems::{self, ExplicitGraphSpec, Problem};
use monodromy::tracker::TrackerConfig;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "monodromy",
    version,
    about = "Certified monodromy/Galois groups of parametrized polynomial systems"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the certified monodromy pipeline on one problem.
    Run(RunArgs),
    /// Sweep univariate families over graph sizes and report recovery rates.
    Bench(BenchArgs),
    /// Analyze a permutation group given by generators or by name.
    Group(GroupArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in problem name (e.g. generic:4, p3p, belyi-m23) or a
    /// problem-file path.
    #[arg(long)]
    problem: String,
    /// Number of random graph vertices besides the base vertex.
    #[arg(long, default_value_t = 4)]
    nodes: usize,
    /// Seed for fabrication and graph randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Working precision in bits.
    #[arg(long, default_value_t = 256)]
    precision: u32,
    /// Certificate contraction factor (rational, e.g. 1/8 or 0.125).
    #[arg(long)]
    rho: Option<String>,
    /// Predictor contraction factor.
    #[arg(long)]
    tau: Option<String>,
    /// Radius-halving threshold factor.
    #[arg(long)]
    g: Option<String>,
    /// Initial time step.
    #[arg(long)]
    h0: Option<String>,
    /// Initial certification radius.
    #[arg(long)]
    r0: Option<String>,
    /// Step growth factor.
    #[arg(long)]
    dinc: Option<String>,
    /// Step shrink factor.
    #[arg(long)]
    ddec: Option<String>,
    /// JSON file prescribing the homotopy graph (vertices and edges).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Accept partial saturation and report a subgroup claim.
    #[arg(long)]
    relaxed: bool,
    /// Write tracking statistics to this file as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads; 1 guarantees deterministic output.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated family list, e.g. generic:4,even:6.
    #[arg(long, default_value = "generic:3,generic:4,even:4,evensq:4,palin:4")]
    families: String,
    /// Comma-separated graph sizes.
    #[arg(long, default_value = "3,4,5,6")]
    nodes: String,
    /// Trials per (family, nodes) cell.
    #[arg(long, default_value_t = 25)]
    trials: usize,
    /// Base seed; trial t of a cell uses an offset of it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    precision: u32,
    /// Write the CSV table here (also printed as Markdown on stdout).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct GroupArgs {
    /// Generators in cycle notation, comma-separated: "(1 2),(1 2 3 4)".
    #[arg(long, conflicts_with = "named")]
    gens: Option<String>,
    /// Named group: sym(N), alt(N), wreath(A,B), wreath_alt(A,B).
    #[arg(long)]
    named: Option<String>,
    /// Number of permuted points (inferred from the generators when omitted).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Group(args) => cmd_group(args),
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Other(format!("bad rational `{s}`")))?;
        let d: i64 = den
            .trim()
            .parse()
            .map_err(|_| Error::Other(format!("bad rational `{s}`")))?;
        if d == 0 {
            return Err(Error::Other(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::from((n, d)));
    }
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Other(format!("bad number `{s}`")))?;
    Rational::from_f64(v).ok_or_else(|| Error::Other(format!("non-finite number `{s}`")))
}

fn tracker_config(args: &RunArgs) -> Result<TrackerConfig> {
    let mut cfg = TrackerConfig::default();
    if let Some(s) = &args.rho {
        cfg.certify.rho = parse_rational(s)?;
    }
    if let Some(s) = &args.tau {
        cfg.certify.tau = parse_rational(s)?;
    }
    if let Some(s) = &args.g {
        cfg.certify.g = parse_rational(s)?;
    }
    if let Some(s) = &args.r0 {
        cfg.certify.initial_r = parse_rational(s)?;
    }
    if let Some(s) = &args.h0 {
        cfg.h0 = parse_rational(s)?;
    }
    if let Some(s) = &args.dinc {
        cfg.delta_inc = parse_rational(s)?;
    }
    if let Some(s) = &args.ddec {
        cfg.delta_dec = parse_rational(s)?;
    }
    Ok(cfg)
}

/// Echo of every setting that influences a run; together with the report
/// this determines an exact re-run.
#[derive(Serialize)]
struct ConfigEcho {
    problem: String,
    nodes: usize,
    seed: u64,
    precision_bits: u32,
    rho: String,
    tau: String,
    g: String,
    h0: String,
    r0: String,
    dinc: String,
    ddec: String,
    relaxed: bool,
    threads: usize,
}

#[derive(Serialize)]
struct GraphEcho {
    kind: String,
    vertices: usize,
    rng_seed: u64,
    /// Edge list for prescribed graphs; empty for complete graphs, whose
    /// edges are implied.
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct CliReport {
    schema_version: u32,
    config: ConfigEcho,
    graph: GraphEcho,
    #[serde(flatten)]
    report: RunReport,
}

fn load_graph_file(path: &Path, prec: Precision) -> Result<ExplicitGraphSpec> {
    #[derive(serde::Deserialize)]
    struct GraphFile {
        vertices: Vec<Vec<[f64; 2]>>,
        edges: Vec<(usize, usize)>,
    }
    let text = std::fs::read_to_string(path)?;
    let gf: GraphFile =
        serde_json::from_str(&text).map_err(|e| Error::Other(format!("graph file: {e}")))?;
    let vertices: Vec<CVec> = gf
        .vertices
        .iter()
        .map(|v| {
            v.iter()
                .map(|&[re, im]| CPoint::from_f64(re, im, prec))
                .collect()
        })
        .collect();
    Ok(ExplicitGraphSpec {
        vertices,
        edges: gf.edges,
    })
}

fn instantiate_problem(name: &str, seed: u64, prec: Precision) -> Result<Problem> {
    let path = Path::new(name);
    if path.exists() && path.is_file() {
        return problems::load_problem_file(path, prec);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    problems::instantiate(name, &mut rng, prec)
}

fn setup_threads(n: usize) -> bool {
    if n > 1 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        true
    } else {
        false
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    match run_inner(&args) {
        Ok(report) => {
            let code = if report.report.claim == "group" {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            };
            match args.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                ),
                Format::Text => print_run_text(&report),
            }
            code
        }
        Err(e) => {
            emit_error(&e, args.format);
            ExitCode::FAILURE
        }
    }
}

fn run_inner(args: &RunArgs) -> Result<CliReport> {
    let prec = Precision::new(args.precision);
    let parallel = setup_threads(args.threads);
    let tracker_cfg = tracker_config(args)?;
    let mut problem = instantiate_problem(&args.problem, args.seed, prec)?;
    if let Some(path) = &args.graph {
        problem.graph = Some(load_graph_file(path, prec)?);
    }
    let graph_cfg = GraphConfig {
        nodes: args.nodes,
        rng_seed: args.seed,
        relaxed: args.relaxed,
        parallel,
        expected_k: None,
    };
    let report = problem.run(&graph_cfg, &tracker_cfg, prec)?;
    if let Some(path) = &args.trace {
        std::fs::write(
            path,
            serde_json::to_string_pretty(&report.stats).expect("stats serialize"),
        )?;
    }
    let graph = match &problem.graph {
        Some(spec) => GraphEcho {
            kind: "explicit".into(),
            vertices: spec.vertices.len(),
            rng_seed: args.seed,
            edges: spec.edges.clone(),
        },
        None => GraphEcho {
            kind: "complete".into(),
            vertices: args.nodes + 1,
            rng_seed: args.seed,
            edges: Vec::new(),
        },
    };
    let cfg = &tracker_cfg;
    Ok(CliReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigEcho {
            problem: args.problem.clone(),
            nodes: args.nodes,
            seed: args.seed,
            precision_bits: args.precision,
            rho: cfg.certify.rho.to_string(),
            tau: cfg.certify.tau.to_string(),
            g: cfg.certify.g.to_string(),
            h0: cfg.h0.to_string(),
            r0: cfg.certify.initial_r.to_string(),
            dinc: cfg.delta_inc.to_string(),
            ddec: cfg.delta_dec.to_string(),
            relaxed: args.relaxed,
            threads: args.threads,
        },
        graph,
        report,
    })
}

fn print_run_text(cr: &CliReport) {
    let r = &cr.report;
    println!("problem:      {}", r.problem);
    println!("fiber size:   {}", r.k);
    println!("claim:        {} (saturated: {})", r.claim, r.saturated);
    println!("order:        {}", r.order);
    if r.generators.is_empty() {
        println!("generators:   (none; trivial action)");
    } else {
        println!("generators:");
        for g in &r.generators {
            println!("  {g}");
        }
    }
    let orbit_sizes: Vec<String> = r.orbits.iter().map(|o| o.len().to_string()).collect();
    println!("orbit sizes:  {}", orbit_sizes.join(" "));
    if r.blocks.is_empty() {
        println!("blocks:       none (primitive or intransitive)");
    } else {
        println!(
            "blocks:       {} blocks of size {}",
            r.blocks.len(),
            r.blocks[0].len()
        );
    }
    match &r.galois_width {
        WidthReport::Value(w) => println!("galois width: {w}"),
        WidthReport::NotComputed(s) => println!("galois width: {s}"),
    }
    for w in &r.warnings {
        println!("warning:      {w}");
    }
    println!(
        "stats:        {} paths, {} steps, {} rejections, {} certificate tests",
        r.stats.tracked_paths, r.stats.accepted_steps, r.stats.rejections, r.stats.krawczyk_evals
    );
    for f in &r.stats.failures {
        println!("edge failure: {f}");
    }
}

fn emit_error(e: &Error, format: Format) {
    match format {
        Format::Json => {
            let obj = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "error": e.to_string(),
            });
            eprintln!("{}", serde_json::to_string_pretty(&obj).expect("serializes"));
        }
        Format::Text => eprintln!("error: {e}"),
    }
}

#[derive(Serialize)]
struct BenchRow {
    family: String,
    degree: usize,
    nodes: usize,
    trials: usize,
    pct_group: f64,
    pct_fiber: f64,
    pct_gw: f64,
    failures: usize,
}

fn cmd_bench(args: BenchArgs) -> ExitCode {
    match bench_inner(&args) {
        Ok(rows) => {
            let csv = bench_csv(&rows);
            if let Some(path) = &args.csv {
                if let Err(e) = std::fs::write(path, &csv) {
                    emit_error(&Error::Io(e), Format::Text);
                    return ExitCode::FAILURE;
                }
            } else {
                print!("{csv}");
            }
            print_bench_markdown(&rows);
            ExitCode::SUCCESS
        }
        Err(e) => {
            emit_error(&e, Format::Text);
            ExitCode::FAILURE
        }
    }
}

fn bench_inner(args: &BenchArgs) -> Result<Vec<BenchRow>> {
    let prec = Precision::new(args.precision);
    let parallel = setup_threads(args.threads);
    let node_counts: Vec<usize> = args
        .nodes
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Other(format!("bad node count `{s}`")))
        })
        .collect::<Result<_>>()?;
    let tracker_cfg = TrackerConfig::default();
    let mut rows = Vec::new();
    for family in args.families.split(',') {
        let family = family.trim();
        let (fam_name, degree) = family
            .split_once(':')
            .ok_or_else(|| Error::Other(format!("bench families must look like name:degree, got `{family}`")))?;
        let degree: usize = degree
            .parse()
            .map_err(|_| Error::Other(format!("bad degree in `{family}`")))?;
        for &nodes in &node_counts {
            let run_trial = |t: usize| -> Result<(bool, bool, bool)> {
                // decorrelate cells without overlapping seed streams
                let seed = args
                    .seed
                    .wrapping_mul(1_000_003)
                    .wrapping_add((degree * 131 + nodes * 17) as u64)
                    .wrapping_mul(999_983)
                    .wrapping_add(t as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let problem = problems::instantiate(family, &mut rng, prec)?;
                let graph_cfg = GraphConfig {
                    nodes,
                    rng_seed: seed,
                    relaxed: true,
                    parallel,
                    expected_k: None,
                };
                let report = problem.run(&graph_cfg, &tracker_cfg, prec)?;
                Ok(score_trial(&problem, &report)?)
            };
            let results: Vec<Result<(bool, bool, bool)>> =
                (0..args.trials).map(run_trial).collect();
            let mut group_hits = 0usize;
            let mut fiber_hits = 0usize;
            let mut gw_hits = 0usize;
            let mut failures = 0usize;
            for r in results {
                match r {
                    Ok((g, f, w)) => {
                        group_hits += g as usize;
                        fiber_hits += f as usize;
                        gw_hits += w as usize;
                    }
                    Err(_) => failures += 1,
                }
            }
            let pct = |hits: usize| 100.0 * hits as f64 / args.trials as f64;
            rows.push(BenchRow {
                family: fam_name.to_string(),
                degree,
                nodes,
                trials: args.trials,
                pct_group: pct(group_hits),
                pct_fiber: pct(fiber_hits),
                pct_gw: pct(gw_hits),
                failures,
            });
        }
    }
    Ok(rows)
}

/// The three recovery metrics of one trial: exact group, exact fiber size,
/// exact Galois width, each judged against the problem's expected data.
fn score_trial(problem: &Problem, report: &RunReport) -> Result<(bool, bool, bool)> {
    let k = report.k;
    let gens = report
        .generators
        .iter()
        .map(|s| Permutation::parse_cycles(s, k))
        .collect::<Result<Vec<_>>>()?;
    let computed = PermGroup::new(k, gens)?;
    let fiber_ok = problem.expected.k == Some(k);
    let group_ok = match &problem.expected.group {
        Some(target) => fiber_ok && equal_up_to_relabeling(&computed, target)?,
        None => false,
    };
    let gw_ok = match (&report.galois_width, problem.expected.gw) {
        (WidthReport::Value(w), Some(e)) => *w == e,
        _ => false,
    };
    Ok((group_ok, fiber_ok, gw_ok))
}

fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("family,degree,nodes,trials,pct_group,pct_fiber,pct_gw,failures\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.1},{:.1},{:.1},{}\n",
            r.family, r.degree, r.nodes, r.trials, r.pct_group, r.pct_fiber, r.pct_gw, r.failures
        ));
    }
    out
}

fn print_bench_markdown(rows: &[BenchRow]) {
    println!("| family | degree | nodes | trials | group % | fiber % | gw % | failures |");
    println!("|---|---|---|---|---|---|---|---|");
    for r in rows {
        println!(
            "| {} | {} | {} | {} | {:.1} | {:.1} | {:.1} | {} |",
            r.family, r.degree, r.nodes, r.trials, r.pct_group, r.pct_fiber, r.pct_gw, r.failures
        );
    }
}

fn parse_named_group(spec: &str) -> Result<PermGroup> {
    let spec = spec.trim();
    let (name, rest) = spec
        .split_once('(')
        .ok_or_else(|| Error::Other(format!("bad group spec `{spec}`")))?;
    let rest = rest
        .strip_suffix(')')
        .ok_or_else(|| Error::Other(format!("bad group spec `{spec}`")))?;
    let nums: Vec<usize> = rest
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Other(format!("bad number in group spec `{spec}`")))
        })
        .collect::<Result<_>>()?;
    match (name.trim(), nums.as_slice()) {
        ("sym", [n]) => Ok(symmetric(*n)),
        ("alt", [n]) => Ok(alternating(*n)),
        ("wreath", [a, b]) => Ok(wreath_imprimitive(*a, *b)),
        ("wreath_alt", [a, b]) => Ok(intersect_alternating(&wreath_imprimitive(*a, *b))),
        _ => Err(Error::Other(format!(
            "unknown group spec `{spec}` (expected sym(N), alt(N), wreath(A,B), wreath_alt(A,B))"
        ))),
    }
}

fn parse_generator_list(s: &str, k_flag: Option<usize>) -> Result<PermGroup> {
    // split on commas that sit between cycles, i.e. outside parentheses
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(c);
            }
            ',' if depth == 0 => {
                parts.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    if !cur.trim().is_empty() {
        parts.push(cur);
    }
    // infer the degree from the largest point mentioned
    let max_point = s
        .split(|c: char| !c.is_ascii_digit())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().unwrap_or(0))
        .max()
        .unwrap_or(0);
    let k = k_flag.unwrap_or(max_point.max(1));
    let gens = parts
        .iter()
        .map(|p| Permutation::parse_cycles(p, k))
        .collect::<Result<Vec<_>>>()?;
    PermGroup::new(k, gens)
}

#[derive(Serialize)]
struct GroupReport {
    schema_version: u32,
    k: usize,
    order: u128,
    orbits: Vec<Vec<usize>>,
    blocks: Vec<Vec<usize>>,
    galois_width: WidthReport,
}

fn cmd_group(args: GroupArgs) -> ExitCode {
    match group_inner(&args) {
        Ok(report) => {
            match args.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializes")
                ),
                Format::Text => {
                    println!("k:            {}", report.k);
                    println!("order:        {}", report.order);
                    let sizes: Vec<String> =
                        report.orbits.iter().map(|o| o.len().to_string()).collect();
                    println!("orbit sizes:  {}", sizes.join(" "));
                    if report.blocks.is_empty() {
                        println!("blocks:       none (primitive or intransitive)");
                    } else {
                        println!(
                            "blocks:       {} blocks of size {}",
                            report.blocks.len(),
                            report.blocks[0].len()
                        );
                    }
                    match &report.galois_width {
                        WidthReport::Value(w) => println!("galois width: {w}"),
                        WidthReport::NotComputed(s) => println!("galois width: {s}"),
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            emit_error(&e, args.format);
            ExitCode::FAILURE
        }
    }
}

fn group_inner(args: &GroupArgs) -> Result<GroupReport> {
    let group = match (&args.gens, &args.named) {
        (Some(gens), None) => parse_generator_list(gens, args.k)?,
        (None, Some(named)) => parse_named_group(named)?,
        _ => {
            return Err(Error::Other(
                "give exactly one of --gens or --named".into(),
            ))
        }
    };
    let k = group.degree();
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
    Ok(GroupReport {
        schema_version: SCHEMA_VERSION,
        k,
        order: group.order(),
        orbits,
        blocks,
        galois_width,
    })
}
