//! Command-line front end for the `hardy-lab` crate.
//!
//! One experiment per invocation. Tabular experiments (`weights`,
//! `sharpness`, `counterexample`, `continuum`) emit CSV with the run
//! configuration in leading `#` comment lines; randomized experiments
//! (`identity`, `zd`, `lp`) emit a JSON object
//! `{config, results, violations, metadata}`.
//!
//! Exit codes: `0` — all asserted invariants held; `1` — a mathematical
//! violation was detected (the violating instance is serialized in the
//! report and on standard error); `2` — usage error.
//!
//! Output is deterministic given the seed: re-running a command with the
//! same flags produces byte-identical output. `HARDY_LAB_THREADS` caps the
//! number of worker threads (parallelism never affects emitted values or
//! their order).

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use hardy_lab::graph::{
    self, identity_instance, leibniz_green_residual, random_vertex_function, Graph, IdentityKind,
};
use hardy_lab::lattice::{zd_inequality_check, zd_weight_exact};
use hardy_lab::lp::{landau_check, lp_form_margin, picone_residual};
use hardy_lab::seq::FiniteSequence;
use hardy_lab::sharpness::{
    continuum_probe, counterexample_build, eig_sweep, sharp_constant, TestFunction,
};
use hardy_lab::weights::{sample, WeightFamily};

use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "hardy-lab",
    version,
    about = "Numerical experiments on discrete Hardy-Rellich inequalities"
)]
struct Cli {
    /// Write the report to this path instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate a weight family: both evaluation routes and the certified
    /// lower bound, as CSV (n, family, direct, series, bound, margin).
    Weights(WeightsArgs),
    /// Check the exact energy identities on random instances (and the
    /// Leibniz/Green rules on an optional user graph). JSON report.
    Identity(IdentityArgs),
    /// Smallest generalized eigenvalue of the truncated order-l form,
    /// swept over truncation sizes. CSV (N, lambda_min, iterations, residual).
    Sharpness(SharpnessArgs),
    /// The explicit family defeating the unshifted second-order inequality.
    /// CSV (M, lhs, rhs_partial, ratio).
    Counterexample(CounterexampleArgs),
    /// Discrete-vs-continuum comparison for a smooth bump profile.
    /// CSV (M, discrete_lhs, discrete_rhs, continuous_lhs, continuous_rhs, ratio).
    Continuum(ContinuumArgs),
    /// Randomized verification of the lattice Hardy inequality on a box,
    /// plus the leading-coefficient ratio table. JSON report.
    Zd(ZdArgs),
    /// Randomized l^p checks: edgewise Picone residuals, the p-Hardy form
    /// margin, and the Landau averaging inequality. JSON report.
    Lp(LpArgs),
}

#[derive(Args)]
struct WeightsArgs {
    /// Family: kpp | gks_reference | shifted_hardy | direct_hardy | leray |
    /// improved_rellich2 | landau_constant.
    #[arg(long)]
    family: String,
    /// Index range "lo..hi" (inclusive) or comma list "1,2,5".
    #[arg(long)]
    n: String,
    /// Power-weight exponent (shifted_hardy, direct_hardy).
    #[arg(long)]
    alpha: Option<f64>,
    /// Averaging exponent (landau_constant).
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args)]
struct IdentityArgs {
    /// Random instances per identity kind.
    #[arg(long, default_value_t = 25)]
    trials: u64,
    /// Tree size of each random instance (vertex count before the tail).
    #[arg(long, default_value_t = 40)]
    size: usize,
    /// Highest iteration depth m (order 2m and 2m+1 identities), 1..=3.
    #[arg(long, default_value_t = 3)]
    m: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum accepted relative residual.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Adjacency-list file ("x y b" per line) for an extra Leibniz/Green
    /// check on a user-supplied graph.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Args)]
struct SharpnessArgs {
    /// Inequality order.
    #[arg(long)]
    ell: u32,
    /// Truncation sizes, e.g. "100,1000,10000" or "50..60".
    #[arg(long)]
    n_list: String,
    /// Eigensolver residual target.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// Profile scales, e.g. "100,1000,10000".
    #[arg(long)]
    m_list: String,
}

#[derive(Args)]
struct ContinuumArgs {
    /// Inequality order.
    #[arg(long, default_value_t = 2)]
    ell: u32,
    /// Sampling scales, e.g. "256,512,1024".
    #[arg(long, default_value = "256,512,1024")]
    m_list: String,
}

#[derive(Args)]
struct ZdArgs {
    /// Lattice dimension (>= 2).
    #[arg(long)]
    d: usize,
    /// Weight exponent alpha (> 2 - d).
    #[arg(long)]
    alpha: f64,
    /// Box radius.
    #[arg(long)]
    radius: i64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct LpArgs {
    /// Exponent p > 1.
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// 17 significant digits — enough to round-trip any binary64 value.
fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses "lo..hi" (inclusive) or a comma-separated list of nonnegative
/// integers.
fn parse_index_list(s: &str) -> Result<Vec<u64>, String> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u64 = lo
            .trim()
            .parse()
            .map_err(|_| format!("bad range start {lo:?}"))?;
        let hi: u64 = hi
            .trim()
            .parse()
            .map_err(|_| format!("bad range end {hi:?}"))?;
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad index {t:?}"))
        })
        .collect()
}

struct Report {
    body: String,
    violations: Vec<Value>,
}

fn csv_report(config: &Value, header: &str, rows: &[String], violations: Vec<Value>) -> Report {
    let mut body = String::new();
    body.push_str(&format!("# version: {VERSION}\n"));
    body.push_str(&format!("# config: {config}\n"));
    body.push_str(header);
    body.push('\n');
    for r in rows {
        body.push_str(r);
        body.push('\n');
    }
    Report { body, violations }
}

fn json_report(config: &Value, results: Value, violations: Vec<Value>) -> Report {
    let doc = json!({
        "config": config,
        "results": results,
        "violations": violations.clone(),
        "metadata": {
            "version": VERSION,
            "threads": rayon::current_num_threads(),
        },
    });
    Report {
        body: format!("{:#}\n", doc),
        violations,
    }
}

fn run_weights(a: &WeightsArgs) -> Result<Report, String> {
    let family = match a.family.as_str() {
        "kpp" => WeightFamily::Kpp,
        "gks_reference" => WeightFamily::GksReference,
        "shifted_hardy" => WeightFamily::ShiftedHardy(
            a.alpha
                .ok_or("shifted_hardy requires --alpha".to_string())?,
        ),
        "direct_hardy" => WeightFamily::DirectHardy(
            a.alpha.ok_or("direct_hardy requires --alpha".to_string())?,
        ),
        "leray" => WeightFamily::Leray,
        "improved_rellich2" => WeightFamily::ImprovedRellich2,
        "landau_constant" => {
            WeightFamily::LandauConstant(a.p.ok_or("landau_constant requires --p".to_string())?)
        }
        other => return Err(format!("unknown family {other:?}")),
    };
    let ns = parse_index_list(&a.n)?;
    let config = json!({
        "subcommand": "weights",
        "family": a.family,
        "alpha": a.alpha,
        "p": a.p,
        "n": a.n,
    });
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for &n in &ns {
        let s = sample(family, n).map_err(|e| e.to_string())?;
        rows.push(format!(
            "{n},{},{},{},{},{}",
            family.name(),
            sig17(s.direct),
            sig17(s.series),
            sig17(s.bound),
            sig17(s.margin)
        ));
        // Certified bound must hold pointwise.
        if s.margin < 0.0 {
            violations.push(json!({
                "kind": "bound_violated",
                "n": n,
                "direct": s.direct,
                "bound": s.bound,
                "margin": s.margin,
            }));
        }
        // Dual-evaluation agreement on the overlap band.
        let rel = (s.direct - s.series).abs() / s.direct.abs().max(f64::MIN_POSITIVE);
        if (32..=128).contains(&n) && rel > 1e-12 {
            violations.push(json!({
                "kind": "route_disagreement",
                "n": n,
                "direct": s.direct,
                "series": s.series,
                "relative_difference": rel,
            }));
        }
    }
    Ok(csv_report(
        &config,
        "n,family,direct,series,bound,margin",
        &rows,
        violations,
    ))
}

fn identity_kinds(m_max: u32) -> Vec<(&'static str, IdentityKind, u32)> {
    let mut kinds = vec![
        ("first_order", IdentityKind::FirstOrder, 0u32),
        ("second_order", IdentityKind::SecondOrder, 1),
    ];
    for m in 1..=m_max.min(3) {
        kinds.push(("iterated", IdentityKind::Iterated(m), m));
    }
    for m in 1..=m_max.min(2) {
        kinds.push(("odd_order", IdentityKind::OddOrder(m), m));
    }
    kinds
}

fn run_identity(a: &IdentityArgs) -> Result<Report, String> {
    if !(1..=3).contains(&a.m) {
        return Err(format!("--m must be 1..=3, got {}", a.m));
    }
    let config = json!({
        "subcommand": "identity",
        "trials": a.trials,
        "size": a.size,
        "m": a.m,
        "seed": a.seed,
        "tol": a.tol,
        "graph": a.graph.as_ref().map(|p| p.display().to_string()),
    });
    let mut violations = Vec::new();
    let mut results = Vec::new();
    for (name, kind, m) in identity_kinds(a.m) {
        let mut worst: f64 = 0.0;
        for trial in 0..a.trials {
            let seed = a.seed.wrapping_add(trial);
            let inst = identity_instance(a.size, m, seed);
            let v = random_vertex_function(
                inst.graph.vertices(),
                0.1,
                2.0,
                seed.wrapping_add(0x9e3779b9),
            );
            let check = graph::identity_residual(&inst.graph, &v, &inst.f, &inst.u, kind)
                .map_err(|e| e.to_string())?;
            let rel = check.relative_residual();
            worst = worst.max(rel);
            if rel > a.tol {
                violations.push(json!({
                    "kind": "identity_residual",
                    "identity": name,
                    "m": m,
                    "trial": trial,
                    "seed": seed,
                    "relative_residual": rel,
                    "lhs": check.lhs,
                    "rhs": check.rhs,
                }));
            }
        }
        results.push(json!({
            "identity": name,
            "m": m,
            "trials": a.trials,
            "max_relative_residual": worst,
        }));
    }
    // Leibniz and Green rules on random instances ...
    let mut worst: f64 = 0.0;
    for trial in 0..a.trials {
        let seed = a.seed.wrapping_add(trial);
        let inst = identity_instance(a.size, 1, seed);
        let f = random_vertex_function(inst.graph.vertices(), -1.0, 1.0, seed ^ 0x5bd1e995);
        let h = random_vertex_function(inst.graph.vertices(), -1.0, 1.0, seed ^ 0xc2b2ae35);
        let rel = leibniz_green_residual(&inst.graph, &f, &h).map_err(|e| e.to_string())?;
        worst = worst.max(rel);
        if rel > a.tol {
            violations.push(json!({
                "kind": "leibniz_green_residual",
                "trial": trial,
                "seed": seed,
                "relative_residual": rel,
            }));
        }
    }
    results.push(json!({
        "identity": "leibniz_green",
        "trials": a.trials,
        "max_relative_residual": worst,
    }));
    // ... and, if given, on the user-supplied graph.
    if let Some(path) = &a.graph {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let g = Graph::parse(&text).map_err(|e| e.to_string())?;
        let f = random_vertex_function(g.vertices(), -1.0, 1.0, a.seed);
        let h = random_vertex_function(g.vertices(), -1.0, 1.0, a.seed ^ 0xdeadbeef);
        let rel = leibniz_green_residual(&g, &f, &h).map_err(|e| e.to_string())?;
        if rel > a.tol {
            violations.push(json!({
                "kind": "leibniz_green_residual",
                "graph": path.display().to_string(),
                "relative_residual": rel,
            }));
        }
        results.push(json!({
            "identity": "leibniz_green_user_graph",
            "graph": path.display().to_string(),
            "vertices": g.vertex_count(),
            "max_relative_residual": rel,
        }));
    }
    Ok(json_report(&config, Value::Array(results), violations))
}

fn run_sharpness(a: &SharpnessArgs) -> Result<Report, String> {
    let ns: Vec<usize> = parse_index_list(&a.n_list)?
        .into_iter()
        .map(|n| n as usize)
        .collect();
    let config = json!({
        "subcommand": "sharpness",
        "ell": a.ell,
        "n_list": a.n_list,
        "tol": a.tol,
    });
    let rows_data = eig_sweep(a.ell, &ns, a.tol).map_err(|e| e.to_string())?;
    let c = sharp_constant(a.ell);
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for r in &rows_data {
        rows.push(format!(
            "{},{},{},{}",
            r.n,
            sig17(r.lambda_min),
            r.iterations,
            sig17(r.residual)
        ));
        // The truncated minimum must stay above the sharp constant.
        if r.lambda_min <= c {
            violations.push(json!({
                "kind": "below_sharp_constant",
                "ell": a.ell,
                "n": r.n,
                "lambda_min": r.lambda_min,
                "sharp_constant": c,
            }));
        }
    }
    // Monotonicity along increasing truncation sizes.
    for w in rows_data.windows(2) {
        if w[1].n > w[0].n && w[1].lambda_min >= w[0].lambda_min {
            violations.push(json!({
                "kind": "not_decreasing",
                "ell": a.ell,
                "n_pair": [w[0].n, w[1].n],
                "lambda_pair": [w[0].lambda_min, w[1].lambda_min],
            }));
        }
    }
    Ok(csv_report(
        &config,
        "N,lambda_min,iterations,residual",
        &rows,
        violations,
    ))
}

fn run_counterexample(a: &CounterexampleArgs) -> Result<Report, String> {
    let ms = parse_index_list(&a.m_list)?;
    if ms.iter().any(|&m| m < 2) {
        return Err("--m-list entries must be >= 2".to_string());
    }
    let config = json!({"subcommand": "counterexample", "m_list": a.m_list});
    let rows = ms
        .iter()
        .map(|&m| {
            let c = counterexample_build(m);
            format!(
                "{m},{},{},{}",
                sig17(c.lhs),
                sig17(c.rhs_partial),
                sig17(c.rhs_partial / c.lhs)
            )
        })
        .collect::<Vec<_>>();
    Ok(csv_report(
        &config,
        "M,lhs,rhs_partial,ratio",
        &rows,
        Vec::new(),
    ))
}

fn run_continuum(a: &ContinuumArgs) -> Result<Report, String> {
    let ms = parse_index_list(&a.m_list)?;
    let config = json!({
        "subcommand": "continuum",
        "ell": a.ell,
        "m_list": a.m_list,
    });
    let mut rows = Vec::new();
    for &m in &ms {
        let p = continuum_probe(TestFunction::StandardBump, m, a.ell).map_err(|e| e.to_string())?;
        rows.push(format!(
            "{m},{},{},{},{},{}",
            sig17(p.discrete_lhs),
            sig17(p.discrete_rhs),
            sig17(p.continuous_lhs),
            sig17(p.continuous_rhs),
            sig17(p.discrete_lhs / p.discrete_rhs)
        ));
    }
    Ok(csv_report(
        &config,
        "M,discrete_lhs,discrete_rhs,continuous_lhs,continuous_rhs,ratio",
        &rows,
        Vec::new(),
    ))
}

fn run_zd(a: &ZdArgs) -> Result<Report, String> {
    let config = json!({
        "subcommand": "zd",
        "d": a.d,
        "alpha": a.alpha,
        "radius": a.radius,
        "trials": a.trials,
        "seed": a.seed,
    });
    let report =
        zd_inequality_check(a.alpha, a.d, a.radius, a.trials, a.seed).map_err(|e| e.to_string())?;
    let lead = (a.d as f64 - 2.0 + a.alpha).powi(2) / 4.0;
    let mut table = Vec::new();
    for t in [5i64, 10, 20, 50, 100] {
        let mut x = vec![0i64; a.d];
        x[0] = t;
        let w = zd_weight_exact(a.alpha, a.d, &x).map_err(|e| e.to_string())?;
        table.push(json!({
            "abs_x": t,
            "ratio": w * (t as f64).powf(2.0 - a.alpha) / lead,
        }));
    }
    let mut violations = Vec::new();
    if report.min_margin < -1e-12 {
        violations.push(json!({
            "kind": "negative_margin",
            "min_margin": report.min_margin,
            "trial": report.min_margin_trial,
            "seed": a.seed,
        }));
    }
    let results = json!({
        "params": {"d": a.d, "alpha": a.alpha, "radius": a.radius},
        "min_margin": report.min_margin,
        "min_margin_trial": report.min_margin_trial,
        "leading_ratio_table": table,
    });
    Ok(json_report(&config, results, violations))
}

fn run_lp(a: &LpArgs) -> Result<Report, String> {
    if !(a.p > 1.0) {
        return Err(format!("--p must exceed 1, got {}", a.p));
    }
    let config = json!({
        "subcommand": "lp",
        "p": a.p,
        "trials": a.trials,
        "seed": a.seed,
    });
    let mut violations = Vec::new();
    // Edgewise Picone residuals and the form margin on random graphs.
    let mut min_picone = f64::INFINITY;
    let mut min_form_margin = f64::INFINITY;
    for trial in 0..a.trials {
        let seed = a.seed.wrapping_add(trial);
        let g = graph::random_graph(30, 15, seed);
        let f = random_vertex_function(g.vertices(), 0.5, 2.0, seed ^ 0xa5a5a5a5);
        let u = random_vertex_function(g.vertices(), 0.0, 1.0, seed ^ 0x3c6ef372);
        let v = random_vertex_function(g.vertices(), 0.0, 1.0, seed ^ 0x1f83d9ab);
        for x in g.vertices() {
            for &(y, _) in g.neighbors(x).map_err(|e| e.to_string())? {
                if x < y {
                    let r = picone_residual(&g, &u, &f, a.p, x, y).map_err(|e| e.to_string())?;
                    min_picone = min_picone.min(r);
                    if r < -1e-12 {
                        violations.push(json!({
                            "kind": "negative_picone_residual",
                            "trial": trial,
                            "seed": seed,
                            "edge": [x, y],
                            "residual": r,
                        }));
                    }
                }
            }
        }
        let (lhs, rhs) = lp_form_margin(&g, &v, &f, a.p, &u).map_err(|e| e.to_string())?;
        let margin = (lhs - rhs) / (lhs.abs() + rhs.abs() + 1.0);
        min_form_margin = min_form_margin.min(margin);
        if margin < -1e-12 {
            violations.push(json!({
                "kind": "negative_form_margin",
                "trial": trial,
                "seed": seed,
                "lhs": lhs,
                "rhs": rhs,
            }));
        }
    }
    // Landau averaging inequality on random nonnegative sequences.
    let mut min_landau = f64::INFINITY;
    for trial in 0..a.trials {
        let seed = a.seed.wrapping_add(trial) ^ 0x6a09e667;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = rng.gen_range(1..=60);
        let seq = FiniteSequence::from_fn(1..=len, |_| rng.gen::<f64>());
        let rep = landau_check(&seq, a.p).map_err(|e| e.to_string())?;
        min_landau = min_landau.min(rep.margin);
        if rep.margin < 0.0 {
            violations.push(json!({
                "kind": "negative_landau_margin",
                "trial": trial,
                "seed": seed,
                "lhs": rep.lhs,
                "rhs": rep.rhs,
                "margin": rep.margin,
            }));
        }
    }
    let results = json!({
        "min_picone_residual": min_picone,
        "min_form_margin_normalized": min_form_margin,
        "min_landau_margin": min_landau,
    });
    Ok(json_report(&config, results, violations))
}

fn main() -> ExitCode {
    if let Ok(s) = std::env::var("HARDY_LAB_THREADS") {
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
            _ => {
                eprintln!("error: HARDY_LAB_THREADS must be a positive integer, got {s:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let report = match &cli.cmd {
        Cmd::Weights(a) => run_weights(a),
        Cmd::Identity(a) => run_identity(a),
        Cmd::Sharpness(a) => run_sharpness(a),
        Cmd::Counterexample(a) => run_counterexample(a),
        Cmd::Continuum(a) => run_continuum(a),
        Cmd::Zd(a) => run_zd(a),
        Cmd::Lp(a) => run_lp(a),
    };
    let report = match report {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, &report.body) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", report.body),
    }
    if report.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        for v in &report.violations {
            eprintln!("violation: {v}");
        }
        ExitCode::from(1)
    }
}
