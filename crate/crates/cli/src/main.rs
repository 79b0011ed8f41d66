//! Command-line front end for the stable matching toolkit.
//!
//! Exit codes: 0 success, 1 no stable matching, 2 precondition violation,
//! 3 parse or usage error.

mod formats;
mod report;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use srp_core::irving::{find_stable_matching, perfect_core, phase_one};
use srp_core::oracle;
use srp_core::polytope::{self, Constraint, PolytopeError, PolytopeVariant, Verdict};
use srp_core::reduction::{self, Reducibility};
use srp_core::solver::{self, SolverError};
use srp_core::{approx, Matching, PreferenceSystem};

use formats::{emit_instance, parse_matching, parse_point, parse_weights, rat_json};
use report::{edge_json, instance_info, matching_json, matching_text, Report};

const EXIT_NO_STABLE: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_PARSE: u8 = 3;

#[derive(Parser)]
#[command(name = "srp", about = "stable matchings with incomplete strict preferences")]
struct Cli {
    /// Emit a JSON report instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Find one stable matching.
    Solve { instance: PathBuf },
    /// Strip redundant edges and emit the requested artifact.
    Reduce {
        instance: PathBuf,
        /// gi: phase-one subgraph, h: canonical subgraph, em: stable edges,
        /// log: removed edges in order
        #[arg(long, value_enum, default_value = "h")]
        emit: EmitKind,
    },
    /// Verify a matching file against the instance.
    Check { instance: PathBuf, matching: PathBuf },
    /// Decide whether the canonical subgraph is bipartite.
    Reducible { instance: PathBuf },
    /// Stable matching of minimum (or maximum) total weight.
    Optimize {
        instance: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        /// Maximize instead of minimize.
        #[arg(long)]
        max: bool,
        #[arg(long, value_enum, default_value = "exact")]
        method: Method,
    },
    /// List all stable matchings.
    Enumerate {
        instance: PathBuf,
        /// Print at most this many matchings; the count is always exact.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Test a fractional point for membership in a stable matching polytope.
    Polytope {
        instance: PathBuf,
        #[arg(long)]
        point: PathBuf,
        #[arg(long, value_enum)]
        variant: Variant,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitKind {
    Gi,
    H,
    Em,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Approx,
    Brute,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Fsm,
    FsmPrime,
    FsmBar,
}

impl Variant {
    fn core(self) -> PolytopeVariant {
        match self {
            Variant::Fsm => PolytopeVariant::Fsm,
            Variant::FsmPrime => PolytopeVariant::FsmPrime,
            Variant::FsmBar => PolytopeVariant::FsmBar,
        }
    }
}

/// A finished command: what to print and how to exit.
struct Outcome {
    exit: u8,
    human: String,
    result: Value,
    stats: Value,
    warnings: Vec<String>,
}

impl Outcome {
    fn ok(human: String, result: Value, stats: Value) -> Self {
        Outcome { exit: 0, human, result, stats, warnings: Vec::new() }
    }

    fn no_stable() -> Self {
        Outcome {
            exit: EXIT_NO_STABLE,
            human: "no stable matching\n".into(),
            result: json!({ "status": "no-stable-matching" }),
            stats: json!({}),
            warnings: Vec::new(),
        }
    }
}

/// A failed command; the message goes to stderr.
struct Failure {
    exit: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure { exit: EXIT_PARSE, message: message.into() }
    }

    fn precondition(message: impl Into<String>) -> Self {
        Failure { exit: EXIT_PRECONDITION, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, instance_path) = describe(&cli.cmd);
    let ps = match load_instance(instance_path) {
        Ok(ps) => ps,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.exit);
        }
    };
    match dispatch(&cli.cmd, &ps) {
        Ok(out) => {
            if cli.json {
                let rep = Report {
                    command: name,
                    instance: instance_info(&ps),
                    result: out.result,
                    warnings: out.warnings,
                    stats: out.stats,
                };
                println!("{}", serde_json::to_string_pretty(&rep.to_json()).unwrap());
            } else {
                for w in &out.warnings {
                    eprintln!("warning: {w}");
                }
                print!("{}", out.human);
            }
            ExitCode::from(out.exit)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.exit)
        }
    }
}

fn describe(cmd: &Cmd) -> (&'static str, &Path) {
    match cmd {
        Cmd::Solve { instance } => ("solve", instance),
        Cmd::Reduce { instance, .. } => ("reduce", instance),
        Cmd::Check { instance, .. } => ("check", instance),
        Cmd::Reducible { instance } => ("reducible", instance),
        Cmd::Optimize { instance, .. } => ("optimize", instance),
        Cmd::Enumerate { instance, .. } => ("enumerate", instance),
        Cmd::Polytope { instance, .. } => ("polytope", instance),
    }
}

fn load_instance(path: &Path) -> Result<PreferenceSystem, Failure> {
    let text = read_file(path)?;
    PreferenceSystem::parse(&text)
        .map_err(|m| Failure::parse(format!("{}: {m}", path.display())))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn dispatch(cmd: &Cmd, ps: &PreferenceSystem) -> Result<Outcome, Failure> {
    match cmd {
        Cmd::Solve { .. } => cmd_solve(ps),
        Cmd::Reduce { emit, .. } => cmd_reduce(ps, *emit),
        Cmd::Check { matching, .. } => cmd_check(ps, matching),
        Cmd::Reducible { .. } => cmd_reducible(ps),
        Cmd::Optimize { weights, max, method, .. } => cmd_optimize(ps, weights, *max, *method),
        Cmd::Enumerate { limit, .. } => cmd_enumerate(ps, *limit),
        Cmd::Polytope { point, variant, .. } => cmd_polytope(ps, point, *variant),
    }
}

fn cmd_solve(ps: &PreferenceSystem) -> Result<Outcome, Failure> {
    match find_stable_matching(ps) {
        Some(m) => Ok(Outcome::ok(
            matching_text(&m),
            json!({ "matching": matching_json(&m) }),
            json!({ "matched": m.len() * 2 }),
        )),
        None => Ok(Outcome::no_stable()),
    }
}

fn cmd_reduce(ps: &PreferenceSystem, emit: EmitKind) -> Result<Outcome, Failure> {
    if find_stable_matching(ps).is_none() {
        return Ok(Outcome::no_stable());
    }
    let p1 = phase_one(ps);
    let core = perfect_core(ps).expect("stable matching exists");
    let red = reduction::reduce_to_h(&core).expect("core is in perfect-core form");
    let stats = json!({
        "removed_phase_one": p1.removed.len(),
        "removed_elimination": red.removal_log.len(),
    });
    let (human, result) = match emit {
        EmitKind::Gi => (
            emit_instance(&p1.surviving),
            json!({ "emit": "gi", "edges": edges_json(p1.surviving.edges()) }),
        ),
        EmitKind::H => (
            emit_instance(&red.h),
            json!({ "emit": "h", "edges": edges_json(red.h.edges()) }),
        ),
        EmitKind::Em => {
            let mut text = String::new();
            for &e in &red.em.in_em {
                text.push_str(&format!("{e}\n"));
            }
            (
                text,
                json!({ "emit": "em", "edges": edges_json(red.em.in_em.iter().copied()) }),
            )
        }
        EmitKind::Log => {
            let mut text = String::new();
            for &e in p1.removed.iter().chain(red.removal_log.iter()) {
                text.push_str(&format!("{e}\n"));
            }
            (
                text,
                json!({
                    "emit": "log",
                    "phase_one": edges_json(p1.removed.iter().copied()),
                    "elimination": edges_json(red.removal_log.iter().copied()),
                }),
            )
        }
    };
    Ok(Outcome::ok(human, result, stats))
}

fn edges_json(edges: impl IntoIterator<Item = srp_core::Edge>) -> Value {
    Value::Array(edges.into_iter().map(edge_json).collect())
}

fn cmd_check(ps: &PreferenceSystem, matching: &Path) -> Result<Outcome, Failure> {
    let text = read_file(matching)?;
    let m = parse_matching(ps, &text)
        .map_err(|e| Failure::parse(format!("{}: {e}", matching.display())))?;
    match srp_core::model::is_stable(ps, &m) {
        srp_core::model::Stability::Stable => Ok(Outcome::ok(
            "stable\n".into(),
            json!({ "stable": true }),
            json!({ "matched": m.len() * 2 }),
        )),
        srp_core::model::Stability::Unstable { witness } => Ok(Outcome::ok(
            format!("unstable: blocking edge {witness}\n"),
            json!({ "stable": false, "blocking_edge": edge_json(witness) }),
            json!({ "matched": m.len() * 2 }),
        )),
    }
}

fn cmd_reducible(ps: &PreferenceSystem) -> Result<Outcome, Failure> {
    if find_stable_matching(ps).is_none() {
        return Ok(Outcome::no_stable());
    }
    let core = perfect_core(ps).expect("stable matching exists");
    let verdict = reduction::is_bipartite_reducible(&core)
        .expect("core is in perfect-core form");
    match verdict {
        Reducibility::Reducible { parts: (a, b) } => Ok(Outcome::ok(
            format!("reducible\nA: {}\nB: {}\n", ids(&a), ids(&b)),
            json!({ "reducible": true, "parts": [a, b] }),
            json!({}),
        )),
        Reducibility::NotReducible => Ok(Outcome::ok(
            "not reducible\n".into(),
            json!({ "reducible": false }),
            json!({}),
        )),
    }
}

fn ids(s: &BTreeSet<u32>) -> String {
    s.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_optimize(
    ps: &PreferenceSystem,
    weights: &Path,
    max: bool,
    method: Method,
) -> Result<Outcome, Failure> {
    let text = read_file(weights)?;
    let (w, warnings) = parse_weights(ps, &text)
        .map_err(|e| Failure::parse(format!("{}: {e}", weights.display())))?;
    let direction = if max { oracle::Direction::Max } else { oracle::Direction::Min };
    let mut outcome = match method {
        Method::Exact => match solver::optimize_exact(ps, &w, direction) {
            Ok((m, val)) => Outcome::ok(
                format!("{}weight {val}\n", matching_text(&m)),
                json!({ "matching": matching_json(&m), "weight": rat_json(&val) }),
                json!({ "method": "exact" }),
            ),
            Err(SolverError::NoStableMatching) => Outcome::no_stable(),
            Err(e) => return Err(Failure::precondition(e.to_string())),
        },
        Method::Brute => match oracle::brute_optimum(ps, &w, direction) {
            Ok((m, val)) => Outcome::ok(
                format!("{}weight {val}\n", matching_text(&m)),
                json!({ "matching": matching_json(&m), "weight": rat_json(&val) }),
                json!({ "method": "brute" }),
            ),
            Err(oracle::OracleError::NoStableMatching) => Outcome::no_stable(),
            Err(e) => return Err(Failure::precondition(e.to_string())),
        },
        Method::Approx => {
            if max {
                return Err(Failure::parse("--method approx only minimizes"));
            }
            match approx::approximate_min_weight(ps, &w) {
                Ok((m, val, bound)) => Outcome::ok(
                    format!("{}weight {val}\nbound {bound}\n", matching_text(&m)),
                    json!({
                        "matching": matching_json(&m),
                        "weight": rat_json(&val),
                        "bound": rat_json(&bound),
                    }),
                    json!({
                        "method": "approx",
                        "fallback_invocations": approx::fallback_invocations(),
                    }),
                ),
                Err(approx::ApproxError::NoStableMatching) => Outcome::no_stable(),
                Err(e) => return Err(Failure::precondition(e.to_string())),
            }
        }
    };
    outcome.warnings = warnings;
    Ok(outcome)
}

fn cmd_enumerate(ps: &PreferenceSystem, limit: Option<usize>) -> Result<Outcome, Failure> {
    let matchings: Vec<Matching> = if ps.num_agents() <= oracle::DEFAULT_BOUND {
        oracle::enumerate_stable_matchings(ps)
            .expect("bound checked")
            .iter()
            .cloned()
            .collect()
    } else {
        // too large to exhaust; go through the rotation structure, which
        // needs the canonical subgraph to be bipartite
        match find_stable_matching(ps) {
            None => Vec::new(),
            Some(_) => {
                let core = perfect_core(ps).expect("stable matching exists");
                let red = reduction::reduce_to_h(&core)
                    .expect("core is in perfect-core form");
                let (side, _) = reduction::bipartition(&red.h).ok_or_else(|| {
                    Failure::precondition(
                        "instance exceeds the exhaustive bound and is not bipartite-reducible",
                    )
                })?;
                let ones = srp_core::EdgeWeights::ones(&red.h);
                let rs = solver::rotation_system(&red.h, &side, &ones)
                    .expect("side comes from a bipartition");
                let mut out: BTreeSet<Matching> = BTreeSet::new();
                for closed in rs.closed_subsets() {
                    out.insert(rs.apply(&red.h, &closed));
                }
                out.into_iter().collect()
            }
        }
    };
    let count = matchings.len();
    let shown = limit.unwrap_or(count).min(count);
    let mut human = format!("{count} stable matching(s)\n");
    for m in matchings.iter().take(shown) {
        human.push_str(&format!("-- {}\n", m.edges().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")));
    }
    Ok(Outcome::ok(
        human,
        json!({
            "count": count,
            "matchings": matchings.iter().take(shown).map(matching_json).collect::<Vec<_>>(),
            "truncated": shown < count,
        }),
        json!({}),
    ))
}

fn cmd_polytope(
    ps: &PreferenceSystem,
    point: &Path,
    variant: Variant,
) -> Result<Outcome, Failure> {
    let text = read_file(point)?;
    let x = parse_point(ps, &text)
        .map_err(|e| Failure::parse(format!("{}: {e}", point.display())))?;
    match polytope::membership(ps, variant.core(), &x) {
        Ok(Verdict::Member) => Ok(Outcome::ok(
            "member\n".into(),
            json!({ "member": true, "violated": [] }),
            json!({}),
        )),
        Ok(Verdict::Violated(cs)) => {
            let mut human = String::from("not a member\n");
            for c in &cs {
                human.push_str(&format!("violated: {}\n", constraint_text(c)));
            }
            Ok(Outcome::ok(
                human,
                json!({
                    "member": false,
                    "violated": cs.iter().map(constraint_json).collect::<Vec<_>>(),
                }),
                json!({}),
            ))
        }
        Err(PolytopeError::NotPerfectCore) => Err(Failure::precondition(
            "variant needs the stable-edge set, which requires perfect-core form",
        )),
        Err(e) => Err(Failure::precondition(e.to_string())),
    }
}

fn constraint_text(c: &Constraint) -> String {
    match c {
        Constraint::Capacity(v) => format!("capacity at agent {v}"),
        Constraint::Stability(e) => format!("stability at edge {e}"),
        Constraint::Nonnegative(e) => format!("nonnegativity at edge {e}"),
        Constraint::Support(e) => format!("support at edge {e}"),
    }
}

fn constraint_json(c: &Constraint) -> Value {
    match c {
        Constraint::Capacity(v) => json!({ "kind": "capacity", "agent": v }),
        Constraint::Stability(e) => json!({ "kind": "stability", "edge": edge_json(*e) }),
        Constraint::Nonnegative(e) => json!({ "kind": "nonnegative", "edge": edge_json(*e) }),
        Constraint::Support(e) => json!({ "kind": "support", "edge": edge_json(*e) }),
    }
}
