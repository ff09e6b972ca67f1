//! Command-line front end. Every command renders a deterministic report
//! (text or JSON) and an exit code; wall-clock timing goes to stderr only.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::covers::{build_cover_s, build_cover_z, validate_cover_s, validate_cover_z, AlphaBeta, CoverGraph};
use crate::product::ProductGraph;
use crate::solver::{decide_full, support_components, ComponentStatus, Verdict};
use crate::splitting::{build_psi_h, build_psi_k, build_x, cross_validate, labelled_iso, Compare, SplittingSkeleton};
use crate::system::build_full_system;
use crate::trees::{parse_tree_spec, Tree};

/// Bumped whenever a report's JSON shape changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 10;

/// Default cap on the number of system variables (both components together).
pub const DEFAULT_GUARD_VARS: usize = 200_000;
/// Largest path length accepted by `sweep`.
pub const MAX_SWEEP_PATH: usize = 40;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failed(_) => EXIT_FAILED,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

/// What a command prints and returns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmdOutput {
    pub code: i32,
    pub stdout: String,
}

#[derive(Parser, Debug)]
#[command(name = "raag-comm", version, about = "Commensurability tests for right-angled Artin groups of trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide integer feasibility of the linear system of a pair of trees.
    Decide {
        /// Tree spec: path:N, tkk:K, t4:(d,k),...;q or adj:u v ...
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        /// Write both component systems as a JSON array.
        #[arg(long)]
        emit_system: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Decide every pair of paths with lengths in A..B (inclusive).
    Sweep {
        #[arg(long)]
        paths: String,
        #[arg(long)]
        json: bool,
    },
    /// Build and validate the explicit covers.
    Covers {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Which::Both)]
        which: Which,
        /// Write Graphviz output.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Build the model graph and both quotient graphs and compare them.
    Splittings {
        #[arg(long)]
        k: usize,
        /// Also check the induced edge labels against the linear system.
        #[arg(long)]
        cross_validate: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    S,
    Z,
    Both,
}

#[derive(Serialize)]
struct Report<I: Serialize, R: Serialize> {
    schema: u32,
    tool: String,
    command: &'static str,
    inputs: I,
    result: R,
}

fn render<I: Serialize, R: Serialize>(command: &'static str, inputs: I, result: R) -> String {
    let report = Report {
        schema: SCHEMA_VERSION,
        tool: format!("raag-comm {}", env!("CARGO_PKG_VERSION")),
        command,
        inputs,
        result,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("reports serialize");
    s.push('\n');
    s
}

/// The variable cap from `RAAG_GUARD_VARS`, or the default.
pub fn guard_from_env() -> Result<usize, CliError> {
    match std::env::var("RAAG_GUARD_VARS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("RAAG_GUARD_VARS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_GUARD_VARS),
    }
}

#[derive(Serialize)]
struct DecideInputs<'a> {
    left: &'a str,
    right: &'a str,
}

#[derive(Serialize)]
struct WitnessEntry {
    edge: usize,
    k: u8,
    l: u8,
    value: String,
}

#[derive(Serialize)]
struct ComponentReport {
    component: u8,
    variables: usize,
    equalities: usize,
    feasible: bool,
    rounds: usize,
    pruned: usize,
    support_variables: usize,
    /// Connected pieces of the witness support, when feasible.
    support_components: Option<usize>,
    /// Index of the strict sum left without support, when infeasible.
    empty_strict_sum: Option<usize>,
    /// Nonzero witness entries, when feasible.
    witness: Option<Vec<WitnessEntry>>,
}

#[derive(Serialize)]
struct DecideResult {
    verdict: Verdict,
    note: &'static str,
    product_vertices: usize,
    product_edges: usize,
    components: Vec<ComponentReport>,
}

const FEASIBLE_NOTE: &str = "feasible is only a necessary condition for commensurability";
const INFEASIBLE_NOTE: &str = "no integer solution: the groups are not commensurable";

fn parse_tree(spec: &str) -> Result<Tree, CliError> {
    parse_tree_spec(spec).map_err(usage)
}

fn decide_pair(left: &Tree, right: &Tree, guard: usize) -> Result<crate::solver::Decision, CliError> {
    let p = ProductGraph::of_reductions(left, right).map_err(usage)?;
    let vars = 4 * p.edges().len();
    if vars > guard {
        return Err(usage(format!(
            "system would have {vars} variables, above the cap of {guard} (RAAG_GUARD_VARS)"
        )));
    }
    let full = build_full_system(left, right).map_err(usage)?;
    decide_full(full).map_err(failed)
}

pub fn cmd_decide(
    left_spec: &str,
    right_spec: &str,
    emit_system: Option<&Path>,
    json: bool,
    guard: usize,
) -> Result<CmdOutput, CliError> {
    let left = parse_tree(left_spec)?;
    let right = parse_tree(right_spec)?;
    let mut decision = decide_pair(&left, &right, guard)?;
    decision.full = decision.full.with_pair(left_spec, right_spec);
    if let Some(path) = emit_system {
        let systems = serde_json::to_string(&decision.full.systems).expect("systems serialize");
        std::fs::write(path, systems).map_err(|e| failed(format!("{}: {e}", path.display())))?;
    }
    let verdict = decision.verdict();
    let components: Vec<ComponentReport> = decision
        .outcomes
        .iter()
        .zip(&decision.full.systems)
        .map(|(o, s)| ComponentReport {
            component: o.component,
            variables: s.num_vars(),
            equalities: s.equalities.len(),
            feasible: o.is_feasible(),
            rounds: o.rounds,
            pruned: o.trace.len(),
            support_variables: o.support.len(),
            support_components: o
                .witness()
                .map(|w| support_components(&decision.full.product, s, w).len()),
            empty_strict_sum: match o.status {
                ComponentStatus::Infeasible { strict_sum } => Some(strict_sum),
                ComponentStatus::Feasible { .. } => None,
            },
            witness: o.witness().map(|w| {
                w.iter()
                    .zip(&s.variables)
                    .filter(|(v, _)| v.sign() != num_bigint::Sign::NoSign)
                    .map(|(v, id)| WitnessEntry {
                        edge: id.edge,
                        k: id.k,
                        l: id.l,
                        value: v.to_string(),
                    })
                    .collect()
            }),
        })
        .collect();
    let result = DecideResult {
        verdict,
        note: if verdict == Verdict::Feasible { FEASIBLE_NOTE } else { INFEASIBLE_NOTE },
        product_vertices: decision.full.product.vertex_count(),
        product_edges: decision.full.product.edges().len(),
        components,
    };
    let code = match verdict {
        Verdict::Feasible => EXIT_FEASIBLE,
        Verdict::Infeasible => EXIT_INFEASIBLE,
    };
    let stdout = if json {
        render(
            "decide",
            DecideInputs {
                left: left_spec,
                right: right_spec,
            },
            result,
        )
    } else {
        let mut s = String::new();
        writeln!(s, "left:  {left_spec}").unwrap();
        writeln!(s, "right: {right_spec}").unwrap();
        writeln!(
            s,
            "product: {} vertices, {} oriented edges",
            result.product_vertices, result.product_edges
        )
        .unwrap();
        for c in &result.components {
            let status = if c.feasible {
                format!(
                    "feasible, support {} of {} variables in {} connected piece(s)",
                    c.support_variables,
                    c.variables,
                    c.support_components.unwrap_or(0)
                )
            } else {
                format!("infeasible, strict sum {} has no support", c.empty_strict_sum.unwrap())
            };
            writeln!(
                s,
                "component {}: {} variables, {} rounds, {} pruned; {status}",
                c.component, c.variables, c.rounds, c.pruned
            )
            .unwrap();
        }
        let word = match verdict {
            Verdict::Feasible => "feasible",
            Verdict::Infeasible => "infeasible",
        };
        writeln!(s, "verdict: {word} ({})", result.note).unwrap();
        s
    };
    Ok(CmdOutput { code, stdout })
}

/// Parses `A..B` into an inclusive range.
pub fn parse_range(text: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| usage(format!("expected A..B, got `{text}`")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("expected A..B, got `{text}`")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a < 5 || a > b || b > MAX_SWEEP_PATH {
        return Err(usage(format!("need 5 <= A <= B <= {MAX_SWEEP_PATH}, got {a}..{b}")));
    }
    Ok((a, b))
}

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    m: usize,
    verdict: Verdict,
}

#[derive(Serialize)]
struct SweepResult {
    pairs: Vec<SweepRow>,
    off_diagonal_infeasible: bool,
}

/// Decides `(P_n, P_m)` for all `A <= n <= m <= B`. Exit 0 when every
/// off-diagonal pair is infeasible and every diagonal pair feasible.
pub fn cmd_sweep(range: &str, json: bool, guard: usize) -> Result<CmdOutput, CliError> {
    let (a, b) = parse_range(range)?;
    let pairs: Vec<(usize, usize)> = (a..=b).flat_map(|n| (n..=b).map(move |m| (n, m))).collect();
    let rows = pairs
        .par_iter()
        .map(|&(n, m)| {
            let d = decide_pair(&Tree::path(n), &Tree::path(m), guard)?;
            Ok(SweepRow { n, m, verdict: d.verdict() })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let expected = |r: &SweepRow| (r.n == r.m) == (r.verdict == Verdict::Feasible);
    let all_ok = rows.iter().all(expected);
    let result = SweepResult {
        off_diagonal_infeasible: rows.iter().filter(|r| r.n != r.m).all(|r| r.verdict == Verdict::Infeasible),
        pairs: rows,
    };
    let stdout = if json {
        render("sweep", serde_json::json!({ "paths": range }), &result)
    } else {
        let mut s = String::from("n\tm\tverdict\n");
        for r in &result.pairs {
            let word = match r.verdict {
                Verdict::Feasible => "feasible",
                Verdict::Infeasible => "infeasible",
            };
            writeln!(s, "{}\t{}\t{word}", r.n, r.m).unwrap();
        }
        writeln!(
            s,
            "off-diagonal pairs all infeasible: {}",
            if result.off_diagonal_infeasible { "yes" } else { "no" }
        )
        .unwrap();
        s
    };
    Ok(CmdOutput {
        code: if all_ok { EXIT_FEASIBLE } else { EXIT_FAILED },
        stdout,
    })
}

#[derive(Serialize)]
struct LetterCensus {
    letter: String,
    /// Cycle lengths, decreasing.
    cycles: Vec<usize>,
}

#[derive(Serialize)]
struct CoverReportJson {
    name: &'static str,
    vertices: usize,
    basepoint: usize,
    /// The construction was completed by a documented choice (k = 1).
    degenerate: bool,
    passed: bool,
    violations: Vec<String>,
    census: Vec<LetterCensus>,
    alpha_beta: Option<AlphaBeta>,
}

fn census(c: &CoverGraph) -> Vec<LetterCensus> {
    c.alphabet()
        .iter()
        .enumerate()
        .map(|(x, letter)| LetterCensus {
            letter: letter.clone(),
            cycles: c.census(x),
        })
        .collect()
}

pub fn cmd_covers(k: usize, which: Which, dot: Option<&Path>, json: bool) -> Result<CmdOutput, CliError> {
    if k == 0 {
        return Err(usage("k must be at least 1"));
    }
    let mut reports = Vec::new();
    let mut dots = String::new();
    if which != Which::Z {
        let s = build_cover_s(k).map_err(usage)?;
        let r = validate_cover_s(&s, k);
        dots.push_str(&s.to_dot("S"));
        reports.push(CoverReportJson {
            name: "S",
            vertices: s.vertex_count(),
            basepoint: s.basepoint(),
            degenerate: k == 1,
            passed: r.is_ok(),
            violations: r.violations,
            census: census(&s),
            alpha_beta: None,
        });
    }
    if which != Which::S {
        let (z, ab) = build_cover_z(k).map_err(usage)?;
        let r = validate_cover_z(&z, k);
        dots.push_str(&z.to_dot("Z"));
        reports.push(CoverReportJson {
            name: "Z",
            vertices: z.vertex_count(),
            basepoint: z.basepoint(),
            degenerate: k == 1,
            passed: r.is_ok(),
            violations: r.violations,
            census: census(&z),
            alpha_beta: Some(ab),
        });
    }
    if let Some(path) = dot {
        std::fs::write(path, &dots).map_err(|e| failed(format!("{}: {e}", path.display())))?;
    }
    let passed = reports.iter().all(|r| r.passed);
    let stdout = if json {
        render("covers", serde_json::json!({ "k": k, "which": which }), &reports)
    } else {
        let mut s = String::new();
        for r in &reports {
            writeln!(
                s,
                "cover {}: {} vertices, basepoint {}: {}{}",
                r.name,
                r.vertices,
                r.basepoint,
                if r.passed { "pass" } else { "FAIL" },
                if r.degenerate { " (degenerate k = 1 completion)" } else { "" }
            )
            .unwrap();
            for c in &r.census {
                writeln!(s, "  {}: cycles {:?}", c.letter, c.cycles).unwrap();
            }
            for v in &r.violations {
                writeln!(s, "  violation: {v}").unwrap();
            }
            if let Some(ab) = &r.alpha_beta {
                for (name, fam) in [
                    ("alpha", &ab.alpha),
                    ("alpha'", &ab.alpha_prime),
                    ("beta", &ab.beta),
                    ("beta'", &ab.beta_prime),
                ] {
                    for (i, list) in fam {
                        writeln!(s, "  {name}_{i}: {list:?}").unwrap();
                    }
                }
            }
        }
        s
    };
    Ok(CmdOutput {
        code: if passed { EXIT_FEASIBLE } else { EXIT_FAILED },
        stdout,
    })
}

#[derive(Serialize)]
struct SkeletonSummary {
    name: &'static str,
    vertices: usize,
    edges: usize,
    /// `(rank, count)` pairs, ascending by rank.
    ranks: Vec<(u64, usize)>,
    violations: Vec<String>,
}

fn summary(name: &'static str, s: &SplittingSkeleton) -> SkeletonSummary {
    SkeletonSummary {
        name,
        vertices: s.vertex_count(),
        edges: s.edges.len(),
        ranks: s.rank_multiset().into_iter().collect(),
        violations: s.validate(),
    }
}

#[derive(Serialize)]
struct IsoVerdict {
    pair: (&'static str, &'static str),
    isomorphic: bool,
}

#[derive(Serialize)]
struct CrossReport {
    passed: bool,
    isomorphisms_tried: usize,
    component: Option<u8>,
    violations: usize,
    ratios_integral: bool,
}

#[derive(Serialize)]
struct SplittingsResult {
    skeletons: Vec<SkeletonSummary>,
    isomorphisms: Vec<IsoVerdict>,
    cross_validation: Option<CrossReport>,
}

pub fn cmd_splittings(k: usize, cross: bool, json: bool) -> Result<CmdOutput, CliError> {
    if k == 0 {
        return Err(usage("k must be at least 1"));
    }
    let x = build_x(k).map_err(failed)?;
    let (_, h) = build_psi_h(k).map_err(failed)?;
    let (_, kk) = build_psi_k(k).map_err(failed)?;
    let isomorphisms = vec![
        IsoVerdict {
            pair: ("X", "H"),
            isomorphic: labelled_iso(&x, &h, Compare::Ranks).is_some(),
        },
        IsoVerdict {
            pair: ("X", "K"),
            isomorphic: labelled_iso(&x, &kk, Compare::Ranks).is_some(),
        },
        IsoVerdict {
            pair: ("H", "K"),
            isomorphic: labelled_iso(&h, &kk, Compare::Ranks).is_some(),
        },
    ];
    let cross_validation = if cross {
        let cv = cross_validate(k).map_err(failed)?;
        Some(CrossReport {
            passed: cv.passed(),
            isomorphisms_tried: cv.isomorphisms_tried,
            component: cv.component,
            violations: cv.report.as_ref().map_or(0, |r| r.violations.len()),
            ratios_integral: cv.ratios.is_some(),
        })
    } else {
        None
    };
    let result = SplittingsResult {
        skeletons: vec![summary("X", &x), summary("H", &h), summary("K", &kk)],
        isomorphisms,
        cross_validation,
    };
    let passed = result.isomorphisms.iter().all(|i| i.isomorphic)
        && result.skeletons.iter().all(|s| s.violations.is_empty())
        && result.cross_validation.as_ref().is_none_or(|c| c.passed);
    let stdout = if json {
        render(
            "splittings",
            serde_json::json!({ "k": k, "cross_validate": cross }),
            &result,
        )
    } else {
        let mut s = String::new();
        for sk in &result.skeletons {
            writeln!(
                s,
                "{}: {} vertices, {} edges, ranks {:?}",
                sk.name, sk.vertices, sk.edges, sk.ranks
            )
            .unwrap();
            for v in &sk.violations {
                writeln!(s, "  violation: {v}").unwrap();
            }
        }
        for iso in &result.isomorphisms {
            writeln!(
                s,
                "{} ~ {} on ranks: {}",
                iso.pair.0,
                iso.pair.1,
                if iso.isomorphic { "yes" } else { "no" }
            )
            .unwrap();
        }
        if let Some(c) = &result.cross_validation {
            writeln!(
                s,
                "cross-validation: {} (component {:?}, {} isomorphism(s) tried, {} violations, ratios integral: {})",
                if c.passed { "pass" } else { "FAIL" },
                c.component,
                c.isomorphisms_tried,
                c.violations,
                c.ratios_integral
            )
            .unwrap();
        }
        s
    };
    Ok(CmdOutput {
        code: if passed { EXIT_FEASIBLE } else { EXIT_FAILED },
        stdout,
    })
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<CmdOutput, CliError> {
    match &cli.command {
        Command::Decide {
            left,
            right,
            emit_system,
            json,
        } => cmd_decide(left, right, emit_system.as_deref(), *json, guard_from_env()?),
        Command::Sweep { paths, json } => cmd_sweep(paths, *json, guard_from_env()?),
        Command::Covers { k, which, dot, json } => cmd_covers(*k, *which, dot.as_deref(), *json),
        Command::Splittings {
            k,
            cross_validate,
            json,
        } => cmd_splittings(*k, *cross_validate, *json),
    }
}

/// Parses arguments, runs the command, prints, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_FEASIBLE };
        }
    };
    let start = Instant::now();
    let outcome = execute(&cli);
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(out) => {
            print!("{}", out.stdout);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("5..8").unwrap(), (5, 8));
        assert_eq!(parse_range("5..5").unwrap(), (5, 5));
        assert!(parse_range("4..8").is_err());
        assert!(parse_range("8..5").is_err());
        assert!(parse_range("5-8").is_err());
    }

    #[test]
    fn decide_exit_codes() {
        let out = cmd_decide("path:3", "path:5", None, false, DEFAULT_GUARD_VARS).unwrap();
        assert_eq!(out.code, EXIT_INFEASIBLE);
        let out = cmd_decide("path:5", "path:5", None, false, DEFAULT_GUARD_VARS).unwrap();
        assert_eq!(out.code, EXIT_FEASIBLE);
        assert!(out.stdout.contains("necessary condition"));
        let err = cmd_decide("path:2", "path:5", None, false, DEFAULT_GUARD_VARS).unwrap_err();
        assert_eq!(err.code(), EXIT_USAGE);
        let err = cmd_decide("nope", "path:5", None, false, DEFAULT_GUARD_VARS).unwrap_err();
        assert_eq!(err.code(), EXIT_USAGE);
    }

    #[test]
    fn guard_rejects_large_systems() {
        let err = cmd_decide("path:5", "path:5", None, false, 10).unwrap_err();
        assert_eq!(err.code(), EXIT_USAGE);
    }

    #[test]
    fn json_reports_are_reproducible() {
        let a = cmd_decide("path:4", "path:4", None, true, DEFAULT_GUARD_VARS).unwrap();
        let b = cmd_decide("path:4", "path:4", None, true, DEFAULT_GUARD_VARS).unwrap();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a.stdout).unwrap();
        assert_eq!(v["schema"], SCHEMA_VERSION);
        assert_eq!(v["result"]["verdict"], "feasible");
    }

    #[test]
    fn covers_k1_flags_degeneracy() {
        let out = cmd_covers(1, Which::S, None, true).unwrap();
        assert_eq!(out.code, 0);
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["result"][0]["degenerate"], true);
    }

    #[test]
    fn clap_usage_error_is_exit_2() {
        assert_eq!(run(["raag-comm", "decide", "--left", "path:3"]), EXIT_USAGE);
        assert_eq!(run(["raag-comm", "bogus"]), EXIT_USAGE);
    }
}
