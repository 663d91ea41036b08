//! Command-line surface tying all modules together.
//!
//! Subcommands: `generate`, `validate`, `euler`, `parity`, `regions`,
//! `menger`, `decompose`, `embed`, `export`. Reports are rendered as JSON
//! (deterministic, sorted keys) or as flat text carrying the same facts.
//!
//! Exit codes: 0 for certified-positive verdicts, 1 for certified-negative,
//! 2 for undetermined or inconclusive outcomes, 3 for usage and IO errors.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::euler::{self, DichotomyVerdict, EulerVerdict};
use crate::generators::{self, figure_one_system, BaseGraph, GeneratorKind, GeneratorSpec};
use crate::multigraph::VertexId;
use crate::parity::{self, ParityVerdict, DEFAULT_ORACLE_BOUND};
use crate::prosys::{CylinderSet, InverseSystem, VertexThread};
use crate::regions::{self, Region, DEFAULT_INFINITE_THRESHOLD};
use crate::{embed, menger};

/// Level sizes of a system, echoed in every report that loads one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemDigest {
    pub levels: usize,
    pub vertex_counts: Vec<usize>,
    pub edge_counts: Vec<usize>,
}

impl SystemDigest {
    pub fn of(sys: &InverseSystem) -> Self {
        SystemDigest {
            levels: sys.levels.len(),
            vertex_counts: sys.levels.iter().map(|g| g.vertex_count()).collect(),
            edge_counts: sys.levels.iter().map(|g| g.edge_count()).collect(),
        }
    }
}

/// Everything a command reports: the echoed command line, the digest of the
/// loaded system (when one was loaded), and the command-specific facts.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digest: Option<SystemDigest>,
    pub facts: Value,
}

#[derive(Parser)]
#[command(name = "glc", disable_help_flag = false)]
struct Cli {
    /// Report rendering: json or text.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct a system: a constant base (triangle, path, parallel,
    /// figure8, c4), ladder, cbs, cbc, xl, hawaiian, tangent, random, or
    /// figure1.
    Generate {
        kind: String,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        /// Chord pattern for the tangent chain, one bit per circle.
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the bond laws and report every violation.
    Validate { system: PathBuf },
    /// Eulerian certification, chains, circuit counts, and the
    /// stabilize-or-grow probe.
    Euler {
        system: PathBuf,
        /// Certify an open Eulerian path instead of a closed one.
        #[arg(long)]
        open: bool,
        /// Also produce the compatible circuit chain.
        #[arg(long)]
        chain: bool,
        /// Count rooted circuits per level.
        #[arg(long)]
        count: bool,
        /// Evidence probe for the stabilize-or-grow dichotomy.
        #[arg(long)]
        probe: bool,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
    /// Cut parity of a thread: certification, strong/weak degree, oracle.
    Parity {
        system: PathBuf,
        /// Comma-separated per-level classes, a deepest-level class name,
        /// or an alias: 0/least, 1/greatest, left-end, right-end.
        #[arg(long)]
        thread: String,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long)]
        strong: bool,
        #[arg(long)]
        oracle: bool,
    },
    /// Odd regions: minimal search, the nested chase, and the contraction
    /// machine.
    Regions {
        system: PathBuf,
        #[arg(long)]
        chase: bool,
        #[arg(long)]
        machine: bool,
        /// Region for the machine, as LEVEL:cell,cell,…
        #[arg(long)]
        u: Option<String>,
        /// Even boundary budget for the machine.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        /// Fibre size standing in for "infinite".
        #[arg(long)]
        threshold: Option<usize>,
    },
    /// Edge-disjoint connectivity between two cylinder sets.
    Menger {
        system: PathBuf,
        /// Cylinder as LEVEL:cell,cell,…
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
    /// Edge-disjoint cycle decomposition of one level.
    Decompose {
        system: PathBuf,
        #[arg(long)]
        level: Option<usize>,
    },
    /// Run the standard-subspace embedding recursion and write the trace.
    Embed {
        system: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-serialize a system (canonical JSON) or render a level as DOT.
    Export {
        system: PathBuf,
        #[arg(long)]
        level: Option<usize>,
        /// Emit DOT instead of JSON.
        #[arg(long)]
        dot: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn report(command: &[String], digest: Option<SystemDigest>, facts: Value) -> Report {
    Report {
        command: command.to_vec(),
        digest,
        facts,
    }
}

fn error_report(command: &[String], code: i32, message: String) -> (i32, Report) {
    (code, report(command, None, json!({ "error": message })))
}

fn load_system(path: &Path) -> std::result::Result<InverseSystem, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("malformed JSON in {}: {e}", path.display()))
}

fn write_artifact(path: &Path, content: &str) -> std::result::Result<(), String> {
    std::fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn parse_cylinder(sys: &InverseSystem, s: &str) -> Result<CylinderSet> {
    let (level, cells) = s
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("expected LEVEL:cells, got {s}")))?;
    let level: usize = level
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad level in {s}")))?;
    sys.level(level)?;
    let cells: BTreeSet<VertexId> = cells
        .split(',')
        .filter(|c| !c.is_empty())
        .map(VertexId::new)
        .collect();
    if cells.is_empty() {
        return Err(Error::InvalidInput(format!("no cells in {s}")));
    }
    for c in &cells {
        if !sys.level(level)?.contains_vertex(c) {
            return Err(Error::NotFound(format!("class {c} at level {level}")));
        }
    }
    Ok(CylinderSet { level, cells })
}

fn parse_thread(sys: &InverseSystem, s: &str) -> Result<VertexThread> {
    if s.contains(',') {
        let t = VertexThread {
            vertices: s.split(',').map(VertexId::new).collect(),
        };
        sys.check_thread(&t)?;
        return Ok(t);
    }
    let deepest = sys.deepest();
    let pick = |v: Option<&VertexId>| {
        v.cloned()
            .ok_or_else(|| Error::InvalidInput("empty deepest level".into()))
    };
    let name = match s {
        "0" | "least" => pick(deepest.vertices().next())?,
        "1" | "greatest" => pick(deepest.vertices().last())?,
        "left-end" => VertexId::new("endL"),
        "right-end" => VertexId::new("endR"),
        other => VertexId::new(other),
    };
    sys.thread_through(&name)
}

fn oracle_bound() -> usize {
    std::env::var("GLC_ORACLE_BOUND")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_ORACLE_BOUND)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Parses and executes a command line; never panics on user input. The
/// report is deterministic for identical inputs, flags, and seeds.
pub fn run(argv: &[String]) -> (i32, Report) {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            return (code, report(argv, None, json!({ "usage": e.to_string() })));
        }
    };
    match dispatch(&cli, argv) {
        Ok(out) => out,
        Err(e) => {
            let code = match e {
                Error::TooLarge(_) => 2,
                _ => 3,
            };
            error_report(argv, code, e.to_string())
        }
    }
}

/// Renders a finished report in the format the command line asked for.
pub fn render(argv: &[String], code: i32, rep: &Report) -> String {
    let format = argv
        .windows(2)
        .find(|w| w[0] == "--format")
        .map(|w| w[1].as_str())
        .unwrap_or("json");
    if format == "text" {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", rep.command.join(" ")));
        if let Some(d) = &rep.digest {
            out.push_str(&format!(
                "levels: {} vertices: {:?} edges: {:?}\n",
                d.levels, d.vertex_counts, d.edge_counts
            ));
        }
        render_text(&rep.facts, "", &mut out);
        out.push_str(&format!("exit: {code}\n"));
        out
    } else {
        let mut s = serde_json::to_string_pretty(rep).expect("report serializes");
        s.push('\n');
        s
    }
}

fn render_text(v: &Value, path: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let next = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                render_text(v, &next, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                render_text(v, &format!("{path}[{i}]"), out);
            }
        }
        leaf => out.push_str(&format!("{path}: {leaf}\n")),
    }
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<(i32, Report)> {
    match &cli.cmd {
        Cmd::Generate {
            kind,
            depth,
            pattern,
            seed,
            output,
        } => cmd_generate(
            argv,
            kind,
            *depth,
            pattern.clone(),
            *seed,
            output.as_deref(),
        ),
        Cmd::Validate { system } => cmd_validate(argv, system),
        Cmd::Euler {
            system,
            open,
            chain,
            count,
            probe,
            cap,
        } => cmd_euler(argv, system, *open, *chain, *count, *probe, *cap),
        Cmd::Parity {
            system,
            thread,
            depth,
            strong,
            oracle,
        } => cmd_parity(argv, system, thread, *depth, *strong, *oracle),
        Cmd::Regions {
            system,
            chase,
            machine,
            u,
            m,
            depth,
            threshold,
        } => cmd_regions(
            argv,
            system,
            *chase,
            *machine,
            u.as_deref(),
            *m,
            *depth,
            *threshold,
        ),
        Cmd::Menger {
            system,
            a,
            b,
            depth,
        } => cmd_menger(argv, system, a, b, *depth),
        Cmd::Decompose { system, level } => cmd_decompose(argv, system, *level),
        Cmd::Embed {
            system,
            depth,
            output,
        } => cmd_embed(argv, system, *depth, output.as_deref()),
        Cmd::Export {
            system,
            level,
            dot,
            output,
        } => cmd_export(argv, system, *level, *dot, output.as_deref()),
    }
}

fn loaded(argv: &[String], path: &Path) -> std::result::Result<InverseSystem, (i32, Report)> {
    let sys = load_system(path).map_err(|msg| error_report(argv, 3, msg))?;
    let report_v = sys.validate();
    if !report_v.is_valid() {
        return Err((
            3,
            report(
                argv,
                Some(SystemDigest::of(&sys)),
                json!({ "error": "system does not validate", "validation": to_value(&report_v) }),
            ),
        ));
    }
    Ok(sys)
}

fn cmd_generate(
    argv: &[String],
    kind: &str,
    depth: usize,
    pattern: Option<String>,
    seed: Option<u64>,
    output: Option<&Path>,
) -> Result<(i32, Report)> {
    let sys = if kind == "figure1" {
        figure_one_system(depth)
    } else {
        let parsed = match kind {
            "ladder" => GeneratorKind::Ladder,
            "cbs" => GeneratorKind::Cbs,
            "cbc" => GeneratorKind::Cbc,
            "xl" | "xl_dyadic" => GeneratorKind::XlDyadic,
            "hawaiian" => GeneratorKind::Hawaiian,
            "tangent" | "tangent_chain" => GeneratorKind::TangentChain,
            "random" => GeneratorKind::Random,
            base => GeneratorKind::Constant(BaseGraph::parse(base)?),
        };
        let spec = GeneratorSpec {
            kind: parsed,
            depth,
            pattern,
            seed,
        };
        generators::generate(&spec)?
    };
    let digest = SystemDigest::of(&sys);
    let text = serde_json::to_string_pretty(&sys).expect("system serializes");
    let mut facts = json!({ "kind": kind, "depth": depth });
    match output {
        Some(path) => {
            write_artifact(path, &text).map_err(Error::InvalidInput)?;
            facts["written"] = json!(path.display().to_string());
        }
        None => facts["system"] = to_value(&sys),
    }
    Ok((0, report(argv, Some(digest), facts)))
}

fn cmd_validate(argv: &[String], path: &Path) -> Result<(i32, Report)> {
    let sys = match load_system(path) {
        Ok(sys) => sys,
        Err(msg) => return Ok(error_report(argv, 3, msg)),
    };
    let v = sys.validate();
    let code = if v.is_valid() { 0 } else { 1 };
    Ok((
        code,
        report(
            argv,
            Some(SystemDigest::of(&sys)),
            json!({ "validation": to_value(&v) }),
        ),
    ))
}

fn cmd_euler(
    argv: &[String],
    path: &Path,
    open: bool,
    chain: bool,
    count: bool,
    probe: bool,
    cap: usize,
) -> Result<(i32, Report)> {
    let sys = match loaded(argv, path) {
        Ok(sys) => sys,
        Err(out) => return Ok(out),
    };
    let digest = SystemDigest::of(&sys);
    let mut facts = serde_json::Map::new();
    let verdict = if open {
        euler::is_open_eulerian(&sys)?
    } else {
        euler::is_closed_eulerian(&sys)?
    };
    let mut code = match &verdict {
        v if v.is_certified() => 0,
        EulerVerdict::NotEulerian { .. } => 1,
        _ => 2,
    };
    facts.insert("verdict".into(), to_value(&verdict));
    if chain && code == 0 {
        if open {
            facts.insert("chain".into(), to_value(&euler::open_euler_chain(&sys)?));
        } else {
            facts.insert("chain".into(), to_value(&euler::euler_chain(&sys)?));
        }
    }
    if count {
        facts.insert("counts".into(), to_value(&euler::count_euler(&sys, cap)?));
        facts.insert("cap".into(), json!(cap));
    }
    if probe {
        let p = euler::dichotomy_probe(&sys, cap)?;
        if code == 0 && p == DichotomyVerdict::Inconclusive {
            code = 2;
        }
        facts.insert("probe".into(), to_value(&p));
        facts.insert("cap".into(), json!(cap));
    }
    Ok((code, report(argv, Some(digest), Value::Object(facts))))
}

fn cmd_parity(
    argv: &[String],
    path: &Path,
    thread: &str,
    depth: usize,
    strong: bool,
    oracle: bool,
) -> Result<(i32, Report)> {
    let sys = match loaded(argv, path) {
        Ok(sys) => sys,
        Err(out) => return Ok(out),
    };
    let digest = SystemDigest::of(&sys);
    let t = parse_thread(&sys, thread)?;
    let depth = depth.min(sys.depth());
    let verdict = parity::vertex_parity(&sys, &t, depth)?;
    let code = match &verdict {
        ParityVerdict::EvenCertified { .. } | ParityVerdict::OddCertified { .. } => 0,
        ParityVerdict::NeitherCertified { .. } => 1,
        ParityVerdict::Undetermined { .. } => 2,
    };
    let mut facts = serde_json::Map::new();
    facts.insert("thread".into(), to_value(&t));
    facts.insert("depth".into(), json!(depth));
    facts.insert("verdict".into(), to_value(&verdict));
    if strong {
        facts.insert(
            "strong".into(),
            to_value(&parity::strong_degree(&sys, &t, depth)?),
        );
        facts.insert(
            "weak".into(),
            to_value(&parity::weak_degree(&sys, &t, depth)?),
        );
    }
    if oracle {
        let bound = oracle_bound();
        let deep = sys.level(depth)?;
        let mut per_level = Vec::new();
        for n in 0..depth {
            let fibre = sys.fiber(
                depth,
                &CylinderSet {
                    level: n,
                    cells: BTreeSet::from([t.vertices[n].clone()]),
                },
            )?;
            let entry = match parity::parity_oracle(deep, &fibre, &t.vertices[depth], bound) {
                Ok(v) => json!({ "level": n, "verdict": to_value(&v) }),
                Err(Error::TooLarge(msg)) => json!({ "level": n, "skipped": msg }),
                Err(e) => return Err(e),
            };
            per_level.push(entry);
        }
        facts.insert("oracle_bound".into(), json!(bound));
        facts.insert("oracle".into(), Value::Array(per_level));
    }
    Ok((code, report(argv, Some(digest), Value::Object(facts))))
}

#[allow(clippy::too_many_arguments)]
fn cmd_regions(
    argv: &[String],
    path: &Path,
    chase: bool,
    machine: bool,
    u: Option<&str>,
    m: Option<usize>,
    depth: usize,
    threshold: Option<usize>,
) -> Result<(i32, Report)> {
    let sys = match loaded(argv, path) {
        Ok(sys) => sys,
        Err(out) => return Ok(out),
    };
    let digest = SystemDigest::of(&sys);
    let depth = depth.min(sys.depth());
    if machine {
        let u = u.ok_or_else(|| Error::InvalidInput("--machine needs --u LEVEL:cells".into()))?;
        let m = m.ok_or_else(|| Error::InvalidInput("--machine needs --m K".into()))?;
        let cyl = parse_cylinder(&sys, u)?;
        let region = Region::new(&sys, cyl.level, cyl.cells)?;
        let threshold = threshold.unwrap_or(DEFAULT_INFINITE_THRESHOLD);
        let outcome = regions::contraction_machine(&sys, &region, m, depth, threshold)?;
        let code = if outcome.report.passed() { 0 } else { 1 };
        let facts = json!({
            "m": m,
            "depth": depth,
            "threshold": threshold,
            "family": to_value(&outcome.family),
            "report": to_value(&outcome.report),
        });
        return Ok((code, report(argv, Some(digest), facts)));
    }
    if chase {
        return Ok(match regions::odd_region_chase(&sys, depth) {
            Ok(out) => (
                0,
                report(
                    argv,
                    Some(digest),
                    json!({ "depth": depth, "chase": to_value(&out) }),
                ),
            ),
            Err(Error::NoOddCut(msg)) => (
                1,
                report(
                    argv,
                    Some(digest),
                    json!({ "depth": depth, "no_odd_cut": msg }),
                ),
            ),
            Err(e) => return Err(e),
        });
    }
    // Default: the minimal odd region inside the whole probed level.
    let whole = Region::new(&sys, depth, sys.level(depth)?.vertex_set().clone())?;
    let found = regions::minimal_odd_region(&sys, depth, &whole)?;
    let code = if found.is_some() { 0 } else { 1 };
    let facts = json!({
        "depth": depth,
        "odd_classes_per_level": to_value(&sys.level_degree_report()),
        "minimal_odd_region": to_value(&found),
    });
    Ok((code, report(argv, Some(digest), facts)))
}

fn cmd_menger(
    argv: &[String],
    path: &Path,
    a: &str,
    b: &str,
    depth: usize,
) -> Result<(i32, Report)> {
    let sys = match loaded(argv, path) {
        Ok(sys) => sys,
        Err(out) => return Ok(out),
    };
    let digest = SystemDigest::of(&sys);
    let a = parse_cylinder(&sys, a)?;
    let b = parse_cylinder(&sys, b)?;
    let w = menger::menger(&sys, &a, &b, depth)?;
    w.verify(&sys, &a, &b)?;
    let code = if w.k > 0 { 0 } else { 1 };
    Ok((
        code,
        report(argv, Some(digest), json!({ "witness": to_value(&w) })),
    ))
}

fn cmd_decompose(argv: &[String], path: &Path, level: Option<usize>) -> Result<(i32, Report)> {
    let sys = match loaded(argv, path) {
        Ok(sys) => sys,
        Err(out) => return Ok(out),
    };
    let digest = SystemDigest::of(&sys);
    let level = level.unwrap_or(sys.depth());
    let g = sys.level(level)?;
    Ok(match g.cycle_decomposition() {
        Ok(cycles) => {
            let edge_lists: Vec<Vec<String>> = cycles
                .iter()
                .map(|c| {
                    c.edge_ids()
                        .iter()
                        .map(|e| e.as_str().to_string())
                        .collect()
                })
                .collect();
            (
                0,
                report(
                    argv,
                    Some(digest),
                    json!({ "level": level, "cycles": edge_lists }),
                ),
            )
        }
        Err(Error::OddCutPresent(msg)) => (
            1,
            report(
                argv,
                Some(digest),
                json!({ "level": level, "odd_cut": msg }),
            ),
        ),
        Err(e) => return Err(e),
    })
}

fn cmd_embed(
    argv: &[String],
    path: &Path,
    depth: usize,
    output: Option<&Path>,
) -> Result<(i32, Report)> {
    let sys = match loaded(argv, path) {
        Ok(sys) => sys,
        Err(out) => return Ok(out),
    };
    let digest = SystemDigest::of(&sys);
    let depth = depth.min(sys.depth());
    let trace = embed::build_embedding(&sys, depth)?;
    let truncations = embed::freudenthal_truncations(&trace, depth)?;
    let mut facts = json!({
        "depth": depth,
        "skeleton_sizes": trace
            .steps
            .iter()
            .map(|s| json!([s.skeleton.vertex_count(), s.skeleton.edge_count()]))
            .collect::<Vec<_>>(),
        "truncation_digest": to_value(&SystemDigest::of(&truncations)),
    });
    if let Some(path) = output {
        let text = serde_json::to_string_pretty(&trace).expect("trace serializes");
        write_artifact(path, &text).map_err(Error::InvalidInput)?;
        facts["written"] = json!(path.display().to_string());
    }
    Ok((0, report(argv, Some(digest), facts)))
}

fn cmd_export(
    argv: &[String],
    path: &Path,
    level: Option<usize>,
    dot: bool,
    output: Option<&Path>,
) -> Result<(i32, Report)> {
    let sys = match load_system(path) {
        Ok(sys) => sys,
        Err(msg) => return Ok(error_report(argv, 3, msg)),
    };
    let digest = SystemDigest::of(&sys);
    let content = if dot {
        match level {
            Some(n) => sys.level(n)?.to_dot(&format!("level_{n}")),
            None => sys
                .levels
                .iter()
                .enumerate()
                .map(|(n, g)| g.to_dot(&format!("level_{n}")))
                .collect::<Vec<_>>()
                .join("\n"),
        }
    } else {
        let mut s = serde_json::to_string_pretty(&sys).expect("system serializes");
        s.push('\n');
        s
    };
    let mut facts = json!({ "dot": dot });
    match output {
        Some(path) => {
            write_artifact(path, &content).map_err(Error::InvalidInput)?;
            facts["written"] = json!(path.display().to_string());
        }
        None => facts["content"] = json!(content),
    }
    Ok((0, report(argv, Some(digest), facts)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(parts: &[&str]) -> Vec<String> {
        std::iter::once("glc".to_string())
            .chain(parts.iter().map(|s| s.to_string()))
            .collect()
    }

    fn tmp(name: &str) -> PathBuf {
        std::env::temp_dir().join(format!("glc-cli-test-{name}-{}", std::process::id()))
    }

    fn write_system(name: &str, kind: &str, depth: usize) -> PathBuf {
        let path = tmp(name);
        let (code, _) = run(&args(&[
            "generate",
            kind,
            "--depth",
            &depth.to_string(),
            "-o",
            path.to_str().unwrap(),
        ]));
        assert_eq!(code, 0);
        path
    }

    #[test]
    fn euler_splits_the_bouquets() {
        let cbc = write_system("cbc", "cbc", 4);
        let (code, rep) = run(&args(&["euler", cbc.to_str().unwrap()]));
        assert_eq!(code, 0, "{:?}", rep.facts);

        let cbs = write_system("cbs", "cbs", 4);
        let (code, rep) = run(&args(&["euler", cbs.to_str().unwrap()]));
        assert_eq!(code, 1);
        let witness = &rep.facts["verdict"]["NotEulerian"]["witness"];
        assert!(
            witness.is_object(),
            "expected a witness cylinder: {witness}"
        );
    }

    #[test]
    fn parity_thread_aliases_work() {
        let cbs = write_system("cbs-parity", "cbs", 5);
        let (code, rep) = run(&args(&["parity", cbs.to_str().unwrap(), "--thread", "0"]));
        assert_eq!(code, 1, "{:?}", rep.facts);
        assert!(rep.facts["verdict"]["NeitherCertified"].is_object());

        let ladder = write_system("ladder-parity", "ladder", 5);
        let (code, rep) = run(&args(&[
            "parity",
            ladder.to_str().unwrap(),
            "--thread",
            "left-end",
        ]));
        assert_eq!(code, 0);
        assert!(
            rep.facts["verdict"]["OddCertified"].is_object(),
            "{:?}",
            rep.facts
        );
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let cbc = write_system("cbc-det", "cbc", 3);
        let argv = args(&["euler", cbc.to_str().unwrap(), "--count", "--cap", "2000"]);
        let (c1, r1) = run(&argv);
        let (c2, r2) = run(&argv);
        assert_eq!(c1, c2);
        assert_eq!(
            serde_json::to_string(&r1).unwrap(),
            serde_json::to_string(&r2).unwrap()
        );
    }

    #[test]
    fn export_round_trips_to_an_identical_system() {
        let sys_path = write_system("xl-rt", "xl", 3);
        let out = tmp("xl-rt-out");
        let (code, _) = run(&args(&[
            "export",
            sys_path.to_str().unwrap(),
            "-o",
            out.to_str().unwrap(),
        ]));
        assert_eq!(code, 0);
        let a: InverseSystem = load_system(&sys_path).unwrap();
        let b: InverseSystem = load_system(&out).unwrap();
        assert_eq!(SystemDigest::of(&a), SystemDigest::of(&b));
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_and_invalid_inputs_exit_three() {
        let path = tmp("bad-json");
        std::fs::write(&path, "{ not json").unwrap();
        let (code, rep) = run(&args(&["euler", path.to_str().unwrap()]));
        assert_eq!(code, 3);
        assert!(rep.facts["error"]
            .as_str()
            .unwrap()
            .contains("malformed JSON"));

        let (code, _) = run(&args(&["frobnicate"]));
        assert_eq!(code, 3);
    }

    #[test]
    fn menger_and_regions_and_decompose_wire_through() {
        let ladder = write_system("ladder-mg", "ladder", 4);
        let (code, rep) = run(&args(&[
            "menger",
            ladder.to_str().unwrap(),
            "--a",
            "0:endL",
            "--b",
            "0:endR",
        ]));
        assert_eq!(code, 0);
        assert_eq!(rep.facts["witness"]["k"], json!(3));

        let (code, rep) = run(&args(&["regions", ladder.to_str().unwrap(), "--chase"]));
        assert_eq!(code, 0, "{:?}", rep.facts);

        let cbc = write_system("cbc-dec", "cbc", 3);
        let (code, rep) = run(&args(&["decompose", cbc.to_str().unwrap()]));
        assert_eq!(code, 0);
        assert!(rep.facts["cycles"]
            .as_array()
            .is_some_and(|c| !c.is_empty()));
    }

    #[test]
    fn embed_command_writes_a_trace() {
        let fig = tmp("figure1");
        let (code, _) = run(&args(&[
            "generate",
            "figure1",
            "--depth",
            "1",
            "-o",
            fig.to_str().unwrap(),
        ]));
        assert_eq!(code, 0);
        let trace = tmp("figure1-trace");
        let (code, rep) = run(&args(&[
            "embed",
            fig.to_str().unwrap(),
            "--depth",
            "1",
            "-o",
            trace.to_str().unwrap(),
        ]));
        assert_eq!(code, 0, "{:?}", rep.facts);
        assert!(trace.exists());
    }

    #[test]
    fn text_rendering_carries_the_same_facts() {
        let cbc = write_system("cbc-txt", "cbc", 3);
        let argv = args(&["euler", cbc.to_str().unwrap(), "--format", "text"]);
        let (code, rep) = run(&argv);
        let text = render(&argv, code, &rep);
        assert!(text.contains("ClosedEulerianCertified"));
        assert!(text.contains("exit: 0"));
        let json_text = render(&args(&["euler", cbc.to_str().unwrap()]), code, &rep);
        assert!(json_text.contains("ClosedEulerianCertified"));
    }
}
