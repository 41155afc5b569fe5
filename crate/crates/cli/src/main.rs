use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use sha2::{Digest, Sha256};

use framext::fixtures::{self, FIXTURE_NAMES};
use framext::frame::{frames_to_text, parse_frames};
use framext::index::GraphReport;
use framext::pipeline::{self, Checked, Options, RunReport};
use framext::solver::{SolveOutcome, DEFAULT_MAX_NODES};
use framext::{default_epsilon, loop_index, validate_graph, CrossLoop, IndexedGraph, SingularityGraph, TetMesh, Transport};

const EXIT_SOLVABLE: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_UNSOLVABLE: u8 = 2;
const EXIT_CAP: u8 = 3;

/// Decide whether boundary frames extend across a tetrahedral mesh with a
/// singularity graph, and build a witness field when they do.
///
/// Exit codes: 0 solvable (or valid), 2 unsolvable (or index violations),
/// 3 search cap exceeded, 1 input or internal error.
#[derive(Parser, Debug)]
#[command(name = "framext", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the monomial system and solve it.
    Check(CheckArgs),
    /// Solve, then construct and verify a witness field on the 2-skeleton.
    Extend {
        #[command(flatten)]
        check: CheckArgs,
        /// Where to write the `field v1` output.
        #[arg(long)]
        field: PathBuf,
    },
    /// Check Poincaré-Hopf identities on a singularity graph with indices.
    Validate(ValidateArgs),
    /// Write a named fixture as mesh.txt, graph.txt and frames.txt.
    Fixture {
        /// One of: ball, torus, torus-twisted, tube, five-tet-cube, shell.
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Seed for the random constant frame.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Tetrahedral mesh (`tetmesh v1`).
    #[arg(long)]
    mesh: PathBuf,
    /// Singularity graph (`graph v1`); omitted means no singularities.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Boundary frames (`frames v1`).
    #[arg(long)]
    frames: PathBuf,
    /// Skip the cell-merging simplifier.
    #[arg(long)]
    no_merge: bool,
    /// Lifting tolerance [default: a quarter of the minimum distance between group elements]
    #[arg(long)]
    epsilon: Option<f64>,
    /// Search node cap for the solver.
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: u64,
    /// Write the monomial system as text.
    #[arg(long)]
    dump_system: Option<PathBuf>,
    /// Transport paths from b_0 to the other boundary components (`transport v1`).
    #[arg(long)]
    transport: Option<PathBuf>,
    /// JSON report destination [default: stdout].
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Singularity graph where every edge carries an index.
    #[arg(long)]
    graph: PathBuf,
    /// Euler characteristic of the volume.
    #[arg(long, conflicts_with = "mesh", required_unless_present = "mesh")]
    euler: Option<i64>,
    /// Take the Euler characteristic from this mesh instead.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Cross loops whose indices are reported alongside (`crossloop v1`).
    #[arg(long)]
    crossloop: Vec<PathBuf>,
    /// JSON report destination [default: stdout].
    #[arg(long)]
    report: Option<PathBuf>,
}

/// File contents plus digest.
struct Input {
    text: String,
    sha256: String,
}

fn read_input(stage: &str, path: &Path) -> Result<Input> {
    let bytes = fs::read(path).with_context(|| format!("{stage}: cannot read {}", path.display()))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).with_context(|| format!("{stage}: {} is not UTF-8", path.display()))?;
    Ok(Input { text, sha256 })
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Serializes the report with a digest over everything except timing.
fn finish_json(report: impl serde::Serialize) -> Result<String> {
    let mut value = serde_json::to_value(report)?;
    let obj = value.as_object_mut().expect("reports serialize as objects");
    let timing = obj.remove("timing");
    let digest = hex::encode(Sha256::digest(serde_json::to_string(&value)?.as_bytes()));
    let obj = value.as_object_mut().expect("still an object");
    obj.insert("digest".into(), Value::String(digest));
    if let Some(t) = timing {
        obj.insert("timing".into(), t);
    }
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

fn emit(json: &str, dest: Option<&Path>) -> Result<()> {
    match dest {
        Some(p) => write_output(p, json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn run_check(args: &CheckArgs, command: &str) -> Result<(Checked, Options, BTreeMap<String, String>)> {
    let mut digests = BTreeMap::new();
    let mesh_in = read_input("mesh", &args.mesh)?;
    let mesh = TetMesh::parse(&mesh_in.text).context("mesh")?;
    digests.insert("mesh".to_string(), mesh_in.sha256);
    let graph = match &args.graph {
        Some(p) => {
            let g = read_input("graph", p)?;
            digests.insert("graph".to_string(), g.sha256);
            SingularityGraph::parse(&g.text).context("graph")?
        }
        None => SingularityGraph::empty(),
    };
    let frames_in = read_input("frames", &args.frames)?;
    let frames = parse_frames(&frames_in.text).context("frames")?;
    digests.insert("frames".to_string(), frames_in.sha256);
    let transport = match &args.transport {
        Some(p) => {
            let t = read_input("transport", p)?;
            digests.insert("transport".to_string(), t.sha256);
            Transport::parse(&t.text).context("transport")?
        }
        None => BTreeMap::new(),
    };
    let epsilon = args.epsilon.unwrap_or_else(default_epsilon);
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        bail!("--epsilon must be a positive number");
    }
    let opts = Options { merge: !args.no_merge, epsilon, max_nodes: args.max_nodes, transport };
    let checked = pipeline::check(&mesh, &graph, &frames, &opts).with_context(|| format!("{command} failed"))?;
    if let Some(p) = &args.dump_system {
        write_output(p, &checked.prepared.system.to_text())?;
    }
    Ok((checked, opts, digests))
}

fn verdict_code(outcome: &SolveOutcome) -> u8 {
    match outcome {
        SolveOutcome::Solvable { .. } => EXIT_SOLVABLE,
        SolveOutcome::Unsolvable { .. } => EXIT_UNSOLVABLE,
        SolveOutcome::CapExceeded { .. } => EXIT_CAP,
    }
}

fn cmd_check(args: &CheckArgs) -> Result<u8> {
    let (checked, opts, inputs) = run_check(args, "check")?;
    let mut report = RunReport::new("check", &checked, &opts, None);
    report.inputs = inputs;
    emit(&finish_json(&report)?, args.report.as_deref())?;
    Ok(verdict_code(&checked.outcome))
}

fn cmd_extend(args: &CheckArgs, field_path: &Path) -> Result<u8> {
    let (mut checked, opts, inputs) = run_check(args, "extend")?;
    let built = pipeline::extend(&mut checked, &opts).context("extend failed")?;
    let mut report = RunReport::new("extend", &checked, &opts, built.as_ref().map(|(_, r)| r));
    report.inputs = inputs;
    emit(&finish_json(&report)?, args.report.as_deref())?;
    let Some((field, field_report)) = built else {
        eprintln!("framext: system is {}; no field written", checked.outcome.verdict());
        return Ok(verdict_code(&checked.outcome));
    };
    write_output(field_path, &field.to_text())?;
    let violations = field_report.violation_count();
    if violations > 0 {
        bail!("witness field failed verification with {violations} violations");
    }
    Ok(EXIT_SOLVABLE)
}

#[derive(serde::Serialize)]
struct LoopReport {
    path: String,
    sha256: String,
    /// Index as a numerator over 4.
    quarters: Option<i64>,
    index: Option<f64>,
    error: Option<String>,
}

#[derive(serde::Serialize)]
struct ValidateReport {
    schema: &'static str,
    command: &'static str,
    inputs: BTreeMap<String, String>,
    euler: i64,
    graph: GraphReport,
    loops: Vec<LoopReport>,
}

fn mesh_euler(mesh: &TetMesh) -> i64 {
    mesh.vertices().len() as i64 - mesh.edges().len() as i64 + mesh.triangles().len() as i64
        - mesh.tets().len() as i64
}

fn cmd_validate(args: &ValidateArgs) -> Result<u8> {
    let mut inputs = BTreeMap::new();
    let g = read_input("graph", &args.graph)?;
    inputs.insert("graph".to_string(), g.sha256);
    let graph = SingularityGraph::parse(&g.text).context("graph")?;
    let indexed = IndexedGraph::new(graph).context("graph")?;
    let euler = match (&args.mesh, args.euler) {
        (Some(p), _) => {
            let m = read_input("mesh", p)?;
            inputs.insert("mesh".to_string(), m.sha256);
            let mesh = TetMesh::parse(&m.text).context("mesh")?;
            indexed.graph.validate_against(&mesh).context("graph")?;
            mesh_euler(&mesh)
        }
        (None, Some(e)) => e,
        (None, None) => bail!("either --euler or --mesh is required"),
    };
    let mut loops = Vec::new();
    for p in &args.crossloop {
        let input = read_input("crossloop", p)?;
        let parsed = CrossLoop::parse(&input.text).context("crossloop")?;
        let (quarters, error) = match loop_index(&parsed) {
            Ok(q) => (Some(q), None),
            Err(e) => (None, Some(e.to_string())),
        };
        loops.push(LoopReport {
            path: p.display().to_string(),
            sha256: input.sha256,
            quarters,
            index: quarters.map(|q| q as f64 / 4.0),
            error,
        });
    }
    let graph = validate_graph(&indexed, euler);
    let ok = graph.ok && loops.iter().all(|l| l.error.is_none());
    let report = ValidateReport { schema: pipeline::REPORT_SCHEMA, command: "validate", inputs, euler, graph, loops };
    emit(&finish_json(&report)?, args.report.as_deref())?;
    Ok(if ok { EXIT_SOLVABLE } else { EXIT_UNSOLVABLE })
}

fn cmd_fixture(name: &str, out_dir: &Path, seed: u64) -> Result<u8> {
    let Some(fx) = fixtures::named(name, seed) else {
        bail!("unknown fixture `{name}` (expected one of: {})", FIXTURE_NAMES.join(", "));
    };
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    write_output(&out_dir.join("mesh.txt"), &fx.mesh.to_text())?;
    write_output(&out_dir.join("graph.txt"), &fx.graph.to_text())?;
    write_output(&out_dir.join("frames.txt"), &frames_to_text(&fx.frames))?;
    println!("{}: wrote {} ({} tets, expected {})", fx.name, out_dir.display(), fx.mesh.tets().len(),
        if fx.solvable { "solvable" } else { "unsolvable" });
    Ok(EXIT_SOLVABLE)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Extend { check, field } => cmd_extend(check, field),
        Command::Validate(args) => cmd_validate(args),
        Command::Fixture { name, out_dir, seed } => cmd_fixture(name, out_dir, *seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("framext: error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
