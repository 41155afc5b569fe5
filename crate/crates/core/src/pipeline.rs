//! End-to-end runs: carve, merge, tree, boundary classes, system, solve,
//! and optionally the witness field, with a serializable report.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::UnitQuaternion;
use serde::Serialize;

use crate::complex::{carve, CellCounts, CwComplex};
use crate::error::PipelineError;
use crate::extend::{extend_field, verify_field, FieldReport, SkeletonField};
use crate::frame::{BoundaryFrames, FramePath};
use crate::holonomy::{default_epsilon, zeta_classes, BoundaryField, SkeletonFrames, Transport, TreeFrames};
use crate::merge::{merge_cells, MergeStats};
use crate::mesh::{SingularityGraph, TetMesh};
use crate::octa::GroupElement;
use crate::solver::{solve, Certificate, SolveOutcome, SolveStats, DEFAULT_MAX_NODES};
use crate::system::{build_system, Assignment, MonomialSystem, SystemStats};
use crate::trees::SpanningTree;

pub const REPORT_SCHEMA: &str = "report_v1";

#[derive(Clone, Debug)]
pub struct Options {
    /// Run the cell-merging simplifier before building the system.
    pub merge: bool,
    pub epsilon: f64,
    pub max_nodes: u64,
    /// User transport paths by boundary component (never component 0).
    pub transport: BTreeMap<usize, FramePath>,
}

impl Default for Options {
    fn default() -> Self {
        Self { merge: true, epsilon: default_epsilon(), max_nodes: DEFAULT_MAX_NODES, transport: BTreeMap::new() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

/// Seconds spent per stage, in pipeline order.
#[derive(Clone, Debug, Default, Serialize)]
#[serde(transparent)]
pub struct Timing(pub Vec<StageTime>);

impl Timing {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.0.push(StageTime { stage: stage.to_string(), seconds: t.elapsed().as_secs_f64() });
        out
    }
}

/// Everything up to and including the monomial system.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub cells_before: CellCounts,
    pub merge: MergeStats,
    pub cw: CwComplex,
    pub tree: SpanningTree,
    pub boundary: BoundaryField,
    pub transport: Transport,
    /// Representative of the frame at b_0 from which all classes are lifted.
    pub anchor: UnitQuaternion<f64>,
    pub zeta: BTreeMap<usize, GroupElement>,
    pub system: MonomialSystem,
    pub timing: Timing,
}

pub fn prepare(
    mesh: &TetMesh,
    graph: &SingularityGraph,
    frames: &BoundaryFrames,
    opts: &Options,
) -> Result<Prepared, PipelineError> {
    let mut timing = Timing::default();
    let carved = timing.time("carve", || carve(mesh, graph))?;
    let cells_before = carved.counts();
    let (cw, merge) = if opts.merge {
        timing.time("merge", || merge_cells(&carved))
    } else {
        (carved, MergeStats::default())
    };
    let tree = timing.time("tree", || SpanningTree::build(&cw))?;
    let eps = opts.epsilon;
    let (boundary, transport, anchor, zeta) = timing.time("classes", || -> Result<_, PipelineError> {
        let boundary = BoundaryField::from_mesh_frames(&cw, frames)?;
        let tf = TreeFrames::new(&cw, &tree, &boundary)?;
        let transport = Transport::along_tree(&cw, &tree, &tf, eps)?.with_overrides(
            opts.transport.clone(),
            &tree,
            &boundary,
            eps,
        )?;
        let anchor = boundary.vertex_frame(tree.root())?.representative();
        let zeta = zeta_classes(&cw, &tree, &boundary, &transport, &anchor, eps)?;
        Ok((boundary, transport, anchor, zeta))
    })?;
    let system = timing.time("system", || build_system(&cw, &tree, &zeta))?;
    Ok(Prepared { cells_before, merge, cw, tree, boundary, transport, anchor, zeta, system, timing })
}

#[derive(Clone, Debug)]
pub struct Checked {
    pub prepared: Prepared,
    pub outcome: SolveOutcome,
    pub stats: SolveStats,
}

pub fn check(
    mesh: &TetMesh,
    graph: &SingularityGraph,
    frames: &BoundaryFrames,
    opts: &Options,
) -> Result<Checked, PipelineError> {
    let mut prepared = prepare(mesh, graph, frames, opts)?;
    let (outcome, stats) = prepared.timing.time("solve", || solve(&prepared.system, opts.max_nodes));
    Ok(Checked { prepared, outcome, stats })
}

/// Builds and verifies the witness field; `None` unless the system was solved.
pub fn extend(checked: &mut Checked, opts: &Options) -> Result<Option<(SkeletonField, FieldReport)>, PipelineError> {
    let Some(assignment) = checked.outcome.assignment().cloned() else {
        return Ok(None);
    };
    let p = &mut checked.prepared;
    let field = p.timing.time("extend", || {
        extend_field(&p.cw, &p.tree, &p.boundary, &assignment, &p.transport, opts.epsilon)
    })?;
    let report = p.timing.time("verify", || verify_field(&p.cw, &field, &p.boundary, opts.epsilon));
    Ok(Some((field, report)))
}

/// Verdicts with and without merging.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub merged: &'static str,
    pub unmerged: &'static str,
    pub agree: bool,
}

pub fn merge_consistency(
    mesh: &TetMesh,
    graph: &SingularityGraph,
    frames: &BoundaryFrames,
    opts: &Options,
) -> Result<ConsistencyReport, PipelineError> {
    let merged = check(mesh, graph, frames, &Options { merge: true, ..opts.clone() })?.outcome.verdict();
    let unmerged = check(mesh, graph, frames, &Options { merge: false, ..opts.clone() })?.outcome.verdict();
    Ok(ConsistencyReport { merged, unmerged, agree: merged == unmerged })
}

#[derive(Clone, Debug, Serialize)]
pub struct OptionsReport {
    pub merge: bool,
    pub epsilon: f64,
    pub max_nodes: u64,
    pub transport_overrides: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EulerReport {
    pub complex: i64,
    pub boundary: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeReport {
    pub root: usize,
    pub basepoints: Vec<usize>,
    pub adjoin_order: Vec<usize>,
    pub adjoin_edges: Vec<Option<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldSummary {
    pub violations: usize,
    pub report: FieldReport,
}

/// The machine-readable result of a run. Everything except `timing` is a
/// function of the inputs and options.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: String,
    /// Digests of the input files, filled in by the caller.
    pub inputs: BTreeMap<String, String>,
    pub options: OptionsReport,
    pub cells_before: CellCounts,
    pub cells_after: CellCounts,
    pub merge: MergeStats,
    pub boundary_components: usize,
    pub euler: EulerReport,
    pub tree: TreeReport,
    pub interior_faces: usize,
    pub system: SystemStats,
    /// Class of ζ(e) per boundary non-tree edge, as group ids.
    pub zeta: BTreeMap<usize, GroupElement>,
    pub verdict: &'static str,
    pub witness: Option<Assignment>,
    pub witness_verified: bool,
    pub certificate: Option<Certificate>,
    pub search: SolveStats,
    pub field: Option<FieldSummary>,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(command: &str, checked: &Checked, opts: &Options, field: Option<&FieldReport>) -> Self {
        let p = &checked.prepared;
        let ncomp = p.cw.boundary_components().len();
        let witness = checked.outcome.assignment().cloned();
        let certificate = match &checked.outcome {
            SolveOutcome::Unsolvable { certificate } => Some(*certificate),
            _ => None,
        };
        Self {
            schema: REPORT_SCHEMA,
            command: command.to_string(),
            inputs: BTreeMap::new(),
            options: OptionsReport {
                merge: opts.merge,
                epsilon: opts.epsilon,
                max_nodes: opts.max_nodes,
                transport_overrides: opts.transport.keys().copied().collect(),
            },
            cells_before: p.cells_before,
            cells_after: p.cw.counts(),
            merge: p.merge,
            boundary_components: ncomp,
            euler: EulerReport { complex: p.cw.euler_characteristic(), boundary: p.cw.total_boundary_euler() },
            tree: TreeReport {
                root: p.tree.root(),
                basepoints: p.tree.basepoints().to_vec(),
                adjoin_order: p.tree.order().to_vec(),
                adjoin_edges: (0..ncomp).map(|i| p.tree.adjoin_edge(i)).collect(),
            },
            interior_faces: p.cw.interior_faces().len(),
            system: p.system.stats(),
            zeta: p.zeta.clone(),
            verdict: checked.outcome.verdict(),
            witness_verified: witness.as_ref().is_some_and(|a| p.system.is_satisfied_by(a)),
            witness,
            certificate,
            search: checked.stats,
            field: field.map(|r| FieldSummary { violations: r.violation_count(), report: r.clone() }),
            timing: p.timing.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, FIXTURE_NAMES};

    #[test]
    fn fixtures_have_expected_verdicts_and_round_trip() {
        for name in FIXTURE_NAMES {
            let fx = fixtures::named(name, 1).unwrap();
            let opts = Options::default();
            let mut c = check(&fx.mesh, &fx.graph, &fx.frames, &opts).unwrap();
            assert_eq!(c.outcome.is_solvable(), fx.solvable, "{name}");
            if let Some((_, report)) = extend(&mut c, &opts).unwrap() {
                assert_eq!(report.violation_count(), 0, "{name}: {report:?}");
            }
            let r = RunReport::new("check", &c, &opts, None);
            assert_eq!(r.euler.boundary, 2 * r.euler.complex, "{name}");
        }
    }

    #[test]
    fn ball_is_vacuous_and_torus_has_two_equations() {
        let ball = fixtures::named("ball", 3).unwrap();
        let c = check(&ball.mesh, &ball.graph, &ball.frames, &Options::default()).unwrap();
        assert!(c.prepared.system.is_empty());
        assert!(c.outcome.is_solvable());
        let torus = fixtures::named("torus", 3).unwrap();
        let c = check(&torus.mesh, &torus.graph, &torus.frames, &Options::default()).unwrap();
        assert_eq!(c.prepared.system.equations.len(), 2);
        assert!(c.prepared.zeta.values().all(|&g| g == GroupElement::IDENTITY));
        let a = c.outcome.assignment().unwrap();
        assert!(a.y.values().chain(&a.x).all(|&g| g == GroupElement::IDENTITY));
    }

    #[test]
    fn merging_preserves_verdicts() {
        for name in FIXTURE_NAMES {
            let fx = fixtures::named(name, 4).unwrap();
            let r = merge_consistency(&fx.mesh, &fx.graph, &fx.frames, &Options::default()).unwrap();
            assert!(r.agree, "{name}: {r:?}");
        }
    }

    #[test]
    fn report_serializes_deterministically() {
        let fx = fixtures::named("tube", 0).unwrap();
        let opts = Options::default();
        let a = RunReport::new("check", &check(&fx.mesh, &fx.graph, &fx.frames, &opts).unwrap(), &opts, None);
        let b = RunReport::new("check", &check(&fx.mesh, &fx.graph, &fx.frames, &opts).unwrap(), &opts, None);
        let strip = |r: &RunReport| {
            let mut v = serde_json::to_value(r).unwrap();
            v.as_object_mut().unwrap().remove("timing");
            serde_json::to_string(&v).unwrap()
        };
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(a.schema, "report_v1");
    }
}
