//! Witness frame fields on the 2-skeleton.
//!
//! Given a solution of the monomial system, vertex frames and edge paths are
//! chosen so that the holonomy of every ω(e) is the solved value, and each
//! 2-cell is filled by contracting its lifted boundary loop along S³
//! geodesics towards the lifted basepoint.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion};
use serde::Serialize;

use crate::complex::CwComplex;
use crate::error::{ExtendError, HolonomyError, ParseError};
use crate::frame::{chord, geodesic, sample_geodesic, write_quat, Frame, FramePath};
use crate::holonomy::{
    class_of_lift, lift_edge_path, lift_samples, loop_class, representative_loop, BoundaryField, SkeletonFrames,
    Transport, TreeFrames,
};
use crate::octa::{group, GroupElement};
use crate::system::Assignment;
use crate::text::{parse_fixed, LineReader};
use crate::trees::{EdgePath, SpanningTree};

/// Samples this close to −b are pushed off before contracting.
pub const ANTIPODE_RADIUS: f64 = 1e-3;
pub const ANTIPODE_PUSH: f64 = 1e-2;
const CANCEL_TOLERANCE: f64 = 1e-9;

/// A filled 2-cell: concentric loops from the outer boundary (ring 0) to the
/// constant loop at the basepoint (last ring), all with the same sample count.
#[derive(Clone, Debug, PartialEq)]
pub struct Disk {
    pub rings: Vec<Vec<Frame>>,
}

impl Disk {
    pub fn ring_count(&self) -> usize {
        self.rings.len()
    }

    pub fn samples_per_ring(&self) -> usize {
        self.rings.first().map_or(0, Vec::len)
    }
}

/// Frames on vertices, paths on edges (in edge direction) and fills on faces.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonField {
    pub vertices: Vec<Frame>,
    pub edges: Vec<FramePath>,
    pub faces: Vec<Option<Disk>>,
}

impl SkeletonFrames for SkeletonField {
    fn vertex_frame(&self, v: usize) -> Result<Frame, HolonomyError> {
        self.vertices.get(v).copied().ok_or(HolonomyError::MissingFrame(v))
    }

    fn edge_interior(&self, e: usize) -> Vec<Frame> {
        let s = &self.edges[e].samples;
        if s.len() <= 2 { Vec::new() } else { s[1..s.len() - 1].to_vec() }
    }
}

impl SkeletonField {
    /// The frame path along an edge path, by concatenating edge paths.
    pub fn along(&self, path: &EdgePath) -> FramePath {
        let mut out = FramePath::new(vec![self.vertices[path.start]]);
        for s in &path.steps {
            let p = &self.edges[s.edge];
            out = out.then(&if s.forward { p.clone() } else { p.reversed() });
        }
        out
    }

    /// The loop around face `f`, starting at the first vertex of its cycle.
    pub fn face_loop(&self, cw: &CwComplex, f: usize) -> FramePath {
        let face = &cw.faces()[f];
        let start = cw.face_vertices(f)[0];
        let path = EdgePath { start, end: start, steps: face.cycle.clone() };
        self.along(&path)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("field v1\n");
        for (v, f) in self.vertices.iter().enumerate() {
            let _ = write!(s, "v {v} ");
            write_quat(&mut s, &f.representative());
        }
        for (e, p) in self.edges.iter().enumerate() {
            let _ = writeln!(s, "e {e} {}", p.len());
            for f in &p.samples {
                write_quat(&mut s, &f.representative());
            }
        }
        for (i, d) in self.faces.iter().enumerate() {
            if let Some(d) = d {
                let _ = writeln!(s, "f {i} rings {} samples {}", d.ring_count(), d.samples_per_ring());
                for f in d.rings.iter().flatten() {
                    write_quat(&mut s, &f.representative());
                }
            }
        }
        s
    }

    /// Reads `field v1`. Vertex and edge ids must be dense from 0 and in order;
    /// faces may be absent.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut r = LineReader::new("field", text);
        r.expect_header("field v1")?;
        let mut field = SkeletonField { vertices: Vec::new(), edges: Vec::new(), faces: Vec::new() };
        let quat = |r: &LineReader, n: usize, line: &str| -> Result<Frame, ParseError> {
            let [w, x, y, z] = parse_fixed::<f64, 4>(r, n, line)?;
            Frame::new(w, x, y, z).map_err(|e| r.error(n, e.to_string()))
        };
        while let Some((n, line)) = r.next_line() {
            let t: Vec<&str> = line.split_whitespace().collect();
            let id = |k: usize| -> Result<usize, ParseError> {
                t.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| r.error(n, "bad id or count"))
            };
            match t.first().copied() {
                Some("v") if t.len() == 6 => {
                    if id(1)? != field.vertices.len() {
                        return Err(r.error(n, "vertex ids must be consecutive from 0"));
                    }
                    field.vertices.push(quat(&r, n, &t[2..].join(" "))?);
                }
                Some("e") if t.len() == 3 => {
                    if id(1)? != field.edges.len() {
                        return Err(r.error(n, "edge ids must be consecutive from 0"));
                    }
                    let mut samples = Vec::new();
                    for _ in 0..id(2)? {
                        let (m, l) = r.require_line("edge sample")?;
                        samples.push(quat(&r, m, l)?);
                    }
                    field.edges.push(FramePath::new(samples));
                }
                Some("f") if t.len() == 6 && t[2] == "rings" && t[4] == "samples" => {
                    let f = id(1)?;
                    let (rings, per) = (id(3)?, id(5)?);
                    let mut d = Disk { rings: Vec::with_capacity(rings) };
                    for _ in 0..rings {
                        let mut ring = Vec::with_capacity(per);
                        for _ in 0..per {
                            let (m, l) = r.require_line("face sample")?;
                            ring.push(quat(&r, m, l)?);
                        }
                        d.rings.push(ring);
                    }
                    if field.faces.len() <= f {
                        field.faces.resize(f + 1, None);
                    }
                    field.faces[f] = Some(d);
                }
                _ => return Err(r.error(n, "expected a `v`, `e` or `f` record")),
            }
        }
        Ok(field)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| ParseError::new("field", 0, e.to_string()))?;
        Self::parse(&text)
    }
}

/// Removes immediate back-and-forth excursions `… a, b, a …` → `… a …` and
/// repeated samples.
pub fn cancel_backtracks(samples: &[UnitQuaternion<f64>]) -> Vec<UnitQuaternion<f64>> {
    let mut out: Vec<UnitQuaternion<f64>> = Vec::with_capacity(samples.len());
    for q in samples {
        if out.last().is_some_and(|l| chord(l, q) < CANCEL_TOLERANCE) {
            continue;
        }
        if out.len() >= 2 && chord(&out[out.len() - 2], q) < CANCEL_TOLERANCE {
            out.pop();
            continue;
        }
        out.push(*q);
    }
    if out.len() == 1 {
        out.push(out[0]);
    }
    out
}

fn to_path(samples: Vec<UnitQuaternion<f64>>) -> FramePath {
    FramePath::from_quats(samples)
}

/// The loop of class `g` relative to `anchor`, started at the lift `end`
/// of the same frame.
fn class_loop_at(anchor: &UnitQuaternion<f64>, end: &UnitQuaternion<f64>, g: GroupElement, eps: f64) -> Vec<UnitQuaternion<f64>> {
    let (h, _) = group().nearest_element(&(anchor.inverse() * end));
    let h = h.to_unit_quaternion();
    representative_loop(anchor, g, eps / 2.0).into_iter().map(|q| q * h).collect()
}

/// `first` (lifted from `start`), then a loop of class `g` at the base frame,
/// then `last` lifted onwards.
fn through_base(
    first: &FramePath,
    start: &UnitQuaternion<f64>,
    anchor: &UnitQuaternion<f64>,
    g: GroupElement,
    last: &FramePath,
    eps: f64,
) -> Result<Vec<UnitQuaternion<f64>>, HolonomyError> {
    let mut out = lift_samples(first, start, eps)?;
    let gamma = class_loop_at(anchor, out.last().expect("non-empty"), g, eps);
    out.extend(gamma.into_iter().skip(1));
    let back = lift_samples(last, out.last().expect("non-empty"), eps)?;
    out.extend(back.into_iter().skip(1));
    Ok(cancel_backtracks(&out))
}

fn geodesic_edge(a: &Frame, b: &Frame, eps: f64, from: usize, to: usize) -> Result<FramePath, HolonomyError> {
    let start = a.representative();
    let rep = b.nearest_representative(&start);
    if rep.runner_up - rep.distance < crate::holonomy::AMBIGUITY_GAP {
        return Err(HolonomyError::Ambiguous { from, to });
    }
    Ok(to_path(sample_geodesic(&start, &rep.quat, eps / 2.0)))
}

/// Vertex frames and edge paths of the witness field; faces left unfilled.
///
/// Interior vertices copy the frame of their tree parent. Boundary edges
/// follow the input field; other tree edges are geodesics between nearest
/// representatives; the adjoining edge `d_i` is `ρ_i · χ_i · f(p_{u_i,b_0})⁻¹`
/// with `[χ_i] = x_i`; each interior non-tree edge is
/// `f(p_{v,b_0}) · γ_e · f(p_{w,b_0})⁻¹` with `[γ_e] = y_e`.
pub fn assign_vertices_and_edges(
    cw: &CwComplex,
    tree: &SpanningTree,
    boundary: &BoundaryField,
    assignment: &Assignment,
    transport: &Transport,
    eps: f64,
) -> Result<SkeletonField, ExtendError> {
    let tf = TreeFrames::new(cw, tree, boundary)?;
    let vertices = tf.vertex_frames().to_vec();
    let anchor = vertices[tree.root()].representative();
    let mut edges: Vec<Option<FramePath>> = vec![None; cw.edges().len()];
    let ncomp = cw.boundary_components().len();
    let adjoin: Vec<usize> = (1..ncomp).filter_map(|i| tree.adjoin_edge(i)).collect();

    // Boundary edges and the tree edges that are not adjoining edges.
    for (e, edge) in cw.edges().iter().enumerate() {
        if edge.on_boundary {
            let start = vertices[edge.ends[0]].representative();
            let lifted = lift_edge_path(cw, boundary, &EdgePath::edge(cw, e, true), &start, eps)?;
            edges[e] = Some(to_path(lifted));
        } else if tree.contains(e) && !adjoin.contains(&e) {
            let [a, b] = edge.ends;
            let p = geodesic_edge(&vertices[a], &vertices[b], eps, a, b)
                .map_err(|x| HolonomyError::OnEdge { edge: e, source: Box::new(x) })?;
            edges[e] = Some(p);
        }
    }

    let along = |edges: &[Option<FramePath>], path: &EdgePath| -> FramePath {
        let mut out = FramePath::new(vec![vertices[path.start]]);
        for s in &path.steps {
            let p = edges[s.edge].as_ref().expect("tree edges are assigned before use");
            out = out.then(&if s.forward { p.clone() } else { p.reversed() });
        }
        out
    };

    for &i in tree.order().iter().skip(1) {
        let d = tree.adjoin_edge(i).expect("adjoined component has an edge");
        let x = *assignment.x.get(i).ok_or_else(|| ExtendError::MissingVariable(format!("x{i}")))?;
        let b = tree.basepoint(i);
        let u = cw.edges()[d].other(b);
        let rest = along(&edges, &tree.path_to_root(cw, u)).reversed();
        let samples = through_base(&transport.paths[i], &vertices[b].representative(), &anchor, x, &rest, eps)
            .map_err(|x| HolonomyError::OnEdge { edge: d, source: Box::new(x) })?;
        let p = to_path(samples);
        edges[d] = Some(if cw.edges()[d].ends[0] == b { p } else { p.reversed() });
    }

    for e in tree.interior_non_tree_edges() {
        let y = *assignment.y.get(&e).ok_or_else(|| ExtendError::MissingVariable(format!("y{e}")))?;
        let [v, w] = cw.edges()[e].ends;
        let first = along(&edges, &tree.path_to_root(cw, v));
        let last = along(&edges, &tree.path_to_root(cw, w)).reversed();
        let samples = through_base(&first, &vertices[v].representative(), &anchor, y, &last, eps)
            .map_err(|x| HolonomyError::OnEdge { edge: e, source: Box::new(x) })?;
        edges[e] = Some(to_path(samples));
    }

    Ok(SkeletonField {
        vertices,
        edges: edges.into_iter().map(|p| p.expect("every edge assigned")).collect(),
        faces: vec![None; cw.faces().len()],
    })
}

/// Contracts the loop along S³ geodesics towards its lifted basepoint.
pub fn fill_two_cell(face: usize, boundary: &FramePath, eps: f64) -> Result<Disk, ExtendError> {
    let first = boundary.samples.first().ok_or(HolonomyError::EmptyPath)?;
    let b = first.representative();
    let lifted = lift_samples(boundary, &b, eps)?;
    let end = lifted.last().expect("non-empty");
    let class = class_of_lift(&b, end, eps)?;
    if class != GroupElement::IDENTITY {
        return Err(ExtendError::FillOpen { face, class });
    }
    // Fixed tangent at −b: b·i is orthogonal to b.
    let tangent = (b * UnitQuaternion::from_quaternion(Quaternion::new(0.0, 1.0, 0.0, 0.0))).coords;
    let pushed: Vec<UnitQuaternion<f64>> = lifted
        .iter()
        .map(|q| {
            if (q.coords + b.coords).norm() < ANTIPODE_RADIUS {
                UnitQuaternion::from_quaternion(Quaternion::from(q.coords + tangent * ANTIPODE_PUSH))
            } else {
                *q
            }
        })
        .collect();
    let max_arc = pushed.iter().map(|q| q.coords.dot(&b.coords).clamp(-1.0, 1.0).acos()).fold(0.0, f64::max);
    let steps = ((max_arc / (eps / 2.0)).ceil() as usize).max(1);
    let mut rings = Vec::with_capacity(steps + 1);
    rings.push(boundary.samples.clone());
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        rings.push(pushed.iter().map(|q| Frame::from_unit(geodesic(q, &b, t))).collect());
    }
    Ok(Disk { rings })
}

/// Vertices, edges and fills of every face.
pub fn extend_field(
    cw: &CwComplex,
    tree: &SpanningTree,
    boundary: &BoundaryField,
    assignment: &Assignment,
    transport: &Transport,
    eps: f64,
) -> Result<SkeletonField, ExtendError> {
    let mut field = assign_vertices_and_edges(cw, tree, boundary, assignment, transport, eps)?;
    for f in 0..cw.faces().len() {
        let disk = fill_two_cell(f, &field.face_loop(cw, f), eps)?;
        field.faces[f] = Some(disk);
    }
    Ok(field)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceViolation {
    pub face: usize,
    /// Holonomy of the face loop, when it could be computed.
    pub class: Option<GroupElement>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FieldReport {
    pub faces_checked: usize,
    pub face_violations: Vec<FaceViolation>,
    /// Boundary vertices whose frame differs from the input.
    pub boundary_mismatches: Vec<usize>,
    /// Edges whose end samples do not match their vertex frames.
    pub endpoint_mismatches: Vec<usize>,
    /// Faces whose outer ring is not the concatenated edge paths.
    pub fill_mismatches: Vec<usize>,
}

impl FieldReport {
    pub fn violation_count(&self) -> usize {
        self.face_violations.len()
            + self.boundary_mismatches.len()
            + self.endpoint_mismatches.len()
            + self.fill_mismatches.len()
    }
}

/// Recomputes every face holonomy from the field and checks boundary
/// agreement, edge endpoints and fills.
pub fn verify_field(cw: &CwComplex, field: &SkeletonField, boundary: &BoundaryField, eps: f64) -> FieldReport {
    let mut report = FieldReport::default();
    for (v, vx) in cw.vertices().iter().enumerate() {
        if vx.on_boundary && boundary.get(v) != field.vertices.get(v) {
            report.boundary_mismatches.push(v);
        }
    }
    for (e, edge) in cw.edges().iter().enumerate() {
        let p = &field.edges[e];
        let ok = match (p.samples.first(), p.samples.last()) {
            (Some(a), Some(b)) => {
                a.same_frame(&field.vertices[edge.ends[0]], eps) && b.same_frame(&field.vertices[edge.ends[1]], eps)
            }
            _ => false,
        };
        if !ok {
            report.endpoint_mismatches.push(e);
        }
    }
    for f in 0..cw.faces().len() {
        report.faces_checked += 1;
        let lp = field.face_loop(cw, f);
        match loop_class(&lp, eps) {
            Ok(c) if c == GroupElement::IDENTITY => {}
            Ok(c) => report.face_violations.push(FaceViolation {
                face: f,
                class: Some(c),
                message: format!("face loop has class {c}"),
            }),
            Err(x) => report.face_violations.push(FaceViolation { face: f, class: None, message: x.to_string() }),
        }
        if let Some(Some(d)) = field.faces.get(f) {
            let outer_ok = d.rings.first().is_some_and(|r| {
                r.len() == lp.len()
                    && r.iter().zip(&lp.samples).all(|(a, b)| chord(&a.representative(), &b.representative()) < 1e-9)
            });
            if !outer_ok {
                report.fill_mismatches.push(f);
            }
        }
    }
    report
}

/// Class of `f(ω(e))`, lifted from the representative of `f(b_0)`, for every
/// non-tree edge.
pub fn field_holonomies(
    cw: &CwComplex,
    tree: &SpanningTree,
    field: &SkeletonField,
    eps: f64,
) -> Result<BTreeMap<usize, GroupElement>, HolonomyError> {
    let anchor = field.vertices[tree.root()].representative();
    let mut out = BTreeMap::new();
    for e in tree.non_tree_edges() {
        let lp = field.along(&tree.omega(cw, e)?);
        out.insert(e, crate::holonomy::loop_class_from(&lp, &anchor, eps)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::carve;
    use crate::fixtures;
    use crate::holonomy::{default_epsilon, zeta_classes};
    use crate::merge::merge_cells;
    use crate::mesh::{SingularityGraph, TetMesh};
    use crate::solver::{solve, DEFAULT_MAX_NODES};
    use crate::system::build_system;
    use nalgebra::Vector3;

    fn eps() -> f64 {
        default_epsilon()
    }

    struct Run {
        cw: CwComplex,
        tree: SpanningTree,
        boundary: BoundaryField,
        field: SkeletonField,
        assignment: Assignment,
    }

    fn run(mesh: &TetMesh, graph: &SingularityGraph, frames: &crate::frame::BoundaryFrames, merge: bool) -> Run {
        let cw = carve(mesh, graph).unwrap();
        let cw = if merge { merge_cells(&cw).0 } else { cw };
        let tree = SpanningTree::build(&cw).unwrap();
        let boundary = BoundaryField::from_mesh_frames(&cw, frames).unwrap();
        let tf = TreeFrames::new(&cw, &tree, &boundary).unwrap();
        let transport = Transport::along_tree(&cw, &tree, &tf, eps()).unwrap();
        let anchor = boundary.vertex_frame(tree.root()).unwrap().representative();
        let zeta = zeta_classes(&cw, &tree, &boundary, &transport, &anchor, eps()).unwrap();
        let sys = build_system(&cw, &tree, &zeta).unwrap();
        let (out, _) = solve(&sys, DEFAULT_MAX_NODES);
        let assignment = out.assignment().expect("fixture is solvable").clone();
        let field = extend_field(&cw, &tree, &boundary, &assignment, &transport, eps()).unwrap();
        Run { cw, tree, boundary, field, assignment }
    }

    #[test]
    fn constant_ball_gives_constant_field() {
        let mesh = fixtures::ball(2);
        let frames = fixtures::random_constant_frames(&mesh, 11);
        let r = run(&mesh, &SingularityGraph::empty(), &frames, true);
        let q = frames.values().next().unwrap().representative();
        for f in &r.field.vertices {
            assert_eq!(f.representative(), q);
        }
        for p in &r.field.edges {
            assert!(p.samples.iter().all(|s| chord(&s.representative(), &q) < 1e-12));
        }
        assert_eq!(verify_field(&r.cw, &r.field, &r.boundary, eps()).violation_count(), 0);
    }

    #[test]
    fn unmerged_tube_round_trip() {
        let mesh = fixtures::ball(4);
        let graph = fixtures::vertical_tube(4);
        let frames = fixtures::frames_from(&mesh, |p| UnitQuaternion::from_euler_angles(0.0, 0.0, 0.1 * p[0]));
        let r = run(&mesh, &graph, &frames, false);
        let report = verify_field(&r.cw, &r.field, &r.boundary, eps());
        assert_eq!(report.violation_count(), 0, "{report:?}");

        // [f(ω(e))] = y_e for interior non-tree edges.
        let hol = field_holonomies(&r.cw, &r.tree, &r.field, eps()).unwrap();
        for (e, y) in &r.assignment.y {
            assert_eq!(hol[e], *y);
        }
        // Holonomies of the built field satisfy every face with all unknowns trivial.
        for f in r.cw.interior_faces() {
            let prod = r.cw.faces()[f]
                .cycle
                .iter()
                .filter(|s| !r.tree.contains(s.edge))
                .fold(GroupElement::IDENTITY, |acc, s| {
                    let h = hol[&s.edge];
                    acc * if s.forward { h } else { h.inverse() }
                });
            assert_eq!(prod, GroupElement::IDENTITY);
        }
    }

    #[test]
    fn nontrivial_unknowns_are_realised() {
        // The shell has two boundary spheres; a solution with x_1 ≠ 1 and a
        // hand-picked y is still realised by the construction.
        let mesh = fixtures::shell();
        let frames = fixtures::random_constant_frames(&mesh, 5);
        let cw = merge_cells(&carve(&mesh, &SingularityGraph::empty()).unwrap()).0;
        let tree = SpanningTree::build(&cw).unwrap();
        let boundary = BoundaryField::from_mesh_frames(&cw, &frames).unwrap();
        let tf = TreeFrames::new(&cw, &tree, &boundary).unwrap();
        let transport = Transport::along_tree(&cw, &tree, &tf, eps()).unwrap();
        let anchor = boundary.vertex_frame(tree.root()).unwrap().representative();
        let zeta = zeta_classes(&cw, &tree, &boundary, &transport, &anchor, eps()).unwrap();
        let sys = build_system(&cw, &tree, &zeta).unwrap();
        let mut a = Assignment::identity(&sys);
        a.x[1] = group().s();
        for y in a.y.values_mut() {
            *y = group().neg_one();
        }
        let field = assign_vertices_and_edges(&cw, &tree, &boundary, &a, &transport, eps()).unwrap();
        let hol = field_holonomies(&cw, &tree, &field, eps()).unwrap();
        for (e, y) in &a.y {
            assert_eq!(hol[e], *y);
        }
        for e in tree.component_non_tree_edges(1) {
            assert_eq!(hol[&e], zeta[&e].conjugate_by(a.x[1]));
        }
        for e in tree.component_non_tree_edges(0) {
            assert_eq!(hol[&e], zeta[&e]);
        }
    }

    #[test]
    fn torus_fills_relift_closed() {
        let mesh = fixtures::torus();
        let frames = fixtures::frames_from(&mesh, |p| UnitQuaternion::from_euler_angles(0.05 * p[2], 0.0, 0.0));
        let r = run(&mesh, &SingularityGraph::empty(), &frames, true);
        assert_eq!(verify_field(&r.cw, &r.field, &r.boundary, eps()).violation_count(), 0);
        for f in r.cw.interior_faces() {
            let d = r.field.faces[f].as_ref().unwrap();
            for ring in &d.rings {
                let p = FramePath::new(ring.clone());
                assert_eq!(loop_class(&p, eps()).unwrap(), GroupElement::IDENTITY);
            }
        }
    }

    #[test]
    fn small_circle_contracts_monotonically() {
        let g = group().r().to_unit_quaternion();
        let b = UnitQuaternion::from_euler_angles(0.3, 0.1, -0.2);
        let axis = Vector3::new(0.0, 0.6, 0.8);
        // A circle through b: b·exp(θ·(cos s·i + sin s·axis')) style small loop.
        let n = 40;
        let samples: Vec<UnitQuaternion<f64>> = (0..=n)
            .map(|k| {
                let s = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                let v = (Vector3::x() * (1.0 - s.cos()) + axis * s.sin()) * 0.15;
                g * b * UnitQuaternion::from_scaled_axis(v) * g.inverse()
            })
            .collect();
        let disk = fill_two_cell(0, &FramePath::from_quats(samples), eps()).unwrap();
        let diameter = |ring: &Vec<Frame>| {
            let mut d: f64 = 0.0;
            for a in ring {
                for c in ring {
                    d = d.max(chord(&a.representative(), &c.representative()));
                }
            }
            d
        };
        let ds: Vec<f64> = disk.rings.iter().map(diameter).collect();
        assert!(ds.windows(2).all(|w| w[1] < w[0]), "{ds:?}");
        assert!(ds.last().unwrap() < &1e-12);
    }

    #[test]
    fn constant_loop_gives_constant_disk_and_open_loop_is_rejected() {
        let q = UnitQuaternion::from_euler_angles(1.0, 0.5, 0.2);
        let disk = fill_two_cell(0, &FramePath::from_quats(vec![q; 5]), eps()).unwrap();
        assert!(disk.rings.iter().flatten().all(|f| chord(&f.representative(), &q) < 1e-12));
        let full = FramePath::from_quats(representative_loop(&q, group().neg_one(), 0.05));
        assert!(matches!(fill_two_cell(7, &full, eps()), Err(ExtendError::FillOpen { face: 7, .. })));
    }

    #[test]
    fn antipodal_samples_are_pushed() {
        let q = UnitQuaternion::identity();
        // Out along a 2π loop and back: class 1, passing through −q.
        let out = representative_loop(&q, group().neg_one(), 0.05);
        let mut samples = out.clone();
        samples.extend(out.iter().rev().skip(1));
        let disk = fill_two_cell(0, &FramePath::from_quats(samples), eps()).unwrap();
        for ring in &disk.rings[1..] {
            assert!(ring.iter().all(|f| f.representative().coords.iter().all(|c| c.is_finite())));
        }
    }

    #[test]
    fn corruption_is_reported_on_incident_faces() {
        let mesh = fixtures::torus();
        let frames = fixtures::random_constant_frames(&mesh, 2);
        let r = run(&mesh, &SingularityGraph::empty(), &frames, false);
        let mut field = r.field.clone();
        let e = r.cw.edges().iter().position(|x| !x.on_boundary).unwrap();
        let p = &field.edges[e];
        let end = lift_samples(p, &p.samples[0].representative(), eps()).unwrap();
        let twist = representative_loop(end.last().unwrap(), group().neg_one(), eps() / 2.0);
        let mut samples = end.clone();
        samples.extend(twist.into_iter().skip(1));
        field.edges[e] = FramePath::from_quats(samples);
        let report = verify_field(&r.cw, &field, &r.boundary, eps());
        let mut bad: Vec<usize> = report.face_violations.iter().map(|v| v.face).collect();
        bad.sort();
        assert_eq!(bad, r.cw.edge_faces(e).to_vec());
        assert!(report.face_violations.iter().all(|v| v.class == Some(group().neg_one())));
    }

    #[test]
    fn cancellation_removes_excursions() {
        let a = UnitQuaternion::identity();
        let b = UnitQuaternion::from_euler_angles(0.1, 0.0, 0.0);
        let c = UnitQuaternion::from_euler_angles(0.2, 0.0, 0.0);
        assert_eq!(cancel_backtracks(&[a, b, c, b, a]), vec![a, a]);
        assert_eq!(cancel_backtracks(&[a, b, c, b, c]), vec![a, b, c]);
        assert_eq!(cancel_backtracks(&[a, a, b]), vec![a, b]);
    }

    #[test]
    fn field_file_round_trip() {
        let mesh = fixtures::five_tet_cube();
        let frames = fixtures::random_constant_frames(&mesh, 9);
        let r = run(&mesh, &SingularityGraph::empty(), &frames, false);
        let back = SkeletonField::parse(&r.field.to_text()).unwrap();
        assert_eq!(back.vertices.len(), r.field.vertices.len());
        assert_eq!(back.edges.len(), r.field.edges.len());
        assert_eq!(back.faces.iter().flatten().count(), r.field.faces.iter().flatten().count());
        assert_eq!(verify_field(&r.cw, &back, &r.boundary, eps()).face_violations.len(), 0);
        assert!(SkeletonField::parse("field v1\nv 1 1 0 0 0\n").is_err());
    }
}
