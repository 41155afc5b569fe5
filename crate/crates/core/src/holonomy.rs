//! Homotopy classes of frame loops by lifting through S³ → O₃.
//!
//! A lift of a frame path is a continuous choice of coset representatives. For
//! a loop lifted from `s` to `e = s·h` the class is `e⁻¹·s = h⁻¹`; with this
//! convention the class of `a` followed by `b` is `class(a)·class(b)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use crate::complex::CwComplex;
use crate::error::{HolonomyError, ParseError};
use crate::frame::{sample_geodesic, write_quat, BoundaryFrames, Frame, FramePath};
use crate::octa::{group, GroupElement};
use crate::text::{parse_fixed, LineReader};
use crate::trees::{EdgePath, SpanningTree};

/// Gap below which two candidate representatives count as equally near.
pub const AMBIGUITY_GAP: f64 = 1e-6;

/// ε = d_min / 4.
pub fn default_epsilon() -> f64 {
    group().default_epsilon()
}

/// Lifts every sample: each one takes the representative nearest the previous lift.
pub fn lift_samples(
    path: &FramePath,
    start: &UnitQuaternion<f64>,
    eps: f64,
) -> Result<Vec<UnitQuaternion<f64>>, HolonomyError> {
    let first = path.samples.first().ok_or(HolonomyError::EmptyPath)?;
    if first.nearest_representative(start).distance >= eps {
        return Err(HolonomyError::StartMismatch);
    }
    let mut out = Vec::with_capacity(path.len());
    out.push(*start);
    for (index, f) in path.samples.iter().enumerate().skip(1) {
        let rep = f.nearest_representative(out.last().expect("non-empty"));
        if rep.distance >= eps || rep.runner_up < eps {
            return Err(HolonomyError::Density { index, distance: rep.distance });
        }
        out.push(rep.quat);
    }
    Ok(out)
}

/// End point of the lift of `path` starting at `start`.
pub fn lift_path(
    path: &FramePath,
    start: &UnitQuaternion<f64>,
    eps: f64,
) -> Result<UnitQuaternion<f64>, HolonomyError> {
    Ok(*lift_samples(path, start, eps)?.last().expect("non-empty"))
}

/// Class of a lifted loop from `start` to `end`: `end⁻¹·start`, snapped.
pub fn class_of_lift(
    start: &UnitQuaternion<f64>,
    end: &UnitQuaternion<f64>,
    eps: f64,
) -> Result<GroupElement, HolonomyError> {
    let (g, distance) = group().nearest_element(&(end.inverse() * start));
    if distance >= eps {
        return Err(HolonomyError::SnapFailed { distance });
    }
    Ok(g)
}

/// Class of a closed loop, lifted from the stored representative of its first sample.
pub fn loop_class(path: &FramePath, eps: f64) -> Result<GroupElement, HolonomyError> {
    let first = path.samples.first().ok_or(HolonomyError::EmptyPath)?;
    loop_class_from(path, &first.representative(), eps)
}

pub fn loop_class_from(
    path: &FramePath,
    start: &UnitQuaternion<f64>,
    eps: f64,
) -> Result<GroupElement, HolonomyError> {
    let first = path.samples.first().ok_or(HolonomyError::EmptyPath)?;
    let last = path.samples.last().expect("non-empty");
    if !first.same_frame(last, eps) {
        return Err(HolonomyError::OpenLoop);
    }
    let end = lift_path(path, start, eps)?;
    class_of_lift(start, &end, eps)
}

/// Canonical loop of class `g` based at the frame of `anchor`: the S³
/// geodesic from `anchor` to `anchor·g⁻¹`, as lifted samples.
pub fn representative_loop(anchor: &UnitQuaternion<f64>, g: GroupElement, max_step: f64) -> Vec<UnitQuaternion<f64>> {
    let target = g.inverse().to_unit_quaternion();
    let v = target.imag();
    let phi = v.norm().atan2(target.w);
    let axis = if v.norm() > 1e-12 { v / v.norm() } else { Vector3::x() };
    let mut n = 1usize;
    while 2.0 * (phi / (2.0 * n as f64)).sin() > max_step {
        n *= 2;
    }
    (0..=n)
        .map(|k| {
            let theta = phi * k as f64 / n as f64;
            let v = axis * theta.sin();
            anchor * UnitQuaternion::from_quaternion(Quaternion::new(theta.cos(), v.x, v.y, v.z))
        })
        .collect()
}

/// Nearest representative of `target` to `prev` and the S³ geodesic samples
/// leading to it (excluding `prev`).
fn step_towards(
    prev: &UnitQuaternion<f64>,
    target: &Frame,
    eps: f64,
) -> Option<Vec<UnitQuaternion<f64>>> {
    let rep = target.nearest_representative(prev);
    if rep.runner_up - rep.distance < AMBIGUITY_GAP {
        return None;
    }
    let mut samples = sample_geodesic(prev, &rep.quat, eps / 2.0);
    samples.remove(0);
    Some(samples)
}

/// Frames on the cells of a complex, as needed to sample edge paths.
pub trait SkeletonFrames {
    fn vertex_frame(&self, v: usize) -> Result<Frame, HolonomyError>;
    /// Frames strictly inside edge `e`, in its direction.
    fn edge_interior(&self, e: usize) -> Vec<Frame>;
}

/// Lifted samples along an edge path, starting at `start`, which must
/// represent the frame of the first vertex.
pub fn lift_edge_path<F: SkeletonFrames + ?Sized>(
    cw: &CwComplex,
    field: &F,
    path: &EdgePath,
    start: &UnitQuaternion<f64>,
    eps: f64,
) -> Result<Vec<UnitQuaternion<f64>>, HolonomyError> {
    if field.vertex_frame(path.start)?.nearest_representative(start).distance >= eps {
        return Err(HolonomyError::StartMismatch);
    }
    let mut out = vec![*start];
    let mut v = path.start;
    for s in &path.steps {
        let edge = &cw.edges()[s.edge];
        let w = edge.other(v);
        let mut waypoints = field.edge_interior(s.edge);
        if !s.forward {
            waypoints.reverse();
        }
        waypoints.push(field.vertex_frame(w)?);
        for target in &waypoints {
            let prev = *out.last().expect("non-empty");
            let samples = step_towards(&prev, target, eps).ok_or_else(|| HolonomyError::OnEdge {
                edge: s.edge,
                source: Box::new(HolonomyError::Ambiguous { from: v, to: w }),
            })?;
            out.extend(samples);
        }
        v = w;
    }
    Ok(out)
}

/// The input frames on the boundary of a complex.
#[derive(Clone, Debug, Default)]
pub struct BoundaryField {
    vertex: BTreeMap<usize, Frame>,
    interior: BTreeMap<usize, Vec<Frame>>,
}

impl BoundaryField {
    /// Picks the frames of the boundary cells from frames keyed by mesh
    /// vertex (or by complex vertex when a vertex has no mesh id).
    pub fn from_mesh_frames(cw: &CwComplex, frames: &BoundaryFrames) -> Result<Self, HolonomyError> {
        let key = |v: usize| cw.vertices()[v].mesh.unwrap_or(v);
        let mut vertex = BTreeMap::new();
        for (v, vx) in cw.vertices().iter().enumerate() {
            if vx.on_boundary {
                let k = key(v);
                vertex.insert(v, *frames.get(&k).ok_or(HolonomyError::MissingFrame(k))?);
            }
        }
        let mut interior = BTreeMap::new();
        for (e, edge) in cw.edges().iter().enumerate() {
            if edge.on_boundary && edge.polyline.len() > 2 {
                let inner = &edge.polyline[1..edge.polyline.len() - 1];
                let fs = inner
                    .iter()
                    .map(|m| frames.get(m).copied().ok_or(HolonomyError::MissingFrame(*m)))
                    .collect::<Result<Vec<_>, _>>()?;
                interior.insert(e, fs);
            }
        }
        Ok(Self { vertex, interior })
    }

    pub fn get(&self, v: usize) -> Option<&Frame> {
        self.vertex.get(&v)
    }
}

impl SkeletonFrames for BoundaryField {
    fn vertex_frame(&self, v: usize) -> Result<Frame, HolonomyError> {
        self.vertex.get(&v).copied().ok_or(HolonomyError::MissingFrame(v))
    }

    fn edge_interior(&self, e: usize) -> Vec<Frame> {
        self.interior.get(&e).cloned().unwrap_or_default()
    }
}

/// Boundary frames extended to interior vertices by copying the frame of
/// the tree parent; interior edges carry no extra waypoints.
#[derive(Clone, Debug)]
pub struct TreeFrames<'a> {
    boundary: &'a BoundaryField,
    vertex: Vec<Frame>,
}

impl<'a> TreeFrames<'a> {
    pub fn new(cw: &CwComplex, tree: &SpanningTree, boundary: &'a BoundaryField) -> Result<Self, HolonomyError> {
        let n = cw.vertices().len();
        let mut frames: Vec<Option<Frame>> = (0..n).map(|v| boundary.get(v).copied()).collect();
        let root = tree.root();
        if frames.get(root).is_some_and(Option::is_none) {
            return Err(HolonomyError::MissingFrame(root));
        }
        // Resolve along parent chains, memoised.
        for v in 0..n {
            let mut chain = Vec::new();
            let mut x = v;
            while frames[x].is_none() {
                chain.push(x);
                x = tree.parent(x).expect("root has a frame").0;
            }
            let f = frames[x];
            for y in chain {
                frames[y] = f;
            }
        }
        Ok(Self { boundary, vertex: frames.into_iter().map(|f| f.expect("resolved")).collect() })
    }

    pub fn vertex_frames(&self) -> &[Frame] {
        &self.vertex
    }
}

impl SkeletonFrames for TreeFrames<'_> {
    fn vertex_frame(&self, v: usize) -> Result<Frame, HolonomyError> {
        self.vertex.get(v).copied().ok_or(HolonomyError::MissingFrame(v))
    }

    fn edge_interior(&self, e: usize) -> Vec<Frame> {
        self.boundary.edge_interior(e)
    }
}

/// Paths ρ_i from f(b_i) to f(b_0), one per boundary component; ρ_0 is constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Transport {
    pub paths: Vec<FramePath>,
}

impl Transport {
    /// ρ_i := f(p_{b_i,b_0}) sampled through [`TreeFrames`], so that χ_i is trivial.
    pub fn along_tree(
        cw: &CwComplex,
        tree: &SpanningTree,
        field: &TreeFrames<'_>,
        eps: f64,
    ) -> Result<Self, HolonomyError> {
        let mut paths = Vec::with_capacity(tree.basepoints().len());
        for (i, &b) in tree.basepoints().iter().enumerate() {
            let start = field.vertex_frame(b)?.representative();
            let samples = lift_edge_path(cw, field, &tree.path_to_root(cw, b), &start, eps)
                .map_err(|e| HolonomyError::Transport(i, e.to_string()))?;
            paths.push(FramePath::from_quats(samples));
        }
        Ok(Self { paths })
    }

    /// Replaces the default paths by user paths, checking their endpoints and density.
    pub fn with_overrides(
        mut self,
        overrides: BTreeMap<usize, FramePath>,
        tree: &SpanningTree,
        field: &dyn SkeletonFrames,
        eps: f64,
    ) -> Result<Self, HolonomyError> {
        let root_frame = field.vertex_frame(tree.root())?;
        for (i, path) in overrides {
            let bad = |m: String| HolonomyError::Transport(i, m);
            if i == 0 {
                return Err(bad("component 0 uses the constant path".into()));
            }
            if i >= self.paths.len() {
                return Err(bad("no such boundary component".into()));
            }
            let first = path.samples.first().ok_or_else(|| bad("empty path".into()))?;
            let last = path.samples.last().expect("non-empty");
            if !first.same_frame(&field.vertex_frame(tree.basepoint(i))?, eps) {
                return Err(bad("does not start at the basepoint frame".into()));
            }
            if !last.same_frame(&root_frame, eps) {
                return Err(bad("does not end at the base frame".into()));
            }
            lift_samples(&path, &first.representative(), eps).map_err(|e| bad(e.to_string()))?;
            self.paths[i] = path;
        }
        Ok(self)
    }

    /// Reads `transport v1`: `component <i> <n>` followed by `n` lines `qw qx qy qz`.
    pub fn parse(text: &str) -> Result<BTreeMap<usize, FramePath>, ParseError> {
        let mut r = LineReader::new("transport", text);
        r.expect_header("transport v1")?;
        let mut out = BTreeMap::new();
        while let Some((n, line)) = r.next_line() {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 || t[0] != "component" {
                return Err(r.error(n, "expected `component <i> <n>`"));
            }
            let i: usize = t[1].parse().map_err(|_| r.error(n, "bad component index"))?;
            let count: usize = t[2].parse().map_err(|_| r.error(n, "bad sample count"))?;
            let mut samples = Vec::with_capacity(count);
            for _ in 0..count {
                let (m, line) = r.require_line("quaternion sample")?;
                let [w, x, y, z] = parse_fixed::<f64, 4>(&r, m, line)?;
                samples.push(Frame::new(w, x, y, z).map_err(|e| r.error(m, e.to_string()))?);
            }
            if out.insert(i, FramePath::new(samples)).is_some() {
                return Err(r.error(n, format!("component {i} listed twice")));
            }
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<BTreeMap<usize, FramePath>, ParseError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| ParseError::new("transport", 0, e.to_string()))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("transport v1\n");
        for (i, p) in self.paths.iter().enumerate().skip(1) {
            let _ = writeln!(s, "component {i} {}", p.len());
            for f in &p.samples {
                write_quat(&mut s, &f.representative());
            }
        }
        s
    }
}

/// Lifted samples of ζ(e) = ρ_i⁻¹ · f(φ(e)) · ρ_i starting at `anchor`.
pub fn zeta_loop(
    cw: &CwComplex,
    tree: &SpanningTree,
    field: &dyn SkeletonFrames,
    transport: &Transport,
    anchor: &UnitQuaternion<f64>,
    e: usize,
    eps: f64,
) -> Result<Vec<UnitQuaternion<f64>>, HolonomyError> {
    let i = tree.edge_component(e).ok_or(crate::error::TreeError::NotBoundaryEdge(e))?;
    let rho = &transport.paths[i];
    let to_base = lift_samples(&rho.reversed(), anchor, eps).map_err(|x| HolonomyError::Transport(i, x.to_string()))?;
    let phi = tree.phi(cw, e)?;
    let around = lift_edge_path(cw, field, &phi, to_base.last().expect("non-empty"), eps)?;
    let back = lift_samples(rho, around.last().expect("non-empty"), eps)
        .map_err(|x| HolonomyError::Transport(i, x.to_string()))?;
    let mut out = to_base;
    out.extend(around.into_iter().skip(1));
    out.extend(back.into_iter().skip(1));
    Ok(out)
}

/// [ζ(e)] for every non-tree boundary edge, based at the frame of b_0 lifted at `anchor`.
pub fn zeta_classes(
    cw: &CwComplex,
    tree: &SpanningTree,
    field: &dyn SkeletonFrames,
    transport: &Transport,
    anchor: &UnitQuaternion<f64>,
    eps: f64,
) -> Result<BTreeMap<usize, GroupElement>, HolonomyError> {
    let mut out = BTreeMap::new();
    for e in tree.boundary_non_tree_edges() {
        let lifted = zeta_loop(cw, tree, field, transport, anchor, e, eps)?;
        out.insert(e, class_of_lift(anchor, lifted.last().expect("non-empty"), eps)?);
    }
    Ok(out)
}
