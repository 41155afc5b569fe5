//! Quarter-integer indices of cross loops and the index identities of a
//! singularity graph.
//!
//! Indices are carried as numerators over 4.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{GraphError, IndexError, ParseError};
use crate::frame::FramePath;
use crate::mesh::SingularityGraph;
use crate::text::{parse_token, LineReader};

pub const SNAP_TOLERANCE: f64 = 1e-6;
pub const ALIGNMENT_TOLERANCE: f64 = 1e-3;
const HALF_STEP_GUARD: f64 = 1e-9;

/// Cross angles (each meaningful mod π/2) around a loop in a fixed planar
/// trivialization. The loop is cyclic: the step from the last sample back to
/// the first is always counted, and is zero when `closed` repeats the start.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossLoop {
    pub angles: Vec<f64>,
    pub closed: bool,
}

impl CrossLoop {
    pub fn new(angles: Vec<f64>) -> Self {
        Self { angles, closed: false }
    }

    pub fn reversed(&self) -> Self {
        let mut angles = self.angles.clone();
        angles.reverse();
        Self { angles, closed: self.closed }
    }

    /// Reads `crossloop v1`, then `closed true|false`, then `samples N` and N angles.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut r = LineReader::new("crossloop", text);
        r.expect_header("crossloop v1")?;
        let (n, line) = r.require_line("`closed true|false`")?;
        let closed = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["closed", "true"] => true,
            ["closed", "false"] => false,
            _ => return Err(r.error(n, "expected `closed true|false`")),
        };
        let count = r.expect_count("samples")?;
        let mut angles = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, line) = r.require_line("angle")?;
            angles.push(parse_token::<f64>(&r, n, line.trim())?);
        }
        r.finish()?;
        Ok(Self { angles, closed })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| ParseError::new("crossloop", 0, e.to_string()))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("crossloop v1\nclosed {}\nsamples {}\n", self.closed, self.angles.len());
        for a in &self.angles {
            let _ = writeln!(s, "{a}");
        }
        s
    }
}

/// Representative of `d` mod π/2 in (−π/4, π/4].
pub fn principal_difference(d: f64) -> f64 {
    let r = d - FRAC_PI_2 * (d / FRAC_PI_2).round();
    if r <= -FRAC_PI_4 { r + FRAC_PI_2 } else { r }
}

/// Index of a cross loop as a numerator over 4: the total turning divided by 2π.
pub fn loop_index(l: &CrossLoop) -> Result<i64, IndexError> {
    let n = l.angles.len();
    if n < 2 {
        return Err(IndexError::TooShort);
    }
    let mut total = 0.0;
    for k in 0..n {
        let d = principal_difference(l.angles[(k + 1) % n] - l.angles[k]);
        if (d.abs() - FRAC_PI_4).abs() < HALF_STEP_GUARD {
            return Err(IndexError::Density(k + 1));
        }
        total += d;
    }
    let quarters = total / (2.0 * PI) * 4.0;
    let snapped = quarters.round();
    if (quarters - snapped).abs() / 4.0 > SNAP_TOLERANCE {
        return Err(IndexError::NotQuarter(quarters / 4.0));
    }
    Ok(snapped as i64)
}

/// Index of a frame loop around an edge with the given tangent: the axis
/// along the tangent is dropped and the other two are read as a cross in
/// the normal plane.
pub fn edge_index_from_frames(path: &FramePath, tangent: &Vector3<f64>) -> Result<i64, IndexError> {
    let t = tangent.normalize();
    let helper = if t.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = (helper - t * t.dot(&helper)).normalize();
    let w = t.cross(&u);
    let mut angles = Vec::with_capacity(path.len());
    for (k, f) in path.samples.iter().enumerate() {
        let axes = f.axes();
        let along = (0..3)
            .find(|&i| axes[i].cross(&t).norm() <= ALIGNMENT_TOLERANCE)
            .ok_or(IndexError::Misaligned(k))?;
        let a = axes[(along + 1) % 3];
        angles.push(a.dot(&w).atan2(a.dot(&u)));
    }
    loop_index(&CrossLoop { angles, closed: path.closed })
}

/// Sum of incident edge indices at one graph node, as a numerator over 4.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeSum {
    pub node: usize,
    pub vertex: usize,
    pub interior: bool,
    pub quarters: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphReport {
    pub nodes: Vec<NodeSum>,
    /// Interior nodes whose incident indices do not sum to 2.
    pub interior_violations: Vec<usize>,
    pub boundary_sum: f64,
    pub total_sum: f64,
    /// 2χ(M) + 2|V°|.
    pub expected_total: f64,
    pub global_ok: bool,
    pub ok: bool,
}

/// A singularity graph whose every edge carries an index.
#[derive(Clone, Debug)]
pub struct IndexedGraph {
    pub graph: SingularityGraph,
    quarters: Vec<i64>,
}

impl IndexedGraph {
    pub fn new(graph: SingularityGraph) -> Result<Self, IndexError> {
        let quarters = graph
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| e.index.ok_or(GraphError::MissingIndex(i)))
            .collect::<Result<_, _>>()?;
        Ok(Self { graph, quarters })
    }

    /// Index of edge `e` over 4.
    pub fn quarters(&self, e: usize) -> i64 {
        self.quarters[e]
    }

    /// Leaves lie on the boundary, all other nodes in the interior.
    pub fn is_interior(&self, node: usize) -> bool {
        self.graph.node_degrees()[node] > 1
    }
}

/// Checks Σ_{E_v} ind = 2 at interior nodes and Σ_v Σ_{E_v} ind = 2χ(M) + 2|V°|.
pub fn validate_graph(g: &IndexedGraph, euler: i64) -> GraphReport {
    let degrees = g.graph.node_degrees();
    let mut sums = vec![0i64; g.graph.nodes.len()];
    for (e, edge) in g.graph.edges.iter().enumerate() {
        for &n in &edge.ends {
            sums[n] += g.quarters(e);
        }
    }
    let nodes: Vec<NodeSum> = sums
        .iter()
        .enumerate()
        .map(|(n, &q)| NodeSum { node: n, vertex: g.graph.nodes[n], interior: degrees[n] > 1, quarters: q })
        .collect();
    let interior_violations: Vec<usize> = nodes.iter().filter(|s| s.interior && s.quarters != 8).map(|s| s.node).collect();
    let interior_count = nodes.iter().filter(|s| s.interior).count() as i64;
    let total: i64 = sums.iter().sum();
    let boundary: i64 = nodes.iter().filter(|s| !s.interior).map(|s| s.quarters).sum();
    let expected = 4 * (2 * euler + 2 * interior_count);
    let global_ok = total == expected;
    GraphReport {
        ok: global_ok && interior_violations.is_empty(),
        nodes,
        interior_violations,
        boundary_sum: boundary as f64 / 4.0,
        total_sum: total as f64 / 4.0,
        expected_total: expected as f64 / 4.0,
        global_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Frame;
    use crate::mesh::GraphEdge;
    use nalgebra::{Unit, UnitQuaternion};
    use proptest::prelude::*;

    fn sweep(from: f64, to: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| from + (to - from) * k as f64 / n as f64).collect()
    }

    #[test]
    fn basic_indices() {
        assert_eq!(loop_index(&CrossLoop::new(vec![0.3; 8])).unwrap(), 0);
        assert_eq!(loop_index(&CrossLoop::new(sweep(0.0, FRAC_PI_2, 10))).unwrap(), 1);
        assert_eq!(loop_index(&CrossLoop::new(sweep(0.0, -3.0 * FRAC_PI_2, 40))).unwrap(), -3);
    }

    #[test]
    fn boundary_aligned_convex_loop_has_index_one() {
        // Ellipse tangents sampled around the curve.
        let n = 64;
        let angles: Vec<f64> = (0..n)
            .map(|k| {
                let s = 2.0 * PI * k as f64 / n as f64;
                let (dx, dy) = (-2.0 * s.sin(), s.cos());
                dy.atan2(dx)
            })
            .collect();
        assert_eq!(loop_index(&CrossLoop::new(angles)).unwrap(), 4);
    }

    #[test]
    fn density_and_quarter_errors() {
        assert!(matches!(loop_index(&CrossLoop::new(vec![0.0, FRAC_PI_4])), Err(IndexError::Density(1))));
        assert!(matches!(loop_index(&CrossLoop::new(vec![0.0])), Err(IndexError::TooShort)));
        assert_eq!(principal_difference(FRAC_PI_4), FRAC_PI_4);
        assert!((principal_difference(-FRAC_PI_4) - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn crossloop_file_round_trip() {
        let l = CrossLoop { angles: sweep(0.0, 1.0, 5), closed: true };
        assert_eq!(CrossLoop::parse(&l.to_text()).unwrap(), l);
        assert!(CrossLoop::parse("crossloop v1\nclosed maybe\nsamples 0\n").is_err());
    }

    fn about(t: Vector3<f64>, base: UnitQuaternion<f64>, turn: f64, n: usize) -> FramePath {
        let axis = Unit::new_normalize(t);
        FramePath::closed(
            (0..=n)
                .map(|k| Frame::from_unit(UnitQuaternion::from_axis_angle(&axis, turn * k as f64 / n as f64) * base))
                .collect(),
        )
    }

    #[test]
    fn edge_index_from_aligned_frames() {
        let t = Vector3::new(1.0, 2.0, 2.0) / 3.0;
        // A frame with its third axis along t.
        let base = UnitQuaternion::rotation_between(&Vector3::z(), &t).unwrap();
        assert_eq!(edge_index_from_frames(&about(t, base, 0.0, 8), &t).unwrap(), 0);
        assert_eq!(edge_index_from_frames(&about(t, base, FRAC_PI_2, 16), &t).unwrap(), 1);
        assert_eq!(edge_index_from_frames(&about(t, base, -PI, 16), &t).unwrap(), -2);
        let tilted = UnitQuaternion::from_euler_angles(0.2, 0.0, 0.0) * base;
        assert!(matches!(edge_index_from_frames(&about(t, tilted, 0.0, 4), &t), Err(IndexError::Misaligned(0))));
    }

    fn graph(edges: &[(usize, usize, Option<i64>)], nodes: usize) -> SingularityGraph {
        SingularityGraph {
            nodes: (0..nodes).map(|n| n * 10).collect(),
            edges: edges
                .iter()
                .map(|&(a, b, index)| GraphEdge { ends: [a, b], index, path: vec![a * 10, b * 10] })
                .collect(),
        }
    }

    #[test]
    fn interior_vertex_identity() {
        // Node 0 interior with three edges to boundary leaves.
        let good = IndexedGraph::new(graph(&[(0, 1, Some(4)), (0, 2, Some(2)), (0, 3, Some(2))], 4)).unwrap();
        let r = validate_graph(&good, 1);
        assert!(r.interior_violations.is_empty());
        // Node sums 2 + 1 + ½ + ½ = 4 = 2·1 + 2·1.
        assert_eq!(r.total_sum, 4.0);
        assert_eq!(r.expected_total, 4.0);
        assert!(r.ok);

        let bad = IndexedGraph::new(graph(&[(0, 1, Some(1)), (0, 2, Some(1)), (0, 3, Some(1))], 4)).unwrap();
        let r = validate_graph(&bad, 1);
        assert_eq!(r.interior_violations, vec![0]);
        assert!(!r.ok);
    }

    #[test]
    fn empty_graph_on_a_ball_fails_globally() {
        let r = validate_graph(&IndexedGraph::new(SingularityGraph::empty()).unwrap(), 1);
        assert_eq!(r.expected_total, 2.0);
        assert_eq!(r.total_sum, 0.0);
        assert!(!r.global_ok);
        // Two index-1 edges crossing a ball: boundary sum 2 = χ(S²).
        let r = validate_graph(&IndexedGraph::new(graph(&[(0, 1, Some(4))], 2)).unwrap(), 1);
        assert_eq!(r.boundary_sum, 2.0);
        assert!(r.ok);
    }

    #[test]
    fn missing_index_rejected() {
        assert!(matches!(
            IndexedGraph::new(graph(&[(0, 1, None)], 2)),
            Err(IndexError::Graph(GraphError::MissingIndex(0)))
        ));
    }

    /// Appends steps of at most 0.5 so that `offset + Σ steps` is a multiple of π/2.
    fn close(mut steps: Vec<f64>, offset: f64) -> Vec<f64> {
        let total = offset + steps.iter().sum::<f64>();
        let gap = FRAC_PI_2 * (total / FRAC_PI_2).round() - total;
        let k = (gap.abs() / 0.5).ceil().max(1.0) as usize;
        steps.extend(std::iter::repeat_n(gap / k as f64, k));
        steps
    }

    /// Angles visited by cumulative steps from `start`; the last step is the wrap back.
    fn angles(start: f64, steps: &[f64]) -> Vec<f64> {
        let mut a = start;
        let mut out = vec![a];
        for s in &steps[..steps.len() - 1] {
            a += s;
            out.push(a);
        }
        out
    }

    fn steps() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-0.7f64..0.7, 2..30)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn reversal_rotation_refinement(raw in steps(), start in -2.0f64..2.0, shift in 0usize..40) {
            let a = angles(start, &close(raw, 0.0));
            let l = CrossLoop::new(a.clone());
            let i = loop_index(&l).unwrap();
            prop_assert_eq!(loop_index(&l.reversed()).unwrap(), -i);
            let n = a.len();
            let mut rotated = a.clone();
            rotated.rotate_left(shift % n);
            prop_assert_eq!(loop_index(&CrossLoop::new(rotated)).unwrap(), i);
            let refined: Vec<f64> = (0..n)
                .flat_map(|k| [a[k], a[k] + principal_difference(a[(k + 1) % n] - a[k]) / 2.0])
                .collect();
            prop_assert_eq!(loop_index(&CrossLoop::new(refined)).unwrap(), i);
        }

        #[test]
        fn indices_add_across_a_shared_arc(
            shared in steps(), p in steps(), q in steps(), start in -2.0f64..2.0,
        ) {
            // A = P·S and B = S⁻¹·Q; gluing along S leaves P·Q.
            let s_total: f64 = shared.iter().sum();
            let p = close(p, s_total);
            let q = close(q, -s_total);
            let back: Vec<f64> = shared.iter().rev().map(|x| -x).collect();
            let a: Vec<f64> = p.iter().chain(&shared).copied().collect();
            let b: Vec<f64> = back.iter().chain(&q).copied().collect();
            let glued: Vec<f64> = p.iter().chain(&q).copied().collect();
            let ia = loop_index(&CrossLoop::new(angles(start, &a))).unwrap();
            let ib = loop_index(&CrossLoop::new(angles(start, &b))).unwrap();
            let ig = loop_index(&CrossLoop::new(angles(start, &glued))).unwrap();
            prop_assert_eq!(ig, ia + ib);
        }
    }
}
