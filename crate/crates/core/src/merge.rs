//! Greedy cell-merging simplifier.
//!
//! Three moves are applied until none succeeds:
//! (a) two 3-cells sharing a disk patch become one 3-cell;
//! (b) two interior 2-cells between the same 3-cells, sharing a single edge
//!     path, become one 2-cell;
//! (c) two 1-cells meeting at a degree-2 vertex with identical face sets
//!     become one 1-cell.
//! Boundary 2-cells are never merged.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::complex::{check_sphere, CwComplex, CwParts, UnionFind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MergeStats {
    pub cell_merges: usize,
    pub face_merges: usize,
    pub edge_merges: usize,
}

#[derive(Clone, Debug)]
struct WEdge {
    ends: [usize; 2],
    polyline: Vec<usize>,
    alive: bool,
}

#[derive(Clone, Debug)]
struct WFace {
    edges: BTreeSet<usize>,
    cells: Vec<usize>,
    tube_wall: bool,
    alive: bool,
}

#[derive(Clone, Debug)]
struct WCell {
    faces: BTreeSet<usize>,
    alive: bool,
}

struct Work {
    vmesh: Vec<Option<usize>>,
    valive: Vec<bool>,
    edges: Vec<WEdge>,
    faces: Vec<WFace>,
    cells: Vec<WCell>,
    vedges: Vec<BTreeSet<usize>>,
    efaces: Vec<BTreeSet<usize>>,
}

/// Merges cells to a fixpoint; the result is re-validated as a regular complex.
pub fn merge_cells(cw: &CwComplex) -> (CwComplex, MergeStats) {
    let mut w = Work::new(cw);
    let mut stats = MergeStats::default();
    loop {
        let before = stats;
        while w.merge_cells_once() {
            stats.cell_merges += 1;
        }
        while w.merge_faces_once() {
            stats.face_merges += 1;
        }
        while w.merge_edges_once() {
            stats.edge_merges += 1;
        }
        if stats == before {
            break;
        }
    }
    let out = CwComplex::from_parts(w.compact()).expect("merging preserves regularity");
    (out, stats)
}

impl Work {
    fn new(cw: &CwComplex) -> Self {
        let edges: Vec<WEdge> = cw
            .edges()
            .iter()
            .map(|e| WEdge { ends: e.ends, polyline: e.polyline.clone(), alive: true })
            .collect();
        let faces: Vec<WFace> = cw
            .faces()
            .iter()
            .map(|f| WFace {
                edges: f.edges().collect(),
                cells: f.cells.clone(),
                tube_wall: f.tube_wall,
                alive: true,
            })
            .collect();
        let cells = cw
            .cells()
            .iter()
            .map(|c| WCell { faces: c.faces.iter().copied().collect(), alive: true })
            .collect();
        let vedges = (0..cw.vertices().len()).map(|v| cw.vertex_edges(v).iter().copied().collect()).collect();
        let efaces = (0..edges.len()).map(|e| cw.edge_faces(e).iter().copied().collect()).collect();
        Self {
            vmesh: cw.vertices().iter().map(|v| v.mesh).collect(),
            valive: vec![true; cw.vertices().len()],
            edges,
            faces,
            cells,
            vedges,
            efaces,
        }
    }

    fn face_vertices(&self, f: usize) -> BTreeSet<usize> {
        self.faces[f].edges.iter().flat_map(|&e| self.edges[e].ends).collect()
    }

    fn cell_closure(&self, c: usize) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let edges: BTreeSet<usize> =
            self.cells[c].faces.iter().flat_map(|&f| self.faces[f].edges.iter().copied()).collect();
        let verts = edges.iter().flat_map(|&e| self.edges[e].ends).collect();
        (verts, edges)
    }

    /// Interior patches grouped by cell pair, largest first, then lowest ids.
    fn cell_candidates(&self) -> Vec<((usize, usize), Vec<usize>)> {
        let mut by_pair: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, f) in self.faces.iter().enumerate() {
            if f.alive && f.cells.len() == 2 {
                let (a, b) = (f.cells[0].min(f.cells[1]), f.cells[0].max(f.cells[1]));
                by_pair.entry((a, b)).or_default().push(i);
            }
        }
        let mut out: Vec<_> = by_pair.into_iter().collect();
        out.sort_by_key(|(pair, patch)| (std::cmp::Reverse(patch.len()), *pair));
        out
    }

    fn merge_cells_once(&mut self) -> bool {
        for ((a, b), patch) in self.cell_candidates() {
            if let Some(removal) = self.disk_patch(a, b, &patch) {
                self.apply_cell_merge(a, b, &patch, removal);
                return true;
            }
        }
        false
    }

    /// Edges and vertices to delete if `patch` is a disk whose removal joins
    /// cells `a` and `b` into a ball.
    fn disk_patch(&self, a: usize, b: usize, patch: &[usize]) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut mult: BTreeMap<usize, usize> = BTreeMap::new();
        for &f in patch {
            for &e in &self.faces[f].edges {
                *mult.entry(e).or_default() += 1;
            }
        }
        if mult.values().any(|&m| m > 2) {
            return None;
        }
        let rim: Vec<usize> = mult.iter().filter(|(_, &m)| m == 1).map(|(&e, _)| e).collect();
        let inner: Vec<usize> = mult.iter().filter(|(_, &m)| m == 2).map(|(&e, _)| e).collect();
        if rim.is_empty() || !self.is_single_cycle(&rim) {
            return None;
        }
        let verts: BTreeSet<usize> = mult.keys().flat_map(|&e| self.edges[e].ends).collect();
        if verts.len() as i64 - mult.len() as i64 + patch.len() as i64 != 1 {
            return None;
        }
        if !self.faces_connected(patch) {
            return None;
        }
        let patch_set: BTreeSet<usize> = patch.iter().copied().collect();
        if inner.iter().any(|&e| !self.efaces[e].is_subset(&patch_set)) {
            return None;
        }
        let rim_verts: BTreeSet<usize> = rim.iter().flat_map(|&e| self.edges[e].ends).collect();
        let inner_set: BTreeSet<usize> = inner.iter().copied().collect();
        let inner_verts: Vec<usize> = verts.difference(&rim_verts).copied().collect();
        if inner_verts.iter().any(|&v| !self.vedges[v].is_subset(&inner_set)) {
            return None;
        }
        let (va, ea) = self.cell_closure(a);
        let (vb, eb) = self.cell_closure(b);
        let patch_edges: BTreeSet<usize> = mult.keys().copied().collect();
        if va.intersection(&vb).copied().collect::<BTreeSet<_>>() != verts
            || ea.intersection(&eb).copied().collect::<BTreeSet<_>>() != patch_edges
        {
            return None;
        }
        let shell: Vec<usize> =
            self.cells[a].faces.symmetric_difference(&self.cells[b].faces).copied().collect();
        check_sphere(&shell, |f| self.faces[f].edges.iter().copied(), |e| self.edges[e].ends).ok()?;
        Some((inner, inner_verts))
    }

    fn is_single_cycle(&self, edges: &[usize]) -> bool {
        let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
        for &e in edges {
            for v in self.edges[e].ends {
                *deg.entry(v).or_default() += 1;
            }
        }
        deg.values().all(|&d| d == 2) && self.edges_connected(edges)
    }

    fn edges_connected(&self, edges: &[usize]) -> bool {
        let verts: Vec<usize> =
            edges.iter().flat_map(|&e| self.edges[e].ends).collect::<BTreeSet<_>>().into_iter().collect();
        let idx: BTreeMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut uf = UnionFind::new(verts.len());
        for &e in edges {
            let [x, y] = self.edges[e].ends;
            uf.union(idx[&x], idx[&y]);
        }
        (0..verts.len()).all(|i| uf.find(i) == uf.find(0))
    }

    fn faces_connected(&self, faces: &[usize]) -> bool {
        let mut uf = UnionFind::new(faces.len());
        let mut first: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &f) in faces.iter().enumerate() {
            for &e in &self.faces[f].edges {
                match first.get(&e) {
                    Some(&j) => uf.union(i, j),
                    None => {
                        first.insert(e, i);
                    }
                }
            }
        }
        (0..faces.len()).all(|i| uf.find(i) == uf.find(0))
    }

    fn apply_cell_merge(&mut self, a: usize, b: usize, patch: &[usize], (edges, verts): (Vec<usize>, Vec<usize>)) {
        let merged: BTreeSet<usize> =
            self.cells[a].faces.symmetric_difference(&self.cells[b].faces).copied().collect();
        for &f in &self.cells[b].faces {
            for c in &mut self.faces[f].cells {
                if *c == b {
                    *c = a;
                }
            }
        }
        self.cells[a].faces = merged;
        self.cells[b].alive = false;
        self.cells[b].faces.clear();
        for &f in patch {
            self.kill_face(f);
        }
        for e in edges {
            self.kill_edge(e);
        }
        for v in verts {
            self.valive[v] = false;
        }
    }

    fn kill_face(&mut self, f: usize) {
        for &e in &self.faces[f].edges {
            self.efaces[e].remove(&f);
        }
        self.faces[f].alive = false;
    }

    fn kill_edge(&mut self, e: usize) {
        for v in self.edges[e].ends {
            self.vedges[v].remove(&e);
        }
        self.edges[e].alive = false;
    }

    fn merge_faces_once(&mut self) -> bool {
        for f1 in 0..self.faces.len() {
            if !self.faces[f1].alive || self.faces[f1].cells.len() != 2 {
                continue;
            }
            let mut pair = self.faces[f1].cells.clone();
            pair.sort_unstable();
            let partners: BTreeSet<usize> = self.faces[f1]
                .edges
                .iter()
                .flat_map(|&e| self.efaces[e].iter().copied())
                .filter(|&f2| f2 > f1)
                .collect();
            for f2 in partners {
                let mut other = self.faces[f2].cells.clone();
                other.sort_unstable();
                if other != pair {
                    continue;
                }
                if let Some((shared, inner)) = self.mergeable_faces(f1, f2) {
                    let merged: BTreeSet<usize> =
                        self.faces[f1].edges.symmetric_difference(&self.faces[f2].edges).copied().collect();
                    for &c in &pair {
                        self.cells[c].faces.remove(&f2);
                    }
                    self.kill_face(f2);
                    for &e in &shared {
                        self.efaces[e].remove(&f1);
                        self.kill_edge(e);
                    }
                    for &e in &merged {
                        self.efaces[e].insert(f1);
                    }
                    self.faces[f1].edges = merged;
                    for v in inner {
                        self.valive[v] = false;
                    }
                    return true;
                }
            }
        }
        false
    }

    /// Shared edges and inner path vertices when `f1` and `f2` meet in one edge path.
    fn mergeable_faces(&self, f1: usize, f2: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let shared: Vec<usize> =
            self.faces[f1].edges.intersection(&self.faces[f2].edges).copied().collect();
        if shared.is_empty() || shared.len() == self.faces[f1].edges.len() || shared.len() == self.faces[f2].edges.len() {
            return None;
        }
        let both = BTreeSet::from([f1, f2]);
        if shared.iter().any(|&e| self.efaces[e] != both) {
            return None;
        }
        let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
        for &e in &shared {
            for v in self.edges[e].ends {
                *deg.entry(v).or_default() += 1;
            }
        }
        if deg.values().any(|&d| d > 2) || deg.values().filter(|&&d| d == 1).count() != 2 {
            return None;
        }
        if !self.edges_connected(&shared) {
            return None;
        }
        let inner: Vec<usize> = deg.iter().filter(|(_, &d)| d == 2).map(|(&v, _)| v).collect();
        if inner.iter().any(|&v| self.vedges[v].len() != 2) {
            return None;
        }
        let common: BTreeSet<usize> =
            self.face_vertices(f1).intersection(&self.face_vertices(f2)).copied().collect();
        if common.len() != deg.len() {
            return None;
        }
        Some((shared, inner))
    }

    fn merge_edges_once(&mut self) -> bool {
        for v in 0..self.valive.len() {
            if !self.valive[v] || self.vedges[v].len() != 2 {
                continue;
            }
            let es: Vec<usize> = self.vedges[v].iter().copied().collect();
            let (e1, e2) = (es[0], es[1]);
            let (a, b) = (self.other_end(e1, v), self.other_end(e2, v));
            if a == b || self.efaces[e1] != self.efaces[e2] {
                continue;
            }
            // Polyline from a through v to b.
            let mut line = self.oriented_polyline(e1, a);
            let tail = self.oriented_polyline(e2, v);
            line.extend(tail.into_iter().skip(1));
            for f in self.efaces[e2].clone() {
                self.faces[f].edges.remove(&e2);
            }
            self.efaces[e2].clear();
            self.kill_edge(e2);
            self.vedges[v].remove(&e1);
            self.valive[v] = false;
            let (ends, line) = if a < b { ([a, b], line) } else { ([b, a], line.into_iter().rev().collect()) };
            self.edges[e1].ends = ends;
            self.edges[e1].polyline = line;
            self.vedges[b].insert(e1);
            return true;
        }
        false
    }

    fn other_end(&self, e: usize, v: usize) -> usize {
        let [x, y] = self.edges[e].ends;
        if x == v {
            y
        } else {
            x
        }
    }

    fn oriented_polyline(&self, e: usize, from: usize) -> Vec<usize> {
        let edge = &self.edges[e];
        if edge.ends[0] == from {
            edge.polyline.clone()
        } else {
            edge.polyline.iter().rev().copied().collect()
        }
    }

    fn compact(&self) -> CwParts {
        let renumber = |alive: &mut dyn Iterator<Item = bool>| -> Vec<Option<usize>> {
            let mut next = 0;
            alive
                .map(|a| {
                    a.then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        let vmap = renumber(&mut self.valive.iter().copied());
        let emap = renumber(&mut self.edges.iter().map(|e| e.alive));
        let fmap = renumber(&mut self.faces.iter().map(|f| f.alive));
        CwParts {
            vertex_mesh: self.vmesh.iter().zip(&self.valive).filter(|(_, &a)| a).map(|(m, _)| *m).collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| e.alive)
                .map(|e| ([vmap[e.ends[0]].expect("live"), vmap[e.ends[1]].expect("live")], e.polyline.clone()))
                .collect(),
            faces: self
                .faces
                .iter()
                .filter(|f| f.alive)
                .map(|f| (f.edges.iter().map(|&e| emap[e].expect("live")).collect(), f.tube_wall))
                .collect(),
            cells: self
                .cells
                .iter()
                .filter(|c| c.alive)
                .map(|c| c.faces.iter().map(|&f| fmap[f].expect("live")).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::carve;
    use crate::fixtures;
    use crate::mesh::{SingularityGraph, TetMesh};

    fn merged(mesh: &TetMesh, graph: &SingularityGraph) -> (CwComplex, CwComplex) {
        let cw = carve(mesh, graph).unwrap();
        let (m, _) = merge_cells(&cw);
        (cw, m)
    }

    #[test]
    fn two_tets_sharing_a_triangle_become_one_cell() {
        let mesh = TetMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]],
            vec![[0, 1, 2, 3], [1, 2, 3, 4]],
        )
        .unwrap();
        let (before, after) = merged(&mesh, &SingularityGraph::empty());
        assert_eq!(before.counts().faces, 7);
        assert_eq!(after.counts().cells, 1);
        assert_eq!(after.counts().faces, 6);
        assert!(after.interior_faces().is_empty());
    }

    #[test]
    fn ball_merges_to_no_interior_faces() {
        for n in [1, 2, 3] {
            let (before, after) = merged(&fixtures::ball(n), &SingularityGraph::empty());
            assert_eq!(after.counts().cells, 1, "ball({n})");
            assert!(after.interior_faces().is_empty());
            assert_eq!(after.euler_characteristic(), before.euler_characteristic());
            assert_eq!(after.total_boundary_euler(), before.total_boundary_euler());
        }
    }

    #[test]
    fn torus_merges_to_two_interior_faces() {
        let (before, after) = merged(&fixtures::torus(), &SingularityGraph::empty());
        assert_eq!(after.interior_faces().len(), 2);
        assert_eq!(after.counts().cells, 2);
        assert_eq!(after.euler_characteristic(), before.euler_characteristic());
        assert_eq!(after.boundary_euler(0), 0);
    }

    #[test]
    fn carved_ball_and_shell_keep_euler_numbers() {
        for (mesh, graph) in [
            (fixtures::ball(4), fixtures::vertical_tube(4)),
            (fixtures::shell(), SingularityGraph::empty()),
            (fixtures::five_tet_cube(), SingularityGraph::empty()),
        ] {
            let (before, after) = merged(&mesh, &graph);
            assert!(after.counts().cells <= before.counts().cells);
            assert!(after.counts().faces <= before.counts().faces);
            assert_eq!(after.euler_characteristic(), before.euler_characteristic());
            assert_eq!(after.boundary_components().len(), before.boundary_components().len());
            for i in 0..before.boundary_components().len() {
                assert_eq!(after.boundary_euler(i), before.boundary_euler(i));
            }
        }
    }

    #[test]
    fn minimal_complexes_are_fixpoints() {
        for cw in [fixtures::minimal_ball(), fixtures::minimal_solid_torus()] {
            let (out, stats) = merge_cells(&cw);
            assert_eq!(stats, MergeStats::default());
            assert_eq!(out, cw);
        }
    }
}
