//! Regular CW complexes of dimension ≤ 3 and the carving of a singularity
//! tube out of a tet mesh.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::ComplexError;
use crate::mesh::{sorted3, tet_edges, tet_faces, SingularityGraph, TetMesh};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    /// Mesh vertex this 0-cell came from, if any.
    pub mesh: Option<usize>,
    pub on_boundary: bool,
}

/// A 1-cell with its fixed direction `ends[0] → ends[1]` (lower id first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub ends: [usize; 2],
    /// Mesh vertices along the edge from `ends[0]` to `ends[1]`; empty for abstract complexes.
    pub polyline: Vec<usize>,
    pub on_boundary: bool,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if self.ends[0] == v {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }
}

/// One step of a face cycle: the edge and whether it is traversed along its direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CycleStep {
    pub edge: usize,
    pub forward: bool,
}

impl CycleStep {
    /// δ ∈ {+1, −1}.
    pub fn sign(&self) -> i32 {
        if self.forward {
            1
        } else {
            -1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// σ_F, starting at the lowest vertex towards its lowest neighbour.
    pub cycle: Vec<CycleStep>,
    /// 3-cells incident to this face (one or two).
    pub cells: Vec<usize>,
    pub on_boundary: bool,
    /// Boundary face created by carving (in one kept tet, two mesh tets).
    pub tube_wall: bool,
}

impl Face {
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.cycle.iter().map(|s| s.edge)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub faces: Vec<usize>,
}

/// One connected component N_i of the boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryComponent {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub faces: Vec<usize>,
}

/// Input description for [`CwComplex::from_parts`].
#[derive(Clone, Debug, Default)]
pub struct CwParts {
    pub vertex_mesh: Vec<Option<usize>>,
    /// Endpoints and polyline (mesh vertices from the first end to the second).
    pub edges: Vec<([usize; 2], Vec<usize>)>,
    /// Unordered edge sets and the tube-wall flag.
    pub faces: Vec<(Vec<usize>, bool)>,
    pub cells: Vec<Vec<usize>>,
}

/// A regular CW complex with boundary classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CwComplex {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    cells: Vec<Cell>,
    components: Vec<BoundaryComponent>,
    vertex_edges: Vec<Vec<usize>>,
    edge_faces: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CellCounts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub cells: usize,
}

impl CwComplex {
    /// Abstract complex from cell lists; vertices carry no mesh ids.
    pub fn from_lists(
        vertices: usize,
        edges: &[[usize; 2]],
        faces: &[&[usize]],
        cells: &[&[usize]],
    ) -> Result<Self, ComplexError> {
        Self::from_parts(CwParts {
            vertex_mesh: vec![None; vertices],
            edges: edges.iter().map(|e| (*e, Vec::new())).collect(),
            faces: faces.iter().map(|f| (f.to_vec(), false)).collect(),
            cells: cells.iter().map(|c| c.to_vec()).collect(),
        })
    }

    /// Validates regularity, orients edges and faces, classifies the boundary.
    pub fn from_parts(parts: CwParts) -> Result<Self, ComplexError> {
        let nv = parts.vertex_mesh.len();
        let bad = |m: String| ComplexError::BadReference(m);
        let irregular = |m: String| ComplexError::NotRegular(m);

        let mut edges = Vec::with_capacity(parts.edges.len());
        let mut vertex_edges = vec![Vec::new(); nv];
        for (i, (ends, polyline)) in parts.edges.into_iter().enumerate() {
            if ends[0] >= nv || ends[1] >= nv {
                return Err(bad(format!("edge {i} has an endpoint out of range")));
            }
            if ends[0] == ends[1] {
                return Err(irregular(format!("edge {i} is a loop")));
            }
            let (ends, polyline) = if ends[0] < ends[1] {
                (ends, polyline)
            } else {
                ([ends[1], ends[0]], polyline.into_iter().rev().collect())
            };
            vertex_edges[ends[0]].push(i);
            vertex_edges[ends[1]].push(i);
            edges.push(Edge { ends, polyline, on_boundary: false });
        }

        let mut faces = Vec::with_capacity(parts.faces.len());
        let mut edge_faces = vec![Vec::new(); edges.len()];
        for (i, (set, tube_wall)) in parts.faces.into_iter().enumerate() {
            if let Some(&e) = set.iter().find(|&&e| e >= edges.len()) {
                return Err(bad(format!("face {i} references edge {e}")));
            }
            let cycle = face_cycle(&edges, &set)
                .map_err(|m| irregular(format!("face {i}: {m}")))?;
            for s in &cycle {
                edge_faces[s.edge].push(i);
            }
            faces.push(Face { cycle, cells: Vec::new(), on_boundary: false, tube_wall });
        }

        let mut cells = Vec::with_capacity(parts.cells.len());
        for (i, fs) in parts.cells.into_iter().enumerate() {
            if let Some(&f) = fs.iter().find(|&&f| f >= faces.len()) {
                return Err(bad(format!("cell {i} references face {f}")));
            }
            check_sphere(&fs, |f| faces[f].edges(), |e| edges[e].ends).map_err(|m| irregular(format!("cell {i}: {m}")))?;
            for &f in &fs {
                faces[f].cells.push(i);
            }
            cells.push(Cell { faces: fs });
        }

        if !cells.is_empty() {
            for (i, f) in faces.iter_mut().enumerate() {
                match f.cells.len() {
                    0 => return Err(irregular(format!("face {i} bounds no 3-cell"))),
                    1 => f.on_boundary = true,
                    2 => {}
                    n => return Err(irregular(format!("face {i} bounds {n} 3-cells"))),
                }
            }
        }
        if !faces.is_empty() {
            if let Some(e) = edge_faces.iter().position(Vec::is_empty) {
                return Err(irregular(format!("edge {e} bounds no 2-cell")));
            }
        }
        if !edges.is_empty() {
            if let Some(v) = vertex_edges.iter().position(Vec::is_empty) {
                return Err(irregular(format!("vertex {v} bounds no 1-cell")));
            }
        }

        let mut vertices: Vec<Vertex> =
            parts.vertex_mesh.into_iter().map(|mesh| Vertex { mesh, on_boundary: false }).collect();
        for f in faces.iter().filter(|f| f.on_boundary) {
            for s in &f.cycle {
                let e = &mut edges[s.edge];
                e.on_boundary = true;
                vertices[e.ends[0]].on_boundary = true;
                vertices[e.ends[1]].on_boundary = true;
            }
        }

        let mut cw = Self {
            vertices,
            edges,
            faces,
            cells,
            components: Vec::new(),
            vertex_edges,
            edge_faces,
        };
        cw.components = cw.compute_components();
        Ok(cw)
    }

    fn compute_components(&self) -> Vec<BoundaryComponent> {
        let mut uf = UnionFind::new(self.vertices.len());
        for e in self.edges.iter().filter(|e| e.on_boundary) {
            uf.union(e.ends[0], e.ends[1]);
        }
        let mut by_root: BTreeMap<usize, BoundaryComponent> = BTreeMap::new();
        let mut order = Vec::new();
        for (v, vx) in self.vertices.iter().enumerate() {
            if vx.on_boundary {
                let r = uf.find(v);
                by_root
                    .entry(r)
                    .or_insert_with(|| {
                        order.push(r);
                        BoundaryComponent { vertices: Vec::new(), edges: Vec::new(), faces: Vec::new() }
                    })
                    .vertices
                    .push(v);
            }
        }
        for (i, e) in self.edges.iter().enumerate().filter(|(_, e)| e.on_boundary) {
            by_root.get_mut(&uf.find(e.ends[0])).expect("boundary edge").edges.push(i);
        }
        for (i, f) in self.faces.iter().enumerate().filter(|(_, f)| f.on_boundary) {
            let v = self.edges[f.cycle[0].edge].ends[0];
            by_root.get_mut(&uf.find(v)).expect("boundary face").faces.push(i);
        }
        // Vertices are visited in id order, so components come out ordered by
        // their lowest vertex and N_0 holds the lowest boundary vertex.
        order.into_iter().map(|r| by_root.remove(&r).expect("component")).collect()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn boundary_components(&self) -> &[BoundaryComponent] {
        &self.components
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn edge_faces(&self, e: usize) -> &[usize] {
        &self.edge_faces[e]
    }

    pub fn counts(&self) -> CellCounts {
        CellCounts {
            vertices: self.vertices.len(),
            edges: self.edges.len(),
            faces: self.faces.len(),
            cells: self.cells.len(),
        }
    }

    /// 𝔉: 2-cells not lying in the boundary.
    pub fn interior_faces(&self) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| !self.faces[f].on_boundary).collect()
    }

    /// Index of the boundary component containing vertex `v`.
    pub fn component_of(&self, v: usize) -> Option<usize> {
        self.components.iter().position(|c| c.vertices.binary_search(&v).is_ok())
    }

    pub fn euler_characteristic(&self) -> i64 {
        let c = self.counts();
        c.vertices as i64 - c.edges as i64 + c.faces as i64 - c.cells as i64
    }

    /// χ of boundary component `i`.
    pub fn boundary_euler(&self, i: usize) -> i64 {
        let c = &self.components[i];
        c.vertices.len() as i64 - c.edges.len() as i64 + c.faces.len() as i64
    }

    /// χ of the whole boundary.
    pub fn total_boundary_euler(&self) -> i64 {
        (0..self.components.len()).map(|i| self.boundary_euler(i)).sum()
    }

    /// Vertex sequence of a face cycle, starting at its first vertex.
    pub fn face_vertices(&self, f: usize) -> Vec<usize> {
        self.faces[f]
            .cycle
            .iter()
            .map(|s| {
                let e = &self.edges[s.edge];
                if s.forward {
                    e.ends[0]
                } else {
                    e.ends[1]
                }
            })
            .collect()
    }

    /// The lists this complex can be rebuilt from with [`CwComplex::from_parts`].
    pub fn to_parts(&self) -> CwParts {
        CwParts {
            vertex_mesh: self.vertices.iter().map(|v| v.mesh).collect(),
            edges: self.edges.iter().map(|e| (e.ends, e.polyline.clone())).collect(),
            faces: self.faces.iter().map(|f| (f.edges().collect(), f.tube_wall)).collect(),
            cells: self.cells.iter().map(|c| c.faces.clone()).collect(),
        }
    }
}

/// Orders an edge set as a simple cycle: start at the lowest vertex, go to its
/// lowest neighbour first (lowest edge id on ties).
fn face_cycle(edges: &[Edge], set: &[usize]) -> Result<Vec<CycleStep>, String> {
    if set.len() < 2 {
        return Err("boundary needs at least two edges".into());
    }
    let distinct: BTreeSet<usize> = set.iter().copied().collect();
    if distinct.len() != set.len() {
        return Err("repeated edge".into());
    }
    let mut at: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &e in set {
        for v in edges[e].ends {
            at.entry(v).or_default().push(e);
        }
    }
    if let Some((v, _)) = at.iter().find(|(_, es)| es.len() != 2) {
        return Err(format!("vertex {v} is not met exactly twice"));
    }
    let (&start, first) = at.iter().next().expect("non-empty");
    let first = *first
        .iter()
        .min_by_key(|&&e| (edges[e].other(start), e))
        .expect("two edges");
    let mut cycle = Vec::with_capacity(set.len());
    let (mut v, mut e) = (start, first);
    loop {
        cycle.push(CycleStep { edge: e, forward: edges[e].ends[0] == v });
        v = edges[e].other(v);
        if v == start {
            break;
        }
        e = *at[&v].iter().find(|&&x| x != e).expect("two edges");
    }
    if cycle.len() != set.len() {
        return Err("edges form more than one cycle".into());
    }
    Ok(cycle)
}

/// Checks that a set of faces forms a 2-sphere: closed surface, connected, χ = 2.
pub(crate) fn check_sphere<I: IntoIterator<Item = usize>>(
    shell: &[usize],
    face_edges: impl Fn(usize) -> I,
    ends: impl Fn(usize) -> [usize; 2],
) -> Result<(), String> {
    if shell.is_empty() {
        return Err("empty boundary".into());
    }
    let distinct: BTreeSet<usize> = shell.iter().copied().collect();
    if distinct.len() != shell.len() {
        return Err("repeated face".into());
    }
    let mut edge_count: BTreeMap<usize, usize> = BTreeMap::new();
    for &f in shell {
        for e in face_edges(f) {
            *edge_count.entry(e).or_default() += 1;
        }
    }
    if let Some((e, n)) = edge_count.iter().find(|(_, &n)| n != 2) {
        return Err(format!("edge {e} lies in {n} boundary faces"));
    }
    let verts: BTreeSet<usize> = edge_count.keys().flat_map(|&e| ends(e)).collect();
    let chi = verts.len() as i64 - edge_count.len() as i64 + shell.len() as i64;
    if chi != 2 {
        return Err(format!("boundary has Euler characteristic {chi}"));
    }
    let index: BTreeMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut uf = UnionFind::new(verts.len());
    for &e in edge_count.keys() {
        let [a, b] = ends(e);
        uf.union(index[&a], index[&b]);
    }
    if (0..verts.len()).any(|i| uf.find(i) != uf.find(0)) {
        return Err("boundary is disconnected".into());
    }
    Ok(())
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a.max(b)] = a.min(b);
        }
    }
}

/// M_S: the mesh minus the open star of the graph, as a CW complex.
pub fn carve(mesh: &TetMesh, graph: &SingularityGraph) -> Result<CwComplex, ComplexError> {
    graph.validate_against(mesh)?;
    check_self_intersection(mesh, graph)?;
    let removed_vertices = graph.vertices();
    let kept: Vec<usize> = (0..mesh.tets().len())
        .filter(|&t| mesh.tets()[t].iter().all(|v| !removed_vertices.contains(v)))
        .collect();
    if kept.is_empty() {
        return Err(ComplexError::CarveEmpty);
    }

    let all_triangles = mesh.triangles();
    let mut tri_tets: BTreeMap<[usize; 3], Vec<usize>> = BTreeMap::new();
    let mut edge_set = BTreeSet::new();
    let mut vertex_set = BTreeSet::new();
    for &t in &kept {
        let tet = &mesh.tets()[t];
        for f in tet_faces(tet) {
            tri_tets.entry(f).or_default().push(t);
        }
        edge_set.extend(tet_edges(tet));
        vertex_set.extend(tet.iter().copied());
    }

    // Face-connectivity of the kept tets.
    let pos: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let mut uf = UnionFind::new(kept.len());
    for ts in tri_tets.values().filter(|ts| ts.len() == 2) {
        uf.union(pos[&ts[0]], pos[&ts[1]]);
    }
    let pieces: BTreeSet<usize> = (0..kept.len()).map(|i| uf.find(i)).collect();
    if pieces.len() > 1 {
        return Err(ComplexError::CarveDisconnected(pieces.len()));
    }

    // Everything outside the open star must lie in the closure of the kept tets.
    let not_in_star = |s: &[usize]| s.iter().all(|v| !removed_vertices.contains(v));
    for v in 0..mesh.vertices().len() {
        if not_in_star(&[v]) && !vertex_set.contains(&v) {
            return Err(ComplexError::CarveNotManifold { what: format!("dangling vertex {v}") });
        }
    }
    for e in mesh.edges() {
        if not_in_star(&e) && !edge_set.contains(&e) {
            return Err(ComplexError::CarveNotManifold { what: format!("dangling edge {e:?}") });
        }
    }
    for t in all_triangles.keys() {
        if not_in_star(t) && !tri_tets.contains_key(t) {
            return Err(ComplexError::CarveNotManifold { what: format!("dangling triangle {t:?}") });
        }
    }

    check_boundary_surface(&tri_tets)?;

    let vertex_ids: BTreeMap<usize, usize> =
        vertex_set.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let edge_ids: BTreeMap<[usize; 2], usize> =
        edge_set.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let tri_ids: BTreeMap<[usize; 3], usize> =
        tri_tets.keys().enumerate().map(|(i, &t)| (t, i)).collect();
    let parts = CwParts {
        vertex_mesh: vertex_set.iter().map(|&v| Some(v)).collect(),
        edges: edge_set.iter().map(|e| ([vertex_ids[&e[0]], vertex_ids[&e[1]]], e.to_vec())).collect(),
        faces: tri_tets
            .iter()
            .map(|(t, ts)| {
                let es = vec![edge_ids[&[t[0], t[1]]], edge_ids[&[t[1], t[2]]], edge_ids[&[t[0], t[2]]]];
                let tube_wall = ts.len() == 1 && all_triangles[t].len() == 2;
                (es, tube_wall)
            })
            .collect(),
        cells: kept
            .iter()
            .map(|&t| tet_faces(&mesh.tets()[t]).iter().map(|f| tri_ids[&sorted3(*f)]).collect())
            .collect(),
    };
    CwComplex::from_parts(parts)
}

/// A kept-or-removed tet may touch two graph vertices only if they are
/// consecutive on one graph edge.
fn check_self_intersection(mesh: &TetMesh, graph: &SingularityGraph) -> Result<(), ComplexError> {
    let mut adjacent: BTreeSet<[usize; 2]> = BTreeSet::new();
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, e) in graph.edges.iter().enumerate() {
        for w in e.path.windows(2) {
            adjacent.insert([w[0].min(w[1]), w[0].max(w[1])]);
        }
        for &v in &e.path {
            owner.entry(v).or_insert(i);
        }
    }
    for (t, tet) in mesh.tets().iter().enumerate() {
        let hit: Vec<usize> = tet.iter().copied().filter(|v| owner.contains_key(v)).collect();
        for (i, &a) in hit.iter().enumerate() {
            for &b in &hit[i + 1..] {
                if !adjacent.contains(&[a.min(b), a.max(b)]) {
                    return Err(ComplexError::TubeSelfIntersection { tet: t, a: owner[&a], b: owner[&b] });
                }
            }
        }
    }
    Ok(())
}

/// Boundary of the kept region must be a closed surface: each boundary edge in
/// two boundary triangles and each boundary vertex link a single cycle.
fn check_boundary_surface(tri_tets: &BTreeMap<[usize; 3], Vec<usize>>) -> Result<(), ComplexError> {
    let boundary: Vec<[usize; 3]> =
        tri_tets.iter().filter(|(_, ts)| ts.len() == 1).map(|(t, _)| *t).collect();
    let mut edge_count: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    let mut links: BTreeMap<usize, Vec<[usize; 2]>> = BTreeMap::new();
    for t in &boundary {
        for (a, b, c) in [(t[0], t[1], t[2]), (t[1], t[2], t[0]), (t[0], t[2], t[1])] {
            *edge_count.entry([a, b]).or_default() += 1;
            links.entry(c).or_default().push([a, b]);
        }
    }
    if let Some((e, n)) = edge_count.iter().find(|(_, &n)| n != 2) {
        return Err(ComplexError::CarveNotManifold {
            what: format!("boundary edge {e:?} in {n} boundary triangles"),
        });
    }
    for (v, link) in &links {
        let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
        for e in link {
            *deg.entry(e[0]).or_default() += 1;
            *deg.entry(e[1]).or_default() += 1;
        }
        let ids: BTreeMap<usize, usize> = deg.keys().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut uf = UnionFind::new(ids.len());
        for e in link {
            uf.union(ids[&e[0]], ids[&e[1]]);
        }
        let single = deg.values().all(|&d| d == 2) && (0..ids.len()).all(|i| uf.find(i) == uf.find(0));
        if !single {
            return Err(ComplexError::CarveNotManifold { what: format!("boundary vertex {v}") });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mesh::GraphEdge;

    #[test]
    fn single_tet_complex() {
        let cw = carve(&fixtures::single_tet(), &SingularityGraph::empty()).unwrap();
        assert_eq!(cw.counts(), CellCounts { vertices: 4, edges: 6, faces: 4, cells: 1 });
        assert_eq!(cw.euler_characteristic(), 1);
        assert_eq!(cw.boundary_components().len(), 1);
        assert_eq!(cw.boundary_euler(0), 2);
        assert!(cw.interior_faces().is_empty());
    }

    #[test]
    fn face_cycles_start_low_and_follow_edge_directions() {
        let cw = carve(&fixtures::five_tet_cube(), &SingularityGraph::empty()).unwrap();
        for f in 0..cw.faces().len() {
            let vs = cw.face_vertices(f);
            assert_eq!(vs[0], *vs.iter().min().unwrap());
            assert!(vs[1] < vs[2]);
            let cycle = &cw.faces()[f].cycle;
            assert_eq!(cycle.iter().map(CycleStep::sign).collect::<Vec<_>>(), vec![1, 1, -1]);
        }
        assert_eq!(cw.interior_faces().len(), 4);
    }

    #[test]
    fn ball_without_graph() {
        let cw = carve(&fixtures::ball(2), &SingularityGraph::empty()).unwrap();
        assert_eq!(cw.euler_characteristic(), 1);
        assert_eq!(cw.boundary_components().len(), 1);
        assert_eq!(cw.total_boundary_euler(), 2);
        assert!(cw.faces().iter().all(|f| !f.tube_wall));
    }

    #[test]
    fn tube_through_ball_makes_a_solid_torus() {
        let mesh = fixtures::ball(4);
        let before = carve(&mesh, &SingularityGraph::empty()).unwrap();
        let cw = carve(&mesh, &fixtures::vertical_tube(4)).unwrap();
        assert_eq!(cw.boundary_components().len(), 1);
        assert_eq!(cw.total_boundary_euler(), before.total_boundary_euler() - 2);
        assert_eq!(cw.euler_characteristic(), 0);
        assert!(cw.faces().iter().any(|f| f.tube_wall));
        // Every boundary face is original boundary or tube wall.
        let original: BTreeSet<[usize; 3]> = mesh.boundary_triangles().into_iter().collect();
        for (i, f) in cw.faces().iter().enumerate().filter(|(_, f)| f.on_boundary) {
            let mut vs: Vec<usize> =
                cw.face_vertices(i).iter().map(|&v| cw.vertices()[v].mesh.unwrap()).collect();
            vs.sort_unstable();
            assert!(f.tube_wall != original.contains(&[vs[0], vs[1], vs[2]]));
        }
    }

    #[test]
    fn euler_identity_on_fixtures() {
        let cases = [
            (fixtures::single_tet(), SingularityGraph::empty()),
            (fixtures::five_tet_cube(), SingularityGraph::empty()),
            (fixtures::ball(3), SingularityGraph::empty()),
            (fixtures::torus(), SingularityGraph::empty()),
            (fixtures::shell(), SingularityGraph::empty()),
            (fixtures::ball(4), fixtures::vertical_tube(4)),
        ];
        for (mesh, graph) in cases {
            let cw = carve(&mesh, &graph).unwrap();
            assert_eq!(cw.total_boundary_euler(), 2 * cw.euler_characteristic());
        }
    }

    #[test]
    fn shell_has_two_boundary_components() {
        let cw = carve(&fixtures::shell(), &SingularityGraph::empty()).unwrap();
        assert_eq!(cw.boundary_components().len(), 2);
        assert_eq!(cw.boundary_euler(0), 2);
        assert_eq!(cw.boundary_euler(1), 2);
        assert_eq!(cw.component_of(0), Some(0));
    }

    #[test]
    fn pinching_graph_is_rejected() {
        let mesh = fixtures::kuhn_grid([4, 1, 1], |_, _, _| true);
        let v = |i: usize, j: usize, k: usize| i + 5 * (j + 2 * k);
        let graph = SingularityGraph {
            nodes: vec![v(2, 0, 0), v(2, 1, 1)],
            edges: vec![GraphEdge { ends: [0, 1], index: None, path: vec![v(2, 0, 0), v(2, 1, 1)] }],
        };
        assert!(matches!(carve(&mesh, &graph), Err(ComplexError::CarveDisconnected(2))));
    }

    #[test]
    fn tube_touching_itself_is_rejected() {
        let n = 4;
        let b = |i, j, k| fixtures::ball_vertex(n, i, j, k);
        // A U-shaped path whose legs are one grid step apart.
        let path = vec![b(1, 2, 0), b(1, 2, 1), b(1, 2, 2), b(2, 2, 2), b(2, 2, 1), b(2, 2, 0)];
        let graph = SingularityGraph {
            nodes: vec![path[0], path[5]],
            edges: vec![GraphEdge { ends: [0, 1], index: None, path }],
        };
        assert!(matches!(
            carve(&fixtures::ball(n), &graph),
            Err(ComplexError::TubeSelfIntersection { .. })
        ));
    }

    #[test]
    fn hand_built_torus_and_ball() {
        let torus = fixtures::minimal_solid_torus();
        assert_eq!(torus.counts(), CellCounts { vertices: 4, edges: 8, faces: 6, cells: 2 });
        assert_eq!(torus.euler_characteristic(), 0);
        assert_eq!(torus.total_boundary_euler(), 0);
        assert_eq!(torus.interior_faces().len(), 2);
        let ball = fixtures::minimal_ball();
        assert_eq!(ball.counts(), CellCounts { vertices: 2, edges: 2, faces: 2, cells: 1 });
        assert_eq!(ball.euler_characteristic(), 1);
        assert_eq!(ball.total_boundary_euler(), 2);
        assert!(ball.interior_faces().is_empty());
    }

    #[test]
    fn irregular_inputs_are_rejected() {
        // A face whose edges do not close up.
        let r = CwComplex::from_lists(3, &[[0, 1], [1, 2]], &[&[0, 1]], &[]);
        assert!(matches!(r, Err(ComplexError::NotRegular(_))));
        // A "cell" bounded by a single disk.
        let r = CwComplex::from_lists(2, &[[0, 1], [0, 1]], &[&[0, 1]], &[&[0]]);
        assert!(matches!(r, Err(ComplexError::NotRegular(_))));
    }
}
