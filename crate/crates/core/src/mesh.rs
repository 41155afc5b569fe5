//! Tetrahedral meshes and singularity graphs, with their text formats.
//!
//! ```text
//! tetmesh v1
//! vertices N
//! x y z            (N lines)
//! tets M
//! a b c d          (M lines, 0-based vertex ids)
//! ```
//!
//! ```text
//! singgraph v1
//! nodes K
//! v                (K mesh vertex ids)
//! edges L
//! i j k : v0 v1 ... vn   (node indices, index numerator over 4 or `?`, mesh path)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{GraphError, MeshError, ParseError};
use crate::text::{parse_fixed, parse_token, LineReader};

/// A validated tetrahedral mesh: manifold (every triangle in at most two tets) and connected.
#[derive(Clone, Debug, PartialEq)]
pub struct TetMesh {
    vertices: Vec<[f64; 3]>,
    tets: Vec<[usize; 4]>,
}

pub(crate) fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
    t.sort_unstable();
    t
}

pub(crate) fn tet_faces(t: &[usize; 4]) -> [[usize; 3]; 4] {
    [
        sorted3([t[1], t[2], t[3]]),
        sorted3([t[0], t[2], t[3]]),
        sorted3([t[0], t[1], t[3]]),
        sorted3([t[0], t[1], t[2]]),
    ]
}

pub(crate) fn tet_edges(t: &[usize; 4]) -> [[usize; 2]; 6] {
    let e = |a: usize, b: usize| if a < b { [a, b] } else { [b, a] };
    [e(t[0], t[1]), e(t[0], t[2]), e(t[0], t[3]), e(t[1], t[2]), e(t[1], t[3]), e(t[2], t[3])]
}

impl TetMesh {
    pub fn new(vertices: Vec<[f64; 3]>, tets: Vec<[usize; 4]>) -> Result<Self, MeshError> {
        if tets.is_empty() {
            return Err(MeshError::Empty);
        }
        for (i, t) in tets.iter().enumerate() {
            for &v in t {
                if v >= vertices.len() {
                    return Err(MeshError::VertexOutOfRange { tet: i, vertex: v, count: vertices.len() });
                }
            }
            let distinct: BTreeSet<usize> = t.iter().copied().collect();
            if distinct.len() != 4 {
                return Err(MeshError::DegenerateTet(i));
            }
        }
        let mesh = Self { vertices, tets };
        for (tri, owners) in mesh.triangles() {
            if owners.len() > 2 {
                return Err(MeshError::NonManifold(tri, owners.len()));
            }
        }
        let comps = mesh.vertex_components();
        if comps > 1 {
            return Err(MeshError::Disconnected(comps));
        }
        Ok(mesh)
    }

    pub fn parse(text: &str) -> Result<Self, MeshError> {
        let mut r = LineReader::new("tetmesh", text);
        r.expect_header("tetmesh v1")?;
        let nv = r.expect_count("vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (n, line) = r.require_line("vertex coordinates")?;
            vertices.push(parse_fixed::<f64, 3>(&r, n, line)?);
        }
        let nt = r.expect_count("tets")?;
        let mut tets = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (n, line) = r.require_line("tet vertex ids")?;
            tets.push(parse_fixed::<usize, 4>(&r, n, line)?);
        }
        r.finish()?;
        Self::new(vertices, tets)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MeshError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("tetmesh v1\n");
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
        }
        let _ = writeln!(s, "tets {}", self.tets.len());
        for t in &self.tets {
            let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], t[3]);
        }
        s
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    /// Every triangle (sorted vertex ids) with the tets containing it.
    pub fn triangles(&self) -> BTreeMap<[usize; 3], Vec<usize>> {
        let mut map: BTreeMap<[usize; 3], Vec<usize>> = BTreeMap::new();
        for (i, t) in self.tets.iter().enumerate() {
            for f in tet_faces(t) {
                map.entry(f).or_default().push(i);
            }
        }
        map
    }

    pub fn boundary_triangles(&self) -> Vec<[usize; 3]> {
        self.triangles()
            .into_iter()
            .filter(|(_, owners)| owners.len() == 1)
            .map(|(t, _)| t)
            .collect()
    }

    pub fn boundary_vertices(&self) -> BTreeSet<usize> {
        self.boundary_triangles().into_iter().flatten().collect()
    }

    pub fn edges(&self) -> BTreeSet<[usize; 2]> {
        self.tets.iter().flat_map(tet_edges).collect()
    }

    /// Number of connected components among vertices used by tets.
    fn vertex_components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for t in &self.tets {
            for k in 1..4 {
                let (a, b) = (find(&mut parent, t[0]), find(&mut parent, t[k]));
                parent[a] = b;
            }
        }
        let used: BTreeSet<usize> = self.tets.iter().flatten().copied().collect();
        let roots: BTreeSet<usize> = used.into_iter().map(|v| find(&mut parent, v)).collect();
        roots.len()
    }
}

/// One edge of a singularity graph: a simple path of mesh edges between two nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    /// Node indices (into [`SingularityGraph::nodes`]).
    pub ends: [usize; 2],
    /// Edge index as a numerator over 4, if known.
    pub index: Option<i64>,
    /// Mesh vertices from `nodes[ends[0]]` to `nodes[ends[1]]`.
    pub path: Vec<usize>,
}

/// An embedded graph in the mesh 1-skeleton along which frames are undefined.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SingularityGraph {
    /// Mesh vertex id of each node.
    pub nodes: Vec<usize>,
    pub edges: Vec<GraphEdge>,
}

impl SingularityGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut r = LineReader::new("singgraph", text);
        r.expect_header("singgraph v1")?;
        let k = r.expect_count("nodes")?;
        let mut nodes = Vec::with_capacity(k);
        while nodes.len() < k {
            let (n, line) = r.require_line("node vertex ids")?;
            for tok in line.split_whitespace() {
                nodes.push(parse_token::<usize>(&r, n, tok)?);
            }
            if nodes.len() > k {
                return Err(r.error(n, format!("more than {k} node ids")).into());
            }
        }
        let l = r.expect_count("edges")?;
        let mut edges = Vec::with_capacity(l);
        for _ in 0..l {
            let (n, line) = r.require_line("graph edge")?;
            let (head, tail) = line
                .split_once(':')
                .ok_or_else(|| r.error(n, "expected `i j k : v0 v1 ...`"))?;
            let head: Vec<&str> = head.split_whitespace().collect();
            if head.len() != 3 {
                return Err(r.error(n, "expected `node_i node_j index` before `:`").into());
            }
            let a = parse_token::<usize>(&r, n, head[0])?;
            let b = parse_token::<usize>(&r, n, head[1])?;
            let index = match head[2] {
                "?" => None,
                tok => Some(parse_token::<i64>(&r, n, tok)?),
            };
            let path = tail
                .split_whitespace()
                .map(|t| parse_token::<usize>(&r, n, t))
                .collect::<Result<Vec<_>, ParseError>>()?;
            edges.push(GraphEdge { ends: [a, b], index, path });
        }
        r.finish()?;
        let g = Self { nodes, edges };
        g.validate_structure()?;
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("singgraph v1\n");
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        for v in &self.nodes {
            let _ = writeln!(s, "{v}");
        }
        let _ = writeln!(s, "edges {}", self.edges.len());
        for e in &self.edges {
            let idx = e.index.map_or_else(|| "?".to_string(), |k| k.to_string());
            let path: Vec<String> = e.path.iter().map(usize::to_string).collect();
            let _ = writeln!(s, "{} {} {} : {}", e.ends[0], e.ends[1], idx, path.join(" "));
        }
        s
    }

    /// Number of edge ends at each node.
    pub fn node_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for e in &self.edges {
            deg[e.ends[0]] += 1;
            deg[e.ends[1]] += 1;
        }
        deg
    }

    /// All mesh vertices touched by the graph.
    pub fn vertices(&self) -> BTreeSet<usize> {
        self.nodes.iter().chain(self.edges.iter().flat_map(|e| e.path.iter())).copied().collect()
    }

    /// Checks that do not need the mesh: paths match their nodes, edges are
    /// vertex-disjoint away from shared nodes, and no node is isolated.
    pub fn validate_structure(&self) -> Result<(), GraphError> {
        let node_set: BTreeSet<usize> = self.nodes.iter().copied().collect();
        if node_set.len() != self.nodes.len() {
            return Err(GraphError::BadEdge { edge: usize::MAX, message: "duplicate node".into() });
        }
        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            let bad = |m: &str| GraphError::BadEdge { edge: i, message: m.to_string() };
            if e.ends[0] >= self.nodes.len() || e.ends[1] >= self.nodes.len() {
                return Err(bad("node index out of range"));
            }
            if e.ends[0] == e.ends[1] {
                return Err(bad("edge joins a node to itself"));
            }
            if e.path.len() < 2 {
                return Err(bad("path needs at least two vertices"));
            }
            if e.path[0] != self.nodes[e.ends[0]] || *e.path.last().unwrap() != self.nodes[e.ends[1]] {
                return Err(bad("path endpoints do not match its nodes"));
            }
            let distinct: BTreeSet<usize> = e.path.iter().copied().collect();
            if distinct.len() != e.path.len() {
                return Err(bad("path is not simple"));
            }
            for &v in &e.path[1..e.path.len() - 1] {
                if node_set.contains(&v) {
                    return Err(bad("path passes through another node"));
                }
                if let Some(&other) = owner.get(&v) {
                    return Err(GraphError::NotDisjoint(other, i, v));
                }
                owner.insert(v, i);
            }
        }
        for (n, d) in self.node_degrees().into_iter().enumerate() {
            if d == 0 {
                return Err(GraphError::IsolatedNode(self.nodes[n]));
            }
        }
        Ok(())
    }

    /// Checks against the mesh: paths follow mesh edges, leaves lie on the
    /// boundary and every other graph vertex lies in the interior.
    pub fn validate_against(&self, mesh: &TetMesh) -> Result<(), GraphError> {
        self.validate_structure()?;
        let edges = mesh.edges();
        let boundary = mesh.boundary_vertices();
        for &v in &self.nodes {
            if v >= mesh.vertices().len() {
                return Err(GraphError::NodeOutOfRange(v));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            for w in e.path.windows(2) {
                let key = if w[0] < w[1] { [w[0], w[1]] } else { [w[1], w[0]] };
                if !edges.contains(&key) {
                    return Err(GraphError::BadEdge {
                        edge: i,
                        message: format!("{} - {} is not a mesh edge", w[0], w[1]),
                    });
                }
            }
            for &v in &e.path[1..e.path.len() - 1] {
                if boundary.contains(&v) {
                    return Err(GraphError::InteriorOnBoundary(v));
                }
            }
        }
        for (n, d) in self.node_degrees().into_iter().enumerate() {
            let v = self.nodes[n];
            match (d == 1, boundary.contains(&v)) {
                (true, false) => return Err(GraphError::LeafInInterior(v)),
                (false, true) => return Err(GraphError::InteriorOnBoundary(v)),
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn single_tet_counts() {
        let m = TetMesh::parse("tetmesh v1\nvertices 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\ntets 1\n0 1 2 3\n")
            .unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.tets().len(), 1);
        assert_eq!(m.boundary_triangles().len(), 4);
    }

    #[test]
    fn five_tet_cube_counts() {
        let m = fixtures::five_tet_cube();
        assert_eq!(m.vertices().len(), 8);
        assert_eq!(m.tets().len(), 5);
        // Each of the six cube faces is split into two triangles.
        assert_eq!(m.boundary_triangles().len(), 12);
        let again = TetMesh::parse(&m.to_text()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn triangle_in_three_tets_is_rejected() {
        let text = "tetmesh v1\nvertices 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 0 -1\n1 1 1\n\
                    tets 3\n0 1 2 3\n0 1 2 4\n0 1 2 5\n";
        match TetMesh::parse(text) {
            Err(MeshError::NonManifold(tri, 3)) => assert_eq!(tri, [0, 1, 2]),
            other => panic!("expected non-manifold error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "tetmesh v1\nvertices 1\n0 0 zero\ntets 0\n";
        match TetMesh::parse(text) {
            Err(MeshError::Parse(e)) => assert_eq!(e.line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let text = "tetmesh v1\nvertices 8\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n5 5 5\n6 5 5\n5 6 5\n5 5 6\n\
                    tets 2\n0 1 2 3\n4 5 6 7\n";
        assert!(matches!(TetMesh::parse(text), Err(MeshError::Disconnected(2))));
    }

    #[test]
    fn graph_round_trip_and_validation() {
        let mesh = fixtures::ball(4);
        let g = fixtures::vertical_tube(4);
        g.validate_against(&mesh).unwrap();
        let again = SingularityGraph::parse(&g.to_text()).unwrap();
        assert_eq!(again, g);

        let mut bad = g.clone();
        bad.edges[0].path.swap(1, 2);
        assert!(bad.validate_against(&mesh).is_err());
    }
}
