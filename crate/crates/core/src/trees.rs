//! Spanning trees of the 1-skeleton that restrict to spanning trees of every
//! boundary component, with simple paths and the circuits ω(e), φ(e).

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use crate::complex::{CwComplex, CycleStep};
use crate::error::TreeError;

/// A walk along directed edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgePath {
    pub start: usize,
    pub end: usize,
    pub steps: Vec<CycleStep>,
}

impl EdgePath {
    pub fn empty(v: usize) -> Self {
        Self { start: v, end: v, steps: Vec::new() }
    }

    /// The directed edge `e⃗` (or its reverse).
    pub fn edge(cw: &CwComplex, edge: usize, forward: bool) -> Self {
        let [a, b] = cw.edges()[edge].ends;
        let (start, end) = if forward { (a, b) } else { (b, a) };
        Self { start, end, steps: vec![CycleStep { edge, forward }] }
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn reversed(&self) -> Self {
        Self {
            start: self.end,
            end: self.start,
            steps: self.steps.iter().rev().map(|s| CycleStep { edge: s.edge, forward: !s.forward }).collect(),
        }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &EdgePath) -> Self {
        assert_eq!(self.end, other.start, "paths do not meet");
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Self { start: self.start, end: other.end, steps }
    }

    /// Visited vertices, including both ends.
    pub fn vertices(&self, cw: &CwComplex) -> Vec<usize> {
        let mut out = vec![self.start];
        let mut v = self.start;
        for s in &self.steps {
            v = cw.edges()[s.edge].other(v);
            out.push(v);
        }
        out
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.edge)
    }
}

/// Spanning tree 𝒯 with per-component subtrees 𝒰_i, basepoints b_i and the
/// adjoin order of the components.
#[derive(Clone, Debug)]
pub struct SpanningTree {
    in_tree: Vec<bool>,
    /// Towards the root b_0: (parent vertex, edge).
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    root: usize,
    basepoints: Vec<usize>,
    order: Vec<usize>,
    adjoin_edge: Vec<Option<usize>>,
    subtrees: Vec<Vec<usize>>,
    edge_component: Vec<Option<usize>>,
}

impl SpanningTree {
    /// Grows the tree from b_0 (lowest vertex of N_0), lowest edge id first;
    /// the first time a boundary component is reached its breadth-first
    /// subtree is spliced in whole.
    pub fn build(cw: &CwComplex) -> Result<Self, TreeError> {
        let nv = cw.vertices().len();
        let comps = cw.boundary_components();
        let mut vertex_component = vec![None; nv];
        for (i, c) in comps.iter().enumerate() {
            for &v in &c.vertices {
                vertex_component[v] = Some(i);
            }
        }
        let mut edge_component = vec![None; cw.edges().len()];
        for (i, c) in comps.iter().enumerate() {
            for &e in &c.edges {
                edge_component[e] = Some(i);
            }
        }
        let root = comps.first().map_or(0, |c| c.vertices[0]);
        let mut tree = Self {
            in_tree: vec![false; cw.edges().len()],
            parent: vec![None; nv],
            depth: vec![0; nv],
            root,
            basepoints: vec![usize::MAX; comps.len()],
            order: Vec::new(),
            adjoin_edge: vec![None; comps.len()],
            subtrees: vec![Vec::new(); comps.len()],
            edge_component,
        };
        if nv == 0 {
            return Ok(tree);
        }
        let mut visited = vec![false; nv];
        let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();

        let enter = |tree: &mut Self, visited: &mut Vec<bool>, heap: &mut BinaryHeap<Reverse<usize>>, v: usize| {
            let mut newly = vec![v];
            visited[v] = true;
            if let Some(j) = vertex_component[v] {
                tree.basepoints[j] = v;
                tree.order.push(j);
                // Breadth-first subtree of H_j from b_j, lower edge ids first.
                let mut queue = VecDeque::from([v]);
                while let Some(x) = queue.pop_front() {
                    let mut es: Vec<usize> =
                        cw.vertex_edges(x).iter().copied().filter(|&e| tree.edge_component[e] == Some(j)).collect();
                    es.sort_unstable();
                    for e in es {
                        let y = cw.edges()[e].other(x);
                        if !visited[y] {
                            visited[y] = true;
                            tree.attach(y, x, e);
                            tree.subtrees[j].push(e);
                            newly.push(y);
                            queue.push_back(y);
                        }
                    }
                }
            }
            for x in newly {
                for &e in cw.vertex_edges(x) {
                    heap.push(Reverse(e));
                }
            }
        };

        enter(&mut tree, &mut visited, &mut heap, root);
        while let Some(Reverse(e)) = heap.pop() {
            let [a, b] = cw.edges()[e].ends;
            let (from, to) = match (visited[a], visited[b]) {
                (true, false) => (a, b),
                (false, true) => (b, a),
                _ => continue,
            };
            tree.attach(to, from, e);
            if let Some(j) = vertex_component[to] {
                tree.adjoin_edge[j] = Some(e);
            }
            enter(&mut tree, &mut visited, &mut heap, to);
        }
        if let Some(v) = visited.iter().position(|&x| !x) {
            return Err(TreeError::Disconnected(v));
        }
        for s in &mut tree.subtrees {
            s.sort_unstable();
        }
        Ok(tree)
    }

    fn attach(&mut self, child: usize, parent: usize, edge: usize) {
        self.in_tree[edge] = true;
        self.parent[child] = Some((parent, edge));
        self.depth[child] = self.depth[parent] + 1;
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// b_i for boundary component i.
    pub fn basepoint(&self, i: usize) -> usize {
        self.basepoints[i]
    }

    pub fn basepoints(&self) -> &[usize] {
        &self.basepoints
    }

    /// Component indices in the order they were adjoined (starts with 0).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// d_i: the edge that adjoined component i (none for N_0).
    pub fn adjoin_edge(&self, i: usize) -> Option<usize> {
        self.adjoin_edge[i]
    }

    /// 𝒰_i.
    pub fn subtree(&self, i: usize) -> &[usize] {
        &self.subtrees[i]
    }

    pub fn contains(&self, e: usize) -> bool {
        self.in_tree[e]
    }

    pub fn tree_edges(&self) -> Vec<usize> {
        (0..self.in_tree.len()).filter(|&e| self.in_tree[e]).collect()
    }

    /// 𝒜: non-tree edges.
    pub fn non_tree_edges(&self) -> Vec<usize> {
        (0..self.in_tree.len()).filter(|&e| !self.in_tree[e]).collect()
    }

    /// ∂𝒜: non-tree boundary edges.
    pub fn boundary_non_tree_edges(&self) -> Vec<usize> {
        self.non_tree_edges().into_iter().filter(|&e| self.edge_component[e].is_some()).collect()
    }

    /// 𝒜 − ∂𝒜: non-tree interior edges.
    pub fn interior_non_tree_edges(&self) -> Vec<usize> {
        self.non_tree_edges().into_iter().filter(|&e| self.edge_component[e].is_none()).collect()
    }

    /// 𝒱_i.
    pub fn component_non_tree_edges(&self, i: usize) -> Vec<usize> {
        self.non_tree_edges().into_iter().filter(|&e| self.edge_component[e] == Some(i)).collect()
    }

    /// Boundary component containing edge `e`, if it is a boundary edge.
    pub fn edge_component(&self, e: usize) -> Option<usize> {
        self.edge_component[e]
    }

    /// Parent of `v` towards the root, with the connecting edge.
    pub fn parent(&self, v: usize) -> Option<(usize, usize)> {
        self.parent[v]
    }

    /// The unique simple path p_{v,w} in the tree.
    pub fn path(&self, cw: &CwComplex, v: usize, w: usize) -> EdgePath {
        let (mut a, mut b) = (v, w);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while self.depth[a] > self.depth[b] {
            let (p, e) = self.parent[a].expect("non-root");
            up.push(CycleStep { edge: e, forward: cw.edges()[e].ends[0] == a });
            a = p;
        }
        while self.depth[b] > self.depth[a] {
            let (p, e) = self.parent[b].expect("non-root");
            down.push(CycleStep { edge: e, forward: cw.edges()[e].ends[0] == p });
            b = p;
        }
        while a != b {
            let (pa, ea) = self.parent[a].expect("non-root");
            up.push(CycleStep { edge: ea, forward: cw.edges()[ea].ends[0] == a });
            a = pa;
            let (pb, eb) = self.parent[b].expect("non-root");
            down.push(CycleStep { edge: eb, forward: cw.edges()[eb].ends[0] == pb });
            b = pb;
        }
        up.extend(down.into_iter().rev());
        EdgePath { start: v, end: w, steps: up }
    }

    /// p_{v,b_0}.
    pub fn path_to_root(&self, cw: &CwComplex, v: usize) -> EdgePath {
        self.path(cw, v, self.root)
    }

    /// ω(e) = p_{b_0,v} · e⃗ · p_{w,b_0}.
    pub fn omega(&self, cw: &CwComplex, e: usize) -> Result<EdgePath, TreeError> {
        if self.in_tree[e] {
            return Err(TreeError::EdgeInTree(e));
        }
        let [v, w] = cw.edges()[e].ends;
        Ok(self.path(cw, self.root, v).then(&EdgePath::edge(cw, e, true)).then(&self.path(cw, w, self.root)))
    }

    /// φ(e) = p_{b_i,v} · e⃗ · p_{w,b_i} for e ∈ 𝒱_i.
    pub fn phi(&self, cw: &CwComplex, e: usize) -> Result<EdgePath, TreeError> {
        if self.in_tree[e] {
            return Err(TreeError::EdgeInTree(e));
        }
        let i = self.edge_component[e].ok_or(TreeError::NotBoundaryEdge(e))?;
        let b = self.basepoints[i];
        let [v, w] = cw.edges()[e].ends;
        Ok(self.path(cw, b, v).then(&EdgePath::edge(cw, e, true)).then(&self.path(cw, w, b)))
    }

    /// Checks the spanning and subtree properties and conditions (i)–(iv) of
    /// the component ordering.
    pub fn verify(&self, cw: &CwComplex) -> Result<(), TreeError> {
        let fail = |m: String| Err(TreeError::Property(m));
        let nv = cw.vertices().len();
        if nv > 0 && self.tree_edges().len() != nv - 1 {
            return fail(format!("tree has {} edges for {nv} vertices", self.tree_edges().len()));
        }
        for v in 0..nv {
            if v != self.root && self.parent[v].is_none() {
                return fail(format!("vertex {v} is not attached"));
            }
        }
        let comps = cw.boundary_components();
        let position: Vec<usize> = {
            let mut p = vec![usize::MAX; comps.len()];
            for (k, &j) in self.order.iter().enumerate() {
                p[j] = k;
            }
            p
        };
        if position.contains(&usize::MAX) || self.order.first().is_some_and(|&j| j != 0) {
            return fail("component order is not a permutation starting at N_0".into());
        }
        for (j, c) in comps.iter().enumerate() {
            let u: BTreeSet<usize> = self.subtrees[j].iter().copied().collect();
            if u.len() + 1 != c.vertices.len() || u.iter().any(|&e| !self.in_tree[e]) {
                return fail(format!("subtree of component {j} does not span it"));
            }
            if u.iter().any(|&e| self.edge_component[e] != Some(j)) {
                return fail(format!("subtree of component {j} leaves it"));
            }
            let b = self.basepoints[j];
            let to_root = self.path_to_root(cw, b);
            let members: BTreeSet<usize> = c.vertices.iter().copied().collect();
            let on_path = to_root.vertices(cw);
            if on_path[1..].iter().any(|v| members.contains(v))
                || to_root.edge_ids().any(|e| self.edge_component[e] == Some(j))
            {
                return fail(format!("(iv) fails for component {j}"));
            }
            for &x in &c.vertices {
                let p = self.path_to_root(cw, x);
                for v in p.vertices(cw) {
                    if let Some(k) = comps.iter().position(|ck| ck.vertices.binary_search(&v).is_ok()) {
                        if position[k] > position[j] {
                            return fail(format!("(i) fails at vertex {x}"));
                        }
                    }
                }
                let local = self.path(cw, x, b);
                if local.then(&to_root) != p {
                    return fail(format!("(ii) fails at vertex {x}"));
                }
                if local.edge_ids().any(|e| !u.contains(&e)) {
                    return fail(format!("(iii) fails at vertex {x}"));
                }
            }
        }
        Ok(())
    }
}
