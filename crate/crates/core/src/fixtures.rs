//! Deterministic test meshes, graphs and boundary frame fields.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Unit, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};

use crate::complex::CwComplex;
use crate::frame::{BoundaryFrames, Frame};
use crate::mesh::{GraphEdge, SingularityGraph, TetMesh};

/// Structured grid of unit cubes, each split into six tets around its main
/// diagonal (consistent across neighbours). Unused vertices are dropped.
pub fn kuhn_grid(n: [usize; 3], keep: impl Fn(usize, usize, usize) -> bool) -> TetMesh {
    let id = |i: usize, j: usize, k: usize| i + (n[0] + 1) * (j + (n[1] + 1) * k);
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::new();
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                if !keep(i, j, k) {
                    continue;
                }
                for p in perms {
                    let mut c = [i, j, k];
                    let mut tet = [id(c[0], c[1], c[2]); 4];
                    c[p[0]] += 1;
                    tet[1] = id(c[0], c[1], c[2]);
                    c[p[1]] += 1;
                    tet[2] = id(c[0], c[1], c[2]);
                    c[p[2]] += 1;
                    tet[3] = id(c[0], c[1], c[2]);
                    tets.push(tet);
                }
            }
        }
    }
    let total = (n[0] + 1) * (n[1] + 1) * (n[2] + 1);
    let mut used = vec![false; total];
    for t in &tets {
        for &v in t {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; total];
    let mut vertices = Vec::new();
    for k in 0..=n[2] {
        for j in 0..=n[1] {
            for i in 0..=n[0] {
                let v = id(i, j, k);
                if used[v] {
                    remap[v] = vertices.len();
                    vertices.push([i as f64, j as f64, k as f64]);
                }
            }
        }
    }
    for t in &mut tets {
        for v in t.iter_mut() {
            *v = remap[*v];
        }
    }
    TetMesh::new(vertices, tets).expect("grid meshes are manifold and connected")
}

/// A solid cube of `n³` grid cells: a ball.
pub fn ball(n: usize) -> TetMesh {
    kuhn_grid([n, n, n], |_, _, _| true)
}

/// Mesh vertex id of grid point `(i, j, k)` in [`ball`]`(n)`.
pub fn ball_vertex(n: usize, i: usize, j: usize, k: usize) -> usize {
    i + (n + 1) * (j + (n + 1) * k)
}

/// A square ring of cubes: `outer × outer` minus a centred `hole × hole`, `height` layers.
/// Topologically a solid torus.
pub fn ring(outer: usize, hole: usize, height: usize) -> TetMesh {
    let lo = (outer - hole) / 2;
    let hi = lo + hole;
    kuhn_grid([outer, outer, height], |i, j, _| !(lo..hi).contains(&i) || !(lo..hi).contains(&j))
}

/// The default solid-torus fixture.
pub fn torus() -> TetMesh {
    ring(6, 2, 2)
}

/// A cube split into five tets: one central and four corners.
pub fn five_tet_cube() -> TetMesh {
    let vertices = (0..8)
        .map(|v| [(v & 1) as f64, ((v >> 1) & 1) as f64, ((v >> 2) & 1) as f64])
        .collect();
    let tets = vec![[0, 3, 5, 6], [1, 0, 3, 5], [2, 0, 3, 6], [4, 0, 5, 6], [7, 3, 5, 6]];
    TetMesh::new(vertices, tets).expect("five-tet cube is valid")
}

pub fn single_tet() -> TetMesh {
    TetMesh::new(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        vec![[0, 1, 2, 3]],
    )
    .expect("single tet is valid")
}

/// A straight graph edge through the middle of [`ball`]`(n)`, bottom face to top face.
pub fn vertical_tube(n: usize) -> SingularityGraph {
    let c = n / 2;
    let path: Vec<usize> = (0..=n).map(|k| ball_vertex(n, c, c, k)).collect();
    SingularityGraph {
        nodes: vec![path[0], path[n]],
        edges: vec![GraphEdge { ends: [0, 1], index: None, path }],
    }
}

/// The same frame at every boundary vertex.
pub fn constant_frames(mesh: &TetMesh, frame: Frame) -> BoundaryFrames {
    mesh.vertices().iter().enumerate().map(|(v, _)| (v, frame)).collect()
}

/// One random frame, used everywhere.
pub fn random_constant_frames(mesh: &TetMesh, seed: u64) -> BoundaryFrames {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let q = UnitQuaternion::from_euler_angles(
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
    );
    constant_frames(mesh, Frame::from_unit(q))
}

/// Frames on any mesh given as a function of position.
pub fn frames_from(mesh: &TetMesh, f: impl Fn([f64; 3]) -> UnitQuaternion<f64>) -> BoundaryFrames {
    mesh.vertices().iter().enumerate().map(|(v, p)| (v, Frame::from_unit(f(*p)))).collect()
}

/// Frames on [`ring`]`(outer, hole, height)` that rotate `turns` full turns about a
/// generic fixed axis while going once around the ring's cross-section (its meridian).
pub fn ring_meridian_twist(
    mesh: &TetMesh,
    outer: usize,
    hole: usize,
    height: usize,
    turns: f64,
) -> BoundaryFrames {
    let centre = outer as f64 / 2.0;
    // L∞ radius of the core loop, halfway between the hole and the outer wall.
    let core = (hole as f64 + outer as f64) / 4.0;
    let mid = height as f64 / 2.0;
    let axis = Unit::new_normalize(Vector3::new(0.3, 0.5, 0.81));
    frames_from(mesh, |p| {
        let radial = (p[0] - centre).abs().max((p[1] - centre).abs());
        let psi = (p[2] - mid).atan2(radial - core);
        UnitQuaternion::from_axis_angle(&axis, turns * psi)
    })
}

/// Frames around a vertical axis through `(cx, cy)` rotating by `quarter_turns · π/2`
/// about z per revolution. Defined away from the axis.
pub fn axial_winding(mesh: &TetMesh, cx: f64, cy: f64, quarter_turns: i32) -> BoundaryFrames {
    let mut out = BTreeMap::new();
    for (v, p) in mesh.vertices().iter().enumerate() {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        if dx.abs() < 1e-12 && dy.abs() < 1e-12 {
            continue;
        }
        let phi = dy.atan2(dx);
        let angle = f64::from(quarter_turns) * phi / 4.0;
        out.insert(v, Frame::from_unit(UnitQuaternion::from_axis_angle(&Vector3::z_axis(), angle)));
    }
    out
}

/// A 3×3×3 block with the centre cube removed: two boundary spheres.
pub fn shell() -> TetMesh {
    kuhn_grid([3, 3, 3], |i, j, k| (i, j, k) != (1, 1, 1))
}

/// A complete input set: mesh, singularity graph and boundary frames.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub mesh: TetMesh,
    pub graph: SingularityGraph,
    pub frames: BoundaryFrames,
    /// Whether the extension problem has a solution.
    pub solvable: bool,
}

pub const FIXTURE_NAMES: [&str; 6] = ["ball", "torus", "torus-twisted", "tube", "five-tet-cube", "shell"];

/// The named fixture; `seed` picks the constant frame where one is used.
///
/// - `ball`: 3×3×3 cube, constant frames.
/// - `torus`: [`torus`], constant frames.
/// - `torus-twisted`: [`torus`] with one full meridian twist; unsolvable.
/// - `tube`: 4×4×4 cube carved along [`vertical_tube`], frames winding a
///   quarter turn around the tube, which carries index 1/4.
/// - `five-tet-cube`, `shell`: constant frames.
pub fn named(name: &str, seed: u64) -> Option<Fixture> {
    let plain = |name, mesh: TetMesh| {
        let frames = random_constant_frames(&mesh, seed);
        Fixture { name, mesh, graph: SingularityGraph::empty(), frames, solvable: true }
    };
    Some(match name {
        "ball" => plain("ball", ball(3)),
        "torus" => plain("torus", torus()),
        "torus-twisted" => {
            let mesh = torus();
            let frames = ring_meridian_twist(&mesh, 6, 2, 2, 1.0);
            Fixture { name: "torus-twisted", mesh, graph: SingularityGraph::empty(), frames, solvable: false }
        }
        "tube" => {
            let mesh = ball(4);
            let mut graph = vertical_tube(4);
            graph.edges[0].index = Some(1);
            let frames = axial_winding(&mesh, 2.0, 2.0, 1);
            Fixture { name: "tube", mesh, graph, frames, solvable: true }
        }
        "five-tet-cube" => plain("five-tet-cube", five_tet_cube()),
        "shell" => plain("shell", shell()),
        _ => return None,
    })
}

/// The minimal regular ball: 2 vertices, 2 edges, 2 hemispheres, 1 cell.
pub fn minimal_ball() -> CwComplex {
    CwComplex::from_lists(2, &[[0, 1], [0, 1]], &[&[0, 1], &[0, 1]], &[&[0, 1]])
        .expect("minimal ball is regular")
}

/// The solid torus cut by two meridian disks: 4, 8, 6 and 2 cells.
/// Faces 0 and 1 are the disks; vertices 0, 1 bound the first and 2, 3 the second.
pub fn minimal_solid_torus() -> CwComplex {
    let edges = [[0, 1], [0, 1], [2, 3], [2, 3], [0, 2], [1, 3], [0, 2], [1, 3]];
    let faces: [&[usize]; 6] =
        [&[0, 1], &[2, 3], &[0, 5, 2, 4], &[1, 5, 3, 4], &[2, 7, 0, 6], &[3, 7, 1, 6]];
    CwComplex::from_lists(4, &edges, &faces, &[&[0, 1, 2, 3], &[0, 1, 4, 5]])
        .expect("minimal solid torus is regular")
}
