use thiserror::Error;

use crate::octa::ExactQuat;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("product {0} * {1} left the (p + q√2)/4 ring")]
    LeftRing(ExactQuat, ExactQuat),
    #[error("closure of the generators has {0} elements, expected 48")]
    ClosureSize(usize),
    #[error("element {0} does not have unit norm")]
    NotUnit(ExactQuat),
    #[error("product {0} * {1} is not a group member")]
    NotClosed(ExactQuat, ExactQuat),
    #[error("element {0} has no inverse in the table")]
    NoInverse(ExactQuat),
    #[error("element {0} does not map to a signed permutation matrix")]
    NotSignedPermutation(ExactQuat),
    #[error("double cover image has {0} rotations, expected 24")]
    RotationCount(usize),
}

/// Errors reading any of the line-oriented text formats.
#[derive(Debug, Error)]
#[error("{format}: line {line}: {message}")]
pub struct ParseError {
    pub format: &'static str,
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(format: &'static str, line: usize, message: impl Into<String>) -> Self {
        Self { format, line, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("tet {tet} references vertex {vertex}, but the mesh has {count} vertices")]
    VertexOutOfRange { tet: usize, vertex: usize, count: usize },
    #[error("tet {0} has repeated vertices")]
    DegenerateTet(usize),
    #[error("triangle {0:?} is shared by {1} tets")]
    NonManifold([usize; 3], usize),
    #[error("mesh is not connected ({0} components)")]
    Disconnected(usize),
    #[error("mesh has no tets")]
    Empty,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("graph node {0} is not a mesh vertex")]
    NodeOutOfRange(usize),
    #[error("graph edge {edge}: {message}")]
    BadEdge { edge: usize, message: String },
    #[error("graph edges {0} and {1} share vertex {2} which is not a common node")]
    NotDisjoint(usize, usize, usize),
    #[error("graph node {0} is isolated")]
    IsolatedNode(usize),
    #[error("leaf node at vertex {0} is not on the mesh boundary")]
    LeafInInterior(usize),
    #[error("vertex {0} of the graph lies on the mesh boundary but is not a leaf node")]
    InteriorOnBoundary(usize),
    #[error("graph edge {0} has no index")]
    MissingIndex(usize),
}

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("carving leaves {0} disconnected pieces")]
    CarveDisconnected(usize),
    #[error("tube around the graph touches itself: tet {tet} meets graph edges {a} and {b}")]
    TubeSelfIntersection { tet: usize, a: usize, b: usize },
    #[error("carved region is not a manifold near {what}")]
    CarveNotManifold { what: String },
    #[error("nothing remains after carving")]
    CarveEmpty,
    #[error("cell complex is not regular: {0}")]
    NotRegular(String),
    #[error("cell reference out of range: {0}")]
    BadReference(String),
}

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("1-skeleton is disconnected: vertex {0} unreachable")]
    Disconnected(usize),
    #[error("edge {0} is a tree edge")]
    EdgeInTree(usize),
    #[error("edge {0} is not a boundary non-tree edge")]
    NotBoundaryEdge(usize),
    #[error("spanning tree property violated: {0}")]
    Property(String),
}

#[derive(Debug, Error)]
pub enum HolonomyError {
    #[error("quaternion norm {0} is not within 1e-6 of one")]
    NotUnit(f64),
    #[error("sample {index}: no coset representative within epsilon (closest {distance:.3e})")]
    Density { index: usize, distance: f64 },
    #[error("start quaternion does not represent the first frame of the path")]
    StartMismatch,
    #[error("path is empty")]
    EmptyPath,
    #[error("loop is not closed")]
    OpenLoop,
    #[error("lifted loop endpoint is {distance:.3e} from the nearest group element")]
    SnapFailed { distance: f64 },
    #[error("frames at vertices {from} and {to} are ambiguous: two representatives are equally near")]
    Ambiguous { from: usize, to: usize },
    #[error("no frame for vertex {0}")]
    MissingFrame(usize),
    #[error("edge {edge}: {source}")]
    OnEdge { edge: usize, source: Box<HolonomyError> },
    #[error("transport path for component {0}: {1}")]
    Transport(usize, String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("no constraint class for boundary non-tree edge {0}")]
    MissingZeta(usize),
    #[error("{0} unknowns exceed the exhaustive-search limit of 4")]
    TooManyUnknowns(usize),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Error)]
pub enum ExtendError {
    #[error("assignment has no value for {0}")]
    MissingVariable(String),
    #[error("face {face}: boundary loop lifts open (class {class})")]
    FillOpen { face: usize, class: crate::octa::GroupElement },
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("sample {0}: consecutive angles differ by a quarter turn or more")]
    Density(usize),
    #[error("winding {0} is not a multiple of 1/4")]
    NotQuarter(f64),
    #[error("sample {0}: no frame axis is aligned with the tangent")]
    Misaligned(usize),
    #[error("loop has fewer than two samples")]
    TooShort,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A pipeline failure, attributed to the stage that raised it.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("carve: {0}")]
    Complex(#[from] ComplexError),
    #[error("tree: {0}")]
    Tree(#[from] TreeError),
    #[error("holonomy: {0}")]
    Holonomy(#[from] HolonomyError),
    #[error("system: {0}")]
    System(#[from] SystemError),
    #[error("extend: {0}")]
    Extend(#[from] ExtendError),
}
