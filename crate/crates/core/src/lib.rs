//! Frame-field extension across a tetrahedral mesh with a singularity graph.
//!
//! The pipeline carves the graph's star out of the mesh, builds a CW complex
//! of the remainder, lifts boundary frame loops to the binary octahedral
//! group, and decides whether the boundary field extends by solving a system
//! of monomial equations over that group. Solutions are turned into witness
//! fields on the 2-skeleton. See [`pipeline`] for the end-to-end entry points.

pub mod complex;
pub mod error;
pub mod extend;
pub mod fixtures;
pub mod frame;
pub mod holonomy;
pub mod index;
pub mod merge;
pub mod mesh;
pub mod octa;
pub mod pipeline;
pub mod solver;
pub mod system;
mod text;
pub mod trees;

pub use complex::{carve, CellCounts, CwComplex};
pub use error::{
    ComplexError, ExtendError, GraphError, GroupError, HolonomyError, IndexError, MeshError, ParseError,
    PipelineError, SystemError, TreeError,
};
pub use extend::{SkeletonField, FieldReport};
pub use frame::{BoundaryFrames, Frame, FramePath};
pub use holonomy::{default_epsilon, loop_class, Transport};
pub use index::{loop_index, validate_graph, CrossLoop, IndexedGraph};
pub use merge::merge_cells;
pub use mesh::{SingularityGraph, TetMesh};
pub use octa::{group, GroupElement, OctaGroup};
pub use pipeline::{Options, RunReport};
pub use solver::{exhaustive_solve, solve, SolveOutcome};
pub use system::{build_system, Assignment, MonomialSystem};
pub use trees::SpanningTree;
