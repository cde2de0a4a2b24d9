//! Graph partitioning with the lifted multicut objective.
//!
//! A multicut partitions a weighted graph by cutting edges so that the total
//! weight of cut edges is minimal, subject to consistency constraints that
//! forbid dangling cuts. The lifted multicut adds long-range *lifted* edges
//! that contribute energy without inducing connectivity, which makes it
//! possible to encode domain knowledge ("these two regions must / must not
//! end up in the same object") as sparse signed edges between arbitrary node
//! pairs.
//!
//! The crate provides:
//!
//! - [`graph`]: an immutable undirected graph with contraction and traversal
//!   primitives,
//! - [`objective`]: the (lifted) multicut energy, weight transform,
//!   feasibility checking and problem normalization,
//! - [`lifting`]: construction of sparse lifted edges from node attributions,
//!   path evidence and dense graph neighborhoods,
//! - [`solvers`]: exact enumeration, greedy additive edge contraction,
//!   energy-descent local search and a block-wise hierarchical solver,
//! - [`metrics`]: variation of information (split/merge) and adapted Rand
//!   error,
//! - [`synthgen`]: a deterministic planted-partition benchmark generator,
//! - [`format`]: line-oriented text formats for problems, labelings,
//!   attributions and path evidence.

pub mod format;
pub mod graph;
pub mod lifting;
pub mod metrics;
pub mod objective;
pub mod solvers;
pub mod synthgen;

mod union_find;

pub use graph::{ContractionResult, Graph, GraphError, NodeLabeling};
pub use lifting::{Attribution, LiftedEdge, LiftedEdgeSet, PathEvidence, Provenance};
pub use objective::{
    EdgeKind, EdgeLabeling, FeasibilityReport, LiftedProblem, ProblemError, Violation,
    ViolationKind,
};
pub use solvers::{HierarchicalConfig, InnerSolver, SolveResult, SolverConfig, SolverKind};
