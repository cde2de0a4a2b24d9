//! Lifted multicut solvers.
//!
//! - [`solve_exact`]: set-partition enumeration for tiny instances; the
//!   reference optimum for everything else.
//! - [`solve_gaec`]: greedy additive edge contraction, adapted for lifted
//!   edges (lifted weights fold into local weights as nodes merge).
//! - [`solve_local_search`]: energy-descent sweeps of single-node moves.
//! - [`solve_hierarchical`]: block-wise solving over a spatial embedding;
//!   tiles the volume, solves blocks in parallel, contracts their merges,
//!   doubles the block size and repeats, then solves the reduced problem.
//!
//! All solvers return partitions whose classes are connected in the graph,
//! so every result induces a feasible edge labeling, and all are
//! deterministic for fixed inputs (including across parallelism degrees).

mod exact;
mod gaec;
mod hierarchical;
mod local_search;

pub use exact::solve_exact;
pub use gaec::solve_gaec;
pub use hierarchical::{
    get_blocks, get_subproblem, reduce_problem, solve_hierarchical, SubPartition,
};
pub use local_search::solve_local_search;

use thiserror::Error;

use crate::graph::NodeLabeling;
use crate::objective::LiftedProblem;

/// Hard cap on exact enumeration; Bell(14) is already ~1.9e8 partitions.
pub const EXACT_NODE_LIMIT: usize = 14;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("problem has {nodes} nodes, exact solving is capped at {limit}")]
    TooManyNodes { nodes: usize, limit: usize },
    #[error("exact_max_nodes {0} exceeds the hard cap of {limit}", limit = EXACT_NODE_LIMIT)]
    ExactCapTooLarge(usize),
    #[error("problem has no node coordinates; the hierarchical solver needs a spatial embedding")]
    MissingCoordinates,
    #[error("node {0} appears in more than one block sub-partition")]
    OverlappingBlocks(usize),
    #[error("sub-partition references node {0} outside [0, {1})")]
    NodeOutOfRange(usize, usize),
    #[error("sub-partition has {got} labels for {expected} nodes")]
    SubPartitionLength { expected: usize, got: usize },
    #[error("block shape {0:?} must be positive on every axis")]
    InvalidBlockShape([i64; 3]),
    #[error("n_levels must be at least 1")]
    NoLevels,
    #[error("parallelism degree must be at least 1")]
    NoJobs,
    #[error("init labeling covers {got} nodes, expected {expected}")]
    InitLength { expected: usize, got: usize },
    #[error("hierarchical solver requested without a hierarchical config")]
    MissingHierarchicalConfig,
    #[error("failed to build thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Exact,
    Gaec,
    GaecLocalSearch,
    Hierarchical,
}

/// Solver used for hierarchical sub-problems and the final reduced problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerSolver {
    Gaec,
    #[default]
    GaecLocalSearch,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Node cap for exact enumeration, at most [`EXACT_NODE_LIMIT`].
    pub exact_max_nodes: usize,
    pub local_search_max_sweeps: usize,
    /// Reserved for randomized solvers; the current set is deterministic and
    /// ignores it.
    pub seed: u64,
    pub hierarchical: Option<HierarchicalConfig>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kind: SolverKind::GaecLocalSearch,
            exact_max_nodes: 12,
            local_search_max_sweeps: 100,
            seed: 0,
            hierarchical: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchicalConfig {
    pub n_levels: usize,
    /// Block edge lengths in coordinate units `(z, y, x)`; doubled after
    /// every level.
    pub initial_block_shape: [i64; 3],
    pub block_solver: InnerSolver,
    pub final_solver: InnerSolver,
    /// Worker threads for per-level sub-problem solving. Results are
    /// identical for every value.
    pub jobs: usize,
    pub local_search_max_sweeps: usize,
    /// Only contract merges between nodes with no edge leaving their block.
    /// Nodes at a block boundary lack the context to decide their merges;
    /// deferring them to a later level trades reduction rate for quality.
    pub exclude_boundary: bool,
}

impl HierarchicalConfig {
    pub fn new(n_levels: usize, initial_block_shape: [i64; 3]) -> Self {
        HierarchicalConfig {
            n_levels,
            initial_block_shape,
            block_solver: InnerSolver::default(),
            final_solver: InnerSolver::default(),
            jobs: 1,
            local_search_max_sweeps: 100,
            exclude_boundary: false,
        }
    }

    /// Two levels with blocks covering roughly a quarter of the bounding box
    /// per axis.
    pub fn for_problem(problem: &LiftedProblem) -> Result<Self, SolverError> {
        let coords = problem
            .coordinates()
            .ok_or(SolverError::MissingCoordinates)?;
        let mut shape = [1i64; 3];
        for axis in 0..3 {
            let min = coords.iter().map(|c| c[axis]).min().unwrap();
            let max = coords.iter().map(|c| c[axis]).max().unwrap();
            let extent = max - min + 1;
            shape[axis] = (extent + 3) / 4;
        }
        Ok(Self::new(2, shape))
    }
}

/// Node and edge counts after each hierarchical reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelStats {
    pub level: usize,
    pub node_count: usize,
    pub local_edge_count: usize,
    pub lifted_edge_count: usize,
}

/// A labeling together with its objective value and, for the hierarchical
/// solver, per-level reduction diagnostics.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub labeling: NodeLabeling,
    pub energy: f64,
    pub levels: Vec<LevelStats>,
}

/// GAEC followed by local-search polishing of its labeling.
pub fn solve_gaec_local_search(problem: &LiftedProblem, max_sweeps: usize) -> SolveResult {
    let first = solve_gaec(problem);
    solve_local_search(problem, &first.labeling, max_sweeps)
        .expect("gaec labeling covers all nodes")
}

/// Run the solver selected by `config`.
pub fn solve(problem: &LiftedProblem, config: &SolverConfig) -> Result<SolveResult, SolverError> {
    match config.kind {
        SolverKind::Exact => {
            if config.exact_max_nodes > EXACT_NODE_LIMIT {
                return Err(SolverError::ExactCapTooLarge(config.exact_max_nodes));
            }
            if problem.node_count() > config.exact_max_nodes {
                return Err(SolverError::TooManyNodes {
                    nodes: problem.node_count(),
                    limit: config.exact_max_nodes,
                });
            }
            solve_exact(problem)
        }
        SolverKind::Gaec => Ok(solve_gaec(problem)),
        SolverKind::GaecLocalSearch => Ok(solve_gaec_local_search(
            problem,
            config.local_search_max_sweeps,
        )),
        SolverKind::Hierarchical => {
            let hier = config
                .hierarchical
                .as_ref()
                .ok_or(SolverError::MissingHierarchicalConfig)?;
            solve_hierarchical(problem, hier)
        }
    }
}

pub(crate) fn run_inner(
    kind: InnerSolver,
    problem: &LiftedProblem,
    max_sweeps: usize,
) -> SolveResult {
    match kind {
        InnerSolver::Gaec => solve_gaec(problem),
        InnerSolver::GaecLocalSearch => solve_gaec_local_search(problem, max_sweeps),
    }
}
