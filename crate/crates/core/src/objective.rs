//! The multicut and lifted multicut objectives.
//!
//! A [`LiftedProblem`] couples a [`Graph`] with signed weights on its local
//! edges and on an extra set of lifted edges. Lifted edges contribute energy
//! but never connectivity: in a consistent edge labeling, the state of a
//! lifted edge must agree with whether its endpoints are connected via uncut
//! local edges. Because of that equivalence, every node partition whose
//! classes are connected in the graph induces a feasible edge labeling, and
//! the energy of a partition can be evaluated directly from node labels.

use thiserror::Error;

use crate::graph::{Graph, NodeLabeling};

/// Default clamp applied to probabilities before the log-odds transform.
/// Upstream classifiers emit hard 0/1; infinite weights break solver
/// arithmetic.
pub const DEFAULT_PROB_EPS: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("expected {expected} local weights, got {got}")]
    LocalWeightCount { expected: usize, got: usize },
    #[error("expected {expected} lifted weights, got {got}")]
    LiftedWeightCount { expected: usize, got: usize },
    #[error("lifted edge ({0}, {1}) has an endpoint outside [0, {2})")]
    LiftedEndpointOutOfRange(usize, usize, usize),
    #[error("lifted self-loop at node {0}")]
    LiftedSelfLoop(usize),
    #[error("lifted edge ({0}, {1}) duplicates a local edge")]
    LiftedDuplicatesLocal(usize, usize),
    #[error("duplicate lifted edge ({0}, {1})")]
    LiftedDuplicate(usize, usize),
    #[error("expected {expected} node coordinates, got {got}")]
    CoordinateCount { expected: usize, got: usize },
    #[error("non-finite weight on edge ({0}, {1})")]
    NonFiniteWeight(usize, usize),
    #[error("non-finite probability {0}")]
    NonFiniteProbability(f64),
    #[error("edge labeling has {got} {kind} entries, expected {expected}")]
    LabelingLength {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Log-odds weight of a cut probability: `ln((1 - p) / p)` after clamping
/// `p` to `[eps, 1 - eps]`.
///
/// Positive (attractive) for `p < 0.5`, negative (repulsive) for `p > 0.5`.
pub fn prob_to_weight_clamped(p: f64, eps: f64) -> Result<f64, ProblemError> {
    if !p.is_finite() {
        return Err(ProblemError::NonFiniteProbability(p));
    }
    let p = p.clamp(eps, 1.0 - eps);
    Ok(((1.0 - p) / p).ln())
}

/// [`prob_to_weight_clamped`] with the default clamp of [`DEFAULT_PROB_EPS`].
pub fn prob_to_weight(p: f64) -> Result<f64, ProblemError> {
    prob_to_weight_clamped(p, DEFAULT_PROB_EPS)
}

/// A lifted multicut problem instance.
///
/// In normalized form no lifted pair duplicates a local edge or another
/// lifted pair and there are no lifted self-loops. Intermediate states (after
/// contraction or when merging lifted edge sets) may violate that; use
/// [`fold_parallel_lifted`] to restore it without changing any partition's
/// energy.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedProblem {
    graph: Graph,
    local_weights: Vec<f64>,
    lifted_edges: Vec<(usize, usize)>,
    lifted_weights: Vec<f64>,
    coordinates: Option<Vec<[i64; 3]>>,
}

impl LiftedProblem {
    /// Strict constructor: enforces all normalized-form invariants.
    pub fn new(
        graph: Graph,
        local_weights: Vec<f64>,
        lifted_edges: Vec<(usize, usize)>,
        lifted_weights: Vec<f64>,
        coordinates: Option<Vec<[i64; 3]>>,
    ) -> Result<Self, ProblemError> {
        let problem =
            Self::new_unnormalized(graph, local_weights, lifted_edges, lifted_weights, coordinates)?;
        for w in problem.lifted_edges.windows(2) {
            if w[0] == w[1] {
                return Err(ProblemError::LiftedDuplicate(w[0].0, w[0].1));
            }
        }
        for &(u, v) in &problem.lifted_edges {
            if u == v {
                return Err(ProblemError::LiftedSelfLoop(u));
            }
            if problem.graph.has_edge(u, v) {
                return Err(ProblemError::LiftedDuplicatesLocal(u, v));
            }
        }
        Ok(problem)
    }

    /// Permissive constructor: checks lengths, ranges and finiteness only.
    /// Lifted self-pairs, duplicates and pairs parallel to local edges are
    /// allowed; [`fold_parallel_lifted`] removes them.
    pub fn new_unnormalized(
        graph: Graph,
        local_weights: Vec<f64>,
        lifted_edges: Vec<(usize, usize)>,
        lifted_weights: Vec<f64>,
        coordinates: Option<Vec<[i64; 3]>>,
    ) -> Result<Self, ProblemError> {
        if local_weights.len() != graph.edge_count() {
            return Err(ProblemError::LocalWeightCount {
                expected: graph.edge_count(),
                got: local_weights.len(),
            });
        }
        if lifted_weights.len() != lifted_edges.len() {
            return Err(ProblemError::LiftedWeightCount {
                expected: lifted_edges.len(),
                got: lifted_weights.len(),
            });
        }
        if let Some(coords) = &coordinates {
            if coords.len() != graph.node_count() {
                return Err(ProblemError::CoordinateCount {
                    expected: graph.node_count(),
                    got: coords.len(),
                });
            }
        }
        for (i, &(u, v)) in graph.edges().iter().enumerate() {
            if !local_weights[i].is_finite() {
                return Err(ProblemError::NonFiniteWeight(u, v));
            }
        }
        let mut pairs: Vec<((usize, usize), f64)> = lifted_edges
            .iter()
            .zip(&lifted_weights)
            .map(|(&(u, v), &w)| ((u.min(v), u.max(v)), w))
            .collect();
        for &((u, v), w) in &pairs {
            if u >= graph.node_count() || v >= graph.node_count() {
                return Err(ProblemError::LiftedEndpointOutOfRange(
                    u,
                    v,
                    graph.node_count(),
                ));
            }
            if !w.is_finite() {
                return Err(ProblemError::NonFiniteWeight(u, v));
            }
        }
        pairs.sort_by_key(|&(p, _)| p);
        let (lifted_edges, lifted_weights) = pairs.into_iter().unzip();
        Ok(LiftedProblem {
            graph,
            local_weights,
            lifted_edges,
            lifted_weights,
            coordinates,
        })
    }

    /// A problem with local edges only.
    pub fn local_only(
        graph: Graph,
        local_weights: Vec<f64>,
        coordinates: Option<Vec<[i64; 3]>>,
    ) -> Result<Self, ProblemError> {
        Self::new(graph, local_weights, Vec::new(), Vec::new(), coordinates)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn local_weights(&self) -> &[f64] {
        &self.local_weights
    }

    pub fn lifted_edges(&self) -> &[(usize, usize)] {
        &self.lifted_edges
    }

    pub fn lifted_weights(&self) -> &[f64] {
        &self.lifted_weights
    }

    pub fn coordinates(&self) -> Option<&[[i64; 3]]> {
        self.coordinates.as_deref()
    }

    /// True if the normalized-form invariants hold.
    pub fn is_normalized(&self) -> bool {
        self.lifted_edges.windows(2).all(|w| w[0] != w[1])
            && self
                .lifted_edges
                .iter()
                .all(|&(u, v)| u != v && !self.graph.has_edge(u, v))
    }
}

/// Binary cut states for every local and lifted edge; `true` means cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLabeling {
    pub local: Vec<bool>,
    pub lifted: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Local,
    Lifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// The edge is cut but its endpoints stay connected via uncut local
    /// edges (a dangling cut).
    CutButConnected,
    /// The edge is joined but its endpoints lie in different components of
    /// the uncut local edges (an air bridge).
    JoinedButDisconnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub kind: EdgeKind,
    pub edge: usize,
    pub violation: ViolationKind,
}

/// Outcome of [`check_feasible`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Edge labeling induced by a node partition: an edge is cut iff its
/// endpoint labels differ, for local and lifted edges alike.
pub fn induced_edge_labels(problem: &LiftedProblem, labeling: &NodeLabeling) -> EdgeLabeling {
    assert_eq!(
        labeling.len(),
        problem.node_count(),
        "labeling must cover all nodes"
    );
    let local = problem
        .graph
        .edges()
        .iter()
        .map(|&(u, v)| labeling.label(u) != labeling.label(v))
        .collect();
    let lifted = problem
        .lifted_edges
        .iter()
        .map(|&(u, v)| labeling.label(u) != labeling.label(v))
        .collect();
    EdgeLabeling { local, lifted }
}

/// Objective value of a partition: the sum of the weights of cut edges, over
/// local and lifted edges. Summation order is fixed (local edges in index
/// order, then lifted edges) for reproducibility.
pub fn energy(problem: &LiftedProblem, labeling: &NodeLabeling) -> f64 {
    assert_eq!(
        labeling.len(),
        problem.node_count(),
        "labeling must cover all nodes"
    );
    let mut total = 0.0;
    for (i, &(u, v)) in problem.graph.edges().iter().enumerate() {
        if labeling.label(u) != labeling.label(v) {
            total += problem.local_weights[i];
        }
    }
    for (i, &(u, v)) in problem.lifted_edges.iter().enumerate() {
        if labeling.label(u) != labeling.label(v) {
            total += problem.lifted_weights[i];
        }
    }
    total
}

/// Check an edge labeling against the connectivity it induces.
///
/// Components are computed over local edges with uncut state; every edge
/// (local or lifted) whose state disagrees with the different-component
/// indicator is reported. An empty report is equivalent to satisfying the
/// cycle, path and cut constraints of the lifted multicut.
pub fn check_feasible(
    problem: &LiftedProblem,
    labeling: &EdgeLabeling,
) -> Result<FeasibilityReport, ProblemError> {
    if labeling.local.len() != problem.graph.edge_count() {
        return Err(ProblemError::LabelingLength {
            kind: "local",
            expected: problem.graph.edge_count(),
            got: labeling.local.len(),
        });
    }
    if labeling.lifted.len() != problem.lifted_edges.len() {
        return Err(ProblemError::LabelingLength {
            kind: "lifted",
            expected: problem.lifted_edges.len(),
            got: labeling.lifted.len(),
        });
    }
    let components = problem
        .graph
        .connected_components(|i| !labeling.local[i]);
    let mut violations = Vec::new();
    let mut check = |kind, edge, (u, v): (usize, usize), cut: bool| {
        let separated = components.label(u) != components.label(v);
        if cut && !separated {
            violations.push(Violation {
                kind,
                edge,
                violation: ViolationKind::CutButConnected,
            });
        } else if !cut && separated {
            violations.push(Violation {
                kind,
                edge,
                violation: ViolationKind::JoinedButDisconnected,
            });
        }
    };
    for (i, &pair) in problem.graph.edges().iter().enumerate() {
        check(EdgeKind::Local, i, pair, labeling.local[i]);
    }
    for (i, &pair) in problem.lifted_edges.iter().enumerate() {
        check(EdgeKind::Lifted, i, pair, labeling.lifted[i]);
    }
    Ok(FeasibilityReport { violations })
}

/// Normalize a problem: lifted self-pairs are removed, lifted edges parallel
/// to a local edge fold their weight into it, duplicate lifted pairs are
/// summed. The energy of every partition is unchanged.
pub fn fold_parallel_lifted(problem: &LiftedProblem) -> LiftedProblem {
    let mut local_weights = problem.local_weights.clone();
    let mut folded: std::collections::BTreeMap<(usize, usize), f64> =
        std::collections::BTreeMap::new();
    for (i, &(u, v)) in problem.lifted_edges.iter().enumerate() {
        let w = problem.lifted_weights[i];
        if u == v {
            continue;
        }
        if let Some(e) = problem.graph.edge_index(u, v) {
            local_weights[e] += w;
        } else {
            *folded.entry((u, v)).or_insert(0.0) += w;
        }
    }
    let (lifted_edges, lifted_weights) = folded.into_iter().unzip();
    LiftedProblem {
        graph: problem.graph.clone(),
        local_weights,
        lifted_edges,
        lifted_weights,
        coordinates: problem.coordinates.clone(),
    }
}
