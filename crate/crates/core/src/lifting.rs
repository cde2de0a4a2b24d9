//! Distill domain knowledge into sparse lifted edges.
//!
//! The recipe: map knowledge onto graph nodes (class labels, component ids,
//! path terminals), then emit signed lifted edges between attributed nodes.
//! Repulsive edges keep nodes apart, attractive edges pull them together;
//! weights come either from preset strengths or from probabilities via the
//! log-odds transform.
//!
//! Emitted pairs that happen to be adjacent in the graph are kept but flagged
//! as parallel; [`crate::objective::fold_parallel_lifted`] folds them into
//! the local weight when a problem is assembled.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, NodeLabeling};
use crate::objective::{fold_parallel_lifted, prob_to_weight, LiftedProblem, ProblemError};

#[derive(Debug, Error, PartialEq)]
pub enum LiftError {
    #[error("per-node budget must be at least 1")]
    BudgetZero,
    #[error("weight {0} must be positive and finite")]
    InvalidWeight(f64),
    #[error("flagging threshold {0} must lie in (0, 1)")]
    InvalidThreshold(f64),
    #[error("node {0} is outside [0, {1})")]
    NodeOutOfRange(usize, usize),
    #[error("duplicate attribution for node {0}")]
    DuplicateAttribution(usize),
    #[error("path must have at least two nodes")]
    PathTooShort,
    #[error("consecutive path nodes must be distinct (node {0})")]
    PathRepeatsNode(usize),
    #[error("path endpoints must be distinct (node {0})")]
    PathEndpointsEqual(usize),
    #[error("merge probability {0} must lie in [0, 1]")]
    InvalidProbability(f64),
    #[error("path {index} crosses object boundary (objects {a} and {b})")]
    PathCrossesObjects { index: usize, a: usize, b: usize },
    #[error("expected {expected} weights for {expected} candidate pairs, got {got}")]
    WeightCountMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Sparse map node -> class id. Class id semantics are owned by the caller.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Attribution {
    assignments: BTreeMap<usize, usize>,
}

impl Attribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self, LiftError> {
        let mut assignments = BTreeMap::new();
        for &(node, class) in pairs {
            if assignments.insert(node, class).is_some() {
                return Err(LiftError::DuplicateAttribution(node));
            }
        }
        Ok(Attribution { assignments })
    }

    pub fn insert(&mut self, node: usize, class: usize) {
        self.assignments.insert(node, class);
    }

    pub fn get(&self, node: usize) -> Option<usize> {
        self.assignments.get(&node).copied()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// `(node, class)` pairs in ascending node order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignments.iter().map(|(&n, &c)| (n, c))
    }
}

/// A path through segmented objects together with the probability that it
/// crosses a false merge.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEvidence {
    path: Vec<usize>,
    merge_probability: f64,
}

impl PathEvidence {
    pub fn new(path: Vec<usize>, merge_probability: f64) -> Result<Self, LiftError> {
        if path.len() < 2 {
            return Err(LiftError::PathTooShort);
        }
        for w in path.windows(2) {
            if w[0] == w[1] {
                return Err(LiftError::PathRepeatsNode(w[0]));
            }
        }
        if path.first() == path.last() {
            return Err(LiftError::PathEndpointsEqual(path[0]));
        }
        if !(0.0..=1.0).contains(&merge_probability) || !merge_probability.is_finite() {
            return Err(LiftError::InvalidProbability(merge_probability));
        }
        Ok(PathEvidence {
            path,
            merge_probability,
        })
    }

    pub fn path(&self) -> &[usize] {
        &self.path
    }

    pub fn merge_probability(&self) -> f64 {
        self.merge_probability
    }

    /// First and last node of the path.
    pub fn terminals(&self) -> (usize, usize) {
        (self.path[0], *self.path.last().unwrap())
    }
}

/// Where a lifted edge came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    ClassRepulsion,
    ComponentAttraction,
    ComponentRepulsion,
    PathEvidence,
    DenseCandidate,
}

impl Provenance {
    const ALL: [Provenance; 5] = [
        Provenance::ClassRepulsion,
        Provenance::ComponentAttraction,
        Provenance::ComponentRepulsion,
        Provenance::PathEvidence,
        Provenance::DenseCandidate,
    ];

    fn bit(self) -> u8 {
        match self {
            Provenance::ClassRepulsion => 1,
            Provenance::ComponentAttraction => 2,
            Provenance::ComponentRepulsion => 4,
            Provenance::PathEvidence => 8,
            Provenance::DenseCandidate => 16,
        }
    }
}

/// Set of provenance tags; merged duplicates carry multiple tags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProvenanceSet(u8);

impl ProvenanceSet {
    pub fn single(p: Provenance) -> Self {
        ProvenanceSet(p.bit())
    }

    pub fn contains(self, p: Provenance) -> bool {
        self.0 & p.bit() != 0
    }

    pub fn union(self, other: ProvenanceSet) -> Self {
        ProvenanceSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Provenance> {
        Provenance::ALL.into_iter().filter(move |p| self.contains(*p))
    }
}

/// One weighted lifted edge with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedEdge {
    /// Canonical pair, `u < v`.
    pub pair: (usize, usize),
    pub weight: f64,
    pub provenance: ProvenanceSet,
    /// True if the pair is adjacent in the graph, i.e. parallel to a local
    /// edge and subject to folding.
    pub parallel: bool,
}

/// A duplicate-free, pair-sorted set of lifted edges.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LiftedEdgeSet {
    edges: Vec<LiftedEdge>,
}

impl LiftedEdgeSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Build a set from raw edges; duplicate pairs are merged (weights
    /// summed, provenance unioned).
    pub fn from_edges(edges: impl IntoIterator<Item = LiftedEdge>) -> Self {
        Self::from_entries(edges)
    }

    fn from_entries(entries: impl IntoIterator<Item = LiftedEdge>) -> Self {
        let mut merged: BTreeMap<(usize, usize), LiftedEdge> = BTreeMap::new();
        for e in entries {
            merged
                .entry(e.pair)
                .and_modify(|cur| {
                    cur.weight += e.weight;
                    cur.provenance = cur.provenance.union(e.provenance);
                    cur.parallel |= e.parallel;
                })
                .or_insert(e);
        }
        LiftedEdgeSet {
            edges: merged.into_values().collect(),
        }
    }

    pub fn edges(&self) -> &[LiftedEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Number of emitted edges incident to each node of `0..node_count`.
    pub fn degrees(&self, node_count: usize) -> Vec<usize> {
        let mut deg = vec![0; node_count];
        for e in &self.edges {
            deg[e.pair.0] += 1;
            deg[e.pair.1] += 1;
        }
        deg
    }

    /// Recompute the parallel flags against a graph.
    pub fn mark_parallel(&mut self, graph: &Graph) {
        for e in &mut self.edges {
            e.parallel = graph.has_edge(e.pair.0, e.pair.1);
        }
    }
}

fn check_attribution_nodes(graph: &Graph, attribution: &Attribution) -> Result<(), LiftError> {
    for (node, _) in attribution.iter() {
        if node >= graph.node_count() {
            return Err(LiftError::NodeOutOfRange(node, graph.node_count()));
        }
    }
    Ok(())
}

fn check_positive(w: f64) -> Result<(), LiftError> {
    if !(w.is_finite() && w > 0.0) {
        return Err(LiftError::InvalidWeight(w));
    }
    Ok(())
}

/// Budgeted pair selection shared by the class and component lifters.
///
/// Nodes are visited in ascending order; each node's eligible partners are
/// shuffled with the seeded generator and accepted while both endpoints have
/// budget left for the edge's kind. One generator stream and the fixed visit
/// order make the output reproducible for a fixed seed.
fn budgeted_pairs(
    attributed: &[(usize, usize)],
    per_node_budget: usize,
    seed: u64,
    node_count: usize,
    mut emit: impl FnMut((usize, usize), usize, usize) -> Option<(f64, Provenance, usize)>,
) -> Vec<(usize, usize, f64, Provenance)> {
    // `emit` returns (weight, provenance, budget lane) for an eligible pair;
    // lanes get independent per-node budgets.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![[0usize; 2]; node_count];
    let mut chosen: BTreeMap<(usize, usize), (f64, Provenance)> = BTreeMap::new();
    for &(u, cu) in attributed {
        let mut partners: Vec<(usize, usize)> = attributed
            .iter()
            .copied()
            .filter(|&(v, _)| v != u)
            .collect();
        partners.shuffle(&mut rng);
        for (v, cv) in partners {
            let pair = (u.min(v), u.max(v));
            if chosen.contains_key(&pair) {
                continue;
            }
            let Some((weight, provenance, lane)) = emit(pair, cu, cv) else {
                continue;
            };
            if degree[u][lane] >= per_node_budget || degree[v][lane] >= per_node_budget {
                continue;
            }
            degree[u][lane] += 1;
            degree[v][lane] += 1;
            chosen.insert(pair, (weight, provenance));
        }
    }
    chosen
        .into_iter()
        .map(|((u, v), (w, p))| (u, v, w, p))
        .collect()
}

/// Repulsive lifted edges between nodes attributed to different classes,
/// with a per-pair weight function.
pub fn lift_class_repulsion_weighted(
    graph: &Graph,
    attribution: &Attribution,
    per_node_budget: usize,
    seed: u64,
    mut weight: impl FnMut(usize, usize) -> f64,
) -> Result<LiftedEdgeSet, LiftError> {
    if per_node_budget < 1 {
        return Err(LiftError::BudgetZero);
    }
    check_attribution_nodes(graph, attribution)?;
    let attributed: Vec<(usize, usize)> = attribution.iter().collect();
    let pairs = budgeted_pairs(
        &attributed,
        per_node_budget,
        seed,
        graph.node_count(),
        |pair, cu, cv| {
            (cu != cv).then(|| (weight(pair.0, pair.1), Provenance::ClassRepulsion, 0))
        },
    );
    Ok(LiftedEdgeSet::from_entries(pairs.into_iter().map(
        |(u, v, w, p)| LiftedEdge {
            pair: (u, v),
            weight: w,
            provenance: ProvenanceSet::single(p),
            parallel: graph.has_edge(u, v),
        },
    )))
}

/// Repulsive lifted edges of constant strength between nodes attributed to
/// different classes, at most `per_node_budget` per node.
pub fn lift_class_repulsion(
    graph: &Graph,
    attribution: &Attribution,
    repulsion_weight: f64,
    per_node_budget: usize,
    seed: u64,
) -> Result<LiftedEdgeSet, LiftError> {
    check_positive(repulsion_weight)?;
    lift_class_repulsion_weighted(graph, attribution, per_node_budget, seed, |_, _| {
        -repulsion_weight
    })
}

/// Attractive lifted edges within a component id and repulsive edges across
/// component ids, each kind budget-capped per node.
pub fn lift_components(
    graph: &Graph,
    components: &Attribution,
    attractive_weight: f64,
    repulsive_weight: f64,
    per_node_budget: usize,
    seed: u64,
) -> Result<LiftedEdgeSet, LiftError> {
    if per_node_budget < 1 {
        return Err(LiftError::BudgetZero);
    }
    check_positive(attractive_weight)?;
    check_positive(repulsive_weight)?;
    check_attribution_nodes(graph, components)?;
    let attributed: Vec<(usize, usize)> = components.iter().collect();
    let pairs = budgeted_pairs(
        &attributed,
        per_node_budget,
        seed,
        graph.node_count(),
        |_, cu, cv| {
            if cu == cv {
                Some((attractive_weight, Provenance::ComponentAttraction, 0))
            } else {
                Some((-repulsive_weight, Provenance::ComponentRepulsion, 1))
            }
        },
    );
    Ok(LiftedEdgeSet::from_entries(pairs.into_iter().map(
        |(u, v, w, p)| LiftedEdge {
            pair: (u, v),
            weight: w,
            provenance: ProvenanceSet::single(p),
            parallel: graph.has_edge(u, v),
        },
    )))
}

/// Lifted edges between the terminals of error-detection paths.
///
/// Objects owning at least one path with `merge_probability >
/// flagging_threshold` are selected; every path of a selected object emits an
/// edge between its terminals, weighted by the log-odds of its probability
/// (repulsive above 0.5, attractive below). Duplicate terminal pairs sum
/// their weights.
pub fn lift_paths(
    evidence: &[PathEvidence],
    flagging_threshold: f64,
    object_of: &NodeLabeling,
) -> Result<LiftedEdgeSet, LiftError> {
    if !(flagging_threshold.is_finite()
        && flagging_threshold > 0.0
        && flagging_threshold < 1.0)
    {
        return Err(LiftError::InvalidThreshold(flagging_threshold));
    }
    let mut objects = Vec::with_capacity(evidence.len());
    for (index, ev) in evidence.iter().enumerate() {
        for &node in ev.path() {
            if node >= object_of.len() {
                return Err(LiftError::NodeOutOfRange(node, object_of.len()));
            }
        }
        let object = object_of.label(ev.path()[0]);
        for &node in &ev.path()[1..] {
            if object_of.label(node) != object {
                return Err(LiftError::PathCrossesObjects {
                    index,
                    a: object,
                    b: object_of.label(node),
                });
            }
        }
        objects.push(object);
    }
    let flagged: std::collections::BTreeSet<usize> = evidence
        .iter()
        .zip(&objects)
        .filter(|(ev, _)| ev.merge_probability() > flagging_threshold)
        .map(|(_, &obj)| obj)
        .collect();
    let mut entries = Vec::new();
    for (ev, object) in evidence.iter().zip(&objects) {
        if !flagged.contains(object) {
            continue;
        }
        let (a, b) = ev.terminals();
        entries.push(LiftedEdge {
            pair: (a.min(b), a.max(b)),
            weight: prob_to_weight(ev.merge_probability())?,
            provenance: ProvenanceSet::single(Provenance::PathEvidence),
            parallel: false,
        });
    }
    Ok(LiftedEdgeSet::from_entries(entries))
}

/// Lifted edges over all pairs within graph distance `2..=max_distance`,
/// with caller-supplied weights in candidate order (the order returned by
/// [`Graph::distance_pairs`]).
pub fn lift_dense(
    graph: &Graph,
    max_distance: usize,
    weights: &[f64],
) -> Result<LiftedEdgeSet, LiftError> {
    let candidates = graph.distance_pairs(max_distance);
    if weights.len() != candidates.len() {
        return Err(LiftError::WeightCountMismatch {
            expected: candidates.len(),
            got: weights.len(),
        });
    }
    Ok(LiftedEdgeSet::from_entries(
        candidates
            .into_iter()
            .zip(weights)
            .map(|((u, v, _), &w)| LiftedEdge {
                pair: (u, v),
                weight: w,
                provenance: ProvenanceSet::single(Provenance::DenseCandidate),
                parallel: false,
            }),
    ))
}

/// Union of several lifted edge sets; duplicate pairs sum their weights and
/// keep all provenance tags.
pub fn merge_lifted_sets(sets: &[LiftedEdgeSet]) -> LiftedEdgeSet {
    LiftedEdgeSet::from_entries(sets.iter().flat_map(|s| s.edges().iter().cloned()))
}

/// Merge a lifted edge set into a problem: weights of pairs already lifted
/// are summed, pairs parallel to local edges fold into the local weight, and
/// the result is normalized.
pub fn apply_lifted_set(
    problem: &LiftedProblem,
    set: &LiftedEdgeSet,
) -> Result<LiftedProblem, LiftError> {
    let mut lifted_edges: Vec<(usize, usize)> = problem.lifted_edges().to_vec();
    let mut lifted_weights: Vec<f64> = problem.lifted_weights().to_vec();
    for e in set.edges() {
        lifted_edges.push(e.pair);
        lifted_weights.push(e.weight);
    }
    let raw = LiftedProblem::new_unnormalized(
        problem.graph().clone(),
        problem.local_weights().to_vec(),
        lifted_edges,
        lifted_weights,
        problem.coordinates().map(|c| c.to_vec()),
    )?;
    Ok(fold_parallel_lifted(&raw))
}
