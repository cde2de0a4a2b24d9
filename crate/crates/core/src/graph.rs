//! Immutable undirected graph with contraction and traversal primitives.
//!
//! Node ids are dense integers in `[0, n)`; callers with sparse ids must
//! remap externally. The edge list is canonical: every pair is stored with
//! `u < v` and the list is sorted lexicographically, so all derived outputs
//! are bit-reproducible.

use std::collections::VecDeque;

use thiserror::Error;

use crate::union_find::UnionFind;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("self-loop ({0}, {1})")]
    SelfLoop(usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) has an endpoint outside [0, {2})")]
    EndpointOutOfRange(usize, usize, usize),
}

/// Undirected graph over nodes `0..node_count` with a canonical sorted edge
/// list and per-node adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    /// For each node, `(neighbor, edge index)` sorted by neighbor.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    /// Build a graph from an edge list. Pairs are reordered so `u < v` and
    /// sorted; self-loops, duplicates and out-of-range endpoints are errors.
    pub fn new(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut canonical = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a, b));
            }
            if a >= node_count || b >= node_count {
                return Err(GraphError::EndpointOutOfRange(a, b, node_count));
            }
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        for w in canonical.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        let mut adjacency = vec![Vec::new(); node_count];
        for (i, &(u, v)) in canonical.iter().enumerate() {
            adjacency[u].push((v, i));
            adjacency[v].push((u, i));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            node_count,
            edges: canonical,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> (usize, usize) {
        self.edges[index]
    }

    /// `(neighbor, edge index)` pairs of `u`, sorted by neighbor.
    pub fn neighbors(&self, u: usize) -> &[(usize, usize)] {
        &self.adjacency[u]
    }

    /// Index of the local edge `{u, v}`, if present.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_index(u, v).is_some()
    }

    /// Connected components over the edges selected by `keep_edge`.
    ///
    /// Two nodes share a label iff they are connected via kept edges; labels
    /// are consecutive integers assigned in order of the smallest contained
    /// node id.
    pub fn connected_components(&self, keep_edge: impl Fn(usize) -> bool) -> NodeLabeling {
        let mut uf = UnionFind::new(self.node_count);
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if keep_edge(i) {
                uf.union_into(u, v);
            }
        }
        let roots: Vec<usize> = (0..self.node_count).map(|v| uf.find(v)).collect();
        NodeLabeling::from_labels(&roots)
    }

    /// All unordered node pairs at shortest-path distance `d` with
    /// `2 <= d <= max_distance`, sorted by `(d, u, v)`. Pairs at distance 1
    /// (local edges) are excluded.
    pub fn distance_pairs(&self, max_distance: usize) -> Vec<(usize, usize, usize)> {
        assert!(max_distance >= 2, "max_distance must be at least 2");
        let mut out = Vec::new();
        let mut dist = vec![usize::MAX; self.node_count];
        let mut queue = VecDeque::new();
        for start in 0..self.node_count {
            dist.fill(usize::MAX);
            dist[start] = 0;
            queue.clear();
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                if dist[u] == max_distance {
                    continue;
                }
                for &(v, _) in &self.adjacency[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                        if v > start && dist[v] >= 2 {
                            out.push((dist[v], start, v));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.into_iter().map(|(d, u, v)| (u, v, d)).collect()
    }

    /// Contract the components of the merge relation given by `merge_pairs`.
    ///
    /// New node ids follow first-occurrence (smallest contained old id)
    /// order. Parallel old edges map to one new edge; edges internal to a
    /// merged component are dropped.
    pub fn contract(&self, merge_pairs: &[(usize, usize)]) -> ContractionResult {
        let mut uf = UnionFind::new(self.node_count);
        for &(a, b) in merge_pairs {
            assert!(
                a < self.node_count && b < self.node_count,
                "merge pair ({a}, {b}) out of range"
            );
            uf.union_into(a.min(b), a.max(b));
        }
        let mut node_map = vec![usize::MAX; self.node_count];
        let mut next = 0;
        let mut root_label = vec![usize::MAX; self.node_count];
        for (v, slot) in node_map.iter_mut().enumerate() {
            let r = uf.find(v);
            if root_label[r] == usize::MAX {
                root_label[r] = next;
                next += 1;
            }
            *slot = root_label[r];
        }
        let new_count = next;

        let mut mapped: Vec<(usize, usize)> = Vec::new();
        for &(u, v) in &self.edges {
            let (nu, nv) = (node_map[u], node_map[v]);
            if nu != nv {
                mapped.push((nu.min(nv), nu.max(nv)));
            }
        }
        mapped.sort_unstable();
        mapped.dedup();
        let reduced = Graph::new(new_count, &mapped).expect("contraction preserves validity");

        let edge_map = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (nu, nv) = (node_map[u], node_map[v]);
                if nu == nv {
                    None
                } else {
                    reduced.edge_index(nu, nv)
                }
            })
            .collect();

        ContractionResult {
            reduced,
            node_map,
            edge_map,
        }
    }
}

/// Result of [`Graph::contract`].
#[derive(Debug, Clone)]
pub struct ContractionResult {
    pub reduced: Graph,
    /// Surjection old node -> new node.
    pub node_map: Vec<usize>,
    /// Old edge index -> new edge index; `None` for dropped (intra-component)
    /// edges.
    pub edge_map: Vec<Option<usize>>,
}

/// A partition of the node set, stored as one label per node.
///
/// Labels are always normalized to first-occurrence order (0, 1, 2, ...), so
/// two labelings are equal iff they describe the same partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeLabeling {
    labels: Vec<usize>,
    n_labels: usize,
}

impl NodeLabeling {
    /// Normalize arbitrary labels to first-occurrence order.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let mut labels = Vec::with_capacity(raw.len());
        for &l in raw {
            let next = remap.len();
            let id = *remap.entry(l).or_insert(next);
            labels.push(id);
        }
        NodeLabeling {
            labels,
            n_labels: remap.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of distinct labels.
    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    /// Nodes carrying `label`, in ascending order.
    pub fn members(&self, label: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&v| self.labels[v] == label)
            .collect()
    }
}
