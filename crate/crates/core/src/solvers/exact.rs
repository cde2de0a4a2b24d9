//! Exact minimization by set-partition enumeration.

use crate::graph::NodeLabeling;
use crate::objective::{energy, LiftedProblem};

use super::{SolveResult, SolverError, EXACT_NODE_LIMIT};

/// Globally minimal partition by enumerating all set partitions in
/// restricted-growth order.
///
/// Partitions with a class that is disconnected in the graph are skipped:
/// they do not correspond to any feasible edge labeling (a lifted edge
/// between the disconnected parts would have to be both joined by label and
/// cut by connectivity), and the true optimum always lies on a partition
/// into connected classes. Ties break toward fewer components, then the
/// lexicographically smallest normalized labeling; restricted-growth strings
/// are normalized labelings enumerated in lexicographic order, so the first
/// optimum found wins ties on labels.
pub fn solve_exact(problem: &LiftedProblem) -> Result<SolveResult, SolverError> {
    let n = problem.node_count();
    if n > EXACT_NODE_LIMIT {
        return Err(SolverError::TooManyNodes {
            nodes: n,
            limit: EXACT_NODE_LIMIT,
        });
    }

    let mut best_labels: Vec<usize> = (0..n).collect();
    let mut best_energy = f64::INFINITY;
    let mut best_components = usize::MAX;

    let mut labels = vec![0usize; n];
    // max_prefix[i] = max(labels[..i]); labels[i] may range over 0..=max_prefix[i] + 1
    let mut max_prefix = vec![0usize; n];
    let mut scratch = ConnectivityScratch::new(n);

    'enumerate: loop {
        if scratch.classes_connected(problem, &labels) {
            let mut e = 0.0;
            for (i, &(u, v)) in problem.graph().edges().iter().enumerate() {
                if labels[u] != labels[v] {
                    e += problem.local_weights()[i];
                }
            }
            for (i, &(u, v)) in problem.lifted_edges().iter().enumerate() {
                if labels[u] != labels[v] {
                    e += problem.lifted_weights()[i];
                }
            }
            let components = labels.iter().copied().max().unwrap_or(0) + 1;
            if e < best_energy || (e == best_energy && components < best_components) {
                best_energy = e;
                best_components = components;
                best_labels.copy_from_slice(&labels);
            }
        }

        // advance to the next restricted growth string
        let mut i = n;
        loop {
            if i <= 1 {
                break 'enumerate;
            }
            i -= 1;
            if labels[i] <= max_prefix[i] {
                labels[i] += 1;
                break;
            }
            labels[i] = 0;
        }
        for j in i + 1..n {
            labels[j] = 0;
            max_prefix[j] = max_prefix[j - 1].max(labels[j - 1]);
        }
    }

    let labeling = NodeLabeling::from_labels(&best_labels);
    let e = energy(problem, &labeling);
    Ok(SolveResult {
        labeling,
        energy: e,
        levels: Vec::new(),
    })
}

/// Reusable buffers for the connected-classes check.
struct ConnectivityScratch {
    parent: Vec<usize>,
    class_root: Vec<usize>,
}

impl ConnectivityScratch {
    fn new(n: usize) -> Self {
        ConnectivityScratch {
            parent: vec![0; n],
            class_root: vec![usize::MAX; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            let p = self.parent[x];
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    /// True if every label class induces a connected subgraph.
    fn classes_connected(&mut self, problem: &LiftedProblem, labels: &[usize]) -> bool {
        let n = labels.len();
        for v in 0..n {
            self.parent[v] = v;
            self.class_root[v] = usize::MAX;
        }
        for &(u, v) in problem.graph().edges() {
            if labels[u] == labels[v] {
                let (ru, rv) = (self.find(u), self.find(v));
                if ru != rv {
                    self.parent[rv] = ru;
                }
            }
        }
        for (v, &label) in labels.iter().enumerate() {
            let root = self.find(v);
            if self.class_root[label] == usize::MAX {
                self.class_root[label] = root;
            } else if self.class_root[label] != root {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn triangle_all_merged() {
        let g = Graph::new(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let p = LiftedProblem::local_only(g, vec![2.0, 2.0, -1.0], None).unwrap();
        let res = solve_exact(&p).unwrap();
        assert_eq!(res.labeling.labels(), &[0, 0, 0]);
        assert_eq!(res.energy, 0.0);
    }

    #[test]
    fn chain_with_lifted_tie_rule() {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let p =
            LiftedProblem::new(g, vec![10.0, 10.0], vec![(0, 2)], vec![-20.0], None).unwrap();
        let res = solve_exact(&p).unwrap();
        assert_eq!(res.energy, -10.0);
        // ties with [0,1,1]; the lexicographically smaller labeling wins
        assert_eq!(res.labeling.labels(), &[0, 0, 1]);
    }

    #[test]
    fn single_node() {
        let g = Graph::new(1, &[]).unwrap();
        let p = LiftedProblem::local_only(g, vec![], None).unwrap();
        let res = solve_exact(&p).unwrap();
        assert_eq!(res.labeling.labels(), &[0]);
        assert_eq!(res.energy, 0.0);
    }

    #[test]
    fn fewer_components_wins_energy_ties() {
        // isolated pair of nodes joined by nothing; both [0,1] is forced,
        // but on a single zero-weight edge [0,0] (1 component) beats [0,1]
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let p = LiftedProblem::local_only(g, vec![0.0], None).unwrap();
        let res = solve_exact(&p).unwrap();
        assert_eq!(res.labeling.labels(), &[0, 0]);
    }

    #[test]
    fn rejects_large_problems() {
        let n = EXACT_NODE_LIMIT + 1;
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let g = Graph::new(n, &edges).unwrap();
        let p = LiftedProblem::local_only(g, vec![1.0; n - 1], None).unwrap();
        assert!(matches!(
            solve_exact(&p),
            Err(SolverError::TooManyNodes { .. })
        ));
    }

    #[test]
    fn disconnected_class_partitions_are_skipped() {
        // two isolated nodes: the only connected-class partition is {0},{1}
        let g = Graph::new(2, &[]).unwrap();
        let p = LiftedProblem::local_only(g, vec![], None).unwrap();
        let res = solve_exact(&p).unwrap();
        assert_eq!(res.labeling.labels(), &[0, 1]);

        // attractive lifted edge across a repulsive path: labeling the
        // endpoints together without connectivity is not a solution
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let p =
            LiftedProblem::new(g, vec![-10.0, -10.0], vec![(0, 2)], vec![5.0], None).unwrap();
        let res = solve_exact(&p).unwrap();
        assert_eq!(res.labeling.labels(), &[0, 1, 2]);
        assert_eq!(res.energy, -15.0);
    }
}
