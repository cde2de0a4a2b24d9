//! Energy-descent local search over single-node moves.

use std::collections::BTreeSet;

use crate::graph::NodeLabeling;
use crate::objective::{energy, LiftedProblem};

use super::{SolveResult, SolverError};

/// Greedy descent from an initial partition.
///
/// Sweeps nodes in index order; for each node the exact energy delta of
/// moving it to each component adjacent via a local edge, or to a fresh
/// singleton, is evaluated over its incident local and lifted edges, and the
/// best strictly negative move is applied. Moves that would disconnect the
/// remainder of the node's current component are rejected, so every
/// intermediate partition stays feasible. Stops after a sweep without moves
/// or after `max_sweeps`.
pub fn solve_local_search(
    problem: &LiftedProblem,
    init: &NodeLabeling,
    max_sweeps: usize,
) -> Result<SolveResult, SolverError> {
    let n = problem.node_count();
    if init.len() != n {
        return Err(SolverError::InitLength {
            expected: n,
            got: init.len(),
        });
    }

    // incident (other endpoint, weight) lists, local and lifted combined for
    // delta evaluation
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, &(u, v)) in problem.graph().edges().iter().enumerate() {
        let w = problem.local_weights()[i];
        incident[u].push((v, w));
        incident[v].push((u, w));
    }
    for (i, &(u, v)) in problem.lifted_edges().iter().enumerate() {
        let w = problem.lifted_weights()[i];
        if u != v {
            incident[u].push((v, w));
            incident[v].push((u, w));
        }
    }

    let mut labels: Vec<usize> = init.labels().to_vec();
    let mut next_label = init.n_labels();
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut moved = false;
        for v in 0..n {
            let current = labels[v];
            let mut targets: BTreeSet<usize> = BTreeSet::new();
            for &(u, _) in problem.graph().neighbors(v) {
                if labels[u] != current {
                    targets.insert(labels[u]);
                }
            }
            let component_size = labels.iter().filter(|&&l| l == current).count();
            if targets.is_empty() && component_size == 1 {
                continue;
            }
            if component_size > 1 && !remainder_connected(problem, &labels, v) {
                continue;
            }

            let stay: f64 = incident[v]
                .iter()
                .map(|&(u, w)| if labels[u] != current { w } else { 0.0 })
                .sum();
            let mut best_delta = 0.0;
            let mut best_target: Option<Option<usize>> = None; // None = fresh singleton
            for &t in &targets {
                let cost: f64 = incident[v]
                    .iter()
                    .map(|&(u, w)| if labels[u] != t { w } else { 0.0 })
                    .sum();
                let delta = cost - stay;
                if delta < best_delta {
                    best_delta = delta;
                    best_target = Some(Some(t));
                }
            }
            if component_size > 1 {
                let cost: f64 = incident[v].iter().map(|&(_, w)| w).sum();
                if cost - stay < best_delta {
                    best_target = Some(None);
                }
            }
            if let Some(target) = best_target {
                labels[v] = match target {
                    Some(t) => t,
                    None => {
                        let fresh = next_label;
                        next_label += 1;
                        fresh
                    }
                };
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    let labeling = NodeLabeling::from_labels(&labels);
    let e = energy(problem, &labeling);
    Ok(SolveResult {
        labeling,
        energy: e,
        levels: Vec::new(),
    })
}

/// True if the component of `v` stays connected after removing `v`.
fn remainder_connected(problem: &LiftedProblem, labels: &[usize], v: usize) -> bool {
    let label = labels[v];
    let members: Vec<usize> = (0..labels.len())
        .filter(|&u| u != v && labels[u] == label)
        .collect();
    if members.len() <= 1 {
        return true;
    }
    let mut visited: std::collections::HashSet<usize> =
        std::collections::HashSet::with_capacity(members.len());
    let mut stack = vec![members[0]];
    visited.insert(members[0]);
    while let Some(u) = stack.pop() {
        for &(w, _) in problem.graph().neighbors(u) {
            if w != v && labels[w] == label && visited.insert(w) {
                stack.push(w);
            }
        }
    }
    visited.len() == members.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::objective::{check_feasible, induced_edge_labels};
    use crate::solvers::solve_exact;

    fn triangle() -> LiftedProblem {
        let g = Graph::new(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        LiftedProblem::local_only(g, vec![2.0, 2.0, -1.0], None).unwrap()
    }

    #[test]
    fn optimum_is_a_fixed_point() {
        let p = triangle();
        let opt = solve_exact(&p).unwrap();
        let res = solve_local_search(&p, &opt.labeling, 10).unwrap();
        assert_eq!(res.labeling, opt.labeling);
        assert_eq!(res.energy, opt.energy);
    }

    #[test]
    fn descends_from_all_split() {
        let p = triangle();
        let init = NodeLabeling::from_labels(&[0, 1, 2]);
        assert_eq!(energy(&p, &init), 3.0);
        let res = solve_local_search(&p, &init, 10).unwrap();
        assert_eq!(res.labeling.labels(), &[0, 0, 0]);
        assert_eq!(res.energy, 0.0);
    }

    #[test]
    fn never_increases_energy() {
        let g = Graph::new(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)]).unwrap();
        let p = LiftedProblem::new(
            g,
            vec![1.5, -2.0, 0.5, 3.0, -1.0, 2.0, -0.25],
            vec![(0, 3), (2, 5)],
            vec![-1.0, 2.0],
            None,
        )
        .unwrap();
        for init_raw in [
            vec![0, 0, 0, 0, 0, 0],
            vec![0, 1, 2, 3, 4, 5],
            vec![0, 0, 1, 1, 2, 2],
        ] {
            let init = NodeLabeling::from_labels(&init_raw);
            let e0 = energy(&p, &init);
            let mut prev = e0;
            for sweeps in 1..5 {
                let res = solve_local_search(&p, &init, sweeps).unwrap();
                assert!(res.energy <= prev + 1e-12);
                assert!(res.energy <= e0 + 1e-12);
                prev = res.energy;
                let report =
                    check_feasible(&p, &induced_edge_labels(&p, &res.labeling)).unwrap();
                assert!(report.feasible());
            }
        }
    }

    #[test]
    fn rejects_wrong_init_length() {
        let p = triangle();
        let bad = NodeLabeling::from_labels(&[0, 1]);
        assert!(matches!(
            solve_local_search(&p, &bad, 5),
            Err(SolverError::InitLength { .. })
        ));
    }
}
