//! Greedy additive edge contraction, adapted for lifted edges.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::graph::NodeLabeling;
use crate::objective::{energy, LiftedProblem};
use crate::union_find::UnionFind;

use super::SolveResult;

/// Repeatedly contract the local edge with the largest strictly positive
/// merged weight.
///
/// On contraction, parallel local weights are summed, lifted edges that
/// become parallel to a local edge fold their weight into it, and lifted
/// self-pairs are dropped. The greedy loop stops when no positive local edge
/// remains. Ties break toward the smallest edge index; edges created or
/// updated by a contraction receive fresh indices in creation order, so the
/// whole run is deterministic.
pub fn solve_gaec(problem: &LiftedProblem) -> SolveResult {
    let n = problem.node_count();
    let mut state = Agglomerator::new(problem);
    while let Some((u, v)) = state.pop_contractible() {
        state.contract(u, v);
    }
    let roots: Vec<usize> = {
        let uf = &mut state.uf;
        (0..n).map(|v| uf.find(v)).collect()
    };
    let labeling = NodeLabeling::from_labels(&roots);
    let e = energy(problem, &labeling);
    SolveResult {
        labeling,
        energy: e,
        levels: Vec::new(),
    }
}

#[derive(Debug, PartialEq)]
struct HeapEntry {
    weight: f64,
    serial: u64,
    u: usize,
    v: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on weight; smaller serial wins ties
        self.weight
            .total_cmp(&other.weight)
            .then_with(|| other.serial.cmp(&self.serial))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Agglomerator {
    uf: UnionFind,
    /// Current local edges between component representatives: weight and the
    /// serial of the last update.
    local: BTreeMap<(usize, usize), (f64, u64)>,
    lifted: BTreeMap<(usize, usize), f64>,
    adj_local: Vec<BTreeSet<usize>>,
    adj_lifted: Vec<BTreeSet<usize>>,
    heap: BinaryHeap<HeapEntry>,
    next_serial: u64,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Agglomerator {
    fn new(problem: &LiftedProblem) -> Self {
        let n = problem.node_count();
        let mut state = Agglomerator {
            uf: UnionFind::new(n),
            local: BTreeMap::new(),
            lifted: BTreeMap::new(),
            adj_local: vec![BTreeSet::new(); n],
            adj_lifted: vec![BTreeSet::new(); n],
            heap: BinaryHeap::new(),
            next_serial: 0,
        };
        for (i, &(u, v)) in problem.graph().edges().iter().enumerate() {
            state.local.insert((u, v), (problem.local_weights()[i], i as u64));
            state.adj_local[u].insert(v);
            state.adj_local[v].insert(u);
        }
        state.next_serial = problem.graph().edge_count() as u64;
        // fold lifted edges that are parallel or self right away
        for (i, &(u, v)) in problem.lifted_edges().iter().enumerate() {
            let w = problem.lifted_weights()[i];
            if u == v {
                continue;
            }
            let k = key(u, v);
            if let Some(entry) = state.local.get_mut(&k) {
                entry.0 += w;
            } else {
                *state.lifted.entry(k).or_insert(0.0) += w;
                state.adj_lifted[u].insert(v);
                state.adj_lifted[v].insert(u);
            }
        }
        for (&(u, v), &(w, serial)) in &state.local {
            if w > 0.0 {
                state.heap.push(HeapEntry {
                    weight: w,
                    serial,
                    u,
                    v,
                });
            }
        }
        state
    }

    /// Next valid positive edge, or None when agglomeration is finished.
    fn pop_contractible(&mut self) -> Option<(usize, usize)> {
        while let Some(entry) = self.heap.pop() {
            let (ru, rv) = (self.uf.find(entry.u), self.uf.find(entry.v));
            if ru == rv {
                continue;
            }
            match self.local.get(&key(ru, rv)) {
                Some(&(w, serial)) if serial == entry.serial && w == entry.weight => {
                    return Some((key(ru, rv).0, key(ru, rv).1));
                }
                _ => continue, // stale
            }
        }
        None
    }

    /// Merge `loser` into `survivor` (both are current representatives).
    fn contract(&mut self, survivor: usize, loser: usize) {
        self.local.remove(&key(survivor, loser));
        self.adj_local[survivor].remove(&loser);
        self.adj_local[loser].remove(&survivor);
        self.uf.union_into(survivor, loser);

        let mut touched: BTreeSet<usize> = BTreeSet::new();

        let local_neighbors: Vec<usize> = self.adj_local[loser].iter().copied().collect();
        for x in local_neighbors {
            let (w, _) = self.local.remove(&key(loser, x)).expect("adjacency in sync");
            self.adj_local[x].remove(&loser);
            let k = key(survivor, x);
            if let Some(entry) = self.local.get_mut(&k) {
                entry.0 += w;
            } else {
                // a lifted edge parallel to the new local edge folds into it
                let folded = self.lifted.remove(&k).unwrap_or(0.0);
                if self.adj_lifted[survivor].remove(&x) {
                    self.adj_lifted[x].remove(&survivor);
                }
                self.local.insert(k, (w + folded, 0));
                self.adj_local[survivor].insert(x);
                self.adj_local[x].insert(survivor);
            }
            touched.insert(x);
        }
        self.adj_local[loser].clear();

        let lifted_neighbors: Vec<usize> = self.adj_lifted[loser].iter().copied().collect();
        for x in lifted_neighbors {
            let w = self.lifted.remove(&key(loser, x)).expect("adjacency in sync");
            self.adj_lifted[x].remove(&loser);
            if x == survivor {
                continue; // became a self-pair
            }
            let k = key(survivor, x);
            if let Some(entry) = self.local.get_mut(&k) {
                entry.0 += w;
                touched.insert(x);
            } else {
                *self.lifted.entry(k).or_insert(0.0) += w;
                self.adj_lifted[survivor].insert(x);
                self.adj_lifted[x].insert(survivor);
            }
        }
        self.adj_lifted[loser].clear();

        // refresh serials of every touched local edge in neighbor order
        for x in touched {
            let k = key(survivor, x);
            let serial = self.next_serial;
            self.next_serial += 1;
            let entry = self.local.get_mut(&k).expect("touched edges are local");
            entry.1 = serial;
            if entry.0 > 0.0 {
                self.heap.push(HeapEntry {
                    weight: entry.0,
                    serial,
                    u: k.0,
                    v: k.1,
                });
            }
        }
    }
}
