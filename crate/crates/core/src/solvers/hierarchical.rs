//! Block-wise hierarchical solving over a spatial embedding.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::graph::{Graph, NodeLabeling};
use crate::objective::{energy, LiftedProblem};

use super::{run_inner, HierarchicalConfig, LevelStats, SolveResult, SolverError};

/// Assign each node to a block of the regular tiling with the given edge
/// lengths, anchored at the bounding-box origin. Returns one block id per
/// node; ids linearize `(bz, by, bx)` in row-major order.
pub fn get_blocks(coordinates: &[[i64; 3]], block_shape: [i64; 3]) -> Vec<usize> {
    assert!(
        block_shape.iter().all(|&s| s >= 1),
        "block shape must be positive"
    );
    assert!(!coordinates.is_empty(), "coordinates must not be empty");
    let mut origin = [i64::MAX; 3];
    let mut max = [i64::MIN; 3];
    for c in coordinates {
        for axis in 0..3 {
            origin[axis] = origin[axis].min(c[axis]);
            max[axis] = max[axis].max(c[axis]);
        }
    }
    let mut blocks_per_axis = [0usize; 3];
    for axis in 0..3 {
        blocks_per_axis[axis] = ((max[axis] - origin[axis]) / block_shape[axis]) as usize + 1;
    }
    coordinates
        .iter()
        .map(|c| {
            let bz = ((c[0] - origin[0]) / block_shape[0]) as usize;
            let by = ((c[1] - origin[1]) / block_shape[1]) as usize;
            let bx = ((c[2] - origin[2]) / block_shape[2]) as usize;
            (bz * blocks_per_axis[1] + by) * blocks_per_axis[2] + bx
        })
        .collect()
}

/// Extract the sub-problem induced by a set of nodes: the induced subgraph
/// with its local weights, plus the lifted edges whose endpoints are both
/// inside. Edges crossing the block boundary are excluded, local and lifted
/// alike. Also returns the map sub-node id -> global node id.
pub fn get_subproblem(problem: &LiftedProblem, block_nodes: &[usize]) -> (LiftedProblem, Vec<usize>) {
    assert!(!block_nodes.is_empty(), "block must contain nodes");
    let mut nodes = block_nodes.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    let mut to_sub = vec![usize::MAX; problem.node_count()];
    for (sub, &global) in nodes.iter().enumerate() {
        to_sub[global] = sub;
    }
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for (i, &(u, v)) in problem.graph().edges().iter().enumerate() {
        if to_sub[u] != usize::MAX && to_sub[v] != usize::MAX {
            edges.push((to_sub[u], to_sub[v]));
            weights.push(problem.local_weights()[i]);
        }
    }
    let mut lifted_edges = Vec::new();
    let mut lifted_weights = Vec::new();
    for (i, &(u, v)) in problem.lifted_edges().iter().enumerate() {
        if to_sub[u] != usize::MAX && to_sub[v] != usize::MAX {
            lifted_edges.push((to_sub[u], to_sub[v]));
            lifted_weights.push(problem.lifted_weights()[i]);
        }
    }
    let coordinates = problem
        .coordinates()
        .map(|coords| nodes.iter().map(|&g| coords[g]).collect());
    let graph = Graph::new(nodes.len(), &edges).expect("induced subgraph is valid");
    let sub = LiftedProblem::new(graph, weights, lifted_edges, lifted_weights, coordinates)
        .expect("induced sub-problem is valid");
    (sub, nodes)
}

/// A solved block: the global node ids of the block and their labeling.
#[derive(Debug, Clone)]
pub struct SubPartition {
    pub nodes: Vec<usize>,
    pub labeling: NodeLabeling,
}

/// Contract every merge decided by the block sub-solutions and rebuild the
/// problem: parallel local weights sum, lifted edges are remapped (self-pairs
/// dropped, pairs now parallel to a local edge folded in, duplicates summed)
/// and each reduced node keeps the coordinate of its smallest old node id.
/// Also returns the old-node -> new-node map.
pub fn reduce_problem(
    problem: &LiftedProblem,
    sub_partitions: &[SubPartition],
) -> Result<(LiftedProblem, Vec<usize>), SolverError> {
    let n = problem.node_count();
    let mut seen = vec![false; n];
    let mut merge_pairs = Vec::new();
    for part in sub_partitions {
        if part.labeling.len() != part.nodes.len() {
            return Err(SolverError::SubPartitionLength {
                expected: part.nodes.len(),
                got: part.labeling.len(),
            });
        }
        for &node in &part.nodes {
            if node >= n {
                return Err(SolverError::NodeOutOfRange(node, n));
            }
            if std::mem::replace(&mut seen[node], true) {
                return Err(SolverError::OverlappingBlocks(node));
            }
        }
        let mut first_of_label: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &node) in part.nodes.iter().enumerate() {
            match first_of_label.entry(part.labeling.label(i)) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(node);
                }
                std::collections::btree_map::Entry::Occupied(e) => {
                    merge_pairs.push((*e.get(), node));
                }
            }
        }
    }

    let contraction = problem.graph().contract(&merge_pairs);
    let reduced_graph = contraction.reduced;
    let node_map = contraction.node_map;

    let mut local_weights = vec![0.0; reduced_graph.edge_count()];
    for (i, mapped) in contraction.edge_map.iter().enumerate() {
        if let Some(j) = mapped {
            local_weights[*j] += problem.local_weights()[i];
        }
    }

    let mut lifted: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, &(u, v)) in problem.lifted_edges().iter().enumerate() {
        let (nu, nv) = (node_map[u], node_map[v]);
        if nu == nv {
            continue;
        }
        let k = (nu.min(nv), nu.max(nv));
        if let Some(e) = reduced_graph.edge_index(k.0, k.1) {
            local_weights[e] += problem.lifted_weights()[i];
        } else {
            *lifted.entry(k).or_insert(0.0) += problem.lifted_weights()[i];
        }
    }
    let (lifted_edges, lifted_weights): (Vec<_>, Vec<_>) = lifted.into_iter().unzip();

    let coordinates = problem.coordinates().map(|coords| {
        let mut new_coords = vec![[0i64; 3]; reduced_graph.node_count()];
        let mut assigned = vec![false; reduced_graph.node_count()];
        for (old, &new) in node_map.iter().enumerate() {
            if !assigned[new] {
                assigned[new] = true;
                new_coords[new] = coords[old];
            }
        }
        new_coords
    });

    let reduced = LiftedProblem::new(
        reduced_graph,
        local_weights,
        lifted_edges,
        lifted_weights,
        coordinates,
    )
    .expect("reduction preserves validity");
    Ok((reduced, node_map))
}

/// Give every node that has a local edge leaving its block a singleton
/// label, so only interior merges survive into the reduction.
fn split_boundary_nodes(
    problem: &LiftedProblem,
    block_of: &[usize],
    block_nodes: &[usize],
    labeling: &NodeLabeling,
) -> NodeLabeling {
    let mut labels = labeling.labels().to_vec();
    let mut next = labeling.n_labels();
    for (sub, &global) in block_nodes.iter().enumerate() {
        let crosses = problem
            .graph()
            .neighbors(global)
            .iter()
            .any(|&(other, _)| block_of[other] != block_of[global]);
        if crosses {
            labels[sub] = next;
            next += 1;
        }
    }
    NodeLabeling::from_labels(&labels)
}

/// Hierarchical lifted multicut: for each level, tile the bounding box into
/// blocks, solve the block sub-problems (in parallel), contract their merges
/// and double the block shape; finally solve the reduced problem and project
/// the labels back to the input graph. Deterministic for any `jobs` value.
pub fn solve_hierarchical(
    problem: &LiftedProblem,
    config: &HierarchicalConfig,
) -> Result<SolveResult, SolverError> {
    if problem.coordinates().is_none() {
        return Err(SolverError::MissingCoordinates);
    }
    if config.n_levels < 1 {
        return Err(SolverError::NoLevels);
    }
    if config.initial_block_shape.iter().any(|&s| s < 1) {
        return Err(SolverError::InvalidBlockShape(config.initial_block_shape));
    }
    if config.jobs < 1 {
        return Err(SolverError::NoJobs);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| SolverError::ThreadPool(e.to_string()))?;

    let mut current = problem.clone();
    // composed map original node -> current reduced node
    let mut to_current: Vec<usize> = (0..problem.node_count()).collect();
    let mut levels = Vec::with_capacity(config.n_levels);
    let mut shape = config.initial_block_shape;

    for level in 0..config.n_levels {
        let block_of = get_blocks(current.coordinates().unwrap(), shape);
        let mut grouped: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (node, &block) in block_of.iter().enumerate() {
            grouped.entry(block).or_default().push(node);
        }
        let blocks: Vec<Vec<usize>> = grouped.into_values().collect();
        let sub_partitions: Vec<SubPartition> = pool.install(|| {
            blocks
                .par_iter()
                .map(|nodes| {
                    let (sub, map) = get_subproblem(&current, nodes);
                    let result =
                        run_inner(config.block_solver, &sub, config.local_search_max_sweeps);
                    let labeling = if config.exclude_boundary {
                        split_boundary_nodes(&current, &block_of, &map, &result.labeling)
                    } else {
                        result.labeling
                    };
                    SubPartition {
                        nodes: map,
                        labeling,
                    }
                })
                .collect()
        });
        let (reduced, node_map) = reduce_problem(&current, &sub_partitions)?;
        for entry in to_current.iter_mut() {
            *entry = node_map[*entry];
        }
        current = reduced;
        levels.push(LevelStats {
            level: level + 1,
            node_count: current.node_count(),
            local_edge_count: current.graph().edge_count(),
            lifted_edge_count: current.lifted_edges().len(),
        });
        for s in shape.iter_mut() {
            *s *= 2;
        }
    }

    let final_result = run_inner(config.final_solver, &current, config.local_search_max_sweeps);
    let labels: Vec<usize> = to_current
        .iter()
        .map(|&c| final_result.labeling.label(c))
        .collect();
    let labeling = NodeLabeling::from_labels(&labels);
    let e = energy(problem, &labeling);
    Ok(SolveResult {
        labeling,
        energy: e,
        levels,
    })
}
