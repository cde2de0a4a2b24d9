//! Deterministic planted-partition benchmark generator.
//!
//! Nodes live on a 3D grid with 6-neighborhood local edges. Ground truth is
//! a graph-distance Voronoi partition around randomly chosen seed nodes, so
//! every planted object is connected. Each edge draws a cut probability from
//! a boundary distribution if it crosses the ground truth and from an
//! interior distribution otherwise; with probability `boundary_noise` the
//! wrong distribution is used. Weights are the log-odds of those
//! probabilities. A sparse attribution copies the ground-truth label of a
//! configurable fraction of nodes, corrupted with a configurable error rate.
//!
//! One seeded generator stream is used in a fixed phase order (object seeds,
//! then edge probabilities in edge-index order, then attribution in node
//! order), which makes instances bit-reproducible.

use std::collections::VecDeque;

use rand::prelude::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::graph::{Graph, NodeLabeling};
use crate::lifting::Attribution;
use crate::objective::{prob_to_weight, LiftedProblem};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("grid dimensions must all be at least 1, got {0:?}")]
    EmptyGrid([usize; 3]),
    #[error("need at least 2 true objects, got {0}")]
    TooFewObjects(usize),
    #[error("{0} true objects exceed the {1} grid nodes")]
    TooManyObjects(usize, usize),
    #[error("probability {name} = {value} outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    /// Grid extents `(z, y, x)`.
    pub grid_shape: [usize; 3],
    pub n_true_objects: usize,
    /// Probability that an edge's cut probability is drawn from the wrong
    /// class distribution.
    pub boundary_noise: f64,
    /// Fraction of nodes receiving an attribution.
    pub attribution_coverage: f64,
    /// Probability that an attributed node gets a wrong label.
    pub attribution_error: f64,
    pub seed: u64,
}

impl PlantedConfig {
    pub fn new(grid_shape: [usize; 3], n_true_objects: usize, seed: u64) -> Self {
        PlantedConfig {
            grid_shape,
            n_true_objects,
            boundary_noise: 0.0,
            attribution_coverage: 0.0,
            attribution_error: 0.0,
            seed,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.grid_shape.contains(&0) {
            return Err(SynthError::EmptyGrid(self.grid_shape));
        }
        if self.n_true_objects < 2 {
            return Err(SynthError::TooFewObjects(self.n_true_objects));
        }
        let nodes = self.grid_shape.iter().product::<usize>();
        if self.n_true_objects > nodes {
            return Err(SynthError::TooManyObjects(self.n_true_objects, nodes));
        }
        for (name, value) in [
            ("boundary_noise", self.boundary_noise),
            ("attribution_coverage", self.attribution_coverage),
            ("attribution_error", self.attribution_error),
        ] {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(SynthError::InvalidProbability { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PlantedInstance {
    /// Local weights only; lifted edges are the caller's business.
    pub problem: LiftedProblem,
    pub ground_truth: NodeLabeling,
    pub attribution: Attribution,
}

const INTERIOR_MEAN: f64 = 0.2;
const BOUNDARY_MEAN: f64 = 0.8;
const PROB_SIGMA: f64 = 0.1;
const PROB_CLAMP: f64 = 1e-6;

/// Cut probability for one edge: a Gaussian around the class mean,
/// rejection-sampled into the class's half of the unit interval so interior
/// edges are always attractive and boundary edges always repulsive.
fn sample_cut_probability(rng: &mut ChaCha8Rng, boundary: bool) -> f64 {
    let (mean, lo, hi) = if boundary {
        (BOUNDARY_MEAN, 0.5, 1.0)
    } else {
        (INTERIOR_MEAN, 0.0, 0.5)
    };
    let normal = Normal::new(mean, PROB_SIGMA).expect("valid sigma");
    loop {
        let p = normal.sample(rng);
        if p > lo && p < hi {
            return p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        }
    }
}

/// Generate a planted instance; identical configs produce identical
/// instances.
pub fn gen_planted(config: &PlantedConfig) -> Result<PlantedInstance, SynthError> {
    config.validate()?;
    let [nz, ny, nx] = config.grid_shape;
    let n = nz * ny * nx;
    let node_id = |z: usize, y: usize, x: usize| (z * ny + y) * nx + x;

    let mut edges = Vec::new();
    let mut coordinates = Vec::with_capacity(n);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                coordinates.push([z as i64, y as i64, x as i64]);
                if z + 1 < nz {
                    edges.push((node_id(z, y, x), node_id(z + 1, y, x)));
                }
                if y + 1 < ny {
                    edges.push((node_id(z, y, x), node_id(z, y + 1, x)));
                }
                if x + 1 < nx {
                    edges.push((node_id(z, y, x), node_id(z, y, x + 1)));
                }
            }
        }
    }
    let graph = Graph::new(n, &edges).expect("grid graph is valid");

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // phase 1: object seeds and graph-distance Voronoi ground truth
    let seeds = rand::seq::index::sample(&mut rng, n, config.n_true_objects).into_vec();
    let mut raw_labels = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for (label, &seed_node) in seeds.iter().enumerate() {
        raw_labels[seed_node] = label;
        queue.push_back(seed_node);
    }
    while let Some(u) = queue.pop_front() {
        for &(v, _) in graph.neighbors(u) {
            if raw_labels[v] == usize::MAX {
                raw_labels[v] = raw_labels[u];
                queue.push_back(v);
            }
        }
    }
    let ground_truth = NodeLabeling::from_labels(&raw_labels);

    // phase 2: edge cut probabilities and weights, in edge-index order
    let mut local_weights = Vec::with_capacity(graph.edge_count());
    for &(u, v) in graph.edges() {
        let boundary = ground_truth.label(u) != ground_truth.label(v);
        let flipped = rng.random_bool(config.boundary_noise);
        let p = sample_cut_probability(&mut rng, boundary != flipped);
        local_weights.push(prob_to_weight(p).expect("sampled probability is finite"));
    }

    // phase 3: sparse attribution, in node order
    let mut attribution = Attribution::new();
    let labels: Vec<usize> = (0..config.n_true_objects).collect();
    for node in 0..n {
        if !rng.random_bool(config.attribution_coverage) {
            continue;
        }
        let truth = ground_truth.label(node);
        let class = if rng.random_bool(config.attribution_error) {
            let wrong: Vec<usize> = labels.iter().copied().filter(|&l| l != truth).collect();
            *wrong.choose(&mut rng).expect("at least 2 objects")
        } else {
            truth
        };
        attribution.insert(node, class);
    }

    let problem = LiftedProblem::local_only(graph, local_weights, Some(coordinates))
        .expect("generated instance is valid");
    Ok(PlantedInstance {
        problem,
        ground_truth,
        attribution,
    })
}
