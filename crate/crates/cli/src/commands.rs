use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use lmc_core::format::{
    fmt_f64, parse_attribution, parse_labeling, parse_paths, parse_problem,
    serialize_attribution, serialize_labeling, serialize_problem,
};
use lmc_core::graph::NodeLabeling;
use lmc_core::lifting::{
    apply_lifted_set, lift_class_repulsion, lift_components, lift_dense, lift_paths,
    LiftedEdgeSet, PathEvidence,
};
use lmc_core::metrics::{report, LogBase};
use lmc_core::objective::LiftedProblem;
use lmc_core::solvers::{
    get_subproblem, solve_exact, solve_gaec, solve_gaec_local_search, solve_hierarchical,
    HierarchicalConfig, InnerSolver, SolveResult,
};
use lmc_core::synthgen::{gen_planted, PlantedConfig};

use crate::{
    AppError, EvalArgs, GenArgs, InnerArg, LiftArgs, LiftMode, LogBaseArg, ResolveArgs,
    ScopeArg, SolveArgs, SolverArg,
};

type CmdResult = Result<(), AppError>;

fn data(message: impl std::fmt::Display) -> AppError {
    AppError::Data(message.to_string())
}

fn usage(message: impl std::fmt::Display) -> AppError {
    AppError::Usage(message.to_string())
}

fn read_file(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

/// Write via a temp file and rename so failures never leave partial output.
fn write_atomic(path: &Path, content: &str) -> CmdResult {
    let file_name = path
        .file_name()
        .ok_or_else(|| usage(format!("{}: not a file path", path.display())))?;
    let tmp = path.with_file_name(format!("{}.tmp", file_name.to_string_lossy()));
    fs::write(&tmp, content).map_err(|e| data(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| data(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenConfigFile {
    /// Grid extents `[z, y, x]`.
    grid: [usize; 3],
    objects: usize,
    #[serde(default)]
    boundary_noise: f64,
    #[serde(default)]
    attribution_coverage: f64,
    #[serde(default)]
    attribution_error: f64,
    #[serde(default)]
    seed: u64,
}

pub fn gen(args: GenArgs) -> CmdResult {
    let raw = read_file(&args.config)?;
    let file: GenConfigFile = toml::from_str(&raw)
        .map_err(|e| data(format!("{}: {e}", args.config.display())))?;
    let config = PlantedConfig {
        grid_shape: file.grid,
        n_true_objects: file.objects,
        boundary_noise: file.boundary_noise,
        attribution_coverage: file.attribution_coverage,
        attribution_error: file.attribution_error,
        seed: file.seed,
    };
    let instance = gen_planted(&config).map_err(data)?;
    let problem_text = serialize_problem(&instance.problem);
    let gt_text = serialize_labeling(&instance.ground_truth);
    write_atomic(&args.out, &problem_text)?;
    write_atomic(&args.gt, &gt_text)?;
    if let Some(path) = &args.attribution {
        write_atomic(path, &serialize_attribution(&instance.attribution))?;
    }
    println!("nodes={}", instance.problem.node_count());
    println!("local_edges={}", instance.problem.graph().edge_count());
    println!("objects={}", instance.ground_truth.n_labels());
    println!("attributed={}", instance.attribution.len());
    Ok(())
}

fn require<T>(value: Option<T>, flag: &str, mode: &str) -> Result<T, AppError> {
    value.ok_or_else(|| usage(format!("--mode {mode} requires {flag}")))
}

pub fn lift(args: LiftArgs) -> CmdResult {
    let problem = parse_problem(&read_file(&args.problem)?).map_err(data)?;
    let mut set: LiftedEdgeSet = match args.mode {
        LiftMode::Class => {
            let path = require(args.attribution, "--attribution", "class")?;
            let weight = require(args.weight, "--weight", "class")?;
            let attribution = parse_attribution(&read_file(&path)?).map_err(data)?;
            lift_class_repulsion(problem.graph(), &attribution, weight, args.budget, args.seed)
                .map_err(data)?
        }
        LiftMode::Components => {
            let path = require(args.attribution, "--attribution", "components")?;
            let attractive = require(args.attractive, "--attractive", "components")?;
            let repulsive = require(args.repulsive, "--repulsive", "components")?;
            let attribution = parse_attribution(&read_file(&path)?).map_err(data)?;
            lift_components(
                problem.graph(),
                &attribution,
                attractive,
                repulsive,
                args.budget,
                args.seed,
            )
            .map_err(data)?
        }
        LiftMode::Paths => {
            let paths_file = require(args.paths, "--paths", "paths")?;
            let threshold = require(args.threshold, "--threshold", "paths")?;
            let labeling_file = require(args.labeling, "--labeling", "paths")?;
            let evidence = parse_paths(&read_file(&paths_file)?).map_err(data)?;
            let labeling = parse_labeling(&read_file(&labeling_file)?).map_err(data)?;
            check_labeling_len(&labeling, &problem)?;
            lift_paths(&evidence, threshold, &labeling).map_err(data)?
        }
        LiftMode::Dense => {
            let max_distance = require(args.max_distance, "--max-distance", "dense")?;
            if max_distance < 2 {
                return Err(usage("--max-distance must be at least 2"));
            }
            let candidates = problem.graph().distance_pairs(max_distance);
            let weights: Vec<f64> = match (&args.weights, args.weight) {
                (Some(path), None) => parse_weight_lines(&read_file(path)?)?,
                (None, Some(w)) => vec![w; candidates.len()],
                _ => {
                    return Err(usage(
                        "--mode dense requires exactly one of --weights or --weight",
                    ))
                }
            };
            lift_dense(problem.graph(), max_distance, &weights).map_err(data)?
        }
    };
    set.mark_parallel(problem.graph());
    let merged = apply_lifted_set(&problem, &set).map_err(data)?;
    write_atomic(&args.out, &serialize_problem(&merged))?;
    println!("added={}", set.len());
    println!("lifted_total={}", merged.lifted_edges().len());
    Ok(())
}

fn parse_weight_lines(text: &str) -> Result<Vec<f64>, AppError> {
    let mut weights = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let w: f64 = line
            .parse()
            .map_err(|_| data(format!("line {}: invalid weight {line:?}", i + 1)))?;
        if !w.is_finite() {
            return Err(data(format!("line {}: non-finite weight", i + 1)));
        }
        weights.push(w);
    }
    Ok(weights)
}

fn check_labeling_len(labeling: &NodeLabeling, problem: &LiftedProblem) -> CmdResult {
    if labeling.len() != problem.node_count() {
        return Err(data(format!(
            "labeling covers {} nodes, problem has {}",
            labeling.len(),
            problem.node_count()
        )));
    }
    Ok(())
}

impl From<InnerArg> for InnerSolver {
    fn from(arg: InnerArg) -> Self {
        match arg {
            InnerArg::Gaec => InnerSolver::Gaec,
            InnerArg::GaecLs => InnerSolver::GaecLocalSearch,
        }
    }
}

fn run_solver(
    problem: &LiftedProblem,
    solver: SolverArg,
    args: &SolveArgs,
) -> Result<SolveResult, AppError> {
    match solver {
        SolverArg::Exact => {
            if problem.node_count() > args.exact_max_nodes {
                return Err(data(format!(
                    "problem has {} nodes, exact solving is capped at {}",
                    problem.node_count(),
                    args.exact_max_nodes
                )));
            }
            solve_exact(problem).map_err(data)
        }
        SolverArg::Gaec => Ok(solve_gaec(problem)),
        SolverArg::GaecLs => Ok(solve_gaec_local_search(problem, args.max_sweeps)),
        SolverArg::Hier => {
            let mut config = match args.block {
                Some(shape) => HierarchicalConfig::new(args.levels, shape),
                None => {
                    let mut c = HierarchicalConfig::for_problem(problem).map_err(data)?;
                    c.n_levels = args.levels;
                    c
                }
            };
            config.jobs = args.jobs;
            config.local_search_max_sweeps = args.max_sweeps;
            config.block_solver = args.inner_solver.into();
            config.final_solver = args.final_solver.unwrap_or(args.inner_solver).into();
            config.exclude_boundary = args.exclude_boundary;
            solve_hierarchical(problem, &config).map_err(data)
        }
    }
}

pub fn solve(args: SolveArgs) -> CmdResult {
    let problem = parse_problem(&read_file(&args.problem)?).map_err(data)?;
    let result = run_solver(&problem, args.solver, &args)?;
    write_atomic(&args.out, &serialize_labeling(&result.labeling))?;
    let solver_name = match args.solver {
        SolverArg::Exact => "exact",
        SolverArg::Gaec => "gaec",
        SolverArg::GaecLs => "gaec-ls",
        SolverArg::Hier => "hier",
    };
    println!("solver={solver_name}");
    println!("nodes={}", problem.node_count());
    println!("local_edges={}", problem.graph().edge_count());
    println!("lifted_edges={}", problem.lifted_edges().len());
    for level in &result.levels {
        println!("level{}_nodes={}", level.level, level.node_count);
        println!("level{}_local_edges={}", level.level, level.local_edge_count);
        println!("level{}_lifted_edges={}", level.level, level.lifted_edge_count);
    }
    println!("components={}", result.labeling.n_labels());
    println!("energy={}", fmt_f64(result.energy));
    Ok(())
}

pub fn eval(args: EvalArgs) -> CmdResult {
    let gt = parse_labeling(&read_file(&args.gt)?).map_err(data)?;
    let seg = parse_labeling(&read_file(&args.seg)?).map_err(data)?;
    let base = match args.log_base {
        LogBaseArg::E => LogBase::E,
        LogBaseArg::Two => LogBase::Two,
    };
    let metrics = report(&gt, &seg, base).map_err(data)?;
    println!("vi_split={}", fmt_f64(metrics.vi_split));
    println!("vi_merge={}", fmt_f64(metrics.vi_merge));
    println!("rand_error={}", fmt_f64(metrics.rand_error));
    Ok(())
}

pub fn resolve(args: ResolveArgs) -> CmdResult {
    let problem = parse_problem(&read_file(&args.problem)?).map_err(data)?;
    let labeling = parse_labeling(&read_file(&args.labeling)?).map_err(data)?;
    check_labeling_len(&labeling, &problem)?;
    let evidence = parse_paths(&read_file(&args.paths)?).map_err(data)?;

    // validates the threshold and that no path crosses object boundaries
    let global_set = lift_paths(&evidence, args.threshold, &labeling).map_err(data)?;
    let flagged: BTreeSet<usize> = evidence
        .iter()
        .filter(|ev| ev.merge_probability() > args.threshold)
        .map(|ev| labeling.label(ev.path()[0]))
        .collect();
    println!("scope={}", match args.scope {
        ScopeArg::Object => "object",
        ScopeArg::Global => "global",
    });
    println!("flagged_objects={}", flagged.len());

    let solve_args = SolveArgs {
        problem: args.problem.clone(),
        solver: args.solver,
        out: args.out.clone(),
        levels: 2,
        block: None,
        jobs: 1,
        seed: 0,
        max_sweeps: args.max_sweeps,
        exact_max_nodes: 12,
        inner_solver: InnerArg::GaecLs,
        final_solver: None,
        exclude_boundary: false,
    };

    let resolved = match args.scope {
        ScopeArg::Global => {
            let mut set = global_set;
            set.mark_parallel(problem.graph());
            let merged = apply_lifted_set(&problem, &set).map_err(data)?;
            let result = run_solver(&merged, args.solver, &solve_args)?;
            println!("energy={}", fmt_f64(result.energy));
            result.labeling
        }
        ScopeArg::Object => {
            let mut labels: Vec<usize> = labeling.labels().to_vec();
            let mut next_label = labeling.n_labels();
            for &object in &flagged {
                let nodes = labeling.members(object);
                let (sub, node_map) = get_subproblem(&problem, &nodes);
                let mut to_sub = std::collections::HashMap::new();
                for (sub_id, &global) in node_map.iter().enumerate() {
                    to_sub.insert(global, sub_id);
                }
                let sub_evidence: Vec<PathEvidence> = evidence
                    .iter()
                    .filter(|ev| labeling.label(ev.path()[0]) == object)
                    .map(|ev| {
                        let remapped: Vec<usize> =
                            ev.path().iter().map(|n| to_sub[n]).collect();
                        PathEvidence::new(remapped, ev.merge_probability())
                            .expect("remapping preserves validity")
                    })
                    .collect();
                let sub_objects = NodeLabeling::from_labels(&vec![0; sub.node_count()]);
                let mut sub_set =
                    lift_paths(&sub_evidence, args.threshold, &sub_objects).map_err(data)?;
                sub_set.mark_parallel(sub.graph());
                let sub_problem = apply_lifted_set(&sub, &sub_set).map_err(data)?;
                let result = run_solver(&sub_problem, args.solver, &solve_args)?;
                for (sub_id, &global) in node_map.iter().enumerate() {
                    labels[global] = next_label + result.labeling.label(sub_id);
                }
                next_label += result.labeling.n_labels();
            }
            NodeLabeling::from_labels(&labels)
        }
    };
    write_atomic(&args.out, &serialize_labeling(&resolved))?;
    println!("components={}", resolved.n_labels());
    Ok(())
}
