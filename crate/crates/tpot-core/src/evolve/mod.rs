//! The genetic-programming engine: variation operators, elitist double
//! tournament selection with parsimony pressure, NSGA-II Pareto selection,
//! the generational loop and the random-search control.

pub mod nsga;

pub use nsga::{crowding_distances, dominates, fast_nondominated_sort};

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{stratified_split, Dataset};
use crate::ops::{sample_params, OperatorKind};
use crate::pipeline::{
    evaluate_pipeline, random_pipeline_for, FitnessRecord, Pipeline, PipelineNode,
    INTERNAL_TRAIN_FRACTION,
};
use crate::rng::{derive_seed, stream_rng};

const STREAM_EVAL: u64 = 1;
const STREAM_INIT: u64 = 2;
const STREAM_VARIATION: u64 = 3;

/// Initial population uses small grow trees regardless of the search cap.
const INIT_MAX_DEPTH: usize = 3;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("setup failed before any evaluation: {0}")]
    Setup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    Standard,
    Pareto,
    RandomSearch,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpConfig {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub selection_mode: SelectionMode,
    pub elitism_fraction: f64,
    /// Probability that the smaller candidate wins the final 2-way size
    /// contest of the double tournament.
    pub parsimony_probability: f64,
    pub seed: u64,
    pub max_depth: usize,
    pub max_operators: usize,
    pub eval_budget_millis: u64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 100,
            mutation_rate: 0.90,
            crossover_rate: 0.05,
            selection_mode: SelectionMode::Standard,
            elitism_fraction: 0.10,
            parsimony_probability: 0.7,
            seed: 0,
            max_depth: 10,
            max_operators: 20,
            eval_budget_millis: 20_000,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<(), EvolveError> {
        if self.mutation_rate + self.crossover_rate > 1.0 + 1e-12 {
            return Err(EvolveError::Config(
                "mutation_rate + crossover_rate must not exceed 1".into(),
            ));
        }
        if !(self.elitism_fraction > 0.0 && self.elitism_fraction < 1.0) {
            return Err(EvolveError::Config("elitism_fraction must lie in (0, 1)".into()));
        }
        if self.population_size == 0 {
            return Err(EvolveError::Config("population_size must be positive".into()));
        }
        if self.max_depth == 0 || self.max_operators == 0 {
            return Err(EvolveError::Config("depth and operator caps must be positive".into()));
        }
        Ok(())
    }

    fn elite_count(&self) -> usize {
        let n = self.population_size;
        ((self.elitism_fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1))
    }
}

#[derive(Debug, Clone)]
pub struct Individual {
    pub pipeline: Pipeline,
    pub fitness: Option<FitnessRecord>,
    /// Monotonic creation stamp; earlier discovery wins final ties.
    pub discovered: u64,
}

/// Strict "ranks better" total order: succeeded before failed, then higher
/// accuracy, then smaller size, then earlier discovery.
pub fn ranks_better(a: &Individual, b: &Individual) -> bool {
    let fa = a.fitness.as_ref().expect("individual evaluated");
    let fb = b.fitness.as_ref().expect("individual evaluated");
    if fa.failed != fb.failed {
        return fb.failed;
    }
    if fa.balanced_accuracy != fb.balanced_accuracy {
        return fa.balanced_accuracy > fb.balanced_accuracy;
    }
    if fa.size != fb.size {
        return fa.size < fb.size;
    }
    a.discovered < b.discovered
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_accuracy: f64,
    pub median_accuracy: f64,
    pub median_size: f64,
    pub evaluations: usize,
    pub elapsed_millis: u64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Individual,
    pub history: Vec<GenerationStats>,
    pub total_evaluations: usize,
    /// Final-population front 0 (Pareto mode only, empty otherwise).
    pub pareto_front: Vec<Individual>,
    pub seed: u64,
}

// -------------------------------------------------------------------------
// Tree surgery (preorder indexing over all nodes, leaves included)
// -------------------------------------------------------------------------

fn node_count(node: &PipelineNode) -> usize {
    match node {
        PipelineNode::Leaf => 1,
        PipelineNode::Transform { child, .. } | PipelineNode::Model { child, .. } => {
            1 + node_count(child)
        }
        PipelineNode::Combine { left, right } => 1 + node_count(left) + node_count(right),
    }
}

fn subtree_at<'a>(node: &'a PipelineNode, target: usize, counter: &mut usize) -> Option<&'a PipelineNode> {
    if *counter == target {
        return Some(node);
    }
    *counter += 1;
    match node {
        PipelineNode::Leaf => None,
        PipelineNode::Transform { child, .. } | PipelineNode::Model { child, .. } => {
            subtree_at(child, target, counter)
        }
        PipelineNode::Combine { left, right } => {
            subtree_at(left, target, counter).or_else(|| subtree_at(right, target, counter))
        }
    }
}

fn get_subtree(root: &PipelineNode, target: usize) -> &PipelineNode {
    let mut counter = 0;
    subtree_at(root, target, &mut counter).expect("preorder index in range")
}

/// Functional rebuild with the subtree at preorder index `target` replaced by
/// `f(subtree)`.
fn replace_at(
    node: &PipelineNode,
    target: usize,
    counter: &mut usize,
    f: &mut dyn FnMut(&PipelineNode) -> PipelineNode,
) -> PipelineNode {
    if *counter == target {
        // consume the whole replaced subtree's preorder range so sibling
        // indices stay aligned
        *counter += node_count(node);
        return f(node);
    }
    *counter += 1;
    match node {
        PipelineNode::Leaf => PipelineNode::Leaf,
        PipelineNode::Transform { kind, params, child } => PipelineNode::Transform {
            kind: *kind,
            params: params.clone(),
            child: Box::new(replace_at(child, target, counter, f)),
        },
        PipelineNode::Model { kind, params, child } => PipelineNode::Model {
            kind: *kind,
            params: params.clone(),
            child: Box::new(replace_at(child, target, counter, f)),
        },
        PipelineNode::Combine { left, right } => {
            let new_left = replace_at(left, target, counter, f);
            let new_right = replace_at(right, target, counter, f);
            PipelineNode::Combine { left: Box::new(new_left), right: Box::new(new_right) }
        }
    }
}

fn rebuild_with(root: &PipelineNode, target: usize, mut f: impl FnMut(&PipelineNode) -> PipelineNode) -> PipelineNode {
    let mut counter = 0;
    replace_at(root, target, &mut counter, &mut f)
}

fn indices_where(root: &PipelineNode, pred: &dyn Fn(&PipelineNode) -> bool) -> Vec<usize> {
    fn walk(
        node: &PipelineNode,
        counter: &mut usize,
        pred: &dyn Fn(&PipelineNode) -> bool,
        out: &mut Vec<usize>,
    ) {
        if pred(node) {
            out.push(*counter);
        }
        *counter += 1;
        match node {
            PipelineNode::Leaf => {}
            PipelineNode::Transform { child, .. } | PipelineNode::Model { child, .. } => {
                walk(child, counter, pred, out)
            }
            PipelineNode::Combine { left, right } => {
                walk(left, counter, pred, out);
                walk(right, counter, pred, out);
            }
        }
    }
    let mut out = Vec::new();
    let mut counter = 0;
    walk(root, &mut counter, pred, &mut out);
    out
}

// -------------------------------------------------------------------------
// Variation
// -------------------------------------------------------------------------

fn same_category_kinds(kind: OperatorKind) -> Vec<OperatorKind> {
    OperatorKind::ALL.into_iter().filter(|k| k.category() == kind.category()).collect()
}

fn point_mutation<R: Rng>(p: &Pipeline, rng: &mut R) -> Pipeline {
    let targets = indices_where(&p.root, &|n| {
        matches!(n, PipelineNode::Transform { .. } | PipelineNode::Model { .. })
    });
    let target = targets[rng.random_range(0..targets.len())];
    let resample_only = rng.random_bool(0.5);
    let root = rebuild_with(&p.root, target, |node| match node {
        PipelineNode::Transform { kind, child, .. } => {
            let new_kind = if resample_only {
                *kind
            } else {
                let pool = same_category_kinds(*kind);
                pool[rng.random_range(0..pool.len())]
            };
            PipelineNode::Transform {
                kind: new_kind,
                params: sample_params(new_kind, rng),
                child: child.clone(),
            }
        }
        PipelineNode::Model { kind, child, .. } => {
            let new_kind = if resample_only {
                *kind
            } else {
                let pool = same_category_kinds(*kind);
                pool[rng.random_range(0..pool.len())]
            };
            PipelineNode::Model {
                kind: new_kind,
                params: sample_params(new_kind, rng),
                child: child.clone(),
            }
        }
        other => other.clone(),
    });
    Pipeline { root }
}

fn try_insert<R: Rng>(
    p: &Pipeline,
    rng: &mut R,
    max_depth: usize,
    max_operators: usize,
) -> Option<Pipeline> {
    if p.size() + 1 > max_operators {
        return None;
    }
    let candidate = if rng.random_bool(0.5) {
        // replace a leaf with a combine of two leaves
        let leaves = indices_where(&p.root, &|n| matches!(n, PipelineNode::Leaf));
        let target = leaves[rng.random_range(0..leaves.len())];
        let root = rebuild_with(&p.root, target, |_| PipelineNode::Combine {
            left: Box::new(PipelineNode::Leaf),
            right: Box::new(PipelineNode::Leaf),
        });
        Pipeline { root }
    } else {
        // insert a non-model operator above a uniformly chosen non-root subtree
        let total = node_count(&p.root);
        if total <= 1 {
            return None;
        }
        let target = rng.random_range(1..total);
        let transforms: Vec<OperatorKind> = OperatorKind::transforms().collect();
        let kind = transforms[rng.random_range(0..transforms.len())];
        let params = sample_params(kind, rng);
        let root = rebuild_with(&p.root, target, |sub| PipelineNode::Transform {
            kind,
            params: params.clone(),
            child: Box::new(sub.clone()),
        });
        Pipeline { root }
    };
    if candidate.validate(max_depth, max_operators).is_empty() {
        Some(candidate)
    } else {
        None
    }
}

fn try_shrink<R: Rng>(p: &Pipeline, rng: &mut R) -> Option<Pipeline> {
    let targets = indices_where(&p.root, &|n| !matches!(n, PipelineNode::Leaf));
    // skip the root (index 0): splice internal nodes only
    let internal: Vec<usize> = targets.into_iter().filter(|&i| i != 0).collect();
    if internal.is_empty() {
        return None;
    }
    let target = internal[rng.random_range(0..internal.len())];
    let keep_left = rng.random_bool(0.5);
    let root = rebuild_with(&p.root, target, |node| match node {
        PipelineNode::Transform { child, .. } | PipelineNode::Model { child, .. } => {
            (**child).clone()
        }
        PipelineNode::Combine { left, right } => {
            if keep_left {
                (**left).clone()
            } else {
                (**right).clone()
            }
        }
        other => other.clone(),
    });
    Some(Pipeline { root })
}

/// Point, insert or shrink with 1/3 chance each; inapplicable variants fall
/// through to point mutation. The result always validates.
pub fn mutate<R: Rng>(
    p: &Pipeline,
    rng: &mut R,
    max_depth: usize,
    max_operators: usize,
) -> Pipeline {
    let variant = rng.random_range(0..3u8);
    let attempted = match variant {
        1 => try_insert(p, rng, max_depth, max_operators),
        2 => try_shrink(p, rng),
        _ => None,
    };
    attempted.unwrap_or_else(|| point_mutation(p, rng))
}

/// One-point subtree exchange between category-compatible nodes
/// (model <-> model, non-model <-> non-model). Returns one child; falls back
/// to a copy of `a` when no cap-respecting exchange is found.
pub fn crossover<R: Rng>(
    a: &Pipeline,
    b: &Pipeline,
    rng: &mut R,
    max_depth: usize,
    max_operators: usize,
) -> Pipeline {
    for _ in 0..8 {
        let total_a = node_count(&a.root);
        let target = rng.random_range(0..total_a);
        let want_model = matches!(get_subtree(&a.root, target), PipelineNode::Model { .. });
        let donors = indices_where(&b.root, &|n| {
            matches!(n, PipelineNode::Model { .. }) == want_model
        });
        if donors.is_empty() {
            break;
        }
        let donor = donors[rng.random_range(0..donors.len())];
        let graft = get_subtree(&b.root, donor).clone();
        let root = rebuild_with(&a.root, target, |_| graft.clone());
        let candidate = Pipeline { root };
        if candidate.validate(max_depth, max_operators).is_empty() {
            return candidate;
        }
    }
    a.clone()
}

// -------------------------------------------------------------------------
// Selection
// -------------------------------------------------------------------------

fn not_failed(ind: &Individual) -> bool {
    !ind.fitness.as_ref().expect("evaluated").failed
}

fn accuracy_of(ind: &Individual) -> f64 {
    ind.fitness.as_ref().expect("evaluated").balanced_accuracy
}

fn size_of(ind: &Individual) -> usize {
    ind.fitness.as_ref().expect("evaluated").size
}

/// Strictly better by (succeeded, accuracy) alone; ties are NOT broken here,
/// so tournament ties resolve to the earlier draw.
fn strictly_fitter(a: &Individual, b: &Individual) -> bool {
    match (not_failed(a), not_failed(b)) {
        (true, false) => true,
        (false, true) => false,
        _ => accuracy_of(a) > accuracy_of(b),
    }
}

fn tournament3<R: Rng>(pop: &[Individual], rng: &mut R) -> usize {
    let mut winner = rng.random_range(0..pop.len());
    for _ in 0..2 {
        let challenger = rng.random_range(0..pop.len());
        if strictly_fitter(&pop[challenger], &pop[winner]) {
            winner = challenger;
        }
    }
    winner
}

/// Elitist double tournament: top elites copied unchanged; each remaining
/// slot holds the winner of a 2-way parsimony contest between two 3-way
/// accuracy tournament picks (smaller wins with `parsimony_probability`).
pub fn select_standard<R: Rng>(
    pop: &[Individual],
    rng: &mut R,
    cfg: &GpConfig,
) -> Vec<Individual> {
    let n = pop.len();
    let elites = cfg.elite_count().min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        if ranks_better(&pop[a], &pop[b]) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    let mut out: Vec<Individual> = order.iter().take(elites).map(|&i| pop[i].clone()).collect();
    while out.len() < n {
        let c1 = tournament3(pop, rng);
        let c2 = tournament3(pop, rng);
        let winner = match (not_failed(&pop[c1]), not_failed(&pop[c2])) {
            (true, false) => c1,
            (false, true) => c2,
            _ => {
                if rng.random_bool(cfg.parsimony_probability) {
                    match size_of(&pop[c1]).cmp(&size_of(&pop[c2])) {
                        std::cmp::Ordering::Less => c1,
                        std::cmp::Ordering::Greater => c2,
                        std::cmp::Ordering::Equal => {
                            if strictly_fitter(&pop[c2], &pop[c1]) {
                                c2
                            } else {
                                c1
                            }
                        }
                    }
                } else if strictly_fitter(&pop[c2], &pop[c1]) {
                    c2
                } else {
                    c1
                }
            }
        };
        out.push(pop[winner].clone());
    }
    out
}

/// Rank by (front, descending crowding distance); failed individuals rank
/// after every succeeded one. Top 20% replicated cyclically to refill the
/// population.
pub fn select_pareto<R: Rng>(pop: &[Individual], _rng: &mut R, _cfg: &GpConfig) -> Vec<Individual> {
    let n = pop.len();
    let succeeded: Vec<usize> = (0..n).filter(|&i| not_failed(&pop[i])).collect();
    let failed: Vec<usize> = (0..n).filter(|&i| !not_failed(&pop[i])).collect();
    let points: Vec<(f64, usize)> =
        succeeded.iter().map(|&i| (accuracy_of(&pop[i]), size_of(&pop[i]))).collect();
    let mut ranked: Vec<usize> = Vec::with_capacity(n);
    for front in fast_nondominated_sort(&points) {
        let dist = crowding_distances(&points, &front);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| {
            dist[b].partial_cmp(&dist[a]).unwrap().then(front[a].cmp(&front[b]))
        });
        ranked.extend(order.into_iter().map(|w| succeeded[front[w]]));
    }
    let mut failed_sorted = failed;
    failed_sorted.sort_by_key(|&i| (size_of(&pop[i]), pop[i].discovered));
    ranked.extend(failed_sorted);

    let parents = ((n as f64) * 0.2).ceil() as usize;
    let parents = parents.clamp(1, n);
    (0..n).map(|slot| pop[ranked[slot % parents]].clone()).collect()
}

// -------------------------------------------------------------------------
// Runs
// -------------------------------------------------------------------------

fn evaluate_population(
    pop: &mut [Individual],
    data: &Dataset,
    eval_seed: u64,
    budget_millis: u64,
) -> usize {
    let jobs: Vec<usize> =
        pop.iter().enumerate().filter(|(_, i)| i.fitness.is_none()).map(|(j, _)| j).collect();
    let snapshot: &[Individual] = pop;
    let records: Vec<(usize, FitnessRecord)> = jobs
        .par_iter()
        .map(|&j| (j, evaluate_pipeline(&snapshot[j].pipeline, data, eval_seed, budget_millis)))
        .collect();
    let fresh = records.len();
    for (j, r) in records {
        pop[j].fitness = Some(r);
    }
    fresh
}

fn population_stats(
    pop: &[Individual],
    generation: usize,
    evaluations: usize,
    started: Instant,
) -> GenerationStats {
    let accs: Vec<f64> = pop.iter().map(accuracy_of).collect();
    let sizes: Vec<f64> = pop.iter().map(|i| size_of(i) as f64).collect();
    let best = pop
        .iter()
        .map(accuracy_of)
        .fold(f64::NEG_INFINITY, f64::max);
    GenerationStats {
        generation,
        best_accuracy: best,
        median_accuracy: crate::stats::median(&accs),
        median_size: crate::stats::median(&sizes),
        evaluations,
        elapsed_millis: started.elapsed().as_millis() as u64,
    }
}

fn update_best(best: &mut Option<Individual>, pop: &[Individual]) {
    for ind in pop {
        let improves = match best.as_ref() {
            None => true,
            Some(b) => ranks_better(ind, b),
        };
        if improves {
            *best = Some(ind.clone());
        }
    }
}

fn check_setup(cfg: &GpConfig, data: &Dataset) -> Result<(), EvolveError> {
    cfg.validate()?;
    stratified_split(data, INTERNAL_TRAIN_FRACTION, 0)
        .map(|_| ())
        .map_err(|e| EvolveError::Setup(e.to_string()))
}

/// Standard GP loop: evaluate, select per `selection_mode`, vary (elites
/// exempt), repeat; returns the best-ever individual and per-generation
/// history. `RandomSearch` mode delegates to [`random_search_run`].
pub fn evolve_run(cfg: &GpConfig, data: &Dataset) -> Result<RunResult, EvolveError> {
    if cfg.selection_mode == SelectionMode::RandomSearch {
        return random_search_run(cfg, data);
    }
    check_setup(cfg, data)?;
    let eval_seed = derive_seed(cfg.seed, STREAM_EVAL);
    let init_seed = derive_seed(cfg.seed, STREAM_INIT);
    let mut var_rng = stream_rng(cfg.seed, STREAM_VARIATION);

    let mut discovered = 0u64;
    let mut next_stamp = || {
        let s = discovered;
        discovered += 1;
        s
    };
    let init_depth = INIT_MAX_DEPTH.min(cfg.max_depth);
    let mut pop: Vec<Individual> = (0..cfg.population_size)
        .map(|i| Individual {
            pipeline: random_pipeline_for(init_seed, i as u64, init_depth, cfg.max_operators),
            fitness: None,
            discovered: next_stamp(),
        })
        .collect();

    let mut history = Vec::with_capacity(cfg.generations + 1);
    let mut total_evaluations = 0usize;
    let mut best: Option<Individual> = None;

    for generation in 0..=cfg.generations {
        let gen_started = Instant::now();
        let fresh = evaluate_population(&mut pop, data, eval_seed, cfg.eval_budget_millis);
        total_evaluations += fresh;
        update_best(&mut best, &pop);
        history.push(population_stats(&pop, generation, fresh, gen_started));
        if generation == cfg.generations {
            break;
        }
        let selected = match cfg.selection_mode {
            SelectionMode::Standard => select_standard(&pop, &mut var_rng, cfg),
            SelectionMode::Pareto => select_pareto(&pop, &mut var_rng, cfg),
            SelectionMode::RandomSearch => unreachable!(),
        };
        let exempt = match cfg.selection_mode {
            SelectionMode::Standard => cfg.elite_count(),
            _ => 0,
        };
        let pool = selected.clone();
        pop = selected
            .into_iter()
            .enumerate()
            .map(|(slot, ind)| {
                if slot < exempt {
                    return ind;
                }
                let roll: f64 = var_rng.random();
                if roll < cfg.mutation_rate {
                    Individual {
                        pipeline: mutate(
                            &ind.pipeline,
                            &mut var_rng,
                            cfg.max_depth,
                            cfg.max_operators,
                        ),
                        fitness: None,
                        discovered: next_stamp(),
                    }
                } else if roll < cfg.mutation_rate + cfg.crossover_rate {
                    let partner = &pool[var_rng.random_range(0..pool.len())];
                    Individual {
                        pipeline: crossover(
                            &ind.pipeline,
                            &partner.pipeline,
                            &mut var_rng,
                            cfg.max_depth,
                            cfg.max_operators,
                        ),
                        fitness: None,
                        discovered: next_stamp(),
                    }
                } else {
                    ind
                }
            })
            .collect();
    }

    let pareto_front = if cfg.selection_mode == SelectionMode::Pareto {
        let succeeded: Vec<&Individual> = pop.iter().filter(|i| not_failed(i)).collect();
        let points: Vec<(f64, usize)> =
            succeeded.iter().map(|i| (accuracy_of(i), size_of(i))).collect();
        match fast_nondominated_sort(&points).into_iter().next() {
            Some(front) => front.into_iter().map(|w| succeeded[w].clone()).collect(),
            None => Vec::new(),
        }
    } else {
        Vec::new()
    };

    Ok(RunResult {
        best: best.expect("population evaluated"),
        history,
        total_evaluations,
        pareto_front,
        seed: cfg.seed,
    })
}

/// Evaluates `population_size * generations` independent random pipelines
/// under the same per-pipeline budget; history records the running best per
/// block of `population_size` evaluations.
pub fn random_search_run(cfg: &GpConfig, data: &Dataset) -> Result<RunResult, EvolveError> {
    check_setup(cfg, data)?;
    let eval_seed = derive_seed(cfg.seed, STREAM_EVAL);
    let gen_seed = derive_seed(cfg.seed, STREAM_INIT);
    let total = cfg.population_size * cfg.generations;

    let mut history = Vec::with_capacity(cfg.generations);
    let mut best: Option<Individual> = None;
    let mut evaluated = 0usize;

    for block in 0..cfg.generations {
        let block_started = Instant::now();
        let indices: Vec<usize> =
            (block * cfg.population_size..(block + 1) * cfg.population_size).collect();
        let block_pop: Vec<Individual> = indices
            .par_iter()
            .map(|&i| {
                let pipeline =
                    random_pipeline_for(gen_seed, i as u64, cfg.max_depth, cfg.max_operators);
                let fitness =
                    evaluate_pipeline(&pipeline, data, eval_seed, cfg.eval_budget_millis);
                Individual { pipeline, fitness: Some(fitness), discovered: i as u64 }
            })
            .collect();
        evaluated += block_pop.len();
        update_best(&mut best, &block_pop);
        let mut stats =
            population_stats(&block_pop, block, block_pop.len(), block_started);
        // history records the running best, not the block best
        stats.best_accuracy = accuracy_of(best.as_ref().unwrap());
        history.push(stats);
    }
    debug_assert_eq!(evaluated, total);

    Ok(RunResult {
        best: best.expect("at least one evaluation"),
        history,
        total_evaluations: evaluated,
        pareto_front: Vec::new(),
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests;
