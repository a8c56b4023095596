//! Tree-based pipelines and their evaluation semantics.
//!
//! Data flows leaf-to-root: every `Leaf` yields a fresh copy of the internal
//! train/test pair, transforms fit on train and apply to both halves,
//! `Combine` merges two branches, and each `Model` node demotes any incoming
//! guess column to an ordinary feature, trains, and writes its own
//! predictions as the new guess. Fitness is balanced accuracy of the root
//! guess on the internal stratified holdout.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{
    balanced_accuracy, combine, push_guess_to_feature, stratified_split, Dataset,
};
use crate::ops::{
    apply_transform, fit_transform, predict, sample_params, train_model, Budget, OpError,
    OperatorKind, ParamSchema, Params,
};
use crate::rng::{derive_seed, stream_rng};

/// Version tag of the pipeline serialization format.
pub const FORMAT_VERSION: &str = "tpot-tree/1";

/// Fraction of the data used for the internal training split.
pub const INTERNAL_TRAIN_FRACTION: f64 = 0.75;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("pipeline does not validate: {0}")]
    Invalid(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("unsupported format version `{0}` (expected {FORMAT_VERSION})")]
    Version(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineNode {
    Leaf,
    Transform { kind: OperatorKind, params: Params, child: Box<PipelineNode> },
    Combine { left: Box<PipelineNode>, right: Box<PipelineNode> },
    Model { kind: OperatorKind, params: Params, child: Box<PipelineNode> },
}

impl PipelineNode {
    pub fn operator_count(&self) -> usize {
        match self {
            PipelineNode::Leaf => 0,
            PipelineNode::Transform { child, .. } | PipelineNode::Model { child, .. } => {
                1 + child.operator_count()
            }
            PipelineNode::Combine { left, right } => {
                1 + left.operator_count() + right.operator_count()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            PipelineNode::Leaf => 0,
            PipelineNode::Transform { child, .. } | PipelineNode::Model { child, .. } => {
                1 + child.depth()
            }
            PipelineNode::Combine { left, right } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn is_model(&self) -> bool {
        matches!(self, PipelineNode::Model { .. })
    }
}

/// A typed operator tree whose root must be a model node.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub root: PipelineNode,
}

impl Pipeline {
    /// Operator count: all non-Leaf nodes, Combine included.
    pub fn size(&self) -> usize {
        self.root.operator_count()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Empty iff the root is a model, every params vector is in-schema and
    /// the depth/size caps hold.
    pub fn validate(&self, max_depth: usize, max_operators: usize) -> Vec<String> {
        let mut violations = Vec::new();
        if !self.root.is_model() {
            violations.push("root node is not a model".to_string());
        }
        let mut stack = vec![&self.root];
        let mut ordinal = 0usize;
        while let Some(node) = stack.pop() {
            match node {
                PipelineNode::Leaf => {}
                PipelineNode::Transform { kind, params, child } => {
                    if kind.is_model() {
                        violations.push(format!(
                            "node #{ordinal} ({}) is a model in a transform position",
                            kind.name()
                        ));
                    }
                    for v in ParamSchema::for_kind(*kind).violations(params) {
                        violations.push(format!("node #{ordinal} ({}): {v}", kind.name()));
                    }
                    stack.push(child);
                }
                PipelineNode::Model { kind, params, child } => {
                    if !kind.is_model() {
                        violations.push(format!(
                            "node #{ordinal} ({}) is not a model kind",
                            kind.name()
                        ));
                    }
                    for v in ParamSchema::for_kind(*kind).violations(params) {
                        violations.push(format!("node #{ordinal} ({}): {v}", kind.name()));
                    }
                    stack.push(child);
                }
                PipelineNode::Combine { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
            ordinal += 1;
        }
        let depth = self.depth();
        if depth > max_depth {
            violations.push(format!("depth {depth} exceeds cap {max_depth}"));
        }
        let size = self.size();
        if size > max_operators {
            violations.push(format!("size {size} exceeds cap {max_operators}"));
        }
        if size == 0 {
            violations.push("pipeline has no operators".to_string());
        }
        violations
    }

    /// One-line human-readable rendering, children before parameters.
    pub fn render(&self) -> String {
        render_node(&self.root)
    }
}

fn render_node(node: &PipelineNode) -> String {
    fn params_suffix(params: &Params) -> String {
        params
            .iter()
            .map(|(k, v)| match v {
                crate::ops::ParamValue::Int(i) => format!(", {k}={i}"),
                crate::ops::ParamValue::Real(r) => format!(", {k}={r:.4}"),
            })
            .collect()
    }
    match node {
        PipelineNode::Leaf => "Leaf".to_string(),
        PipelineNode::Combine { left, right } => {
            format!("Combine({}, {})", render_node(left), render_node(right))
        }
        PipelineNode::Transform { kind, params, child }
        | PipelineNode::Model { kind, params, child } => {
            format!("{}({}{})", kind.name(), render_node(child), params_suffix(params))
        }
    }
}

/// Grow-style random pipeline: model-forced root, typed children, all
/// parameters sampled from their schemas, size capped by `max_operators`.
pub fn random_pipeline<R: Rng>(rng: &mut R, max_depth: usize, max_operators: usize) -> Pipeline {
    assert!(max_depth >= 1, "max_depth must be at least 1");
    let model_kinds: Vec<OperatorKind> = OperatorKind::models().collect();
    let transform_kinds: Vec<OperatorKind> = OperatorKind::transforms().collect();
    let root_kind = model_kinds[rng.random_range(0..model_kinds.len())];
    let params = sample_params(root_kind, rng);
    let mut ops_left = max_operators.saturating_sub(1);
    let child = grow(rng, max_depth - 1, &mut ops_left, &model_kinds, &transform_kinds);
    Pipeline { root: PipelineNode::Model { kind: root_kind, params, child: Box::new(child) } }
}

fn grow<R: Rng>(
    rng: &mut R,
    depth_left: usize,
    ops_left: &mut usize,
    models: &[OperatorKind],
    transforms: &[OperatorKind],
) -> PipelineNode {
    if depth_left == 0 || *ops_left == 0 {
        return PipelineNode::Leaf;
    }
    let roll: f64 = rng.random();
    if roll < 0.28 {
        PipelineNode::Leaf
    } else if roll < 0.68 {
        *ops_left -= 1;
        let kind = transforms[rng.random_range(0..transforms.len())];
        let params = sample_params(kind, rng);
        let child = grow(rng, depth_left - 1, ops_left, models, transforms);
        PipelineNode::Transform { kind, params, child: Box::new(child) }
    } else if roll < 0.80 {
        *ops_left -= 1;
        let left = grow(rng, depth_left - 1, ops_left, models, transforms);
        let right = grow(rng, depth_left - 1, ops_left, models, transforms);
        PipelineNode::Combine { left: Box::new(left), right: Box::new(right) }
    } else {
        *ops_left -= 1;
        let kind = models[rng.random_range(0..models.len())];
        let params = sample_params(kind, rng);
        let child = grow(rng, depth_left - 1, ops_left, models, transforms);
        PipelineNode::Model { kind, params, child: Box::new(child) }
    }
}

/// Evaluation outcome of one pipeline on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub balanced_accuracy: f64,
    pub size: usize,
    pub eval_millis: u64,
    pub failed: bool,
}

impl FitnessRecord {
    fn fail(size: usize, started: Instant) -> Self {
        Self {
            balanced_accuracy: 0.0,
            size,
            eval_millis: started.elapsed().as_millis() as u64,
            failed: true,
        }
    }
}

struct EvalCtx {
    budget: Budget,
    model_seed: u64,
    node_counter: u64,
    demote_counter: u64,
}

/// Evaluate on an internal stratified 75/25 split of `data`. The split seed
/// derives from `seed` alone, so every pipeline scored with the same seed in
/// a run sees the same split. All failures fold into a failed record.
pub fn evaluate_pipeline(
    pipeline: &Pipeline,
    data: &Dataset,
    seed: u64,
    budget_millis: u64,
) -> FitnessRecord {
    let started = Instant::now();
    let split = match stratified_split(data, INTERNAL_TRAIN_FRACTION, derive_seed(seed, 0)) {
        Ok(s) => s,
        Err(_) => return FitnessRecord::fail(pipeline.size(), started),
    };
    evaluate_on_split_from(pipeline, &split.train, &split.test, seed, budget_millis, started)
}

/// Evaluate with an explicit train/test pair (used for outer-holdout scoring:
/// fit on the full outer-train, score on rows evolution never saw).
pub fn evaluate_on_split(
    pipeline: &Pipeline,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
    budget_millis: u64,
) -> FitnessRecord {
    evaluate_on_split_from(pipeline, train, test, seed, budget_millis, Instant::now())
}

fn evaluate_on_split_from(
    pipeline: &Pipeline,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
    budget_millis: u64,
    started: Instant,
) -> FitnessRecord {
    let mut ctx = EvalCtx {
        budget: Budget::with_millis(budget_millis),
        model_seed: derive_seed(seed, 1),
        node_counter: 0,
        demote_counter: 0,
    };
    match exec(&pipeline.root, train, test, &mut ctx) {
        Ok((_, test_out)) => match test_out.guess() {
            Some(guess) => match balanced_accuracy(test_out.labels(), guess) {
                Ok(acc) => FitnessRecord {
                    balanced_accuracy: acc,
                    size: pipeline.size(),
                    eval_millis: started.elapsed().as_millis() as u64,
                    failed: false,
                },
                Err(_) => FitnessRecord::fail(pipeline.size(), started),
            },
            None => FitnessRecord::fail(pipeline.size(), started),
        },
        Err(_) => FitnessRecord::fail(pipeline.size(), started),
    }
}

fn exec(
    node: &PipelineNode,
    train: &Dataset,
    test: &Dataset,
    ctx: &mut EvalCtx,
) -> Result<(Dataset, Dataset), OpError> {
    ctx.budget.check()?;
    match node {
        PipelineNode::Leaf => Ok((train.clone(), test.clone())),
        PipelineNode::Transform { kind, params, child } => {
            let (tr, te) = exec(child, train, test, ctx)?;
            let (fitted, tr_out) = fit_transform(*kind, params, &tr, &ctx.budget)?;
            let te_out = apply_transform(&fitted, &te)?;
            Ok((tr_out, te_out))
        }
        PipelineNode::Combine { left, right } => {
            let (ltr, lte) = exec(left, train, test, ctx)?;
            let (rtr, rte) = exec(right, train, test, ctx)?;
            Ok((combine(&ltr, &rtr)?, combine(&lte, &rte)?))
        }
        PipelineNode::Model { kind, params, child } => {
            let (mut tr, mut te) = exec(child, train, test, ctx)?;
            // demote the previous classifier's predictions to a feature so
            // this model (and everything above it) can train on them
            if tr.guess().is_some() {
                let tag = format!("guess_{}", ctx.demote_counter);
                ctx.demote_counter += 1;
                tr = push_guess_to_feature(&tr, &tag)?;
                te = push_guess_to_feature(&te, &tag)?;
            }
            let node_seed = derive_seed(ctx.model_seed, ctx.node_counter);
            ctx.node_counter += 1;
            let model = train_model(*kind, params, &tr, node_seed, &ctx.budget)?;
            let tr_guess = predict(&model, &tr)?;
            let te_guess = predict(&model, &te)?;
            Ok((tr.with_guess(tr_guess)?, te.with_guess(te_guess)?))
        }
    }
}

// -------------------------------------------------------------------------
// Serialization: {op, params, children} tree document, version "tpot-tree/1"
// -------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    version: String,
    root: NodeDoc,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    op: String,
    params: Params,
    children: Vec<NodeDoc>,
}

fn node_to_doc(node: &PipelineNode) -> NodeDoc {
    match node {
        PipelineNode::Leaf => {
            NodeDoc { op: "Leaf".into(), params: Params::new(), children: vec![] }
        }
        PipelineNode::Combine { left, right } => NodeDoc {
            op: "Combine".into(),
            params: Params::new(),
            children: vec![node_to_doc(left), node_to_doc(right)],
        },
        PipelineNode::Transform { kind, params, child }
        | PipelineNode::Model { kind, params, child } => NodeDoc {
            op: kind.name().into(),
            params: params.clone(),
            children: vec![node_to_doc(child)],
        },
    }
}

fn kind_from_name(name: &str) -> Option<OperatorKind> {
    OperatorKind::ALL.into_iter().find(|k| k.name() == name)
}

fn doc_to_node(doc: &NodeDoc, path: &str) -> Result<PipelineNode, PipelineError> {
    let arity_err = |expected: usize| PipelineError::Parse {
        location: path.to_string(),
        message: format!("op `{}` wants {expected} children, got {}", doc.op, doc.children.len()),
    };
    match doc.op.as_str() {
        "Leaf" => {
            if !doc.children.is_empty() {
                return Err(arity_err(0));
            }
            Ok(PipelineNode::Leaf)
        }
        "Combine" => {
            if doc.children.len() != 2 {
                return Err(arity_err(2));
            }
            let left = doc_to_node(&doc.children[0], &format!("{path}/0"))?;
            let right = doc_to_node(&doc.children[1], &format!("{path}/1"))?;
            Ok(PipelineNode::Combine { left: Box::new(left), right: Box::new(right) })
        }
        name => {
            let kind = kind_from_name(name).ok_or_else(|| PipelineError::Parse {
                location: path.to_string(),
                message: format!("unknown operator `{name}`"),
            })?;
            if doc.children.len() != 1 {
                return Err(arity_err(1));
            }
            let child = Box::new(doc_to_node(&doc.children[0], &format!("{path}/0"))?);
            let params = doc.params.clone();
            if kind.is_model() {
                Ok(PipelineNode::Model { kind, params, child })
            } else {
                Ok(PipelineNode::Transform { kind, params, child })
            }
        }
    }
}

/// Stable structured-text serialization of a pipeline.
pub fn serialize(pipeline: &Pipeline) -> String {
    let doc = TreeDoc { version: FORMAT_VERSION.to_string(), root: node_to_doc(&pipeline.root) };
    serde_json::to_string_pretty(&doc).expect("pipeline document serializes")
}

/// Parse a pipeline document; reports a location on malformed input.
pub fn deserialize(text: &str) -> Result<Pipeline, PipelineError> {
    let doc: TreeDoc = serde_json::from_str(text).map_err(|e| PipelineError::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    if doc.version != FORMAT_VERSION {
        return Err(PipelineError::Version(doc.version));
    }
    Ok(Pipeline { root: doc_to_node(&doc.root, "root")? })
}

/// Fresh generator stream per (seed, index): used by random search so the
/// i-th sampled pipeline is independent of evaluation order.
pub fn random_pipeline_for(
    seed: u64,
    index: u64,
    max_depth: usize,
    max_operators: usize,
) -> Pipeline {
    let mut rng = stream_rng(seed, index);
    random_pipeline(&mut rng, max_depth, max_operators)
}
