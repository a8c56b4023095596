//! The pipeline operator catalog: three preprocessors, one decomposition,
//! four feature selectors and six classifier families, each implemented
//! natively with a declared hyperparameter schema.
//!
//! Operators are split into a fit phase (train data only) and an apply/predict
//! phase so that held-out rows never influence learned state.

mod boost;
mod knn;
mod linear;
mod pca;
mod poly;
mod scale;
mod select;
mod tree;

pub use linear::logistic_loss_grad;
pub use tree::{CartConfig, CartTree};

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;

/// Hard cap on the feature count any transform may produce. Degree-2
/// polynomial expansion grows quadratically; evolved pipelines that stack it
/// must fail fast instead of exhausting memory.
pub const MAX_OUTPUT_FEATURES: usize = 8192;

#[derive(Debug, Error)]
pub enum OpError {
    #[error("evaluation budget exceeded")]
    BudgetExceeded,
    #[error("input width {got} does not match fitted width {expected}")]
    ShapeMismatch { got: usize, expected: usize },
    #[error("transform produced zero feature columns")]
    DegenerateOutput,
    #[error("transform would produce {0} columns (cap {MAX_OUTPUT_FEATURES})")]
    TooWide(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("training failed: {0}")]
    Training(String),
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
}

/// Wall-clock budget handed down into fitting loops so a single expensive
/// operator cannot stall a whole generation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self { deadline: None }
    }

    pub fn with_millis(budget_millis: u64) -> Self {
        Self { deadline: Some(Instant::now() + std::time::Duration::from_millis(budget_millis)) }
    }

    pub fn check(&self) -> Result<(), OpError> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(OpError::BudgetExceeded),
            _ => Ok(()),
        }
    }

    /// Milliseconds left, or None when unlimited.
    pub fn remaining_millis(&self) -> Option<u64> {
        self.deadline.map(|d| d.saturating_duration_since(Instant::now()).as_millis() as u64)
    }

    /// Refuse work whose best-case runtime already exceeds the remaining
    /// budget. `work_units` is a lower bound on inner-loop operations; the
    /// rate is an optimistic upper bound for this class of kernel, so a
    /// refusal implies the fit could never finish in time.
    pub fn admit_work(&self, work_units: u64, units_per_ms: u64) -> Result<(), OpError> {
        if let Some(remaining) = self.remaining_millis() {
            let min_time_ms = work_units / units_per_ms.max(1);
            if min_time_ms > remaining {
                return Err(OpError::BudgetExceeded);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    Preprocessor,
    Decomposition,
    Selector,
    Model,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    StandardScale,
    RobustScale,
    PolynomialFeatures,
    RandomizedPca,
    VarianceThreshold,
    SelectKBest,
    SelectPercentile,
    Rfe,
    DecisionTree,
    RandomForest,
    GradientBoosting,
    LogisticRegression,
    LinearSvm,
    Knn,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 14] = [
        OperatorKind::StandardScale,
        OperatorKind::RobustScale,
        OperatorKind::PolynomialFeatures,
        OperatorKind::RandomizedPca,
        OperatorKind::VarianceThreshold,
        OperatorKind::SelectKBest,
        OperatorKind::SelectPercentile,
        OperatorKind::Rfe,
        OperatorKind::DecisionTree,
        OperatorKind::RandomForest,
        OperatorKind::GradientBoosting,
        OperatorKind::LogisticRegression,
        OperatorKind::LinearSvm,
        OperatorKind::Knn,
    ];

    pub fn category(self) -> Category {
        use OperatorKind::*;
        match self {
            StandardScale | RobustScale | PolynomialFeatures => Category::Preprocessor,
            RandomizedPca => Category::Decomposition,
            VarianceThreshold | SelectKBest | SelectPercentile | Rfe => Category::Selector,
            DecisionTree | RandomForest | GradientBoosting | LogisticRegression | LinearSvm
            | Knn => Category::Model,
        }
    }

    pub fn is_model(self) -> bool {
        self.category() == Category::Model
    }

    pub fn models() -> impl Iterator<Item = OperatorKind> {
        Self::ALL.into_iter().filter(|k| k.is_model())
    }

    pub fn transforms() -> impl Iterator<Item = OperatorKind> {
        Self::ALL.into_iter().filter(|k| !k.is_model())
    }

    pub fn name(self) -> &'static str {
        use OperatorKind::*;
        match self {
            StandardScale => "StandardScale",
            RobustScale => "RobustScale",
            PolynomialFeatures => "PolynomialFeatures",
            RandomizedPca => "RandomizedPca",
            VarianceThreshold => "VarianceThreshold",
            SelectKBest => "SelectKBest",
            SelectPercentile => "SelectPercentile",
            Rfe => "Rfe",
            DecisionTree => "DecisionTree",
            RandomForest => "RandomForest",
            GradientBoosting => "GradientBoosting",
            LogisticRegression => "LogisticRegression",
            LinearSvm => "LinearSvm",
            Knn => "Knn",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamDomain {
    /// Inclusive integer range.
    IntRange { lo: i64, hi: i64 },
    /// Inclusive real range, optionally sampled log-uniformly.
    RealRange { lo: f64, hi: f64, log: bool },
    /// Finite set of integer choices.
    IntChoice(Vec<i64>),
}

impl ParamDomain {
    pub fn contains(&self, v: &ParamValue) -> bool {
        match (self, v) {
            (ParamDomain::IntRange { lo, hi }, ParamValue::Int(x)) => x >= lo && x <= hi,
            (ParamDomain::RealRange { lo, hi, .. }, ParamValue::Real(x)) => x >= lo && x <= hi,
            (ParamDomain::IntChoice(cs), ParamValue::Int(x)) => cs.contains(x),
            _ => false,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> ParamValue {
        match self {
            ParamDomain::IntRange { lo, hi } => ParamValue::Int(rng.random_range(*lo..=*hi)),
            ParamDomain::RealRange { lo, hi, log: false } => {
                ParamValue::Real(rng.random_range(*lo..=*hi))
            }
            ParamDomain::RealRange { lo, hi, log: true } => {
                let (llo, lhi) = (lo.ln(), hi.ln());
                ParamValue::Real(rng.random_range(llo..=lhi).exp())
            }
            ParamDomain::IntChoice(cs) => ParamValue::Int(cs[rng.random_range(0..cs.len())]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
}

impl ParamValue {
    pub fn as_int(&self) -> i64 {
        match self {
            ParamValue::Int(x) => *x,
            ParamValue::Real(x) => *x as i64,
        }
    }

    pub fn as_real(&self) -> f64 {
        match self {
            ParamValue::Int(x) => *x as f64,
            ParamValue::Real(x) => *x,
        }
    }
}

/// Named parameter bindings for one operator instance. Ordered map so the
/// serialized form has a stable key order.
pub type Params = BTreeMap<String, ParamValue>;

/// Per-kind hyperparameter schema. Wide integer domains (component counts,
/// feature counts) are sampled from a static range and clamped to the data
/// width at fit time, since evolved parameters routinely exceed the width of
/// whatever dataset reaches the operator.
#[derive(Debug, Clone)]
pub struct ParamSchema {
    entries: Vec<(&'static str, ParamDomain)>,
}

impl ParamSchema {
    pub fn for_kind(kind: OperatorKind) -> Self {
        use OperatorKind::*;
        let entries: Vec<(&'static str, ParamDomain)> = match kind {
            StandardScale | RobustScale | PolynomialFeatures => vec![],
            RandomizedPca => vec![("components", ParamDomain::IntRange { lo: 1, hi: 100 })],
            VarianceThreshold => {
                vec![("threshold", ParamDomain::RealRange { lo: 0.0, hi: 0.25, log: false })]
            }
            SelectKBest => vec![("k", ParamDomain::IntRange { lo: 1, hi: 100 })],
            SelectPercentile => vec![(
                "percentile",
                ParamDomain::IntChoice((1..=20).map(|i| 5 * i).collect()),
            )],
            Rfe => vec![("k", ParamDomain::IntRange { lo: 1, hi: 100 })],
            DecisionTree => vec![("max_depth", ParamDomain::IntRange { lo: 0, hi: 10 })],
            RandomForest => vec![
                ("trees", ParamDomain::IntRange { lo: 10, hi: 500 }),
                ("max_depth", ParamDomain::IntRange { lo: 0, hi: 10 }),
            ],
            GradientBoosting => vec![
                ("stages", ParamDomain::IntRange { lo: 10, hi: 500 }),
                ("learning_rate", ParamDomain::RealRange { lo: 0.01, hi: 1.0, log: true }),
                ("max_depth", ParamDomain::IntRange { lo: 1, hi: 10 }),
            ],
            LogisticRegression => {
                vec![("reg", ParamDomain::RealRange { lo: 1e-4, hi: 1e2, log: true })]
            }
            LinearSvm => vec![("reg", ParamDomain::RealRange { lo: 1e-4, hi: 1e2, log: true })],
            Knn => vec![("k", ParamDomain::IntRange { lo: 1, hi: 50 })],
        };
        Self { entries }
    }

    pub fn entries(&self) -> &[(&'static str, ParamDomain)] {
        &self.entries
    }

    /// Empty list iff `params` binds exactly the schema's names within domains.
    pub fn violations(&self, params: &Params) -> Vec<String> {
        let mut out = Vec::new();
        for (name, domain) in &self.entries {
            match params.get(*name) {
                None => out.push(format!("missing parameter `{name}`")),
                Some(v) if !domain.contains(v) => {
                    out.push(format!("parameter `{name}` out of domain"))
                }
                _ => {}
            }
        }
        for name in params.keys() {
            if !self.entries.iter().any(|(n, _)| n == name) {
                out.push(format!("unknown parameter `{name}`"));
            }
        }
        out
    }
}

/// Uniform draw from every dimension of the kind's schema.
pub fn sample_params<R: Rng>(kind: OperatorKind, rng: &mut R) -> Params {
    ParamSchema::for_kind(kind)
        .entries
        .iter()
        .map(|(name, domain)| (name.to_string(), domain.sample(rng)))
        .collect()
}

fn validate_params(kind: OperatorKind, params: &Params) -> Result<(), OpError> {
    let v = ParamSchema::for_kind(kind).violations(params);
    if v.is_empty() {
        Ok(())
    } else {
        Err(OpError::InvalidParams(format!("{}: {}", kind.name(), v.join("; "))))
    }
}

/// A transform fitted on training data: bound parameters plus learned state.
#[derive(Debug, Clone)]
pub struct FittedTransform {
    pub kind: OperatorKind,
    in_width: usize,
    state: TransformState,
}

#[derive(Debug, Clone)]
enum TransformState {
    /// Per-column affine scaling; `zero_out` columns map to 0 entirely.
    Scale { centers: Vec<f64>, scales: Vec<f64>, zero_out: Vec<bool> },
    /// Degree-2 polynomial expansion.
    Poly,
    /// Projection onto principal components (row = component, in input space).
    Pca { means: Vec<f64>, components: Vec<Vec<f64>> },
    /// Keep a subset of input columns (ascending index order).
    Select { keep: Vec<usize> },
}

impl FittedTransform {
    /// Output feature count as a function of learned state.
    pub fn out_width(&self) -> usize {
        match &self.state {
            TransformState::Scale { centers, .. } => centers.len(),
            TransformState::Poly => (self.in_width + 1) * (self.in_width + 2) / 2,
            TransformState::Pca { components, .. } => components.len(),
            TransformState::Select { keep } => keep.len(),
        }
    }
}

/// A classifier fitted on training data.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub kind: OperatorKind,
    in_width: usize,
    class_count: usize,
    state: ModelState,
}

#[derive(Debug, Clone)]
enum ModelState {
    Tree(tree::CartTree),
    Forest(Vec<tree::CartTree>),
    Boost(boost::BoostModel),
    Linear(linear::LinearModel),
    Knn(knn::KnnModel),
}

impl FittedModel {
    /// Per-stage training loss, recorded by gradient boosting only.
    pub fn training_losses(&self) -> Option<&[f64]> {
        match &self.state {
            ModelState::Boost(b) => Some(&b.train_losses),
            _ => None,
        }
    }
}

/// Fit a non-model operator on `train` and return the transformed train set.
/// Statistics are learned from `train` only.
pub fn fit_transform(
    kind: OperatorKind,
    params: &Params,
    train: &Dataset,
    budget: &Budget,
) -> Result<(FittedTransform, Dataset), OpError> {
    assert!(!kind.is_model(), "fit_transform called with model kind {kind:?}");
    validate_params(kind, params)?;
    if train.n_rows() < 2 {
        return Err(OpError::Training("transform needs at least 2 rows".into()));
    }
    budget.check()?;
    let m = train.n_features();
    let state = match kind {
        OperatorKind::StandardScale => scale::fit_standard(train),
        OperatorKind::RobustScale => scale::fit_robust(train),
        OperatorKind::PolynomialFeatures => {
            let out = (m + 1) * (m + 2) / 2;
            if out > MAX_OUTPUT_FEATURES {
                return Err(OpError::TooWide(out));
            }
            TransformState::Poly
        }
        OperatorKind::RandomizedPca => {
            let k = params["components"].as_int().max(1) as usize;
            pca::fit(train, k, budget)?
        }
        OperatorKind::VarianceThreshold => {
            let threshold = params["threshold"].as_real();
            select::fit_variance_threshold(train, threshold)?
        }
        OperatorKind::SelectKBest => {
            let k = params["k"].as_int().max(1) as usize;
            select::fit_kbest(train, k)
        }
        OperatorKind::SelectPercentile => {
            let pct = params["percentile"].as_int().clamp(1, 100) as usize;
            let k = (pct * m).div_ceil(100).max(1);
            select::fit_kbest(train, k)
        }
        OperatorKind::Rfe => {
            let k = params["k"].as_int().max(1) as usize;
            select::fit_rfe(train, k, budget)?
        }
        _ => unreachable!(),
    };
    let fitted = FittedTransform { kind, in_width: m, state };
    if fitted.out_width() == 0 {
        return Err(OpError::DegenerateOutput);
    }
    let transformed = apply_transform(&fitted, train)?;
    Ok((fitted, transformed))
}

/// Apply train-fitted statistics to any dataset of the fitted width.
pub fn apply_transform(t: &FittedTransform, ds: &Dataset) -> Result<Dataset, OpError> {
    if ds.n_features() != t.in_width {
        return Err(OpError::ShapeMismatch { got: ds.n_features(), expected: t.in_width });
    }
    let (names, columns) = match &t.state {
        TransformState::Scale { centers, scales, zero_out } => {
            scale::apply(ds, centers, scales, zero_out)
        }
        TransformState::Poly => poly::apply(ds),
        TransformState::Pca { means, components } => pca::apply(ds, means, components),
        TransformState::Select { keep } => select::apply(ds, keep),
    };
    Ok(ds.with_features(names, columns)?)
}

/// Train a classifier on `train`. Randomized learners draw from `seed`.
pub fn train_model(
    kind: OperatorKind,
    params: &Params,
    train: &Dataset,
    seed: u64,
    budget: &Budget,
) -> Result<FittedModel, OpError> {
    assert!(kind.is_model(), "train_model called with non-model kind {kind:?}");
    validate_params(kind, params)?;
    let counts = train.class_counts();
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(OpError::Training(format!("class {empty} has no training rows")));
    }
    budget.check()?;
    let state = match kind {
        OperatorKind::DecisionTree => {
            let max_depth = params["max_depth"].as_int().max(0) as usize;
            ModelState::Tree(tree::fit_full(train, max_depth, budget)?)
        }
        OperatorKind::RandomForest => {
            let trees = params["trees"].as_int().max(1) as usize;
            let max_depth = params["max_depth"].as_int().max(0) as usize;
            ModelState::Forest(tree::fit_forest(train, trees, max_depth, seed, budget)?)
        }
        OperatorKind::GradientBoosting => {
            let stages = params["stages"].as_int().max(1) as usize;
            let lr = params["learning_rate"].as_real();
            let max_depth = params["max_depth"].as_int().max(1) as usize;
            ModelState::Boost(boost::fit(train, stages, lr, max_depth, budget)?)
        }
        OperatorKind::LogisticRegression => {
            let reg = params["reg"].as_real();
            ModelState::Linear(linear::fit_logistic(train, reg, budget)?)
        }
        OperatorKind::LinearSvm => {
            let reg = params["reg"].as_real();
            ModelState::Linear(linear::fit_svm(train, reg, budget)?)
        }
        OperatorKind::Knn => {
            let k = params["k"].as_int().max(1) as usize;
            ModelState::Knn(knn::fit(train, k))
        }
        _ => unreachable!(),
    };
    Ok(FittedModel { kind, in_width: train.n_features(), class_count: train.class_count(), state })
}

/// Deterministic label predictions; ties break toward the lowest class id.
pub fn predict(model: &FittedModel, ds: &Dataset) -> Result<Vec<usize>, OpError> {
    if ds.n_features() != model.in_width {
        return Err(OpError::ShapeMismatch { got: ds.n_features(), expected: model.in_width });
    }
    let preds = match &model.state {
        ModelState::Tree(t) => tree::predict_tree(t, ds),
        ModelState::Forest(trees) => tree::predict_forest(trees, ds, model.class_count),
        ModelState::Boost(b) => boost::predict(b, ds),
        ModelState::Linear(l) => linear::predict(l, ds),
        ModelState::Knn(k) => knn::predict(k, ds),
    };
    Ok(preds)
}

/// Argmax with ties resolved toward the lowest index.
pub(crate) fn argmax_tie_lowest(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
