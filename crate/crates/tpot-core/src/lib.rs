//! Tree-based pipeline optimization for supervised classification.
//!
//! Pipelines are typed trees of preprocessing, decomposition, feature-selection
//! and modeling operators. Data flows from `Leaf` nodes (copies of the input
//! data set) toward the root; every classifier writes its predictions into a
//! "guess" column, demoting any previous guess to an ordinary feature. A
//! genetic-programming engine evolves pipeline structure and per-operator
//! hyperparameters against balanced accuracy on an internal stratified
//! holdout, optionally under NSGA-II Pareto selection on (accuracy, size).
//!
//! The crate also ships the data generators used by the benchmark harness:
//! a pure-epistasis SNP simulator built on penetrance tables with target
//! heritability, and a synthetic hill/valley series generator.

pub mod dataset;
pub mod datagen;
pub mod evolve;
pub mod ops;
pub mod pipeline;
pub mod rng;
pub(crate) mod stats;
