//! Labeled numeric data sets, stratified splitting, combination and the
//! balanced-accuracy metric.
//!
//! A [`Dataset`] is immutable after construction; all operations return new
//! values, so datasets can be shared read-only across threads.

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::rng::seeded_rng;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("labels length {got} does not match row count {expected}")]
    LabelLength { got: usize, expected: usize },
    #[error("guess length {got} does not match row count {expected}")]
    GuessLength { got: usize, expected: usize },
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("class id {id} out of range for {class_count} classes")]
    ClassOutOfRange { id: usize, class_count: usize },
    #[error("class_count must be >= 2, got {0}")]
    TooFewClasses(usize),
    #[error("dataset must have at least one feature")]
    NoFeatures,
    #[error("class {class} has {count} rows; stratified split needs at least 2")]
    SplitInfeasible { class: usize, count: usize },
    #[error("train_fraction must lie in (0, 1), got {0}")]
    BadFraction(f64),
    #[error("truth and prediction lengths differ: {truth} vs {preds}")]
    MetricLengthMismatch { truth: usize, preds: usize },
    #[error("balanced accuracy of empty label vectors is undefined")]
    MetricEmpty,
    #[error("cannot combine: {0}")]
    IncompatibleCombine(String),
    #[error("dataset has no guess column")]
    NoGuess,
}

/// Rectangular numeric feature matrix with class labels and an optional
/// per-row "guess" column holding the most recent classifier's predictions.
///
/// Features are stored column-major: `columns[j]` is the j-th feature across
/// all rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    labels: Vec<usize>,
    guess: Option<Vec<usize>>,
    class_count: usize,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        labels: Vec<usize>,
        guess: Option<Vec<usize>>,
        class_count: usize,
    ) -> Result<Self, DatasetError> {
        if class_count < 2 {
            return Err(DatasetError::TooFewClasses(class_count));
        }
        if feature_names.is_empty() || columns.is_empty() {
            return Err(DatasetError::NoFeatures);
        }
        assert_eq!(feature_names.len(), columns.len(), "names/columns mismatch");
        let n = labels.len();
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(DatasetError::RaggedRow { row: j, got: col.len(), expected: n });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateFeature(name.clone()));
            }
        }
        for &l in &labels {
            if l >= class_count {
                return Err(DatasetError::ClassOutOfRange { id: l, class_count });
            }
        }
        if let Some(g) = &guess {
            if g.len() != n {
                return Err(DatasetError::GuessLength { got: g.len(), expected: n });
            }
            for &v in g {
                if v >= class_count {
                    return Err(DatasetError::ClassOutOfRange { id: v, class_count });
                }
            }
        }
        Ok(Self { feature_names, columns, labels, guess, class_count })
    }

    /// Build from row-major data; rows[i] is one instance.
    pub fn from_rows(
        feature_names: Vec<String>,
        rows: &[Vec<f64>],
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self, DatasetError> {
        let m = feature_names.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(DatasetError::RaggedRow { row: i, got: r.len(), expected: m });
            }
        }
        let mut columns = vec![Vec::with_capacity(rows.len()); m];
        for r in rows {
            for (j, &v) in r.iter().enumerate() {
                columns[j].push(v);
            }
        }
        Self::new(feature_names, columns, labels, None, class_count)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn guess(&self) -> Option<&[usize]> {
        self.guess.as_deref()
    }

    /// Materialize row `i` (feature values in column order).
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Replace the feature block, keeping labels, guess and class bookkeeping.
    pub fn with_features(
        &self,
        feature_names: Vec<String>,
        columns: Vec<Vec<f64>>,
    ) -> Result<Self, DatasetError> {
        Self::new(feature_names, columns, self.labels.clone(), self.guess.clone(), self.class_count)
    }

    /// Same dataset with the guess column replaced.
    pub fn with_guess(&self, guess: Vec<usize>) -> Result<Self, DatasetError> {
        Self::new(
            self.feature_names.clone(),
            self.columns.clone(),
            self.labels.clone(),
            Some(guess),
            self.class_count,
        )
    }

    /// Subset of rows by index, preserving order of `idx`.
    pub fn take_rows(&self, idx: &[usize]) -> Self {
        let columns: Vec<Vec<f64>> =
            self.columns.iter().map(|c| idx.iter().map(|&i| c[i]).collect()).collect();
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        let guess = self.guess.as_ref().map(|g| idx.iter().map(|&i| g[i]).collect());
        Self {
            feature_names: self.feature_names.clone(),
            columns,
            labels,
            guess,
            class_count: self.class_count,
        }
    }

    /// Per-class row counts.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// A stratified train/test division of one parent dataset.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
}

/// Stratified split: per-class proportions in `train` match `train_fraction`
/// within one row, and every class with >= 2 parent rows appears in both
/// halves. Deterministic for a fixed seed.
pub fn stratified_split(
    ds: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<SplitPair, DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::BadFraction(train_fraction));
    }
    let counts = ds.class_counts();
    for (class, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(DatasetError::SplitInfeasible { class, count });
        }
    }
    let mut rng = seeded_rng(seed);
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); ds.class_count()];
    for (i, &l) in ds.labels().iter().enumerate() {
        per_class[l].push(i);
    }
    for idx in per_class.iter_mut() {
        idx.shuffle(&mut rng);
    }

    // Largest-remainder allocation so the train total is round(frac * n)
    // while each class stays within +-1 of its proportional share.
    let n = ds.n_rows();
    let total_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let targets: Vec<f64> = counts.iter().map(|&c| train_fraction * c as f64).collect();
    let mut take: Vec<usize> = targets.iter().map(|t| t.floor() as usize).collect();
    let mut order: Vec<usize> = (0..take.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = targets[a] - take[a] as f64;
        let rb = targets[b] - take[b] as f64;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let assigned: usize = take.iter().sum();
    for &c in order.iter().take(total_train.saturating_sub(assigned)) {
        take[c] += 1;
    }
    // both halves must see every class
    for (c, t) in take.iter_mut().enumerate() {
        *t = (*t).clamp(1, counts[c] - 1);
    }

    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (c, idx) in per_class.iter().enumerate() {
        train_idx.extend_from_slice(&idx[..take[c]]);
        test_idx.extend_from_slice(&idx[take[c]..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(SplitPair { train: ds.take_rows(&train_idx), test: ds.take_rows(&test_idx) })
}

/// Unweighted mean of per-class recall over the classes present in `truth`.
pub fn balanced_accuracy(truth: &[usize], preds: &[usize]) -> Result<f64, DatasetError> {
    if truth.len() != preds.len() {
        return Err(DatasetError::MetricLengthMismatch { truth: truth.len(), preds: preds.len() });
    }
    if truth.is_empty() {
        return Err(DatasetError::MetricEmpty);
    }
    let max_class = truth.iter().max().unwrap() + 1;
    let mut total = vec![0usize; max_class];
    let mut correct = vec![0usize; max_class];
    for (&t, &p) in truth.iter().zip(preds) {
        total[t] += 1;
        if t == p {
            correct[t] += 1;
        }
    }
    let mut sum = 0.0;
    let mut classes = 0usize;
    for c in 0..max_class {
        if total[c] > 0 {
            sum += correct[c] as f64 / total[c] as f64;
            classes += 1;
        }
    }
    Ok(sum / classes as f64)
}

/// Feature union of two datasets over the same rows. Duplicate feature names
/// keep the first occurrence; `a`'s guess is retained when present, else `b`'s.
pub fn combine(a: &Dataset, b: &Dataset) -> Result<Dataset, DatasetError> {
    if a.n_rows() != b.n_rows() {
        return Err(DatasetError::IncompatibleCombine(format!(
            "row counts differ ({} vs {})",
            a.n_rows(),
            b.n_rows()
        )));
    }
    if a.class_count() != b.class_count() {
        return Err(DatasetError::IncompatibleCombine(format!(
            "class counts differ ({} vs {})",
            a.class_count(),
            b.class_count()
        )));
    }
    if a.labels() != b.labels() {
        return Err(DatasetError::IncompatibleCombine("label vectors differ".into()));
    }
    let mut names = a.feature_names.clone();
    let mut columns = a.columns.clone();
    let existing: std::collections::HashSet<&str> =
        a.feature_names.iter().map(|s| s.as_str()).collect();
    for (name, col) in b.feature_names.iter().zip(&b.columns) {
        if !existing.contains(name.as_str()) {
            names.push(name.clone());
            columns.push(col.clone());
        }
    }
    let guess = a.guess.clone().or_else(|| b.guess.clone());
    Dataset::new(names, columns, a.labels.clone(), guess, a.class_count)
}

/// Move the guess column into a new numeric feature named from `tag`
/// (suffixed `_1`, `_2`, ... on collision) and clear the guess.
pub fn push_guess_to_feature(ds: &Dataset, tag: &str) -> Result<Dataset, DatasetError> {
    let guess = ds.guess.as_ref().ok_or(DatasetError::NoGuess)?;
    let name = unique_name(tag, &ds.feature_names);
    let mut names = ds.feature_names.clone();
    let mut columns = ds.columns.clone();
    names.push(name);
    columns.push(guess.iter().map(|&g| g as f64).collect());
    Dataset::new(names, columns, ds.labels.clone(), None, ds.class_count)
}

pub(crate) fn unique_name(tag: &str, existing: &[String]) -> String {
    let taken: std::collections::HashSet<&str> = existing.iter().map(|s| s.as_str()).collect();
    if !taken.contains(tag) {
        return tag.to_string();
    }
    let mut i = 1;
    loop {
        let candidate = format!("{tag}_{i}");
        if !taken.contains(candidate.as_str()) {
            return candidate;
        }
        i += 1;
    }
}
