//! Feature selection: variance threshold, ANOVA F-score top-k (also backing
//! the percentile strategy) and recursive feature elimination with an
//! L2-logistic ranker.

use super::{linear, Budget, OpError, TransformState};
use crate::dataset::Dataset;
use crate::stats;

pub(super) fn fit_variance_threshold(
    train: &Dataset,
    threshold: f64,
) -> Result<TransformState, OpError> {
    let keep: Vec<usize> = train
        .columns()
        .iter()
        .enumerate()
        .filter(|(_, col)| stats::variance(col) > threshold)
        .map(|(j, _)| j)
        .collect();
    if keep.is_empty() {
        return Err(OpError::DegenerateOutput);
    }
    Ok(TransformState::Select { keep })
}

/// Keep the k features with the highest one-way ANOVA F-score against the
/// labels; k is clamped to the available width. Selected indices stay in
/// their original column order.
pub(super) fn fit_kbest(train: &Dataset, k: usize) -> TransformState {
    let m = train.n_features();
    let k = k.min(m);
    let scores: Vec<f64> = train
        .columns()
        .iter()
        .map(|col| stats::anova_f(col, train.labels(), train.class_count()))
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let mut keep: Vec<usize> = order.into_iter().take(k).collect();
    keep.sort_unstable();
    TransformState::Select { keep }
}

/// Iteratively drop the lowest-|weight| features of an L2 logistic model
/// (step: 10% of remaining, at least 1) until k remain.
pub(super) fn fit_rfe(train: &Dataset, k: usize, budget: &Budget) -> Result<TransformState, OpError> {
    let m = train.n_features();
    let k = k.min(m).max(1);
    // the first ranker fit alone costs epochs * rows * features * classes
    // gradient terms; refuse widths that cannot rank in the time left
    let work = (linear::RFE_RANKER_EPOCHS as u64)
        .saturating_mul(train.n_rows() as u64)
        .saturating_mul(m as u64)
        .saturating_mul(train.class_count() as u64);
    budget.admit_work(work, 300_000)?;
    let mut remaining: Vec<usize> = (0..m).collect();
    while remaining.len() > k {
        budget.check()?;
        let sub = train.take_columns(&remaining);
        let weights = linear::feature_weight_norms(&sub, budget)?;
        let mut order: Vec<usize> = (0..remaining.len()).collect();
        // worst first
        order.sort_by(|&a, &b| weights[a].partial_cmp(&weights[b]).unwrap().then(a.cmp(&b)));
        let step = ((remaining.len() / 10).max(1)).min(remaining.len() - k);
        let drop: std::collections::HashSet<usize> = order.into_iter().take(step).collect();
        remaining = remaining
            .iter()
            .enumerate()
            .filter(|(pos, _)| !drop.contains(pos))
            .map(|(_, &j)| j)
            .collect();
    }
    Ok(TransformState::Select { keep: remaining })
}

pub(super) fn apply(ds: &Dataset, keep: &[usize]) -> (Vec<String>, Vec<Vec<f64>>) {
    let names = keep.iter().map(|&j| ds.feature_names()[j].clone()).collect();
    let columns = keep.iter().map(|&j| ds.column(j).to_vec()).collect();
    (names, columns)
}

impl Dataset {
    /// Column subset preserving the order of `idx` (selector plumbing).
    pub(crate) fn take_columns(&self, idx: &[usize]) -> Dataset {
        let names = idx.iter().map(|&j| self.feature_names()[j].clone()).collect();
        let cols = idx.iter().map(|&j| self.column(j).to_vec()).collect();
        Dataset::new(names, cols, self.labels().to_vec(), self.guess().map(|g| g.to_vec()), self.class_count())
            .expect("column subset preserves invariants")
    }
}

#[cfg(test)]
mod tests {
    use crate::dataset::Dataset;
    use crate::ops::{fit_transform, Budget, OpError, OperatorKind, ParamValue, Params};
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn param(name: &str, v: ParamValue) -> Params {
        let mut p = Params::new();
        p.insert(name.into(), v);
        p
    }

    fn labeled(cols: Vec<Vec<f64>>, labels: Vec<usize>) -> Dataset {
        let names = (0..cols.len()).map(|j| format!("f{j}")).collect();
        Dataset::new(names, cols, labels, None, 2).unwrap()
    }

    #[test]
    fn variance_threshold_drops_constant_only() {
        let ds = labeled(
            vec![vec![1.0, 2.0, 3.0, 4.0], vec![7.0, 7.0, 7.0, 7.0], vec![0.0, 1.0, 0.0, 1.0]],
            vec![0, 0, 1, 1],
        );
        let (_, out) = fit_transform(
            OperatorKind::VarianceThreshold,
            &param("threshold", ParamValue::Real(0.0)),
            &ds,
            &Budget::unlimited(),
        )
        .unwrap();
        assert_eq!(out.feature_names(), &["f0", "f2"]);
    }

    #[test]
    fn variance_threshold_identity_on_distinct_columns() {
        let ds = labeled(vec![vec![1.0, 2.0, 3.0], vec![4.0, 6.0, 5.0]], vec![0, 0, 1]);
        let (_, out) = fit_transform(
            OperatorKind::VarianceThreshold,
            &param("threshold", ParamValue::Real(0.0)),
            &ds,
            &Budget::unlimited(),
        )
        .unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn variance_threshold_all_dropped_is_degenerate() {
        let ds = labeled(vec![vec![5.0, 5.0, 5.0, 5.0]], vec![0, 0, 1, 1]);
        match fit_transform(
            OperatorKind::VarianceThreshold,
            &param("threshold", ParamValue::Real(0.1)),
            &ds,
            &Budget::unlimited(),
        ) {
            Err(OpError::DegenerateOutput) => {}
            other => panic!("expected DegenerateOutput, got {other:?}"),
        }
    }

    #[test]
    fn kbest_prefers_separating_feature_and_clamps() {
        let ds = labeled(
            vec![
                vec![0.1, 0.0, 10.0, 10.2], // separates classes
                vec![5.0, 4.9, 5.1, 5.0],   // noise
            ],
            vec![0, 0, 1, 1],
        );
        let (_, out) = fit_transform(
            OperatorKind::SelectKBest,
            &param("k", ParamValue::Int(1)),
            &ds,
            &Budget::unlimited(),
        )
        .unwrap();
        assert_eq!(out.feature_names(), &["f0"]);
        // over-ask clamps to all features, identity up to column order
        let (_, all) = fit_transform(
            OperatorKind::SelectKBest,
            &param("k", ParamValue::Int(99)),
            &ds,
            &Budget::unlimited(),
        )
        .unwrap();
        assert_eq!(all, ds);
    }

    #[test]
    fn percentile_100_is_identity() {
        let mut rng = seeded_rng(4);
        let cols = (0..7).map(|_| (0..10).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let ds = labeled(cols, (0..10).map(|i| i % 2).collect());
        let (_, out) = fit_transform(
            OperatorKind::SelectPercentile,
            &param("percentile", ParamValue::Int(100)),
            &ds,
            &Budget::unlimited(),
        )
        .unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn rfe_returns_exactly_k_and_finds_signal() {
        let mut rng = seeded_rng(9);
        let n = 60;
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let signal: Vec<f64> =
            labels.iter().map(|&l| l as f64 * 4.0 + rng.random_range(-0.3..0.3)).collect();
        let mut cols = vec![signal];
        for _ in 0..9 {
            cols.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
        }
        let ds = labeled(cols, labels);
        let (fitted, out) = fit_transform(
            OperatorKind::Rfe,
            &param("k", ParamValue::Int(2)),
            &ds,
            &Budget::unlimited(),
        )
        .unwrap();
        assert_eq!(out.n_features(), 2);
        assert_eq!(fitted.out_width(), 2);
        assert!(out.feature_names().contains(&"f0".to_string()), "signal feature survives RFE");
        // over-ask (k exceeds width) keeps everything
        let (_, all) = fit_transform(
            OperatorKind::Rfe,
            &param("k", ParamValue::Int(100)),
            &ds,
            &Budget::unlimited(),
        )
        .unwrap();
        assert_eq!(all.n_features(), 10);
    }
}
