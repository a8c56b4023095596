//! Column scaling: standard (mean/population-std) and robust (median/IQR).

use super::TransformState;
use crate::dataset::Dataset;
use crate::stats;

pub(super) fn fit_standard(train: &Dataset) -> TransformState {
    let mut centers = Vec::with_capacity(train.n_features());
    let mut scales = Vec::with_capacity(train.n_features());
    for col in train.columns() {
        let mu = stats::mean(col);
        let sd = stats::variance(col).sqrt();
        centers.push(mu);
        scales.push(if sd > 0.0 { sd } else { 1.0 });
    }
    let zero_out = vec![false; train.n_features()];
    TransformState::Scale { centers, scales, zero_out }
}

pub(super) fn fit_robust(train: &Dataset) -> TransformState {
    let mut centers = Vec::with_capacity(train.n_features());
    let mut scales = Vec::with_capacity(train.n_features());
    let mut zero_out = Vec::with_capacity(train.n_features());
    for col in train.columns() {
        let mut sorted = col.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = stats::quantile_sorted(&sorted, 0.5);
        let iqr = stats::quantile_sorted(&sorted, 0.75) - stats::quantile_sorted(&sorted, 0.25);
        centers.push(med);
        // zero IQR: the whole column maps to 0
        if iqr > 0.0 {
            scales.push(iqr);
            zero_out.push(false);
        } else {
            scales.push(1.0);
            zero_out.push(true);
        }
    }
    TransformState::Scale { centers, scales, zero_out }
}

pub(super) fn apply(
    ds: &Dataset,
    centers: &[f64],
    scales: &[f64],
    zero_out: &[bool],
) -> (Vec<String>, Vec<Vec<f64>>) {
    let names = ds.feature_names().to_vec();
    let columns = ds
        .columns()
        .iter()
        .enumerate()
        .map(|(j, col)| {
            if zero_out[j] {
                vec![0.0; col.len()]
            } else {
                col.iter().map(|x| (x - centers[j]) / scales[j]).collect()
            }
        })
        .collect();
    (names, columns)
}
